/* Copyright 2026 The Tracklab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tracklab/model.hpp"
#include "tracklab/tracker.hpp"
#include "tracklab/trigger.hpp"
#include "tracklab/videodata.hpp"

namespace tracklab {

/// One template/search pair with candidate-box labels.
struct TrainingSample {
    Frame search;             // search_size crop
    Frame templ;              // template_size crop
    BoundingBox target_box;   // in search-crop coordinates
    Tensor labels;            // score-map shaped, {-1, +1}
};

struct TrainConfig {
    int epochs = 24;
    int batch_size = 8;
    double lr = 0.01;
    double lr_final = 0.001;  // geometric schedule endpoint; <= 0 keeps lr constant
    double momentum = 0.9;
    double weight_decay = 5e-4;
    std::uint64_t seed = 0;
    double grad_clip = 5.0;  // global-norm clip of the tracking-step gradient; 0 disables
    int samples_per_epoch = 320;
    int max_pair_gap = 30;      // frames between template and search source
    double max_translate = 16;  // random search-center jitter, in crop pixels

    void validate() const;
    double lr_at(int epoch) const;
};

enum class L1Reduction { mean, sum };

struct AttackConfig {
    double poisoning_rate = 0.10;     // gamma
    double modification_rate = 0.01;  // psi for train-time crop poisoning
    double feature_lr_mult = 0.5;
    std::string trigger = "checker";
    std::vector<int> feature_layers;  // empty = last backbone layer
    double feature_grad_clip = 5.0;   // 0 disables clipping
    int feature_step_every = 1;       // one ascent step per this many tracking steps
    int feature_warmup_epochs = 0;    // benign-only epochs before the ascent begins
    // Raw l1 sum: the mean variant needs feature steps far above the
    // multiplier cap to move anything at these feature sizes.
    L1Reduction l1_reduction = L1Reduction::sum;

    void validate() const;
    std::vector<int> effective_layers(int n_blocks) const;
};

/// Per-epoch training statistics; feature/poison columns stay NaN for
/// trainers that do not produce them.
struct LossTraceRow {
    int epoch = 0;
    double mean_tracking_loss = 0.0;
    double mean_feature_loss = std::numeric_limits<double>::quiet_NaN();
    double mean_poison_loss = std::numeric_limits<double>::quiet_NaN();
};

using LossTrace = std::vector<LossTraceRow>;

/// Draws template/search pairs from the videos: one video per sample, two
/// present frames within max_pair_gap, search center jittered so the target
/// is off-center. Deterministic per seed.
std::vector<TrainingSample> build_training_set(const std::vector<Video>& videos,
                                               const std::vector<TrackAnnotation>& annotations,
                                               int n_samples, std::uint64_t seed,
                                               const TrackerConfig& cfg,
                                               const TrainConfig& tcfg = {});

/// Eq.-style feature loss of a crop pair: d(b(x), b(G(x))) + d(b(z), b(G(z)))
/// with d the (mean or sum) absolute difference, averaged over `layers`.
double feature_loss(const TrackerModel& model, const Frame& x, const Frame& z,
                    const TriggerPattern& trig, const PoisonPlacement& place,
                    const std::vector<int>& layers, L1Reduction reduction = L1Reduction::mean);

/// Same, accumulating d(feature loss)/d(backbone params) into `grads`.
double feature_loss_with_grads(const TrackerModel& model, const Frame& x, const Frame& z,
                               const TriggerPattern& trig, const PoisonPlacement& place,
                               const std::vector<int>& layers, L1Reduction reduction,
                               ParamGrads& grads);

/// Tracking loss of one sample; optionally accumulates parameter grads.
double sample_tracking_loss(const TrackerModel& model, const TrainingSample& sample,
                            ParamGrads* grads);

/// Label-flipping batch loss: benign-mean plus poisoned-mean, where each
/// poisoned sample contributes the two flipped-label terms (trigger on the
/// search region, then on the template). `poisoned` flags batch members;
/// grads and the per-part outputs are optional.
double boba_batch_loss(const TrackerModel& model, const std::vector<const TrainingSample*>& batch,
                       const std::vector<bool>& poisoned, const TriggerPattern& trig,
                       double modification_rate, ParamGrads* grads = nullptr,
                       double* benign_part = nullptr, double* poison_part = nullptr);

/// One FSBA feature step: gradient ascent on the batch-mean feature loss,
/// restricted to the backbone, with optional global-norm clipping. Returns
/// the batch-mean feature loss. Head parameters are never touched.
double feature_ascent_step(TrackerModel& model, const std::vector<const TrainingSample*>& batch,
                           const TriggerPattern& trig, const PoisonPlacement& place,
                           const std::vector<int>& layers, L1Reduction reduction, double lr,
                           double grad_clip);

struct TrainResult {
    TrackerModel model;
    LossTrace trace;
};

TrainResult train_benign(const std::vector<TrainingSample>& train_set, const TrackerConfig& cfg,
                         const TrainConfig& tcfg);

TrainResult train_boba(const std::vector<TrainingSample>& train_set, const TrackerConfig& cfg,
                       const TrainConfig& tcfg, const AttackConfig& acfg);

TrainResult train_fsba(const std::vector<TrainingSample>& train_set, const TrackerConfig& cfg,
                       const TrainConfig& tcfg, const AttackConfig& acfg);

/// Resumes benign-only SGD from an existing model (the fine-tuning defense).
TrainResult continue_training(const TrackerModel& start,
                              const std::vector<TrainingSample>& train_set,
                              const TrainConfig& tcfg);

/// indices of the ceil(gamma * N) samples selected for poisoning, drawn once
/// per run.
std::vector<std::size_t> select_poisoned(std::size_t n_samples, double gamma, std::uint64_t seed);

}  // namespace tracklab
