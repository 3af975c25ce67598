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
#include <vector>

#include "tracklab/attacks.hpp"
#include "tracklab/model.hpp"
#include "tracklab/videodata.hpp"

namespace tracklab {

enum class JitterKind { hue, contrast, brightness, saturation };

/// Frame-wise color jitter. Factors are drawn per frame, uniformly from
/// [1 - budget, 1 + budget] (hue: an additive shift in [-budget, budget] of
/// the hue circle). Never changes frame dimensions or annotations.
struct JitterSpec {
    JitterKind kind = JitterKind::brightness;
    double budget = 0.2;  // in [0, 0.5]
    std::uint64_t seed = 0;

    void validate() const;
};

/// Applies one jitter transform with an explicit factor (brightness /
/// contrast / saturation multiplier, or additive hue shift). Exposed so tests
/// can pin the factor without going through the seeded path.
Frame apply_jitter_frame(const Frame& frame, JitterKind kind, double factor);

Video jitter_video(const Video& video, const JitterSpec& spec);

/// Adds per-pixel i.i.d. Gaussian noise (std in [0, 25/255] intensity units)
/// and clips to [0, 1]. Deterministic per seed.
Video gaussian_noise_video(const Video& video, double stddev, std::uint64_t seed);

/// Benign-only fine-tuning of an (attacked) model; extends the provenance tag
/// with "+finetuned".
TrainResult fine_tune(const TrackerModel& model, const std::vector<TrainingSample>& benign_samples,
                      const TrainConfig& tcfg);

struct PruneSpec {
    double pruning_rate = 0.2;          // fraction of channels to mask, in [0, 1)
    double calibration_fraction = 0.05; // share of benign samples used for ranking
    int target_layer = -1;              // -1: last backbone layer

    void validate() const;
};

/// Per-channel mean absolute activation over the calibration crops.
std::vector<double> channel_activation_means(const TrackerModel& model,
                                             const std::vector<Frame>& calibration_crops,
                                             int layer);

/// Masks the floor(rate * C) channels of the target layer with the smallest
/// mean absolute activation on the calibration crops. The mask is carried in
/// the returned model's parameters; forward passes respect it.
TrackerModel prune_channels(const TrackerModel& model, const std::vector<Frame>& calibration_crops,
                            const PruneSpec& spec);

}  // namespace tracklab
