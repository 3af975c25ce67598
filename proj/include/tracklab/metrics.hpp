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

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tracklab/model.hpp"
#include "tracklab/trigger.hpp"
#include "tracklab/videodata.hpp"

namespace tracklab {

/// Fraction of evaluable frames whose center error is <= threshold pixels.
double precision_score(const std::vector<BoundingBox>& preds,
                       const std::vector<BoundingBox>& gts, const std::vector<bool>& present,
                       double threshold_px = 20.0);

/// Center error with the components divided by the ground-truth box
/// dimensions; success when the normalized distance is <= 0.2.
double normalized_precision(const std::vector<BoundingBox>& preds,
                            const std::vector<BoundingBox>& gts,
                            const std::vector<bool>& present);

/// Success-plot area: fraction of frames with IoU >= u on a 51-point uniform
/// grid over [0, 1], averaged over the grid.
double success_auc(const std::vector<BoundingBox>& preds, const std::vector<BoundingBox>& gts,
                   const std::vector<bool>& present);

/// The 51 success-plot values (thresholds 0, 0.02, ..., 1).
std::vector<double> success_curve(const std::vector<BoundingBox>& preds,
                                  const std::vector<BoundingBox>& gts,
                                  const std::vector<bool>& present);

/// Precision-plot values for integer center-error thresholds 0..50 px.
std::vector<double> precision_curve(const std::vector<BoundingBox>& preds,
                                    const std::vector<BoundingBox>& gts,
                                    const std::vector<bool>& present);

/// Mean over classes of the per-class frame success rate at IoU >= 0.5.
/// Values in each list are per-frame success flags.
double msr50(const std::map<std::string, std::vector<bool>>& per_class_success);

struct SequenceResult {
    std::string id;
    std::string object_class;
    double precision = 0.0;
    double normalized_precision = 0.0;
    double auc = 0.0;
    double sr50 = 0.0;
    int evaluable_frames = 0;
};

/// Before/after-attack metric table. The *_a fields are absent when the
/// evaluation mode is `none`.
struct MetricReport {
    double pr_b = 0.0;
    double npr_b = 0.0;
    double auc_b = 0.0;
    double msr50_b = 0.0;
    std::optional<double> pr_a;
    std::optional<double> npr_a;
    std::optional<double> auc_a;
    std::optional<double> msr50_a;

    std::string attack_mode = "none";
    double tau = 0.0;
    double psi = 0.0;
    std::string trigger_name;

    std::vector<SequenceResult> per_sequence_b;
    std::vector<SequenceResult> per_sequence_a;
    std::vector<double> success_curve_b, success_curve_a;
    std::vector<double> precision_curve_b, precision_curve_a;
};

struct Benchmark {
    std::vector<Video> videos;
    std::vector<TrackAnnotation> annotations;
};

/// Frame-wise preprocessing applied to test videos (the defense hook).
using VideoTransform = std::function<Video(const Video&)>;

/// Runs one-pass tracking on every clean video (-B columns) and on its
/// poisoned version (-A columns), both initialized from the ground-truth
/// first box, then aggregates the metrics over all evaluable frames. The
/// optional preprocess transform runs after poisoning, on both variants.
MetricReport evaluate(const TrackerModel& model, const Benchmark& bench,
                      const TriggerPattern& trig, const PoisonPlacement& place,
                      const AttackMode& mode, const VideoTransform& preprocess = nullptr);

struct PromisingnessBudget {
    double alpha = 0.3;                 // effectiveness margin
    double beta = 0.5;                  // stealthiness budget
    std::string loss_metric = "auc";    // loss = 1 - metric
};

struct PromisingVerdict {
    bool effective = false;
    bool stealthy = false;
    double loss_b = 0.0;
    double loss_a = 0.0;
    double effectiveness_margin = 0.0;  // loss_a - loss_b - alpha
    double stealthiness_margin = 0.0;   // beta - loss_b
    bool promising() const { return effective && stealthy; }
};

/// Definition-style verdict: effective iff loss_B + alpha <= loss_A, stealthy
/// iff loss_B <= beta, with loss = 1 - <selected metric>.
PromisingVerdict is_promising(const MetricReport& report, const PromisingnessBudget& budget);

}  // namespace tracklab
