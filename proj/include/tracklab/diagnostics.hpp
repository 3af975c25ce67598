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

#include <filesystem>
#include <vector>

#include "tracklab/attacks.hpp"
#include "tracklab/model.hpp"
#include "tracklab/trigger.hpp"

namespace tracklab {

/// How far poisoned crops sit from their benign twins in feature space,
/// against the spread within each group.
struct SeparationStats {
    double mean_l1_pair_distance = 0.0;
    double benign_dispersion = 0.0;
    double poisoned_dispersion = 0.0;
    double separation_ratio = 0.0;  // pair distance / benign dispersion; NaN if undefined
    int sample_count = 0;
};

/// Embeds each crop and its poisoned twin through the backbone (flattened
/// feature vectors over `layers`) and reports the separation statistics.
SeparationStats separation_stats(const TrackerModel& model, const std::vector<Frame>& crops,
                                 const TriggerPattern& trig, const PoisonPlacement& place,
                                 const std::vector<int>& layers);

/// Flattened feature vector of one crop (concatenation over `layers`).
std::vector<double> embed_crop(const TrackerModel& model, const Frame& crop,
                               const std::vector<int>& layers);

/// Writes "crop_id,variant,f_0,f_1,..." with one row per (crop, benign) and
/// one per (crop, poisoned). Returns the number of rows written.
int export_embeddings(const TrackerModel& model, const std::vector<Frame>& crops,
                      const TriggerPattern& trig, const PoisonPlacement& place,
                      const std::vector<int>& layers, const std::filesystem::path& out_path);

struct BranchLossGap {
    double mean_poisoned_loss = 0.0;
    double mean_benign_loss = 0.0;
    double gap = 0.0;  // poisoned - benign
    std::string provenance;
};

/// Mean tracking loss with the trigger on the search region minus the mean
/// benign tracking loss, over the given samples.
BranchLossGap branch_loss_gap(const TrackerModel& model, const std::vector<TrainingSample>& samples,
                              const TriggerPattern& trig, const PoisonPlacement& place);

}  // namespace tracklab
