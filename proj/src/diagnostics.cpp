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

#include "tracklab/diagnostics.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "tracklab/error.hpp"
#include "tracklab/tracker.hpp"

namespace tracklab {

std::vector<double> embed_crop(const TrackerModel& model, const Frame& crop,
                               const std::vector<int>& layers) {
    const auto feats = model.features(crop);
    std::vector<double> out;
    for (int l : layers) {
        if (l < 0 || l >= static_cast<int>(feats.size()))
            throw ArgumentError("embedding layer index out of range");
        const auto& f = feats[static_cast<std::size_t>(l)];
        out.insert(out.end(), f.raw().begin(), f.raw().end());
    }
    return out;
}

namespace {

double mean_abs_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

double mean_pairwise(const std::vector<std::vector<double>>& group) {
    const std::size_t n = group.size();
    if (n < 2) return 0.0;
    double s = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            s += mean_abs_distance(group[i], group[j]);
            ++pairs;
        }
    return s / static_cast<double>(pairs);
}

}  // namespace

SeparationStats separation_stats(const TrackerModel& model, const std::vector<Frame>& crops,
                                 const TriggerPattern& trig, const PoisonPlacement& place,
                                 const std::vector<int>& layers) {
    if (crops.size() < 2) throw ArgumentError("separation stats need at least 2 crops");

    std::vector<std::vector<double>> benign, poisoned;
    benign.reserve(crops.size());
    poisoned.reserve(crops.size());
    for (const auto& crop : crops) {
        benign.push_back(embed_crop(model, crop, layers));
        poisoned.push_back(embed_crop(model, poison_frame(crop, trig, place), layers));
    }

    SeparationStats st;
    st.sample_count = static_cast<int>(crops.size());
    double pair_sum = 0.0;
    for (std::size_t i = 0; i < crops.size(); ++i)
        pair_sum += mean_abs_distance(benign[i], poisoned[i]);
    st.mean_l1_pair_distance = pair_sum / static_cast<double>(crops.size());
    st.benign_dispersion = mean_pairwise(benign);
    st.poisoned_dispersion = mean_pairwise(poisoned);
    st.separation_ratio = st.benign_dispersion > 0.0
                              ? st.mean_l1_pair_distance / st.benign_dispersion
                              : std::numeric_limits<double>::quiet_NaN();
    return st;
}

int export_embeddings(const TrackerModel& model, const std::vector<Frame>& crops,
                      const TriggerPattern& trig, const PoisonPlacement& place,
                      const std::vector<int>& layers, const std::filesystem::path& out_path) {
    if (crops.empty()) throw ArgumentError("no crops to embed");
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write embeddings to " + out_path.string());

    const auto dim = embed_crop(model, crops.front(), layers).size();
    out << "crop_id,variant";
    for (std::size_t i = 0; i < dim; ++i) out << ",f_" << i;
    out << "\n";
    out.precision(17);

    int rows = 0;
    for (std::size_t i = 0; i < crops.size(); ++i) {
        const auto write_row = [&](const char* variant, const std::vector<double>& v) {
            out << i << "," << variant;
            for (double e : v) out << "," << e;
            out << "\n";
            ++rows;
        };
        write_row("benign", embed_crop(model, crops[i], layers));
        write_row("poisoned", embed_crop(model, poison_frame(crops[i], trig, place), layers));
    }
    if (!out) throw IoError("short write to " + out_path.string());
    return rows;
}

BranchLossGap branch_loss_gap(const TrackerModel& model, const std::vector<TrainingSample>& samples,
                              const TriggerPattern& trig, const PoisonPlacement& place) {
    if (samples.empty()) throw ArgumentError("branch loss gap needs samples");
    double benign_sum = 0.0, poisoned_sum = 0.0;
    for (const auto& s : samples) {
        const ScoreMap clean = model.forward(s.templ, s.search);
        benign_sum += tracking_loss(clean, s.labels);
        const Frame gx = poison_frame(s.search, trig, place);
        const ScoreMap dirty = model.forward(s.templ, gx);
        poisoned_sum += tracking_loss(dirty, s.labels);
    }
    BranchLossGap r;
    r.mean_benign_loss = benign_sum / static_cast<double>(samples.size());
    r.mean_poisoned_loss = poisoned_sum / static_cast<double>(samples.size());
    r.gap = r.mean_poisoned_loss - r.mean_benign_loss;
    r.provenance = model.provenance;
    return r;
}

}  // namespace tracklab
