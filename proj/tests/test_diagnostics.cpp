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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tracklab/diagnostics.hpp"
#include "tracklab/error.hpp"
#include "tracklab/rng.hpp"
#include "tracklab/tracker.hpp"

using namespace tracklab;
namespace fs = std::filesystem;

namespace {

TrackerConfig micro_cfg() {
    TrackerConfig cfg;
    cfg.backbone.blocks = {{4, 3, 2, true}, {6, 3, 2, true}, {8, 3, 2, false}};
    cfg.template_size = 31;
    cfg.search_size = 63;
    return cfg;
}

std::vector<Frame> search_crops(int n, const TrackerConfig& cfg, std::uint64_t seed) {
    std::vector<Frame> crops;
    for (int i = 0; i < n; ++i) {
        SyntheticSceneSpec spec;
        spec.n_frames = 3;
        auto [v, a] = generate_synthetic_video(spec, mix_seed(seed, static_cast<std::uint64_t>(i)));
        crops.push_back(crop_search(v.frames.front(), a.boxes.front(), cfg).first);
    }
    return crops;
}

TriggerPattern zero_mask_trigger() {
    TriggerPattern t = builtin_trigger("checker");
    return TriggerPattern::make_unchecked(t.h, t.w, t.image,
                                          std::vector<float>(t.mask.size(), 0.0f), "zero-mask");
}

}  // namespace

TEST_CASE("zero-mask trigger gives zero pair distance") {
    const TrackerConfig cfg = micro_cfg();
    const TrackerModel model = TrackerModel::init(cfg, 3);
    const auto crops = search_crops(3, cfg, 1000);
    const auto st = separation_stats(model, crops, zero_mask_trigger(),
                                     {PoisonAnchor::crop_center, 0.01}, {2});
    CHECK(st.mean_l1_pair_distance == doctest::Approx(0.0));
    CHECK(st.sample_count == 3);
}

TEST_CASE("separation stats match a naive double-loop recomputation") {
    const TrackerConfig cfg = micro_cfg();
    const TrackerModel model = TrackerModel::init(cfg, 5);
    const auto crops = search_crops(5, cfg, 2000);
    const TriggerPattern trig = builtin_trigger("checker");
    const PoisonPlacement place{PoisonAnchor::crop_center, 0.01};
    const std::vector<int> layers{2};

    const auto st = separation_stats(model, crops, trig, place, layers);

    // Oracle: recompute the embeddings and all statistics with plain loops.
    std::vector<std::vector<double>> benign, poisoned;
    for (const auto& crop : crops) {
        benign.push_back(embed_crop(model, crop, layers));
        poisoned.push_back(embed_crop(model, poison_frame(crop, trig, place), layers));
    }
    auto l1 = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
        return s / static_cast<double>(a.size());
    };
    double pair = 0.0;
    for (std::size_t i = 0; i < crops.size(); ++i) pair += l1(benign[i], poisoned[i]);
    pair /= static_cast<double>(crops.size());
    double disp = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < crops.size(); ++i)
        for (std::size_t j = i + 1; j < crops.size(); ++j) {
            disp += l1(benign[i], benign[j]);
            ++pairs;
        }
    disp /= pairs;

    CHECK(std::abs(st.mean_l1_pair_distance - pair) <= 1e-9);
    CHECK(std::abs(st.benign_dispersion - disp) <= 1e-9);
    CHECK(st.separation_ratio == doctest::Approx(pair / disp).epsilon(1e-9));
    CHECK_THROWS_AS(separation_stats(model, {crops[0]}, trig, place, layers), ArgumentError);
}

TEST_CASE("embedding export writes 2N rows matching the in-memory vectors") {
    const TrackerConfig cfg = micro_cfg();
    const TrackerModel model = TrackerModel::init(cfg, 7);
    const auto crops = search_crops(4, cfg, 3000);
    const TriggerPattern trig = builtin_trigger("checker");
    const PoisonPlacement place{PoisonAnchor::crop_center, 0.01};
    const std::vector<int> layers{2};

    const fs::path path = fs::temp_directory_path() / "tracklab_test_embeddings.csv";
    const int rows = export_embeddings(model, crops, trig, place, layers, path);
    CHECK(rows == 8);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("crop_id,variant,f_0", 0) == 0);

    // First data row is the benign embedding of crop 0.
    std::string line;
    std::getline(in, line);
    std::istringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    CHECK(tok == "0");
    std::getline(ss, tok, ',');
    CHECK(tok == "benign");
    const auto expect = embed_crop(model, crops[0], layers);
    for (std::size_t i = 0; i < 5; ++i) {
        std::getline(ss, tok, ',');
        CHECK(std::abs(std::stod(tok) - expect[i]) <= 1e-9);
    }
    int data_rows = 1;
    while (std::getline(in, line))
        if (!line.empty()) ++data_rows;
    CHECK(data_rows == 8);
    fs::remove(path);
}

TEST_CASE("zero-mask trigger zeroes the branch loss gap") {
    SyntheticSceneSpec spec;
    spec.n_frames = 8;
    auto [video, ann] = generate_synthetic_video(spec, 71);
    const TrackerConfig cfg = micro_cfg();
    const auto samples = build_training_set({video}, {ann}, 4, 5, cfg);
    const TrackerModel model = TrackerModel::init(cfg, 9);

    const auto gap = branch_loss_gap(model, samples, zero_mask_trigger(),
                                     {PoisonAnchor::crop_center, 0.01});
    CHECK(gap.gap == doctest::Approx(0.0));
}

TEST_CASE("branch loss gap equals a two-pass mean-difference oracle") {
    SyntheticSceneSpec spec;
    spec.n_frames = 8;
    auto [video, ann] = generate_synthetic_video(spec, 73);
    const TrackerConfig cfg = micro_cfg();
    const auto samples = build_training_set({video}, {ann}, 5, 7, cfg);
    const TrackerModel model = TrackerModel::init(cfg, 11);
    const TriggerPattern trig = builtin_trigger("checker");
    const PoisonPlacement place{PoisonAnchor::crop_center, 0.01};

    const auto gap = branch_loss_gap(model, samples, trig, place);

    double benign = 0.0, poisoned = 0.0;
    for (const auto& s : samples) {
        benign += tracking_loss(model.forward(s.templ, s.search), s.labels);
        poisoned += tracking_loss(model.forward(s.templ, poison_frame(s.search, trig, place)),
                                  s.labels);
    }
    benign /= static_cast<double>(samples.size());
    poisoned /= static_cast<double>(samples.size());
    CHECK(std::abs(gap.gap - (poisoned - benign)) <= 1e-9);
    CHECK(std::abs(gap.mean_benign_loss - benign) <= 1e-9);
    CHECK(std::abs(gap.mean_poisoned_loss - poisoned) <= 1e-9);
}
