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

#include <algorithm>
#include <cmath>

#include "tracklab/error.hpp"
#include "tracklab/metrics.hpp"
#include "tracklab/rng.hpp"

using namespace tracklab;

namespace {

// Brute-force metric oracles: naive per-frame loops, no shared code with the
// library implementations.
double oracle_precision(const std::vector<BoundingBox>& p, const std::vector<BoundingBox>& g,
                        const std::vector<bool>& present, double thr) {
    int n = 0, hit = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!present[i]) continue;
        ++n;
        const double dx = (p[i].x + p[i].w / 2) - (g[i].x + g[i].w / 2);
        const double dy = (p[i].y + p[i].h / 2) - (g[i].y + g[i].h / 2);
        if (std::sqrt(dx * dx + dy * dy) <= thr) ++hit;
    }
    return static_cast<double>(hit) / n;
}

double oracle_npr(const std::vector<BoundingBox>& p, const std::vector<BoundingBox>& g,
                  const std::vector<bool>& present) {
    int n = 0, hit = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!present[i]) continue;
        ++n;
        const double dx = ((p[i].x + p[i].w / 2) - (g[i].x + g[i].w / 2)) / g[i].w;
        const double dy = ((p[i].y + p[i].h / 2) - (g[i].y + g[i].h / 2)) / g[i].h;
        if (std::sqrt(dx * dx + dy * dy) <= 0.2) ++hit;
    }
    return static_cast<double>(hit) / n;
}

double oracle_iou(const BoundingBox& a, const BoundingBox& b) {
    const double x1 = std::max(a.x, b.x), y1 = std::max(a.y, b.y);
    const double x2 = std::min(a.x + a.w, b.x + b.w), y2 = std::min(a.y + a.h, b.y + b.h);
    if (x2 <= x1 || y2 <= y1) return 0.0;
    const double inter = (x2 - x1) * (y2 - y1);
    return inter / (a.w * a.h + b.w * b.h - inter);
}

double oracle_auc(const std::vector<BoundingBox>& p, const std::vector<BoundingBox>& g,
                  const std::vector<bool>& present) {
    double total = 0.0;
    for (int k = 0; k <= 50; ++k) {
        const double u = k / 50.0;
        int n = 0, hit = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!present[i]) continue;
            ++n;
            const double o = oracle_iou(p[i], g[i]);
            if (o > 0.0 && o >= u) ++hit;
        }
        total += static_cast<double>(hit) / n;
    }
    return total / 51.0;
}

double oracle_mean_iou(const std::vector<BoundingBox>& p, const std::vector<BoundingBox>& g,
                       const std::vector<bool>& present) {
    double s = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!present[i]) continue;
        s += oracle_iou(p[i], g[i]);
        ++n;
    }
    return s / n;
}

double oracle_msr50(const std::map<std::string, std::vector<bool>>& per_class) {
    double acc = 0.0;
    for (const auto& [cls, flags] : per_class) {
        int hit = 0;
        for (bool f : flags) hit += f ? 1 : 0;
        acc += static_cast<double>(hit) / static_cast<double>(flags.size());
    }
    return acc / static_cast<double>(per_class.size());
}

struct Fixture {
    std::vector<BoundingBox> preds, gts;
    std::vector<bool> present;
};

Fixture random_fixture(Rng& rng, int n) {
    Fixture f;
    for (int i = 0; i < n; ++i) {
        const BoundingBox gt{rng.uniform(0, 80), rng.uniform(0, 80), rng.uniform(4, 40),
                             rng.uniform(4, 40)};
        BoundingBox pred = gt;
        if (rng.uniform() < 0.7) {
            pred.x += rng.uniform(-25, 25);
            pred.y += rng.uniform(-25, 25);
            pred.w = std::max(1.0, pred.w * rng.uniform(0.5, 1.6));
            pred.h = std::max(1.0, pred.h * rng.uniform(0.5, 1.6));
        }
        f.preds.push_back(pred);
        f.gts.push_back(gt);
        f.present.push_back(rng.uniform() >= 0.08);
    }
    // Guarantee at least one evaluable frame.
    f.present[0] = true;
    return f;
}

}  // namespace

TEST_CASE("precision closed-form examples") {
    std::vector<BoundingBox> gts{{0, 0, 10, 10}, {0, 0, 10, 10}, {0, 0, 10, 10}};
    std::vector<BoundingBox> preds{{0, 0, 10, 10}, {10, 0, 10, 10}, {30, 0, 10, 10}};
    std::vector<bool> present{true, true, true};
    // center errors [0, 10, 30], threshold 20 -> 2/3
    CHECK(precision_score(preds, gts, present, 20.0) == doctest::Approx(2.0 / 3.0));
    CHECK(precision_score(gts, gts, present) == doctest::Approx(1.0));
    std::vector<BoundingBox> far = gts;
    for (auto& b : far) b.x += 1e6;
    CHECK(precision_score(far, gts, present) == doctest::Approx(0.0));
}

TEST_CASE("normalized precision closed-form examples") {
    std::vector<BoundingBox> gts{{0, 0, 20, 10}};
    std::vector<bool> present{true};
    // offset (0.1 w, 0): normalized error 0.1 -> success
    std::vector<BoundingBox> near{{2, 0, 20, 10}};
    CHECK(normalized_precision(near, gts, present) == doctest::Approx(1.0));
    // offset (0.3 w, 0.3 h): error sqrt(0.18) = 0.424 -> failure
    std::vector<BoundingBox> off{{6, 3, 20, 10}};
    CHECK(normalized_precision(off, gts, present) == doctest::Approx(0.0));
    CHECK(normalized_precision(gts, gts, present) == doctest::Approx(1.0));
}

TEST_CASE("success auc closed-form examples") {
    std::vector<BoundingBox> gts{{0, 0, 10, 10}, {0, 0, 10, 10}, {0, 0, 10, 10}};
    std::vector<bool> present{true, true, true};
    CHECK(success_auc(gts, gts, present) == doctest::Approx(1.0));

    // overlaps [1.0, 0.5, 0.0]: curve mean = 26/51 ~ 0.5098, within 0.01 of mean IoU 0.5
    std::vector<BoundingBox> preds{{0, 0, 10, 10}, {0, 10.0 / 3, 10, 10}, {100, 100, 10, 10}};
    CHECK(oracle_iou(preds[1], gts[1]) == doctest::Approx(0.5).epsilon(1e-9));
    const double auc = success_auc(preds, gts, present);
    CHECK(std::abs(auc - 0.5) <= 0.01);

    std::vector<BoundingBox> zero{{100, 0, 10, 10}, {100, 0, 10, 10}, {100, 0, 10, 10}};
    CHECK(success_auc(zero, gts, present) == doctest::Approx(0.0));
}

TEST_CASE("msr50 averages class success rates") {
    std::map<std::string, std::vector<bool>> per_class;
    per_class["a"] = {true, true, true, false, false};         // 0.6
    per_class["b"] = {true, true};                             // 1.0
    CHECK(msr50(per_class) == doctest::Approx(0.8));
    std::map<std::string, std::vector<bool>> one{{"x", {true, true}}};
    CHECK(msr50(one) == doctest::Approx(1.0));
    std::map<std::string, std::vector<bool>> eq{{"x", {true, false}}, {"y", {false, true}}};
    CHECK(msr50(eq) == doctest::Approx(0.5));
    CHECK_THROWS_AS(msr50({}), EvalError);
}

TEST_CASE("metrics match brute-force oracles on 100 randomized fixtures") {
    Rng rng(2024);
    for (int t = 0; t < 100; ++t) {
        const Fixture f = random_fixture(rng, 30 + static_cast<int>(rng.below(40)));
        CHECK(std::abs(precision_score(f.preds, f.gts, f.present) -
                       oracle_precision(f.preds, f.gts, f.present, 20.0)) <= 1e-9);
        CHECK(std::abs(normalized_precision(f.preds, f.gts, f.present) -
                       oracle_npr(f.preds, f.gts, f.present)) <= 1e-9);
        const double auc = success_auc(f.preds, f.gts, f.present);
        CHECK(std::abs(auc - oracle_auc(f.preds, f.gts, f.present)) <= 1e-9);
        // AUC is within one grid step of the mean IoU.
        CHECK(std::abs(auc - oracle_mean_iou(f.preds, f.gts, f.present)) <= 0.02);
    }
}

TEST_CASE("metrics are permutation invariant over frame order") {
    Rng rng(55);
    Fixture f = random_fixture(rng, 60);
    const double pr = precision_score(f.preds, f.gts, f.present);
    const double auc = success_auc(f.preds, f.gts, f.present);

    // Apply one fixed permutation to all three lists.
    std::vector<std::size_t> idx(f.preds.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(idx);
    Fixture g;
    for (std::size_t i : idx) {
        g.preds.push_back(f.preds[i]);
        g.gts.push_back(f.gts[i]);
        g.present.push_back(f.present[i]);
    }
    CHECK(precision_score(g.preds, g.gts, g.present) == doctest::Approx(pr).epsilon(1e-12));
    CHECK(success_auc(g.preds, g.gts, g.present) == doctest::Approx(auc).epsilon(1e-12));
}

TEST_CASE("zero evaluable frames raise evaluation errors") {
    std::vector<BoundingBox> b{{0, 0, 1, 1}};
    std::vector<bool> absent{false};
    CHECK_THROWS_AS(precision_score(b, b, absent), EvalError);
    CHECK_THROWS_AS(success_auc(b, b, absent), EvalError);
    CHECK_THROWS_AS(normalized_precision(b, b, absent), EvalError);
}

TEST_CASE("evaluate under mode none reports only B columns") {
    TrackerConfig cfg;
    cfg.backbone.blocks = {{4, 3, 2, true}, {6, 3, 2, true}, {8, 3, 2, false}};
    cfg.template_size = 31;
    cfg.search_size = 63;
    const TrackerModel model = TrackerModel::init(cfg, 12);

    Benchmark bench;
    for (int i = 0; i < 2; ++i) {
        SyntheticSceneSpec spec;
        spec.n_frames = 6;
        spec.canvas_w = spec.canvas_h = 64;
        spec.object_min = spec.object_max = 12;
        auto [v, a] = generate_synthetic_video(spec, 100 + static_cast<std::uint64_t>(i));
        bench.videos.push_back(std::move(v));
        bench.annotations.push_back(std::move(a));
    }
    const MetricReport r = evaluate(model, bench, builtin_trigger("checker"),
                                    {PoisonAnchor::box_center, 0.04}, AttackMode::none());
    CHECK_FALSE(r.pr_a.has_value());
    CHECK_FALSE(r.auc_a.has_value());
    CHECK(r.attack_mode == "none");
    CHECK(r.pr_b >= 0.0);
    CHECK(r.per_sequence_b.size() == 2);

    // Deterministic evaluation.
    const MetricReport r2 = evaluate(model, bench, builtin_trigger("checker"),
                                     {PoisonAnchor::box_center, 0.04}, AttackMode::none());
    CHECK(r.pr_b == r2.pr_b);
    CHECK(r.auc_b == r2.auc_b);

    // Attacked mode populates the A columns.
    const MetricReport ra = evaluate(model, bench, builtin_trigger("checker"),
                                     {PoisonAnchor::box_center, 0.04}, AttackMode::one_shot());
    CHECK(ra.pr_a.has_value());
    CHECK(ra.auc_a.has_value());
    CHECK(ra.auc_b == r.auc_b);  // clean side unaffected by the mode
}

TEST_CASE("is_promising implements the two budget inequalities") {
    MetricReport r;
    r.auc_b = 0.7;   // loss_B = 0.3
    r.auc_a = 0.1;   // loss_A = 0.9

    SUBCASE("both satisfied") {
        const auto v = is_promising(r, {0.4, 0.35, "auc"});
        CHECK(v.effective);
        CHECK(v.stealthy);
        CHECK(v.promising());
        CHECK(v.effectiveness_margin == doctest::Approx(0.2));
        CHECK(v.stealthiness_margin == doctest::Approx(0.05));
    }
    SUBCASE("alpha = 0 reduces effectiveness to loss_A >= loss_B") {
        const auto v = is_promising(r, {0.0, 1.0, "auc"});
        CHECK(v.effective);
        r.auc_a = 0.75;  // loss_A = 0.25 < loss_B
        const auto v2 = is_promising(r, {0.0, 1.0, "auc"});
        CHECK_FALSE(v2.effective);
    }
    SUBCASE("stealthiness violated with margin -0.05") {
        r.auc_b = 0.6;  // loss_B = 0.4 > beta = 0.35
        const auto v = is_promising(r, {0.4, 0.35, "auc"});
        CHECK_FALSE(v.stealthy);
        CHECK(v.stealthiness_margin == doctest::Approx(-0.05));
    }
    SUBCASE("missing metric is an argument error") {
        MetricReport empty;
        empty.auc_b = 0.5;
        CHECK_THROWS_AS(is_promising(empty, {0.3, 0.5, "auc"}), ArgumentError);
    }
}
