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

#include "tracklab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "tracklab/error.hpp"
#include "tracklab/tracker.hpp"

namespace tracklab {

namespace {

void check_lengths(const std::vector<BoundingBox>& preds, const std::vector<BoundingBox>& gts,
                   const std::vector<bool>& present) {
    if (preds.size() != gts.size() || preds.size() != present.size())
        throw ArgumentError("prediction/ground-truth/present lengths differ");
}

int count_evaluable(const std::vector<bool>& present) {
    int n = 0;
    for (bool p : present) n += p ? 1 : 0;
    return n;
}

}  // namespace

double precision_score(const std::vector<BoundingBox>& preds, const std::vector<BoundingBox>& gts,
                       const std::vector<bool>& present, double threshold_px) {
    check_lengths(preds, gts, present);
    int n = 0, hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (!present[i]) continue;
        ++n;
        if (center_distance(preds[i], gts[i]) <= threshold_px) ++hits;
    }
    if (n == 0) throw EvalError("precision: no evaluable frame");
    return static_cast<double>(hits) / n;
}

double normalized_precision(const std::vector<BoundingBox>& preds,
                            const std::vector<BoundingBox>& gts,
                            const std::vector<bool>& present) {
    check_lengths(preds, gts, present);
    int n = 0, hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (!present[i]) continue;
        if (gts[i].w <= 0.0 || gts[i].h <= 0.0)
            throw EvalError("normalized precision: degenerate ground-truth box at frame " +
                            std::to_string(i));
        ++n;
        const double dx = (preds[i].cx() - gts[i].cx()) / gts[i].w;
        const double dy = (preds[i].cy() - gts[i].cy()) / gts[i].h;
        if (std::sqrt(dx * dx + dy * dy) <= 0.2) ++hits;
    }
    if (n == 0) throw EvalError("normalized precision: no evaluable frame");
    return static_cast<double>(hits) / n;
}

std::vector<double> success_curve(const std::vector<BoundingBox>& preds,
                                  const std::vector<BoundingBox>& gts,
                                  const std::vector<bool>& present) {
    check_lengths(preds, gts, present);
    std::vector<double> overlaps;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (present[i]) overlaps.push_back(iou(preds[i], gts[i]));
    if (overlaps.empty()) throw EvalError("success plot: no evaluable frame");

    // Success means IoU >= u, except that a disjoint prediction (IoU = 0)
    // never counts, so a fully lost tracker scores 0 at every threshold.
    std::vector<double> curve(51, 0.0);
    for (int k = 0; k <= 50; ++k) {
        const double u = k / 50.0;
        int hits = 0;
        for (double o : overlaps)
            if (o > 0.0 && o >= u) ++hits;
        curve[static_cast<std::size_t>(k)] = static_cast<double>(hits) / overlaps.size();
    }
    return curve;
}

double success_auc(const std::vector<BoundingBox>& preds, const std::vector<BoundingBox>& gts,
                   const std::vector<bool>& present) {
    const auto curve = success_curve(preds, gts, present);
    double s = 0.0;
    for (double v : curve) s += v;
    return s / static_cast<double>(curve.size());
}

std::vector<double> precision_curve(const std::vector<BoundingBox>& preds,
                                    const std::vector<BoundingBox>& gts,
                                    const std::vector<bool>& present) {
    check_lengths(preds, gts, present);
    std::vector<double> dists;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (present[i]) dists.push_back(center_distance(preds[i], gts[i]));
    if (dists.empty()) throw EvalError("precision plot: no evaluable frame");

    std::vector<double> curve(51, 0.0);
    for (int t = 0; t <= 50; ++t) {
        int hits = 0;
        for (double d : dists)
            if (d <= t) ++hits;
        curve[static_cast<std::size_t>(t)] = static_cast<double>(hits) / dists.size();
    }
    return curve;
}

double msr50(const std::map<std::string, std::vector<bool>>& per_class_success) {
    if (per_class_success.empty()) throw EvalError("mSR50: no class");
    double acc = 0.0;
    int classes = 0;
    for (const auto& [cls, flags] : per_class_success) {
        if (flags.empty()) throw EvalError("mSR50: class \"" + cls + "\" has no frame");
        int hits = 0;
        for (bool f : flags) hits += f ? 1 : 0;
        acc += static_cast<double>(hits) / flags.size();
        ++classes;
    }
    return acc / classes;
}

namespace {

struct PooledMetrics {
    double pr = 0.0, npr = 0.0, auc = 0.0, msr = 0.0;
    std::vector<double> succ_curve, prec_curve;
    std::vector<SequenceResult> per_sequence;
};

PooledMetrics aggregate(const Benchmark& bench,
                        const std::vector<std::vector<BoundingBox>>& all_preds) {
    // Frame-pooled aggregation across sequences; mSR50 groups by class.
    std::vector<BoundingBox> preds, gts;
    std::vector<bool> present;
    std::map<std::string, std::vector<bool>> per_class;
    PooledMetrics out;

    for (std::size_t v = 0; v < bench.videos.size(); ++v) {
        const auto& ann = bench.annotations[v];
        const auto& p = all_preds[v];
        SequenceResult sr;
        sr.id = bench.videos[v].id;
        sr.object_class = ann.object_class;
        std::vector<BoundingBox> sp, sg;
        std::vector<bool> spr;
        for (int i = 0; i < ann.length(); ++i) {
            preds.push_back(p[static_cast<std::size_t>(i)]);
            gts.push_back(ann.boxes[static_cast<std::size_t>(i)]);
            present.push_back(ann.present[static_cast<std::size_t>(i)]);
            sp.push_back(p[static_cast<std::size_t>(i)]);
            sg.push_back(ann.boxes[static_cast<std::size_t>(i)]);
            spr.push_back(ann.present[static_cast<std::size_t>(i)]);
            if (ann.present[static_cast<std::size_t>(i)])
                per_class[ann.object_class].push_back(
                    iou(p[static_cast<std::size_t>(i)], ann.boxes[static_cast<std::size_t>(i)]) >=
                    0.5);
        }
        sr.evaluable_frames = count_evaluable(spr);
        if (sr.evaluable_frames > 0) {
            sr.precision = precision_score(sp, sg, spr);
            sr.normalized_precision = normalized_precision(sp, sg, spr);
            sr.auc = success_auc(sp, sg, spr);
            int hits = 0;
            for (std::size_t i = 0; i < sp.size(); ++i)
                if (spr[i] && iou(sp[i], sg[i]) >= 0.5) ++hits;
            sr.sr50 = static_cast<double>(hits) / sr.evaluable_frames;
        }
        out.per_sequence.push_back(std::move(sr));
    }

    out.pr = precision_score(preds, gts, present);
    out.npr = normalized_precision(preds, gts, present);
    out.auc = success_auc(preds, gts, present);
    out.msr = msr50(per_class);
    out.succ_curve = success_curve(preds, gts, present);
    out.prec_curve = precision_curve(preds, gts, present);
    return out;
}

}  // namespace

MetricReport evaluate(const TrackerModel& model, const Benchmark& bench,
                      const TriggerPattern& trig, const PoisonPlacement& place,
                      const AttackMode& mode, const VideoTransform& preprocess) {
    if (bench.videos.empty()) throw ArgumentError("benchmark has no videos");
    if (bench.videos.size() != bench.annotations.size())
        throw ArgumentError("benchmark video/annotation count mismatch");
    mode.validate();

    const auto n = static_cast<int>(bench.videos.size());
    std::vector<std::vector<BoundingBox>> preds_b(static_cast<std::size_t>(n));
    std::vector<std::vector<BoundingBox>> preds_a(static_cast<std::size_t>(n));
    const bool attacked = mode.kind != AttackModeKind::none;

    // Sequences are independent; the per-sequence work runs in parallel while
    // each tracking pass stays internally deterministic.
#pragma omp parallel for schedule(dynamic)
    for (int v = 0; v < n; ++v) {
        const auto& video = bench.videos[static_cast<std::size_t>(v)];
        const auto& ann = bench.annotations[static_cast<std::size_t>(v)];
        const BoundingBox init = ann.boxes.front();
        if (preprocess) {
            preds_b[static_cast<std::size_t>(v)] = track(model, preprocess(video), init);
        } else {
            preds_b[static_cast<std::size_t>(v)] = track(model, video, init);
        }
        if (attacked) {
            Video poisoned = poison_video(video, ann, trig, place, mode);
            if (preprocess) poisoned = preprocess(poisoned);
            preds_a[static_cast<std::size_t>(v)] = track(model, poisoned, init);
        }
    }

    MetricReport report;
    report.psi = place.modification_rate;
    report.trigger_name = trig.name;
    switch (mode.kind) {
        case AttackModeKind::none:
            report.attack_mode = "none";
            break;
        case AttackModeKind::one_shot:
            report.attack_mode = "one_shot";
            break;
        case AttackModeKind::few_shot:
            report.attack_mode = "few_shot";
            report.tau = mode.frame_attack_rate;
            break;
    }

    const PooledMetrics mb = aggregate(bench, preds_b);
    report.pr_b = mb.pr;
    report.npr_b = mb.npr;
    report.auc_b = mb.auc;
    report.msr50_b = mb.msr;
    report.per_sequence_b = mb.per_sequence;
    report.success_curve_b = mb.succ_curve;
    report.precision_curve_b = mb.prec_curve;

    if (attacked) {
        const PooledMetrics ma = aggregate(bench, preds_a);
        report.pr_a = ma.pr;
        report.npr_a = ma.npr;
        report.auc_a = ma.auc;
        report.msr50_a = ma.msr;
        report.per_sequence_a = ma.per_sequence;
        report.success_curve_a = ma.succ_curve;
        report.precision_curve_a = ma.prec_curve;
    }
    return report;
}

PromisingVerdict is_promising(const MetricReport& report, const PromisingnessBudget& budget) {
    if (!(budget.alpha >= 0.0) || !(budget.beta >= 0.0))
        throw ArgumentError("promisingness budgets must be non-negative and finite");

    double metric_b, metric_a;
    if (budget.loss_metric == "auc") {
        if (!report.auc_a) throw ArgumentError("report lacks AUC-A for the promisingness check");
        metric_b = report.auc_b;
        metric_a = *report.auc_a;
    } else if (budget.loss_metric == "precision") {
        if (!report.pr_a) throw ArgumentError("report lacks Pr-A for the promisingness check");
        metric_b = report.pr_b;
        metric_a = *report.pr_a;
    } else {
        throw ArgumentError("unknown promisingness loss metric: " + budget.loss_metric);
    }

    PromisingVerdict v;
    v.loss_b = 1.0 - metric_b;
    v.loss_a = 1.0 - metric_a;
    v.effective = v.loss_b + budget.alpha <= v.loss_a;
    v.stealthy = v.loss_b <= budget.beta;
    v.effectiveness_margin = v.loss_a - v.loss_b - budget.alpha;
    v.stealthiness_margin = budget.beta - v.loss_b;
    return v;
}

}  // namespace tracklab
