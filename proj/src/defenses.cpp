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

#include "tracklab/defenses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tracklab/error.hpp"
#include "tracklab/rng.hpp"

namespace tracklab {

void JitterSpec::validate() const {
    if (budget < 0.0 || budget > 0.5) throw ConfigError("jitter budget must be in [0, 0.5]");
}

namespace {

float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

void rgb_to_hsv(float r, float g, float b, double& h, double& s, double& v) {
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double d = mx - mn;
    v = mx;
    s = mx > 0.0 ? d / mx : 0.0;
    if (d <= 0.0) {
        h = 0.0;
        return;
    }
    if (mx == r)
        h = (g - b) / d + (g < b ? 6.0 : 0.0);
    else if (mx == g)
        h = (b - r) / d + 2.0;
    else
        h = (r - g) / d + 4.0;
    h /= 6.0;
}

void hsv_to_rgb(double h, double s, double v, float& r, float& g, float& b) {
    h = h - std::floor(h);
    const double hh = h * 6.0;
    const int i = std::min(5, static_cast<int>(hh));
    const double f = hh - i;
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    double rr, gg, bb;
    switch (i) {
        case 0: rr = v; gg = t; bb = p; break;
        case 1: rr = q; gg = v; bb = p; break;
        case 2: rr = p; gg = v; bb = t; break;
        case 3: rr = p; gg = q; bb = v; break;
        case 4: rr = t; gg = p; bb = v; break;
        default: rr = v; gg = p; bb = q; break;
    }
    r = clamp01(rr);
    g = clamp01(gg);
    b = clamp01(bb);
}

double luma(float r, float g, float b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

}  // namespace

Frame apply_jitter_frame(const Frame& frame, JitterKind kind, double factor) {
    Frame out = frame;
    switch (kind) {
        case JitterKind::brightness: {
            if (factor == 1.0) return out;
            for (auto& v : out.px) v = clamp01(static_cast<double>(v) * factor);
            return out;
        }
        case JitterKind::contrast: {
            if (factor == 1.0) return out;
            double mean_gray = 0.0;
            for (int y = 0; y < frame.h; ++y)
                for (int x = 0; x < frame.w; ++x)
                    mean_gray += luma(frame.at(y, x, 0), frame.at(y, x, 1), frame.at(y, x, 2));
            mean_gray /= static_cast<double>(frame.h) * frame.w;
            for (auto& v : out.px) v = clamp01((static_cast<double>(v) - mean_gray) * factor + mean_gray);
            return out;
        }
        case JitterKind::saturation: {
            if (factor == 1.0) return out;
            for (int y = 0; y < frame.h; ++y)
                for (int x = 0; x < frame.w; ++x) {
                    const double g = luma(frame.at(y, x, 0), frame.at(y, x, 1), frame.at(y, x, 2));
                    for (int c = 0; c < 3; ++c)
                        out.at(y, x, c) = clamp01(g + factor * (frame.at(y, x, c) - g));
                }
            return out;
        }
        case JitterKind::hue: {
            if (factor == 0.0) return out;
            for (int y = 0; y < frame.h; ++y)
                for (int x = 0; x < frame.w; ++x) {
                    double h, s, v;
                    rgb_to_hsv(frame.at(y, x, 0), frame.at(y, x, 1), frame.at(y, x, 2), h, s, v);
                    hsv_to_rgb(h + factor, s, v, out.at(y, x, 0), out.at(y, x, 1), out.at(y, x, 2));
                }
            return out;
        }
    }
    throw ArgumentError("bad jitter kind");
}

Video jitter_video(const Video& video, const JitterSpec& spec) {
    spec.validate();
    if (spec.budget == 0.0) return video;
    Rng rng(mix_seed(spec.seed, 0x7177E6));
    Video out = video;
    for (auto& frame : out.frames) {
        const double factor = spec.kind == JitterKind::hue
                                  ? rng.uniform(-spec.budget, spec.budget)
                                  : rng.uniform(1.0 - spec.budget, 1.0 + spec.budget);
        frame = apply_jitter_frame(frame, spec.kind, factor);
    }
    return out;
}

Video gaussian_noise_video(const Video& video, double stddev, std::uint64_t seed) {
    if (stddev < 0.0 || stddev > 25.0 / 255.0)
        throw ConfigError("noise std must be in [0, 25/255] intensity units");
    if (stddev == 0.0) return video;
    Rng rng(mix_seed(seed, 0x90153));
    Video out = video;
    for (auto& frame : out.frames)
        for (auto& v : frame.px) v = clamp01(static_cast<double>(v) + rng.normal(0.0, stddev));
    return out;
}

TrainResult fine_tune(const TrackerModel& model, const std::vector<TrainingSample>& benign_samples,
                      const TrainConfig& tcfg) {
    TrainResult r = continue_training(model, benign_samples, tcfg);
    r.model.provenance += "+finetuned";
    return r;
}

void PruneSpec::validate() const {
    if (pruning_rate < 0.0 || pruning_rate >= 1.0)
        throw ConfigError("pruning rate must be in [0, 1)");
    if (calibration_fraction <= 0.0 || calibration_fraction > 1.0)
        throw ConfigError("calibration fraction must be in (0, 1]");
}

std::vector<double> channel_activation_means(const TrackerModel& model,
                                             const std::vector<Frame>& calibration_crops,
                                             int layer) {
    if (calibration_crops.empty()) throw ArgumentError("calibration set is empty");
    const int n_blocks = model.cfg.backbone.n_blocks();
    if (layer < 0 || layer >= n_blocks) throw ArgumentError("prune layer out of range");

    std::vector<double> sums;
    std::size_t per_channel = 0;
    for (const auto& crop : calibration_crops) {
        const auto feats = model.features(crop);
        const Tensor& f = feats[static_cast<std::size_t>(layer)];
        const int c = f.dim(0);
        if (sums.empty()) sums.assign(static_cast<std::size_t>(c), 0.0);
        per_channel += static_cast<std::size_t>(f.dim(1)) * f.dim(2);
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < f.dim(1); ++y)
                for (int x = 0; x < f.dim(2); ++x) sums[static_cast<std::size_t>(ch)] += std::abs(f.at(ch, y, x));
    }
    for (auto& s : sums) s /= static_cast<double>(per_channel);
    return sums;
}

TrackerModel prune_channels(const TrackerModel& model, const std::vector<Frame>& calibration_crops,
                            const PruneSpec& spec) {
    spec.validate();
    const int n_blocks = model.cfg.backbone.n_blocks();
    const int layer = spec.target_layer < 0 ? n_blocks - 1 : spec.target_layer;
    const auto means = channel_activation_means(model, calibration_crops, layer);
    const int channels = static_cast<int>(means.size());
    const int to_mask = static_cast<int>(std::floor(spec.pruning_rate * channels));
    if (to_mask >= channels)
        throw ConfigError("pruning rate would mask every channel of the target layer");

    std::vector<int> order(static_cast<std::size_t>(channels));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return means[static_cast<std::size_t>(a)] < means[static_cast<std::size_t>(b)]; });

    TrackerModel pruned = model;
    if (pruned.params.channel_mask.size() < static_cast<std::size_t>(n_blocks))
        pruned.params.channel_mask.resize(static_cast<std::size_t>(n_blocks));
    auto& mask = pruned.params.channel_mask[static_cast<std::size_t>(layer)];
    if (mask.empty()) mask.assign(static_cast<std::size_t>(channels), 1.0);
    for (int i = 0; i < to_mask; ++i) mask[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 0.0;
    if (to_mask > 0) pruned.provenance += "+pruned";
    return pruned;
}

}  // namespace tracklab
