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

#include "tracklab/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tracklab/error.hpp"

namespace tracklab {

double template_region_side(const BoundingBox& box, double context_margin) {
    const double p = context_margin * (box.w + box.h) / 2.0;
    return std::sqrt((box.w + 2.0 * p) * (box.h + 2.0 * p));
}

Frame crop_region(const Frame& frame, double cx, double cy, double side_in_frame, int out_size) {
    Frame out(out_size, out_size);
    const float fill = frame.mean();
    const double scale = side_in_frame / out_size;
    const double origin_x = cx - (out_size - 1) / 2.0 * scale;
    const double origin_y = cy - (out_size - 1) / 2.0 * scale;

    auto tap = [&](int y, int x, int c) -> float {
        if (y < 0 || y >= frame.h || x < 0 || x >= frame.w) return fill;
        return frame.at(y, x, c);
    };

    for (int oy = 0; oy < out_size; ++oy) {
        const double fy = origin_y + oy * scale;
        const int y0 = static_cast<int>(std::floor(fy));
        const double ty = fy - y0;
        for (int ox = 0; ox < out_size; ++ox) {
            const double fx = origin_x + ox * scale;
            const int x0 = static_cast<int>(std::floor(fx));
            const double tx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = tap(y0, x0, c) * (1.0 - tx) + tap(y0, x0 + 1, c) * tx;
                const double bot = tap(y0 + 1, x0, c) * (1.0 - tx) + tap(y0 + 1, x0 + 1, c) * tx;
                out.at(oy, ox, c) = static_cast<float>(top * (1.0 - ty) + bot * ty);
            }
        }
    }
    return out;
}

Frame crop_template(const Frame& frame, const BoundingBox& box, const TrackerConfig& cfg) {
    const double side = template_region_side(box, cfg.context_margin);
    return crop_region(frame, box.cx(), box.cy(), side, cfg.template_size);
}

std::pair<Frame, CropGeometry> crop_search(const Frame& frame, const BoundingBox& prev_box,
                                           const TrackerConfig& cfg, double scale) {
    const double side = template_region_side(prev_box, cfg.context_margin) *
                        (static_cast<double>(cfg.search_size) / cfg.template_size) * scale;
    CropGeometry geom{prev_box.cx(), prev_box.cy(), side, cfg.search_size};
    Frame crop = crop_region(frame, geom.center_x, geom.center_y, side, cfg.search_size);
    return {std::move(crop), geom};
}

Tensor make_label(int map_h, int map_w, int stride, double crop_center, double target_x,
                  double target_y, double radius_px) {
    if (radius_px <= 0.0) throw ArgumentError("label radius must be positive");
    Tensor labels(map_h, map_w);
    int positives = 0;
    for (int i = 0; i < map_h; ++i) {
        const double cy = crop_center + (i - (map_h - 1) / 2.0) * stride;
        for (int j = 0; j < map_w; ++j) {
            const double cx = crop_center + (j - (map_w - 1) / 2.0) * stride;
            const double d = std::hypot(cx - target_x, cy - target_y);
            const bool pos = d <= radius_px;
            labels.at(i, j) = pos ? 1.0 : -1.0;
            positives += pos ? 1 : 0;
        }
    }
    if (positives == 0)
        throw LabelingError("label radius " + std::to_string(radius_px) +
                            " px produced no positive cell");
    return labels;
}

namespace {

inline double softplus(double t) {
    // log(1 + exp(t)), stable for large |t|.
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

void class_weights(const Tensor& labels, double& w_pos, double& w_neg) {
    int n_pos = 0, n_neg = 0;
    for (double y : labels.raw()) (y > 0.0 ? n_pos : n_neg)++;
    if (n_pos == 0 && n_neg == 0) throw ArgumentError("empty label map");
    if (n_pos == 0) {
        w_pos = 0.0;
        w_neg = 1.0 / n_neg;
    } else if (n_neg == 0) {
        w_pos = 1.0 / n_pos;
        w_neg = 0.0;
    } else {
        w_pos = 0.5 / n_pos;
        w_neg = 0.5 / n_neg;
    }
}

}  // namespace

double tracking_loss(const ScoreMap& score, const Tensor& labels) {
    if (!score.response.same_shape(labels))
        throw ArgumentError("score map and label shapes differ");
    double w_pos, w_neg;
    class_weights(labels, w_pos, w_neg);
    double loss = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = labels[i];
        loss += (y > 0.0 ? w_pos : w_neg) * softplus(-y * score.response[i]);
    }
    return loss;
}

Tensor tracking_loss_grad(const ScoreMap& score, const Tensor& labels) {
    if (!score.response.same_shape(labels))
        throw ArgumentError("score map and label shapes differ");
    double w_pos, w_neg;
    class_weights(labels, w_pos, w_neg);
    Tensor g(labels.dim(0), labels.dim(1));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = labels[i];
        const double w = y > 0.0 ? w_pos : w_neg;
        g[i] = -w * y * sigmoid(-y * score.response[i]);
    }
    return g;
}

namespace {

std::vector<double> hann_window(int n) {
    std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    if (n == 1) return w;
    for (int i = 0; i < n; ++i)
        w[static_cast<std::size_t>(i)] =
            0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1)));
    return w;
}

// One-dimensional quadratic peak interpolation, clamped to half a cell.
double sub_cell_offset(double left, double center, double right) {
    const double denom = 2.0 * center - left - right;
    if (std::abs(denom) < 1e-12) return 0.0;
    return std::clamp(0.5 * (right - left) / denom, -0.5, 0.5);
}

}  // namespace

std::vector<BoundingBox> track(const TrackerModel& model, const Video& video,
                               const BoundingBox& init_box) {
    if (video.length() < 2) throw ArgumentError("tracking needs at least 2 frames");
    const TrackerConfig& cfg = model.cfg;

    std::vector<BoundingBox> out;
    out.reserve(static_cast<std::size_t>(video.length()));
    out.push_back(init_box);

    // The template comes from the initial frame and is never updated.
    const Frame tmpl = crop_template(video.frames.front(), init_box, cfg);
    const Tensor zf = model.backbone_forward(tmpl).feature();

    const int map_n = cfg.score_map_size();
    const auto win1d = hann_window(map_n);

    BoundingBox box = init_box;
    for (int f = 1; f < video.length(); ++f) {
        const Frame& frame = video.frames[static_cast<std::size_t>(f)];

        int best_scale = 0;
        double best_peak = -std::numeric_limits<double>::infinity();
        Tensor best_resp;
        CropGeometry best_geom;
        for (int k = 0; k < static_cast<int>(cfg.scales.size()); ++k) {
            const double s = cfg.scales[static_cast<std::size_t>(k)];
            auto [crop, geom] = crop_search(frame, box, cfg, s);
            ScoreMap score = model.score_from_features(zf, model.backbone_forward(crop).feature());
            double peak = *std::max_element(score.response.raw().begin(),
                                            score.response.raw().end());
            if (s != 1.0) peak *= cfg.scale_penalty;
            if (peak > best_peak) {
                best_peak = peak;
                best_scale = k;
                best_resp = std::move(score.response);
                best_geom = geom;
            }
        }

        // Normalize to [0, 1] and blend with the cosine window.
        double lo = best_resp[0], hi = best_resp[0];
        for (double v : best_resp.raw()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double range = hi - lo;
        Tensor blended(map_n, map_n);
        for (int i = 0; i < map_n; ++i)
            for (int j = 0; j < map_n; ++j) {
                const double norm = range > 0.0 ? (best_resp.at(i, j) - lo) / range : 0.0;
                blended.at(i, j) = (1.0 - cfg.window_weight) * norm +
                                   cfg.window_weight * win1d[static_cast<std::size_t>(i)] *
                                       win1d[static_cast<std::size_t>(j)];
            }

        int pi = 0, pj = 0;
        double pv = blended.at(0, 0);
        for (int i = 0; i < map_n; ++i)
            for (int j = 0; j < map_n; ++j)
                if (blended.at(i, j) > pv) {
                    pv = blended.at(i, j);
                    pi = i;
                    pj = j;
                }
        const double dj = sub_cell_offset(blended.at(pi, std::max(0, pj - 1)), blended.at(pi, pj),
                                          blended.at(pi, std::min(map_n - 1, pj + 1)));
        const double di = sub_cell_offset(blended.at(std::max(0, pi - 1), pj), blended.at(pi, pj),
                                          blended.at(std::min(map_n - 1, pi + 1), pj));

        const int stride = cfg.total_stride();
        const double disp_crop_x = ((pj + dj) - (map_n - 1) / 2.0) * stride;
        const double disp_crop_y = ((pi + di) - (map_n - 1) / 2.0) * stride;
        const double cx = box.cx() + disp_crop_x * best_geom.scale();
        const double cy = box.cy() + disp_crop_y * best_geom.scale();

        const double chosen = cfg.scales[static_cast<std::size_t>(best_scale)];
        const double damped = (1.0 - cfg.scale_damping) + cfg.scale_damping * chosen;
        const double nw = box.w * damped;
        const double nh = box.h * damped;
        box = BoundingBox{cx - nw / 2.0, cy - nh / 2.0, nw, nh};
        out.push_back(box);
    }
    return out;
}

}  // namespace tracklab
