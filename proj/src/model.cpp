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

#include "tracklab/model.hpp"

#include <cmath>

#include "tracklab/error.hpp"
#include "tracklab/kernels.hpp"
#include "tracklab/rng.hpp"

namespace tracklab {

BackboneConfig BackboneConfig::default3() {
    BackboneConfig c;
    c.blocks = {{16, 3, 2, true}, {24, 3, 2, true}, {32, 3, 2, false}};
    return c;
}

int BackboneConfig::total_stride() const {
    int s = 1;
    for (const auto& b : blocks) s *= b.stride;
    return s;
}

int BackboneConfig::out_size(int in_size) const {
    int s = in_size;
    for (const auto& b : blocks) s = (s - b.kernel) / b.stride + 1;
    return s;
}

void TrackerConfig::validate() const {
    if (backbone.blocks.empty()) throw ConfigError("backbone needs at least one conv block");
    if (backbone.relu_leak < 0.0 || backbone.relu_leak >= 1.0)
        throw ConfigError("relu leak must be in [0, 1)");
    for (const auto& b : backbone.blocks)
        if (b.out_ch < 1 || b.kernel < 1 || b.stride < 1)
            throw ConfigError("bad conv block spec");
    if (template_size < 8 || search_size <= template_size)
        throw ConfigError("crop sizes must satisfy 8 <= template < search");
    const int fz = backbone.out_size(template_size);
    const int fx = backbone.out_size(search_size);
    if (fz <= 1 || fx <= 1)
        throw ConfigError("backbone output collapses below 2x2 for the configured crops");
    if (fx <= fz) throw ConfigError("search feature map must be larger than template feature map");
    if (!(context_margin >= 0.0)) throw ConfigError("context margin must be >= 0");
    if (label_radius_cells <= 0.0) throw ConfigError("label radius must be positive");
    if (scales.empty()) throw ConfigError("scale set must be nonempty");
    for (double s : scales)
        if (!(s > 0.0)) throw ConfigError("scales must be positive");
    if (window_weight < 0.0 || window_weight >= 1.0)
        throw ConfigError("window weight must be in [0, 1)");
    if (scale_damping < 0.0 || scale_damping > 1.0)
        throw ConfigError("scale damping must be in [0, 1]");
}

int TrackerConfig::score_map_size() const {
    return backbone.out_size(search_size) - backbone.out_size(template_size) + 1;
}

bool ModelParams::all_finite() const {
    for (const auto& t : conv_w)
        if (!t.all_finite()) return false;
    for (const auto& t : conv_b)
        if (!t.all_finite()) return false;
    return std::isfinite(head_scale) && std::isfinite(head_bias);
}

ParamGrads ParamGrads::zeros_like(const ModelParams& p) {
    ParamGrads g;
    for (const auto& w : p.conv_w)
        g.conv_w.emplace_back(w.dim(0), w.dim(1), w.dim(2), w.dim(3));
    for (const auto& b : p.conv_b) g.conv_b.emplace_back(b.dim(0));
    return g;
}

void ParamGrads::scale(double s) {
    for (auto& t : conv_w)
        for (auto& v : t.raw()) v *= s;
    for (auto& t : conv_b)
        for (auto& v : t.raw()) v *= s;
    head_scale *= s;
    head_bias *= s;
}

void ParamGrads::add(const ParamGrads& o, double s) {
    for (std::size_t i = 0; i < conv_w.size(); ++i) conv_w[i].add_scaled(o.conv_w[i], s);
    for (std::size_t i = 0; i < conv_b.size(); ++i) conv_b[i].add_scaled(o.conv_b[i], s);
    head_scale += s * o.head_scale;
    head_bias += s * o.head_bias;
}

double ParamGrads::backbone_sq_norm() const {
    double s = 0.0;
    for (const auto& t : conv_w) s += t.sum_sq();
    for (const auto& t : conv_b) s += t.sum_sq();
    return s;
}

TrackerModel TrackerModel::init(const TrackerConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    TrackerModel m;
    m.cfg = cfg;
    m.init_seed = seed;
    Rng rng(mix_seed(seed, 0x1217));
    int in_ch = cfg.backbone.in_ch;
    for (const auto& b : cfg.backbone.blocks) {
        Tensor w(b.out_ch, in_ch, b.kernel, b.kernel);
        const double stddev = std::sqrt(2.0 / (in_ch * b.kernel * b.kernel));
        for (auto& v : w.raw()) v = rng.normal(0.0, stddev);
        m.params.conv_w.push_back(std::move(w));
        m.params.conv_b.emplace_back(b.out_ch);
        in_ch = b.out_ch;
    }
    m.params.head_scale = 1.0;
    m.params.head_bias = 0.0;
    return m;
}

Tensor TrackerModel::to_input(const Frame& crop) {
    Tensor t(3, crop.h, crop.w);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < crop.h; ++y)
            for (int x = 0; x < crop.w; ++x)
                t.at(c, y, x) = 2.0 * static_cast<double>(crop.at(y, x, c)) - 1.0;
    return t;
}

namespace {

void apply_channel_mask(Tensor& t, const std::vector<double>& mask) {
    if (mask.empty()) return;
    const int c = t.dim(0), h = t.dim(1), w = t.dim(2);
    for (int ch = 0; ch < c; ++ch) {
        if (mask[static_cast<std::size_t>(ch)] != 0.0) continue;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) t.at(ch, y, x) = 0.0;
    }
}

}  // namespace

BackboneTrace TrackerModel::backbone_forward(const Frame& crop) const {
    BackboneTrace trace;
    trace.input = to_input(crop);
    const Tensor* cur = &trace.input;
    const bool use_norm = cfg.backbone.instance_norm;
    for (int i = 0; i < cfg.backbone.n_blocks(); ++i) {
        const auto& spec = cfg.backbone.blocks[static_cast<std::size_t>(i)];
        Tensor pre = kernels::conv2d_forward(*cur, params.conv_w[static_cast<std::size_t>(i)],
                                             params.conv_b[static_cast<std::size_t>(i)], spec.stride);
        Tensor rect_in = use_norm ? kernels::instnorm_forward(pre) : pre;
        Tensor post = spec.relu ? kernels::relu_forward(rect_in, cfg.backbone.relu_leak) : rect_in;
        if (i < static_cast<int>(params.channel_mask.size()))
            apply_channel_mask(post, params.channel_mask[static_cast<std::size_t>(i)]);
        trace.pre.push_back(std::move(pre));
        if (use_norm) trace.normed.push_back(std::move(rect_in));
        trace.post.push_back(std::move(post));
        cur = &trace.post.back();
    }
    return trace;
}

std::vector<Tensor> TrackerModel::features(const Frame& crop) const {
    return backbone_forward(crop).post;
}

ScoreMap TrackerModel::score_from_features(const Tensor& zf, const Tensor& xf) const {
    Tensor corr = kernels::xcorr_forward(zf, xf);
    ScoreMap s;
    s.stride = cfg.total_stride();
    s.crop_center = (cfg.search_size - 1) / 2.0;
    // The correlation is normalized by sqrt(#terms) so the learned scale has
    // comparable units across template feature sizes.
    const double k = params.head_scale / std::sqrt(static_cast<double>(zf.size()));
    for (auto& v : corr.raw()) v = k * v + params.head_bias;
    s.response = std::move(corr);
    return s;
}

ScoreMap TrackerModel::forward(const Frame& z, const Frame& x) const {
    if (z.h != cfg.template_size || z.w != cfg.template_size)
        throw ArgumentError("template crop has wrong size");
    if (x.h != cfg.search_size || x.w != cfg.search_size)
        throw ArgumentError("search crop has wrong size");
    const auto zf = backbone_forward(z);
    const auto xf = backbone_forward(x);
    return score_from_features(zf.feature(), xf.feature());
}

void TrackerModel::backbone_backward(const BackboneTrace& trace, const std::vector<Tensor>& grad_post,
                                     ParamGrads& out) const {
    const int n = cfg.backbone.n_blocks();
    Tensor carry;  // gradient w.r.t. post[i], flowing downward
    for (int i = n - 1; i >= 0; --i) {
        const auto& spec = cfg.backbone.blocks[static_cast<std::size_t>(i)];
        Tensor g;
        const bool injected = i < static_cast<int>(grad_post.size()) &&
                              !grad_post[static_cast<std::size_t>(i)].empty();
        if (!carry.empty() && injected) {
            g = carry;
            g.add_scaled(grad_post[static_cast<std::size_t>(i)], 1.0);
        } else if (!carry.empty()) {
            g = std::move(carry);
        } else if (injected) {
            g = grad_post[static_cast<std::size_t>(i)];
        } else {
            continue;  // nothing above this block contributes
        }
        if (i < static_cast<int>(params.channel_mask.size()))
            apply_channel_mask(g, params.channel_mask[static_cast<std::size_t>(i)]);
        Tensor g_rect = spec.relu
                            ? kernels::relu_backward(g, trace.relu_input(i), cfg.backbone.relu_leak)
                            : g;
        Tensor g_pre = cfg.backbone.instance_norm
                           ? kernels::instnorm_backward(g_rect, trace.pre[static_cast<std::size_t>(i)])
                           : g_rect;
        const Tensor& block_in = i == 0 ? trace.input : trace.post[static_cast<std::size_t>(i - 1)];
        Tensor gw(out.conv_w[static_cast<std::size_t>(i)].dim(0),
                  out.conv_w[static_cast<std::size_t>(i)].dim(1),
                  out.conv_w[static_cast<std::size_t>(i)].dim(2),
                  out.conv_w[static_cast<std::size_t>(i)].dim(3));
        Tensor gb(out.conv_b[static_cast<std::size_t>(i)].dim(0));
        kernels::conv2d_backward_params(g_pre, block_in, spec.stride, gw, gb);
        out.conv_w[static_cast<std::size_t>(i)].add_scaled(gw, 1.0);
        out.conv_b[static_cast<std::size_t>(i)].add_scaled(gb, 1.0);
        if (i > 0)
            carry = kernels::conv2d_backward_input(g_pre, params.conv_w[static_cast<std::size_t>(i)],
                                                   spec.stride, block_in.dim(1), block_in.dim(2));
    }
}

void TrackerModel::pair_backward(const BackboneTrace& trace_z, const BackboneTrace& trace_x,
                                 const Tensor& grad_score, ParamGrads& out) const {
    const Tensor& zf = trace_z.feature();
    const Tensor& xf = trace_x.feature();
    const Tensor corr = kernels::xcorr_forward(zf, xf);
    const double norm = 1.0 / std::sqrt(static_cast<double>(zf.size()));

    for (std::size_t i = 0; i < corr.size(); ++i) {
        out.head_scale += grad_score[i] * corr[i] * norm;
        out.head_bias += grad_score[i];
    }
    Tensor g_corr = grad_score;
    for (auto& v : g_corr.raw()) v *= params.head_scale * norm;

    Tensor gzf, gxf;
    kernels::xcorr_backward(g_corr, zf, xf, gzf, gxf);

    std::vector<Tensor> inject(static_cast<std::size_t>(cfg.backbone.n_blocks()));
    inject.back() = std::move(gzf);
    backbone_backward(trace_z, inject, out);
    inject.back() = std::move(gxf);
    backbone_backward(trace_x, inject, out);
}

}  // namespace tracklab
