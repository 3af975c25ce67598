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
#include <string>
#include <vector>

#include "tracklab/tensor.hpp"
#include "tracklab/videodata.hpp"

namespace tracklab {

struct ConvBlockSpec {
    int out_ch = 16;
    int kernel = 3;
    int stride = 2;
    bool relu = true;
};

struct BackboneConfig {
    int in_ch = 3;
    double relu_leak = 0.1;      // negative slope of the rectifier blocks
    bool instance_norm = true;   // per-channel standardization after each conv
    std::vector<ConvBlockSpec> blocks;

    /// Three stride-2 blocks (total stride 8), ReLU on all but the last.
    static BackboneConfig default3();

    int total_stride() const;
    /// Spatial side of the feature map for a square input of the given side.
    int out_size(int in_size) const;
    int n_blocks() const { return static_cast<int>(blocks.size()); }
};

struct TrackerConfig {
    BackboneConfig backbone = BackboneConfig::default3();
    int template_size = 127;
    int search_size = 255;
    double context_margin = 0.5;      // p = margin * (w + h) / 2
    double label_radius_cells = 2.0;  // positive-label radius, in score-map cells

    // Inference-time settings. The attacked trackers' original papers leave
    // these unspecified; values are the usual siamese-tracking defaults.
    double window_weight = 0.3;
    std::vector<double> scales{0.96, 1.0, 1.04};
    double scale_damping = 0.6;
    double scale_penalty = 0.975;

    void validate() const;
    int score_map_size() const;
    int total_stride() const { return backbone.total_stride(); }
};

/// Learnable state: conv stacks of the two identical branches (shared), plus
/// the scalar scale/bias head on the correlation response. `channel_mask`
/// zeroes backbone output channels; it is empty until a pruning defense runs.
struct ModelParams {
    std::vector<Tensor> conv_w;  // per block: (out_ch, in_ch, k, k)
    std::vector<Tensor> conv_b;  // per block: (out_ch)
    double head_scale = 0.01;
    double head_bias = 0.0;
    std::vector<std::vector<double>> channel_mask;  // per block; empty = identity

    bool all_finite() const;
};

/// Gradient accumulator shaped like ModelParams.
struct ParamGrads {
    std::vector<Tensor> conv_w;
    std::vector<Tensor> conv_b;
    double head_scale = 0.0;
    double head_bias = 0.0;

    static ParamGrads zeros_like(const ModelParams& p);
    void scale(double s);
    void add(const ParamGrads& o, double s = 1.0);
    double backbone_sq_norm() const;
};

/// Correlation response grid plus the geometry mapping cells back to
/// search-crop pixels: cell i center = crop_center + (i - (n-1)/2) * stride.
struct ScoreMap {
    Tensor response;  // rank 2
    int stride = 8;
    double crop_center = 0.0;

    int h() const { return response.dim(0); }
    int w() const { return response.dim(1); }
    double cell_center_x(int j) const { return crop_center + (j - (w() - 1) / 2.0) * stride; }
    double cell_center_y(int i) const { return crop_center + (i - (h() - 1) / 2.0) * stride; }
};

/// Cached activations of one backbone pass, consumed by the backward pass.
struct BackboneTrace {
    Tensor input;                // (3, S, S), centered to [-1, 1]
    std::vector<Tensor> pre;     // per block, raw conv output
    std::vector<Tensor> normed;  // per block, after instance norm (empty if disabled)
    std::vector<Tensor> post;    // per block, after relu and channel mask
    const Tensor& feature() const { return post.back(); }
    /// Input of the block's rectifier (normed output when normalization is on).
    const Tensor& relu_input(int block) const {
        return normed.empty() ? pre[static_cast<std::size_t>(block)]
                              : normed[static_cast<std::size_t>(block)];
    }
};

class TrackerModel {
public:
    TrackerConfig cfg;
    ModelParams params;
    std::string provenance = "untrained";
    std::uint64_t init_seed = 0;

    /// Seeded He-style initialization.
    static TrackerModel init(const TrackerConfig& cfg, std::uint64_t seed);

    /// Converts a crop to the centered (3, S, S) network input.
    static Tensor to_input(const Frame& crop);

    BackboneTrace backbone_forward(const Frame& crop) const;

    /// Per-block output features (after relu/mask) for a crop.
    std::vector<Tensor> features(const Frame& crop) const;

    /// Score map for a template/search crop pair of the configured sizes.
    ScoreMap forward(const Frame& z, const Frame& x) const;

    /// Backpropagates grads injected at block outputs into parameter grads.
    /// `grad_post` holds one tensor per block; empty tensors are skipped.
    void backbone_backward(const BackboneTrace& trace, const std::vector<Tensor>& grad_post,
                           ParamGrads& out) const;

    /// Full head+backbone backward from a score-map gradient. Traces must
    /// come from backbone_forward on the same crops.
    void pair_backward(const BackboneTrace& trace_z, const BackboneTrace& trace_x,
                       const Tensor& grad_score, ParamGrads& out) const;

    ScoreMap score_from_features(const Tensor& zf, const Tensor& xf) const;

    int last_layer() const { return cfg.backbone.n_blocks() - 1; }
};

}  // namespace tracklab
