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

#include "tracklab/tensor.hpp"

namespace tracklab::kernels {

// The OpenMP variants parallelize over independent output elements and keep
// the per-element accumulation order identical to the serial reference, so
// both produce bitwise-equal results for any thread count. Training
// determinism relies on this.

/// Valid cross-correlation of a filter bank over an input:
/// y[oc,oy,ox] = b[oc] + sum_{c,ky,kx} w[oc,c,ky,kx] * x[c, oy*s+ky, ox*s+kx].
Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride);

/// Gradient of conv2d_forward w.r.t. its input.
Tensor conv2d_backward_input(const Tensor& gy, const Tensor& w, int stride, int in_h, int in_w);

/// Gradients of conv2d_forward w.r.t. weights and bias.
void conv2d_backward_params(const Tensor& gy, const Tensor& x, int stride, Tensor& gw, Tensor& gb);

/// Dense cross-correlation of the template feature over the search feature:
/// s[oy,ox] = sum_{c,ky,kx} zf[c,ky,kx] * xf[c,oy+ky,ox+kx].
Tensor xcorr_forward(const Tensor& zf, const Tensor& xf);

/// Gradients of xcorr_forward w.r.t. both feature maps.
void xcorr_backward(const Tensor& gs, const Tensor& zf, const Tensor& xf, Tensor& gzf, Tensor& gxf);

/// Per-channel standardization over the spatial axes:
/// y[c] = (x[c] - mean(x[c])) / sqrt(var(x[c]) + eps).
Tensor instnorm_forward(const Tensor& x, double eps = 1e-5);

/// Gradient of instnorm_forward w.r.t. its input.
Tensor instnorm_backward(const Tensor& gy, const Tensor& x, double eps = 1e-5);

/// Elementwise max(x, 0) + negative_slope * min(x, 0) (leaky rectifier).
Tensor relu_forward(const Tensor& x, double negative_slope = 0.0);

/// gx = gy where pre > 0, negative_slope * gy elsewhere.
Tensor relu_backward(const Tensor& gy, const Tensor& pre, double negative_slope = 0.0);

/// Serial reference implementations, kept for testing and benchmarking.
namespace serial {
Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride);
Tensor conv2d_backward_input(const Tensor& gy, const Tensor& w, int stride, int in_h, int in_w);
void conv2d_backward_params(const Tensor& gy, const Tensor& x, int stride, Tensor& gw, Tensor& gb);
Tensor xcorr_forward(const Tensor& zf, const Tensor& xf);
void xcorr_backward(const Tensor& gs, const Tensor& zf, const Tensor& xf, Tensor& gzf, Tensor& gxf);
Tensor instnorm_forward(const Tensor& x, double eps = 1e-5);
Tensor instnorm_backward(const Tensor& gy, const Tensor& x, double eps = 1e-5);
Tensor relu_forward(const Tensor& x, double negative_slope = 0.0);
Tensor relu_backward(const Tensor& gy, const Tensor& pre, double negative_slope = 0.0);
}  // namespace serial

/// OpenMP implementations (fall back to the serial ones when built without OpenMP).
namespace par {
Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride);
Tensor conv2d_backward_input(const Tensor& gy, const Tensor& w, int stride, int in_h, int in_w);
void conv2d_backward_params(const Tensor& gy, const Tensor& x, int stride, Tensor& gw, Tensor& gb);
Tensor xcorr_forward(const Tensor& zf, const Tensor& xf);
void xcorr_backward(const Tensor& gs, const Tensor& zf, const Tensor& xf, Tensor& gzf, Tensor& gxf);
Tensor instnorm_forward(const Tensor& x, double eps = 1e-5);
Tensor instnorm_backward(const Tensor& gy, const Tensor& x, double eps = 1e-5);
Tensor relu_forward(const Tensor& x, double negative_slope = 0.0);
Tensor relu_backward(const Tensor& gy, const Tensor& pre, double negative_slope = 0.0);
}  // namespace par

/// Toggle between the OpenMP and serial paths (default: OpenMP when available).
void set_parallel(bool enabled);
bool parallel_enabled();

/// Number of worker threads the OpenMP path will use.
int thread_count();
void set_thread_count(int n);

}  // namespace tracklab::kernels
