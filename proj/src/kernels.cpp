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

#include "tracklab/kernels.hpp"

#include <atomic>

#ifdef TRACKLAB_HAS_OPENMP
#include <omp.h>
#endif

namespace tracklab::kernels {

namespace {
std::atomic<bool> g_parallel{true};
}

void set_parallel(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }

int thread_count() {
#ifdef TRACKLAB_HAS_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_thread_count(int n) {
#ifdef TRACKLAB_HAS_OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride) {
    return parallel_enabled() ? par::conv2d_forward(x, w, b, stride)
                              : serial::conv2d_forward(x, w, b, stride);
}

Tensor conv2d_backward_input(const Tensor& gy, const Tensor& w, int stride, int in_h, int in_w) {
    return parallel_enabled() ? par::conv2d_backward_input(gy, w, stride, in_h, in_w)
                              : serial::conv2d_backward_input(gy, w, stride, in_h, in_w);
}

void conv2d_backward_params(const Tensor& gy, const Tensor& x, int stride, Tensor& gw, Tensor& gb) {
    if (parallel_enabled())
        par::conv2d_backward_params(gy, x, stride, gw, gb);
    else
        serial::conv2d_backward_params(gy, x, stride, gw, gb);
}

Tensor xcorr_forward(const Tensor& zf, const Tensor& xf) {
    return parallel_enabled() ? par::xcorr_forward(zf, xf) : serial::xcorr_forward(zf, xf);
}

void xcorr_backward(const Tensor& gs, const Tensor& zf, const Tensor& xf, Tensor& gzf, Tensor& gxf) {
    if (parallel_enabled())
        par::xcorr_backward(gs, zf, xf, gzf, gxf);
    else
        serial::xcorr_backward(gs, zf, xf, gzf, gxf);
}

Tensor instnorm_forward(const Tensor& x, double eps) {
    return parallel_enabled() ? par::instnorm_forward(x, eps) : serial::instnorm_forward(x, eps);
}

Tensor instnorm_backward(const Tensor& gy, const Tensor& x, double eps) {
    return parallel_enabled() ? par::instnorm_backward(gy, x, eps)
                              : serial::instnorm_backward(gy, x, eps);
}

Tensor relu_forward(const Tensor& x, double negative_slope) {
    return parallel_enabled() ? par::relu_forward(x, negative_slope)
                              : serial::relu_forward(x, negative_slope);
}

Tensor relu_backward(const Tensor& gy, const Tensor& pre, double negative_slope) {
    return parallel_enabled() ? par::relu_backward(gy, pre, negative_slope)
                              : serial::relu_backward(gy, pre, negative_slope);
}

}  // namespace tracklab::kernels
