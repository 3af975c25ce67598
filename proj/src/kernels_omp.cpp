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

// OpenMP kernels. Work is distributed over independent output elements and
// every element uses the shared per-element body, so results are bitwise
// identical to the serial reference for any thread count.

#include <cassert>

#include "tracklab/kernels.hpp"

#include "kernels_detail.inl"

#ifdef TRACKLAB_HAS_OPENMP
#include <omp.h>
#endif

namespace tracklab::kernels::par {

#ifndef TRACKLAB_HAS_OPENMP

Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride) {
    return serial::conv2d_forward(x, w, b, stride);
}
Tensor conv2d_backward_input(const Tensor& gy, const Tensor& w, int stride, int in_h, int in_w) {
    return serial::conv2d_backward_input(gy, w, stride, in_h, in_w);
}
void conv2d_backward_params(const Tensor& gy, const Tensor& x, int stride, Tensor& gw, Tensor& gb) {
    serial::conv2d_backward_params(gy, x, stride, gw, gb);
}
Tensor xcorr_forward(const Tensor& zf, const Tensor& xf) { return serial::xcorr_forward(zf, xf); }
void xcorr_backward(const Tensor& gs, const Tensor& zf, const Tensor& xf, Tensor& gzf, Tensor& gxf) {
    serial::xcorr_backward(gs, zf, xf, gzf, gxf);
}
Tensor instnorm_forward(const Tensor& x, double eps) { return serial::instnorm_forward(x, eps); }
Tensor instnorm_backward(const Tensor& gy, const Tensor& x, double eps) {
    return serial::instnorm_backward(gy, x, eps);
}
Tensor relu_forward(const Tensor& x, double negative_slope) {
    return serial::relu_forward(x, negative_slope);
}
Tensor relu_backward(const Tensor& gy, const Tensor& pre, double negative_slope) {
    return serial::relu_backward(gy, pre, negative_slope);
}

#else

using namespace detail;

Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride) {
    const ConvDims d = conv_dims(x, w, stride);
    assert(w.dim(1) == d.in_c && b.dim(0) == d.out_c);
    Tensor y(d.out_c, d.out_h, d.out_w);
#pragma omp parallel for collapse(2) schedule(static)
    for (int oc = 0; oc < d.out_c; ++oc)
        for (int oy = 0; oy < d.out_h; ++oy)
            for (int ox = 0; ox < d.out_w; ++ox)
                y.at(oc, oy, ox) = conv_fwd_elem(x.data(), w.data(), b.at(oc), d, oc, oy, ox);
    return y;
}

Tensor conv2d_backward_input(const Tensor& gy, const Tensor& w, int stride, int in_h, int in_w) {
    ConvDims d;
    d.in_c = w.dim(1);
    d.in_h = in_h;
    d.in_w = in_w;
    d.out_c = gy.dim(0);
    d.out_h = gy.dim(1);
    d.out_w = gy.dim(2);
    d.k = w.dim(2);
    d.stride = stride;
    const auto gyT = transpose_gy(gy, d);
    const auto wT = transpose_w(w, d);
    Tensor gx(d.in_c, in_h, in_w);
#pragma omp parallel for collapse(2) schedule(static)
    for (int c = 0; c < d.in_c; ++c)
        for (int iy = 0; iy < in_h; ++iy)
            for (int ix = 0; ix < in_w; ++ix)
                gx.at(c, iy, ix) = conv_gx_elem(gyT.data(), wT.data(), d, c, iy, ix);
    return gx;
}

void conv2d_backward_params(const Tensor& gy, const Tensor& x, int stride, Tensor& gw, Tensor& gb) {
    ConvDims d = conv_dims(x, gw, stride);
    assert(gy.dim(0) == d.out_c && gy.dim(1) == d.out_h && gy.dim(2) == d.out_w);
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < d.out_c; ++oc) {
        gb.at(oc) = conv_gb_elem(gy.data(), d, oc);
        for (int c = 0; c < d.in_c; ++c)
            for (int ky = 0; ky < d.k; ++ky)
                for (int kx = 0; kx < d.k; ++kx)
                    gw.at(oc, c, ky, kx) = conv_gw_elem(gy.data(), x.data(), d, oc, c, ky, kx);
    }
}

Tensor xcorr_forward(const Tensor& zf, const Tensor& xf) {
    const XcorrDims d = xcorr_dims(zf, xf);
    assert(xf.dim(0) == d.c);
    Tensor s(d.out_h, d.out_w);
#pragma omp parallel for collapse(2) schedule(static)
    for (int oy = 0; oy < d.out_h; ++oy)
        for (int ox = 0; ox < d.out_w; ++ox)
            s.at(oy, ox) = xcorr_elem(zf.data(), xf.data(), d, oy, ox);
    return s;
}

void xcorr_backward(const Tensor& gs, const Tensor& zf, const Tensor& xf, Tensor& gzf, Tensor& gxf) {
    const XcorrDims d = xcorr_dims(zf, xf);
    gzf = Tensor(d.c, d.zh, d.zw);
    gxf = Tensor(d.c, d.xh, d.xw);
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < d.c; ++ch) {
        for (int ky = 0; ky < d.zh; ++ky)
            for (int kx = 0; kx < d.zw; ++kx)
                gzf.at(ch, ky, kx) = xcorr_gz_elem(gs.data(), xf.data(), d, ch, ky, kx);
        for (int y = 0; y < d.xh; ++y)
            for (int x = 0; x < d.xw; ++x)
                gxf.at(ch, y, x) = xcorr_gx_elem(gs.data(), zf.data(), d, ch, y, x);
    }
}


Tensor instnorm_forward(const Tensor& x, double eps) {
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int n = h * w;
    Tensor y(c, h, w);
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < c; ++ch)
        instnorm_channel_fwd(x.data() + static_cast<std::size_t>(ch) * n,
                             y.data() + static_cast<std::size_t>(ch) * n, n, eps);
    return y;
}

Tensor instnorm_backward(const Tensor& gy, const Tensor& x, double eps) {
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int n = h * w;
    Tensor gx(c, h, w);
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < c; ++ch)
        instnorm_channel_bwd(gy.data() + static_cast<std::size_t>(ch) * n,
                             x.data() + static_cast<std::size_t>(ch) * n,
                             gx.data() + static_cast<std::size_t>(ch) * n, n, eps);
    return gx;
}

Tensor relu_forward(const Tensor& x, double negative_slope) {
    Tensor y = x;
    auto& v = y.raw();
    const long long n = static_cast<long long>(v.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i)
        if (v[i] < 0.0) v[i] *= negative_slope;
    return y;
}

Tensor relu_backward(const Tensor& gy, const Tensor& pre, double negative_slope) {
    Tensor gx = gy;
    auto& v = gx.raw();
    const long long n = static_cast<long long>(v.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i)
        if (pre[static_cast<std::size_t>(i)] <= 0.0) v[i] *= negative_slope;
    return gx;
}

#endif  // TRACKLAB_HAS_OPENMP

}  // namespace tracklab::kernels::par
