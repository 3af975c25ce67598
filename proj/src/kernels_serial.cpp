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

// Serial reference kernels, kept for testing and benchmarking against the
// OpenMP variants. Both call the same per-element bodies, so their outputs
// are bitwise identical.

#include <cassert>

#include "tracklab/kernels.hpp"

#include "kernels_detail.inl"

namespace tracklab::kernels::serial {

using namespace detail;

Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride) {
    const ConvDims d = conv_dims(x, w, stride);
    assert(w.dim(1) == d.in_c && b.dim(0) == d.out_c);
    Tensor y(d.out_c, d.out_h, d.out_w);
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
    for (int c = 0; c < d.in_c; ++c)
        for (int iy = 0; iy < in_h; ++iy)
            for (int ix = 0; ix < in_w; ++ix)
                gx.at(c, iy, ix) = conv_gx_elem(gyT.data(), wT.data(), d, c, iy, ix);
    return gx;
}

void conv2d_backward_params(const Tensor& gy, const Tensor& x, int stride, Tensor& gw, Tensor& gb) {
    ConvDims d = conv_dims(x, gw, stride);
    assert(gy.dim(0) == d.out_c && gy.dim(1) == d.out_h && gy.dim(2) == d.out_w);
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
    for (int oy = 0; oy < d.out_h; ++oy)
        for (int ox = 0; ox < d.out_w; ++ox)
            s.at(oy, ox) = xcorr_elem(zf.data(), xf.data(), d, oy, ox);
    return s;
}

void xcorr_backward(const Tensor& gs, const Tensor& zf, const Tensor& xf, Tensor& gzf, Tensor& gxf) {
    const XcorrDims d = xcorr_dims(zf, xf);
    gzf = Tensor(d.c, d.zh, d.zw);
    gxf = Tensor(d.c, d.xh, d.xw);
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
    for (int ch = 0; ch < c; ++ch)
        instnorm_channel_fwd(x.data() + static_cast<std::size_t>(ch) * n,
                             y.data() + static_cast<std::size_t>(ch) * n, n, eps);
    return y;
}

Tensor instnorm_backward(const Tensor& gy, const Tensor& x, double eps) {
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int n = h * w;
    Tensor gx(c, h, w);
    for (int ch = 0; ch < c; ++ch)
        instnorm_channel_bwd(gy.data() + static_cast<std::size_t>(ch) * n,
                             x.data() + static_cast<std::size_t>(ch) * n,
                             gx.data() + static_cast<std::size_t>(ch) * n, n, eps);
    return gx;
}

Tensor relu_forward(const Tensor& x, double negative_slope) {
    Tensor y = x;
    for (auto& e : y.raw())
        if (e < 0.0) e *= negative_slope;
    return y;
}

Tensor relu_backward(const Tensor& gy, const Tensor& pre, double negative_slope) {
    Tensor gx = gy;
    for (std::size_t i = 0; i < gx.size(); ++i)
        if (pre[i] <= 0.0) gx[i] *= negative_slope;
    return gx;
}

}  // namespace tracklab::kernels::serial
