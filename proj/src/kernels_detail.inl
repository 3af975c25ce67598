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

// Per-output-element kernel bodies shared by the serial and OpenMP variants.
// Keeping one body per element (with a fixed inner summation order) makes the
// two variants bitwise identical for any thread count.

#pragma once

#include <cmath>
#include <vector>

#include "tracklab/tensor.hpp"

namespace tracklab::kernels::detail {

struct ConvDims {
    int in_c, in_h, in_w;
    int out_c, out_h, out_w;
    int k, stride;
};

inline ConvDims conv_dims(const Tensor& x, const Tensor& w, int stride) {
    ConvDims d;
    d.in_c = x.dim(0);
    d.in_h = x.dim(1);
    d.in_w = x.dim(2);
    d.out_c = w.dim(0);
    d.k = w.dim(2);
    d.stride = stride;
    d.out_h = (d.in_h - d.k) / stride + 1;
    d.out_w = (d.in_w - d.k) / stride + 1;
    return d;
}

inline double conv_fwd_elem(const double* x, const double* w, double bias, const ConvDims& d,
                            int oc, int oy, int ox) {
    double acc = bias;
    const double* wk = w + static_cast<std::size_t>(oc) * d.in_c * d.k * d.k;
    for (int c = 0; c < d.in_c; ++c) {
        const double* xc = x + static_cast<std::size_t>(c) * d.in_h * d.in_w;
        for (int ky = 0; ky < d.k; ++ky) {
            const double* xrow = xc + static_cast<std::size_t>(oy * d.stride + ky) * d.in_w +
                                 ox * d.stride;
            const double* wrow = wk + static_cast<std::size_t>(c) * d.k * d.k + ky * d.k;
            for (int kx = 0; kx < d.k; ++kx) acc += wrow[kx] * xrow[kx];
        }
    }
    return acc;
}

/// Transposed views used by the input-gradient gather: gyT is (oh, ow, oc),
/// wT is (in_c, k, k, out_c).
inline std::vector<double> transpose_gy(const Tensor& gy, const ConvDims& d) {
    std::vector<double> gyT(static_cast<std::size_t>(d.out_h) * d.out_w * d.out_c);
    for (int oc = 0; oc < d.out_c; ++oc)
        for (int oy = 0; oy < d.out_h; ++oy)
            for (int ox = 0; ox < d.out_w; ++ox)
                gyT[(static_cast<std::size_t>(oy) * d.out_w + ox) * d.out_c + oc] =
                    gy.at(oc, oy, ox);
    return gyT;
}

inline std::vector<double> transpose_w(const Tensor& w, const ConvDims& d) {
    std::vector<double> wT(static_cast<std::size_t>(d.in_c) * d.k * d.k * d.out_c);
    for (int oc = 0; oc < d.out_c; ++oc)
        for (int c = 0; c < d.in_c; ++c)
            for (int ky = 0; ky < d.k; ++ky)
                for (int kx = 0; kx < d.k; ++kx)
                    wT[((static_cast<std::size_t>(c) * d.k + ky) * d.k + kx) * d.out_c + oc] =
                        w.at(oc, c, ky, kx);
    return wT;
}

inline double conv_gx_elem(const double* gyT, const double* wT, const ConvDims& d, int c, int iy,
                           int ix) {
    double acc = 0.0;
    for (int ky = 0; ky < d.k; ++ky) {
        const int ry = iy - ky;
        if (ry < 0 || ry % d.stride != 0) continue;
        const int oy = ry / d.stride;
        if (oy >= d.out_h) continue;
        for (int kx = 0; kx < d.k; ++kx) {
            const int rx = ix - kx;
            if (rx < 0 || rx % d.stride != 0) continue;
            const int ox = rx / d.stride;
            if (ox >= d.out_w) continue;
            const double* g = gyT + (static_cast<std::size_t>(oy) * d.out_w + ox) * d.out_c;
            const double* wv = wT + ((static_cast<std::size_t>(c) * d.k + ky) * d.k + kx) * d.out_c;
            for (int oc = 0; oc < d.out_c; ++oc) acc += g[oc] * wv[oc];
        }
    }
    return acc;
}

inline double conv_gw_elem(const double* gy, const double* x, const ConvDims& d, int oc, int c,
                           int ky, int kx) {
    double acc = 0.0;
    const double* gc = gy + static_cast<std::size_t>(oc) * d.out_h * d.out_w;
    const double* xc = x + static_cast<std::size_t>(c) * d.in_h * d.in_w;
    for (int oy = 0; oy < d.out_h; ++oy) {
        const double* grow = gc + static_cast<std::size_t>(oy) * d.out_w;
        const double* xrow = xc + static_cast<std::size_t>(oy * d.stride + ky) * d.in_w + kx;
        for (int ox = 0; ox < d.out_w; ++ox) acc += grow[ox] * xrow[ox * d.stride];
    }
    return acc;
}

inline double conv_gb_elem(const double* gy, const ConvDims& d, int oc) {
    double acc = 0.0;
    const double* gc = gy + static_cast<std::size_t>(oc) * d.out_h * d.out_w;
    const int n = d.out_h * d.out_w;
    for (int i = 0; i < n; ++i) acc += gc[i];
    return acc;
}

/// One channel of the standardization y = (x - mean) / sqrt(var + eps) and
/// its backward pass. N is the spatial element count of the channel.
inline void instnorm_channel_fwd(const double* x, double* y, int n, double eps) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += x[i];
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (x[i] - mean) * (x[i] - mean);
    var /= n;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int i = 0; i < n; ++i) y[i] = (x[i] - mean) * inv;
}

inline void instnorm_channel_bwd(const double* gy, const double* x, double* gx, int n, double eps) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += x[i];
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (x[i] - mean) * (x[i] - mean);
    var /= n;
    const double inv = 1.0 / std::sqrt(var + eps);
    double g_mean = 0.0, gxhat_mean = 0.0;
    for (int i = 0; i < n; ++i) {
        g_mean += gy[i];
        gxhat_mean += gy[i] * (x[i] - mean) * inv;
    }
    g_mean /= n;
    gxhat_mean /= n;
    for (int i = 0; i < n; ++i) {
        const double xhat = (x[i] - mean) * inv;
        gx[i] = inv * (gy[i] - g_mean - xhat * gxhat_mean);
    }
}

struct XcorrDims {
    int c, zh, zw, xh, xw, out_h, out_w;
};

inline XcorrDims xcorr_dims(const Tensor& zf, const Tensor& xf) {
    XcorrDims d;
    d.c = zf.dim(0);
    d.zh = zf.dim(1);
    d.zw = zf.dim(2);
    d.xh = xf.dim(1);
    d.xw = xf.dim(2);
    d.out_h = d.xh - d.zh + 1;
    d.out_w = d.xw - d.zw + 1;
    return d;
}

inline double xcorr_elem(const double* zf, const double* xf, const XcorrDims& d, int oy, int ox) {
    double acc = 0.0;
    for (int ch = 0; ch < d.c; ++ch) {
        const double* zc = zf + static_cast<std::size_t>(ch) * d.zh * d.zw;
        const double* xc = xf + static_cast<std::size_t>(ch) * d.xh * d.xw;
        for (int ky = 0; ky < d.zh; ++ky) {
            const double* zrow = zc + static_cast<std::size_t>(ky) * d.zw;
            const double* xrow = xc + static_cast<std::size_t>(oy + ky) * d.xw + ox;
            for (int kx = 0; kx < d.zw; ++kx) acc += zrow[kx] * xrow[kx];
        }
    }
    return acc;
}

inline double xcorr_gz_elem(const double* gs, const double* xf, const XcorrDims& d, int ch, int ky,
                            int kx) {
    double acc = 0.0;
    const double* xc = xf + static_cast<std::size_t>(ch) * d.xh * d.xw;
    for (int oy = 0; oy < d.out_h; ++oy) {
        const double* grow = gs + static_cast<std::size_t>(oy) * d.out_w;
        const double* xrow = xc + static_cast<std::size_t>(oy + ky) * d.xw + kx;
        for (int ox = 0; ox < d.out_w; ++ox) acc += grow[ox] * xrow[ox];
    }
    return acc;
}

inline double xcorr_gx_elem(const double* gs, const double* zf, const XcorrDims& d, int ch, int y,
                            int x) {
    double acc = 0.0;
    const double* zc = zf + static_cast<std::size_t>(ch) * d.zh * d.zw;
    const int ky_lo = (y - d.out_h + 1) > 0 ? (y - d.out_h + 1) : 0;
    const int ky_hi = y < d.zh - 1 ? y : d.zh - 1;
    const int kx_lo = (x - d.out_w + 1) > 0 ? (x - d.out_w + 1) : 0;
    const int kx_hi = x < d.zw - 1 ? x : d.zw - 1;
    for (int ky = ky_lo; ky <= ky_hi; ++ky)
        for (int kx = kx_lo; kx <= kx_hi; ++kx)
            acc += gs[static_cast<std::size_t>(y - ky) * d.out_w + (x - kx)] *
                   zc[static_cast<std::size_t>(ky) * d.zw + kx];
    return acc;
}

}  // namespace tracklab::kernels::detail
