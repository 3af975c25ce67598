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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tracklab/kernels.hpp"
#include "tracklab/rng.hpp"

using namespace tracklab;

namespace {

Tensor random_tensor(Rng& rng, int c, int h, int w, double lo = -1.0, double hi = 1.0) {
    Tensor t(c, h, w);
    for (auto& v : t.raw()) v = rng.uniform(lo, hi);
    return t;
}

// Independent naive convolution; shares no code with the library kernels.
Tensor naive_conv(const Tensor& x, const Tensor& w, const Tensor& b, int stride) {
    const int in_c = x.dim(0), in_h = x.dim(1), in_w = x.dim(2);
    const int out_c = w.dim(0), k = w.dim(2);
    const int out_h = (in_h - k) / stride + 1;
    const int out_w = (in_w - k) / stride + 1;
    Tensor y(out_c, out_h, out_w);
    for (int oc = 0; oc < out_c; ++oc)
        for (int oy = 0; oy < out_h; ++oy)
            for (int ox = 0; ox < out_w; ++ox) {
                double acc = b.at(oc);
                for (int c = 0; c < in_c; ++c)
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx)
                            acc += w.at(oc, c, ky, kx) * x.at(c, oy * stride + ky, ox * stride + kx);
                y.at(oc, oy, ox) = acc;
            }
    return y;
}

Tensor naive_xcorr(const Tensor& zf, const Tensor& xf) {
    const int c = zf.dim(0), zh = zf.dim(1), zw = zf.dim(2);
    const int out_h = xf.dim(1) - zh + 1, out_w = xf.dim(2) - zw + 1;
    Tensor s(out_h, out_w);
    for (int oy = 0; oy < out_h; ++oy)
        for (int ox = 0; ox < out_w; ++ox) {
            double acc = 0.0;
            for (int ch = 0; ch < c; ++ch)
                for (int ky = 0; ky < zh; ++ky)
                    for (int kx = 0; kx < zw; ++kx)
                        acc += zf.at(ch, ky, kx) * xf.at(ch, oy + ky, ox + kx);
            s.at(oy, ox) = acc;
        }
    return s;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    REQUIRE(a.same_shape(b));
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

void check_close(const Tensor& a, const Tensor& b, double tol) {
    REQUIRE(a.same_shape(b));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(tol));
}

}  // namespace

TEST_CASE("conv2d_forward matches a naive oracle") {
    Rng rng(11);
    for (int stride : {1, 2}) {
        const Tensor x = random_tensor(rng, 3, 17, 17);
        Tensor w(5, 3, 3, 3);
        for (auto& v : w.raw()) v = rng.uniform(-0.5, 0.5);
        Tensor b(5);
        for (auto& v : b.raw()) v = rng.uniform(-0.1, 0.1);
        check_close(kernels::serial::conv2d_forward(x, w, b, stride), naive_conv(x, w, b, stride),
                    1e-12);
    }
}

TEST_CASE("xcorr_forward matches a naive oracle") {
    Rng rng(12);
    const Tensor zf = random_tensor(rng, 4, 3, 3);
    const Tensor xf = random_tensor(rng, 4, 9, 9);
    check_close(kernels::serial::xcorr_forward(zf, xf), naive_xcorr(zf, xf), 1e-12);
}

TEST_CASE("openmp kernels are bitwise identical to the serial reference") {
    Rng rng(13);
    const Tensor x = random_tensor(rng, 3, 31, 31);
    Tensor w(8, 3, 3, 3);
    for (auto& v : w.raw()) v = rng.uniform(-0.4, 0.4);
    Tensor b(8);
    for (auto& v : b.raw()) v = rng.uniform(-0.1, 0.1);

    const Tensor ys = kernels::serial::conv2d_forward(x, w, b, 2);
    const Tensor yp = kernels::par::conv2d_forward(x, w, b, 2);
    CHECK(bitwise_equal(ys, yp));

    const Tensor gy = random_tensor(rng, 8, ys.dim(1), ys.dim(2));
    CHECK(bitwise_equal(kernels::serial::conv2d_backward_input(gy, w, 2, 31, 31),
                        kernels::par::conv2d_backward_input(gy, w, 2, 31, 31)));

    Tensor gws(8, 3, 3, 3), gbs(8), gwp(8, 3, 3, 3), gbp(8);
    kernels::serial::conv2d_backward_params(gy, x, 2, gws, gbs);
    kernels::par::conv2d_backward_params(gy, x, 2, gwp, gbp);
    CHECK(bitwise_equal(gws, gwp));
    CHECK(bitwise_equal(gbs, gbp));

    const Tensor zf = random_tensor(rng, 6, 4, 4);
    const Tensor xf = random_tensor(rng, 6, 11, 11);
    CHECK(bitwise_equal(kernels::serial::xcorr_forward(zf, xf), kernels::par::xcorr_forward(zf, xf)));

    Tensor gs(8, 8);
    for (auto& v : gs.raw()) v = rng.uniform(-1.0, 1.0);
    Tensor gzs, gxs, gzp, gxp;
    kernels::serial::xcorr_backward(gs, zf, xf, gzs, gxs);
    kernels::par::xcorr_backward(gs, zf, xf, gzp, gxp);
    CHECK(bitwise_equal(gzs, gzp));
    CHECK(bitwise_equal(gxs, gxp));
}

TEST_CASE("conv backward gradients match finite differences") {
    Rng rng(14);
    const int stride = 2;
    Tensor x = random_tensor(rng, 2, 9, 9);
    Tensor w(3, 2, 3, 3);
    for (auto& v : w.raw()) v = rng.uniform(-0.5, 0.5);
    Tensor b(3);
    for (auto& v : b.raw()) v = rng.uniform(-0.1, 0.1);
    const Tensor y0 = kernels::conv2d_forward(x, w, b, stride);
    Tensor gy(y0.dim(0), y0.dim(1), y0.dim(2));
    for (auto& v : gy.raw()) v = rng.uniform(-1.0, 1.0);
    // Scalar objective: fixed weighted sum of conv outputs.
    auto objective = [&](const Tensor& xx, const Tensor& ww, const Tensor& bb) {
        const Tensor y = kernels::conv2d_forward(xx, ww, bb, stride);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += gy[i] * y[i];
        return s;
    };

    const Tensor gx = kernels::conv2d_backward_input(gy, w, stride, 9, 9);
    Tensor gw(3, 2, 3, 3), gb(3);
    kernels::conv2d_backward_params(gy, x, stride, gw, gb);

    const double h = 1e-5;
    for (std::size_t i = 0; i < x.size(); i += 7) {
        Tensor xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        CHECK(gx[i] ==
              doctest::Approx((objective(xp, w, b) - objective(xm, w, b)) / (2 * h)).epsilon(1e-6));
    }
    for (std::size_t i = 0; i < w.size(); i += 5) {
        Tensor wp = w, wm = w;
        wp[i] += h;
        wm[i] -= h;
        CHECK(gw[i] ==
              doctest::Approx((objective(x, wp, b) - objective(x, wm, b)) / (2 * h)).epsilon(1e-6));
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        Tensor bp = b, bm = b;
        bp[i] += h;
        bm[i] -= h;
        CHECK(gb[i] ==
              doctest::Approx((objective(x, w, bp) - objective(x, w, bm)) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("xcorr backward matches finite differences") {
    Rng rng(15);
    Tensor zf = random_tensor(rng, 2, 3, 3);
    Tensor xf = random_tensor(rng, 2, 7, 7);
    Tensor gs(5, 5);
    for (auto& v : gs.raw()) v = rng.uniform(-1.0, 1.0);
    auto objective = [&](const Tensor& z, const Tensor& x) {
        const Tensor s = kernels::xcorr_forward(z, x);
        double acc = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) acc += gs[i] * s[i];
        return acc;
    };
    Tensor gz, gx;
    kernels::xcorr_backward(gs, zf, xf, gz, gx);
    const double h = 1e-5;
    for (std::size_t i = 0; i < zf.size(); i += 3) {
        Tensor zp = zf, zm = zf;
        zp[i] += h;
        zm[i] -= h;
        CHECK(gz[i] ==
              doctest::Approx((objective(zp, xf) - objective(zm, xf)) / (2 * h)).epsilon(1e-6));
    }
    for (std::size_t i = 0; i < xf.size(); i += 9) {
        Tensor xp = xf, xm = xf;
        xp[i] += h;
        xm[i] -= h;
        CHECK(gx[i] ==
              doctest::Approx((objective(zf, xp) - objective(zf, xm)) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("instance norm standardizes each channel") {
    Rng rng(21);
    const Tensor x = random_tensor(rng, 4, 9, 9, -2.0, 3.0);
    const Tensor y = kernels::serial::instnorm_forward(x);
    for (int c = 0; c < 4; ++c) {
        double mean = 0.0, var = 0.0;
        for (int i = 0; i < 81; ++i) mean += y.at(c, i / 9, i % 9);
        mean /= 81.0;
        for (int i = 0; i < 81; ++i) {
            const double d = y.at(c, i / 9, i % 9) - mean;
            var += d * d;
        }
        var /= 81.0;
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // eps shrinks it slightly
    }
    // Constant channels map to zero.
    Tensor flat(2, 5, 5);
    flat.fill(3.25);
    const Tensor fy = kernels::serial::instnorm_forward(flat);
    for (double v : fy.raw()) CHECK(v == doctest::Approx(0.0));
    // Serial and OpenMP agree bitwise.
    CHECK(bitwise_equal(kernels::serial::instnorm_forward(x), kernels::par::instnorm_forward(x)));
}

TEST_CASE("instance norm backward matches finite differences") {
    Rng rng(22);
    Tensor x = random_tensor(rng, 2, 6, 6);
    Tensor gy(2, 6, 6);
    for (auto& v : gy.raw()) v = rng.uniform(-1.0, 1.0);
    auto objective = [&](const Tensor& xx) {
        const Tensor y = kernels::instnorm_forward(xx);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += gy[i] * y[i];
        return s;
    };
    const Tensor gx = kernels::instnorm_backward(gy, x);
    const Tensor gxp = kernels::par::instnorm_backward(gy, x);
    CHECK(bitwise_equal(gx, gxp));
    const double h = 1e-6;
    for (std::size_t i = 0; i < x.size(); i += 5) {
        Tensor xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        CHECK(gx[i] == doctest::Approx((objective(xp) - objective(xm)) / (2 * h)).epsilon(1e-5));
    }
}

TEST_CASE("dispatch honors the parallel toggle") {
    Rng rng(16);
    const Tensor x = random_tensor(rng, 1, 8, 8);
    Tensor w(2, 1, 3, 3);
    for (auto& v : w.raw()) v = rng.uniform(-1.0, 1.0);
    Tensor b(2);
    kernels::set_parallel(false);
    const Tensor a = kernels::conv2d_forward(x, w, b, 1);
    kernels::set_parallel(true);
    const Tensor c = kernels::conv2d_forward(x, w, b, 1);
    CHECK(bitwise_equal(a, c));
}
