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

// Times the serial reference kernels against the OpenMP variants and checks
// that both produce bitwise-identical outputs.

#include <chrono>
#include <cstdio>
#include <functional>

#include "tracklab/kernels.hpp"
#include "tracklab/rng.hpp"

using namespace tracklab;

namespace {

Tensor random_tensor(Rng& rng, int c, int h, int w) {
    Tensor t(c, h, w);
    for (auto& v : t.raw()) v = rng.uniform(-1.0, 1.0);
    return t;
}

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

}  // namespace

int main() {
    Rng rng(42);
    const int reps = 20;

    std::printf("threads: %d\n", kernels::thread_count());
    std::printf("%-24s %12s %12s %8s %s\n", "kernel", "serial (ms)", "openmp (ms)", "speedup",
                "bitwise");

    // conv2d on search-crop-sized input
    {
        const Tensor x = random_tensor(rng, 3, 127, 127);
        Tensor w(16, 3, 3, 3);
        for (auto& v : w.raw()) v = rng.uniform(-0.2, 0.2);
        Tensor b(16);
        const Tensor ys = kernels::serial::conv2d_forward(x, w, b, 2);
        const Tensor yp = kernels::par::conv2d_forward(x, w, b, 2);
        const double ts = time_ms([&] { kernels::serial::conv2d_forward(x, w, b, 2); }, reps);
        const double tp = time_ms([&] { kernels::par::conv2d_forward(x, w, b, 2); }, reps);
        std::printf("%-24s %12.3f %12.3f %8.2f %s\n", "conv2d_forward", ts, tp, ts / tp,
                    bitwise_equal(ys, yp) ? "yes" : "NO");
    }
    {
        const Tensor x = random_tensor(rng, 16, 63, 63);
        Tensor w(24, 16, 3, 3);
        for (auto& v : w.raw()) v = rng.uniform(-0.2, 0.2);
        const Tensor gy = random_tensor(rng, 24, 31, 31);
        Tensor gws(24, 16, 3, 3), gbs(24), gwp(24, 16, 3, 3), gbp(24);
        kernels::serial::conv2d_backward_params(gy, x, 2, gws, gbs);
        kernels::par::conv2d_backward_params(gy, x, 2, gwp, gbp);
        const double ts =
            time_ms([&] { kernels::serial::conv2d_backward_params(gy, x, 2, gws, gbs); }, reps);
        const double tp =
            time_ms([&] { kernels::par::conv2d_backward_params(gy, x, 2, gwp, gbp); }, reps);
        std::printf("%-24s %12.3f %12.3f %8.2f %s\n", "conv2d_backward_params", ts, tp, ts / tp,
                    bitwise_equal(gws, gwp) && bitwise_equal(gbs, gbp) ? "yes" : "NO");
    }
    {
        Tensor w(24, 16, 3, 3);
        for (auto& v : w.raw()) v = rng.uniform(-0.2, 0.2);
        const Tensor gy = random_tensor(rng, 24, 31, 31);
        const Tensor gs = kernels::serial::conv2d_backward_input(gy, w, 2, 63, 63);
        const Tensor gp = kernels::par::conv2d_backward_input(gy, w, 2, 63, 63);
        const double ts =
            time_ms([&] { kernels::serial::conv2d_backward_input(gy, w, 2, 63, 63); }, reps);
        const double tp =
            time_ms([&] { kernels::par::conv2d_backward_input(gy, w, 2, 63, 63); }, reps);
        std::printf("%-24s %12.3f %12.3f %8.2f %s\n", "conv2d_backward_input", ts, tp, ts / tp,
                    bitwise_equal(gs, gp) ? "yes" : "NO");
    }
    // cross-correlation on feature-map sizes
    {
        const Tensor zf = random_tensor(rng, 32, 7, 7);
        const Tensor xf = random_tensor(rng, 32, 15, 15);
        const Tensor ss = kernels::serial::xcorr_forward(zf, xf);
        const Tensor sp = kernels::par::xcorr_forward(zf, xf);
        const double ts = time_ms([&] { kernels::serial::xcorr_forward(zf, xf); }, reps * 5);
        const double tp = time_ms([&] { kernels::par::xcorr_forward(zf, xf); }, reps * 5);
        std::printf("%-24s %12.3f %12.3f %8.2f %s\n", "xcorr_forward", ts, tp, ts / tp,
                    bitwise_equal(ss, sp) ? "yes" : "NO");
    }
    {
        const Tensor zf = random_tensor(rng, 32, 7, 7);
        const Tensor xf = random_tensor(rng, 32, 15, 15);
        const Tensor gs = random_tensor(rng, 1, 9, 9);
        Tensor g2(9, 9);
        for (int i = 0; i < 81; ++i) g2[static_cast<std::size_t>(i)] = gs[static_cast<std::size_t>(i)];
        Tensor gzs, gxs, gzp, gxp;
        kernels::serial::xcorr_backward(g2, zf, xf, gzs, gxs);
        kernels::par::xcorr_backward(g2, zf, xf, gzp, gxp);
        const double ts =
            time_ms([&] { kernels::serial::xcorr_backward(g2, zf, xf, gzs, gxs); }, reps * 5);
        const double tp =
            time_ms([&] { kernels::par::xcorr_backward(g2, zf, xf, gzp, gxp); }, reps * 5);
        std::printf("%-24s %12.3f %12.3f %8.2f %s\n", "xcorr_backward", ts, tp, ts / tp,
                    bitwise_equal(gzs, gzp) && bitwise_equal(gxs, gxp) ? "yes" : "NO");
    }
    return 0;
}
