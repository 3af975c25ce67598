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

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace tracklab {

/// Dense row-major tensor of doubles, up to 4 dimensions. Rank-3 tensors are
/// interpreted as channel-major (C, H, W) feature maps throughout the library.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(int n) : dims_{n, 1, 1, 1}, rank_(1), v_(static_cast<std::size_t>(n), 0.0) {}
    Tensor(int a, int b) : dims_{a, b, 1, 1}, rank_(2), v_(static_cast<std::size_t>(a) * b, 0.0) {}
    Tensor(int a, int b, int c)
        : dims_{a, b, c, 1}, rank_(3), v_(static_cast<std::size_t>(a) * b * c, 0.0) {}
    Tensor(int a, int b, int c, int d)
        : dims_{a, b, c, d}, rank_(4), v_(static_cast<std::size_t>(a) * b * c * d, 0.0) {}

    int rank() const { return rank_; }
    int dim(int i) const { return dims_[i]; }
    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    std::vector<double>& raw() { return v_; }
    const std::vector<double>& raw() const { return v_; }

    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }

    double& at(int a) { return v_[static_cast<std::size_t>(a)]; }
    double at(int a) const { return v_[static_cast<std::size_t>(a)]; }
    double& at(int a, int b) { return v_[static_cast<std::size_t>(a) * dims_[1] + b]; }
    double at(int a, int b) const { return v_[static_cast<std::size_t>(a) * dims_[1] + b]; }
    double& at(int a, int b, int c) {
        return v_[(static_cast<std::size_t>(a) * dims_[1] + b) * dims_[2] + c];
    }
    double at(int a, int b, int c) const {
        return v_[(static_cast<std::size_t>(a) * dims_[1] + b) * dims_[2] + c];
    }
    double& at(int a, int b, int c, int d) {
        return v_[((static_cast<std::size_t>(a) * dims_[1] + b) * dims_[2] + c) * dims_[3] + d];
    }
    double at(int a, int b, int c, int d) const {
        return v_[((static_cast<std::size_t>(a) * dims_[1] + b) * dims_[2] + c) * dims_[3] + d];
    }

    bool same_shape(const Tensor& o) const {
        return rank_ == o.rank_ && dims_[0] == o.dims_[0] && dims_[1] == o.dims_[1] &&
               dims_[2] == o.dims_[2] && dims_[3] == o.dims_[3];
    }

    void fill(double x) {
        for (auto& e : v_) e = x;
    }

    void add_scaled(const Tensor& o, double s) {
        assert(v_.size() == o.v_.size());
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += s * o.v_[i];
    }

    double sum_sq() const {
        double s = 0.0;
        for (double e : v_) s += e * e;
        return s;
    }

    bool all_finite() const {
        for (double e : v_)
            if (!std::isfinite(e)) return false;
        return true;
    }

private:
    int dims_[4] = {0, 1, 1, 1};
    int rank_ = 0;
    std::vector<double> v_;
};

}  // namespace tracklab
