/**
 * Copyright 2026, the mangrove-toolkit authors.
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
#ifndef MANGROVE_TENSOR_HPP
#define MANGROVE_TENSOR_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "mangrove/errors.hpp"

namespace mangrove::nn {

/// Dense NCHW tensor of doubles. Double precision keeps training fully
/// deterministic and lets gradient checks run at tight tolerances.
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_, double fill = 0.0)
        : n(n_), c(c_), h(h_), w(w_),
          data(static_cast<size_t>(n_) * c_ * h_ * w_, fill) {}

    static Tensor zeros(int n, int c, int h, int w) { return Tensor(n, c, h, w, 0.0); }
    static Tensor scalar(double v) {
        Tensor t(1, 1, 1, 1);
        t.data[0] = v;
        return t;
    }

    size_t numel() const { return data.size(); }
    bool empty() const { return data.empty(); }

    bool same_shape(const Tensor& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    double& at(int ni, int ci, int y, int x) {
        return data[((static_cast<size_t>(ni) * c + ci) * h + y) * w + x];
    }
    double at(int ni, int ci, int y, int x) const {
        return data[((static_cast<size_t>(ni) * c + ci) * h + y) * w + x];
    }

    double* plane(int ni, int ci) {
        return data.data() + (static_cast<size_t>(ni) * c + ci) * h * w;
    }
    const double* plane(int ni, int ci) const {
        return data.data() + (static_cast<size_t>(ni) * c + ci) * h * w;
    }

    std::string shape_str() const {
        return "[" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
               std::to_string(w) + "]";
    }

    void release() {
        data.clear();
        data.shrink_to_fit();
    }
};

/// Named model parameter with its gradient accumulator.
struct Param {
    std::string name;
    Tensor value;
    Tensor grad;

    void zero_grad() {
        if (!grad.same_shape(value)) grad = Tensor(value.n, value.c, value.h, value.w);
        std::fill(grad.data.begin(), grad.data.end(), 0.0);
    }

    /// Allocates the gradient buffer (zeroed) if missing, without clearing
    /// accumulated values.
    void ensure_grad() {
        if (!grad.same_shape(value)) grad = Tensor(value.n, value.c, value.h, value.w);
    }
};

} // namespace mangrove::nn

#endif
