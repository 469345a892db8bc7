// Copyright 2026 The SALT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Scalar-generic MLP forward/backward. Instantiated with double for the
// production path and with Dual for exact second-order directional
// derivatives. Internal to the core library.

#pragma once

#include <cmath>
#include <vector>

#include "salt/diffmodel.hpp"
#include "salt/dual.hpp"

namespace salt::kernel {

using std::exp;
using std::log;
using std::tanh;

struct Layout {
    std::vector<std::size_t> sizes;  // widths, input first
    std::vector<std::size_t> w_off;
    std::vector<std::size_t> b_off;
    std::size_t param_count = 0;

    std::size_t layers() const { return sizes.size() - 1; }
    std::size_t in() const { return sizes.front(); }
    std::size_t out() const { return sizes.back(); }
};

inline Layout make_layout(const ModelParams& params) {
    params.validate();
    Layout l;
    l.sizes = params.layer_sizes();
    std::size_t off = 0;
    for (std::size_t i = 0; i + 1 < l.sizes.size(); ++i) {
        l.w_off.push_back(off);
        off += l.sizes[i] * l.sizes[i + 1];
        l.b_off.push_back(off);
        off += l.sizes[i + 1];
    }
    l.param_count = off;
    return l;
}

// h[0] is the input, h[l] for 0 < l < L is tanh-activated, h[L] is the
// linear output.
template <class T>
struct Activations {
    std::size_t n = 0;
    std::vector<std::vector<T>> h;
};

template <class T, class X>
Activations<T> forward(const Layout& lay, const T* theta, const X* inputs, std::size_t n) {
    Activations<T> a;
    a.n = n;
    a.h.resize(lay.sizes.size());
    a.h[0].assign(inputs, inputs + n * lay.in());
    for (std::size_t l = 0; l < lay.layers(); ++l) {
        const std::size_t din = lay.sizes[l];
        const std::size_t dout = lay.sizes[l + 1];
        const T* w = theta + lay.w_off[l];
        const T* b = theta + lay.b_off[l];
        const bool hidden = l + 1 < lay.layers();
        std::vector<T>& next = a.h[l + 1];
        next.assign(n * dout, T(0.0));
        const std::vector<T>& prev = a.h[l];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t o = 0; o < dout; ++o) {
                T z = b[o];
                for (std::size_t k = 0; k < din; ++k) z += w[o * din + k] * prev[i * din + k];
                next[i * dout + o] = hidden ? tanh(z) : z;
            }
        }
    }
    return a;
}

// Reverse sweep for a given output cotangent (n x out). Accumulates into
// grad_theta and/or writes grad_input when the pointers are non-null.
template <class T>
void backward(const Layout& lay, const T* theta, const Activations<T>& a, std::vector<T> g,
              T* grad_theta, T* grad_input) {
    const std::size_t n = a.n;
    for (std::size_t l = lay.layers(); l-- > 0;) {
        const std::size_t din = lay.sizes[l];
        const std::size_t dout = lay.sizes[l + 1];
        const T* w = theta + lay.w_off[l];
        const std::vector<T>& prev = a.h[l];
        if (grad_theta != nullptr) {
            T* gw = grad_theta + lay.w_off[l];
            T* gb = grad_theta + lay.b_off[l];
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t o = 0; o < dout; ++o) {
                    const T go = g[i * dout + o];
                    gb[o] += go;
                    for (std::size_t k = 0; k < din; ++k) gw[o * din + k] += go * prev[i * din + k];
                }
            }
        }
        if (l == 0 && grad_input == nullptr) break;
        std::vector<T> gh(n * din, T(0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t o = 0; o < dout; ++o) {
                const T go = g[i * dout + o];
                for (std::size_t k = 0; k < din; ++k) gh[i * din + k] += go * w[o * din + k];
            }
        if (l == 0) {
            for (std::size_t j = 0; j < gh.size(); ++j) grad_input[j] = gh[j];
            break;
        }
        // prev = tanh(z): d tanh = 1 - tanh^2
        for (std::size_t j = 0; j < gh.size(); ++j) gh[j] = gh[j] * (T(1.0) - prev[j] * prev[j]);
        g = std::move(gh);
    }
}

template <class T>
void softmax_row(const T* z, std::size_t c, T* out) {
    double mx = value_of(z[0]);
    for (std::size_t k = 1; k < c; ++k) mx = std::max(mx, value_of(z[k]));
    T sum(0.0);
    for (std::size_t k = 0; k < c; ++k) {
        out[k] = exp(z[k] - T(mx));
        sum += out[k];
    }
    for (std::size_t k = 0; k < c; ++k) out[k] = out[k] / sum;
}

template <class T>
void log_softmax_row(const T* z, std::size_t c, T* out) {
    double mx = value_of(z[0]);
    for (std::size_t k = 1; k < c; ++k) mx = std::max(mx, value_of(z[k]));
    T sum(0.0);
    for (std::size_t k = 0; k < c; ++k) sum += exp(z[k] - T(mx));
    const T lse = T(mx) + log(sum);
    for (std::size_t k = 0; k < c; ++k) out[k] = z[k] - lse;
}

// Probabilities below this are treated as exact zeros in KL terms.
inline constexpr double kKlZero = 1e-300;

template <class T>
struct RegEval {
    T value{0.0};               // sum over examples (not mean)
    std::vector<T> grad_delta;  // n x d, empty if not requested
    std::vector<T> grad_theta;  // P, empty if not requested
};

template <class T>
std::vector<T> strip_tangent(const T* theta, std::size_t p) {
    std::vector<T> out(p);
    for (std::size_t i = 0; i < p; ++i) out[i] = T(value_of(theta[i]));
    return out;
}

// Sum over examples of l_v(x_i, delta_i, theta). With detach_clean the clean
// branch f(x, theta) is held constant in theta.
template <class T>
RegEval<T> regularizer_sum(const Layout& lay, const T* theta, const Matrix& x, const T* delta,
                           bool squared, bool detach_clean, bool want_delta, bool want_theta) {
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;
    const std::size_t c = lay.out();

    std::vector<T> clean_theta_storage;
    const T* clean_theta = theta;
    if (detach_clean) {
        clean_theta_storage = strip_tangent(theta, lay.param_count);
        clean_theta = clean_theta_storage.data();
    }
    std::vector<T> xp(n * d);
    for (std::size_t j = 0; j < n * d; ++j) xp[j] = T(x.data[j]) + delta[j];

    const Activations<T> ac = forward<T>(lay, clean_theta, x.data.data(), n);
    const Activations<T> ap = forward<T>(lay, theta, xp.data(), n);
    const std::vector<T>& zc = ac.h.back();
    const std::vector<T>& zp = ap.h.back();

    RegEval<T> r;
    std::vector<T> gc(n * c, T(0.0));
    std::vector<T> gp(n * c, T(0.0));
    if (squared) {
        for (std::size_t i = 0; i < n; ++i) {
            const T diff = zc[i] - zp[i];
            r.value += diff * diff;
            gc[i] = T(2.0) * diff;
            gp[i] = T(-2.0) * diff;
        }
    } else {
        std::vector<T> p(c), q(c), logp(c), logq(c);
        for (std::size_t i = 0; i < n; ++i) {
            softmax_row(&zc[i * c], c, p.data());
            softmax_row(&zp[i * c], c, q.data());
            log_softmax_row(&zc[i * c], c, logp.data());
            log_softmax_row(&zp[i * c], c, logq.data());
            T kl(0.0);
            for (std::size_t k = 0; k < c; ++k)
                if (value_of(p[k]) >= kKlZero) kl += p[k] * (logp[k] - logq[k]);
            r.value += kl;
            for (std::size_t k = 0; k < c; ++k) {
                gp[i * c + k] = q[k] - p[k];
                const T term = value_of(p[k]) >= kKlZero ? p[k] * (logp[k] - logq[k] - kl) : T(0.0);
                gc[i * c + k] = term;
            }
        }
    }
    if (want_delta) r.grad_delta.assign(n * d, T(0.0));
    if (want_theta) r.grad_theta.assign(lay.param_count, T(0.0));
    backward<T>(lay, theta, ap, std::move(gp), want_theta ? r.grad_theta.data() : nullptr,
                want_delta ? r.grad_delta.data() : nullptr);
    if (want_theta && !detach_clean) backward<T>(lay, clean_theta, ac, std::move(gc), r.grad_theta.data(), nullptr);
    return r;
}

}  // namespace salt::kernel
