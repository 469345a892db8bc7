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

#pragma once

#include <memory>
#include <utility>

#include "salt/diffmodel.hpp"
#include "salt/regularizers.hpp"

namespace salt {

// Tangent of (grad_delta, grad_params) along a direction (delta_dot, theta_dot).
struct GradTangent {
    Matrix grad_delta;
    Vector grad_params;
};

// The follower's objective g(delta, theta), summed over examples. Each row of
// delta belongs to one example and rows do not interact, so grad_delta row i
// is the per-example gradient the follower ascends. The leader sees
// mean_weight() * g, i.e. the batch mean.
class InnerObjective {
public:
    virtual ~InnerObjective() = default;

    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;
    virtual std::size_t param_count() const = 0;
    virtual double mean_weight() const { return 1.0 / static_cast<double>(rows()); }

    virtual double value(const Matrix& delta, std::span<const double> theta) const = 0;
    virtual Matrix grad_delta(const Matrix& delta, std::span<const double> theta) const = 0;
    virtual Vector grad_params(const Matrix& delta, std::span<const double> theta) const = 0;

    // Both gradients; overridden when a single pass can produce them.
    virtual std::pair<Matrix, Vector> grads(const Matrix& delta, std::span<const double> theta) const {
        return {grad_delta(delta, theta), grad_params(delta, theta)};
    }

    virtual bool has_exact_second_order() const { return false; }
    // Exact directional derivative of both gradients. Only valid when
    // has_exact_second_order() is true.
    virtual GradTangent second_order(const Matrix& delta, std::span<const double> theta, const Matrix& delta_dot,
                                     std::span<const double> theta_dot) const;
};

// Production objective: sum_i l_v(x_i, delta_i, theta) for a fixed batch x.
// Second-order tangents come from dual-number backpropagation.
class AdvRegObjective final : public InnerObjective {
public:
    AdvRegObjective(std::vector<LayerShape> shapes, Matrix x, RegularizerKind kind, bool detach_clean = false);
    AdvRegObjective(const ModelParams& params, Matrix x, RegularizerKind kind, bool detach_clean = false);

    std::size_t rows() const override { return x_.rows; }
    std::size_t cols() const override { return x_.cols; }
    std::size_t param_count() const override { return param_count_; }

    double value(const Matrix& delta, std::span<const double> theta) const override;
    Matrix grad_delta(const Matrix& delta, std::span<const double> theta) const override;
    Vector grad_params(const Matrix& delta, std::span<const double> theta) const override;
    std::pair<Matrix, Vector> grads(const Matrix& delta, std::span<const double> theta) const override;

    bool has_exact_second_order() const override { return true; }
    GradTangent second_order(const Matrix& delta, std::span<const double> theta, const Matrix& delta_dot,
                             std::span<const double> theta_dot) const override;

    const Matrix& inputs() const { return x_; }
    RegularizerKind kind() const { return kind_; }

private:
    ModelParams bind(std::span<const double> theta) const;

    std::vector<LayerShape> shapes_;
    Matrix x_;
    RegularizerKind kind_;
    bool detach_clean_;
    std::size_t param_count_;
};

// g(delta, theta) = 1/2 vec(delta)^T A vec(delta) + theta^T B vec(delta),
// A symmetric (D x D), B (P x D). Single-example by default (mean weight 1).
// Used to check the unroller against closed forms.
class QuadraticObjective final : public InnerObjective {
public:
    QuadraticObjective(Matrix a, Matrix b, std::size_t rows, std::size_t cols);

    std::size_t rows() const override { return rows_; }
    std::size_t cols() const override { return cols_; }
    std::size_t param_count() const override { return b_.rows; }
    double mean_weight() const override { return 1.0; }

    double value(const Matrix& delta, std::span<const double> theta) const override;
    Matrix grad_delta(const Matrix& delta, std::span<const double> theta) const override;
    Vector grad_params(const Matrix& delta, std::span<const double> theta) const override;

    bool has_exact_second_order() const override { return true; }
    GradTangent second_order(const Matrix& delta, std::span<const double> theta, const Matrix& delta_dot,
                             std::span<const double> theta_dot) const override;

    const Matrix& a() const { return a_; }
    const Matrix& b() const { return b_; }

private:
    Matrix a_;
    Matrix b_;
    std::size_t rows_;
    std::size_t cols_;
};

}  // namespace salt
