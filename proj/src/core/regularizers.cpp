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

#include "salt/regularizers.hpp"

#include "salt/inner_objective.hpp"

#include "mlp_kernel.hpp"

namespace salt {

RegularizerKind regularizer_for(HeadKind head) {
    return head == HeadKind::Regression ? RegularizerKind::SquaredDifference : RegularizerKind::KLDivergence;
}

void check_regularizer(const ModelParams& params, RegularizerKind kind) {
    require(regularizer_for(params.head()) == kind,
            kind == RegularizerKind::KLDivergence ? "KL regularizer requires a classification head"
                                                  : "squared regularizer requires a scalar regression head");
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    require(p.size() == q.size(), "kl_divergence: dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] < kernel::kKlZero) continue;
        s += p[k] * (std::log(p[k]) - std::log(q[k]));
    }
    return s;
}

namespace {

void check_args(const ModelParams& params, const Matrix& x, const Matrix& delta, RegularizerKind kind) {
    check_regularizer(params, kind);
    require(x.rows >= 1, "regularizer needs at least one example");
    require(x.cols == params.input_dim(), "input width does not match model");
    require(delta.same_shape(x), "perturbation shape does not match inputs");
}

}  // namespace

double adv_reg_loss(const ModelParams& params, const Matrix& x, const Matrix& delta, RegularizerKind kind) {
    check_args(params, x, delta, kind);
    const auto lay = kernel::make_layout(params);
    auto r = kernel::regularizer_sum<double>(lay, params.values.data(), x, delta.data.data(),
                                             kind == RegularizerKind::SquaredDifference, false, false, false);
    return r.value / static_cast<double>(x.rows);
}

Matrix adv_reg_grad_delta(const ModelParams& params, const Matrix& x, const Matrix& delta, RegularizerKind kind) {
    check_args(params, x, delta, kind);
    const auto lay = kernel::make_layout(params);
    auto r = kernel::regularizer_sum<double>(lay, params.values.data(), x, delta.data.data(),
                                             kind == RegularizerKind::SquaredDifference, false, true, false);
    Matrix g(x.rows, x.cols, std::move(r.grad_delta));
    for (double& v : g.data) v /= static_cast<double>(x.rows);
    return g;
}

Vector adv_reg_grad_params(const ModelParams& params, const Matrix& x, const Matrix& delta, RegularizerKind kind,
                           bool detach_clean) {
    check_args(params, x, delta, kind);
    const auto lay = kernel::make_layout(params);
    auto r = kernel::regularizer_sum<double>(lay, params.values.data(), x, delta.data.data(),
                                             kind == RegularizerKind::SquaredDifference, detach_clean, false, true);
    for (double& v : r.grad_theta) v /= static_cast<double>(x.rows);
    return r.grad_theta;
}

// ---------------------------------------------------------------------------
// InnerObjective implementations

GradTangent InnerObjective::second_order(const Matrix&, std::span<const double>, const Matrix&,
                                         std::span<const double>) const {
    throw ContractError("objective does not provide exact second derivatives");
}

AdvRegObjective::AdvRegObjective(std::vector<LayerShape> shapes, Matrix x, RegularizerKind kind, bool detach_clean)
    : shapes_(std::move(shapes)), x_(std::move(x)), kind_(kind), detach_clean_(detach_clean), param_count_(0) {
    for (const auto& s : shapes_) param_count_ += s.rows * s.cols;
    ModelParams probe{Vector(param_count_, 0.0), shapes_};
    Matrix zero(x_.rows, x_.cols);
    check_args(probe, x_, zero, kind_);
}

AdvRegObjective::AdvRegObjective(const ModelParams& params, Matrix x, RegularizerKind kind, bool detach_clean)
    : AdvRegObjective(params.shapes, std::move(x), kind, detach_clean) {}

ModelParams AdvRegObjective::bind(std::span<const double> theta) const {
    require(theta.size() == param_count_, "parameter vector length does not match objective");
    return ModelParams{Vector(theta.begin(), theta.end()), shapes_};
}

double AdvRegObjective::value(const Matrix& delta, std::span<const double> theta) const {
    require(delta.same_shape(x_), "perturbation shape does not match inputs");
    const auto lay = kernel::make_layout(bind(theta));
    return kernel::regularizer_sum<double>(lay, theta.data(), x_, delta.data.data(),
                                           kind_ == RegularizerKind::SquaredDifference, detach_clean_, false, false)
        .value;
}

Matrix AdvRegObjective::grad_delta(const Matrix& delta, std::span<const double> theta) const {
    require(delta.same_shape(x_), "perturbation shape does not match inputs");
    const auto lay = kernel::make_layout(bind(theta));
    auto r = kernel::regularizer_sum<double>(lay, theta.data(), x_, delta.data.data(),
                                             kind_ == RegularizerKind::SquaredDifference, detach_clean_, true, false);
    return Matrix(x_.rows, x_.cols, std::move(r.grad_delta));
}

Vector AdvRegObjective::grad_params(const Matrix& delta, std::span<const double> theta) const {
    require(delta.same_shape(x_), "perturbation shape does not match inputs");
    const auto lay = kernel::make_layout(bind(theta));
    return kernel::regularizer_sum<double>(lay, theta.data(), x_, delta.data.data(),
                                           kind_ == RegularizerKind::SquaredDifference, detach_clean_, false, true)
        .grad_theta;
}

std::pair<Matrix, Vector> AdvRegObjective::grads(const Matrix& delta, std::span<const double> theta) const {
    require(delta.same_shape(x_), "perturbation shape does not match inputs");
    const auto lay = kernel::make_layout(bind(theta));
    auto r = kernel::regularizer_sum<double>(lay, theta.data(), x_, delta.data.data(),
                                             kind_ == RegularizerKind::SquaredDifference, detach_clean_, true, true);
    return {Matrix(x_.rows, x_.cols, std::move(r.grad_delta)), std::move(r.grad_theta)};
}

GradTangent AdvRegObjective::second_order(const Matrix& delta, std::span<const double> theta,
                                          const Matrix& delta_dot, std::span<const double> theta_dot) const {
    require(delta.same_shape(x_) && delta_dot.same_shape(x_), "perturbation shape does not match inputs");
    require(theta_dot.size() == param_count_, "theta tangent length mismatch");
    const auto lay = kernel::make_layout(bind(theta));
    std::vector<Dual> th(param_count_);
    for (std::size_t i = 0; i < param_count_; ++i) th[i] = Dual(theta[i], theta_dot[i]);
    std::vector<Dual> dl(delta.size());
    for (std::size_t i = 0; i < dl.size(); ++i) dl[i] = Dual(delta.data[i], delta_dot.data[i]);
    auto r = kernel::regularizer_sum<Dual>(lay, th.data(), x_, dl.data(), kind_ == RegularizerKind::SquaredDifference,
                                           detach_clean_, true, true);
    GradTangent t{Matrix(x_.rows, x_.cols), Vector(param_count_)};
    for (std::size_t i = 0; i < t.grad_delta.size(); ++i) t.grad_delta.data[i] = r.grad_delta[i].d;
    for (std::size_t i = 0; i < param_count_; ++i) t.grad_params[i] = r.grad_theta[i].d;
    return t;
}

QuadraticObjective::QuadraticObjective(Matrix a, Matrix b, std::size_t rows, std::size_t cols)
    : a_(std::move(a)), b_(std::move(b)), rows_(rows), cols_(cols) {
    const std::size_t d = rows * cols;
    require(a_.rows == d && a_.cols == d, "A must be D x D");
    require(b_.cols == d, "B must be P x D");
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < i; ++j) require(a_(i, j) == a_(j, i), "A must be symmetric");
}

double QuadraticObjective::value(const Matrix& delta, std::span<const double> theta) const {
    const Matrix g = grad_delta(delta, theta);
    // 1/2 d^T A d + theta^T B d = d^T (A d / 2 + B^T theta)
    double s = 0.0;
    const std::size_t d = a_.rows;
    for (std::size_t i = 0; i < d; ++i) {
        double ad = 0.0;
        for (std::size_t j = 0; j < d; ++j) ad += a_(i, j) * delta.data[j];
        s += delta.data[i] * (g.data[i] - 0.5 * ad);
    }
    return s;
}

Matrix QuadraticObjective::grad_delta(const Matrix& delta, std::span<const double> theta) const {
    require(delta.rows == rows_ && delta.cols == cols_, "perturbation shape mismatch");
    require(theta.size() == b_.rows, "parameter length mismatch");
    const std::size_t d = a_.rows;
    Matrix g(rows_, cols_);
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += a_(i, j) * delta.data[j];
        for (std::size_t p = 0; p < b_.rows; ++p) s += b_(p, i) * theta[p];
        g.data[i] = s;
    }
    return g;
}

Vector QuadraticObjective::grad_params(const Matrix& delta, std::span<const double> theta) const {
    require(delta.rows == rows_ && delta.cols == cols_, "perturbation shape mismatch");
    require(theta.size() == b_.rows, "parameter length mismatch");
    Vector g(b_.rows, 0.0);
    for (std::size_t p = 0; p < b_.rows; ++p) g[p] = dot(b_.row(p), delta.data);
    return g;
}

GradTangent QuadraticObjective::second_order(const Matrix&, std::span<const double> theta, const Matrix& delta_dot,
                                             std::span<const double> theta_dot) const {
    // Both gradients are affine, so the tangent is the linear part applied to
    // the direction.
    return {grad_delta(delta_dot, theta_dot), grad_params(delta_dot, theta)};
}

}  // namespace salt
