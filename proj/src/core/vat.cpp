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

#include "salt/vat.hpp"

#include <chrono>

namespace salt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Matrix shifted(const Matrix& x, const Matrix& delta) {
    Matrix out = x;
    axpy(1.0, delta.data, out.data);
    return out;
}

TrainStep finish_step(const ModelParams& params, const Vector& grad, OptimizerState optimizer, StepStats stats) {
    const auto t0 = Clock::now();
    auto [values, next] = optimizer_step(std::move(optimizer), params.values, grad);
    stats.update_seconds = seconds_since(t0);
    return {ModelParams{std::move(values), params.shapes}, std::move(next), stats};
}

}  // namespace

double mean_delta_norm(const Matrix& delta, NormKind norm) {
    if (delta.rows == 0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < delta.rows; ++i) s += norm == NormKind::L2 ? norm2(delta.row(i)) : norm_inf(delta.row(i));
    return s / static_cast<double>(delta.rows);
}

Perturbation vat_inner_maximize(const ModelParams& params, const Matrix& x, const AdvConfig& cfg,
                                RegularizerKind kind, std::uint64_t seed) {
    require(cfg.k_steps >= 0, "k_steps must be >= 0");
    Perturbation delta = sample_init(cfg.sigma, x.rows, x.cols, seed, cfg.norm);
    for (int k = 0; k < cfg.k_steps; ++k) delta = pga_step(params, x, delta, cfg, kind).next;
    return delta;
}

Vector vat_gradient(const ModelParams& params, const Batch& batch, const Perturbation& delta, const AdvConfig& cfg,
                    RegularizerKind kind) {
    Vector g = grad_params(params, batch);
    if (cfg.alpha != 0.0) {
        const Vector r = adv_reg_grad_params(params, batch.inputs, delta.values, kind, cfg.detach_clean);
        axpy(cfg.alpha, r, g);
    }
    return g;
}

Perturbation adv_inner_maximize(const ModelParams& params, const Batch& batch, const AdvConfig& cfg,
                                std::uint64_t seed) {
    require(cfg.k_steps >= 0, "k_steps must be >= 0");
    const Matrix& x = batch.inputs;
    Perturbation delta = sample_init(cfg.sigma, x.rows, x.cols, seed, cfg.norm);
    const InputObjective objective{InputObjectiveKind::TaskLoss, &batch.targets, nullptr};
    // grad_input returns the batch-mean gradient; scale back to per-example.
    const double n = static_cast<double>(x.rows);
    for (int k = 0; k < cfg.k_steps; ++k) {
        const Matrix g = grad_input(params, shifted(x, delta.values), objective);
        Matrix pre = delta.values;
        axpy(cfg.eta * n, g.data, pre.data);
        delta.values = project_rows(pre, cfg.epsilon, cfg.norm);
    }
    return delta;
}

Vector adv_gradient(const ModelParams& params, const Batch& batch, const Perturbation& delta, const AdvConfig& cfg) {
    Vector g = grad_params(params, batch);
    if (cfg.alpha != 0.0) {
        const Batch perturbed{shifted(batch.inputs, delta.values), batch.targets};
        axpy(cfg.alpha, grad_params(params, perturbed), g);
    }
    return g;
}

TrainStep vat_training_step(const ModelParams& params, const Batch& batch, const AdvConfig& cfg, RegularizerKind kind,
                            OptimizerState optimizer, std::uint64_t seed) {
    StepStats stats;
    auto t0 = Clock::now();
    const Perturbation delta = vat_inner_maximize(params, batch.inputs, cfg, kind, seed);
    stats.unroll_seconds = seconds_since(t0);
    t0 = Clock::now();
    const Vector g = vat_gradient(params, batch, delta, cfg, kind);
    stats.gradient_seconds = seconds_since(t0);
    stats.clean_loss = task_loss(mlp_forward(params, batch.inputs), batch.targets);
    stats.reg_loss = adv_reg_loss(params, batch.inputs, delta.values, kind);
    stats.delta_norm = mean_delta_norm(delta.values, cfg.norm);
    return finish_step(params, g, std::move(optimizer), stats);
}

TrainStep adv_training_step(const ModelParams& params, const Batch& batch, const AdvConfig& cfg,
                            OptimizerState optimizer, std::uint64_t seed) {
    StepStats stats;
    auto t0 = Clock::now();
    const Perturbation delta = adv_inner_maximize(params, batch, cfg, seed);
    stats.unroll_seconds = seconds_since(t0);
    t0 = Clock::now();
    const Vector g = adv_gradient(params, batch, delta, cfg);
    stats.gradient_seconds = seconds_since(t0);
    stats.clean_loss = task_loss(mlp_forward(params, batch.inputs), batch.targets);
    stats.reg_loss = task_loss(mlp_forward(params, shifted(batch.inputs, delta.values)), batch.targets);
    stats.delta_norm = mean_delta_norm(delta.values, cfg.norm);
    return finish_step(params, g, std::move(optimizer), stats);
}

TrainStep erm_training_step(const ModelParams& params, const Batch& batch, OptimizerState optimizer) {
    StepStats stats;
    const auto t0 = Clock::now();
    const Vector g = grad_params(params, batch);
    stats.gradient_seconds = seconds_since(t0);
    stats.clean_loss = task_loss(mlp_forward(params, batch.inputs), batch.targets);
    return finish_step(params, g, std::move(optimizer), stats);
}

}  // namespace salt
