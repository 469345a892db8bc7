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

// Zero-sum baselines. VAT ascends the smoothness regularizer and then treats
// the perturbation as a constant in the leader gradient. The label-using
// "Adv" baseline ascends the task loss itself instead.

#pragma once

#include <cstdint>

#include "salt/optim.hpp"
#include "salt/perturb.hpp"

namespace salt {

struct StepStats {
    double clean_loss = 0.0;
    double reg_loss = 0.0;    // mean l_v at the final perturbation
    double delta_norm = 0.0;  // mean per-example norm of the final perturbation
    double interaction_ratio = 0.0;  // |interaction| / |leader|, SALT only
    bool degenerate = false;         // SALT: v ~ 0, interaction skipped
    double unroll_seconds = 0.0;
    double gradient_seconds = 0.0;
    double update_seconds = 0.0;
};

struct TrainStep {
    ModelParams params;
    OptimizerState optimizer;
    StepStats stats;
};

// Mean per-example norm (in cfg.norm) of a perturbation.
double mean_delta_norm(const Matrix& delta, NormKind norm);

// delta^0 ~ N(0, sigma^2) from `seed`, then K follower steps.
Perturbation vat_inner_maximize(const ModelParams& params, const Matrix& x, const AdvConfig& cfg,
                                RegularizerKind kind, std::uint64_t seed);

// d task_loss/d theta + alpha * d l_v(x, delta, theta)/d theta with delta frozen.
Vector vat_gradient(const ModelParams& params, const Batch& batch, const Perturbation& delta, const AdvConfig& cfg,
                    RegularizerKind kind);

// Like vat_inner_maximize, but each example ascends its own task loss
// l(f(x_i + delta_i), y_i).
Perturbation adv_inner_maximize(const ModelParams& params, const Batch& batch, const AdvConfig& cfg,
                                std::uint64_t seed);

// d task_loss(x)/d theta + alpha * d task_loss(x + delta)/d theta.
Vector adv_gradient(const ModelParams& params, const Batch& batch, const Perturbation& delta, const AdvConfig& cfg);

TrainStep vat_training_step(const ModelParams& params, const Batch& batch, const AdvConfig& cfg, RegularizerKind kind,
                            OptimizerState optimizer, std::uint64_t seed);
TrainStep adv_training_step(const ModelParams& params, const Batch& batch, const AdvConfig& cfg,
                            OptimizerState optimizer, std::uint64_t seed);
TrainStep erm_training_step(const ModelParams& params, const Batch& batch, OptimizerState optimizer);

}  // namespace salt
