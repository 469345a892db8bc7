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

// Adversarial smoothness regularizer l_v(x, delta, theta):
//   KL(f(x, theta) || f(x + delta, theta))   for classification heads
//   (f(x, theta) - f(x + delta, theta))^2    for scalar regression heads
// All batch-level values are the arithmetic mean over examples.

#pragma once

#include "salt/diffmodel.hpp"

namespace salt {

enum class RegularizerKind { KLDivergence, SquaredDifference };

// Picks the regularizer that matches the model head.
RegularizerKind regularizer_for(HeadKind head);

// Throws ContractError if `kind` is incompatible with the head of `params`.
void check_regularizer(const ModelParams& params, RegularizerKind kind);

// KL(p || q) with 0 log 0 = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

double adv_reg_loss(const ModelParams& params, const Matrix& x, const Matrix& delta, RegularizerKind kind);

Matrix adv_reg_grad_delta(const ModelParams& params, const Matrix& x, const Matrix& delta, RegularizerKind kind);

// Gradient in theta with delta held fixed. Flows through both the clean and
// the perturbed branch unless detach_clean is set.
Vector adv_reg_grad_params(const ModelParams& params, const Matrix& x, const Matrix& delta, RegularizerKind kind,
                           bool detach_clean = false);

}  // namespace salt
