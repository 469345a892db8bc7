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

// Stackelberg gradient through an unrolled follower.
//
// The follower runs K projected-gradient-ascent steps from a fixed Gaussian
// start, delta^K(theta) = U^K o ... o U^1(delta^0). The leader minimizes
//
//   F(theta) = L(theta) + alpha * mean_i l_v(x_i, delta_i^K(theta), theta)
//
// and its total derivative splits into the leader bracket (the VAT gradient
// at delta^K) and the interaction term alpha * v^T d delta^K / d theta with
// v = d l_v / d delta^K.
//
// The production path contracts v through the unroll in reverse, so each
// step costs two finite-difference Hessian-vector products (two gradient
// evaluations each) instead of materializing the D x P Jacobian.
// jacobian_forward_oracle keeps the literal forward recursion for tests.

#pragma once

#include <cstdint>
#include <functional>

#include "salt/vat.hpp"

namespace salt {

struct UnrollTape {
    std::vector<Matrix> deltas;           // delta^0 .. delta^K
    std::vector<Matrix> pre_projections;  // K entries, input to Pi at each step
    AdvConfig cfg;
    std::uint64_t seed = 0;
    std::size_t param_count = 0;
    std::uint64_t params_fingerprint = 0;

    int steps() const { return static_cast<int>(pre_projections.size()); }
    const Matrix& final_delta() const { return deltas.back(); }
};

struct StackelbergGrad {
    Vector total;
    Vector leader_part;
    Vector interaction_part;
};

// How the adjoint obtains second derivatives of the inner objective.
enum class SecondOrderSource { FiniteDifference, Exact };

// FNV-1a over the bytes of theta; ties a tape to the parameters it was built at.
std::uint64_t fingerprint(std::span<const double> theta);

// Runs K follower steps from delta0 and records the trajectory.
UnrollTape unroll_from(std::span<const double> theta, const Matrix& delta0, const AdvConfig& cfg,
                       const InnerObjective& objective, std::uint64_t seed = 0);

// Samples delta^0 from `seed` (same stream as vat_inner_maximize) and unrolls.
UnrollTape unroll_forward(std::span<const double> theta, const AdvConfig& cfg, const InnerObjective& objective,
                          std::uint64_t seed);

using GradFn = std::function<Vector(std::span<const double>)>;

// Central-difference Hessian-vector product of the function whose gradient is
// grad_fn. Exactly two grad_fn calls. When v == 0 there are no calls and the
// result is a zero vector of output_size entries (default: point.size()).
Vector hvp_fd(const GradFn& grad_fn, std::span<const double> point, std::span<const double> v,
              double fd_radius_scale, std::size_t output_size = 0);

// alpha * v^T d delta^K / d theta by reverse accumulation over the tape.
// Sets *degenerate (when non-null) if |v| < 1e-14, in which case the
// result is zero.
Vector interaction_adjoint(const UnrollTape& tape, std::span<const double> theta, const InnerObjective& objective,
                           const AdvConfig& cfg, SecondOrderSource source = SecondOrderSource::FiniteDifference,
                           bool* degenerate = nullptr);

// Full Jacobian d delta^K / d theta ((n*d) x P) by the forward recursion
//   J^k = J^{k-1} + dDelta/dtheta + dDelta/ddelta * J^{k-1}.
// Test oracle only; refuses when (n*d) * P > 1e6.
Matrix jacobian_forward_oracle(const UnrollTape& tape, std::span<const double> theta, const InnerObjective& objective,
                               const AdvConfig& cfg);

struct StackelbergResult {
    StackelbergGrad grad;
    UnrollTape tape;
    bool degenerate = false;
};

StackelbergResult stackelberg_gradient(const ModelParams& params, const Batch& batch, const AdvConfig& cfg,
                                       RegularizerKind kind, std::uint64_t seed,
                                       SecondOrderSource source = SecondOrderSource::FiniteDifference);

// F(theta) with delta^0 drawn from `seed`; used by finite-difference checks.
double stackelberg_objective(const ModelParams& params, const Batch& batch, const AdvConfig& cfg, RegularizerKind kind,
                             std::uint64_t seed);

TrainStep salt_training_step(const ModelParams& params, const Batch& batch, const AdvConfig& cfg,
                             RegularizerKind kind, OptimizerState optimizer, std::uint64_t seed);

}  // namespace salt
