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

// Perturbation lifecycle: Gaussian start, norm-ball projection and its
// Jacobian-vector product, and one projected-gradient-ascent follower step.

#pragma once

#include <cstdint>
#include <string>

#include "salt/inner_objective.hpp"

namespace salt {

enum class NormKind { L2, LInf };
enum class ProjectionMode { ExactJacobian, StraightThrough };

std::string to_string(NormKind norm);
std::string to_string(ProjectionMode mode);
NormKind norm_from_string(const std::string& s);
ProjectionMode projection_mode_from_string(const std::string& s);

struct AdvConfig {
    double alpha = 1.0;      // regularization weight
    double epsilon = 1.0;    // ball radius
    double eta = 1e-3;       // follower step size
    double sigma = 1e-4;     // std of the Gaussian start
    int k_steps = 2;         // unroll depth K
    NormKind norm = NormKind::L2;
    ProjectionMode proj_mode = ProjectionMode::ExactJacobian;
    double fd_radius_scale = 1e-4;
    bool detach_clean = false;

    void validate() const;
};

struct Perturbation {
    Matrix values;  // n x d, one row per example
    NormKind norm = NormKind::L2;
};

Perturbation sample_init(double sigma, std::size_t rows, std::size_t cols, std::uint64_t seed, NormKind norm = NormKind::L2);

// Projection of a single example's perturbation onto the eps-ball.
Vector project(std::span<const double> v, double epsilon, NormKind norm);
// Row-wise projection; each row is one example.
Matrix project_rows(const Matrix& v, double epsilon, NormKind norm);

// Jacobian of `project` at v applied to u. The projection Jacobian is
// symmetric, so this is also the transposed product used on the reverse pass.
Vector project_jvp(std::span<const double> v, std::span<const double> u, double epsilon, NormKind norm,
                   ProjectionMode mode);
Matrix project_jvp_rows(const Matrix& v, const Matrix& u, double epsilon, NormKind norm, ProjectionMode mode);

struct StepResult {
    Perturbation next;
    Matrix pre_projection;  // delta_prev + eta * grad, before projection
};

// One follower update delta <- Pi(delta + eta * d g / d delta) for an
// arbitrary inner objective.
StepResult follower_step(const InnerObjective& objective, std::span<const double> theta, const Matrix& delta_prev,
                         const AdvConfig& cfg);

// follower_step on the adversarial regularizer. Each example ascends its own
// l_v(x_i, delta_i, theta), so the step does not depend on batch size.
StepResult pga_step(const ModelParams& params, const Matrix& x, const Perturbation& delta_prev, const AdvConfig& cfg,
                    RegularizerKind kind);

}  // namespace salt
