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

// Randomized end-to-end check of the Stackelberg gradient on tiny models.
//
// Each instance draws a small MLP, a batch and an adversary config, rejects
// trajectories that pass near a projection kink (F is not differentiable
// there), and compares the reverse-mode gradient against central finite
// differences of F and against the forward Jacobian recursion.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "salt/perturb.hpp"

namespace salt {

struct GradcheckOptions {
    int k = -1;  // unroll depth; -1 cycles through 1, 2, 3
    std::uint64_t seed = 0;
    int instances = 20;
    double fd_step = 1e-5;
};

struct GradcheckInstance {
    int index = 0;
    int k = 0;
    NormKind norm = NormKind::L2;
    std::size_t batch = 0;
    std::size_t input_dim = 0;
    std::size_t hidden = 0;
    std::size_t outputs = 0;
    std::size_t param_count = 0;
    int resamples = 0;             // kink-adjacent draws rejected before this one
    double total_error = 0.0;      // |total - fd| / |fd|
    double leader_only_error = 0.0;  // same, ignoring the interaction term
    double interaction_ratio = 0.0;  // |interaction| / |leader|
    double mode_error_exact = 0.0;   // forward oracle vs adjoint, exact second derivatives
    double mode_error_fd = 0.0;      // forward oracle vs adjoint, finite-difference HVPs
};

struct GradcheckReport {
    std::vector<GradcheckInstance> rows;
    double max_total_error = 0.0;
    double max_mode_error_exact = 0.0;
    double max_mode_error_fd = 0.0;
};

inline constexpr double kGradcheckTolerance = 1e-4;
inline constexpr double kModeExactTolerance = 1e-8;
inline constexpr double kModeFdTolerance = 1e-3;

GradcheckReport run_gradcheck(const GradcheckOptions& options);

bool gradcheck_passed(const GradcheckReport& report);

// Fixed-precision table; identical for identical options.
std::string format_gradcheck(const GradcheckReport& report);

}  // namespace salt
