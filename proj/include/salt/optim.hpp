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

// Leader optimizers. State is a value: every step takes the old state and
// returns the new one, so a run can be replayed from any snapshot.

#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "salt/tensor.hpp"

namespace salt {

enum class OptimizerKind { SGD, Adam };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(const std::string& s);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double lr = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.98;
    double eps = 1e-8;

    void validate() const;
    friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

struct OptimizerState {
    OptimizerConfig config;
    std::uint64_t step = 0;
    Vector m;  // first moment (Adam only)
    Vector v;  // second moment (Adam only)

    static OptimizerState create(const OptimizerConfig& config, std::size_t param_count);
    friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

// theta - lr * grad
Vector sgd_step(std::span<const double> params, std::span<const double> grad, double lr);

// Adam with bias correction.
std::pair<Vector, OptimizerState> adam_step(OptimizerState state, std::span<const double> params,
                                            std::span<const double> grad);

// Dispatches on state.config.kind.
std::pair<Vector, OptimizerState> optimizer_step(OptimizerState state, std::span<const double> params,
                                                 std::span<const double> grad);

}  // namespace salt
