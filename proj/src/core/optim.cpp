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

#include "salt/optim.hpp"

#include <cmath>

namespace salt {

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::SGD ? "SGD" : "Adam"; }

OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "SGD" || s == "sgd") return OptimizerKind::SGD;
    if (s == "Adam" || s == "adam") return OptimizerKind::Adam;
    throw ConfigError("unknown optimizer '" + s + "' (expected SGD or Adam)");
}

void OptimizerConfig::validate() const {
    if (!(lr > 0.0)) throw ConfigError("optimizer lr must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must be in [0, 1)");
    if (!(eps > 0.0)) throw ConfigError("optimizer eps must be > 0");
}

OptimizerState OptimizerState::create(const OptimizerConfig& config, std::size_t param_count) {
    OptimizerState s;
    s.config = config;
    if (config.kind == OptimizerKind::Adam) {
        s.m.assign(param_count, 0.0);
        s.v.assign(param_count, 0.0);
    }
    return s;
}

Vector sgd_step(std::span<const double> params, std::span<const double> grad, double lr) {
    require(params.size() == grad.size(), "sgd_step: length mismatch");
    Vector out(params.begin(), params.end());
    axpy(-lr, grad, out);
    return out;
}

std::pair<Vector, OptimizerState> adam_step(OptimizerState state, std::span<const double> params,
                                            std::span<const double> grad) {
    require(params.size() == grad.size(), "adam_step: length mismatch");
    require(state.m.size() == params.size() && state.v.size() == params.size(), "adam_step: state size mismatch");
    const auto& c = state.config;
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(c.beta1, t);
    const double bc2 = 1.0 - std::pow(c.beta2, t);
    Vector out(params.begin(), params.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grad[i];
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        out[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
    return {std::move(out), std::move(state)};
}

std::pair<Vector, OptimizerState> optimizer_step(OptimizerState state, std::span<const double> params,
                                                 std::span<const double> grad) {
    if (state.config.kind == OptimizerKind::Adam) return adam_step(std::move(state), params, grad);
    state.step += 1;
    Vector out = sgd_step(params, grad, state.config.lr);
    return {std::move(out), std::move(state)};
}

}  // namespace salt
