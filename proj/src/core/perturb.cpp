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

#include "salt/perturb.hpp"

#include <random>

namespace salt {

namespace {

// Rounding slack on the L2 boundary test. A projected vector's recomputed
// norm can exceed eps by a few ulps; without slack a second projection would
// rescale it again and idempotence would fail.
constexpr double kBoundarySlack = 1e-12;

bool outside_l2(double norm, double epsilon) { return norm > epsilon * (1.0 + kBoundarySlack); }

}  // namespace

std::string to_string(NormKind norm) { return norm == NormKind::L2 ? "L2" : "LInf"; }

std::string to_string(ProjectionMode mode) {
    return mode == ProjectionMode::ExactJacobian ? "ExactJacobian" : "StraightThrough";
}

NormKind norm_from_string(const std::string& s) {
    if (s == "L2" || s == "l2") return NormKind::L2;
    if (s == "LInf" || s == "linf" || s == "Linf") return NormKind::LInf;
    throw ConfigError("unknown norm '" + s + "' (expected L2 or LInf)");
}

ProjectionMode projection_mode_from_string(const std::string& s) {
    if (s == "ExactJacobian") return ProjectionMode::ExactJacobian;
    if (s == "StraightThrough") return ProjectionMode::StraightThrough;
    throw ConfigError("unknown proj_mode '" + s + "' (expected ExactJacobian or StraightThrough)");
}

void AdvConfig::validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
    if (!(sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
    if (k_steps < 0) throw ConfigError("k_steps must be >= 0");
    if (!(fd_radius_scale > 0.0)) throw ConfigError("fd_radius_scale must be > 0");
}

Perturbation sample_init(double sigma, std::size_t rows, std::size_t cols, std::uint64_t seed, NormKind norm) {
    require(sigma >= 0.0, "sigma must be >= 0");
    Perturbation p{Matrix(rows, cols), norm};
    if (sigma == 0.0) return p;
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (double& v : p.values.data) v = normal(gen);
    return p;
}

Vector project(std::span<const double> v, double epsilon, NormKind norm) {
    Vector out(v.begin(), v.end());
    if (norm == NormKind::L2) {
        const double n = norm2(v);
        if (outside_l2(n, epsilon)) {
            const double s = epsilon / n;
            for (double& x : out) x *= s;
        }
    } else {
        for (double& x : out) x = std::clamp(x, -epsilon, epsilon);
    }
    return out;
}

Matrix project_rows(const Matrix& v, double epsilon, NormKind norm) {
    Matrix out(v.rows, v.cols);
    for (std::size_t i = 0; i < v.rows; ++i) {
        const Vector r = project(v.row(i), epsilon, norm);
        std::copy(r.begin(), r.end(), out.row(i).begin());
    }
    return out;
}

Vector project_jvp(std::span<const double> v, std::span<const double> u, double epsilon, NormKind norm,
                   ProjectionMode mode) {
    require(v.size() == u.size(), "project_jvp: length mismatch");
    Vector out(u.begin(), u.end());
    if (mode == ProjectionMode::StraightThrough) return out;
    if (norm == NormKind::L2) {
        const double n = norm2(v);
        if (outside_l2(n, epsilon)) {
            // (eps/|v|) (u - v (v.u)/|v|^2)
            const double vu = dot(v, u);
            const double s = epsilon / n;
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * (u[i] - v[i] * vu / (n * n));
        }
    } else {
        for (std::size_t i = 0; i < out.size(); ++i)
            if (v[i] > epsilon || v[i] < -epsilon) out[i] = 0.0;
    }
    return out;
}

Matrix project_jvp_rows(const Matrix& v, const Matrix& u, double epsilon, NormKind norm, ProjectionMode mode) {
    require(v.same_shape(u), "project_jvp: shape mismatch");
    Matrix out(v.rows, v.cols);
    for (std::size_t i = 0; i < v.rows; ++i) {
        const Vector r = project_jvp(v.row(i), u.row(i), epsilon, norm, mode);
        std::copy(r.begin(), r.end(), out.row(i).begin());
    }
    return out;
}

StepResult follower_step(const InnerObjective& objective, std::span<const double> theta, const Matrix& delta_prev,
                         const AdvConfig& cfg) {
    require(delta_prev.rows == objective.rows() && delta_prev.cols == objective.cols(),
            "perturbation shape does not match objective");
    const Matrix g = objective.grad_delta(delta_prev, theta);
    Matrix pre = delta_prev;
    axpy(cfg.eta, g.data, pre.data);
    Perturbation next{project_rows(pre, cfg.epsilon, cfg.norm), cfg.norm};
    return {std::move(next), std::move(pre)};
}

StepResult pga_step(const ModelParams& params, const Matrix& x, const Perturbation& delta_prev, const AdvConfig& cfg,
                    RegularizerKind kind) {
    require(delta_prev.values.same_shape(x), "perturbation shape does not match inputs");
    const AdvRegObjective objective(params, x, kind, cfg.detach_clean);
    return follower_step(objective, params.values, delta_prev.values, cfg);
}

}  // namespace salt
