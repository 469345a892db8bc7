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

#include "salt/salt.hpp"

#include <chrono>
#include <cstring>

namespace salt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Below this |v| the follower sits at the stationary origin.
constexpr double kDegenerateNorm = 1e-14;

constexpr double kOracleMaxEntries = 1e6;

void check_tape(const UnrollTape& tape, std::span<const double> theta, const InnerObjective& objective,
                const AdvConfig& cfg) {
    require(tape.deltas.size() == tape.pre_projections.size() + 1, "tape: inconsistent trajectory length");
    require(tape.steps() == cfg.k_steps, "tape: step count does not match config");
    require(tape.param_count == theta.size() && objective.param_count() == theta.size(),
            "tape: parameter count mismatch");
    require(tape.params_fingerprint == fingerprint(theta), "tape was recorded at different parameters");
    const Matrix& d0 = tape.deltas.front();
    require(d0.rows == objective.rows() && d0.cols == objective.cols(), "tape: perturbation shape mismatch");
}

Vector concat(const Matrix& a, const Vector& b) {
    Vector out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.data.begin(), a.data.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

Matrix column(const Matrix& m, std::size_t j, std::size_t rows, std::size_t cols) {
    Matrix c(rows, cols);
    for (std::size_t i = 0; i < m.rows; ++i) c.data[i] = m(i, j);
    return c;
}

}  // namespace

std::uint64_t fingerprint(std::span<const double> theta) {
    std::uint64_t h = 1469598103934665603ULL;
    for (double v : theta) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

UnrollTape unroll_from(std::span<const double> theta, const Matrix& delta0, const AdvConfig& cfg,
                       const InnerObjective& objective, std::uint64_t seed) {
    require(cfg.k_steps >= 0, "k_steps must be >= 0");
    require(delta0.rows == objective.rows() && delta0.cols == objective.cols(), "delta0 shape mismatch");
    require(theta.size() == objective.param_count(), "parameter count mismatch");
    UnrollTape tape;
    tape.cfg = cfg;
    tape.seed = seed;
    tape.param_count = theta.size();
    tape.params_fingerprint = fingerprint(theta);
    tape.deltas.push_back(delta0);
    for (int k = 0; k < cfg.k_steps; ++k) {
        StepResult step = follower_step(objective, theta, tape.deltas.back(), cfg);
        tape.pre_projections.push_back(std::move(step.pre_projection));
        tape.deltas.push_back(std::move(step.next.values));
    }
    return tape;
}

UnrollTape unroll_forward(std::span<const double> theta, const AdvConfig& cfg, const InnerObjective& objective,
                          std::uint64_t seed) {
    const Perturbation d0 = sample_init(cfg.sigma, objective.rows(), objective.cols(), seed, cfg.norm);
    return unroll_from(theta, d0.values, cfg, objective, seed);
}

Vector hvp_fd(const GradFn& grad_fn, std::span<const double> point, std::span<const double> v,
              double fd_radius_scale, std::size_t output_size) {
    require(point.size() == v.size(), "hvp_fd: direction length mismatch");
    require(fd_radius_scale > 0.0, "hvp_fd: radius scale must be positive");
    const double vnorm = norm2(v);
    if (vnorm == 0.0) return Vector(output_size == 0 ? point.size() : output_size, 0.0);
    const double r = fd_radius_scale * (1.0 + norm_inf(point));
    Vector plus(point.begin(), point.end());
    Vector minus(point.begin(), point.end());
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double step = r * (v[i] / vnorm);
        plus[i] += step;
        minus[i] -= step;
    }
    Vector gp = grad_fn(plus);
    const Vector gm = grad_fn(minus);
    require(gp.size() == gm.size(), "hvp_fd: gradient length changed");
    const double s = vnorm / (2.0 * r);
    for (std::size_t i = 0; i < gp.size(); ++i) gp[i] = (gp[i] - gm[i]) * s;
    return gp;
}

Vector interaction_adjoint(const UnrollTape& tape, std::span<const double> theta, const InnerObjective& objective,
                           const AdvConfig& cfg, SecondOrderSource source, bool* degenerate) {
    check_tape(tape, theta, objective, cfg);
    if (degenerate != nullptr) *degenerate = false;
    const std::size_t p = theta.size();
    Vector g(p, 0.0);
    if (tape.steps() == 0) return g;
    require(source == SecondOrderSource::FiniteDifference || objective.has_exact_second_order(),
            "objective has no exact second derivatives");

    // Cotangent of the batch-mean regularizer at delta^K.
    Matrix u = objective.grad_delta(tape.final_delta(), theta);
    for (double& x : u.data) x *= objective.mean_weight();
    if (norm2(u.data) < kDegenerateNorm) {
        if (degenerate != nullptr) *degenerate = true;
        return g;
    }

    const std::size_t rows = objective.rows();
    const std::size_t cols = objective.cols();
    const std::size_t dsize = rows * cols;
    const Vector zero_theta(p, 0.0);

    for (int k = tape.steps(); k >= 1; --k) {
        const Matrix w = project_jvp_rows(tape.pre_projections[k - 1], u, cfg.epsilon, cfg.norm, cfg.proj_mode);
        const Matrix& at = tape.deltas[k - 1];
        Matrix hdd(rows, cols);  // d^2 g / d delta^2 * w
        Vector hpd(p, 0.0);      // d^2 g / d theta d delta * w
        if (source == SecondOrderSource::Exact) {
            GradTangent t = objective.second_order(at, theta, w, zero_theta);
            hdd = std::move(t.grad_delta);
            hpd = std::move(t.grad_params);
        } else {
            const GradFn joint = [&](std::span<const double> d) {
                const Matrix dm(rows, cols, Vector(d.begin(), d.end()));
                auto [gd, gp] = objective.grads(dm, theta);
                return concat(gd, gp);
            };
            const Vector h = hvp_fd(joint, at.data, w.data, cfg.fd_radius_scale, dsize + p);
            std::copy(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(dsize), hdd.data.begin());
            std::copy(h.begin() + static_cast<std::ptrdiff_t>(dsize), h.end(), hpd.begin());
        }
        axpy(cfg.eta, hpd, g);
        u = w;
        axpy(cfg.eta, hdd.data, u.data);
    }
    for (double& x : g) x *= cfg.alpha;
    return g;
}

Matrix jacobian_forward_oracle(const UnrollTape& tape, std::span<const double> theta, const InnerObjective& objective,
                               const AdvConfig& cfg) {
    check_tape(tape, theta, objective, cfg);
    const std::size_t rows = objective.rows();
    const std::size_t cols = objective.cols();
    const std::size_t dsize = rows * cols;
    const std::size_t p = theta.size();
    if (static_cast<double>(dsize) * static_cast<double>(p) > kOracleMaxEntries)
        throw RefusedError("jacobian_forward_oracle: " + std::to_string(dsize) + " x " + std::to_string(p) +
                           " exceeds the test-scale size guard");

    const bool exact = objective.has_exact_second_order();
    const Matrix zero_delta(rows, cols);
    const Vector zero_theta(p, 0.0);
    Matrix jac(dsize, p);

    // d grad_delta / d theta * e_j
    auto mixed_column = [&](const Matrix& at, std::size_t j) -> Matrix {
        Vector e(p, 0.0);
        e[j] = 1.0;
        if (exact) return objective.second_order(at, theta, zero_delta, e).grad_delta;
        const GradFn gd = [&](std::span<const double> th) { return objective.grad_delta(at, th).data; };
        return Matrix(rows, cols, hvp_fd(gd, theta, e, cfg.fd_radius_scale, dsize));
    };
    // d grad_delta / d delta * dir
    auto delta_hvp = [&](const Matrix& at, const Matrix& dir) -> Matrix {
        if (exact) return objective.second_order(at, theta, dir, zero_theta).grad_delta;
        const GradFn gd = [&](std::span<const double> d) {
            return objective.grad_delta(Matrix(rows, cols, Vector(d.begin(), d.end())), theta).data;
        };
        return Matrix(rows, cols, hvp_fd(gd, at.data, dir.data, cfg.fd_radius_scale, dsize));
    };

    for (int k = 1; k <= tape.steps(); ++k) {
        const Matrix& pre = tape.pre_projections[k - 1];
        const Matrix& at = tape.deltas[k - 1];
        Matrix next(dsize, p);
        for (std::size_t j = 0; j < p; ++j) {
            const Matrix jj = column(jac, j, rows, cols);

            // dDelta/dtheta = J_Pi * eta * d grad / d theta
            Matrix a = mixed_column(at, j);
            for (double& x : a.data) x *= cfg.eta;
            const Matrix d_theta = project_jvp_rows(pre, a, cfg.epsilon, cfg.norm, cfg.proj_mode);

            // dDelta/ddelta * J = J_Pi (J + eta H J) - J
            Matrix inner = jj;
            axpy(cfg.eta, delta_hvp(at, jj).data, inner.data);
            Matrix d_delta = project_jvp_rows(pre, inner, cfg.epsilon, cfg.norm, cfg.proj_mode);
            axpy(-1.0, jj.data, d_delta.data);

            for (std::size_t i = 0; i < dsize; ++i) next(i, j) = jj.data[i] + d_theta.data[i] + d_delta.data[i];
        }
        jac = std::move(next);
    }
    return jac;
}

StackelbergResult stackelberg_gradient(const ModelParams& params, const Batch& batch, const AdvConfig& cfg,
                                       RegularizerKind kind, std::uint64_t seed, SecondOrderSource source) {
    cfg.validate();
    check_regularizer(params, kind);
    batch.validate(params.output_dim());
    const AdvRegObjective objective(params, batch.inputs, kind, cfg.detach_clean);

    StackelbergResult out;
    out.tape = unroll_forward(params.values, cfg, objective, seed);
    const Perturbation final_delta{out.tape.final_delta(), cfg.norm};
    out.grad.leader_part = vat_gradient(params, batch, final_delta, cfg, kind);
    if (cfg.alpha == 0.0 || cfg.k_steps == 0) {
        out.grad.interaction_part.assign(params.size(), 0.0);
    } else {
        out.grad.interaction_part =
            interaction_adjoint(out.tape, params.values, objective, cfg, source, &out.degenerate);
    }
    out.grad.total.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i)
        out.grad.total[i] = out.grad.leader_part[i] + out.grad.interaction_part[i];
    return out;
}

double stackelberg_objective(const ModelParams& params, const Batch& batch, const AdvConfig& cfg, RegularizerKind kind,
                             std::uint64_t seed) {
    const AdvRegObjective objective(params, batch.inputs, kind, cfg.detach_clean);
    const UnrollTape tape = unroll_forward(params.values, cfg, objective, seed);
    return task_loss(mlp_forward(params, batch.inputs), batch.targets) +
           cfg.alpha * adv_reg_loss(params, batch.inputs, tape.final_delta(), kind);
}

TrainStep salt_training_step(const ModelParams& params, const Batch& batch, const AdvConfig& cfg,
                             RegularizerKind kind, OptimizerState optimizer, std::uint64_t seed) {
    cfg.validate();
    check_regularizer(params, kind);
    batch.validate(params.output_dim());
    const AdvRegObjective objective(params, batch.inputs, kind, cfg.detach_clean);
    StepStats stats;

    auto t0 = Clock::now();
    const UnrollTape tape = unroll_forward(params.values, cfg, objective, seed);
    stats.unroll_seconds = seconds_since(t0);

    t0 = Clock::now();
    const Perturbation final_delta{tape.final_delta(), cfg.norm};
    const Vector leader = vat_gradient(params, batch, final_delta, cfg, kind);
    Vector interaction(params.size(), 0.0);
    if (cfg.alpha != 0.0 && cfg.k_steps > 0)
        interaction = interaction_adjoint(tape, params.values, objective, cfg, SecondOrderSource::FiniteDifference,
                                          &stats.degenerate);
    Vector total(params.size());
    for (std::size_t i = 0; i < total.size(); ++i) total[i] = leader[i] + interaction[i];
    stats.gradient_seconds = seconds_since(t0);

    stats.clean_loss = task_loss(mlp_forward(params, batch.inputs), batch.targets);
    stats.reg_loss = adv_reg_loss(params, batch.inputs, final_delta.values, kind);
    stats.delta_norm = mean_delta_norm(final_delta.values, cfg.norm);
    const double ln = norm2(leader);
    stats.interaction_ratio = ln > 0.0 ? norm2(interaction) / ln : 0.0;

    t0 = Clock::now();
    auto [values, next] = optimizer_step(std::move(optimizer), params.values, total);
    stats.update_seconds = seconds_since(t0);
    return {ModelParams{std::move(values), params.shapes}, std::move(next), stats};
}

}  // namespace salt
