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


#include "salt/gradcheck.hpp"

#include <cstdio>
#include <random>

#include "salt/rng.hpp"
#include "salt/salt.hpp"

namespace salt {

namespace {

// Relative distance from the projection boundary below which a trajectory
// counts as kink-adjacent.
constexpr double kKinkMargin = 1e-3;
constexpr int kMaxResamples = 1000;

struct Draw {
    ModelParams params;
    Batch batch;
    AdvConfig cfg;
    RegularizerKind kind;
    std::uint64_t delta_seed;
    std::size_t hidden;
};

Draw draw_instance(std::uint64_t seed, int k, NormKind norm) {
    std::mt19937_64 gen(seed);
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); };
    std::normal_distribution<double> normal(0.0, 1.0);

    const auto d = static_cast<std::size_t>(uniform_int(2, 6));
    const auto h = static_cast<std::size_t>(uniform_int(3, 8));
    const auto c = static_cast<std::size_t>(uniform_int(1, 3));
    const auto n = static_cast<std::size_t>(uniform_int(1, 3));
    std::vector<std::size_t> layers{d, h};
    if (uniform_int(0, 1) == 1) layers.push_back(h);
    layers.push_back(c);

    Draw out;
    out.hidden = h;
    out.params = ModelParams::random(layers, gen());
    out.batch.inputs = Matrix(n, d);
    for (double& v : out.batch.inputs.data) v = normal(gen);
    if (c == 1) {
        out.batch.targets = {HeadKind::Regression, {}, Vector(n)};
        for (double& v : out.batch.targets.values) v = normal(gen);
    } else {
        out.batch.targets = {HeadKind::Classification, std::vector<int>(n), {}};
        for (int& v : out.batch.targets.labels) v = uniform_int(0, static_cast<int>(c) - 1);
    }
    out.kind = regularizer_for(out.params.head());
    out.cfg.epsilon = uniform(0.3, 1.5);
    out.cfg.sigma = 0.5 * out.cfg.epsilon;
    out.cfg.eta = uniform(0.2, 1.0);
    out.cfg.alpha = uniform(0.5, 2.0);
    out.cfg.k_steps = k;
    out.cfg.norm = norm;
    out.cfg.proj_mode = ProjectionMode::ExactJacobian;
    out.delta_seed = gen();
    return out;
}

bool near_kink(const UnrollTape& tape, double epsilon, NormKind norm) {
    const double lo = epsilon * (1.0 - kKinkMargin);
    const double hi = epsilon * (1.0 + kKinkMargin);
    for (const Matrix& pre : tape.pre_projections) {
        for (std::size_t r = 0; r < pre.rows; ++r) {
            const auto row = pre.row(r);
            if (norm == NormKind::L2) {
                const double nrm = norm2(row);
                if (nrm >= lo && nrm <= hi) return true;
            } else {
                for (double v : row)
                    if (std::abs(v) >= lo && std::abs(v) <= hi) return true;
            }
        }
    }
    return false;
}

Vector finite_difference(const Draw& d, double step) {
    ModelParams p = d.params;
    Vector fd(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double keep = p.values[j];
        p.values[j] = keep + step;
        const double up = stackelberg_objective(p, d.batch, d.cfg, d.kind, d.delta_seed);
        p.values[j] = keep - step;
        const double down = stackelberg_objective(p, d.batch, d.cfg, d.kind, d.delta_seed);
        p.values[j] = keep;
        fd[j] = (up - down) / (2.0 * step);
    }
    return fd;
}

}  // namespace

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
    require(options.instances >= 1, "gradcheck needs at least one instance");
    require(options.k == -1 || (options.k >= 1 && options.k <= 3), "gradcheck k must be 1, 2 or 3");
    require(options.fd_step > 0.0, "fd_step must be positive");
    const std::uint64_t stream = derive_seed(options.seed, "gradcheck");
    GradcheckReport report;
    for (int i = 0; i < options.instances; ++i) {
        const int k = options.k == -1 ? 1 + i % 3 : options.k;
        const NormKind norm = i % 2 == 0 ? NormKind::L2 : NormKind::LInf;
        Draw d;
        int attempt = 0;
        for (;; ++attempt) {
            if (attempt > kMaxResamples) throw RefusedError("gradcheck: could not draw a kink-free instance");
            d = draw_instance(derive_seed(stream, static_cast<std::uint64_t>(i) * 100003u + attempt), k, norm);
            const AdvRegObjective obj(d.params, d.batch.inputs, d.kind, d.cfg.detach_clean);
            if (!near_kink(unroll_forward(d.params.values, d.cfg, obj, d.delta_seed), d.cfg.epsilon, norm)) break;
        }

        const StackelbergResult sg = stackelberg_gradient(d.params, d.batch, d.cfg, d.kind, d.delta_seed);
        const Vector fd = finite_difference(d, options.fd_step);

        const AdvRegObjective obj(d.params, d.batch.inputs, d.kind, d.cfg.detach_clean);
        const Matrix jac = jacobian_forward_oracle(sg.tape, d.params.values, obj, d.cfg);
        Matrix v = obj.grad_delta(sg.tape.final_delta(), d.params.values);
        for (double& x : v.data) x *= obj.mean_weight();
        Vector forward(d.params.size(), 0.0);
        for (std::size_t r = 0; r < jac.rows; ++r)
            for (std::size_t j = 0; j < jac.cols; ++j) forward[j] += v.data[r] * jac(r, j);
        auto adjoint = [&](SecondOrderSource source) {
            Vector a = interaction_adjoint(sg.tape, d.params.values, obj, d.cfg, source);
            for (double& x : a) x /= d.cfg.alpha;
            return a;
        };

        GradcheckInstance row;
        row.index = i;
        row.k = k;
        row.norm = norm;
        row.batch = d.batch.size();
        row.input_dim = d.params.input_dim();
        row.hidden = d.hidden;
        row.outputs = d.params.output_dim();
        row.param_count = d.params.size();
        row.resamples = attempt;
        row.total_error = relative_error(sg.grad.total, fd);
        row.leader_only_error = relative_error(sg.grad.leader_part, fd);
        const double ln = norm2(sg.grad.leader_part);
        row.interaction_ratio = ln > 0.0 ? norm2(sg.grad.interaction_part) / ln : 0.0;
        row.mode_error_exact = relative_error(adjoint(SecondOrderSource::Exact), forward);
        row.mode_error_fd = relative_error(adjoint(SecondOrderSource::FiniteDifference), forward);

        report.max_total_error = std::max(report.max_total_error, row.total_error);
        report.max_mode_error_exact = std::max(report.max_mode_error_exact, row.mode_error_exact);
        report.max_mode_error_fd = std::max(report.max_mode_error_fd, row.mode_error_fd);
        report.rows.push_back(row);
    }
    return report;
}

bool gradcheck_passed(const GradcheckReport& r) {
    return r.max_total_error <= kGradcheckTolerance && r.max_mode_error_exact <= kModeExactTolerance &&
           r.max_mode_error_fd <= kModeFdTolerance;
}

std::string format_gradcheck(const GradcheckReport& r) {
    std::string s = "instance k norm n d hidden out params resamples total_err leader_only_err interaction_ratio "
                    "mode_err_exact mode_err_fd\n";
    char buf[512];
    for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof buf, "%d %d %s %zu %zu %zu %zu %zu %d %.3e %.3e %.3e %.3e %.3e\n", row.index, row.k,
                      to_string(row.norm).c_str(), row.batch, row.input_dim, row.hidden, row.outputs, row.param_count,
                      row.resamples, row.total_error, row.leader_only_error, row.interaction_ratio,
                      row.mode_error_exact, row.mode_error_fd);
        s += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "max total_err %.3e (tol %.0e)\nmax mode_err_exact %.3e (tol %.0e)\nmax mode_err_fd %.3e (tol %.0e)\n%s\n",
                  r.max_total_error, kGradcheckTolerance, r.max_mode_error_exact, kModeExactTolerance,
                  r.max_mode_error_fd, kModeFdTolerance, gradcheck_passed(r) ? "PASS" : "FAIL");
    s += buf;
    return s;
}

}  // namespace salt
