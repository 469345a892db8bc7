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

#include "salt/diffmodel.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mlp_kernel.hpp"

namespace salt {

namespace {

std::vector<LayerShape> shapes_for(const std::vector<std::size_t>& sizes) {
    require(sizes.size() >= 2, "model needs at least an input and an output width");
    std::vector<LayerShape> shapes;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        require(sizes[i] > 0 && sizes[i + 1] > 0, "layer widths must be positive");
        shapes.push_back({sizes[i + 1], sizes[i]});
        shapes.push_back({sizes[i + 1], 1});
    }
    return shapes;
}

std::size_t count_values(const std::vector<LayerShape>& shapes) {
    std::size_t total = 0;
    for (const auto& s : shapes) total += s.rows * s.cols;
    return total;
}

// Cotangent of the mean task loss w.r.t. the outputs.
Vector task_loss_cotangent(const Matrix& out, const Targets& targets) {
    const std::size_t n = out.rows;
    const std::size_t c = out.cols;
    Vector g(n * c, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    if (targets.kind == HeadKind::Classification) {
        for (std::size_t i = 0; i < n; ++i) {
            kernel::softmax_row(&out.data[i * c], c, &g[i * c]);
            g[i * c + static_cast<std::size_t>(targets.labels[i])] -= 1.0;
            for (std::size_t k = 0; k < c; ++k) g[i * c + k] *= inv_n;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) g[i] = 2.0 * (out.data[i] - targets.values[i]) * inv_n;
    }
    return g;
}

void check_targets(const Targets& targets, std::size_t n, std::size_t c, HeadKind head) {
    require(targets.kind == head, "target kind does not match model head");
    require(targets.size() == n, "target count does not match batch size");
    if (head == HeadKind::Classification)
        for (int y : targets.labels)
            require(y >= 0 && static_cast<std::size_t>(y) < c, "label out of range: " + std::to_string(y));
}

}  // namespace

ModelParams ModelParams::zeros(const std::vector<std::size_t>& layer_sizes) {
    ModelParams p;
    p.shapes = shapes_for(layer_sizes);
    p.values.assign(count_values(p.shapes), 0.0);
    return p;
}

ModelParams ModelParams::random(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
    ModelParams p = zeros(layer_sizes);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::size_t off = 0;
    for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(layer_sizes[i]));
        const std::size_t nw = layer_sizes[i] * layer_sizes[i + 1];
        for (std::size_t j = 0; j < nw; ++j) p.values[off + j] = scale * normal(gen);
        off += nw + layer_sizes[i + 1];
    }
    return p;
}

void ModelParams::validate() const {
    require(!shapes.empty() && shapes.size() % 2 == 0, "shapes must come in (weight, bias) pairs");
    for (std::size_t l = 0; l < shapes.size(); l += 2) {
        const LayerShape& w = shapes[l];
        const LayerShape& b = shapes[l + 1];
        require(w.rows > 0 && w.cols > 0, "empty weight block");
        require(b.rows == w.rows && b.cols == 1, "bias shape must be (out, 1)");
        if (l > 0) require(w.cols == shapes[l - 2].rows, "layer input width does not match previous output");
    }
    require(values.size() == count_values(shapes), "value count does not match shapes");
    for (double v : values) require(std::isfinite(v), "non-finite parameter");
}

std::size_t ModelParams::input_dim() const { return shapes.front().cols; }
std::size_t ModelParams::output_dim() const { return shapes[shapes.size() - 2].rows; }

std::vector<std::size_t> ModelParams::layer_sizes() const {
    std::vector<std::size_t> sizes{input_dim()};
    for (std::size_t l = 0; l < shapes.size(); l += 2) sizes.push_back(shapes[l].rows);
    return sizes;
}

HeadKind ModelParams::head() const {
    return output_dim() == 1 ? HeadKind::Regression : HeadKind::Classification;
}

void Batch::validate(std::size_t num_classes) const {
    require(inputs.rows >= 1, "batch must contain at least one example");
    check_targets(targets, inputs.rows, num_classes, targets.kind);
}

ModelOutput mlp_forward(const ModelParams& params, const Matrix& inputs) {
    const kernel::Layout lay = kernel::make_layout(params);
    require(inputs.cols == lay.in(), "input width " + std::to_string(inputs.cols) +
                                         " does not match model input " + std::to_string(lay.in()));
    auto a = kernel::forward<double>(lay, params.values.data(), inputs.data.data(), inputs.rows);
    return {params.head(), Matrix(inputs.rows, lay.out(), std::move(a.h.back()))};
}

Vector softmax(std::span<const double> logits) {
    require(!logits.empty(), "softmax of empty vector");
    Vector out(logits.size());
    kernel::softmax_row(logits.data(), logits.size(), out.data());
    return out;
}

double task_loss(const ModelOutput& output, const Targets& targets) {
    const std::size_t n = output.values.rows;
    const std::size_t c = output.values.cols;
    check_targets(targets, n, c, output.head);
    require(n >= 1, "empty batch");
    double sum = 0.0;
    if (output.head == HeadKind::Classification) {
        Vector logp(c);
        for (std::size_t i = 0; i < n; ++i) {
            kernel::log_softmax_row(&output.values.data[i * c], c, logp.data());
            sum -= logp[static_cast<std::size_t>(targets.labels[i])];
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double r = output.values.data[i] - targets.values[i];
            sum += r * r;
        }
    }
    return sum / static_cast<double>(n);
}

Vector grad_params(const ModelParams& params, const Batch& batch) {
    const kernel::Layout lay = kernel::make_layout(params);
    require(batch.inputs.cols == lay.in(), "input width does not match model");
    check_targets(batch.targets, batch.size(), lay.out(), params.head());
    auto a = kernel::forward<double>(lay, params.values.data(), batch.inputs.data.data(), batch.size());
    const Matrix out(batch.size(), lay.out(), a.h.back());
    Vector g(lay.param_count, 0.0);
    kernel::backward<double>(lay, params.values.data(), a, task_loss_cotangent(out, batch.targets), g.data(), nullptr);
    return g;
}

Matrix grad_input(const ModelParams& params, const Matrix& inputs, const InputObjective& objective) {
    const kernel::Layout lay = kernel::make_layout(params);
    require(inputs.cols == lay.in(), "input width does not match model");
    const std::size_t n = inputs.rows;
    Matrix g(n, inputs.cols);
    switch (objective.kind) {
        case InputObjectiveKind::TaskLoss: {
            require(objective.targets != nullptr, "task-loss objective needs targets");
            check_targets(*objective.targets, n, lay.out(), params.head());
            auto a = kernel::forward<double>(lay, params.values.data(), inputs.data.data(), n);
            const Matrix out(n, lay.out(), a.h.back());
            kernel::backward<double>(lay, params.values.data(), a, task_loss_cotangent(out, *objective.targets),
                                     nullptr, g.data.data());
            return g;
        }
        case InputObjectiveKind::KLDivergence:
        case InputObjectiveKind::SquaredDifference: {
            const bool squared = objective.kind == InputObjectiveKind::SquaredDifference;
            require(objective.reference_inputs != nullptr, "regularizer objective needs reference inputs");
            const Matrix& ref = *objective.reference_inputs;
            require(ref.same_shape(inputs), "reference inputs shape mismatch");
            require(squared == (params.head() == HeadKind::Regression), "regularizer kind does not match model head");
            Vector delta(inputs.size());
            for (std::size_t j = 0; j < delta.size(); ++j) delta[j] = inputs.data[j] - ref.data[j];
            auto r = kernel::regularizer_sum<double>(lay, params.values.data(), ref, delta.data(), squared, false,
                                                     true, false);
            const double inv_n = 1.0 / static_cast<double>(n);
            for (std::size_t j = 0; j < g.size(); ++j) g.data[j] = r.grad_delta[j] * inv_n;
            return g;
        }
    }
    throw ContractError("grad_input: unknown objective selector");
}

std::string params_to_json(const ModelParams& params) {
    params.validate();
    nlohmann::json j;
    j["shapes"] = nlohmann::json::array();
    for (const auto& s : params.shapes) j["shapes"].push_back({s.rows, s.cols});
    j["values"] = params.values;
    return j.dump();
}

ModelParams params_from_json(const std::string& text) {
    ModelParams p;
    try {
        const auto j = nlohmann::json::parse(text);
        for (const auto& s : j.at("shapes")) {
            if (!s.is_array() || s.size() != 2) throw ParseError("checkpoint: each shape must be [rows, cols]");
            p.shapes.push_back({s[0].get<std::size_t>(), s[1].get<std::size_t>()});
        }
        p.values = j.at("values").get<Vector>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
    p.validate();
    return p;
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << params_to_json(params) << '\n';
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return params_from_json(ss.str());
}

}  // namespace salt
