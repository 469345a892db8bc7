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

// Differentiable model contract and the reference tanh MLP.
//
// Parameters are one flat vector plus per-layer shape metadata. Each layer
// contributes a weight block of shape (out, in) followed by a bias block of
// shape (out, 1), both row-major. Hidden layers apply tanh; the last layer is
// linear. A final width of 1 means a scalar regression head, anything >= 2 is
// a classification head producing logits.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "salt/tensor.hpp"

namespace salt {

enum class HeadKind { Classification, Regression };

struct LayerShape {
    std::size_t rows = 0;
    std::size_t cols = 0;
    friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

struct ModelParams {
    Vector values;
    std::vector<LayerShape> shapes;

    // Layer widths from input to output, e.g. {2, 32, 32, 2}.
    static ModelParams zeros(const std::vector<std::size_t>& layer_sizes);
    // Weights ~ N(0, 1/fan_in), biases zero.
    static ModelParams random(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed);

    std::size_t size() const { return values.size(); }
    std::size_t layer_count() const { return shapes.size() / 2; }
    std::size_t input_dim() const;
    std::size_t output_dim() const;
    std::vector<std::size_t> layer_sizes() const;
    HeadKind head() const;

    // Throws ContractError if shapes are inconsistent or values non-finite.
    void validate() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Targets for a batch: integer labels for classification, reals for regression.
struct Targets {
    HeadKind kind = HeadKind::Classification;
    std::vector<int> labels;
    Vector values;

    std::size_t size() const { return kind == HeadKind::Classification ? labels.size() : values.size(); }
};

struct Batch {
    Matrix inputs;  // n x d; treated directly as the embedding space
    Targets targets;

    std::size_t size() const { return inputs.rows; }
    void validate(std::size_t num_classes) const;
};

struct ModelOutput {
    HeadKind head = HeadKind::Classification;
    Matrix values;  // n x C logits, or n x 1 scalars
};

ModelOutput mlp_forward(const ModelParams& params, const Matrix& inputs);

Vector softmax(std::span<const double> logits);

// Mean cross-entropy (classification) or mean squared error (regression).
double task_loss(const ModelOutput& output, const Targets& targets);

// d task_loss / d theta by backpropagation.
Vector grad_params(const ModelParams& params, const Batch& batch);

enum class InputObjectiveKind { TaskLoss, KLDivergence, SquaredDifference };

// Scalar objective whose input-gradient grad_input computes. The regularizer
// kinds compare the model at `inputs` against the model at `reference_inputs`
// (batch mean), so the gradient is with respect to the perturbed branch only.
struct InputObjective {
    InputObjectiveKind kind = InputObjectiveKind::TaskLoss;
    const Targets* targets = nullptr;
    const Matrix* reference_inputs = nullptr;
};

Matrix grad_input(const ModelParams& params, const Matrix& inputs, const InputObjective& objective);

// Checkpoint I/O: {"shapes": [[r,c],...], "values": [...]}.
std::string params_to_json(const ModelParams& params);
ModelParams params_from_json(const std::string& text);
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace salt
