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

// Training runs and parameter sweeps.
//
// Randomness is split into independent streams derived from the master
// seed: "data", "init", "order" and "delta". Methods that share a seed
// therefore see the same data, the same initial model, the same batch order
// and the same delta^0 at every step.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "salt/data.hpp"
#include "salt/optim.hpp"
#include "salt/perturb.hpp"

namespace salt {

enum class Method { ERM, Adv, VAT, SALT };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct DatasetSpec {
    std::string kind = "two_moons";  // two_moons | blobs | sine | csv
    std::size_t n_train = 100;
    std::size_t n_test = 500;
    double noise = 0.1;
    std::size_t classes = 3;  // blobs
    std::size_t dim = 2;      // blobs
    std::string train_path;   // csv
    std::string test_path;    // csv
};

struct ExperimentConfig {
    Method method = Method::SALT;
    AdvConfig adv;
    std::vector<std::size_t> layers{2, 32, 32, 2};
    HeadKind head = HeadKind::Classification;
    OptimizerConfig optimizer;
    int epochs = 100;
    std::size_t batch_size = 25;
    std::uint64_t seed = 0;
    DatasetSpec dataset;
    std::string output_dir;  // empty: nothing is written

    void validate() const;
};

// Unknown keys anywhere in the document are rejected with ConfigError.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double train_metric = 0.0;  // accuracy (classification) or RMSE (regression)
    double val_metric = 0.0;
    double reg_loss = 0.0;      // mean over the epoch's steps
    std::optional<double> ece;  // classification only
    double interaction_ratio = 0.0;
    double wall_seconds = 0.0;
};

struct RunRecord {
    HeadKind head = HeadKind::Classification;
    std::vector<EpochRecord> epochs;
    ModelParams final_params;
    std::string checkpoint_path;
};

// One metrics.jsonl line; excludes wall-clock so reruns are byte-identical.
std::string metrics_line(const EpochRecord& e, HeadKind head);

DataSplit load_dataset(const ExperimentConfig& cfg);

// Full training. When cfg.output_dir is set, writes metrics.jsonl (appended
// and flushed per epoch), timing.jsonl, checkpoint.json, and for
// classification reliability.csv and predictions.csv for the held-out split.
RunRecord run_experiment(const ExperimentConfig& cfg);

enum class SweepAxis { KSteps, Epsilon, Norm };

SweepAxis sweep_axis_from_string(const std::string& s);
std::string to_string(SweepAxis a);

struct SweepMetrics {
    double final_train_loss = 0.0;
    double final_val_loss = 0.0;
    double final_val_acc = 0.0;
    double ece = 0.0;
};

struct SweepRow {
    std::string axis_value;
    std::uint64_t seed = 0;
    SweepMetrics metrics;
    std::optional<SweepMetrics> linf;  // epsilon axis: same run under LInf
};

// Applies one axis value to a config copy.
ExperimentConfig apply_axis(ExperimentConfig cfg, SweepAxis axis, const std::string& value);

// One row per (value, seed), ordered value-major. For the epsilon axis each
// row carries both an L2 and an LInf run. Runs execute on up to `threads`
// workers; results do not depend on the thread count.
std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::string>& values,
                            const std::vector<std::uint64_t>& seeds, int threads = 1);

// Header: axis_value,seed,final_train_loss,final_val_loss,final_val_acc,ece
// (plus *_linf columns for the epsilon axis).
std::string sweep_csv(const std::vector<SweepRow>& rows, SweepAxis axis);

// Reads SALT_THREADS, default 1.
int sweep_threads_from_env();

}  // namespace salt
