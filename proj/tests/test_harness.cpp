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


#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "salt/errors.hpp"
#include "salt/experiment.hpp"
#include "test_util.hpp"

using namespace salt;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("salt_harness_" + name);
    fs::remove_all(p);
    return p;
}

ExperimentConfig small(Method m, int epochs = 5) {
    ExperimentConfig c;
    c.method = m;
    c.epochs = epochs;
    c.layers = {2, 8, 2};
    c.dataset.n_train = 40;
    c.dataset.n_test = 40;
    c.batch_size = 10;
    c.adv.sigma = 0.1;
    c.adv.eta = 0.5;
    return c;
}

}  // namespace

TEST_CASE("two moons") {
    const Batch clean = two_moons(200, 0.0, 1);
    std::size_t ones = 0;
    for (std::size_t i = 0; i < 200; ++i) {
        const double x = clean.inputs(i, 0), y = clean.inputs(i, 1);
        const bool upper = clean.targets.labels[i] == 0;
        const double r = upper ? std::hypot(x, y) : std::hypot(1.0 - x, 0.5 - y);
        CHECK(r == doctest::Approx(1.0).epsilon(1e-14));
        CHECK((upper ? y : 0.5 - y) >= -1e-15);
        ones += clean.targets.labels[i];
    }
    CHECK(ones == 100);

    const DataSplit a = gen_two_moons(50, 20, 0.1, 9);
    const DataSplit b = gen_two_moons(50, 20, 0.1, 9);
    CHECK(a.train.inputs == b.train.inputs);
    CHECK(a.test.inputs == b.test.inputs);
    CHECK_FALSE(gen_two_moons(50, 20, 0.1, 10).train.inputs == a.train.inputs);
}

TEST_CASE("blobs and sine") {
    const DataSplit blobs = gen_blobs(30, 12, 3, 4, 0.2, 2);
    CHECK(blobs.train.inputs.cols == 4);
    CHECK(blobs.test.size() == 12);
    for (int y : blobs.train.targets.labels) CHECK((y >= 0 && y < 3));
    const DataSplit sine = gen_sine_regression(25, 5, 0.0, 3);
    CHECK(sine.train.targets.kind == HeadKind::Regression);
    for (std::size_t i = 0; i < 25; ++i)
        CHECK(sine.train.targets.values[i] == std::sin(2.0 * std::numbers::pi * sine.train.inputs(i, 0)));
}

TEST_CASE("csv loading") {
    const std::string text = "x0,x1,y\n0.5,-1.25,1\n3,4,0\n";
    const Batch b = parse_csv(text);
    CHECK(b.inputs == Matrix(2, 2, Vector{0.5, -1.25, 3.0, 4.0}));
    CHECK(b.targets.kind == HeadKind::Classification);
    CHECK(b.targets.labels == std::vector<int>{1, 0});
    CHECK(to_csv(b) == "x0,x1,y\n0.5,-1.25,1\n3,4,0\n");
    CHECK(parse_csv("a,y\n1,0.5\n").targets.kind == HeadKind::Regression);

    try {
        parse_csv("x0,x1,y\n1,2,0\n1,abc,1\n", "bad.csv");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("column 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_csv("x0,y\n1,2,3\n"), ParseError);
    CHECK_THROWS_AS(parse_csv("x0,y\n"), ParseError);

    const fs::path dir = scratch("csv");
    fs::create_directories(dir);
    std::ofstream(dir / "empty.csv").close();
    CHECK_THROWS_AS(load_csv((dir / "empty.csv").string()), ParseError);
    CHECK_THROWS_AS(load_csv((dir / "missing.csv").string()), IoError);

    for (const DataSplit& d : {gen_two_moons(64, 1, 0.3, 4), gen_sine_regression(64, 1, 0.2, 4)}) {
        write_csv(d.train, (dir / "round.csv").string());
        const Batch back = load_csv((dir / "round.csv").string());
        CHECK(back.inputs == d.train.inputs);
        CHECK(back.targets.labels == d.train.targets.labels);
        CHECK(back.targets.values == d.train.targets.values);
    }
    fs::remove_all(dir);
}

TEST_CASE("optimizers") {
    CHECK(sgd_step(Vector{0.0, 0.0}, Vector{1.0, -2.0}, 0.1) == Vector{-0.1, 0.2});

    OptimizerConfig cfg;
    cfg.lr = 0.01;
    auto [first, s1] = adam_step(OptimizerState::create(cfg, 3), Vector{0.0, 0.0, 0.0}, Vector{3.0, -0.2, 1e-3});
    CHECK(first[0] == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(first[1] == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(first[2] == doctest::Approx(-0.01).epsilon(1e-4));
    CHECK(s1.step == 1);

    // f = theta^2 from theta = 1, lr 0.1; values stepped by hand.
    cfg.lr = 0.1;
    OptimizerState st = OptimizerState::create(cfg, 1);
    Vector theta{1.0};
    const double expect[] = {0.9000000005, 0.8003620050853384, 0.7013970369450757, 0.603481214104757,
                             0.507067094649373};
    for (double e : expect) {
        auto [next, ns] = optimizer_step(std::move(st), theta, Vector{2.0 * theta[0]});
        theta = next;
        st = std::move(ns);
        CHECK(theta[0] == doctest::Approx(e).epsilon(1e-14));
    }

    OptimizerConfig bad;
    bad.lr = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = OptimizerConfig{};
    bad.beta2 = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(optimizer_from_string("SGD") == OptimizerKind::SGD);
    CHECK_THROWS_AS(optimizer_from_string("RMSProp"), ConfigError);
}

TEST_CASE("config parsing") {
    const ExperimentConfig d = config_from_json("{}");
    CHECK(d.method == Method::SALT);
    CHECK(d.layers == std::vector<std::size_t>{2, 32, 32, 2});
    CHECK(d.adv.epsilon == 1.0);
    CHECK(d.adv.k_steps == 2);
    CHECK(d.adv.sigma == 1e-4);
    CHECK(d.adv.eta == 1e-3);
    CHECK(d.optimizer.beta1 == 0.9);
    CHECK(d.optimizer.beta2 == 0.98);
    CHECK(d.dataset.n_train == 100);
    CHECK(d.dataset.n_test == 500);

    const ExperimentConfig c = config_from_json(R"({
        "method": "VAT", "epochs": 3, "batch_size": 7, "seed": 12,
        "adv": {"alpha": 0.5, "epsilon": 2, "norm": "LInf", "k_steps": 3, "proj_mode": "StraightThrough"},
        "model": {"layers": [1, 4, 1], "head": "regression"},
        "optimizer": {"kind": "SGD", "lr": 0.05},
        "dataset": {"kind": "sine", "n_train": 10, "n_test": 5, "noise": 0.0}
    })");
    CHECK(c.method == Method::VAT);
    CHECK(c.adv.norm == NormKind::LInf);
    CHECK(c.adv.proj_mode == ProjectionMode::StraightThrough);
    CHECK(c.head == HeadKind::Regression);
    CHECK(c.optimizer.kind == OptimizerKind::SGD);
    CHECK(c.seed == 12);
    const ExperimentConfig again = config_from_json(config_to_json(c));
    CHECK(config_to_json(again) == config_to_json(c));

    for (const char* bad : {R"({"unknown": 1})", R"({"adv": {"epsilon": 1, "radius": 2}})",
                            R"({"model": {"layers": [2, 2], "depth": 1}})", R"({"optimizer": {"momentum": 0.9}})",
                            R"({"dataset": {"kind": "two_moons", "size": 3}})"})
        CHECK_THROWS_AS(config_from_json(bad), ConfigError);
    for (const char* bad : {R"({"epochs": 0})", R"({"adv": {"k_steps": -1}})", R"({"epochs": "ten"})",
                            R"({"method": "SMART"})", R"({"model": {"layers": [3, 2]}})",
                            R"({"model": {"layers": [2, 1]}})", R"({"dataset": {"kind": "imagenet"}})",
                            R"({"batch_size": 0})", "[1, 2]", "{"})
        CHECK_THROWS_AS(config_from_json(bad), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("run_experiment writes deterministic records") {
    const fs::path dir = scratch("run");
    ExperimentConfig c = small(Method::SALT, 4);
    c.output_dir = (dir / "a").string();
    const RunRecord r = run_experiment(c);
    CHECK(r.epochs.size() == 4);
    for (std::size_t i = 0; i < r.epochs.size(); ++i) CHECK(r.epochs[i].epoch == static_cast<int>(i + 1));
    for (const char* f : {"metrics.jsonl", "timing.jsonl", "checkpoint.json", "reliability.csv", "predictions.csv",
                          "config.json"})
        CHECK(fs::exists(dir / "a" / f));
    CHECK(load_checkpoint((dir / "a" / "checkpoint.json").string()) == r.final_params);
    CHECK(config_from_json(read_file(dir / "a" / "config.json")).seed == c.seed);

    c.output_dir = (dir / "b").string();
    run_experiment(c);
    const std::string m = read_file(dir / "a" / "metrics.jsonl");
    CHECK(m == read_file(dir / "b" / "metrics.jsonl"));
    CHECK(std::count(m.begin(), m.end(), '\n') == 4);
    CHECK(read_file(dir / "a" / "reliability.csv") == read_file(dir / "b" / "reliability.csv"));
    CHECK(read_file(dir / "a" / "checkpoint.json") == read_file(dir / "b" / "checkpoint.json"));

    // Regression runs carry RMSE and no calibration outputs.
    ExperimentConfig reg = small(Method::VAT, 2);
    reg.layers = {1, 6, 1};
    reg.head = HeadKind::Regression;
    reg.dataset.kind = "sine";
    reg.output_dir = (dir / "reg").string();
    const RunRecord rr = run_experiment(reg);
    CHECK_FALSE(rr.epochs.back().ece.has_value());
    CHECK(rr.epochs.back().val_metric == doctest::Approx(std::sqrt(rr.epochs.back().val_loss)));
    CHECK_FALSE(fs::exists(dir / "reg" / "reliability.csv"));
    CHECK(read_file(dir / "reg" / "metrics.jsonl").find("val_rmse") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("methods share data, init, order and delta streams") {
    // Regularizer off: SALT, VAT and Adv all collapse to ERM.
    ExperimentConfig c = small(Method::ERM, 4);
    const RunRecord erm = run_experiment(c);
    for (Method m : {Method::SALT, Method::VAT, Method::Adv}) {
        ExperimentConfig o = c;
        o.method = m;
        o.adv.alpha = 0.0;
        const RunRecord r = run_experiment(o);
        for (std::size_t e = 0; e < erm.epochs.size(); ++e) {
            CHECK(r.epochs[e].train_loss == erm.epochs[e].train_loss);
            CHECK(r.epochs[e].val_loss == erm.epochs[e].val_loss);
        }
        CHECK(r.final_params == erm.final_params);
    }
    // K = 0: no interaction, so SALT and VAT see the same delta^0 and agree.
    ExperimentConfig s = small(Method::SALT, 3);
    s.adv.k_steps = 0;
    ExperimentConfig v = s;
    v.method = Method::VAT;
    CHECK(run_experiment(s).final_params == run_experiment(v).final_params);
}

TEST_CASE("ERM smoke runs") {
    ExperimentConfig c;
    c.method = Method::ERM;
    c.dataset.n_train = 200;
    c.dataset.n_test = 500;
    c.epochs = 200;
    c.seed = 1;
    const RunRecord r = run_experiment(c);
    CHECK(r.epochs.back().val_metric >= 0.95);

    c.layers = {2, 64, 64, 2};
    CHECK(run_experiment(c).epochs.back().train_metric >= 0.99);

    ExperimentConfig sine;
    sine.method = Method::ERM;
    sine.layers = {1, 32, 32, 1};
    sine.head = HeadKind::Regression;
    sine.dataset.kind = "sine";
    sine.dataset.noise = 0.05;
    sine.epochs = 150;
    const RunRecord rs = run_experiment(sine);
    CHECK(rs.epochs.back().val_metric < 0.25);
}

TEST_CASE("csv datasets") {
    const fs::path dir = scratch("csvdata");
    fs::create_directories(dir);
    const DataSplit d = gen_two_moons(30, 20, 0.1, 5);
    write_csv(d.train, (dir / "train.csv").string());
    write_csv(d.test, (dir / "test.csv").string());
    ExperimentConfig c = small(Method::ERM, 2);
    c.dataset.kind = "csv";
    c.dataset.train_path = (dir / "train.csv").string();
    c.dataset.test_path = (dir / "test.csv").string();
    const DataSplit loaded = load_dataset(c);
    CHECK(loaded.train.inputs == d.train.inputs);
    CHECK(run_experiment(c).epochs.size() == 2);
    c.layers = {3, 4, 2};
    CHECK_THROWS_AS(load_dataset(c), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("sweep") {
    const ExperimentConfig base = small(Method::SALT, 2);
    const auto rows = sweep(base, SweepAxis::KSteps, {"1", "2", "3"}, {0, 1}, 1);
    CHECK(rows.size() == 6);
    CHECK(rows[0].axis_value == "1");
    CHECK(rows[1].seed == 1);
    const std::string csv = sweep_csv(rows, SweepAxis::KSteps);
    CHECK(csv.rfind("axis_value,seed,final_train_loss,final_val_loss,final_val_acc,ece\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    CHECK(sweep_csv(sweep(base, SweepAxis::KSteps, {"1", "2", "3"}, {0, 1}, 4), SweepAxis::KSteps) == csv);

    const auto eps = sweep(base, SweepAxis::Epsilon, {"0.5", "1"}, {3}, 2);
    CHECK(eps.size() == 2);
    CHECK(eps[0].linf.has_value());
    const std::string ecsv = sweep_csv(eps, SweepAxis::Epsilon);
    CHECK(ecsv.find("final_val_acc_linf") != std::string::npos);

    CHECK(sweep(base, SweepAxis::Norm, {"L2", "LInf"}, {0}, 1).size() == 2);
    CHECK_THROWS_AS(sweep(base, SweepAxis::KSteps, {"two"}, {0}, 1), ConfigError);
    CHECK_THROWS_AS(sweep(base, SweepAxis::Epsilon, {"-1"}, {0}, 1), ConfigError);
    CHECK_THROWS_AS(sweep_axis_from_string("alpha"), ConfigError);

    const fs::path dir = scratch("sweep");
    ExperimentConfig out = base;
    out.output_dir = dir.string();
    sweep(out, SweepAxis::KSteps, {"1"}, {0, 1}, 2);
    CHECK(fs::exists(dir / "k_steps=1" / "seed=0" / "metrics.jsonl"));
    CHECK(fs::exists(dir / "k_steps=1" / "seed=1" / "metrics.jsonl"));
    fs::remove_all(dir);
}

TEST_CASE("SALT_THREADS") {
    unsetenv("SALT_THREADS");
    CHECK(sweep_threads_from_env() == 1);
    setenv("SALT_THREADS", "6", 1);
    CHECK(sweep_threads_from_env() == 6);
    setenv("SALT_THREADS", "0", 1);
    CHECK_THROWS_AS(sweep_threads_from_env(), ConfigError);
    setenv("SALT_THREADS", "4x", 1);
    CHECK_THROWS_AS(sweep_threads_from_env(), ConfigError);
    unsetenv("SALT_THREADS");
}
