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

#include "salt/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "salt/calibration.hpp"
#include "salt/rng.hpp"
#include "salt/salt.hpp"

namespace salt {

using json = nlohmann::ordered_json;

std::string to_string(Method m) {
    switch (m) {
        case Method::ERM: return "ERM";
        case Method::Adv: return "Adv";
        case Method::VAT: return "VAT";
        case Method::SALT: return "SALT";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "ERM") return Method::ERM;
    if (s == "Adv") return Method::Adv;
    if (s == "VAT") return Method::VAT;
    if (s == "SALT") return Method::SALT;
    throw ConfigError("unknown method '" + s + "' (expected ERM, Adv, VAT or SALT)");
}

namespace {

std::string head_name(HeadKind h) { return h == HeadKind::Classification ? "classification" : "regression"; }

HeadKind head_from_string(const std::string& s) {
    if (s == "classification") return HeadKind::Classification;
    if (s == "regression") return HeadKind::Regression;
    throw ConfigError("unknown head '" + s + "' (expected classification or regression)");
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

std::size_t dataset_dim(const DatasetSpec& d) {
    if (d.kind == "two_moons") return 2;
    if (d.kind == "sine") return 1;
    if (d.kind == "blobs") return d.dim;
    return 0;  // csv: known only after loading
}

}  // namespace

void ExperimentConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (layers.size() < 2) throw ConfigError("model.layers needs at least input and output widths");
    for (auto w : layers)
        if (w == 0) throw ConfigError("model.layers widths must be positive");
    if (head == HeadKind::Regression && layers.back() != 1)
        throw ConfigError("regression head needs output width 1");
    if (head == HeadKind::Classification && layers.back() < 2)
        throw ConfigError("classification head needs output width >= 2");
    adv.validate();
    optimizer.validate();
    const auto& d = dataset;
    if (d.kind != "two_moons" && d.kind != "blobs" && d.kind != "sine" && d.kind != "csv")
        throw ConfigError("unknown dataset kind '" + d.kind + "'");
    if (d.kind == "csv") {
        if (d.train_path.empty() || d.test_path.empty())
            throw ConfigError("csv dataset needs train_path and test_path");
    } else {
        if (d.n_train < 1 || d.n_test < 1) throw ConfigError("dataset sizes must be >= 1");
        if (d.noise < 0.0) throw ConfigError("dataset noise must be >= 0");
        if (layers.front() != dataset_dim(d))
            throw ConfigError("model input width " + std::to_string(layers.front()) + " does not match dataset dim " +
                              std::to_string(dataset_dim(d)));
        const bool regression_data = d.kind == "sine";
        if (regression_data != (head == HeadKind::Regression))
            throw ConfigError("dataset '" + d.kind + "' does not match the " + head_name(head) + " head");
        if (d.kind == "blobs" && layers.back() != d.classes)
            throw ConfigError("output width must equal the number of blob classes");
        if (d.kind == "two_moons" && layers.back() != 2) throw ConfigError("two_moons needs output width 2");
    }
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(j, {"method", "adv", "model", "optimizer", "epochs", "batch_size", "seed", "dataset", "output_dir"},
                   "config");
    ExperimentConfig c;
    std::string s;
    if (j.contains("method")) {
        read(j, "method", s, "config");
        c.method = method_from_string(s);
    }
    if (j.contains("adv")) {
        const json& a = j["adv"];
        reject_unknown(a, {"alpha", "epsilon", "eta", "sigma", "k_steps", "norm", "proj_mode", "fd_radius_scale",
                           "detach_clean"},
                       "adv");
        read(a, "alpha", c.adv.alpha, "adv");
        read(a, "epsilon", c.adv.epsilon, "adv");
        read(a, "eta", c.adv.eta, "adv");
        read(a, "sigma", c.adv.sigma, "adv");
        read(a, "k_steps", c.adv.k_steps, "adv");
        read(a, "fd_radius_scale", c.adv.fd_radius_scale, "adv");
        read(a, "detach_clean", c.adv.detach_clean, "adv");
        if (a.contains("norm")) {
            read(a, "norm", s, "adv");
            c.adv.norm = norm_from_string(s);
        }
        if (a.contains("proj_mode")) {
            read(a, "proj_mode", s, "adv");
            c.adv.proj_mode = projection_mode_from_string(s);
        }
    }
    if (j.contains("model")) {
        const json& m = j["model"];
        reject_unknown(m, {"layers", "head"}, "model");
        read(m, "layers", c.layers, "model");
        if (m.contains("head")) {
            read(m, "head", s, "model");
            c.head = head_from_string(s);
        } else {
            c.head = !c.layers.empty() && c.layers.back() == 1 ? HeadKind::Regression : HeadKind::Classification;
        }
    }
    if (j.contains("optimizer")) {
        const json& o = j["optimizer"];
        reject_unknown(o, {"kind", "lr", "beta1", "beta2", "eps"}, "optimizer");
        if (o.contains("kind")) {
            read(o, "kind", s, "optimizer");
            c.optimizer.kind = optimizer_from_string(s);
        }
        read(o, "lr", c.optimizer.lr, "optimizer");
        read(o, "beta1", c.optimizer.beta1, "optimizer");
        read(o, "beta2", c.optimizer.beta2, "optimizer");
        read(o, "eps", c.optimizer.eps, "optimizer");
    }
    read(j, "epochs", c.epochs, "config");
    read(j, "batch_size", c.batch_size, "config");
    read(j, "seed", c.seed, "config");
    read(j, "output_dir", c.output_dir, "config");
    if (j.contains("dataset")) {
        const json& d = j["dataset"];
        reject_unknown(d, {"kind", "n_train", "n_test", "noise", "classes", "dim", "train_path", "test_path"},
                       "dataset");
        read(d, "kind", c.dataset.kind, "dataset");
        read(d, "n_train", c.dataset.n_train, "dataset");
        read(d, "n_test", c.dataset.n_test, "dataset");
        read(d, "noise", c.dataset.noise, "dataset");
        read(d, "classes", c.dataset.classes, "dataset");
        read(d, "dim", c.dataset.dim, "dataset");
        read(d, "train_path", c.dataset.train_path, "dataset");
        read(d, "test_path", c.dataset.test_path, "dataset");
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["method"] = to_string(c.method);
    j["adv"] = {{"alpha", c.adv.alpha},
                {"epsilon", c.adv.epsilon},
                {"eta", c.adv.eta},
                {"sigma", c.adv.sigma},
                {"k_steps", c.adv.k_steps},
                {"norm", to_string(c.adv.norm)},
                {"proj_mode", to_string(c.adv.proj_mode)},
                {"fd_radius_scale", c.adv.fd_radius_scale},
                {"detach_clean", c.adv.detach_clean}};
    j["model"] = {{"layers", c.layers}, {"head", head_name(c.head)}};
    j["optimizer"] = {{"kind", to_string(c.optimizer.kind)},
                      {"lr", c.optimizer.lr},
                      {"beta1", c.optimizer.beta1},
                      {"beta2", c.optimizer.beta2},
                      {"eps", c.optimizer.eps}};
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["seed"] = c.seed;
    j["dataset"] = {{"kind", c.dataset.kind},         {"n_train", c.dataset.n_train},
                    {"n_test", c.dataset.n_test},     {"noise", c.dataset.noise},
                    {"classes", c.dataset.classes},   {"dim", c.dataset.dim},
                    {"train_path", c.dataset.train_path}, {"test_path", c.dataset.test_path}};
    j["output_dir"] = c.output_dir;
    return j.dump(2);
}

std::string metrics_line(const EpochRecord& e, HeadKind head) {
    json j;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j["val_loss"] = e.val_loss;
    if (head == HeadKind::Classification) {
        j["train_acc"] = e.train_metric;
        j["val_acc"] = e.val_metric;
    } else {
        j["train_rmse"] = e.train_metric;
        j["val_rmse"] = e.val_metric;
    }
    j["reg_loss"] = e.reg_loss;
    j["interaction_ratio"] = e.interaction_ratio;
    j["ece"] = e.ece ? json(*e.ece) : json(nullptr);
    return j.dump();
}

DataSplit load_dataset(const ExperimentConfig& cfg) {
    const auto& d = cfg.dataset;
    const std::uint64_t seed = derive_seed(cfg.seed, "data");
    if (d.kind == "two_moons") return gen_two_moons(d.n_train, d.n_test, d.noise, seed);
    if (d.kind == "blobs") return gen_blobs(d.n_train, d.n_test, d.classes, d.dim, d.noise, seed);
    if (d.kind == "sine") return gen_sine_regression(d.n_train, d.n_test, d.noise, seed);
    DataSplit split{load_csv(d.train_path), load_csv(d.test_path)};
    for (const Batch* b : {&split.train, &split.test}) {
        if (b->inputs.cols != cfg.layers.front())
            throw ConfigError("csv feature count does not match model input width");
        if (b->targets.kind != cfg.head) throw ConfigError("csv target type does not match model head");
        b->validate(cfg.layers.back());
    }
    return split;
}

namespace {

struct Evaluation {
    double loss = 0.0;
    double metric = 0.0;
    std::optional<CalibrationReport> calibration;
    Predictions predictions;
};

Evaluation evaluate(const ModelParams& params, const Batch& data) {
    const ModelOutput out = mlp_forward(params, data.inputs);
    Evaluation e;
    e.loss = task_loss(out, data.targets);
    if (out.head == HeadKind::Classification) {
        const auto pred = predicted_labels(out);
        std::vector<bool> correct(pred.size());
        std::size_t hits = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            correct[i] = pred[i] == data.targets.labels[i];
            hits += correct[i] ? 1 : 0;
        }
        e.metric = static_cast<double>(hits) / static_cast<double>(pred.size());
        e.predictions = {confidence_of(out), correct};
        e.calibration = bin_predictions(e.predictions.confidences, correct);
    } else {
        e.metric = std::sqrt(e.loss);
    }
    return e;
}

Batch gather(const Batch& data, std::span<const std::size_t> idx) {
    Batch b;
    b.inputs = Matrix(idx.size(), data.inputs.cols);
    b.targets.kind = data.targets.kind;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto src = data.inputs.row(idx[r]);
        std::copy(src.begin(), src.end(), b.inputs.row(r).begin());
        if (data.targets.kind == HeadKind::Classification)
            b.targets.labels.push_back(data.targets.labels[idx[r]]);
        else
            b.targets.values.push_back(data.targets.values[idx[r]]);
    }
    return b;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
}

}  // namespace

RunRecord run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const DataSplit data = load_dataset(cfg);
    const RegularizerKind kind = regularizer_for(cfg.head);

    ModelParams params = ModelParams::random(cfg.layers, derive_seed(cfg.seed, "init"));
    OptimizerState opt = OptimizerState::create(cfg.optimizer, params.size());
    std::mt19937_64 order_gen(derive_seed(cfg.seed, "order"));
    const std::uint64_t delta_stream = derive_seed(cfg.seed, "delta");

    std::filesystem::path dir;
    std::ofstream metrics, timing;
    if (!cfg.output_dir.empty()) {
        dir = cfg.output_dir;
        std::filesystem::create_directories(dir);
        write_text(dir / "config.json", config_to_json(cfg) + "\n");
        metrics.open(dir / "metrics.jsonl", std::ios::binary | std::ios::trunc);
        timing.open(dir / "timing.jsonl", std::ios::binary | std::ios::trunc);
        if (!metrics || !timing) throw IoError("cannot open metric files in " + dir.string());
    }

    RunRecord record;
    record.head = cfg.head;
    const std::size_t n = data.train.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::uint64_t global_step = 0;
    Evaluation last_val;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), order_gen);
        double reg_sum = 0.0, ratio_sum = 0.0;
        std::size_t steps = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            const Batch batch = gather(data.train, std::span(order).subspan(start, stop - start));
            const std::uint64_t seed = derive_seed(delta_stream, global_step++);
            TrainStep step;
            switch (cfg.method) {
                case Method::ERM: step = erm_training_step(params, batch, std::move(opt)); break;
                case Method::Adv: step = adv_training_step(params, batch, cfg.adv, std::move(opt), seed); break;
                case Method::VAT: step = vat_training_step(params, batch, cfg.adv, kind, std::move(opt), seed); break;
                case Method::SALT:
                    step = salt_training_step(params, batch, cfg.adv, kind, std::move(opt), seed);
                    break;
            }
            params = std::move(step.params);
            opt = std::move(step.optimizer);
            reg_sum += step.stats.reg_loss;
            ratio_sum += step.stats.interaction_ratio;
            ++steps;
        }
        const Evaluation train_eval = evaluate(params, data.train);
        last_val = evaluate(params, data.test);
        EpochRecord e;
        e.epoch = epoch;
        e.train_loss = train_eval.loss;
        e.val_loss = last_val.loss;
        e.train_metric = train_eval.metric;
        e.val_metric = last_val.metric;
        e.reg_loss = reg_sum / static_cast<double>(steps);
        e.interaction_ratio = ratio_sum / static_cast<double>(steps);
        if (last_val.calibration) e.ece = last_val.calibration->ece;
        e.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        record.epochs.push_back(e);
        if (metrics.is_open()) {
            metrics << metrics_line(e, cfg.head) << '\n' << std::flush;
            timing << json{{"epoch", e.epoch}, {"wall_seconds", e.wall_seconds}}.dump() << '\n' << std::flush;
        }
    }

    record.final_params = params;
    if (!dir.empty()) {
        record.checkpoint_path = (dir / "checkpoint.json").string();
        save_checkpoint(params, record.checkpoint_path);
        if (last_val.calibration) {
            write_reliability_csv(*last_val.calibration, (dir / "reliability.csv").string());
            write_text(dir / "predictions.csv", predictions_csv(last_val.predictions));
        }
    }
    return record;
}

SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "k_steps") return SweepAxis::KSteps;
    if (s == "epsilon") return SweepAxis::Epsilon;
    if (s == "norm") return SweepAxis::Norm;
    throw ConfigError("unknown sweep axis '" + s + "' (expected k_steps, epsilon or norm)");
}

std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::KSteps: return "k_steps";
        case SweepAxis::Epsilon: return "epsilon";
        case SweepAxis::Norm: return "norm";
    }
    return "?";
}

ExperimentConfig apply_axis(ExperimentConfig cfg, SweepAxis axis, const std::string& value) {
    try {
        std::size_t used = 0;
        switch (axis) {
            case SweepAxis::KSteps:
                cfg.adv.k_steps = std::stoi(value, &used);
                break;
            case SweepAxis::Epsilon:
                cfg.adv.epsilon = std::stod(value, &used);
                break;
            case SweepAxis::Norm:
                cfg.adv.norm = norm_from_string(value);
                used = value.size();
                break;
        }
        if (used != value.size()) throw ConfigError("");
    } catch (const std::logic_error&) {
        throw ConfigError("invalid value '" + value + "' for sweep axis " + to_string(axis));
    }
    cfg.validate();
    return cfg;
}

namespace {

SweepMetrics final_metrics(const RunRecord& r) {
    const EpochRecord& last = r.epochs.back();
    return {last.train_loss, last.val_loss, last.val_metric, last.ece.value_or(0.0)};
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_');
    return out;
}

}  // namespace

std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::string>& values,
                            const std::vector<std::uint64_t>& seeds, int threads) {
    require(!values.empty() && !seeds.empty(), "sweep needs at least one value and one seed");
    struct Job {
        ExperimentConfig cfg;
        std::size_t row;
        bool linf;
    };
    std::vector<SweepRow> rows;
    std::vector<Job> jobs;
    for (const auto& v : values) {
        const ExperimentConfig with_value = apply_axis(base, axis, v);
        for (std::uint64_t s : seeds) {
            ExperimentConfig c = with_value;
            c.seed = s;
            const std::size_t row = rows.size();
            rows.push_back({v, s, {}, std::nullopt});
            const std::string run = to_string(axis) + "=" + sanitize(v) + "/seed=" + std::to_string(s);
            if (axis == SweepAxis::Epsilon) {
                ExperimentConfig l2 = c, linf = c;
                l2.adv.norm = NormKind::L2;
                linf.adv.norm = NormKind::LInf;
                if (!base.output_dir.empty()) {
                    l2.output_dir = (std::filesystem::path(base.output_dir) / (run + "/L2")).string();
                    linf.output_dir = (std::filesystem::path(base.output_dir) / (run + "/LInf")).string();
                }
                jobs.push_back({l2, row, false});
                jobs.push_back({linf, row, true});
            } else {
                if (!base.output_dir.empty())
                    c.output_dir = (std::filesystem::path(base.output_dir) / run).string();
                jobs.push_back({c, row, false});
            }
        }
    }

    std::vector<SweepMetrics> results(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                results[i] = final_metrics(run_experiment(jobs[i].cfg));
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    const std::size_t nthreads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, jobs.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (jobs[i].linf)
            rows[jobs[i].row].linf = results[i];
        else
            rows[jobs[i].row].metrics = results[i];
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, SweepAxis axis) {
    std::string s = "axis_value,seed,final_train_loss,final_val_loss,final_val_acc,ece";
    const bool both = axis == SweepAxis::Epsilon;
    if (both) s += ",final_train_loss_linf,final_val_loss_linf,final_val_acc_linf,ece_linf";
    s += "\n";
    auto cells = [](const SweepMetrics& m) {
        return csv::format_double(m.final_train_loss) + "," + csv::format_double(m.final_val_loss) + "," +
               csv::format_double(m.final_val_acc) + "," + csv::format_double(m.ece);
    };
    for (const auto& r : rows) {
        s += r.axis_value + "," + std::to_string(r.seed) + "," + cells(r.metrics);
        if (both) s += "," + cells(r.linf.value_or(SweepMetrics{}));
        s += "\n";
    }
    return s;
}

int sweep_threads_from_env() {
    const char* v = std::getenv("SALT_THREADS");
    if (v == nullptr || *v == '\0') return 1;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1) throw ConfigError("SALT_THREADS must be a positive integer");
    return static_cast<int>(n);
}

}  // namespace salt
