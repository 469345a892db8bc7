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


#include "salt/salt.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "salt/calibration.hpp"
#include "salt/experiment.hpp"
#include "salt/gradcheck.hpp"
#include "salt/salt.hpp"

struct salt_model {
    salt::ModelParams params;
};

struct salt_run {
    salt::RunRecord record;
};

struct salt_gradcheck_report {
    salt::GradcheckReport report;
};

struct salt_text {
    std::string value;
};

namespace {

thread_local std::string last_error;

struct BufferTooSmall {};

salt_status fail(salt_status status, const std::string& message) {
    last_error = message;
    return status;
}

// Runs body and maps exceptions to status codes.
template <class F>
salt_status guarded(F&& body) {
    last_error.clear();
    try {
        body();
        return SALT_OK;
    } catch (const BufferTooSmall&) {
        return fail(SALT_ERR_BUFFER_TOO_SMALL, "output buffer too small");
    } catch (const salt::ParseError& e) {
        return fail(SALT_ERR_PARSE, e.what());
    } catch (const salt::ConfigError& e) {
        return fail(SALT_ERR_CONFIG, e.what());
    } catch (const salt::RefusedError& e) {
        return fail(SALT_ERR_REFUSED, e.what());
    } catch (const salt::IoError& e) {
        return fail(SALT_ERR_IO, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(SALT_ERR_IO, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(SALT_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(SALT_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SALT_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SALT_ERR_INTERNAL, "unknown error");
    }
}

void copy_out(const std::string& text, char* buf, std::size_t len, std::size_t* needed) {
    if (needed != nullptr) *needed = text.size() + 1;
    if (buf == nullptr) return;
    if (len < text.size() + 1) throw BufferTooSmall{};
    std::memcpy(buf, text.c_str(), text.size() + 1);
}

void need(const void* p, const char* what) {
    salt::require(p != nullptr, std::string(what) + " must not be NULL");
}

salt::AdvConfig to_core(const salt_adv_config& c) {
    salt::AdvConfig a;
    a.alpha = c.alpha;
    a.epsilon = c.epsilon;
    a.eta = c.eta;
    a.sigma = c.sigma;
    a.k_steps = c.k_steps;
    salt::require(c.norm == SALT_NORM_L2 || c.norm == SALT_NORM_LINF, "unknown norm");
    salt::require(c.proj_mode == SALT_PROJ_EXACT_JACOBIAN || c.proj_mode == SALT_PROJ_STRAIGHT_THROUGH,
                  "unknown projection mode");
    a.norm = c.norm == SALT_NORM_L2 ? salt::NormKind::L2 : salt::NormKind::LInf;
    a.proj_mode = c.proj_mode == SALT_PROJ_EXACT_JACOBIAN ? salt::ProjectionMode::ExactJacobian
                                                          : salt::ProjectionMode::StraightThrough;
    a.fd_radius_scale = c.fd_radius_scale;
    a.detach_clean = c.detach_clean != 0;
    return a;
}

salt::Matrix read_inputs(const double* inputs, std::size_t n, std::size_t d) {
    need(inputs, "inputs");
    salt::require(n > 0 && d > 0, "inputs must be non-empty");
    return salt::Matrix(n, d, salt::Vector(inputs, inputs + n * d));
}

std::vector<std::string> split_list(const char* text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw salt::ConfigError("empty entry in list '" + std::string(text) + "'");
        out.push_back(item.substr(b, e - b + 1));
    }
    if (out.empty()) throw salt::ConfigError("empty list");
    return out;
}

}  // namespace

extern "C" {

const char* salt_version(void) { return "1.0.0"; }

const char* salt_status_string(salt_status status) {
    switch (status) {
        case SALT_OK: return "ok";
        case SALT_ERR_INVALID_ARGUMENT: return "invalid argument";
        case SALT_ERR_PARSE: return "parse error";
        case SALT_ERR_CONFIG: return "configuration error";
        case SALT_ERR_REFUSED: return "refused";
        case SALT_ERR_IO: return "i/o error";
        case SALT_ERR_BUFFER_TOO_SMALL: return "buffer too small";
        case SALT_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* salt_last_error(void) { return last_error.c_str(); }

void salt_adv_config_default(salt_adv_config* cfg) {
    if (cfg == nullptr) return;
    const salt::AdvConfig d;
    cfg->alpha = d.alpha;
    cfg->epsilon = d.epsilon;
    cfg->eta = d.eta;
    cfg->sigma = d.sigma;
    cfg->k_steps = d.k_steps;
    cfg->norm = SALT_NORM_L2;
    cfg->proj_mode = SALT_PROJ_EXACT_JACOBIAN;
    cfg->fd_radius_scale = d.fd_radius_scale;
    cfg->detach_clean = d.detach_clean ? 1 : 0;
}

const char* salt_text_data(const salt_text* text) { return text == nullptr ? "" : text->value.c_str(); }

size_t salt_text_size(const salt_text* text) { return text == nullptr ? 0 : text->value.size(); }

void salt_text_free(salt_text* text) { delete text; }

salt_status salt_model_create(const size_t* layers, size_t n_layers, uint64_t seed, salt_model** out) {
    return guarded([&] {
        need(layers, "layers");
        need(out, "out");
        *out = nullptr;
        salt::require(n_layers >= 2, "need at least input and output widths");
        *out = new salt_model{salt::ModelParams::random(std::vector<std::size_t>(layers, layers + n_layers), seed)};
    });
}

salt_status salt_model_load(const char* path, salt_model** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        *out = new salt_model{salt::load_checkpoint(path)};
    });
}

salt_status salt_model_save(const salt_model* model, const char* path) {
    return guarded([&] {
        need(model, "model");
        need(path, "path");
        salt::save_checkpoint(model->params, path);
    });
}

void salt_model_free(salt_model* model) { delete model; }

salt_status salt_model_param_count(const salt_model* model, size_t* out) {
    return guarded([&] {
        need(model, "model");
        need(out, "out");
        *out = model->params.size();
    });
}

salt_status salt_model_output_dim(const salt_model* model, size_t* out) {
    return guarded([&] {
        need(model, "model");
        need(out, "out");
        *out = model->params.output_dim();
    });
}

salt_status salt_model_get_params(const salt_model* model, double* out, size_t len) {
    return guarded([&] {
        need(model, "model");
        need(out, "out");
        salt::require(len == model->params.size(), "parameter buffer length mismatch");
        std::copy(model->params.values.begin(), model->params.values.end(), out);
    });
}

salt_status salt_model_set_params(salt_model* model, const double* values, size_t len) {
    return guarded([&] {
        need(model, "model");
        need(values, "values");
        salt::require(len == model->params.size(), "parameter buffer length mismatch");
        salt::ModelParams next{salt::Vector(values, values + len), model->params.shapes};
        next.validate();
        model->params = std::move(next);
    });
}

salt_status salt_model_forward(const salt_model* model, const double* inputs, size_t n, size_t d, double* out,
                               size_t out_len) {
    return guarded([&] {
        need(model, "model");
        need(out, "out");
        const salt::ModelOutput y = salt::mlp_forward(model->params, read_inputs(inputs, n, d));
        salt::require(out_len == y.values.size(), "output buffer length mismatch");
        std::copy(y.values.data.begin(), y.values.data.end(), out);
    });
}

salt_status salt_stackelberg_gradient(const salt_model* model, const double* inputs, size_t n, size_t d,
                                      const int* labels, const double* targets, const salt_adv_config* cfg,
                                      uint64_t seed, int exact_second_order, double* total, double* leader,
                                      double* interaction, size_t len) {
    return guarded([&] {
        need(model, "model");
        need(cfg, "cfg");
        need(total, "total");
        const salt::ModelParams& p = model->params;
        salt::require(len == p.size(), "gradient buffer length mismatch");
        salt::Batch batch;
        batch.inputs = read_inputs(inputs, n, d);
        batch.targets.kind = p.head();
        if (p.head() == salt::HeadKind::Classification) {
            need(labels, "labels");
            batch.targets.labels.assign(labels, labels + n);
        } else {
            need(targets, "targets");
            batch.targets.values.assign(targets, targets + n);
        }
        const auto source =
            exact_second_order != 0 ? salt::SecondOrderSource::Exact : salt::SecondOrderSource::FiniteDifference;
        const salt::StackelbergResult r =
            salt::stackelberg_gradient(p, batch, to_core(*cfg), salt::regularizer_for(p.head()), seed, source);
        std::copy(r.grad.total.begin(), r.grad.total.end(), total);
        if (leader != nullptr) std::copy(r.grad.leader_part.begin(), r.grad.leader_part.end(), leader);
        if (interaction != nullptr)
            std::copy(r.grad.interaction_part.begin(), r.grad.interaction_part.end(), interaction);
    });
}

salt_status salt_train(const char* config_path, const char* output_dir, salt_run** out) {
    return guarded([&] {
        need(config_path, "config_path");
        need(out, "out");
        *out = nullptr;
        salt::ExperimentConfig cfg = salt::load_config(config_path);
        if (output_dir != nullptr) cfg.output_dir = output_dir;
        *out = new salt_run{salt::run_experiment(cfg)};
    });
}

void salt_run_free(salt_run* run) { delete run; }

salt_status salt_run_epoch_count(const salt_run* run, size_t* out) {
    return guarded([&] {
        need(run, "run");
        need(out, "out");
        *out = run->record.epochs.size();
    });
}

salt_status salt_run_metrics_line(const salt_run* run, size_t epoch_index, char* buf, size_t len, size_t* needed) {
    return guarded([&] {
        need(run, "run");
        salt::require(epoch_index < run->record.epochs.size(), "epoch index out of range");
        copy_out(salt::metrics_line(run->record.epochs[epoch_index], run->record.head), buf, len, needed);
    });
}

salt_status salt_sweep(const char* config_path, const char* axis, const char* values, const char* seeds,
                       int threads, const char* output_dir, salt_text** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        need(config_path, "config_path");
        need(axis, "axis");
        need(values, "values");
        need(seeds, "seeds");
        salt::ExperimentConfig cfg = salt::load_config(config_path);
        if (output_dir != nullptr) cfg.output_dir = output_dir;
        const salt::SweepAxis a = salt::sweep_axis_from_string(axis);
        std::vector<std::uint64_t> seed_list;
        for (const auto& s : split_list(seeds)) {
            std::size_t used = 0;
            unsigned long long v = 0;
            try {
                v = std::stoull(s, &used);
            } catch (const std::logic_error&) {
                used = 0;
            }
            if (used != s.size() || s.front() == '-') throw salt::ConfigError("invalid seed '" + s + "'");
            seed_list.push_back(v);
        }
        const int n_threads = threads > 0 ? threads : salt::sweep_threads_from_env();
        const auto rows = salt::sweep(cfg, a, split_list(values), seed_list, n_threads);
        const std::string csv = salt::sweep_csv(rows, a);
        if (!cfg.output_dir.empty()) {
            std::filesystem::create_directories(cfg.output_dir);
            const auto path = std::filesystem::path(cfg.output_dir) / "sweep.csv";
            std::ofstream f(path, std::ios::binary | std::ios::trunc);
            if (!f) throw salt::IoError("cannot write " + path.string());
            f << csv;
        }
        *out = new salt_text{csv};
    });
}

salt_status salt_gradcheck(int k, uint64_t seed, int instances, salt_gradcheck_report** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        salt::GradcheckOptions o;
        o.k = k;
        o.seed = seed;
        o.instances = instances;
        *out = new salt_gradcheck_report{salt::run_gradcheck(o)};
    });
}

void salt_gradcheck_free(salt_gradcheck_report* report) { delete report; }

salt_status salt_gradcheck_passed(const salt_gradcheck_report* report, int* passed) {
    return guarded([&] {
        need(report, "report");
        need(passed, "passed");
        *passed = salt::gradcheck_passed(report->report) ? 1 : 0;
    });
}

salt_status salt_gradcheck_text(const salt_gradcheck_report* report, char* buf, size_t len, size_t* needed) {
    return guarded([&] {
        need(report, "report");
        copy_out(salt::format_gradcheck(report->report), buf, len, needed);
    });
}

salt_status salt_calibrate(const char* predictions_csv, size_t bins, int equal_mass, const char* out_csv,
                           double* ece, salt_text** out) {
    return guarded([&] {
        if (out != nullptr) *out = nullptr;
        need(predictions_csv, "predictions_csv");
        salt::require(bins >= 1, "bins must be >= 1");
        const salt::Predictions p = salt::load_predictions_csv(predictions_csv);
        const auto report = salt::bin_predictions(
            p.confidences, p.correct, bins,
            equal_mass != 0 ? salt::BinningScheme::EqualMass : salt::BinningScheme::EqualWidth);
        if (ece != nullptr) *ece = report.ece;
        if (out_csv != nullptr) salt::write_reliability_csv(report, out_csv);
        if (out != nullptr) *out = new salt_text{salt::reliability_csv(report)};
    });
}

}  // extern "C"
