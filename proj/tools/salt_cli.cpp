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


// Command-line front end. Talks to the library only through salt.h.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "salt/salt.h"

namespace {

int report(salt_status status) {
    std::fprintf(stderr, "error: %s: %s\n", salt_status_string(status), salt_last_error());
    return status == SALT_ERR_INTERNAL ? 3 : 2;
}

// Two-call text retrieval: size query, then copy.
template <class F>
salt_status fetch_text(F&& call, std::string& out) {
    std::size_t needed = 0;
    salt_status s = call(nullptr, 0, &needed);
    if (s != SALT_OK) return s;
    std::vector<char> buf(needed);
    s = call(buf.data(), buf.size(), &needed);
    if (s == SALT_OK) out.assign(buf.data());
    return s;
}

int cmd_train(const std::string& config, const std::string& out_dir, bool quiet) {
    salt_run* run = nullptr;
    salt_status s = salt_train(config.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), &run);
    if (s != SALT_OK) return report(s);
    std::size_t epochs = 0;
    s = salt_run_epoch_count(run, &epochs);
    for (std::size_t e = 0; s == SALT_OK && e < epochs; ++e) {
        if (quiet && e + 1 != epochs) continue;
        std::string line;
        s = fetch_text([&](char* b, std::size_t n, std::size_t* need) { return salt_run_metrics_line(run, e, b, n, need); },
                       line);
        if (s == SALT_OK) std::printf("%s\n", line.c_str());
    }
    salt_run_free(run);
    return s == SALT_OK ? 0 : report(s);
}

int cmd_gradcheck(int k, std::uint64_t seed, int instances) {
    salt_gradcheck_report* r = nullptr;
    salt_status s = salt_gradcheck(k, seed, instances, &r);
    if (s != SALT_OK) return report(s);
    std::string text;
    int passed = 0;
    s = fetch_text([&](char* b, std::size_t n, std::size_t* need) { return salt_gradcheck_text(r, b, n, need); }, text);
    if (s == SALT_OK) s = salt_gradcheck_passed(r, &passed);
    salt_gradcheck_free(r);
    if (s != SALT_OK) return report(s);
    std::fputs(text.c_str(), stdout);
    return passed ? 0 : 1;
}

int cmd_sweep(const std::string& config, const std::string& axis, const std::string& values, const std::string& seeds,
              int threads, const std::string& out_dir) {
    salt_text* csv = nullptr;
    const salt_status s = salt_sweep(config.c_str(), axis.c_str(), values.c_str(), seeds.c_str(), threads,
                                     out_dir.empty() ? nullptr : out_dir.c_str(), &csv);
    if (s != SALT_OK) return report(s);
    std::fputs(salt_text_data(csv), stdout);
    salt_text_free(csv);
    return 0;
}

int cmd_calibrate(const std::string& predictions, std::size_t bins, bool equal_mass, const std::string& out_csv) {
    salt_text* csv = nullptr;
    double ece = 0.0;
    const salt_status s = salt_calibrate(predictions.c_str(), bins, equal_mass ? 1 : 0,
                                         out_csv.empty() ? nullptr : out_csv.c_str(), &ece, &csv);
    if (s != SALT_OK) return report(s);
    std::printf("ece %.17g\n", ece);
    std::fputs(salt_text_data(csv), stdout);
    salt_text_free(csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stackelberg adversarial regularization toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(salt_version()));

    std::string config, out_dir, axis, values, seeds = "0", predictions, out_csv;
    bool quiet = false, equal_mass = false;
    int k = -1, instances = 20, threads = 0;
    std::uint64_t seed = 0;
    std::size_t bins = 10;

    auto* train = app.add_subcommand("train", "Train one model from a JSON config");
    train->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
    train->add_option("--out", out_dir, "Output directory (overrides the config)");
    train->add_flag("--quiet", quiet, "Print only the final epoch");

    auto* gradcheck = app.add_subcommand("gradcheck", "Check the Stackelberg gradient against finite differences");
    gradcheck->add_option("--k", k, "Unroll depth 1-3 (default: cycle)")->check(CLI::Range(1, 3));
    gradcheck->add_option("--seed", seed, "Seed");
    gradcheck->add_option("--instances", instances, "Number of random instances")->check(CLI::PositiveNumber);

    auto* sweep = app.add_subcommand("sweep", "Sweep one hyperparameter and write sweep.csv");
    sweep->add_option("--axis", axis, "k_steps, epsilon or norm")->required();
    sweep->add_option("--values", values, "Comma separated values")->required();
    sweep->add_option("--config", config, "Base config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--seeds", seeds, "Comma separated seeds");
    sweep->add_option("--threads", threads, "Worker threads (default: SALT_THREADS or 1)");
    sweep->add_option("--out", out_dir, "Output directory (overrides the config)");

    auto* calibrate = app.add_subcommand("calibrate", "Expected calibration error of a predictions CSV");
    calibrate->add_option("--predictions", predictions, "CSV with confidence,correct")->required();
    calibrate->add_option("--bins", bins, "Number of bins")->check(CLI::PositiveNumber);
    calibrate->add_flag("--equal-mass-bins", equal_mass, "Equal-count bins instead of equal-width");
    calibrate->add_option("--out", out_csv, "Write the reliability table here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*train) return cmd_train(config, out_dir, quiet);
    if (*gradcheck) return cmd_gradcheck(k, seed, instances);
    if (*sweep) return cmd_sweep(config, axis, values, seeds, threads, out_dir);
    return cmd_calibrate(predictions, bins, equal_mass, out_csv);
}
