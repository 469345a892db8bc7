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


// Exercises the shared library through its C header only.

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "salt/salt.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("salt_capi_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST_CASE("status strings and defaults") {
    CHECK(std::strlen(salt_version()) > 0);
    for (int s = SALT_OK; s <= SALT_ERR_INTERNAL; ++s)
        CHECK(std::strlen(salt_status_string(static_cast<salt_status>(s))) > 0);
    salt_adv_config cfg;
    salt_adv_config_default(&cfg);
    CHECK(cfg.alpha == 1.0);
    CHECK(cfg.epsilon == 1.0);
    CHECK(cfg.eta == 1e-3);
    CHECK(cfg.sigma == 1e-4);
    CHECK(cfg.k_steps == 2);
    CHECK(cfg.norm == SALT_NORM_L2);
    CHECK(cfg.proj_mode == SALT_PROJ_EXACT_JACOBIAN);
}

TEST_CASE("model handles") {
    const size_t layers[] = {3, 5, 2};
    salt_model* m = nullptr;
    REQUIRE(salt_model_create(layers, 3, 4, &m) == SALT_OK);
    size_t p = 0, out_dim = 0;
    CHECK(salt_model_param_count(m, &p) == SALT_OK);
    CHECK(p == 3 * 5 + 5 + 5 * 2 + 2);
    CHECK(salt_model_output_dim(m, &out_dim) == SALT_OK);
    CHECK(out_dim == 2);

    std::vector<double> theta(p);
    CHECK(salt_model_get_params(m, theta.data(), p) == SALT_OK);
    CHECK(salt_model_get_params(m, theta.data(), p - 1) == SALT_ERR_INVALID_ARGUMENT);
    CHECK(std::strlen(salt_last_error()) > 0);

    const double x[] = {0.1, -0.2, 0.3, 1.0, 0.5, -0.5};
    std::vector<double> y(4);
    CHECK(salt_model_forward(m, x, 2, 3, y.data(), y.size()) == SALT_OK);
    CHECK(salt_model_forward(m, x, 3, 2, y.data(), y.size()) == SALT_ERR_INVALID_ARGUMENT);
    CHECK(salt_model_forward(m, x, 2, 3, y.data(), 3) == SALT_ERR_INVALID_ARGUMENT);

    const fs::path dir = scratch("model");
    const std::string path = (dir / "ckpt.json").string();
    CHECK(salt_model_save(m, path.c_str()) == SALT_OK);
    salt_model* back = nullptr;
    REQUIRE(salt_model_load(path.c_str(), &back) == SALT_OK);
    std::vector<double> y2(4), theta2(p);
    CHECK(salt_model_forward(back, x, 2, 3, y2.data(), y2.size()) == SALT_OK);
    CHECK(y2 == y);
    CHECK(salt_model_get_params(back, theta2.data(), p) == SALT_OK);
    CHECK(theta2 == theta);

    theta2[0] += 1.0;
    CHECK(salt_model_set_params(back, theta2.data(), p) == SALT_OK);
    CHECK(salt_model_forward(back, x, 2, 3, y2.data(), y2.size()) == SALT_OK);
    CHECK_FALSE(y2 == y);
    CHECK(salt_model_set_params(back, theta2.data(), p + 1) == SALT_ERR_INVALID_ARGUMENT);

    CHECK(salt_model_load((dir / "missing.json").string().c_str(), &back) == SALT_ERR_IO);
    write(dir / "broken.json", "{\"layers\": [");
    salt_model* broken = nullptr;
    CHECK(salt_model_load((dir / "broken.json").string().c_str(), &broken) == SALT_ERR_PARSE);
    CHECK(broken == nullptr);

    const size_t bad_layers[] = {3};
    salt_model* bad = nullptr;
    CHECK(salt_model_create(bad_layers, 1, 0, &bad) == SALT_ERR_INVALID_ARGUMENT);
    CHECK(salt_model_create(layers, 3, 0, nullptr) == SALT_ERR_INVALID_ARGUMENT);
    CHECK(salt_model_param_count(nullptr, &p) == SALT_ERR_INVALID_ARGUMENT);

    salt_model_free(back);
    salt_model_free(m);
    salt_model_free(nullptr);
    fs::remove_all(dir);
}

TEST_CASE("stackelberg gradient") {
    const size_t layers[] = {2, 6, 3};
    salt_model* m = nullptr;
    REQUIRE(salt_model_create(layers, 3, 11, &m) == SALT_OK);
    size_t p = 0;
    salt_model_param_count(m, &p);
    const double x[] = {0.3, -0.7, 1.1, 0.2, -0.4, 0.9};
    const int labels[] = {0, 2, 1};
    salt_adv_config cfg;
    salt_adv_config_default(&cfg);
    cfg.eta = 0.5;
    cfg.sigma = 0.3;
    cfg.detach_clean = 0;

    std::vector<double> total(p), leader(p), inter(p), exact(p);
    REQUIRE(salt_stackelberg_gradient(m, x, 3, 2, labels, nullptr, &cfg, 5, 0, total.data(), leader.data(),
                                      inter.data(), p) == SALT_OK);
    double inter_norm = 0.0;
    for (size_t j = 0; j < p; ++j) {
        CHECK(total[j] == leader[j] + inter[j]);
        inter_norm += inter[j] * inter[j];
    }
    CHECK(inter_norm > 0.0);
    REQUIRE(salt_stackelberg_gradient(m, x, 3, 2, labels, nullptr, &cfg, 5, 1, exact.data(), nullptr, nullptr, p) ==
            SALT_OK);
    for (size_t j = 0; j < p; ++j) CHECK(exact[j] == doctest::Approx(total[j]).epsilon(1e-5).scale(1e-5));

    cfg.k_steps = 0;
    REQUIRE(salt_stackelberg_gradient(m, x, 3, 2, labels, nullptr, &cfg, 5, 0, total.data(), leader.data(),
                                      inter.data(), p) == SALT_OK);
    for (size_t j = 0; j < p; ++j) CHECK(inter[j] == 0.0);

    CHECK(salt_stackelberg_gradient(m, x, 3, 2, nullptr, nullptr, &cfg, 5, 0, total.data(), nullptr, nullptr, p) ==
          SALT_ERR_INVALID_ARGUMENT);
    cfg.epsilon = -1.0;
    CHECK(salt_stackelberg_gradient(m, x, 3, 2, labels, nullptr, &cfg, 5, 0, total.data(), nullptr, nullptr, p) ==
          SALT_ERR_CONFIG);
    const int bad_labels[] = {0, 3, 1};
    salt_adv_config_default(&cfg);
    CHECK(salt_stackelberg_gradient(m, x, 3, 2, bad_labels, nullptr, &cfg, 5, 0, total.data(), nullptr, nullptr,
                                    p) == SALT_ERR_INVALID_ARGUMENT);
    salt_model_free(m);
}

TEST_CASE("train, metrics and buffer sizing") {
    const fs::path dir = scratch("train");
    write(dir / "config.json", R"({"method": "SALT", "epochs": 3, "batch_size": 10,
        "model": {"layers": [2, 6, 2]}, "dataset": {"n_train": 30, "n_test": 30}})");
    salt_run* run = nullptr;
    REQUIRE(salt_train((dir / "config.json").string().c_str(), (dir / "out").string().c_str(), &run) == SALT_OK);
    size_t epochs = 0;
    CHECK(salt_run_epoch_count(run, &epochs) == SALT_OK);
    CHECK(epochs == 3);

    size_t needed = 0;
    CHECK(salt_run_metrics_line(run, 0, nullptr, 0, &needed) == SALT_OK);
    CHECK(needed > 1);
    std::vector<char> small(needed - 1);
    CHECK(salt_run_metrics_line(run, 0, small.data(), small.size(), &needed) == SALT_ERR_BUFFER_TOO_SMALL);
    std::vector<char> buf(needed);
    CHECK(salt_run_metrics_line(run, 0, buf.data(), buf.size(), &needed) == SALT_OK);
    const std::string line(buf.data());
    CHECK(line.size() + 1 == needed);
    CHECK(line.rfind("{\"epoch\":1,", 0) == 0);
    CHECK(salt_run_metrics_line(run, 3, buf.data(), buf.size(), &needed) == SALT_ERR_INVALID_ARGUMENT);

    std::ifstream in(dir / "out" / "metrics.jsonl");
    std::string first;
    std::getline(in, first);
    CHECK(first == line);
    salt_run_free(run);

    write(dir / "unknown.json", R"({"epochs": 3, "learning_rate": 0.1})");
    salt_run* none = nullptr;
    CHECK(salt_train((dir / "unknown.json").string().c_str(), nullptr, &none) == SALT_ERR_CONFIG);
    CHECK(std::string(salt_last_error()).find("learning_rate") != std::string::npos);
    CHECK(none == nullptr);
    CHECK(salt_train((dir / "nope.json").string().c_str(), nullptr, &none) == SALT_ERR_IO);
    fs::remove_all(dir);
}

TEST_CASE("sweep") {
    const fs::path dir = scratch("sweep");
    write(dir / "config.json", R"({"epochs": 1, "batch_size": 10, "model": {"layers": [2, 4, 2]},
        "dataset": {"n_train": 20, "n_test": 20}})");
    const std::string cfg = (dir / "config.json").string();
    salt_text* csv = nullptr;
    REQUIRE(salt_sweep(cfg.c_str(), "k_steps", "1,2", "0,1", 2, (dir / "out").string().c_str(), &csv) == SALT_OK);
    const std::string text(salt_text_data(csv), salt_text_size(csv));
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
    std::ifstream in(dir / "out" / "sweep.csv", std::ios::binary);
    CHECK(std::string(std::istreambuf_iterator<char>(in), {}) == text);
    salt_text_free(csv);

    CHECK(salt_sweep(cfg.c_str(), "width", "1", "0", 1, nullptr, &csv) == SALT_ERR_CONFIG);
    CHECK(salt_sweep(cfg.c_str(), "k_steps", "1,x", "0", 1, nullptr, &csv) == SALT_ERR_CONFIG);
    fs::remove_all(dir);
}

TEST_CASE("gradcheck") {
    salt_gradcheck_report* r = nullptr;
    REQUIRE(salt_gradcheck(-1, 3, 4, &r) == SALT_OK);
    int passed = 0;
    CHECK(salt_gradcheck_passed(r, &passed) == SALT_OK);
    CHECK(passed == 1);
    size_t needed = 0;
    CHECK(salt_gradcheck_text(r, nullptr, 0, &needed) == SALT_OK);
    std::vector<char> buf(needed);
    CHECK(salt_gradcheck_text(r, buf.data(), buf.size(), &needed) == SALT_OK);
    CHECK(std::string(buf.data()).find("PASS") != std::string::npos);
    salt_gradcheck_free(r);
    CHECK(salt_gradcheck(0, 3, 0, &r) == SALT_ERR_INVALID_ARGUMENT);
}

TEST_CASE("calibrate") {
    const fs::path dir = scratch("calibrate");
    write(dir / "pred.csv", "confidence,correct\n0.95,1\n0.95,1\n0.95,0\n0.95,1\n0.55,1\n0.55,0\n");
    double ece = -1.0;
    salt_text* csv = nullptr;
    const std::string out = (dir / "rel.csv").string();
    REQUIRE(salt_calibrate((dir / "pred.csv").string().c_str(), 10, 0, out.c_str(), &ece, &csv) == SALT_OK);
    CHECK(ece == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(fs::exists(out));
    CHECK(std::string(salt_text_data(csv)).rfind("bin_lower,bin_upper,count", 0) == 0);
    salt_text_free(csv);
    CHECK(salt_calibrate((dir / "pred.csv").string().c_str(), 0, 0, nullptr, &ece, nullptr) ==
          SALT_ERR_INVALID_ARGUMENT);
    write(dir / "bad.csv", "confidence,correct\n1.5,1\n");
    CHECK(salt_calibrate((dir / "bad.csv").string().c_str(), 10, 0, nullptr, &ece, nullptr) == SALT_ERR_PARSE);
    fs::remove_all(dir);
}
