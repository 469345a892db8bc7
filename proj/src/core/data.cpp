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

#include "salt/data.hpp"

#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "csv.hpp"
#include "salt/rng.hpp"

namespace salt {

Batch two_moons(std::size_t n, double noise_std, std::uint64_t seed) {
    require(noise_std >= 0.0, "noise_std must be >= 0");
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::normal_distribution<double> noise(0.0, 1.0);
    Batch b{Matrix(n, 2), Targets{HeadKind::Classification, std::vector<int>(n), {}}};
    const std::size_t n_outer = n / 2 + n % 2;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = angle(gen);
        const bool outer = i < n_outer;
        double x = outer ? std::cos(t) : 1.0 - std::cos(t);
        double y = outer ? std::sin(t) : 0.5 - std::sin(t);
        if (noise_std > 0.0) {
            x += noise_std * noise(gen);
            y += noise_std * noise(gen);
        }
        b.inputs(i, 0) = x;
        b.inputs(i, 1) = y;
        b.targets.labels[i] = outer ? 0 : 1;
    }
    return b;
}

DataSplit gen_two_moons(std::size_t n_train, std::size_t n_test, double noise_std, std::uint64_t seed) {
    return {two_moons(n_train, noise_std, derive_seed(seed, "train")),
            two_moons(n_test, noise_std, derive_seed(seed, "test"))};
}

namespace {

Batch blobs(std::size_t n, std::size_t classes, std::size_t dim, double noise_std, std::uint64_t seed) {
    require(classes >= 2, "blobs need at least two classes");
    require(dim >= 2, "blobs need at least two dimensions");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Batch b{Matrix(n, dim), Targets{HeadKind::Classification, std::vector<int>(n), {}}};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % classes;
        const double a = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes);
        for (std::size_t j = 0; j < dim; ++j) {
            const double center = j == 0 ? 3.0 * std::cos(a) : (j == 1 ? 3.0 * std::sin(a) : 0.0);
            b.inputs(i, j) = center + noise_std * noise(gen);
        }
        b.targets.labels[i] = static_cast<int>(c);
    }
    return b;
}

Batch sine(std::size_t n, double noise_std, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    Batch b{Matrix(n, 1), Targets{HeadKind::Regression, {}, Vector(n)}};
    for (std::size_t i = 0; i < n; ++i) {
        const double x = unit(gen);
        b.inputs(i, 0) = x;
        b.targets.values[i] = std::sin(2.0 * std::numbers::pi * x) + (noise_std > 0.0 ? noise_std * noise(gen) : 0.0);
    }
    return b;
}

}  // namespace

DataSplit gen_blobs(std::size_t n_train, std::size_t n_test, std::size_t classes, std::size_t dim, double noise_std,
                    std::uint64_t seed) {
    return {blobs(n_train, classes, dim, noise_std, derive_seed(seed, "train")),
            blobs(n_test, classes, dim, noise_std, derive_seed(seed, "test"))};
}

DataSplit gen_sine_regression(std::size_t n_train, std::size_t n_test, double noise_std, std::uint64_t seed) {
    return {sine(n_train, noise_std, derive_seed(seed, "train")), sine(n_test, noise_std, derive_seed(seed, "test"))};
}

Batch parse_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    std::vector<Vector> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            width = csv::split(line).size();
            if (width < 2) throw ParseError(source + ": header needs at least one feature and a target column");
            continue;
        }
        if (line.empty()) continue;
        const auto cells = csv::split(line);
        if (cells.size() != width)
            throw ParseError(source + ": line " + std::to_string(lineno) + ": expected " + std::to_string(width) +
                             " columns, found " + std::to_string(cells.size()));
        Vector row(width);
        for (std::size_t j = 0; j < width; ++j) {
            try {
                row[j] = csv::parse_double(cells[j], lineno, j + 1);
            } catch (const ParseError& e) {
                throw ParseError(source + ": " + e.what());
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(source + ": no data rows");

    bool integral = true;
    for (const auto& r : rows) {
        const double y = r.back();
        if (y != std::floor(y) || y < 0.0 || y > 1e9) integral = false;
    }
    const std::size_t n = rows.size();
    const std::size_t d = width - 1;
    Batch b;
    b.inputs = Matrix(n, d);
    b.targets.kind = integral ? HeadKind::Classification : HeadKind::Regression;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) b.inputs(i, j) = rows[i][j];
        if (integral)
            b.targets.labels.push_back(static_cast<int>(rows[i][d]));
        else
            b.targets.values.push_back(rows[i][d]);
    }
    return b;
}

Batch load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (text.empty()) throw ParseError(path + ": empty file");
    return parse_csv(text, path);
}

std::string to_csv(const Batch& batch) {
    std::string s;
    for (std::size_t j = 0; j < batch.inputs.cols; ++j) s += "x" + std::to_string(j) + ",";
    s += "y\n";
    for (std::size_t i = 0; i < batch.size(); ++i) {
        for (std::size_t j = 0; j < batch.inputs.cols; ++j) s += csv::format_double(batch.inputs(i, j)) + ",";
        if (batch.targets.kind == HeadKind::Classification)
            s += std::to_string(batch.targets.labels[i]);
        else
            s += csv::format_double(batch.targets.values[i]);
        s += "\n";
    }
    return s;
}

void write_csv(const Batch& batch, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << to_csv(batch);
}

}  // namespace salt
