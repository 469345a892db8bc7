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


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "salt/calibration.hpp"
#include "salt/errors.hpp"
#include "test_util.hpp"

using namespace salt;

TEST_CASE("hand example") {
    const CalibrationReport r = bin_predictions(Vector{0.75, 0.75, 0.95, 0.95}, {true, false, true, true});
    CHECK(r.n == 4);
    CHECK(r.bins.size() == 10);
    CHECK(r.bins[7].count == 2);
    CHECK(r.bins[9].count == 2);
    CHECK(r.bins[7].calib_error == 0.25);
    // |1 - 0.95| is computed exactly from the stored 0.95, which lies just
    // below the decimal value; the result is the correctly rounded
    // 0.05000000000000004 and ece sits one ulp above the double nearest 0.15.
    CHECK(r.bins[9].calib_error == 1.0 - 0.95);
    const long double exact = 0.5L * 0.25L + 0.5L * (1.0L - static_cast<long double>(0.95));
    CHECK(r.ece == static_cast<double>(exact));
    CHECK(r.ece == std::nextafter(0.15, 1.0));
    for (std::size_t m : {0u, 1u, 2u, 3u, 4u, 5u, 6u, 8u}) CHECK(r.bins[m].count == 0);
}

TEST_CASE("closed cases and invariants") {
    const CalibrationReport perfect = bin_predictions(Vector(50, 1.0), std::vector<bool>(50, true));
    CHECK(perfect.ece == 0.0);
    CHECK(perfect.bins[9].count == 50);

    // Constant predictor: ece = |accuracy - confidence|.
    std::vector<bool> correct(40, false);
    for (std::size_t i = 0; i < 30; ++i) correct[i] = true;
    CHECK(bin_predictions(Vector(40, 0.6), correct).ece == doctest::Approx(0.15).epsilon(1e-14));

    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.34, 1.0);
    std::bernoulli_distribution coin(0.7);
    Vector conf(500);
    std::vector<bool> hits(500);
    for (std::size_t i = 0; i < 500; ++i) {
        conf[i] = u(gen);
        hits[i] = coin(gen);
    }
    for (BinningScheme scheme : {BinningScheme::EqualWidth, BinningScheme::EqualMass}) {
        const CalibrationReport r = bin_predictions(conf, hits, 10, scheme);
        std::size_t total = 0;
        for (const auto& b : r.bins) total += b.count;
        CHECK(total == 500);
        CHECK(r.ece >= 0.0);
        CHECK(r.ece <= 1.0);
        CHECK(r.ece == ece_from_bins(r.bins, r.n));

        std::vector<std::size_t> perm(500);
        for (std::size_t i = 0; i < 500; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), gen);
        Vector c2(500);
        std::vector<bool> h2(500);
        for (std::size_t i = 0; i < 500; ++i) {
            c2[i] = conf[perm[i]];
            h2[i] = hits[perm[i]];
        }
        CHECK(bin_predictions(c2, h2, 10, scheme).ece == doctest::Approx(r.ece).epsilon(1e-12));
    }
    const CalibrationReport mass = bin_predictions(conf, hits, 10, BinningScheme::EqualMass);
    for (const auto& b : mass.bins) CHECK(b.count == 50);
}

TEST_CASE("bin edges follow the half-open convention") {
    for (std::size_t m = 1; m <= 10; ++m) {
        const double c = static_cast<double>(m) / 10.0;
        const CalibrationReport r = bin_predictions(Vector{c}, {true});
        CHECK(r.bins[m - 1].count == 1);
    }
    CHECK(bin_predictions(Vector{0.0}, {false}).bins[0].count == 1);
    CHECK(bin_predictions(Vector{std::nextafter(0.5, 1.0)}, {false}).bins[5].count == 1);
    CHECK(bin_predictions(Vector{}, {}).ece == 0.0);
}

TEST_CASE("contract errors") {
    CHECK_THROWS_AS(bin_predictions(Vector{0.5, 0.6}, {true}), ContractError);
    CHECK_THROWS_AS(bin_predictions(Vector{1.5}, {true}), ContractError);
    CHECK_THROWS_AS(bin_predictions(Vector{0.5}, {true}, 0), ContractError);
    CHECK_THROWS_AS(confidence_of({HeadKind::Regression, Matrix(2, 1)}), ContractError);
}

TEST_CASE("Bernoulli-consistent predictions are calibrated") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.5, 1.0);
    const std::size_t n = 100000;
    Vector conf(n);
    std::vector<bool> hits(n);
    for (std::size_t i = 0; i < n; ++i) {
        conf[i] = u(gen);
        hits[i] = std::bernoulli_distribution(conf[i])(gen);
    }
    CHECK(bin_predictions(conf, hits).ece <= 0.02);
}

TEST_CASE("confidence_of") {
    const Vector u = confidence_of({HeadKind::Classification, Matrix(1, 4)});
    CHECK(u[0] == doctest::Approx(0.25).epsilon(1e-15));
    const Vector s = confidence_of({HeadKind::Classification, Matrix(1, 2, Vector{10.0, 0.0})});
    CHECK(s[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(s[0] < 1.0);

    std::mt19937_64 gen(4);
    const Matrix z = salt::testing::random_matrix(20, 5, gen, 3.0);
    const Vector c = confidence_of({HeadKind::Classification, z});
    const std::vector<int> labels = predicted_labels({HeadKind::Classification, z});
    for (std::size_t i = 0; i < 20; ++i) {
        const Vector p = softmax(z.row(i));
        const auto best = std::max_element(p.begin(), p.end());
        CHECK(c[i] == *best);
        CHECK(labels[i] == static_cast<int>(best - p.begin()));
    }
}

TEST_CASE("reliability CSV recombines to ece exactly") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.5, 1.0);
    Vector conf(1000);
    std::vector<bool> hits(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        conf[i] = u(gen);
        hits[i] = std::bernoulli_distribution(0.8)(gen);
    }
    const CalibrationReport r = bin_predictions(conf, hits);
    const std::string csv = reliability_csv(r);
    CHECK(csv.rfind("bin_lower,bin_upper,count,mean_confidence,accuracy,calib_error\n", 0) == 0);
    const auto bins = parse_reliability_csv(csv);
    CHECK(bins.size() == 10);
    std::size_t n = 0;
    for (const auto& b : bins) n += b.count;
    CHECK(ece_from_bins(bins, n) == r.ece);
    CHECK_THROWS_AS(parse_reliability_csv("bin_lower,bin_upper\n0,1\n"), ParseError);
}

TEST_CASE("predictions CSV round trip") {
    const Predictions p{{0.5, 0.75, 0.9999999999999999}, {true, false, true}};
    const auto path = std::filesystem::temp_directory_path() / "salt_test_predictions.csv";
    {
        std::ofstream f(path);
        f << predictions_csv(p);
    }
    const Predictions back = load_predictions_csv(path.string());
    CHECK(back.confidences == p.confidences);
    CHECK(back.correct == p.correct);
    {
        std::ofstream f(path);
        f << "confidence,correct\n0.5,yes\n";
    }
    CHECK_THROWS_AS(load_predictions_csv(path.string()), ParseError);
    std::filesystem::remove(path);
}
