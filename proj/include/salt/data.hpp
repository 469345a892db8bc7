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

// Synthetic datasets and CSV I/O.

#pragma once

#include <cstdint>
#include <string>

#include "salt/diffmodel.hpp"

namespace salt {

struct DataSplit {
    Batch train;
    Batch test;
};

// Two interleaved half circles. Class 0: (cos t, sin t); class 1:
// (1 - cos t, 0.5 - sin t), t ~ U[0, pi], plus N(0, noise_std^2) per coordinate.
Batch two_moons(std::size_t n, double noise_std, std::uint64_t seed);
DataSplit gen_two_moons(std::size_t n_train, std::size_t n_test, double noise_std, std::uint64_t seed);

// Isotropic Gaussian blobs around `classes` centers spaced on a radius-3
// circle in the first two coordinates.
DataSplit gen_blobs(std::size_t n_train, std::size_t n_test, std::size_t classes, std::size_t dim, double noise_std,
                    std::uint64_t seed);

// y = sin(2 pi x) + noise, x ~ U[0, 1].
DataSplit gen_sine_regression(std::size_t n_train, std::size_t n_test, double noise_std, std::uint64_t seed);

// Header row required; last column is the target, the rest are features.
// Integer-valued targets make a classification batch, anything else a
// regression batch.
Batch load_csv(const std::string& path);
Batch parse_csv(const std::string& text, const std::string& source = "<memory>");
std::string to_csv(const Batch& batch);
void write_csv(const Batch& batch, const std::string& path);

}  // namespace salt
