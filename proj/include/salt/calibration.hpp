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

// Expected calibration error and reliability-diagram data.

#pragma once

#include <string>
#include <vector>

#include "salt/diffmodel.hpp"

namespace salt {

struct CalibrationBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
    double mean_confidence = 0.0;
    double accuracy = 0.0;
    double calib_error = 0.0;  // |mean(correct) - mean(confidence)|, 0 for empty bins
};

struct CalibrationReport {
    std::vector<CalibrationBin> bins;
    double ece = 0.0;
    std::size_t n = 0;
};

enum class BinningScheme { EqualWidth, EqualMass };

// Equal-width bins ((m-1)/M, m/M] by default. EqualMass splits the sorted
// confidences into M contiguous groups of near-equal size; its bin bounds are
// the smallest and largest confidence in each group.
CalibrationReport bin_predictions(std::span<const double> confidences, const std::vector<bool>& correct,
                                  std::size_t m_bins = 10, BinningScheme scheme = BinningScheme::EqualWidth);

// sum_m (count_m / n) * calib_error_m, in bin order.
double ece_from_bins(const std::vector<CalibrationBin>& bins, std::size_t n);

// Per-example max softmax probability.
Vector confidence_of(const ModelOutput& output);
// Per-example argmax.
std::vector<int> predicted_labels(const ModelOutput& output);

// Header: bin_lower,bin_upper,count,mean_confidence,accuracy,calib_error
std::string reliability_csv(const CalibrationReport& report);
void write_reliability_csv(const CalibrationReport& report, const std::string& path);
// Parses reliability CSV text back into bins.
std::vector<CalibrationBin> parse_reliability_csv(const std::string& text);

struct Predictions {
    Vector confidences;
    std::vector<bool> correct;
};

// Header: confidence,correct  (correct is 0/1)
std::string predictions_csv(const Predictions& p);
Predictions load_predictions_csv(const std::string& path);

}  // namespace salt
