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

#include "salt/calibration.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "csv.hpp"

namespace salt {

namespace {

// Index m in [0, M) of the bin ((m)/M, (m+1)/M] containing c; c <= 0 goes to
// the first bin.
std::size_t equal_width_bin(double c, std::size_t m_bins) {
    const double M = static_cast<double>(m_bins);
    if (c <= 0.0) return 0;
    auto m = static_cast<long long>(std::ceil(c * M));  // 1-based candidate
    // Guard against rounding in c * M at the bin edges.
    while (m > 1 && c <= static_cast<double>(m - 1) / M) --m;
    while (m < static_cast<long long>(m_bins) && c > static_cast<double>(m) / M) ++m;
    m = std::clamp<long long>(m, 1, static_cast<long long>(m_bins));
    return static_cast<std::size_t>(m - 1);
}

void finalize(CalibrationBin& b, double conf_sum, double correct_sum, double gap_sum) {
    if (b.count == 0) return;
    const double n = static_cast<double>(b.count);
    b.mean_confidence = conf_sum / n;
    b.accuracy = correct_sum / n;
    b.calib_error = std::abs(gap_sum) / n;
}

}  // namespace

double ece_from_bins(const std::vector<CalibrationBin>& bins, std::size_t n) {
    if (n == 0) return 0.0;
    double ece = 0.0;
    for (const auto& b : bins)
        ece += static_cast<double>(b.count) / static_cast<double>(n) * b.calib_error;
    return ece;
}

CalibrationReport bin_predictions(std::span<const double> confidences, const std::vector<bool>& correct,
                                  std::size_t m_bins, BinningScheme scheme) {
    require(confidences.size() == correct.size(), "bin_predictions: confidences and correctness lengths differ");
    require(m_bins >= 1, "bin_predictions: need at least one bin");
    for (double c : confidences) require(c >= 0.0 && c <= 1.0, "bin_predictions: confidence outside [0, 1]");
    const std::size_t n = confidences.size();
    CalibrationReport r;
    r.n = n;
    r.bins.resize(m_bins);
    std::vector<double> conf_sum(m_bins, 0.0), correct_sum(m_bins, 0.0), gap_sum(m_bins, 0.0);

    if (scheme == BinningScheme::EqualWidth) {
        for (std::size_t m = 0; m < m_bins; ++m) {
            r.bins[m].lower = static_cast<double>(m) / static_cast<double>(m_bins);
            r.bins[m].upper = static_cast<double>(m + 1) / static_cast<double>(m_bins);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t m = equal_width_bin(confidences[i], m_bins);
            const double hit = correct[i] ? 1.0 : 0.0;
            r.bins[m].count += 1;
            conf_sum[m] += confidences[i];
            correct_sum[m] += hit;
            gap_sum[m] += hit - confidences[i];
        }
    } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return confidences[a] < confidences[b]; });
        for (std::size_t m = 0; m < m_bins; ++m) {
            const std::size_t lo = m * n / m_bins;
            const std::size_t hi = (m + 1) * n / m_bins;
            CalibrationBin& b = r.bins[m];
            b.count = hi - lo;
            if (b.count > 0) {
                b.lower = confidences[order[lo]];
                b.upper = confidences[order[hi - 1]];
            }
            for (std::size_t k = lo; k < hi; ++k) {
                const std::size_t i = order[k];
                const double hit = correct[i] ? 1.0 : 0.0;
                conf_sum[m] += confidences[i];
                correct_sum[m] += hit;
                gap_sum[m] += hit - confidences[i];
            }
        }
    }
    for (std::size_t m = 0; m < m_bins; ++m) finalize(r.bins[m], conf_sum[m], correct_sum[m], gap_sum[m]);
    r.ece = ece_from_bins(r.bins, n);
    return r;
}

Vector confidence_of(const ModelOutput& output) {
    require(output.head == HeadKind::Classification, "confidence_of needs a classification head");
    const Matrix& z = output.values;
    Vector conf(z.rows);
    for (std::size_t i = 0; i < z.rows; ++i) {
        const Vector p = softmax(z.row(i));
        conf[i] = *std::max_element(p.begin(), p.end());
    }
    return conf;
}

std::vector<int> predicted_labels(const ModelOutput& output) {
    require(output.head == HeadKind::Classification, "predicted_labels needs a classification head");
    const Matrix& z = output.values;
    std::vector<int> labels(z.rows);
    for (std::size_t i = 0; i < z.rows; ++i) {
        const auto row = z.row(i);
        labels[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return labels;
}

std::string reliability_csv(const CalibrationReport& report) {
    std::string s = "bin_lower,bin_upper,count,mean_confidence,accuracy,calib_error\n";
    for (const auto& b : report.bins) {
        s += csv::format_double(b.lower) + ',' + csv::format_double(b.upper) + ',' + std::to_string(b.count) + ',' +
             csv::format_double(b.mean_confidence) + ',' + csv::format_double(b.accuracy) + ',' +
             csv::format_double(b.calib_error) + '\n';
    }
    return s;
}

void write_reliability_csv(const CalibrationReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << reliability_csv(report);
}

std::vector<CalibrationBin> parse_reliability_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<CalibrationBin> bins;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 || line.empty()) continue;
        const auto cells = csv::split(line);
        if (cells.size() != 6) throw ParseError("line " + std::to_string(lineno) + ": expected 6 columns");
        CalibrationBin b;
        b.lower = csv::parse_double(cells[0], lineno, 1);
        b.upper = csv::parse_double(cells[1], lineno, 2);
        b.count = static_cast<std::size_t>(csv::parse_double(cells[2], lineno, 3));
        b.mean_confidence = csv::parse_double(cells[3], lineno, 4);
        b.accuracy = csv::parse_double(cells[4], lineno, 5);
        b.calib_error = csv::parse_double(cells[5], lineno, 6);
        bins.push_back(b);
    }
    return bins;
}

std::string predictions_csv(const Predictions& p) {
    require(p.confidences.size() == p.correct.size(), "predictions: length mismatch");
    std::string s = "confidence,correct\n";
    for (std::size_t i = 0; i < p.confidences.size(); ++i)
        s += csv::format_double(p.confidences[i]) + (p.correct[i] ? ",1\n" : ",0\n");
    return s;
}

Predictions load_predictions_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    Predictions p;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1) {
            const auto header = csv::split(line);
            if (header.size() != 2 || header[0] != "confidence" || header[1] != "correct")
                throw ParseError("predictions CSV header must be 'confidence,correct'");
            continue;
        }
        if (line.empty() || line == "\r") continue;
        const auto cells = csv::split(line);
        if (cells.size() != 2) throw ParseError("line " + std::to_string(lineno) + ": expected 2 columns");
        const double c = csv::parse_double(cells[0], lineno, 1);
        const double ok = csv::parse_double(cells[1], lineno, 2);
        if (!(c >= 0.0 && c <= 1.0))
            throw ParseError("line " + std::to_string(lineno) + ": confidence outside [0, 1]");
        if (ok != 0.0 && ok != 1.0) throw ParseError("line " + std::to_string(lineno) + ": correct must be 0 or 1");
        p.confidences.push_back(c);
        p.correct.push_back(ok == 1.0);
    }
    if (lineno == 0) throw ParseError(path + ": empty file");
    return p;
}

}  // namespace salt
