// avfusion/src/eval.cc

// Copyright 2026  The avfusion Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "avfusion/eval.h"

#include <cmath>
#include <numeric>

#include "avfusion/error.h"

namespace avf {

ConfusionMatrix::ConfusionMatrix(std::size_t classes)
    : classes_(classes), counts_(classes * classes, 0) {
  if (classes == 0) throw ArgumentError("confusion matrix needs at least one class");
}

ConfusionMatrix::ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> counts)
    : classes_(classes), counts_(std::move(counts)) {
  if (classes == 0) throw ArgumentError("confusion matrix needs at least one class");
  if (counts_.size() != classes * classes)
    throw ArgumentError("confusion matrix needs " + std::to_string(classes * classes) +
                        " counts");
}

void ConfusionMatrix::add(int truth, int predicted) {
  const auto c = static_cast<int>(classes_);
  if (truth < 0 || truth >= c || predicted < 0 || predicted >= c)
    throw DataError("class id outside [0, " + std::to_string(classes_) + ")");
  ++counts_[static_cast<std::size_t>(truth) * classes_ + static_cast<std::size_t>(predicted)];
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

Metrics metrics(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw ArgumentError("metrics of an empty confusion matrix");
  const std::size_t n = cm.classes();
  std::uint64_t trace = 0;
  double recall_sum = 0.0;
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::uint64_t row = 0;
    std::uint64_t col = 0;
    for (std::size_t k = 0; k < n; ++k) {
      row += cm(c, k);
      col += cm(k, c);
    }
    const std::uint64_t hit = cm(c, c);
    trace += hit;
    const double recall = row == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(row);
    const double precision =
        col == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(col);
    recall_sum += recall;
    if (precision + recall > 0.0) f1_sum += 2.0 * precision * recall / (precision + recall);
  }
  Metrics m;
  m.cr = static_cast<double>(trace) / static_cast<double>(total);
  m.uar = recall_sum / static_cast<double>(n);
  m.mean_f1 = f1_sum / static_cast<double>(n);
  return m;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("summary of zero runs");
  Summary s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

RunReport aggregate_runs(std::span<const Metrics> runs) {
  if (runs.empty()) throw ArgumentError("aggregate_runs: no runs");
  RunReport r;
  r.runs.assign(runs.begin(), runs.end());
  std::vector<double> cr, uar, f1;
  for (const auto& m : runs) {
    cr.push_back(m.cr);
    uar.push_back(m.uar);
    f1.push_back(m.mean_f1);
  }
  r.cr = summarize(cr);
  r.uar = summarize(uar);
  r.mean_f1 = summarize(f1);
  return r;
}

}  // namespace avf
