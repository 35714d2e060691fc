// avfusion/include/avfusion/eval.h

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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace avf {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes);
  ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> counts);

  void add(int truth, int predicted);
  std::size_t classes() const { return classes_; }
  std::uint64_t operator()(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * classes_ + predicted];
  }
  std::uint64_t total() const;

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
};

struct Metrics {
  double cr = 0.0;       // classification rate, trace / total
  double uar = 0.0;      // unweighted average recall
  double mean_f1 = 0.0;  // macro F1
};

// Empty rows contribute recall 0 and classes with precision + recall = 0
// contribute F1 0. A matrix with no counts is an ArgumentError.
Metrics metrics(const ConfusionMatrix& cm);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1) convention, 0 for a single run
};

Summary summarize(std::span<const double> values);

struct RunReport {
  std::vector<Metrics> runs;
  Summary cr;
  Summary uar;
  Summary mean_f1;
};

RunReport aggregate_runs(std::span<const Metrics> runs);

}  // namespace avf
