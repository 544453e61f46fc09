// Copyright 2026 The mbsp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MBSP_EVAL_H_
#define MBSP_EVAL_H_

// Phrase-level scoring (precision, recall, F-beta), per-type breakdowns and
// bootstrap resampling of sentences for significance intervals.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mbsp/repr.h"

namespace mbsp::eval {

struct EvalConfig {
  double beta = 1.0;
  size_t bootstrap_samples = 10000;
  double tail = 0.05;
  uint64_t seed = 0;
  size_t workers = 1;

  void validate() const;
};

struct TypeScore {
  size_t found = 0;
  size_t correct = 0;
  size_t gold = 0;
  double precision = 0.0;  // percent
  double recall = 0.0;     // percent
  double f = 0.0;
};

struct ScoreReport {
  TypeScore overall;
  std::map<std::string, TypeScore> per_type;
};

using SpanSets = std::vector<std::vector<repr::ChunkSpan>>;

// F-beta of two percentages; 0 when both are 0.
double f_beta(double precision, double recall, double beta = 1.0);

// Fills precision/recall/f from the counts (0/0 conventions: 0).
TypeScore make_score(size_t found, size_t correct, size_t gold, double beta = 1.0);

// A found span is correct iff an identical (start, end, type) span is in the
// gold set of the same sentence.
ScoreReport score(const SpanSets& found, const SpanSets& gold, const EvalConfig& config = {});
std::map<std::string, TypeScore> score_per_type(const SpanSets& found, const SpanSets& gold,
                                                const EvalConfig& config = {});

struct BootstrapResult {
  double point = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> samples;  // sorted ascending
};

// Resamples sentences with replacement (sample size = corpus size). Each
// sample draws from its own generator seeded from (seed, sample index), so
// results do not depend on the worker count.
BootstrapResult bootstrap(const SpanSets& found, const SpanSets& gold, const EvalConfig& config = {});

// Human-readable per-type table followed by the overall row.
std::string format_table(const ScoreReport& report, double beta = 1.0);
// "type<TAB>precision<TAB>recall<TAB>f" lines, overall last as "all".
std::string format_lines(const ScoreReport& report);

}  // namespace mbsp::eval

#endif  // MBSP_EVAL_H_
