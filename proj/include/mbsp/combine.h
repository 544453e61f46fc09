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

#ifndef MBSP_COMBINE_H_
#define MBSP_COMBINE_H_

// System combination over aligned per-token outputs of several classifiers:
// four voting schemes, the TagPair stacked classifier, and instance
// construction for a stacked memory-based learner.

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "mbsp/mbl.h"

namespace mbsp::combine {

enum class Method { kMajority, kTotPrecision, kTagPrecision, kPrecisionRecall, kTagPair };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

// systems[s][i] is the output of system s at position i. `gold`, when not
// empty, is aligned with the outputs.
struct SystemOutputs {
  std::vector<std::vector<std::string>> systems;
  std::vector<std::string> gold;

  size_t num_systems() const { return systems.size(); }
  size_t length() const { return systems.empty() ? gold.size() : systems.front().size(); }
  // Outputs of every system at one position, in system order.
  std::vector<std::string> column(size_t position) const;
};

// Throws DomainError unless every system (and gold, if present) has the same
// length.
void check_aligned(const SystemOutputs& outputs);

struct CombinerWeights {
  Method method = Method::kMajority;
  size_t num_systems = 0;
  std::vector<double> accuracy;                         // TotPrecision
  std::vector<std::map<std::string, double>> precision;  // [system][tag]
  std::vector<std::map<std::string, double>> recall;     // [system][tag]
  // TagPair: (system i, system j, output of i, output of j) -> P(gold tag).
  using PairKey = std::tuple<size_t, size_t, std::string, std::string>;
  std::map<PairKey, std::map<std::string, double>> pair_distribution;
  // Unconditional gold tag distribution on the tuning data (TagPair backoff).
  std::map<std::string, double> tag_frequency;
};

// Plurality tag; ties go to the tag of the earliest system.
std::string majority_vote(std::span<const std::string> outputs);

CombinerWeights fit_weights(const SystemOutputs& tuning, Method method);

std::string vote(std::span<const std::string> outputs, const CombinerWeights& weights);

// Per-tag accumulated scores for one position (exposed for inspection).
std::map<std::string, double> vote_scores(std::span<const std::string> outputs,
                                          const CombinerWeights& weights);

// vote() at every position.
std::vector<std::string> combine(const SystemOutputs& outputs, const CombinerWeights& weights);

// One instance per position: the system outputs followed by the context
// columns (context[c][i]); labels come from outputs.gold when present.
std::vector<mbl::Instance> build_stacked_instances(
    const SystemOutputs& outputs, const std::vector<std::vector<std::string>>& context = {});

void save_weights(const CombinerWeights& weights, std::ostream& out);
CombinerWeights load_weights(std::istream& in);

}  // namespace mbsp::combine

#endif  // MBSP_COMBINE_H_
