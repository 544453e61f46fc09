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

#ifndef MBSP_MBL_H_
#define MBSP_MBL_H_

// Memory-based learner: stores training instances verbatim, weighs
// features with Gain Ratio and classifies by majority vote over the k
// nearest *distance sets* (all stored items sharing one of the k smallest
// distance values to the query).

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mbsp::mbl {

using FeatureVector = std::vector<std::string>;
using ClassCounts = std::map<std::string, size_t>;

struct Instance {
  FeatureVector features;
  std::string label;
};

enum class TiePolicy { kGlobalClassFrequency, kLexicographic };

std::string to_string(TiePolicy policy);
TiePolicy tie_policy_from_string(const std::string& name);

struct LearnerConfig {
  size_t k = 3;
  TiePolicy tie_policy = TiePolicy::kGlobalClassFrequency;
  // Replace an all-zero weight table by uniform overlap weights.
  bool degenerate_weight_fallback = true;
};

struct WeightTable {
  std::vector<double> weights;
  double class_entropy = 0.0;
  std::vector<double> value_entropy;        // H(V_i), one per feature
  std::vector<double> conditional_entropy;  // sum_v P(v) H(C|v), one per feature
};

// Shannon entropy in bits of a count distribution. Throws DomainError when
// every count is zero.
double entropy(std::span<const double> counts);
double entropy(const ClassCounts& counts);

// Gain Ratio weight per feature position; constant features weigh 0.
WeightTable gain_ratio_weights(std::span<const Instance> dataset);

struct Classification {
  std::string label;
  double nearest_distance = 0.0;
  ClassCounts votes;
};

class Model;

// Stores every instance and computes its weight table. If the config asks
// for it and every weight is below 1e-12 the table becomes all ones.
Model train(std::span<const Instance> dataset, const LearnerConfig& config = {});
Model load_model(std::istream& in);

// Immutable trained classifier. Feature values and labels are interned per
// position; identical training rows are merged into one exemplar carrying
// per-class counts, which leaves every vote count unchanged.
class Model {
 public:
  Model() = default;

  size_t arity() const { return arity_; }
  size_t size() const { return instances_.size(); }
  const LearnerConfig& config() const { return config_; }
  const WeightTable& weight_table() const { return weights_; }
  const std::vector<double>& weights() const { return weights_.weights; }
  const ClassCounts& class_frequencies() const { return class_frequencies_; }
  // Training rows in insertion order.
  const std::vector<Instance>& instances() const { return instances_; }

  Classification classify(std::span<const std::string> query) const;

  friend Model train(std::span<const Instance> dataset, const LearnerConfig& config);
  friend Model load_model(std::istream& in);

 private:
  struct Exemplar {
    std::vector<int32_t> values;
    std::vector<std::pair<int32_t, uint32_t>> class_counts;  // (label id, count)
  };

  void build(std::span<const Instance> dataset);
  int32_t lookup(size_t feature, const std::string& value) const;
  const std::string& pick(const std::vector<size_t>& votes) const;

  size_t arity_ = 0;
  LearnerConfig config_;
  WeightTable weights_;
  ClassCounts class_frequencies_;
  std::vector<std::unordered_map<std::string, int32_t>> value_ids_;
  std::vector<std::string> labels_;  // label id -> symbol
  std::vector<size_t> label_frequency_;
  std::vector<Exemplar> exemplars_;
  std::vector<int32_t> flat_values_;  // exemplar values, row-major
  std::vector<Instance> instances_;
};

Classification classify(const Model& model, std::span<const std::string> query);

// Elementwise classify; `workers` > 1 splits the batch across threads.
std::vector<Classification> classify_batch(const Model& model,
                                           std::span<const FeatureVector> queries,
                                           size_t workers = 1);

// XOR with irrelevant features: 100 copies of each of the four XOR patterns
// for training and for testing, each row extended with independent uniform
// random bits. Returns the mean number of correct test items (out of 400).
struct XorResult {
  double mean_correct = 0.0;
  double stddev = 0.0;
};
XorResult xor_experiment(size_t num_random_features, size_t runs, uint64_t seed,
                         const LearnerConfig& config = {});

// Versioned line-oriented text format.
void save_model(const Model& model, std::ostream& out);

}  // namespace mbsp::mbl

#endif  // MBSP_MBL_H_
