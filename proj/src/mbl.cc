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

#include "mbsp/mbl.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "mbsp/common.h"

namespace mbsp::mbl {

namespace {

constexpr const char* kFormatTag = "mbsp-model";
constexpr int kFormatVersion = 1;
constexpr double kDegenerateWeight = 1e-12;

void check_arity(std::span<const Instance> dataset) {
  if (dataset.empty()) throw DomainError("empty dataset");
  const size_t arity = dataset.front().features.size();
  if (arity == 0) throw DomainError("instances must have at least one feature");
  for (size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].features.size() != arity) {
      throw DomainError("instance " + std::to_string(i) + " has arity " +
                        std::to_string(dataset[i].features.size()) + ", expected " +
                        std::to_string(arity));
    }
  }
}

}  // namespace

std::string to_string(TiePolicy policy) {
  return policy == TiePolicy::kGlobalClassFrequency ? "global-class-frequency"
                                                    : "lexicographic";
}

TiePolicy tie_policy_from_string(const std::string& name) {
  if (name == "global-class-frequency") return TiePolicy::kGlobalClassFrequency;
  if (name == "lexicographic") return TiePolicy::kLexicographic;
  throw ConfigError("unknown tie policy '" + name + "'");
}

double entropy(std::span<const double> counts) {
  double total = 0.0;
  for (double c : counts) {
    if (c < 0) throw DomainError("negative count");
    total += c;
  }
  if (total <= 0.0) throw DomainError("entropy of an empty distribution");
  double h = 0.0;
  for (double c : counts) {
    if (c <= 0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;
}

double entropy(const ClassCounts& counts) {
  std::vector<double> values;
  values.reserve(counts.size());
  for (const auto& [label, n] : counts) values.push_back(static_cast<double>(n));
  return entropy(values);
}

WeightTable gain_ratio_weights(std::span<const Instance> dataset) {
  check_arity(dataset);
  const size_t arity = dataset.front().features.size();
  const double n = static_cast<double>(dataset.size());

  ClassCounts classes;
  for (const auto& inst : dataset) ++classes[inst.label];

  WeightTable table;
  table.class_entropy = entropy(classes);
  table.weights.assign(arity, 0.0);
  table.value_entropy.assign(arity, 0.0);
  table.conditional_entropy.assign(arity, 0.0);

  for (size_t f = 0; f < arity; ++f) {
    std::unordered_map<std::string, ClassCounts> by_value;
    for (const auto& inst : dataset) ++by_value[inst.features[f]][inst.label];

    std::vector<double> value_counts;
    double conditional = 0.0;
    for (const auto& [value, cc] : by_value) {
      double count = 0;
      for (const auto& [label, c] : cc) count += static_cast<double>(c);
      value_counts.push_back(count);
      conditional += (count / n) * entropy(cc);
    }
    const double split = entropy(value_counts);
    table.value_entropy[f] = split;
    table.conditional_entropy[f] = conditional;
    if (split <= 0.0) continue;  // constant feature
    table.weights[f] = std::max(0.0, (table.class_entropy - conditional) / split);
  }
  return table;
}

void Model::build(std::span<const Instance> dataset) {
  arity_ = dataset.front().features.size();
  instances_.assign(dataset.begin(), dataset.end());
  value_ids_.assign(arity_, {});
  labels_.clear();
  label_frequency_.clear();
  class_frequencies_.clear();
  exemplars_.clear();

  std::unordered_map<std::string, int32_t> label_ids;
  std::unordered_map<std::string, size_t> exemplar_index;
  std::string key;
  for (const auto& inst : dataset) {
    auto [lit, fresh] = label_ids.try_emplace(inst.label, static_cast<int32_t>(labels_.size()));
    if (fresh) {
      labels_.push_back(inst.label);
      label_frequency_.push_back(0);
    }
    ++label_frequency_[lit->second];
    ++class_frequencies_[inst.label];

    std::vector<int32_t> values(arity_);
    key.clear();
    for (size_t f = 0; f < arity_; ++f) {
      auto& ids = value_ids_[f];
      auto [vit, unused] = ids.try_emplace(inst.features[f], static_cast<int32_t>(ids.size()));
      values[f] = vit->second;
      key += std::to_string(values[f]);
      key += ',';
    }
    auto [eit, added] = exemplar_index.try_emplace(key, exemplars_.size());
    if (added) exemplars_.push_back({std::move(values), {}});
    auto& counts = exemplars_[eit->second].class_counts;
    auto cit = std::find_if(counts.begin(), counts.end(),
                            [&](const auto& p) { return p.first == lit->second; });
    if (cit == counts.end()) {
      counts.emplace_back(lit->second, 1);
    } else {
      ++cit->second;
    }
  }
  flat_values_.clear();
  flat_values_.reserve(exemplars_.size() * arity_);
  for (const auto& e : exemplars_) flat_values_.insert(flat_values_.end(), e.values.begin(), e.values.end());
}

int32_t Model::lookup(size_t feature, const std::string& value) const {
  const auto& ids = value_ids_[feature];
  auto it = ids.find(value);
  return it == ids.end() ? -1 : it->second;
}

const std::string& Model::pick(const std::vector<size_t>& votes) const {
  size_t best = 0;
  for (size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best]) {
      best = c;
      continue;
    }
    if (votes[c] < votes[best]) continue;
    if (config_.tie_policy == TiePolicy::kGlobalClassFrequency &&
        label_frequency_[c] != label_frequency_[best]) {
      if (label_frequency_[c] > label_frequency_[best]) best = c;
      continue;
    }
    if (labels_[c] < labels_[best]) best = c;
  }
  return labels_[best];
}

Classification Model::classify(std::span<const std::string> query) const {
  if (query.size() != arity_) {
    throw DomainError("query arity " + std::to_string(query.size()) +
                      " does not match model arity " + std::to_string(arity_));
  }
  std::vector<int32_t> ids(arity_);
  for (size_t f = 0; f < arity_; ++f) ids[f] = lookup(f, query[f]);

  const auto& w = weights_.weights;
  const size_t k = std::max<size_t>(1, config_.k);
  // Heaviest features first so that hopeless exemplars are abandoned early.
  std::vector<size_t> order(arity_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return w[a] > w[b]; });

  constexpr double kBeyond = std::numeric_limits<double>::infinity();
  std::vector<double> distance(exemplars_.size());
  std::vector<double> nearest;  // ascending distinct values, at most k
  nearest.reserve(k + 1);
  for (size_t e = 0; e < exemplars_.size(); ++e) {
    const int32_t* values = flat_values_.data() + e * arity_;
    // Slack keeps rounding differences from excluding an exemplar that ties
    // with the current horizon.
    const double bound = nearest.size() == k ? nearest.back() * (1 + 1e-12) + 1e-12 : kBeyond;
    double d = 0.0;
    for (size_t f : order) {
      if (values[f] != ids[f]) {
        d += w[f];
        if (d > bound) break;
      }
    }
    if (d > bound) {
      distance[e] = kBeyond;
      continue;
    }
    // Recompute in index order so the value does not depend on the order
    // used above (floating-point addition is not associative).
    d = 0.0;
    for (size_t f = 0; f < arity_; ++f) {
      if (values[f] != ids[f]) d += w[f];
    }
    distance[e] = d;
    if (nearest.size() == k && d > nearest.back()) continue;
    auto pos = std::lower_bound(nearest.begin(), nearest.end(), d);
    if (pos != nearest.end() && *pos == d) continue;
    nearest.insert(pos, d);
    if (nearest.size() > k) nearest.pop_back();
  }

  std::vector<size_t> votes(labels_.size(), 0);
  const double horizon = nearest.back();
  for (size_t e = 0; e < exemplars_.size(); ++e) {
    if (distance[e] > horizon) continue;
    for (const auto& [label, count] : exemplars_[e].class_counts) votes[label] += count;
  }

  Classification result;
  result.label = pick(votes);
  result.nearest_distance = nearest.front();
  for (size_t c = 0; c < votes.size(); ++c) {
    if (votes[c] > 0) result.votes[labels_[c]] = votes[c];
  }
  return result;
}

Model train(std::span<const Instance> dataset, const LearnerConfig& config) {
  check_arity(dataset);
  if (config.k == 0) throw DomainError("k must be at least 1");
  Model model;
  model.config_ = config;
  model.weights_ = gain_ratio_weights(dataset);
  if (config.degenerate_weight_fallback) {
    const bool degenerate = std::all_of(model.weights_.weights.begin(), model.weights_.weights.end(),
                                        [](double w) { return w < kDegenerateWeight; });
    if (degenerate) std::fill(model.weights_.weights.begin(), model.weights_.weights.end(), 1.0);
  }
  model.build(dataset);
  return model;
}

Classification classify(const Model& model, std::span<const std::string> query) {
  return model.classify(query);
}

std::vector<Classification> classify_batch(const Model& model,
                                           std::span<const FeatureVector> queries,
                                           size_t workers) {
  for (size_t i = 0; i < queries.size(); ++i) {
    if (queries[i].size() != model.arity()) {
      throw DomainError("query " + std::to_string(i) + " has arity " +
                        std::to_string(queries[i].size()) + ", model arity is " +
                        std::to_string(model.arity()));
    }
  }
  std::vector<Classification> out(queries.size());
  workers = std::clamp<size_t>(workers, 1, std::max<size_t>(1, queries.size()));
  if (workers == 1) {
    for (size_t i = 0; i < queries.size(); ++i) out[i] = model.classify(queries[i]);
    return out;
  }
  std::vector<std::thread> pool;
  for (size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (size_t i = t; i < queries.size(); i += workers) out[i] = model.classify(queries[i]);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

XorResult xor_experiment(size_t num_random_features, size_t runs, uint64_t seed,
                         const LearnerConfig& config) {
  static constexpr int kPatterns[4][3] = {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
  constexpr size_t kCopies = 100;
  if (runs == 0) return {};

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  auto make_rows = [&] {
    std::vector<Instance> rows;
    rows.reserve(4 * kCopies);
    for (const auto& p : kPatterns) {
      for (size_t c = 0; c < kCopies; ++c) {
        Instance inst;
        inst.features = {std::to_string(p[0]), std::to_string(p[1])};
        for (size_t r = 0; r < num_random_features; ++r) inst.features.push_back(coin(rng) ? "1" : "0");
        inst.label = std::to_string(p[2]);
        rows.push_back(std::move(inst));
      }
    }
    return rows;
  };

  std::vector<double> correct(runs, 0.0);
  for (size_t run = 0; run < runs; ++run) {
    const auto train_rows = make_rows();
    const auto test_rows = make_rows();
    LearnerConfig cfg = config;
    cfg.degenerate_weight_fallback = true;
    const Model model = train(train_rows, cfg);
    for (const auto& row : test_rows) {
      if (model.classify(row.features).label == row.label) correct[run] += 1.0;
    }
  }

  XorResult result;
  for (double c : correct) result.mean_correct += c;
  result.mean_correct /= static_cast<double>(runs);
  if (runs > 1) {
    double ss = 0.0;
    for (double c : correct) ss += (c - result.mean_correct) * (c - result.mean_correct);
    result.stddev = std::sqrt(ss / static_cast<double>(runs - 1));
  }
  return result;
}

void save_model(const Model& model, std::ostream& out) {
  const auto& cfg = model.config();
  out << kFormatTag << '\t' << kFormatVersion << '\n';
  out << "arity\t" << model.arity() << '\n';
  out << "k\t" << cfg.k << '\n';
  out << "tie\t" << to_string(cfg.tie_policy) << '\n';
  out << "fallback\t" << (cfg.degenerate_weight_fallback ? 1 : 0) << '\n';
  out << "weights";
  for (double w : model.weights()) out << '\t' << format_double(w);
  out << '\n';
  out << "classes";
  for (const auto& [label, n] : model.class_frequencies()) out << '\t' << escape_symbol(label) << '\t' << n;
  out << '\n';
  out << "instances\t" << model.size() << '\n';
  for (const auto& inst : model.instances()) {
    for (const auto& v : inst.features) out << escape_symbol(v) << '\t';
    out << escape_symbol(inst.label) << '\n';
  }
}

Model load_model(std::istream& in) {
  size_t line_no = 0;
  std::string line;
  auto next = [&](const char* key) {
    if (!std::getline(in, line)) throw ParseError(std::string("unexpected end of model, expected ") + key, line_no + 1);
    ++line_no;
    auto fields = split(line, '\t');
    if (fields.empty() || fields[0] != key) {
      throw ParseError(std::string("expected '") + key + "'", line_no);
    }
    return fields;
  };
  auto to_size = [&](const std::string& s) {
    try {
      size_t pos = 0;
      unsigned long long v = std::stoull(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return static_cast<size_t>(v);
    } catch (const std::exception&) {
      throw ParseError("not a count: '" + s + "'", line_no);
    }
  };

  auto header = next(kFormatTag);
  if (header.size() != 2 || header[1] != std::to_string(kFormatVersion)) {
    throw ParseError("unsupported model format version", line_no);
  }
  const size_t arity = to_size(next("arity").at(1));
  LearnerConfig cfg;
  cfg.k = to_size(next("k").at(1));
  cfg.tie_policy = tie_policy_from_string(next("tie").at(1));
  cfg.degenerate_weight_fallback = next("fallback").at(1) == "1";
  auto weight_fields = next("weights");
  if (weight_fields.size() != arity + 1) throw ParseError("weight count does not match arity", line_no);
  std::vector<double> weights;
  for (size_t i = 1; i < weight_fields.size(); ++i) weights.push_back(parse_double(weight_fields[i]));
  next("classes");
  const size_t count = to_size(next("instances").at(1));

  std::vector<Instance> rows;
  rows.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw ParseError("truncated instance list", line_no + 1);
    ++line_no;
    auto fields = split(line, '\t');
    if (fields.size() != arity + 1) throw ParseError("instance arity mismatch", line_no);
    Instance inst;
    for (size_t f = 0; f < arity; ++f) inst.features.push_back(unescape_symbol(fields[f]));
    inst.label = unescape_symbol(fields[arity]);
    rows.push_back(std::move(inst));
  }
  if (rows.empty()) throw ParseError("model without instances", line_no);

  Model model;
  model.config_ = cfg;
  model.weights_ = gain_ratio_weights(rows);
  model.weights_.weights = std::move(weights);
  model.build(rows);
  return model;
}

}  // namespace mbsp::mbl
