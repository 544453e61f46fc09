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

#include "mbsp/combine.h"

#include <algorithm>
#include <istream>
#include <ostream>

#include "mbsp/common.h"

namespace mbsp::combine {

namespace {

constexpr const char* kFormatTag = "mbsp-combiner";
constexpr int kFormatVersion = 1;

// argmax over `scores`; ties prefer the tag of the earliest system that
// output one of the tied tags, then the lexicographically smallest tag.
std::string argmax(const std::map<std::string, double>& scores, std::span<const std::string> outputs) {
  double best = 0.0;
  bool first = true;
  for (const auto& [tag, s] : scores) {
    if (first || s > best) best = s;
    first = false;
  }
  std::vector<std::string> tied;
  for (const auto& [tag, s] : scores) {
    if (s == best) tied.push_back(tag);
  }
  for (const auto& out : outputs) {
    if (std::find(tied.begin(), tied.end(), out) != tied.end()) return out;
  }
  return tied.empty() ? std::string() : tied.front();
}

double lookup(const std::map<std::string, double>& table, const std::string& tag) {
  auto it = table.find(tag);
  return it == table.end() ? 0.0 : it->second;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kMajority: return "majority";
    case Method::kTotPrecision: return "tot-precision";
    case Method::kTagPrecision: return "tag-precision";
    case Method::kPrecisionRecall: return "precision-recall";
    case Method::kTagPair: return "tag-pair";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  for (Method m : {Method::kMajority, Method::kTotPrecision, Method::kTagPrecision,
                   Method::kPrecisionRecall, Method::kTagPair}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown combination method '" + name + "'");
}

std::vector<std::string> SystemOutputs::column(size_t position) const {
  std::vector<std::string> out;
  out.reserve(systems.size());
  for (const auto& s : systems) out.push_back(s.at(position));
  return out;
}

void check_aligned(const SystemOutputs& outputs) {
  const size_t n = outputs.length();
  for (size_t s = 0; s < outputs.systems.size(); ++s) {
    if (outputs.systems[s].size() != n) {
      throw DomainError("system " + std::to_string(s) + " has " +
                        std::to_string(outputs.systems[s].size()) + " outputs, expected " +
                        std::to_string(n));
    }
  }
  if (!outputs.gold.empty() && outputs.gold.size() != n) {
    throw DomainError("gold tags are not aligned with the system outputs");
  }
}

std::string majority_vote(std::span<const std::string> outputs) {
  if (outputs.empty()) throw DomainError("majority vote over zero systems");
  std::map<std::string, double> counts;
  for (const auto& o : outputs) counts[o] += 1.0;
  return argmax(counts, outputs);
}

CombinerWeights fit_weights(const SystemOutputs& tuning, Method method) {
  check_aligned(tuning);
  CombinerWeights w;
  w.method = method;
  w.num_systems = tuning.num_systems();
  if (method == Method::kMajority) return w;
  if (tuning.gold.empty() || tuning.length() == 0) {
    throw DomainError(to_string(method) + " needs non-empty tuning data with gold tags");
  }
  const size_t n = tuning.length();
  const size_t m = tuning.num_systems();

  std::map<std::string, double> gold_count;
  for (const auto& g : tuning.gold) gold_count[g] += 1.0;
  for (const auto& [tag, c] : gold_count) w.tag_frequency[tag] = c / static_cast<double>(n);

  w.accuracy.assign(m, 0.0);
  w.precision.assign(m, {});
  w.recall.assign(m, {});
  for (size_t s = 0; s < m; ++s) {
    std::map<std::string, double> predicted, correct;
    double right = 0;
    for (size_t i = 0; i < n; ++i) {
      const auto& out = tuning.systems[s][i];
      predicted[out] += 1.0;
      if (out == tuning.gold[i]) {
        correct[out] += 1.0;
        right += 1.0;
      }
    }
    w.accuracy[s] = right / static_cast<double>(n);
    for (const auto& [tag, p] : predicted) w.precision[s][tag] = lookup(correct, tag) / p;
    for (const auto& [tag, g] : gold_count) w.recall[s][tag] = lookup(correct, tag) / g;
  }

  if (method == Method::kTagPair) {
    std::map<CombinerWeights::PairKey, std::map<std::string, double>> counts;
    for (size_t i = 0; i < n; ++i) {
      for (size_t a = 0; a < m; ++a) {
        for (size_t b = a + 1; b < m; ++b) {
          counts[{a, b, tuning.systems[a][i], tuning.systems[b][i]}][tuning.gold[i]] += 1.0;
        }
      }
    }
    for (auto& [key, dist] : counts) {
      double total = 0;
      for (const auto& [tag, c] : dist) total += c;
      for (auto& [tag, c] : dist) c /= total;
      w.pair_distribution.emplace(key, std::move(dist));
    }
  }
  return w;
}

std::map<std::string, double> vote_scores(std::span<const std::string> outputs,
                                          const CombinerWeights& weights) {
  if (outputs.empty()) throw DomainError("vote over zero systems");
  if (weights.method != Method::kMajority && outputs.size() != weights.num_systems) {
    throw DomainError("weights were fitted for " + std::to_string(weights.num_systems) +
                      " systems, got " + std::to_string(outputs.size()));
  }
  std::map<std::string, double> scores;
  const size_t m = outputs.size();
  switch (weights.method) {
    case Method::kMajority:
      for (const auto& o : outputs) scores[o] += 1.0;
      break;
    case Method::kTotPrecision:
      for (size_t s = 0; s < m; ++s) scores[outputs[s]] += weights.accuracy[s];
      break;
    case Method::kTagPrecision:
      for (size_t s = 0; s < m; ++s) scores[outputs[s]] += lookup(weights.precision[s], outputs[s]);
      break;
    case Method::kPrecisionRecall:
      for (const auto& o : outputs) scores.emplace(o, 0.0);
      for (auto& [tag, score] : scores) {
        for (size_t s = 0; s < m; ++s) {
          if (outputs[s] == tag) {
            score += lookup(weights.precision[s], tag);
          } else if (auto it = weights.recall[s].find(tag); it != weights.recall[s].end()) {
            score += 1.0 - it->second;
          }
        }
      }
      break;
    case Method::kTagPair:
      for (const auto& o : outputs) scores.emplace(o, 0.0);
      for (size_t a = 0; a < m; ++a) {
        for (size_t b = a + 1; b < m; ++b) {
          auto it = weights.pair_distribution.find({a, b, outputs[a], outputs[b]});
          const auto& dist = it == weights.pair_distribution.end() ? weights.tag_frequency : it->second;
          for (const auto& [tag, p] : dist) scores[tag] += p;
        }
      }
      break;
  }
  return scores;
}

std::string vote(std::span<const std::string> outputs, const CombinerWeights& weights) {
  return argmax(vote_scores(outputs, weights), outputs);
}

std::vector<std::string> combine(const SystemOutputs& outputs, const CombinerWeights& weights) {
  check_aligned(outputs);
  std::vector<std::string> out;
  out.reserve(outputs.length());
  for (size_t i = 0; i < outputs.length(); ++i) out.push_back(vote(outputs.column(i), weights));
  return out;
}

std::vector<mbl::Instance> build_stacked_instances(
    const SystemOutputs& outputs, const std::vector<std::vector<std::string>>& context) {
  check_aligned(outputs);
  const size_t n = outputs.length();
  for (const auto& col : context) {
    if (col.size() != n) throw DomainError("context column is not aligned with the system outputs");
  }
  std::vector<mbl::Instance> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    mbl::Instance inst;
    inst.features = outputs.column(i);
    for (const auto& col : context) inst.features.push_back(col[i]);
    if (!outputs.gold.empty()) inst.label = outputs.gold[i];
    out.push_back(std::move(inst));
  }
  return out;
}

void save_weights(const CombinerWeights& w, std::ostream& out) {
  out << kFormatTag << '\t' << kFormatVersion << '\n';
  out << "method\t" << to_string(w.method) << '\n';
  out << "systems\t" << w.num_systems << '\n';
  out << "accuracy";
  for (double a : w.accuracy) out << '\t' << format_double(a);
  out << '\n';
  for (size_t s = 0; s < w.precision.size(); ++s) {
    for (const auto& [tag, v] : w.precision[s]) {
      out << "precision\t" << s << '\t' << escape_symbol(tag) << '\t' << format_double(v) << '\n';
    }
  }
  for (size_t s = 0; s < w.recall.size(); ++s) {
    for (const auto& [tag, v] : w.recall[s]) {
      out << "recall\t" << s << '\t' << escape_symbol(tag) << '\t' << format_double(v) << '\n';
    }
  }
  for (const auto& [key, dist] : w.pair_distribution) {
    const auto& [a, b, va, vb] = key;
    for (const auto& [tag, p] : dist) {
      out << "pair\t" << a << '\t' << b << '\t' << escape_symbol(va) << '\t' << escape_symbol(vb)
          << '\t' << escape_symbol(tag) << '\t' << format_double(p) << '\n';
    }
  }
  for (const auto& [tag, p] : w.tag_frequency) {
    out << "frequency\t" << escape_symbol(tag) << '\t' << format_double(p) << '\n';
  }
  out << "end\n";
}

CombinerWeights load_weights(std::istream& in) {
  CombinerWeights w;
  std::string line;
  size_t line_no = 0;
  auto index = [&](const std::string& s, size_t limit) {
    size_t v = 0;
    try {
      v = std::stoul(s);
    } catch (const std::exception&) {
      throw ParseError("bad system index '" + s + "'", line_no);
    }
    if (v >= limit) throw ParseError("system index out of range", line_no);
    return v;
  };
  bool header = false, ended = false;
  while (!ended && std::getline(in, line)) {
    ++line_no;
    auto f = split(line, '\t');
    const std::string& key = f[0];
    if (!header) {
      if (key != kFormatTag || f.size() != 2 || f[1] != std::to_string(kFormatVersion)) {
        throw ParseError("not a combiner weights file", line_no);
      }
      header = true;
    } else if (key == "method" && f.size() == 2) {
      w.method = method_from_string(f[1]);
    } else if (key == "systems" && f.size() == 2) {
      w.num_systems = std::stoul(f[1]);
      w.precision.assign(w.num_systems, {});
      w.recall.assign(w.num_systems, {});
    } else if (key == "accuracy") {
      for (size_t i = 1; i < f.size(); ++i) w.accuracy.push_back(parse_double(f[i]));
    } else if ((key == "precision" || key == "recall") && f.size() == 4) {
      auto& table = key == "precision" ? w.precision : w.recall;
      table[index(f[1], w.num_systems)][unescape_symbol(f[2])] = parse_double(f[3]);
    } else if (key == "pair" && f.size() == 7) {
      w.pair_distribution[{index(f[1], w.num_systems), index(f[2], w.num_systems),
                           unescape_symbol(f[3]), unescape_symbol(f[4])}][unescape_symbol(f[5])] =
          parse_double(f[6]);
    } else if (key == "frequency" && f.size() == 3) {
      w.tag_frequency[unescape_symbol(f[1])] = parse_double(f[2]);
    } else if (key == "end") {
      ended = true;
    } else {
      throw ParseError("unexpected line in combiner weights", line_no);
    }
  }
  if (!ended) throw ParseError("truncated combiner weights", line_no + 1);
  return w;
}

}  // namespace mbsp::combine
