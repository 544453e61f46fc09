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

#include "mbsp/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

#include "mbsp/common.h"

namespace mbsp::eval {

namespace {

struct Counts {
  size_t found = 0, correct = 0, gold = 0;
};

void check_aligned(const SpanSets& found, const SpanSets& gold) {
  if (found.size() != gold.size()) {
    throw DomainError("found and gold differ in sentence count (" + std::to_string(found.size()) +
                      " vs " + std::to_string(gold.size()) + ")");
  }
}

// Per-sentence counts, overall and per type.
void count_sentence(const std::vector<repr::ChunkSpan>& found, const std::vector<repr::ChunkSpan>& gold,
                    Counts& overall, std::map<std::string, Counts>* per_type) {
  std::vector<repr::ChunkSpan> remaining = gold;
  std::sort(remaining.begin(), remaining.end());
  for (const auto& s : found) {
    ++overall.found;
    if (per_type) ++(*per_type)[s.type].found;
    auto it = std::lower_bound(remaining.begin(), remaining.end(), s);
    if (it != remaining.end() && *it == s) {
      ++overall.correct;
      if (per_type) ++(*per_type)[s.type].correct;
      remaining.erase(it);
    }
  }
  overall.gold += gold.size();
  if (per_type) {
    for (const auto& s : gold) ++(*per_type)[s.type].gold;
  }
}

}  // namespace

void EvalConfig::validate() const {
  if (!(beta > 0)) throw ConfigError("beta must be positive");
  if (!(tail > 0 && tail < 0.5)) throw ConfigError("tail fraction must lie in (0, 0.5)");
}

double f_beta(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  if (denom <= 0.0) return 0.0;
  return (b2 + 1.0) * precision * recall / denom;
}

TypeScore make_score(size_t found, size_t correct, size_t gold, double beta) {
  TypeScore s;
  s.found = found;
  s.correct = correct;
  s.gold = gold;
  s.precision = found ? 100.0 * static_cast<double>(correct) / static_cast<double>(found) : 0.0;
  s.recall = gold ? 100.0 * static_cast<double>(correct) / static_cast<double>(gold) : 0.0;
  s.f = f_beta(s.precision, s.recall, beta);
  return s;
}

ScoreReport score(const SpanSets& found, const SpanSets& gold, const EvalConfig& config) {
  config.validate();
  check_aligned(found, gold);
  Counts overall;
  std::map<std::string, Counts> per_type;
  for (size_t i = 0; i < found.size(); ++i) count_sentence(found[i], gold[i], overall, &per_type);
  ScoreReport report;
  report.overall = make_score(overall.found, overall.correct, overall.gold, config.beta);
  for (const auto& [type, c] : per_type) {
    report.per_type[type] = make_score(c.found, c.correct, c.gold, config.beta);
  }
  return report;
}

std::map<std::string, TypeScore> score_per_type(const SpanSets& found, const SpanSets& gold,
                                                const EvalConfig& config) {
  return score(found, gold, config).per_type;
}

BootstrapResult bootstrap(const SpanSets& found, const SpanSets& gold, const EvalConfig& config) {
  config.validate();
  check_aligned(found, gold);
  if (found.empty()) throw DomainError("bootstrap needs at least one sentence");
  const size_t n = found.size();
  std::vector<Counts> per_sentence(n);
  Counts total;
  for (size_t i = 0; i < n; ++i) {
    count_sentence(found[i], gold[i], per_sentence[i], nullptr);
    total.found += per_sentence[i].found;
    total.correct += per_sentence[i].correct;
    total.gold += per_sentence[i].gold;
  }

  BootstrapResult result;
  result.point = make_score(total.found, total.correct, total.gold, config.beta).f;
  const size_t samples = config.bootstrap_samples;
  result.samples.assign(samples, 0.0);

  auto run = [&](size_t first, size_t stride) {
    for (size_t s = first; s < samples; s += stride) {
      std::seed_seq seq{static_cast<uint32_t>(config.seed), static_cast<uint32_t>(config.seed >> 32),
                        static_cast<uint32_t>(s), static_cast<uint32_t>(static_cast<uint64_t>(s) >> 32)};
      std::mt19937_64 rng(seq);
      std::uniform_int_distribution<size_t> pick(0, n - 1);
      Counts c;
      for (size_t d = 0; d < n; ++d) {
        const Counts& x = per_sentence[pick(rng)];
        c.found += x.found;
        c.correct += x.correct;
        c.gold += x.gold;
      }
      result.samples[s] = make_score(c.found, c.correct, c.gold, config.beta).f;
    }
  };
  const size_t workers = std::clamp<size_t>(config.workers, 1, std::max<size_t>(1, samples));
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < workers; ++t) pool.emplace_back(run, t, workers);
    for (auto& th : pool) th.join();
  }
  if (samples == 0) {
    result.mean = result.lower = result.upper = result.point;
    return result;
  }

  std::sort(result.samples.begin(), result.samples.end());
  if (result.samples.front() == result.samples.back()) {
    // Summing identical values drifts by a few ulps; keep the constant case exact.
    result.mean = result.samples.front();
    result.stddev = 0.0;
  } else {
    double sum = 0.0;
    for (double f : result.samples) sum += f;
    result.mean = sum / static_cast<double>(samples);
    double ss = 0.0;
    for (double f : result.samples) ss += (f - result.mean) * (f - result.mean);
    result.stddev = samples > 1 ? std::sqrt(ss / static_cast<double>(samples - 1)) : 0.0;
  }
  const auto rank = static_cast<size_t>(std::ceil(config.tail * static_cast<double>(samples)));
  const size_t r = std::clamp<size_t>(rank, 1, samples);
  result.lower = result.samples[r - 1];
  result.upper = result.samples[samples - r];
  return result;
}

namespace {

std::string row(const std::string& label, const TypeScore& s) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-8s %7.2f%% %7.2f%% %7.2f\n", label.c_str(), s.precision,
                s.recall, s.f);
  return buf;
}

}  // namespace

std::string format_table(const ScoreReport& report, double beta) {
  char head[128];
  std::snprintf(head, sizeof(head), "%-8s %8s %8s %7s\n", "type", "precision", "recall",
                ("F" + format_double(beta)).c_str());
  std::string out = head;
  for (const auto& [type, s] : report.per_type) out += row(type.empty() ? "-" : type, s);
  out += row("all", report.overall);
  return out;
}

std::string format_lines(const ScoreReport& report) {
  std::string out;
  auto line = [&](const std::string& type, const TypeScore& s) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s\t%.2f\t%.2f\t%.2f\n", type.c_str(), s.precision, s.recall, s.f);
    out += buf;
  };
  for (const auto& [type, s] : report.per_type) line(type.empty() ? "-" : type, s);
  line("all", report.overall);
  return out;
}

}  // namespace mbsp::eval
