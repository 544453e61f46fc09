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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "mbsp/common.h"
#include "mbsp/mbl.h"

using namespace mbsp;
using mbl::Instance;

namespace {

std::vector<Instance> xor_data(size_t copies) {
  std::vector<Instance> out;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (size_t c = 0; c < copies; ++c) {
        out.push_back({{std::to_string(a), std::to_string(b)}, std::to_string(a ^ b)});
      }
    }
  }
  return out;
}

// Tabulates P(v) and H(C|v) directly from the rows.
double oracle_weight(const std::vector<Instance>& data, size_t f) {
  const double n = static_cast<double>(data.size());
  auto h = [](const std::map<std::string, double>& counts) {
    double total = 0, out = 0;
    for (const auto& [k, c] : counts) total += c;
    for (const auto& [k, c] : counts) {
      if (c > 0) out -= (c / total) * std::log2(c / total);
    }
    return out;
  };
  std::map<std::string, double> classes, values;
  std::map<std::string, std::map<std::string, double>> joint;
  for (const auto& i : data) {
    classes[i.label] += 1;
    values[i.features[f]] += 1;
    joint[i.features[f]][i.label] += 1;
  }
  const double split = h(values);
  if (split == 0) return 0;
  double cond = 0;
  for (const auto& [v, cc] : joint) cond += values[v] / n * h(cc);
  return std::max(0.0, (h(classes) - cond) / split);
}

}  // namespace

TEST_CASE("entropy of count distributions") {
  CHECK(mbl::entropy(mbl::ClassCounts{{"a", 5}, {"b", 5}}) == doctest::Approx(1.0));
  CHECK(mbl::entropy(mbl::ClassCounts{{"a", 7}}) == 0.0);
  CHECK(mbl::entropy(mbl::ClassCounts{{"a", 3}, {"b", 1}}) == doctest::Approx(0.811278).epsilon(1e-6));
  CHECK_THROWS_AS(mbl::entropy(mbl::ClassCounts{{"a", 0}}), DomainError);
}

TEST_CASE("gain ratio on small hand examples") {
  std::vector<Instance> two{{{"man", "saw", "the"}, "V"}, {{"the", "saw", "."}, "N"}};
  auto t = mbl::gain_ratio_weights(two);
  CHECK(t.weights[1] == 0.0);
  CHECK(t.weights[0] > 0.0);

  auto x = mbl::gain_ratio_weights(xor_data(100));
  CHECK(x.weights[0] == 0.0);
  CHECK(x.weights[1] == 0.0);
  CHECK_THROWS_AS(mbl::gain_ratio_weights(std::vector<Instance>{}), DomainError);
}

TEST_CASE("gain ratio agrees with a brute-force tabulator") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10000; ++trial) {
    const size_t arity = 1 + rng() % 3, n = 1 + rng() % 20;
    std::vector<Instance> data;
    for (size_t i = 0; i < n; ++i) {
      Instance inst;
      for (size_t f = 0; f < arity; ++f) inst.features.push_back(std::to_string(rng() % 2));
      inst.label = std::to_string(rng() % 2);
      data.push_back(inst);
    }
    const auto w = mbl::gain_ratio_weights(data).weights;
    for (size_t f = 0; f < arity; ++f) REQUIRE(w[f] == doctest::Approx(oracle_weight(data, f)).epsilon(1e-9));
  }
}

TEST_CASE("fallback turns a degenerate weight table into ones") {
  auto m = mbl::train(xor_data(100));
  CHECK(m.weights() == std::vector<double>{1.0, 1.0});
  mbl::LearnerConfig off;
  off.degenerate_weight_fallback = false;
  CHECK(mbl::train(xor_data(100), off).weights() == std::vector<double>{0.0, 0.0});
}

TEST_CASE("classify follows nearest distance sets") {
  std::vector<Instance> two{{{"man", "saw", "the"}, "V"}, {{"the", "saw", "."}, "N"}};
  mbl::LearnerConfig k1{1, mbl::TiePolicy::kGlobalClassFrequency, true};
  auto m = mbl::train(two, k1);
  // the weight of feature 2 is 0, so only mismatches in 1 and 3 count
  auto r = m.classify(std::vector<std::string>{"boy", "saw", "the"});
  CHECK(r.label == "V");

  auto exact = m.classify(std::vector<std::string>{"the", "saw", "."});
  CHECK(exact.label == "N");
  CHECK(exact.nearest_distance == 0.0);

  // distances {0,1,1} with labels {A,B,B}; k=2 pools both sets
  std::vector<Instance> d{{{"x", "y"}, "A"}, {{"x", "z"}, "B"}, {{"x", "w"}, "B"}, {{"q", "y"}, "C"}};
  mbl::LearnerConfig k2{2, mbl::TiePolicy::kGlobalClassFrequency, false};
  auto md = mbl::train(d, k2);
  auto rd = md.classify(std::vector<std::string>{"x", "y"});
  CHECK(rd.votes.at("B") == 2);

  CHECK_THROWS_AS(m.classify(std::vector<std::string>{"a"}), DomainError);
}

TEST_CASE("property: pruned search gives the votes of an exhaustive scan") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const size_t arity = 1 + rng() % 6, n = 1 + rng() % 60, k = 1 + rng() % 4;
    std::vector<Instance> data(n);
    for (auto& inst : data) {
      for (size_t f = 0; f < arity; ++f) inst.features.push_back(std::to_string(rng() % (2 + f)));
      inst.label = std::string(1, static_cast<char>('a' + rng() % 3));
    }
    const auto m = mbl::train(data, {k, mbl::TiePolicy::kGlobalClassFrequency, true});
    const auto& w = m.weights();
    for (int q = 0; q < 5; ++q) {
      std::vector<std::string> query;
      for (size_t f = 0; f < arity; ++f) query.push_back(std::to_string(rng() % (3 + f)));
      std::vector<double> dist;
      for (const auto& inst : data) {
        double d = 0;
        for (size_t f = 0; f < arity; ++f) d += inst.features[f] != query[f] ? w[f] : 0.0;
        dist.push_back(d);
      }
      std::vector<double> distinct = dist;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      const double horizon = distinct[std::min(k, distinct.size()) - 1];
      mbl::ClassCounts expected;
      for (size_t i = 0; i < n; ++i) {
        if (dist[i] <= horizon) ++expected[data[i].label];
      }
      CHECK(m.classify(query).votes == expected);
    }
  }
}

TEST_CASE("single instance model predicts its label everywhere") {
  auto m = mbl::train(std::vector<Instance>{{{"a", "b"}, "L"}});
  CHECK(m.classify(std::vector<std::string>{"x", "y"}).label == "L");
}

TEST_CASE("ties go to the globally frequent class then lexicographic order") {
  std::vector<Instance> d{{{"a"}, "Z"}, {{"b"}, "Y"}, {{"c"}, "Z"}, {{"d"}, "Y"}, {{"e"}, "Z"}};
  mbl::LearnerConfig k1{1, mbl::TiePolicy::kGlobalClassFrequency, true};
  auto m = mbl::train(d, k1);
  // all at distance 1: 3 Z against 2 Y
  CHECK(m.classify(std::vector<std::string>{"q"}).label == "Z");

  std::vector<Instance> even{{{"a"}, "Z"}, {{"b"}, "Y"}};
  auto me = mbl::train(even, k1);
  CHECK(me.classify(std::vector<std::string>{"q"}).label == "Y");
}

TEST_CASE("XOR facts that follow from the voting rules") {
  mbl::LearnerConfig k1{1, mbl::TiePolicy::kGlobalClassFrequency, true};
  CHECK(mbl::xor_experiment(0, 3, 1, k1).mean_correct == 400.0);
  // k=3 pools d=0 (100 right), d=1 (200 wrong), d=2 (100 right): a tie every time
  mbl::LearnerConfig k3{3, mbl::TiePolicy::kGlobalClassFrequency, true};
  CHECK(mbl::xor_experiment(0, 3, 1, k3).mean_correct == 200.0);
  const auto a = mbl::xor_experiment(4, 5, 9, k3), b = mbl::xor_experiment(4, 5, 9, k3);
  CHECK(a.mean_correct == b.mean_correct);
}

TEST_CASE("property: constant features and permutations do not change answers") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Instance> data, constant, permuted;
    const size_t n = 5 + rng() % 20;
    for (size_t i = 0; i < n; ++i) {
      Instance inst{{std::to_string(rng() % 3), std::to_string(rng() % 3), std::to_string(rng() % 2)},
                    std::string(1, static_cast<char>('a' + rng() % 3))};
      data.push_back(inst);
      auto c = inst;
      c.features.push_back("k");
      constant.push_back(c);
      permuted.push_back({{inst.features[2], inst.features[0], inst.features[1]}, inst.label});
    }
    const auto m = mbl::train(data), mc = mbl::train(constant), mp = mbl::train(permuted);
    for (int q = 0; q < 10; ++q) {
      std::vector<std::string> query{std::to_string(rng() % 3), std::to_string(rng() % 3), std::to_string(rng() % 2)};
      const auto base = m.classify(query).label;
      auto qc = query;
      qc.push_back("k");
      CHECK(mc.classify(qc).label == base);
      CHECK(mp.classify(std::vector<std::string>{query[2], query[0], query[1]}).label == base);
    }
  }
}

TEST_CASE("batch classification matches single calls and keeps order") {
  auto m = mbl::train(xor_data(3));
  std::vector<mbl::FeatureVector> qs{{"0", "1"}, {"1", "1"}, {"0", "0"}, {"1", "0"}};
  const auto one = mbl::classify_batch(m, qs, 1), many = mbl::classify_batch(m, qs, 3);
  REQUIRE(one.size() == 4);
  for (size_t i = 0; i < qs.size(); ++i) {
    CHECK(one[i].label == m.classify(qs[i]).label);
    CHECK(many[i].label == one[i].label);
  }
  CHECK(mbl::classify_batch(m, std::vector<mbl::FeatureVector>{}).empty());
  qs.push_back({"1"});
  CHECK_THROWS_AS(mbl::classify_batch(m, qs), DomainError);
}

TEST_CASE("models survive a save and load") {
  std::vector<Instance> d{{{"a b", "x\ty"}, "L1"}, {{"c", "y"}, "L2"}, {{"a b", "y"}, "L1"}};
  auto m = mbl::train(d);
  std::stringstream ss;
  mbl::save_model(m, ss);
  auto back = mbl::load_model(ss);
  CHECK(back.weights() == m.weights());
  CHECK(back.size() == m.size());
  CHECK(back.classify(std::vector<std::string>{"c", "x\ty"}).label == m.classify(std::vector<std::string>{"c", "x\ty"}).label);
  std::stringstream bad("not a model\n");
  CHECK_THROWS_AS(mbl::load_model(bad), DomainError);
}
