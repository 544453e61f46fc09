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

#include <random>
#include <sstream>

#include "mbsp/combine.h"
#include "mbsp/common.h"

using namespace mbsp;
using combine::Method;
using Column = std::vector<std::string>;

namespace {

// Five binary classifiers over eight patterns, plus the correct column.
const std::vector<Column> kPatterns{{"0", "0", "0", "0", "0"}, {"1", "1", "1", "1", "1"}, {"0", "0", "0", "0", "0"},
                                    {"1", "0", "1", "1", "1"}, {"0", "0", "1", "0", "0"}, {"1", "1", "1", "1", "0"},
                                    {"1", "0", "0", "0", "0"}, {"1", "1", "1", "0", "1"}};
const Column kCorrect{"0", "1", "0", "1", "0", "1", "0", "1"};

combine::SystemOutputs pattern_outputs() {
  combine::SystemOutputs out;
  out.systems.assign(5, {});
  for (const auto& p : kPatterns) {
    for (size_t s = 0; s < 5; ++s) out.systems[s].push_back(p[s]);
  }
  out.gold = kCorrect;
  return out;
}

}  // namespace

TEST_CASE("majority voting repairs every pattern of the toy table") {
  for (size_t i = 0; i < kPatterns.size(); ++i) CHECK(combine::majority_vote(kPatterns[i]) == kCorrect[i]);
  CHECK(combine::majority_vote(Column{"x", "x", "x"}) == "x");
  // ties go to the earliest system
  CHECK(combine::majority_vote(Column{"b", "a"}) == "b");
  CHECK(combine::majority_vote(Column{"a", "b", "b", "a"}) == "a");
}

TEST_CASE("every weighted method also recovers the toy table") {
  const auto data = pattern_outputs();
  for (Method m : {Method::kTotPrecision, Method::kTagPrecision, Method::kPrecisionRecall}) {
    CHECK(combine::combine(data, combine::fit_weights(data, m)) == kCorrect);
  }
}

TEST_CASE("precision-recall weights by hand") {
  combine::CombinerWeights w;
  w.method = Method::kPrecisionRecall;
  w.num_systems = 2;
  w.precision = {{{"v1", 0.9}}, {{"v2", 0.6}}};
  w.recall = {{{"v2", 0.8}}, {{"v1", 0.5}}};
  const Column out{"v1", "v2"};
  const auto scores = combine::vote_scores(out, w);
  CHECK(scores.at("v1") == doctest::Approx(1.4).epsilon(1e-9));
  CHECK(scores.at("v2") == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(combine::vote(out, w) == "v1");
}

TEST_CASE("tag pair distributions") {
  combine::SystemOutputs t;
  t.systems = {Column(10, "v1"), Column(10, "v2")};
  t.gold = {"v1", "v1", "v2", "v2", "v2", "v2", "v2", "v2", "v2", "v3"};
  const auto w = combine::fit_weights(t, Method::kTagPair);
  const auto& d = w.pair_distribution.at({0, 1, "v1", "v2"});
  CHECK(d.at("v1") == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(d.at("v2") == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(d.at("v3") == doctest::Approx(0.1).epsilon(1e-9));

  // both systems wrong in the same way: the pair table still knows the answer
  combine::SystemOutputs wrong;
  wrong.systems = {Column(4, "v1"), Column(4, "v2")};
  wrong.gold = Column(4, "v3");
  const auto w2 = combine::fit_weights(wrong, Method::kTagPair);
  CHECK(combine::vote(Column{"v1", "v2"}, w2) == "v3");

  // an unseen pair backs off to the tuning tag frequencies
  CHECK(combine::vote(Column{"v9", "v9"}, w) == "v2");
}

TEST_CASE("identical systems put tag pair mass on the diagonal") {
  combine::SystemOutputs t;
  const Column outs{"a", "b", "a", "c", "b", "a", "a", "b", "c", "a"};
  t.systems = {outs, outs};
  t.gold = {"a", "b", "a", "c", "a", "a", "b", "b", "c", "a"};
  const auto w = combine::fit_weights(t, Method::kTagPair);
  for (const auto& [key, dist] : w.pair_distribution) {
    CHECK(std::get<2>(key) == std::get<3>(key));
    double sum = 0;
    for (const auto& [tag, p] : dist) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  for (Method m : {Method::kMajority, Method::kTotPrecision, Method::kTagPrecision, Method::kPrecisionRecall}) {
    auto fitted = m == Method::kMajority ? combine::CombinerWeights{} : combine::fit_weights(t, m);
    if (m == Method::kMajority) fitted.num_systems = 2;
    for (const auto& o : outs) CHECK(combine::vote(Column{o, o}, fitted) == o);
  }
}

TEST_CASE("fitted weights on perfect and single systems") {
  combine::SystemOutputs t;
  t.systems = {{"x", "y", "x"}};
  t.gold = {"x", "y", "x"};
  for (Method m : {Method::kTotPrecision, Method::kTagPrecision, Method::kPrecisionRecall, Method::kTagPair}) {
    const auto w = combine::fit_weights(t, m);
    CHECK(combine::vote(Column{"y"}, w) == "y");
  }
  CHECK(combine::fit_weights(t, Method::kTotPrecision).accuracy.front() == 1.0);
  combine::SystemOutputs empty;
  empty.systems = {{}};
  CHECK_THROWS_AS(combine::fit_weights(empty, Method::kTagPrecision), DomainError);
}

TEST_CASE("property: equal accuracies make total precision a majority vote") {
  std::mt19937_64 rng(2);
  combine::CombinerWeights w;
  w.method = Method::kTotPrecision;
  w.num_systems = 5;
  w.accuracy.assign(5, 0.8);
  for (int trial = 0; trial < 5000; ++trial) {
    Column out;
    for (int s = 0; s < 5; ++s) out.push_back(std::string(1, static_cast<char>('a' + rng() % 3)));
    REQUIRE(combine::vote(out, w) == combine::majority_vote(out));
  }
}

TEST_CASE("property: fitted probabilities stay in range") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    combine::SystemOutputs t;
    t.systems.assign(3, {});
    for (int i = 0; i < 30; ++i) {
      for (auto& s : t.systems) s.push_back(std::string(1, static_cast<char>('a' + rng() % 3)));
      t.gold.push_back(std::string(1, static_cast<char>('a' + rng() % 3)));
    }
    const auto pr = combine::fit_weights(t, Method::kPrecisionRecall);
    for (const auto* table : {&pr.precision, &pr.recall}) {
      for (const auto& per_system : *table) {
        for (const auto& [tag, v] : per_system) REQUIRE((v >= 0.0 && v <= 1.0));
      }
    }
    for (const auto& [key, dist] : combine::fit_weights(t, Method::kTagPair).pair_distribution) {
      double sum = 0;
      for (const auto& [tag, p] : dist) sum += p;
      REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("stacked instances") {
  const auto data = pattern_outputs();
  const auto plain = combine::build_stacked_instances(data);
  REQUIRE(plain.size() == 8);
  CHECK(plain[3].features.size() == 5);
  CHECK(plain[3].label == "1");
  std::vector<Column> pos{Column(8, "NN")};
  CHECK(combine::build_stacked_instances(data, pos)[0].features.size() == 6);
  CHECK(combine::build_stacked_instances(combine::SystemOutputs{{{}, {}}, {}}).empty());
  auto broken = data;
  broken.systems[2].pop_back();
  CHECK_THROWS_AS(combine::build_stacked_instances(broken), DomainError);
}

TEST_CASE("weights survive a save and load") {
  const auto data = pattern_outputs();
  for (Method m : {Method::kTotPrecision, Method::kTagPrecision, Method::kPrecisionRecall, Method::kTagPair}) {
    const auto w = combine::fit_weights(data, m);
    std::stringstream ss;
    combine::save_weights(w, ss);
    const auto back = combine::load_weights(ss);
    CHECK(back.method == m);
    CHECK(combine::combine(data, back) == combine::combine(data, w));
  }
  CHECK_THROWS_AS(combine::method_from_string("borda"), ConfigError);
}
