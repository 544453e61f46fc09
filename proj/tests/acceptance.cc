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

// Acceptance run. Prints one PASS/FAIL line per criterion, then a summary.
//
//   acceptance [--known-failure NAME]...
//
// Exits 0 when the set of failing criteria is exactly the declared set of
// known failures, so both a new failure and a known failure that starts
// passing are reported through the exit code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mbsp/combine.h"
#include "mbsp/common.h"
#include "mbsp/corpus.h"
#include "mbsp/eval.h"
#include "mbsp/mbl.h"
#include "mbsp/pipeline.h"
#include "mbsp/repr.h"

using namespace mbsp;

namespace {

// Tolerances.
constexpr double kFTolerance = 0.005;
constexpr double kExact = 1e-9;
constexpr size_t kXorRuns = 200;
constexpr double kXorSeconds = 60.0;
constexpr size_t kRoundTrips = 10000;
constexpr size_t kGainRatioCases = 10000;
constexpr size_t kNestingCases = 100000;
constexpr size_t kBootstrapSamples = 10000;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string> words(const std::string& s) { return split_whitespace(s); }

// ---------------------------------------------------------------------------

Outcome xor_criterion() {
  Outcome o;
  const mbl::LearnerConfig k3{3, mbl::TiePolicy::kGlobalClassFrequency, true};
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<mbl::XorResult> r;
  for (size_t extra = 0; extra <= 10; ++extra) r.push_back(mbl::xor_experiment(extra, kXorRuns, 1000 + extra, k3));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  o.require(r[0].mean_correct == 400.0, "0 extra: " + fmt(r[0].mean_correct) + " != 400");
  o.require(r[1].mean_correct == 400.0, "1 extra: " + fmt(r[1].mean_correct) + " != 400");
  for (size_t e = 3; e <= 10; ++e) {
    o.require(r[e].mean_correct < 400.0, std::to_string(e) + " extra not below 400");
  }
  o.require(r[10].mean_correct >= 190.0 && r[10].mean_correct <= 260.0,
            "10 extra: " + fmt(r[10].mean_correct) + " outside [190, 260]");
  const double n = static_cast<double>(kXorRuns);
  for (size_t e = 0; e + 1 <= 10; ++e) {
    const double se = std::sqrt((r[e].stddev * r[e].stddev + r[e + 1].stddev * r[e + 1].stddev) / n);
    o.require(r[e + 1].mean_correct <= r[e].mean_correct + 2 * se,
              "trend rises " + std::to_string(e) + "->" + std::to_string(e + 1) + " (" + fmt(r[e].mean_correct) +
                  " -> " + fmt(r[e + 1].mean_correct) + ")");
  }
  o.require(seconds < kXorSeconds, "runtime " + fmt(seconds, 1) + " s");

  const mbl::LearnerConfig k1{1, mbl::TiePolicy::kGlobalClassFrequency, true};
  const auto k1_0 = mbl::xor_experiment(0, kXorRuns, 1000, k1), k1_1 = mbl::xor_experiment(1, kXorRuns, 1001, k1);
  std::string curve;
  for (const auto& x : r) curve += (curve.empty() ? "" : " ") + fmt(x.mean_correct, 1);
  o.detail += " | k=3 means: " + curve + " | k=1 at 0/1 extra: " + fmt(k1_0.mean_correct, 1) + "/" +
              fmt(k1_1.mean_correct, 1) + " | " + fmt(seconds, 1) + " s";
  return o;
}

Outcome fbeta_criterion() {
  Outcome o;
  struct Row {
    const char* name;
    double p, r, f;
  };
  const Row rows[] = {{"NP chunking", 94.01, 92.67, 93.34}, {"chunking", 94.04, 91.00, 92.50},
                      {"ADJP", 85.25, 59.36, 69.99},         {"ADVP", 85.03, 71.48, 77.67},
                      {"CONJP", 42.86, 33.33, 37.50},        {"INTJ", 100.00, 50.00, 66.67},
                      {"LST", 0.00, 0.00, 0.00},             {"NP", 94.14, 92.34, 93.23},
                      {"PP", 96.45, 96.59, 96.52},           {"PRT", 79.49, 58.49, 67.39},
                      {"SBAR", 89.81, 72.52, 80.25},         {"VP", 93.97, 91.35, 92.64},
                      {"all", 94.04, 91.00, 92.50}};
  size_t ok = 0;
  for (const auto& row : rows) {
    const double f = eval::f_beta(row.p, row.r);
    const bool good = std::abs(f - row.f) <= kFTolerance;
    ok += good;
    o.require(good, std::string(row.name) + " " + fmt(f, 4) + " vs " + fmt(row.f));
  }
  o.detail = std::to_string(ok) + "/" + std::to_string(std::size(rows)) + " rows within 0.005" +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

Outcome table1_criterion() {
  Outcome o;
  using repr::Scheme;
  const std::vector<repr::ChunkSpan> spans{{1, 2, ""}, {4, 5, ""}, {6, 6, ""}, {8, 8, ""}, {12, 13, ""}, {14, 15, ""}};
  const std::vector<std::pair<Scheme, std::string>> rows{
      {Scheme::kIOB1, "O I I O I I B O I O O O I I B I O"}, {Scheme::kIOB2, "O B I O B I B O B O O O B I B I O"},
      {Scheme::kIOE1, "O I I O I E I O I O O O I E I I O"}, {Scheme::kIOE2, "O I E O I E E O E O O O I E I E O"},
      {Scheme::kOpen, ". [ . . [ . [ . [ . . . [ . [ . ."}, {Scheme::kClose, ". . ] . . ] ] . ] . . . . ] . ] ."}};
  for (const auto& [s, text] : rows) {
    o.require(repr::encode(spans, s, 17) == words(text), "encode " + repr::to_string(s));
    if (repr::is_io_scheme(s)) {
      for (const auto& [t, other] : rows) {
        if (repr::is_io_scheme(t)) {
          o.require(repr::convert(words(text), s, t) == words(other),
                    "convert " + repr::to_string(s) + "->" + repr::to_string(t));
        }
      }
    }
  }
  std::mt19937_64 rng(1);
  size_t failures = 0;
  for (Scheme s : {Scheme::kIOB1, Scheme::kIOB2, Scheme::kIOE1, Scheme::kIOE2, Scheme::kOpen}) {
    for (size_t trial = 0; trial < kRoundTrips; ++trial) {
      const size_t n = 1 + rng() % 25;
      std::vector<repr::ChunkSpan> sp;
      for (size_t i = 0; i < n;) {
        if (rng() % 3 == 0) {
          ++i;
          continue;
        }
        const size_t end = std::min(n - 1, i + rng() % 4);
        sp.push_back({i, end, trial % 2 ? "" : std::string(rng() % 2 ? "NP" : "VP")});
        i = end + 1;
      }
      const bool same = s == Scheme::kOpen
                            ? repr::decode_brackets(repr::encode(sp, Scheme::kOpen, n),
                                                    repr::encode(sp, Scheme::kClose, n)) == sp
                            : repr::decode(repr::encode(sp, s, n), s) == sp;
      failures += !same;
    }
  }
  o.require(failures == 0, std::to_string(failures) + " round-trip failures");
  o.detail = "6 rows, " + std::to_string(5 * kRoundTrips) + " round trips" + (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

Outcome combination_criterion() {
  Outcome o;
  const std::vector<std::vector<std::string>> patterns{
      {"0", "0", "0", "0", "0"}, {"1", "1", "1", "1", "1"}, {"0", "0", "0", "0", "0"}, {"1", "0", "1", "1", "1"},
      {"0", "0", "1", "0", "0"}, {"1", "1", "1", "1", "0"}, {"1", "0", "0", "0", "0"}, {"1", "1", "1", "0", "1"}};
  const std::vector<std::string> correct{"0", "1", "0", "1", "0", "1", "0", "1"};
  for (size_t i = 0; i < patterns.size(); ++i) {
    o.require(combine::majority_vote(patterns[i]) == correct[i], "pattern " + std::to_string(i + 1));
  }

  combine::CombinerWeights pr;
  pr.method = combine::Method::kPrecisionRecall;
  pr.num_systems = 2;
  pr.precision = {{{"v1", 0.9}}, {{"v2", 0.6}}};
  pr.recall = {{{"v2", 0.8}}, {{"v1", 0.5}}};
  const std::vector<std::string> out{"v1", "v2"};
  const auto scores = combine::vote_scores(out, pr);
  o.require(std::abs(scores.at("v1") - 1.4) <= kExact && std::abs(scores.at("v2") - 0.8) <= kExact,
            "precision-recall scores " + fmt(scores.at("v1"), 12) + "/" + fmt(scores.at("v2"), 12));
  o.require(combine::vote(out, pr) == "v1", "precision-recall winner");

  combine::SystemOutputs t;
  t.systems = {std::vector<std::string>(10, "v1"), std::vector<std::string>(10, "v2")};
  t.gold = {"v1", "v1", "v2", "v2", "v2", "v2", "v2", "v2", "v2", "v3"};
  const auto& d = combine::fit_weights(t, combine::Method::kTagPair).pair_distribution.at({0, 1, "v1", "v2"});
  o.require(std::abs(d.at("v1") - 0.2) <= kExact && std::abs(d.at("v2") - 0.7) <= kExact &&
                std::abs(d.at("v3") - 0.1) <= kExact,
            "tag pair distribution");
  o.detail = "8/8 patterns, PR 1.4/0.8, TagPair 0.2/0.7/0.1" + (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

double brute_gain_ratio(const std::vector<mbl::Instance>& data, size_t f) {
  auto h = [](const std::map<std::string, double>& c) {
    double n = 0, out = 0;
    for (auto& [k, v] : c) n += v;
    for (auto& [k, v] : c) out -= v > 0 ? v / n * std::log2(v / n) : 0;
    return out;
  };
  std::map<std::string, double> cls, val;
  std::map<std::string, std::map<std::string, double>> joint;
  for (const auto& i : data) {
    cls[i.label] += 1;
    val[i.features[f]] += 1;
    joint[i.features[f]][i.label] += 1;
  }
  const double split = h(val);
  if (split == 0) return 0;
  double cond = 0;
  for (auto& [v, c] : joint) cond += val[v] / static_cast<double>(data.size()) * h(c);
  return std::max(0.0, (h(cls) - cond) / split);
}

Outcome gain_ratio_criterion() {
  Outcome o;
  std::mt19937_64 rng(2);
  size_t mismatches = 0;
  double worst = 0;
  for (size_t trial = 0; trial < kGainRatioCases; ++trial) {
    const size_t arity = 1 + rng() % 3, n = 1 + rng() % 20;
    std::vector<mbl::Instance> data(n);
    for (auto& inst : data) {
      for (size_t f = 0; f < arity; ++f) inst.features.push_back(std::to_string(rng() % 2));
      inst.label = std::to_string(rng() % 2);
    }
    const auto w = mbl::gain_ratio_weights(data).weights;
    for (size_t f = 0; f < arity; ++f) {
      const double d = std::abs(w[f] - brute_gain_ratio(data, f));
      worst = std::max(worst, d);
      mismatches += d > kExact;
    }
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
  o.detail = std::to_string(kGainRatioCases) + " datasets, max |diff| " + fmt(worst, 15) +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

Outcome balancing_criterion() {
  Outcome o;
  repr::BracketStream opens(4), closes(4);
  opens[0] = "X";
  opens[1] = "NP";
  closes[2] = "NP";
  closes[3] = "Y";
  o.require(repr::balance_brackets(opens, closes) == std::vector<repr::ChunkSpan>{{1, 2, "NP"}}, "( a ( b c ) d )");

  std::mt19937_64 rng(3);
  size_t bad = 0;
  for (size_t trial = 0; trial < kNestingCases; ++trial) {
    const size_t n = 1 + rng() % 15;
    std::vector<size_t> op, cl;
    for (size_t i = 0; i < n; ++i) {
      if (rng() % 3 == 0) op.push_back(i);
      if (rng() % 4 == 0) cl.push_back(i);
      if (rng() % 12 == 0) cl.push_back(i);
    }
    std::vector<repr::ChunkSpan> spans;
    bool ok = true;
    for (auto [s, e] : repr::flatten(repr::balance_clauses(op, cl, n))) {
      ok = ok && s <= e && e < n && std::find(op.begin(), op.end(), s) != op.end();
      spans.push_back({s, e, ""});
    }
    bad += !(ok && repr::is_proper_nesting(spans));
  }
  o.require(bad == 0, std::to_string(bad) + " improper nestings");

  const std::vector<size_t> op{0, 3, 5, 7}, cl{4, 11, 11, 12};
  o.require(repr::flatten(repr::balance_clauses(op, cl, 13)) ==
                std::vector<std::pair<size_t, size_t>>{{0, 12}, {3, 4}, {5, 11}, {7, 11}},
            "four clause example");
  o.detail = "{(b,c)}, " + std::to_string(kNestingCases) + " nesting cases, 4 clauses" +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

Outcome bootstrap_criterion() {
  Outcome o;
  // Fixed synthetic system output at NP-chunking scale.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  eval::SpanSets found(2000), gold(2000);
  for (size_t s = 0; s < gold.size(); ++s) {
    const size_t chunks = 3 + rng() % 8;
    for (size_t c = 0; c < chunks; ++c) {
      const repr::ChunkSpan sp{3 * c, 3 * c + 1, "NP"};
      gold[s].push_back(sp);
      const double x = u(rng);
      if (x < 0.93) {
        found[s].push_back(sp);
      } else if (x < 0.97) {
        found[s].push_back({3 * c, 3 * c, "NP"});
      }
    }
  }
  eval::EvalConfig cfg;
  cfg.bootstrap_samples = kBootstrapSamples;
  cfg.seed = 11;
  const auto a = eval::bootstrap(found, gold, cfg);
  const double bound = 3 * a.stddev / std::sqrt(static_cast<double>(kBootstrapSamples));
  o.require(std::abs(a.mean - a.point) <= bound,
            "mean " + fmt(a.mean, 4) + " vs point " + fmt(a.point, 4) + " (bound " + fmt(bound, 4) + ")");
  o.require(eval::bootstrap(found, gold, cfg).samples == a.samples, "not deterministic");

  eval::SpanSets flat_gold(100, {{0, 1, "NP"}, {3, 4, "NP"}}), flat_found(100, {{0, 1, "NP"}});
  const auto z = eval::bootstrap(flat_found, flat_gold, cfg);
  o.require(z.stddev == 0.0 && z.lower == z.point && z.upper == z.point, "zero-variance corpus");
  o.detail = "point " + fmt(a.point) + " mean " + fmt(a.mean, 4) + " sd " + fmt(a.stddev, 3) + " bounds " +
             fmt(a.lower) + "/" + fmt(a.upper) + (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

Outcome leak_criterion(const std::vector<io::TreeSentence>& trees) {
  Outcome o;
  std::vector<std::vector<Sentence>> sections(10);
  std::vector<pipeline::TagSequences> gold(10);
  for (size_t i = 0; i < 100 && i < trees.size(); ++i) {
    sections[i % 10].push_back(trees[i].tokens);
    auto spans = io::base_phrases(trees[i]);
    std::erase_if(spans, [](const repr::ChunkSpan& s) { return s.type != "NP"; });
    gold[i % 10].push_back(repr::encode(spans, repr::Scheme::kIOB1, trees[i].tokens.size()));
  }
  const auto p1 = features::FeatureTemplate::parse("w[-2..0] p[-4..3]");
  const auto p2 = features::FeatureTemplate::parse("w[-2..0] p[-4..3] c[-2,-1,1,2]");
  const mbl::LearnerConfig learner{3, mbl::TiePolicy::kGlobalClassFrequency, true};
  for (auto mode : {pipeline::LeakMode::kNestedCv, pipeline::LeakMode::kGoldInTrain}) {
    const auto plan = pipeline::build_fold_plan(10, mode);
    const auto r = pipeline::run_cascaded_cv(sections, gold, plan, p1, p2, learner);
    size_t leaks = 0;
    for (size_t f = 0; f < plan.folds.size(); ++f) {
      const pipeline::Provenance own = pipeline::Provenance{1} << plan.folds[f].test;
      leaks += (r.training_provenance[f] & own) != 0;
      for (auto p : r.provenance[plan.folds[f].test]) leaks += (p & own) != 0;
    }
    o.require(leaks == 0, pipeline::to_string(mode) + ": " + std::to_string(leaks) + " leaks");
  }
  auto leaky = pipeline::build_fold_plan(10, pipeline::LeakMode::kNestedCv);
  leaky.folds[0].inner[0].train.push_back(0);
  const auto r = pipeline::run_cascaded_cv(sections, gold, leaky, p1, p2, learner);
  o.require((r.training_provenance[0] & 1u) != 0, "a leaky plan went unnoticed");
  o.detail = "10 sections, nested-cv and gold-in-train clean, leaky plan detected" +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

Outcome ensemble_criterion() {
  Outcome o;
  const std::string dir = MBSP_DATA_DIR;
  pipeline::PipelineConfig cfg;
  cfg.workers = 4;

  auto load = [](const std::string& path, std::vector<Sentence>& sents, eval::SpanSets& spans) {
    const auto c = io::read_corpus_file(path);
    const auto roles = io::ColumnRoles::for_corpus(c);
    sents = io::to_sentences(c, roles);
    for (auto& s : sents) {
      for (auto& t : s) t.chunk.reset();
    }
    spans = io::chunk_spans(c, roles);
  };
  std::vector<Sentence> train, test;
  eval::SpanSets train_gold, test_gold;
  load(dir + "/np_train.txt", train, train_gold);
  load(dir + "/np_test.txt", test, test_gold);
  o.require(test.size() == 200, "bundled NP test set has " + std::to_string(test.size()) + " sentences");

  const auto models = pipeline::train_chunker(train, train_gold, cfg);
  const double combined = eval::score(pipeline::chunk_np(test, models, cfg), test_gold).overall.f;
  std::string singles;
  double best_single = 0;
  for (auto r : cfg.representations) {
    const double f = eval::score(pipeline::chunk_single(test, models, r, cfg), test_gold).overall.f;
    best_single = std::max(best_single, f);
    singles += " " + pipeline::to_string(r) + "=" + fmt(f);
  }
  o.require(combined >= best_single, "combined " + fmt(combined) + " below best single " + fmt(best_single));

  const auto trees_train = io::read_trees_file(dir + "/trees_train.txt");
  const auto trees_test = io::read_trees_file(dir + "/trees_test.txt");
  std::vector<Sentence> tr, te;
  eval::SpanSets base, all, te_all;
  for (const auto& t : trees_train) {
    tr.push_back(t.tokens);
    base.push_back(io::base_phrases(t));
    all.push_back(t.phrases);
  }
  for (const auto& t : trees_test) {
    te.push_back(t.tokens);
    te_all.push_back(t.phrases);
  }
  const auto typed = pipeline::train_typed_chunker(tr, base, cfg, cfg.type_strategy);
  const auto levels = pipeline::train_level_models(tr, all, cfg, cfg.max_parse_levels - 1);
  const pipeline::BaseChunker chunker = [&](const std::vector<Sentence>& ss) {
    return pipeline::chunk_typed(ss, typed, cfg);
  };
  const auto parsed = pipeline::parse_full(te, chunker, levels, cfg);
  size_t top = 1;
  for (const auto& ps : parsed.phrases) {
    for (const auto& p : ps) top = std::max(top, p.level);
  }
  std::string recalls;
  double last = 0;
  for (size_t level = 1; level <= top; ++level) {
    const double r = eval::score(pipeline::spans_up_to(parsed.phrases, level), te_all).overall.recall;
    o.require(r >= last, "recall drops at level " + std::to_string(level));
    recalls += (recalls.empty() ? "" : " ") + fmt(r, 1);
    last = r;
  }
  o.detail = "combined " + fmt(combined) + " vs" + singles + " | parse recall by level: " + recalls +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> known;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--known-failure" && i + 1 < argc) {
      known.insert(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--known-failure NAME]...\n");
      return 2;
    }
  }

  const auto trees = io::read_trees_file(std::string(MBSP_DATA_DIR) + "/trees_train.txt");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"xor", xor_criterion},
      {"fbeta", fbeta_criterion},
      {"table1", table1_criterion},
      {"combination", combination_criterion},
      {"gain-ratio", gain_ratio_criterion},
      {"balancing", balancing_criterion},
      {"bootstrap", bootstrap_criterion},
      {"leak-freedom", [&] { return leak_criterion(trees); }},
      {"ensemble", ensemble_criterion},
  };

  std::set<std::string> failed;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) failed.insert(name);
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }

  std::string known_list;
  for (const auto& k : known) known_list += (known_list.empty() ? "" : ", ") + k;
  std::printf("summary: %zu PASS, %zu FAIL (declared known failures: %s)\n", criteria.size() - failed.size(),
              failed.size(), known_list.empty() ? "none" : known_list.c_str());
  return failed == known ? 0 : 1;
}
