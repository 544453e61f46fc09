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

#include <map>
#include <sstream>

#include "mbsp/common.h"
#include "mbsp/corpus.h"
#include "mbsp/eval.h"
#include "mbsp/pipeline.h"
#include "mbsp/synth.h"

using namespace mbsp;
using namespace mbsp::pipeline;
using repr::Scheme;

namespace {

struct Data {
  std::vector<Sentence> sentences;   // no chunk column
  std::vector<Sentence> chunked;     // gold base chunks in the chunk column
  SpanSets np, typed, phrases;
  std::vector<std::vector<repr::ClauseNode>> clauses;
};

Data make_data(size_t n, uint64_t seed) {
  Data d;
  synth::GrammarOptions opt;
  opt.pos_noise = 0.08;
  for (const auto& t : synth::generate_trees(n, seed, opt)) {
    d.sentences.push_back(t.tokens);
    d.chunked.push_back(io::with_base_chunks(t));
    auto base = io::base_phrases(t);
    d.typed.push_back(base);
    std::erase_if(base, [](const ChunkSpan& s) { return s.type != "NP"; });
    d.np.push_back(base);
    d.phrases.push_back(t.phrases);
    d.clauses.push_back(io::tree_clauses(t));
  }
  return d;
}

std::string key_of(std::span<const Token> s) {
  std::string k;
  for (const auto& t : s) k += t.word + ' ';
  return k;
}

// Replays stored tags for sentences it has seen.
class OracleTagger : public Tagger {
 public:
  void add(std::span<const Token> s, std::vector<std::string> tags) { tags_[key_of(s)] = std::move(tags); }
  std::vector<std::string> tag(std::span<const Token> s) const override { return tags_.at(key_of(s)); }
  void save(std::ostream&) const override { throw DomainError("oracle taggers are not saved"); }

 private:
  std::map<std::string, std::vector<std::string>> tags_;
};

std::shared_ptr<OracleTagger> oracle(const std::vector<Sentence>& ss, const SpanSets& gold, Scheme scheme) {
  auto o = std::make_shared<OracleTagger>();
  for (size_t i = 0; i < ss.size(); ++i) o->add(ss[i], repr::encode(gold[i], scheme, ss[i].size()));
  return o;
}

SpanSets sorted(SpanSets s) {
  for (auto& v : s) std::sort(v.begin(), v.end());
  return s;
}

double f_of(const SpanSets& found, const SpanSets& gold) { return eval::score(found, gold).overall.f; }

PipelineConfig fast_config() {
  PipelineConfig c;
  c.workers = 2;
  return c;
}

}  // namespace

TEST_CASE("oracle taggers pass gold chunks through the voting scheme") {
  const auto d = make_data(30, 1);
  ChunkerModels m;
  for (Scheme s : {Scheme::kIOB1, Scheme::kIOE2, Scheme::kOpen, Scheme::kClose}) {
    m.by_scheme[s] = {oracle(d.sentences, d.np, s), nullptr};
  }
  const auto cfg = fast_config();
  ChunkTrace trace;
  CHECK(sorted(chunk_np(d.sentences, m, cfg, &trace)) == sorted(d.np));
  CHECK(trace.voted_open[0] == repr::encode(d.np[0], Scheme::kOpen, d.sentences[0].size()));

  // one broken representation is outvoted
  SpanSets nothing(d.sentences.size());
  m.by_scheme[Scheme::kIOB1] = {oracle(d.sentences, nothing, Scheme::kIOB1), nullptr};
  CHECK(sorted(chunk_np(d.sentences, m, cfg)) == sorted(d.np));
  CHECK(f_of(chunk_single(d.sentences, m, Representation::kIOB1, cfg), d.np) == 0.0);

  m.by_scheme.erase(Scheme::kClose);
  CHECK_THROWS_AS(chunk_np(d.sentences, m, cfg), ConfigError);
}

TEST_CASE("pipeline settings are validated") {
  PipelineConfig c;
  CHECK(c.validate().empty());
  c.representations = {Representation::kIOB1, Representation::kIOE2};
  CHECK(!c.validate().empty());
  c.representations.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(to_string(representation_from_string("O+C")) == "O+C");
  CHECK(schemes_of(Representation::kOpenClose) == std::vector<Scheme>{Scheme::kOpen, Scheme::kClose});
  CHECK_THROWS_AS(type_strategy_from_string("two-phase"), ConfigError);
}

TEST_CASE("trained NP chunker: voting, worker counts and reloading") {
  const auto train = make_data(150, 2), test = make_data(60, 3);
  auto cfg = fast_config();
  const auto models = train_chunker(train.sentences, train.np, cfg);
  const auto found = chunk_np(test.sentences, models, cfg);
  CHECK(f_of(found, test.np) > 85.0);

  cfg.workers = 1;
  CHECK(chunk_np(test.sentences, models, cfg) == found);

  ModelBundle bundle;
  bundle.np = models;
  std::stringstream ss;
  save_bundle(bundle, ss);
  const auto back = load_bundle(ss);
  REQUIRE(back.np);
  CHECK(chunk_np(test.sentences, *back.np, cfg) == found);

  std::stringstream junk("mbsp-bundle\t7\n");
  CHECK_THROWS_AS(load_bundle(junk), DomainError);
  CHECK_THROWS_AS(load_bundle_file("/nonexistent/bundle"), IoError);
}

TEST_CASE("weighted combiners fit vote weights") {
  const auto train = make_data(80, 4), test = make_data(30, 5);
  auto cfg = fast_config();
  cfg.combiner = combine::Method::kTagPrecision;
  const auto models = train_chunker_with_combiner(train.sentences, train.np, cfg, 3);
  REQUIRE(models.open_weights);
  REQUIRE(models.close_weights);
  CHECK(models.open_weights->method == combine::Method::kTagPrecision);
  CHECK(f_of(chunk_np(test.sentences, models, cfg), test.np) > 80.0);
}

TEST_CASE("typed chunking strategies") {
  const auto train = make_data(150, 6), test = make_data(50, 7);
  auto cfg = fast_config();
  for (auto strategy : {TypeStrategy::kSinglePhase, TypeStrategy::kDoublePhase, TypeStrategy::kNPhase}) {
    INFO(to_string(strategy));
    const auto models = train_typed_chunker(train.sentences, train.typed, cfg, strategy);
    CHECK(f_of(chunk_typed(test.sentences, models, cfg), test.typed) > 80.0);
  }
  cfg.chunk_types = {"NP", "PRT"};
  std::vector<std::string> warnings;
  const auto m = train_typed_chunker(train.sentences, train.typed, cfg, TypeStrategy::kNPhase,
                                     [&](const std::string& w) { warnings.push_back(w); });
  CHECK(warnings.size() == 1);
  CHECK(m.per_type.count("NP") == 1);
  CHECK(m.per_type.count("PRT") == 0);
}

TEST_CASE("conflicting typed chunks go to the frequent type") {
  const std::vector<ChunkSpan> cands{{0, 2, "VP"}, {1, 3, "NP"}, {4, 4, "PP"}, {3, 4, "ADJP"}};
  const std::map<std::string, size_t> freq{{"NP", 10}, {"VP", 5}, {"PP", 2}, {"ADJP", 1}};
  CHECK(resolve_type_conflicts(cands, freq) == std::vector<ChunkSpan>{{1, 3, "NP"}, {4, 4, "PP"}});
}

TEST_CASE("chunk type features") {
  Sentence s{{"the", "DT", {}}, {"cat", "NN", {}}, {"sat", "VBD", {}}, {"down", "RP", {}}};
  const std::vector<ChunkSpan> chunks{{0, 1, ""}, {2, 2, ""}};
  const auto rule = features::head_rule("default");
  CHECK(ChunkTypeClassifier::chunk_features(s, chunks, 0, rule) ==
        std::vector<std::string>{"cat", "NN", "DT_NN", std::string(kPad), "VBD"});
  CHECK(ChunkTypeClassifier::chunk_features(s, chunks, 1, rule) ==
        std::vector<std::string>{"sat", "VBD", "VBD", "DT_NN", "RP"});
}

TEST_CASE("clause bracket tags") {
  const std::vector<size_t> opens{0, 3, 5, 7}, closes{4, 11, 11, 12};
  const auto forest = repr::balance_clauses(opens, closes, 13);
  const auto o = open_tags(forest, 13), c = close_tags(forest, 13);
  CHECK(o[0] == "(");
  CHECK(o[1] == ".");
  CHECK(c[11] == "))");
  CHECK(c[12] == ")");
}

TEST_CASE("clause identification") {
  const auto train = make_data(150, 8), test = make_data(40, 9);
  const auto cfg = fast_config();
  const auto models = train_clause_models(train.chunked, train.clauses, cfg);
  const auto found = identify_clauses(test.chunked, models, 2);
  REQUIRE(found.size() == test.chunked.size());
  SpanSets fs, gs;
  for (size_t i = 0; i < found.size(); ++i) {
    std::vector<ChunkSpan> f, g;
    for (auto [a, b] : repr::flatten(found[i])) f.push_back({a, b, "S"});
    for (auto [a, b] : repr::flatten(test.clauses[i])) g.push_back({a, b, "S"});
    CHECK(repr::is_proper_nesting(f));
    fs.push_back(f);
    gs.push_back(g);
  }
  CHECK(f_of(fs, gs) > 40.0);
  CHECK_THROWS_AS(identify_clauses(test.sentences, models), DomainError);

  // composite taggers survive persistence
  std::stringstream ss;
  save_tagger(*models.open, ss);
  save_tagger(*models.close, ss);
  const auto open = load_tagger(ss), close = load_tagger(ss);
  for (const auto& s : test.chunked) {
    CHECK(open->tag(s) == models.open->tag(s));
    CHECK(close->tag(s) == models.close->tag(s));
  }
}

TEST_CASE("phrase heights and trees") {
  const std::vector<ChunkSpan> p{{0, 3, "S"}, {0, 1, "NP"}, {2, 3, "VP"}, {3, 3, "NP"}};
  CHECK(phrase_heights(p) == std::vector<size_t>{3, 1, 2, 1});

  Sentence s{{"the", "DT", {}}, {"cat", "NN", {}}, {"saw", "VBD", {}}, {"it", "PRP", {}}};
  std::vector<Phrase> phrases{{{0, 1, "NP"}, 1}, {{3, 3, "NP"}, 1}, {{2, 3, "VP"}, 2}, {{0, 3, "S"}, 3}};
  CHECK(tree_to_string(build_tree(s, phrases)) == "(S (NP (DT the) (NN cat)) (VP (VBD saw) (NP (PRP it))))");
  CHECK(is_clause_label("SBAR"));
  CHECK(!is_clause_label("NP"));
  CHECK(spans_up_to({phrases}, 1) == SpanSets{{{0, 1, "NP"}, {3, 3, "NP"}}});
}

TEST_CASE("full parsing wraps sentences in S") {
  const auto d = make_data(10, 10);
  auto cfg = fast_config();
  const BaseChunker gold_chunks = [&](const std::vector<Sentence>&) { return d.np; };
  const auto r = parse_full(d.sentences, gold_chunks, {}, cfg);
  REQUIRE(r.trees.size() == d.sentences.size());
  for (size_t i = 0; i < r.trees.size(); ++i) {
    CHECK(r.trees[i].label == "S");
    CHECK(r.trees[i].start == 0);
    CHECK(r.trees[i].end == d.sentences[i].size() - 1);
  }
}

TEST_CASE("cascade recall grows level by level") {
  const auto train = make_data(150, 11), test = make_data(40, 12);
  auto cfg = fast_config();
  const auto levels = train_level_models(train.sentences, train.phrases, cfg, cfg.max_parse_levels - 1);
  CHECK(!levels.empty());
  const auto typed = train_typed_chunker(train.sentences, train.typed, cfg, cfg.type_strategy);
  const BaseChunker chunker = [&](const std::vector<Sentence>& ss) { return chunk_typed(ss, typed, cfg); };
  const auto r = parse_full(test.sentences, chunker, levels, cfg);
  double last = 0;
  for (size_t level = 1; level <= levels.size() + 2; ++level) {
    const double recall = eval::score(spans_up_to(r.phrases, level), test.phrases).overall.recall;
    CHECK(recall >= last);
    last = recall;
  }
  CHECK(last > 50.0);

  // NP parsing keeps NP labels only
  const auto nps = synth::np_phrases(synth::generate_trees(150, 11, {3, .35, .12, .25, .15, .08}));
  const auto np_levels = train_level_models(train.sentences, nps, cfg, cfg.np_parse_levels - 1);
  const auto np_models = train_chunker(train.sentences, train.np, cfg);
  const BaseChunker np_chunker = [&](const std::vector<Sentence>& ss) { return chunk_np(ss, np_models, cfg); };
  for (const auto& spans : parse_np(test.sentences, np_chunker, np_levels, cfg)) {
    for (const auto& s : spans) CHECK(s.type == "NP");
  }
}

TEST_CASE("fold plans") {
  CHECK_THROWS_AS(build_fold_plan(1, LeakMode::kGoldInTrain), ConfigError);
  CHECK_THROWS_AS(build_fold_plan(2, LeakMode::kNestedCv), ConfigError);
  CHECK_THROWS_AS(build_fold_plan(65, LeakMode::kGoldInTrain), ConfigError);
  const auto p = build_fold_plan(4, LeakMode::kNestedCv);
  REQUIRE(p.folds.size() == 4);
  CHECK(p.folds[1].train == std::vector<size_t>{0, 2, 3});
  CHECK(p.folds[1].inner.size() == 3);
  CHECK(p.folds[1].inner[0].train == std::vector<size_t>{2, 3});
}

TEST_CASE("cascaded cross-validation never leaks test gold into training") {
  const auto d = make_data(60, 13);
  std::vector<std::vector<Sentence>> sections(10);
  std::vector<TagSequences> gold(10);
  for (size_t i = 0; i < d.sentences.size(); ++i) {
    sections[i % 10].push_back(d.sentences[i]);
    gold[i % 10].push_back(repr::encode(d.np[i], Scheme::kIOB1, d.sentences[i].size()));
  }
  const auto p1 = features::FeatureTemplate::parse("w[-1..1] p[-1..1]");
  const auto p2 = features::FeatureTemplate::parse("w[-1..1] p[-1..1] c[-1,1]");
  const mbl::LearnerConfig learner{1, mbl::TiePolicy::kGlobalClassFrequency, true};

  auto leaks = [](const FoldPlan& plan, const CascadeCvResult& r) {
    size_t count = 0;
    for (size_t f = 0; f < plan.folds.size(); ++f) {
      const Provenance own = Provenance{1} << plan.folds[f].test;
      if (r.training_provenance[f] & own) ++count;
      for (auto p : r.provenance[plan.folds[f].test]) count += (p & own) != 0;
    }
    return count;
  };

  for (auto mode : {LeakMode::kNestedCv, LeakMode::kGoldInTrain}) {
    INFO(to_string(mode));
    const auto plan = build_fold_plan(10, mode);
    const auto r = run_cascaded_cv(sections, gold, plan, p1, p2, learner);
    CHECK(leaks(plan, r) == 0);
    for (size_t s = 0; s < 10; ++s) CHECK(r.predictions[s].size() == sections[s].size());
  }

  // a plan whose inner runs see the outer test section is caught
  auto leaky = build_fold_plan(10, LeakMode::kNestedCv);
  leaky.folds[3].inner[0].train.push_back(3);
  CHECK(leaks(leaky, run_cascaded_cv(sections, gold, leaky, p1, p2, learner)) > 0);

  CHECK_THROWS_AS(run_cascaded_cv(sections, gold, build_fold_plan(10, LeakMode::kGoldInTrain), p1, p1, learner),
                  ConfigError);
}

TEST_CASE("training rejects empty input") {
  CHECK_THROWS_AS(train_tagger({}, {}, features::FeatureTemplate::parse("w[0]"), {}), DomainError);
  Sentence s{{"a", "DT", {}}};
  CHECK_THROWS_AS(train_tagger({s}, {{"O"}}, features::FeatureTemplate{}, {}), ConfigError);
}
