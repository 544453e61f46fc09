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

#include "mbsp/pipeline.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>

#include "mbsp/common.h"

namespace mbsp::pipeline {

namespace {

using features::FeatureTemplate;
using repr::Scheme;

constexpr const char* kTaggerTag = "tagger";

void check_targets(const std::vector<Sentence>& sentences, const TagSequences& targets) {
  if (sentences.size() != targets.size()) {
    throw DomainError("got " + std::to_string(targets.size()) + " target sequences for " +
                      std::to_string(sentences.size()) + " sentences");
  }
  for (size_t s = 0; s < sentences.size(); ++s) {
    if (sentences[s].size() != targets[s].size()) {
      throw DomainError("sentence " + std::to_string(s) + " has " + std::to_string(sentences[s].size()) +
                        " tokens but " + std::to_string(targets[s].size()) + " targets");
    }
  }
}

void check_gold(const std::vector<Sentence>& sentences, const SpanSets& gold) {
  if (sentences.size() != gold.size()) throw DomainError("gold spans are not aligned with the sentences");
}

// Copy of `sentence` with the chunk column replaced.
Sentence with_chunks(std::span<const Token> sentence, const std::vector<std::string>& tags) {
  Sentence out(sentence.begin(), sentence.end());
  for (size_t i = 0; i < out.size(); ++i) out[i].chunk = tags[i];
  return out;
}

std::vector<ChunkSpan> untyped(std::span<const ChunkSpan> spans) {
  std::vector<ChunkSpan> out(spans.begin(), spans.end());
  for (auto& s : out) s.type.clear();
  return out;
}

std::set<Scheme> needed_schemes(const PipelineConfig& config) {
  std::set<Scheme> out;
  for (auto r : config.representations) {
    for (auto s : schemes_of(r)) out.insert(s);
  }
  return out;
}

const FeatureTemplate& template_for(const std::map<Scheme, FeatureTemplate>& table, Scheme s,
                                    const char* pass) {
  auto it = table.find(s);
  if (it == table.end()) {
    throw ConfigError(std::string("no ") + pass + " feature template for " + repr::to_string(s));
  }
  return it->second;
}

std::string read_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(std::string("unexpected end of input, expected ") + what, 0);
  return line;
}

// Stream of one bracket side for each representation of `sentence`.
void bracket_streams(std::span<const Token> sentence, const ChunkerModels& models, Representation r,
                     std::vector<std::string>& opens, std::vector<std::string>& closes) {
  if (r == Representation::kOpenClose) {
    opens = run_scheme(sentence, models, Scheme::kOpen);
    closes = run_scheme(sentence, models, Scheme::kClose);
    return;
  }
  const Scheme s = schemes_of(r).front();
  const auto spans = repr::decode(run_scheme(sentence, models, s), s);
  opens = repr::encode(spans, Scheme::kOpen, sentence.size());
  closes = repr::encode(spans, Scheme::kClose, sentence.size());
}

std::vector<std::string> vote_stream(const std::vector<std::vector<std::string>>& streams,
                                     const std::optional<combine::CombinerWeights>& weights,
                                     combine::Method method) {
  const size_t n = streams.front().size();
  std::vector<std::string> out(n);
  std::vector<std::string> column(streams.size());
  for (size_t i = 0; i < n; ++i) {
    for (size_t r = 0; r < streams.size(); ++r) column[r] = streams[r][i];
    if (method == combine::Method::kMajority) {
      out[i] = combine::majority_vote(column);
    } else {
      if (!weights) throw ConfigError("combiner " + combine::to_string(method) + " needs fitted weights");
      out[i] = combine::vote(column, *weights);
    }
  }
  return out;
}

std::string join_pos(std::span<const Token> tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += '_';
    out += tokens[i].pos;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Taggers

std::vector<std::string> MemoryTagger::tag(std::span<const Token> sentence) const {
  std::vector<std::string> out;
  out.reserve(sentence.size());
  for (size_t i = 0; i < sentence.size(); ++i) {
    out.push_back(model_.classify(features::extract(sentence, i, template_)).label);
  }
  return out;
}

void MemoryTagger::save(std::ostream& out) const {
  out << kTaggerTag << "\tmemory\t" << template_.to_string() << '\n';
  mbl::save_model(model_, out);
}

std::vector<std::string> VotingTagger::tag(std::span<const Token> sentence) const {
  if (members_.empty()) throw DomainError("voting tagger without members");
  std::vector<std::vector<std::string>> outputs;
  for (const auto& m : members_) outputs.push_back(m->tag(sentence));
  std::vector<std::string> out(sentence.size());
  std::vector<std::string> column(members_.size());
  for (size_t i = 0; i < sentence.size(); ++i) {
    for (size_t m = 0; m < members_.size(); ++m) column[m] = outputs[m][i];
    out[i] = combine::majority_vote(column);
  }
  return out;
}

void VotingTagger::save(std::ostream& out) const {
  out << kTaggerTag << "\tvoting\t" << members_.size() << '\n';
  for (const auto& m : members_) m->save(out);
}

std::string to_string(View view) {
  switch (view) {
    case View::kWordPos: return "word-pos";
    case View::kWordChunk: return "word-chunk";
    case View::kPosChunk: return "pos-chunk";
    case View::kChunkOnly: return "chunk";
  }
  return "?";
}

View view_from_string(const std::string& name) {
  for (View v : {View::kWordPos, View::kWordChunk, View::kPosChunk, View::kChunkOnly}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown view '" + name + "'");
}

std::vector<Token> apply_view(std::span<const Token> sentence, View view) {
  std::vector<Token> out(sentence.begin(), sentence.end());
  if (view == View::kWordPos) return out;
  for (auto& t : out) {
    if (!t.chunk) throw DomainError("view " + to_string(view) + " needs chunk tags");
    switch (view) {
      case View::kWordChunk:
        t.pos = *t.chunk;
        break;
      case View::kPosChunk:
        t.word = t.pos;
        t.pos = *t.chunk;
        break;
      case View::kChunkOnly:
        t.word = *t.chunk;
        t.pos = *t.chunk;
        break;
      case View::kWordPos:
        break;
    }
  }
  return out;
}

std::vector<std::string> ViewTagger::tag(std::span<const Token> sentence) const {
  return inner_->tag(apply_view(sentence, view_));
}

void ViewTagger::save(std::ostream& out) const {
  out << kTaggerTag << "\tview\t" << to_string(view_) << '\n';
  inner_->save(out);
}

std::vector<ChunkSpan> chunks_of(std::span<const Token> sentence) {
  std::vector<std::string> tags;
  tags.reserve(sentence.size());
  for (size_t i = 0; i < sentence.size(); ++i) {
    if (!sentence[i].chunk) {
      throw DomainError("token " + std::to_string(i) + " ('" + sentence[i].word + "') has no chunk tag");
    }
    tags.push_back(*sentence[i].chunk);
  }
  return repr::decode(tags, Scheme::kIOB2);
}

std::vector<std::string> CompressedTagger::tag(std::span<const Token> sentence) const {
  const auto cs = features::compress_tracked(sentence, chunks_of(sentence),
                                             features::head_rule(head_rule_name_));
  const auto unit_tags = inner_->tag(cs.tokens);
  std::vector<std::string> out(sentence.size(), none_tag_);
  for (size_t u = 0; u < cs.tokens.size(); ++u) {
    const size_t at = anchor_ == Anchor::kFirst ? cs.origin[u].first : cs.origin[u].second;
    out[at] = unit_tags[u];
  }
  return out;
}

void CompressedTagger::save(std::ostream& out) const {
  out << kTaggerTag << "\tcompressed\t" << (anchor_ == Anchor::kFirst ? "first" : "last") << '\t'
      << head_rule_name_ << '\t' << escape_symbol(none_tag_) << '\n';
  inner_->save(out);
}

std::shared_ptr<MemoryTagger> train_tagger(const std::vector<Sentence>& sentences,
                                           const TagSequences& targets, const FeatureTemplate& tmpl,
                                           const mbl::LearnerConfig& learner) {
  check_targets(sentences, targets);
  if (tmpl.empty()) throw ConfigError("cannot train a tagger with an empty feature template");
  std::vector<mbl::Instance> data;
  for (size_t s = 0; s < sentences.size(); ++s) {
    for (size_t i = 0; i < sentences[s].size(); ++i) {
      data.push_back({features::extract(sentences[s], i, tmpl), targets[s][i]});
    }
  }
  if (data.empty()) throw DomainError("no training instances (empty corpus)");
  return std::make_shared<MemoryTagger>(tmpl, mbl::train(data, learner));
}

void save_tagger(const Tagger& tagger, std::ostream& out) { tagger.save(out); }

TaggerPtr load_tagger(std::istream& in) {
  const auto fields = split(read_line(in, "tagger header"), '\t');
  if (fields.size() < 2 || fields[0] != kTaggerTag) throw ParseError("expected a tagger header", 0);
  const std::string& kind = fields[1];
  if (kind == "memory" && fields.size() == 3) {
    auto tmpl = FeatureTemplate::parse(fields[2]);
    auto model = mbl::load_model(in);
    return std::make_shared<MemoryTagger>(std::move(tmpl), std::move(model));
  }
  if (kind == "voting" && fields.size() == 3) {
    const size_t n = std::stoul(fields[2]);
    std::vector<TaggerPtr> members;
    for (size_t i = 0; i < n; ++i) members.push_back(load_tagger(in));
    return std::make_shared<VotingTagger>(std::move(members));
  }
  if (kind == "view" && fields.size() == 3) {
    const View v = view_from_string(fields[2]);
    return std::make_shared<ViewTagger>(v, load_tagger(in));
  }
  if (kind == "compressed" && fields.size() == 5) {
    const Anchor a = fields[2] == "first" ? Anchor::kFirst : Anchor::kLast;
    features::head_rule(fields[3]);  // validates the name
    auto inner = load_tagger(in);
    return std::make_shared<CompressedTagger>(std::move(inner), a, fields[3], unescape_symbol(fields[4]));
  }
  throw ParseError("unknown tagger kind '" + kind + "'", 0);
}

// ---------------------------------------------------------------------------
// Configuration

std::string to_string(Representation r) {
  switch (r) {
    case Representation::kIOB1: return "IOB1";
    case Representation::kIOB2: return "IOB2";
    case Representation::kIOE1: return "IOE1";
    case Representation::kIOE2: return "IOE2";
    case Representation::kOpenClose: return "O+C";
  }
  return "?";
}

Representation representation_from_string(const std::string& name) {
  for (auto r : {Representation::kIOB1, Representation::kIOB2, Representation::kIOE1,
                 Representation::kIOE2, Representation::kOpenClose}) {
    if (to_string(r) == name) return r;
  }
  throw ConfigError("unknown representation '" + name + "'");
}

std::vector<Scheme> schemes_of(Representation r) {
  switch (r) {
    case Representation::kIOB1: return {Scheme::kIOB1};
    case Representation::kIOB2: return {Scheme::kIOB2};
    case Representation::kIOE1: return {Scheme::kIOE1};
    case Representation::kIOE2: return {Scheme::kIOE2};
    case Representation::kOpenClose: return {Scheme::kOpen, Scheme::kClose};
  }
  return {};
}

std::string to_string(TypeStrategy s) {
  switch (s) {
    case TypeStrategy::kSinglePhase: return "single-phase";
    case TypeStrategy::kDoublePhase: return "double-phase";
    case TypeStrategy::kNPhase: return "n-phase";
  }
  return "?";
}

TypeStrategy type_strategy_from_string(const std::string& name) {
  for (auto s : {TypeStrategy::kSinglePhase, TypeStrategy::kDoublePhase, TypeStrategy::kNPhase}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown type strategy '" + name + "'");
}

std::string to_string(LeakMode m) { return m == LeakMode::kNestedCv ? "nested-cv" : "gold-in-train"; }

LeakMode leak_mode_from_string(const std::string& name) {
  if (name == "nested-cv") return LeakMode::kNestedCv;
  if (name == "gold-in-train") return LeakMode::kGoldInTrain;
  throw ConfigError("unknown leak mode '" + name + "'");
}

std::map<Scheme, FeatureTemplate> PipelineConfig::default_pass1() {
  return {
      {Scheme::kIOB1, FeatureTemplate::parse("w[-4..0] p[-2..3]")},
      {Scheme::kIOB2, FeatureTemplate::parse("w[-1..0] p[-4..3]")},
      {Scheme::kIOE1, FeatureTemplate::parse("w[0..1] p[-3..3]")},
      {Scheme::kIOE2, FeatureTemplate::parse("w[-3..4] p[-4..4]")},
      {Scheme::kOpen, FeatureTemplate::parse("w[-2..0] p[-4..3]")},
      {Scheme::kClose, FeatureTemplate::parse("w[0..4] p[-4..4]")},
  };
}

std::map<Scheme, FeatureTemplate> PipelineConfig::default_pass2() {
  return {
      {Scheme::kIOB1, FeatureTemplate::parse("w[-2..0] p[-4..3] c[-2,-1,1,2]")},
      {Scheme::kIOB2, FeatureTemplate::parse("w[-1..0] p[-4..2] c[-1,1,2]")},
      {Scheme::kIOE1, FeatureTemplate::parse("w[0..1] p[-3..3] c[-1,1,2]")},
      {Scheme::kIOE2, FeatureTemplate::parse("w[0..1] p[-1..3] c[-2,-1,1,2]")},
      {Scheme::kOpen, FeatureTemplate::parse("w[-1,0] p[-4..1] c[-1,2]")},
      {Scheme::kClose, FeatureTemplate::parse("w[0..2] p[-4..2] c[-2,-1,1]")},
  };
}

std::vector<std::string> PipelineConfig::validate() const {
  if (representations.empty()) throw ConfigError("at least one chunk representation is required");
  for (const auto& lc : {chunk_learner, type_learner, clause_learner, level_learner}) {
    if (lc.k == 0) throw ConfigError("k must be at least 1");
  }
  if (clause_open_context < 0 || clause_open_context > features::kMaxOffset ||
      clause_close_context < 0 || clause_close_context > features::kMaxOffset ||
      level_context < 0 || level_context > features::kMaxOffset) {
    throw ConfigError("context sizes must lie in [0, " + std::to_string(features::kMaxOffset) + "]");
  }
  if (max_parse_levels == 0 || np_parse_levels == 0) throw ConfigError("level limits must be positive");
  features::head_rule(head_rule);
  for (auto s : needed_schemes(*this)) {
    template_for(pass1, s, "pass-1");
    if (second_pass) {
      const auto& t = template_for(pass2, s, "pass-2");
      if (!t.uses_chunks()) {
        throw ConfigError("pass-2 template for " + repr::to_string(s) + " uses no chunk context");
      }
    }
  }
  std::vector<std::string> warnings;
  if (representations.size() % 2 == 0 && combiner == combine::Method::kMajority) {
    warnings.push_back("an even number of representations makes majority ties likely");
  }
  return warnings;
}

// ---------------------------------------------------------------------------
// NP chunking

ChunkerModels train_chunker(const std::vector<Sentence>& sentences, const SpanSets& gold,
                            const PipelineConfig& config) {
  check_gold(sentences, gold);
  config.validate();
  ChunkerModels models;
  for (auto scheme : needed_schemes(config)) {
    TagSequences targets;
    targets.reserve(sentences.size());
    for (size_t s = 0; s < sentences.size(); ++s) {
      targets.push_back(repr::encode(gold[s], scheme, sentences[s].size()));
    }
    PassModels pm;
    pm.pass1 = train_tagger(sentences, targets, template_for(config.pass1, scheme, "pass-1"),
                            config.chunk_learner);
    if (config.second_pass) {
      std::vector<Sentence> context;
      context.reserve(sentences.size());
      for (size_t s = 0; s < sentences.size(); ++s) context.push_back(with_chunks(sentences[s], targets[s]));
      pm.pass2 = train_tagger(context, targets, template_for(config.pass2, scheme, "pass-2"),
                              config.chunk_learner);
    }
    models.by_scheme.emplace(scheme, std::move(pm));
  }
  return models;
}

ChunkerModels train_chunker_with_combiner(const std::vector<Sentence>& sentences, const SpanSets& gold,
                                          const PipelineConfig& config, size_t folds) {
  auto models = train_chunker(sentences, gold, config);
  if (config.combiner == combine::Method::kMajority) return models;
  if (folds < 2 || sentences.size() < folds) throw DomainError("too few sentences to fit combiner weights");
  combine::SystemOutputs open_out, close_out;
  open_out.systems.assign(config.representations.size(), {});
  close_out.systems.assign(config.representations.size(), {});
  for (size_t f = 0; f < folds; ++f) {
    std::vector<Sentence> train_s, test_s;
    SpanSets train_g, test_g;
    for (size_t i = 0; i < sentences.size(); ++i) {
      auto& s = i % folds == f ? test_s : train_s;
      auto& g = i % folds == f ? test_g : train_g;
      s.push_back(sentences[i]);
      g.push_back(gold[i]);
    }
    const auto fold_models = train_chunker(train_s, train_g, config);
    for (size_t k = 0; k < test_s.size(); ++k) {
      for (size_t r = 0; r < config.representations.size(); ++r) {
        std::vector<std::string> o, c;
        bracket_streams(test_s[k], fold_models, config.representations[r], o, c);
        open_out.systems[r].insert(open_out.systems[r].end(), o.begin(), o.end());
        close_out.systems[r].insert(close_out.systems[r].end(), c.begin(), c.end());
      }
      const auto go = repr::encode(test_g[k], Scheme::kOpen, test_s[k].size());
      const auto gc = repr::encode(test_g[k], Scheme::kClose, test_s[k].size());
      open_out.gold.insert(open_out.gold.end(), go.begin(), go.end());
      close_out.gold.insert(close_out.gold.end(), gc.begin(), gc.end());
    }
  }
  models.open_weights = combine::fit_weights(open_out, config.combiner);
  models.close_weights = combine::fit_weights(close_out, config.combiner);
  return models;
}

std::vector<std::string> run_scheme(std::span<const Token> sentence, const ChunkerModels& models,
                                    Scheme scheme) {
  auto it = models.by_scheme.find(scheme);
  if (it == models.by_scheme.end() || !it->second.pass1) {
    throw ConfigError("no chunker model for scheme " + repr::to_string(scheme));
  }
  auto tags = it->second.pass1->tag(sentence);
  if (it->second.pass2) tags = it->second.pass2->tag(with_chunks(sentence, tags));
  return tags;
}

SpanSets chunk_np(const std::vector<Sentence>& sentences, const ChunkerModels& models,
                  const PipelineConfig& config, ChunkTrace* trace) {
  if (config.representations.empty()) throw ConfigError("at least one chunk representation is required");
  for (auto r : config.representations) {
    for (auto s : schemes_of(r)) {
      if (!models.by_scheme.count(s)) throw ConfigError("no chunker model for scheme " + repr::to_string(s));
    }
  }
  const size_t n = sentences.size();
  SpanSets out(n);
  if (trace) {
    trace->open_streams.assign(n, {});
    trace->close_streams.assign(n, {});
    trace->voted_open.assign(n, {});
    trace->voted_close.assign(n, {});
  }
  parallel_for(n, config.workers, [&](size_t k) {
    const auto& sentence = sentences[k];
    std::vector<std::vector<std::string>> opens(config.representations.size());
    std::vector<std::vector<std::string>> closes(config.representations.size());
    for (size_t r = 0; r < config.representations.size(); ++r) {
      bracket_streams(sentence, models, config.representations[r], opens[r], closes[r]);
    }
    std::vector<std::string> voted_open, voted_close;
    if (!sentence.empty()) {
      voted_open = vote_stream(opens, models.open_weights, config.combiner);
      voted_close = vote_stream(closes, models.close_weights, config.combiner);
      out[k] = repr::innermost_spans(repr::balance_brackets(
          repr::open_marks(voted_open), repr::close_marks(voted_close), config.match_mode));
    }
    if (trace) {
      trace->open_streams[k] = std::move(opens);
      trace->close_streams[k] = std::move(closes);
      trace->voted_open[k] = std::move(voted_open);
      trace->voted_close[k] = std::move(voted_close);
    }
  });
  return out;
}

SpanSets chunk_single(const std::vector<Sentence>& sentences, const ChunkerModels& models,
                      Representation representation, const PipelineConfig& config) {
  SpanSets out(sentences.size());
  parallel_for(sentences.size(), config.workers, [&](size_t k) {
    const auto& sentence = sentences[k];
    if (representation == Representation::kOpenClose) {
      std::vector<std::string> o, c;
      bracket_streams(sentence, models, representation, o, c);
      out[k] = repr::innermost_spans(
          repr::balance_brackets(repr::open_marks(o), repr::close_marks(c), config.match_mode));
    } else {
      const Scheme s = schemes_of(representation).front();
      out[k] = repr::decode(run_scheme(sentence, models, s), s);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Typed chunking

std::vector<std::string> ChunkTypeClassifier::chunk_features(std::span<const Token> sentence,
                                                             std::span<const ChunkSpan> chunks,
                                                             size_t index,
                                                             const features::HeadRule& rule) {
  const ChunkSpan& c = chunks[index];
  std::span<const Token> members = sentence.subspan(c.start, c.end - c.start + 1);
  // Untyped chunks take the NP rule.
  const Token& head = members[rule(members, "")];
  auto unit_before = [&]() -> std::string {
    if (c.start == 0) return std::string(kPad);
    if (index > 0 && chunks[index - 1].end + 1 == c.start) {
      const auto& p = chunks[index - 1];
      return join_pos(sentence.subspan(p.start, p.end - p.start + 1));
    }
    return sentence[c.start - 1].pos;
  };
  auto unit_after = [&]() -> std::string {
    if (c.end + 1 >= sentence.size()) return std::string(kPad);
    if (index + 1 < chunks.size() && chunks[index + 1].start == c.end + 1) {
      const auto& n = chunks[index + 1];
      return join_pos(sentence.subspan(n.start, n.end - n.start + 1));
    }
    return sentence[c.end + 1].pos;
  };
  return {head.word, head.pos, join_pos(members), unit_before(), unit_after()};
}

std::string ChunkTypeClassifier::classify(std::span<const Token> sentence,
                                          std::span<const ChunkSpan> chunks, size_t index) const {
  return model_.classify(chunk_features(sentence, chunks, index, features::head_rule(head_rule_))).label;
}

ChunkTypeClassifier train_type_classifier(const std::vector<Sentence>& sentences, const SpanSets& gold,
                                          const mbl::LearnerConfig& learner,
                                          const std::string& head_rule) {
  check_gold(sentences, gold);
  const auto rule = features::head_rule(head_rule);
  std::vector<mbl::Instance> data;
  for (size_t s = 0; s < sentences.size(); ++s) {
    auto chunks = gold[s];
    std::sort(chunks.begin(), chunks.end());
    repr::validate_spans(chunks, sentences[s].size());
    for (size_t c = 0; c < chunks.size(); ++c) {
      data.push_back({ChunkTypeClassifier::chunk_features(sentences[s], chunks, c, rule), chunks[c].type});
    }
  }
  if (data.empty()) throw DomainError("no chunks to train a type classifier on");
  return ChunkTypeClassifier(mbl::train(data, learner), head_rule);
}

TypedChunkerModels train_typed_chunker(const std::vector<Sentence>& sentences, const SpanSets& gold,
                                       const PipelineConfig& config, TypeStrategy strategy,
                                       const WarningSink& warn) {
  check_gold(sentences, gold);
  TypedChunkerModels m;
  m.strategy = strategy;
  for (const auto& spans : gold) {
    for (const auto& s : spans) ++m.type_frequency[s.type];
  }
  switch (strategy) {
    case TypeStrategy::kSinglePhase:
      m.joint = train_chunker(sentences, gold, config);
      break;
    case TypeStrategy::kDoublePhase: {
      SpanSets plain;
      plain.reserve(gold.size());
      for (const auto& spans : gold) plain.push_back(untyped(spans));
      m.boundaries = train_chunker(sentences, plain, config);
      m.typer = std::make_shared<ChunkTypeClassifier>(
          train_type_classifier(sentences, gold, config.type_learner, config.head_rule));
      break;
    }
    case TypeStrategy::kNPhase: {
      std::vector<std::string> types = config.chunk_types;
      if (types.empty()) {
        for (const auto& [type, count] : m.type_frequency) types.push_back(type);
      }
      for (const auto& type : types) {
        if (!m.type_frequency.count(type)) {
          if (warn) warn("chunk type " + type + " does not occur in training; its chunker is skipped");
          continue;
        }
        SpanSets only;
        only.reserve(gold.size());
        for (const auto& spans : gold) {
          std::vector<ChunkSpan> keep;
          for (const auto& s : spans) {
            if (s.type == type) keep.push_back(s);
          }
          only.push_back(std::move(keep));
        }
        m.per_type.emplace(type, train_chunker(sentences, only, config));
      }
      break;
    }
  }
  return m;
}

std::vector<ChunkSpan> resolve_type_conflicts(std::vector<ChunkSpan> candidates,
                                              const std::map<std::string, size_t>& type_frequency) {
  auto freq = [&](const std::string& t) {
    auto it = type_frequency.find(t);
    return it == type_frequency.end() ? size_t{0} : it->second;
  };
  std::stable_sort(candidates.begin(), candidates.end(), [&](const ChunkSpan& a, const ChunkSpan& b) {
    const size_t fa = freq(a.type), fb = freq(b.type);
    if (fa != fb) return fa > fb;
    if (a.type != b.type) return a.type < b.type;
    return a < b;
  });
  std::vector<ChunkSpan> accepted;
  for (const auto& c : candidates) {
    const bool clash = std::any_of(accepted.begin(), accepted.end(), [&](const ChunkSpan& a) {
      return !(c.end < a.start || a.end < c.start);
    });
    if (!clash) accepted.push_back(c);
  }
  std::sort(accepted.begin(), accepted.end());
  return accepted;
}

SpanSets chunk_typed(const std::vector<Sentence>& sentences, const TypedChunkerModels& models,
                     const PipelineConfig& config, const WarningSink& warn) {
  switch (models.strategy) {
    case TypeStrategy::kSinglePhase:
      return chunk_np(sentences, models.joint, config);
    case TypeStrategy::kDoublePhase: {
      if (!models.typer) throw ConfigError("double-phase chunking needs a type classifier");
      auto spans = chunk_np(sentences, models.boundaries, config);
      parallel_for(sentences.size(), config.workers, [&](size_t s) {
        for (size_t c = 0; c < spans[s].size(); ++c) {
          spans[s][c].type = models.typer->classify(sentences[s], spans[s], c);
        }
      });
      return spans;
    }
    case TypeStrategy::kNPhase: {
      SpanSets candidates(sentences.size());
      for (const auto& [type, chunker] : models.per_type) {
        SpanSets found;
        try {
          found = chunk_np(sentences, chunker, config);
        } catch (const ConfigError& e) {
          if (warn) warn("skipping chunker for type " + type + ": " + e.what());
          continue;
        }
        for (size_t s = 0; s < sentences.size(); ++s) {
          for (auto span : found[s]) {
            span.type = type;
            candidates[s].push_back(std::move(span));
          }
        }
      }
      SpanSets out;
      out.reserve(sentences.size());
      for (auto& c : candidates) out.push_back(resolve_type_conflicts(std::move(c), models.type_frequency));
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Clauses

std::vector<std::string> open_tags(std::span<const repr::ClauseNode> forest, size_t length) {
  std::vector<std::string> out(length, repr::kNoBracket);
  for (const auto& [start, end] : repr::flatten(forest)) {
    if (end >= length) throw DomainError("clause extends beyond the sentence");
    out[start] = "(";
  }
  return out;
}

std::vector<std::string> close_tags(std::span<const repr::ClauseNode> forest, size_t length) {
  std::vector<size_t> count(length, 0);
  for (const auto& [start, end] : repr::flatten(forest)) {
    if (end >= length) throw DomainError("clause extends beyond the sentence");
    ++count[end];
  }
  std::vector<std::string> out(length);
  for (size_t i = 0; i < length; ++i) out[i] = count[i] ? std::string(count[i], ')') : repr::kNoBracket;
  return out;
}

ClauseModels train_clause_models(const std::vector<Sentence>& sentences,
                                 const std::vector<std::vector<repr::ClauseNode>>& gold,
                                 const PipelineConfig& config) {
  if (sentences.size() != gold.size()) throw DomainError("gold clauses are not aligned with the sentences");
  TagSequences opens, closes;
  for (size_t s = 0; s < sentences.size(); ++s) {
    opens.push_back(open_tags(gold[s], sentences[s].size()));
    closes.push_back(close_tags(gold[s], sentences[s].size()));
  }

  const int oc = config.clause_open_context;
  const auto open_tmpl = FeatureTemplate::window(oc, oc);
  std::vector<TaggerPtr> voters;
  for (View v : {View::kWordPos, View::kWordChunk, View::kPosChunk}) {
    std::vector<Sentence> viewed;
    viewed.reserve(sentences.size());
    for (const auto& s : sentences) viewed.push_back(apply_view(s, v));
    voters.push_back(std::make_shared<ViewTagger>(v, train_tagger(viewed, opens, open_tmpl,
                                                                   config.clause_learner)));
  }

  const auto rule = features::head_rule(config.head_rule);
  std::vector<Sentence> compressed;
  TagSequences unit_targets;
  for (size_t s = 0; s < sentences.size(); ++s) {
    const auto cs = features::compress_tracked(sentences[s], chunks_of(sentences[s]), rule);
    std::vector<std::string> t;
    for (const auto& o : cs.origin) t.push_back(closes[s][o.second]);
    compressed.push_back(cs.tokens);
    unit_targets.push_back(std::move(t));
  }
  const int cc = config.clause_close_context;
  auto close_inner = train_tagger(compressed, unit_targets, FeatureTemplate::window(cc, cc),
                                  config.clause_learner);

  ClauseModels m;
  m.open = std::make_shared<VotingTagger>(std::move(voters));
  m.close = std::make_shared<CompressedTagger>(std::move(close_inner), Anchor::kLast, config.head_rule,
                                               repr::kNoBracket);
  return m;
}

std::vector<std::vector<repr::ClauseNode>> identify_clauses(const std::vector<Sentence>& sentences,
                                                            const ClauseModels& models, size_t workers) {
  if (!models.open || !models.close) throw ConfigError("clause models are incomplete");
  for (const auto& sentence : sentences) {
    for (size_t i = 0; i < sentence.size(); ++i) {
      if (!sentence[i].chunk) {
        throw DomainError("clause identification needs chunk tags (token " + std::to_string(i) + ", '" +
                          sentence[i].word + "')");
      }
    }
  }
  std::vector<std::vector<repr::ClauseNode>> out(sentences.size());
  parallel_for(sentences.size(), workers, [&](size_t k) {
    const auto& sentence = sentences[k];
    if (sentence.empty()) return;
    const auto o = models.open->tag(sentence);
    const auto c = models.close->tag(sentence);
    std::vector<size_t> opens, closes;
    for (size_t i = 0; i < sentence.size(); ++i) {
      if (!o[i].empty() && o[i].front() == '(') opens.push_back(i);
      for (char ch : c[i]) {
        if (ch == ')') closes.push_back(i);
      }
    }
    out[k] = repr::balance_clauses(opens, closes, sentence.size());
  });
  return out;
}

// ---------------------------------------------------------------------------
// Cascaded parsing

namespace {

// Whether phrase i (in `phrases`) properly dominates phrase j. Identical
// ranges: the earlier one dominates.
bool dominates(std::span<const ChunkSpan> phrases, size_t i, size_t j) {
  const auto& a = phrases[i];
  const auto& b = phrases[j];
  if (i == j || a.start > b.start || b.end > a.end) return false;
  if (a.start == b.start && a.end == b.end) return i < j;
  return true;
}

// Maximal phrases of height <= level, one per range (the highest wins).
std::vector<ChunkSpan> units_up_to(std::span<const ChunkSpan> phrases, std::span<const size_t> height,
                                   size_t level) {
  std::vector<ChunkSpan> out;
  for (size_t i = 0; i < phrases.size(); ++i) {
    if (height[i] > level) continue;
    bool maximal = true;
    for (size_t j = 0; j < phrases.size() && maximal; ++j) {
      if (height[j] <= level && dominates(phrases, j, i)) maximal = false;
    }
    if (maximal) out.push_back(phrases[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<size_t> phrase_heights(std::span<const ChunkSpan> phrases) {
  const size_t n = phrases.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Smaller ranges first; among identical ranges, later (inner) first.
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const size_t la = phrases[a].end - phrases[a].start, lb = phrases[b].end - phrases[b].start;
    if (la != lb) return la < lb;
    return a > b;
  });
  std::vector<size_t> height(n, 1);
  for (size_t x = 0; x < n; ++x) {
    const size_t i = order[x];
    for (size_t y = 0; y < x; ++y) {
      const size_t j = order[y];
      if (dominates(phrases, i, j)) height[i] = std::max(height[i], height[j] + 1);
    }
  }
  return height;
}

std::vector<LevelModels> train_level_models(const std::vector<Sentence>& sentences, const SpanSets& gold,
                                            const PipelineConfig& config, size_t levels) {
  check_gold(sentences, gold);
  const auto rule = features::head_rule(config.head_rule);
  std::vector<std::vector<size_t>> heights;
  for (size_t s = 0; s < sentences.size(); ++s) {
    for (const auto& p : gold[s]) {
      if (p.start > p.end || p.end >= sentences[s].size()) {
        throw DomainError("phrase out of bounds in sentence " + std::to_string(s));
      }
    }
    heights.push_back(phrase_heights(gold[s]));
  }
  const int c = config.level_context;
  const auto tmpl = FeatureTemplate::window(c, c);

  std::vector<LevelModels> out;
  for (size_t level = 1; level <= levels; ++level) {
    std::vector<Sentence> compressed;
    TagSequences opens, closes;
    bool any_target = false;
    for (size_t s = 0; s < sentences.size(); ++s) {
      const auto units = units_up_to(gold[s], heights[s], level);
      const auto cs = features::compress_tracked(sentences[s], units, rule);
      std::vector<ChunkSpan> targets;
      for (size_t i = 0; i < gold[s].size(); ++i) {
        if (heights[s][i] != level + 1) continue;
        const auto& p = gold[s][i];
        ChunkSpan t{0, 0, p.type};
        bool has_start = false, has_end = false;
        for (size_t u = 0; u < cs.origin.size(); ++u) {
          if (cs.origin[u].first == p.start) t.start = u, has_start = true;
          if (cs.origin[u].second == p.end) t.end = u, has_end = true;
        }
        if (!has_start || !has_end) throw DomainError("gold phrases cross in sentence " + std::to_string(s));
        targets.push_back(t);
        any_target = true;
      }
      std::sort(targets.begin(), targets.end());
      opens.push_back(repr::encode(targets, Scheme::kOpen, cs.tokens.size()));
      closes.push_back(repr::encode(targets, Scheme::kClose, cs.tokens.size()));
      compressed.push_back(cs.tokens);
    }
    if (!any_target) break;
    LevelModels lm;
    lm.open = train_tagger(compressed, opens, tmpl, config.level_learner);
    lm.close = train_tagger(compressed, closes, tmpl, config.level_learner);
    out.push_back(std::move(lm));
  }
  return out;
}

CascadeResult run_cascade(const std::vector<Sentence>& sentences, const SpanSets& base,
                          std::span<const LevelModels> level_models, size_t max_levels,
                          const PipelineConfig& config, const WarningSink& warn) {
  check_gold(sentences, base);
  const auto rule = features::head_rule(config.head_rule);
  CascadeResult result;
  result.phrases.assign(sentences.size(), {});
  result.levels_run.assign(sentences.size(), 0);
  std::mutex warn_guard;
  std::set<size_t> warned;
  parallel_for(sentences.size(), config.workers, [&](size_t s) {
    auto& phrases = result.phrases[s];
    std::set<ChunkSpan> seen;
    auto chunks = base[s];
    std::sort(chunks.begin(), chunks.end());
    for (const auto& c : chunks) {
      phrases.push_back({c, 1});
      seen.insert(c);
    }
    auto cs = features::compress_tracked(sentences[s], chunks, rule);
    size_t steps = 0;
    for (size_t level = 2; level <= max_levels && !sentences[s].empty(); ++level) {
      const size_t model_index = level - 2;
      // Training stops at the first level without targets, so running out of
      // models is the normal end of the cascade.
      if (model_index >= level_models.size()) break;
      if (!level_models[model_index].open || !level_models[model_index].close) {
        std::lock_guard<std::mutex> lock(warn_guard);
        if (warn && warned.insert(level).second) {
          warn("no model for parse level " + std::to_string(level) + "; cascade stops");
        }
        break;
      }
      const auto& lm = level_models[model_index];
      const auto o = lm.open->tag(cs.tokens);
      const auto c = lm.close->tag(cs.tokens);
      const auto local = repr::innermost_spans(
          repr::balance_brackets(repr::open_marks(o), repr::close_marks(c), config.match_mode));
      bool added = false;
      for (const auto& sp : local) {
        ChunkSpan mapped{cs.origin[sp.start].first, cs.origin[sp.end].second, sp.type};
        if (seen.insert(mapped).second) {
          phrases.push_back({mapped, level});
          added = true;
        }
      }
      if (!added) break;
      ++steps;
      cs = features::compress_tracked(cs, local, rule);
    }
    result.levels_run[s] = steps;
  });
  return result;
}

SpanSets parse_np(const std::vector<Sentence>& sentences, const BaseChunker& base_chunker,
                  std::span<const LevelModels> level_models, const PipelineConfig& config,
                  const WarningSink& warn) {
  auto base = base_chunker(sentences);
  for (auto& spans : base) {
    for (auto& sp : spans) {
      if (sp.type.empty()) sp.type = "NP";
    }
  }
  const auto cascade = run_cascade(sentences, base, level_models, config.np_parse_levels, config, warn);
  SpanSets out;
  for (const auto& phrases : cascade.phrases) {
    std::vector<ChunkSpan> spans;
    for (const auto& p : phrases) spans.push_back(p.span);
    std::sort(spans.begin(), spans.end());
    out.push_back(std::move(spans));
  }
  return out;
}

bool is_clause_label(const std::string& label) { return !label.empty() && label.front() == 'S'; }

ParseResult parse_full(const std::vector<Sentence>& sentences, const BaseChunker& typed_chunker,
                       std::span<const LevelModels> level_models, const PipelineConfig& config,
                       const WarningSink& warn) {
  const auto base = typed_chunker(sentences);
  auto cascade = run_cascade(sentences, base, level_models, config.max_parse_levels, config, warn);
  ParseResult result;
  for (size_t s = 0; s < sentences.size(); ++s) {
    auto& phrases = cascade.phrases[s];
    const size_t n = sentences[s].size();
    if (n > 0) {
      const bool rooted = std::any_of(phrases.begin(), phrases.end(), [&](const Phrase& p) {
        return p.span.start == 0 && p.span.end == n - 1 && is_clause_label(p.span.type);
      });
      if (!rooted) {
        size_t top = 1;
        for (const auto& p : phrases) top = std::max(top, p.level);
        phrases.push_back({{0, n - 1, "S"}, top + 1});
      }
    }
    result.trees.push_back(build_tree(sentences[s], phrases));
    result.phrases.push_back(std::move(phrases));
  }
  return result;
}

ParseNode build_tree(std::span<const Token> sentence, std::vector<Phrase> phrases) {
  struct Item {
    size_t start, end;
    long rank;  // phrases: level; tokens: -1 (innermost)
    size_t index;
  };
  std::vector<Item> items;
  for (size_t i = 0; i < phrases.size(); ++i) {
    const auto& sp = phrases[i].span;
    if (sp.start > sp.end || sp.end >= sentence.size()) throw DomainError("phrase out of bounds");
    items.push_back({sp.start, sp.end, static_cast<long>(phrases[i].level), i});
  }
  for (size_t t = 0; t < sentence.size(); ++t) items.push_back({t, t, -1, t});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end > b.end;
    if (a.rank != b.rank) return a.rank > b.rank;
    return a.index < b.index;
  });

  ParseNode root;
  root.start = 0;
  root.end = sentence.empty() ? 0 : sentence.size() - 1;
  std::vector<ParseNode*> stack{&root};
  for (const auto& it : items) {
    while (stack.size() > 1 && !(stack.back()->start <= it.start && it.end <= stack.back()->end)) {
      stack.pop_back();
    }
    ParseNode node;
    node.start = it.start;
    node.end = it.end;
    if (it.rank < 0) {
      node.label = sentence[it.index].pos;
      node.word = sentence[it.index].word;
      stack.back()->children.push_back(std::move(node));
    } else {
      node.label = phrases[it.index].span.type;
      auto& parent = *stack.back();
      // Children of a phrase must not cross it.
      if (!parent.children.empty() && parent.children.back().end >= node.start) {
        throw DomainError("crossing phrases cannot form a tree");
      }
      parent.children.push_back(std::move(node));
      stack.push_back(&parent.children.back());
    }
  }
  if (root.children.size() == 1 && root.children.front().word.empty() &&
      root.children.front().start == root.start && root.children.front().end == root.end) {
    ParseNode only = std::move(root.children.front());
    return only;
  }
  return root;
}

std::string tree_to_string(const ParseNode& node) {
  if (node.children.empty() && !node.word.empty()) return "(" + node.label + " " + node.word + ")";
  std::string out = "(" + node.label;
  for (const auto& c : node.children) out += " " + tree_to_string(c);
  return out + ")";
}

std::vector<std::vector<ChunkSpan>> spans_up_to(const std::vector<std::vector<Phrase>>& phrases,
                                                size_t level) {
  std::vector<std::vector<ChunkSpan>> out;
  out.reserve(phrases.size());
  for (const auto& ps : phrases) {
    std::vector<ChunkSpan> spans;
    for (const auto& p : ps) {
      if (p.level <= level) spans.push_back(p.span);
    }
    std::sort(spans.begin(), spans.end());
    out.push_back(std::move(spans));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation

FoldPlan build_fold_plan(size_t sections, LeakMode mode) {
  if (sections < 2) throw ConfigError("cross-validation needs at least 2 sections");
  if (mode == LeakMode::kNestedCv && sections < 3) {
    throw ConfigError("nested cross-validation needs at least 3 sections");
  }
  if (sections > 64) throw ConfigError("at most 64 sections are supported");
  FoldPlan plan;
  plan.sections = sections;
  plan.mode = mode;
  for (size_t x = 0; x < sections; ++x) {
    FoldPlan::Fold fold;
    fold.test = x;
    for (size_t y = 0; y < sections; ++y) {
      if (y != x) fold.train.push_back(y);
    }
    if (mode == LeakMode::kNestedCv) {
      for (size_t y : fold.train) {
        FoldPlan::InnerFold inner;
        inner.test = y;
        for (size_t z : fold.train) {
          if (z != y) inner.train.push_back(z);
        }
        fold.inner.push_back(std::move(inner));
      }
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

namespace {

Provenance bits(std::span<const size_t> sections) {
  Provenance p = 0;
  for (size_t s : sections) p |= Provenance{1} << s;
  return p;
}

}  // namespace

CascadeCvResult run_cascaded_cv(const std::vector<std::vector<Sentence>>& sections,
                                const std::vector<TagSequences>& gold, const FoldPlan& plan,
                                const FeatureTemplate& pass1, const FeatureTemplate& pass2,
                                const mbl::LearnerConfig& learner) {
  if (sections.size() != gold.size() || sections.size() != plan.sections) {
    throw DomainError("sections, gold tags and fold plan disagree on the number of sections");
  }
  if (!pass2.uses_chunks()) throw ConfigError("the pass-2 template must use chunk context");

  auto gather = [&](std::span<const size_t> ids, std::vector<Sentence>& sents, TagSequences& tags) {
    for (size_t id : ids) {
      if (id >= sections.size()) throw ConfigError("fold plan names a missing section");
      sents.insert(sents.end(), sections[id].begin(), sections[id].end());
      tags.insert(tags.end(), gold[id].begin(), gold[id].end());
    }
  };

  CascadeCvResult result;
  result.predictions.assign(sections.size(), {});
  result.provenance.assign(sections.size(), {});
  for (const auto& fold : plan.folds) {
    std::vector<Sentence> train_sents;
    TagSequences train_tags;
    gather(fold.train, train_sents, train_tags);
    const auto first = train_tagger(train_sents, train_tags, pass1, learner);
    const Provenance first_mask = bits(fold.train);

    std::vector<Sentence> context_sents;
    TagSequences context_labels;
    Provenance training_mask = 0;
    if (plan.mode == LeakMode::kNestedCv) {
      for (const auto& inner : fold.inner) {
        std::vector<Sentence> is;
        TagSequences it;
        gather(inner.train, is, it);
        const auto inner_model = train_tagger(is, it, pass1, learner);
        for (size_t k = 0; k < sections.at(inner.test).size(); ++k) {
          const auto& sent = sections[inner.test][k];
          context_sents.push_back(with_chunks(sent, inner_model->tag(sent)));
          context_labels.push_back(gold[inner.test][k]);
        }
        training_mask |= bits(inner.train) | (Provenance{1} << inner.test);
      }
    } else {
      for (size_t y : fold.train) {
        for (size_t k = 0; k < sections[y].size(); ++k) {
          context_sents.push_back(with_chunks(sections[y][k], gold[y][k]));
          context_labels.push_back(gold[y][k]);
        }
        training_mask |= Provenance{1} << y;
      }
    }
    if (context_sents.empty()) throw DomainError("fold has no pass-2 training material");
    const auto second = train_tagger(context_sents, context_labels, pass2, learner);
    result.training_provenance.push_back(training_mask);

    auto& preds = result.predictions.at(fold.test);
    auto& prov = result.provenance.at(fold.test);
    preds.clear();
    prov.clear();
    for (const auto& sent : sections[fold.test]) {
      preds.push_back(second->tag(with_chunks(sent, first->tag(sent))));
      prov.push_back(first_mask | training_mask);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr const char* kBundleTag = "mbsp-bundle";
constexpr int kBundleVersion = 1;

std::vector<std::string> expect(std::istream& in, const std::string& key, size_t fields) {
  auto f = split(read_line(in, key.c_str()), '\t');
  if (f.empty() || f[0] != key || (fields && f.size() != fields)) {
    throw ParseError("expected '" + key + "' record in model bundle", 0);
  }
  return f;
}

size_t count_field(const std::string& s) {
  try {
    return std::stoul(s);
  } catch (const std::exception&) {
    throw ParseError("bad count '" + s + "' in model bundle", 0);
  }
}

void save_levels(const std::vector<LevelModels>& levels, std::ostream& out) {
  out << "levels\t" << levels.size() << '\n';
  for (const auto& lm : levels) {
    lm.open->save(out);
    lm.close->save(out);
  }
}

std::vector<LevelModels> load_levels(std::istream& in) {
  const size_t n = count_field(expect(in, "levels", 2)[1]);
  std::vector<LevelModels> out;
  for (size_t i = 0; i < n; ++i) {
    LevelModels lm;
    lm.open = load_tagger(in);
    lm.close = load_tagger(in);
    out.push_back(std::move(lm));
  }
  return out;
}

}  // namespace

void save_chunker(const ChunkerModels& models, std::ostream& out) {
  out << "chunker\t" << models.by_scheme.size() << '\n';
  for (const auto& [scheme, pm] : models.by_scheme) {
    out << "scheme\t" << repr::to_string(scheme) << '\t' << (pm.pass2 ? 2 : 1) << '\n';
    pm.pass1->save(out);
    if (pm.pass2) pm.pass2->save(out);
  }
  out << "weights\t" << (models.open_weights ? 1 : 0) << (models.close_weights ? 1 : 0) << '\n';
  if (models.open_weights) combine::save_weights(*models.open_weights, out);
  if (models.close_weights) combine::save_weights(*models.close_weights, out);
}

ChunkerModels load_chunker(std::istream& in) {
  ChunkerModels m;
  const size_t n = count_field(expect(in, "chunker", 2)[1]);
  for (size_t i = 0; i < n; ++i) {
    const auto f = expect(in, "scheme", 3);
    PassModels pm;
    pm.pass1 = load_tagger(in);
    if (f[2] == "2") pm.pass2 = load_tagger(in);
    m.by_scheme.emplace(repr::scheme_from_string(f[1]), std::move(pm));
  }
  const auto w = expect(in, "weights", 2);
  if (w[1].size() != 2) throw ParseError("bad weights record in model bundle", 0);
  if (w[1][0] == '1') m.open_weights = combine::load_weights(in);
  if (w[1][1] == '1') m.close_weights = combine::load_weights(in);
  return m;
}

void save_bundle(const ModelBundle& bundle, std::ostream& out) {
  out << kBundleTag << '\t' << kBundleVersion << '\n';
  if (bundle.np) {
    out << "component\tnp\n";
    save_chunker(*bundle.np, out);
  }
  if (bundle.typed) {
    const auto& t = *bundle.typed;
    out << "component\ttyped\t" << to_string(t.strategy) << '\n';
    out << "frequencies\t" << t.type_frequency.size() << '\n';
    for (const auto& [type, c] : t.type_frequency) out << "frequency\t" << escape_symbol(type) << '\t' << c << '\n';
    switch (t.strategy) {
      case TypeStrategy::kSinglePhase:
        save_chunker(t.joint, out);
        break;
      case TypeStrategy::kDoublePhase:
        save_chunker(t.boundaries, out);
        out << "typer\t" << t.typer->head_rule() << '\n';
        mbl::save_model(t.typer->model(), out);
        break;
      case TypeStrategy::kNPhase:
        out << "types\t" << t.per_type.size() << '\n';
        for (const auto& [type, chunker] : t.per_type) {
          out << "type\t" << escape_symbol(type) << '\n';
          save_chunker(chunker, out);
        }
        break;
    }
  }
  if (bundle.clauses) {
    out << "component\tclauses\n";
    bundle.clauses->open->save(out);
    bundle.clauses->close->save(out);
  }
  if (!bundle.np_levels.empty()) {
    out << "component\tnp-levels\n";
    save_levels(bundle.np_levels, out);
  }
  if (!bundle.parse_levels.empty()) {
    out << "component\tparse-levels\n";
    save_levels(bundle.parse_levels, out);
  }
  out << "end\n";
}

ModelBundle load_bundle(std::istream& in) {
  const auto head = split(read_line(in, "bundle header"), '\t');
  if (head.size() != 2 || head[0] != kBundleTag || head[1] != std::to_string(kBundleVersion)) {
    throw ParseError("not a model bundle", 1);
  }
  ModelBundle b;
  while (true) {
    const auto f = split(read_line(in, "component"), '\t');
    if (f.size() == 1 && f[0] == "end") break;
    if (f.size() < 2 || f[0] != "component") throw ParseError("expected a component record", 0);
    if (f[1] == "np") {
      b.np = load_chunker(in);
    } else if (f[1] == "typed" && f.size() == 3) {
      TypedChunkerModels t;
      t.strategy = type_strategy_from_string(f[2]);
      const size_t nf = count_field(expect(in, "frequencies", 2)[1]);
      for (size_t i = 0; i < nf; ++i) {
        const auto r = expect(in, "frequency", 3);
        t.type_frequency[unescape_symbol(r[1])] = count_field(r[2]);
      }
      switch (t.strategy) {
        case TypeStrategy::kSinglePhase:
          t.joint = load_chunker(in);
          break;
        case TypeStrategy::kDoublePhase: {
          t.boundaries = load_chunker(in);
          const auto r = expect(in, "typer", 2);
          t.typer = std::make_shared<ChunkTypeClassifier>(mbl::load_model(in), r[1]);
          break;
        }
        case TypeStrategy::kNPhase: {
          const size_t nt = count_field(expect(in, "types", 2)[1]);
          for (size_t i = 0; i < nt; ++i) {
            const auto r = expect(in, "type", 2);
            t.per_type.emplace(unescape_symbol(r[1]), load_chunker(in));
          }
          break;
        }
      }
      b.typed = std::move(t);
    } else if (f[1] == "clauses") {
      ClauseModels c;
      c.open = load_tagger(in);
      c.close = load_tagger(in);
      b.clauses = std::move(c);
    } else if (f[1] == "np-levels") {
      b.np_levels = load_levels(in);
    } else if (f[1] == "parse-levels") {
      b.parse_levels = load_levels(in);
    } else {
      throw ParseError("unknown component '" + f[1] + "'", 0);
    }
  }
  return b;
}

void save_bundle_file(const ModelBundle& bundle, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model bundle '" + path + "'");
  save_bundle(bundle, out);
  if (!out) throw IoError("write to '" + path + "' failed");
}

ModelBundle load_bundle_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model bundle '" + path + "'");
  return load_bundle(in);
}

}  // namespace mbsp::pipeline
