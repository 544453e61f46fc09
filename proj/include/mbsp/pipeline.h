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

#ifndef MBSP_PIPELINE_H_
#define MBSP_PIPELINE_H_

// Cascaded shallow parsing: multi-representation NP chunking with voting,
// typed chunking (single-, double- and N-phase), clause identification,
// NP parsing and full parsing by repeated chunk-and-compress, and leak-free
// cascaded cross-validation.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mbsp/combine.h"
#include "mbsp/features.h"
#include "mbsp/mbl.h"
#include "mbsp/repr.h"

namespace mbsp::pipeline {

using repr::ChunkSpan;
using SpanSets = std::vector<std::vector<ChunkSpan>>;
using TagSequences = std::vector<std::vector<std::string>>;

// Receives non-fatal diagnostics (skipped chunkers, stopped cascades).
using WarningSink = std::function<void(const std::string&)>;

// ---------------------------------------------------------------------------
// Taggers

// Assigns one tag per token of a sentence.
class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual std::vector<std::string> tag(std::span<const Token> sentence) const = 0;
  virtual void save(std::ostream& out) const = 0;
};

using TaggerPtr = std::shared_ptr<const Tagger>;

// Memory-based tagger: windowed features around each token, classified by
// a trained model.
class MemoryTagger : public Tagger {
 public:
  MemoryTagger(features::FeatureTemplate tmpl, mbl::Model model)
      : template_(std::move(tmpl)), model_(std::move(model)) {}

  std::vector<std::string> tag(std::span<const Token> sentence) const override;
  void save(std::ostream& out) const override;

  const features::FeatureTemplate& feature_template() const { return template_; }
  const mbl::Model& model() const { return model_; }

 private:
  features::FeatureTemplate template_;
  mbl::Model model_;
};

// Per-token majority vote over member taggers (ties to the earliest member).
class VotingTagger : public Tagger {
 public:
  explicit VotingTagger(std::vector<TaggerPtr> members) : members_(std::move(members)) {}
  std::vector<std::string> tag(std::span<const Token> sentence) const override;
  void save(std::ostream& out) const override;

 private:
  std::vector<TaggerPtr> members_;
};

// Which pair of information sources a tagger sees through its word and POS
// channels. Chunk tags given as input (not predicted by an earlier pass of
// the same task) are exposed this way, so the focus token's chunk tag can
// be a feature without violating the template invariant.
enum class View { kWordPos, kWordChunk, kPosChunk, kChunkOnly };

std::string to_string(View view);
View view_from_string(const std::string& name);
std::vector<Token> apply_view(std::span<const Token> sentence, View view);

class ViewTagger : public Tagger {
 public:
  ViewTagger(View view, TaggerPtr inner) : view_(view), inner_(std::move(inner)) {}
  std::vector<std::string> tag(std::span<const Token> sentence) const override;
  void save(std::ostream& out) const override;

 private:
  View view_;
  TaggerPtr inner_;
};

enum class Anchor { kFirst, kLast };

// Tags the chunk-compressed sentence (chunks decoded from Token::chunk)
// and places each compressed token's tag on the first or last original
// token it stands for; all other tokens receive `none_tag`.
class CompressedTagger : public Tagger {
 public:
  CompressedTagger(TaggerPtr inner, Anchor anchor, std::string head_rule = "default",
                   std::string none_tag = ".")
      : inner_(std::move(inner)), anchor_(anchor), head_rule_name_(std::move(head_rule)),
        none_tag_(std::move(none_tag)) {}
  std::vector<std::string> tag(std::span<const Token> sentence) const override;
  void save(std::ostream& out) const override;

 private:
  TaggerPtr inner_;
  Anchor anchor_;
  std::string head_rule_name_;
  std::string none_tag_;
};

// Chunk spans recorded in the sentence's chunk column (permissive IOB decoding).
std::vector<ChunkSpan> chunks_of(std::span<const Token> sentence);

// Trains a MemoryTagger from per-token targets. Throws DomainError when the
// corpus yields no instances.
std::shared_ptr<MemoryTagger> train_tagger(const std::vector<Sentence>& sentences,
                                           const TagSequences& targets,
                                           const features::FeatureTemplate& tmpl,
                                           const mbl::LearnerConfig& learner);

// Persistence of any tagger tree produced by this module.
void save_tagger(const Tagger& tagger, std::ostream& out);
TaggerPtr load_tagger(std::istream& in);

// ---------------------------------------------------------------------------
// Configuration

enum class Representation { kIOB1, kIOB2, kIOE1, kIOE2, kOpenClose };

std::string to_string(Representation r);
Representation representation_from_string(const std::string& name);
// Tag schemes a representation needs models for (O+C needs two).
std::vector<repr::Scheme> schemes_of(Representation r);

enum class TypeStrategy { kSinglePhase, kDoublePhase, kNPhase };

std::string to_string(TypeStrategy s);
TypeStrategy type_strategy_from_string(const std::string& name);

enum class LeakMode { kNestedCv, kGoldInTrain };

std::string to_string(LeakMode m);
LeakMode leak_mode_from_string(const std::string& name);

struct PipelineConfig {
  std::vector<Representation> representations = {Representation::kIOB1, Representation::kIOE2,
                                                 Representation::kOpenClose};
  std::map<repr::Scheme, features::FeatureTemplate> pass1 = default_pass1();
  std::map<repr::Scheme, features::FeatureTemplate> pass2 = default_pass2();
  bool second_pass = true;
  TypeStrategy type_strategy = TypeStrategy::kDoublePhase;
  combine::Method combiner = combine::Method::kMajority;
  mbl::LearnerConfig chunk_learner{3, mbl::TiePolicy::kGlobalClassFrequency, true};
  mbl::LearnerConfig type_learner{3, mbl::TiePolicy::kGlobalClassFrequency, true};
  mbl::LearnerConfig clause_learner{3, mbl::TiePolicy::kGlobalClassFrequency, true};
  mbl::LearnerConfig level_learner{1, mbl::TiePolicy::kGlobalClassFrequency, true};
  int clause_open_context = 1;
  int clause_close_context = 3;
  int level_context = 2;
  size_t max_parse_levels = 19;
  size_t np_parse_levels = 6;
  repr::MatchMode match_mode = repr::MatchMode::kSameType;
  std::string head_rule = "default";
  // Chunk types for the N-phase strategy; empty means every type seen in
  // training.
  std::vector<std::string> chunk_types;
  // Sentences processed in parallel at inference; output order is input order.
  size_t workers = 1;

  // Per-representation feature sets found by wrapper selection for NP
  // chunking, pass 1 (word/POS only) and pass 2 (with context chunk tags).
  static std::map<repr::Scheme, features::FeatureTemplate> default_pass1();
  static std::map<repr::Scheme, features::FeatureTemplate> default_pass2();

  // Throws ConfigError on an empty representation list; returns warnings
  // (e.g. an even number of voters).
  std::vector<std::string> validate() const;
};

// ---------------------------------------------------------------------------
// NP (or untyped / jointly typed) chunking

struct PassModels {
  TaggerPtr pass1;
  TaggerPtr pass2;  // optional
};

struct ChunkerModels {
  std::map<repr::Scheme, PassModels> by_scheme;
  // Needed only when the configured combiner is not majority voting.
  std::optional<combine::CombinerWeights> open_weights;
  std::optional<combine::CombinerWeights> close_weights;
};

// Pass-2 training uses gold context chunk tags (the leak-free choice that
// keeps all training data usable).
ChunkerModels train_chunker(const std::vector<Sentence>& sentences, const SpanSets& gold,
                            const PipelineConfig& config);

// train_chunker plus, for weighted combiners, open/close vote weights fitted
// on `folds`-fold cross-validated outputs of the training data.
ChunkerModels train_chunker_with_combiner(const std::vector<Sentence>& sentences, const SpanSets& gold,
                                          const PipelineConfig& config, size_t folds = 5);

// Output of pass 1 and (optionally) pass 2 for one scheme.
std::vector<std::string> run_scheme(std::span<const Token> sentence, const ChunkerModels& models,
                                    repr::Scheme scheme);

// Intermediate annotations of chunk_np, per sentence.
struct ChunkTrace {
  // [sentence][representation] -> open / close stream
  std::vector<std::vector<std::vector<std::string>>> open_streams, close_streams;
  std::vector<std::vector<std::string>> voted_open, voted_close;
};

// The five-step scheme: pass 1, pass 2, conversion of every representation
// to open and close bracket streams, voting per stream, bracket balancing.
SpanSets chunk_np(const std::vector<Sentence>& sentences, const ChunkerModels& models,
                  const PipelineConfig& config, ChunkTrace* trace = nullptr);

// Chunks found by a single representation on its own.
SpanSets chunk_single(const std::vector<Sentence>& sentences, const ChunkerModels& models,
                      Representation representation, const PipelineConfig& config);

// ---------------------------------------------------------------------------
// Typed chunking

// Assigns a phrase type to an untyped chunk from the chunk head word, the
// chunk-internal POS sequence and the adjacent unit on either side (the
// neighbouring chunk's POS sequence, or the neighbouring token's POS).
class ChunkTypeClassifier {
 public:
  ChunkTypeClassifier(mbl::Model model, std::string head_rule)
      : model_(std::move(model)), head_rule_(std::move(head_rule)) {}
  static std::vector<std::string> chunk_features(std::span<const Token> sentence,
                                                 std::span<const ChunkSpan> chunks, size_t index,
                                                 const features::HeadRule& rule);
  std::string classify(std::span<const Token> sentence, std::span<const ChunkSpan> chunks,
                       size_t index) const;
  const mbl::Model& model() const { return model_; }
  const std::string& head_rule() const { return head_rule_; }

 private:
  mbl::Model model_;
  std::string head_rule_;
};

ChunkTypeClassifier train_type_classifier(const std::vector<Sentence>& sentences, const SpanSets& gold,
                                          const mbl::LearnerConfig& learner,
                                          const std::string& head_rule = "default");

struct TypedChunkerModels {
  TypeStrategy strategy = TypeStrategy::kDoublePhase;
  ChunkerModels joint;                                // single phase: typed tags
  ChunkerModels boundaries;                           // double phase: untyped tags
  std::shared_ptr<const ChunkTypeClassifier> typer;   // double phase
  std::map<std::string, ChunkerModels> per_type;      // N phase
  std::map<std::string, size_t> type_frequency;       // training chunk counts
};

// N phase: a configured type without training chunks is skipped with a
// warning.
TypedChunkerModels train_typed_chunker(const std::vector<Sentence>& sentences, const SpanSets& gold,
                                       const PipelineConfig& config, TypeStrategy strategy,
                                       const WarningSink& warn = {});

// Token conflicts between per-type chunkers (N phase) go to the type that is
// most frequent in training.
SpanSets chunk_typed(const std::vector<Sentence>& sentences, const TypedChunkerModels& models,
                     const PipelineConfig& config, const WarningSink& warn = {});

// Greedy conflict resolution used by the N-phase strategy.
std::vector<ChunkSpan> resolve_type_conflicts(std::vector<ChunkSpan> candidates,
                                              const std::map<std::string, size_t>& type_frequency);

// ---------------------------------------------------------------------------
// Clause identification

struct ClauseModels {
  TaggerPtr open;   // "(" or "."
  TaggerPtr close;  // ")" repeated per clause end, or "."
};

// Clause brackets in per-token tag form.
std::vector<std::string> open_tags(std::span<const repr::ClauseNode> forest, size_t length);
std::vector<std::string> close_tags(std::span<const repr::ClauseNode> forest, size_t length);

// Open: majority of word+POS, word+chunk and POS+chunk learners (context
// clause_open_context). Close: word+chunk learner on chunk-compressed
// sentences (context clause_close_context).
ClauseModels train_clause_models(const std::vector<Sentence>& sentences,
                                 const std::vector<std::vector<repr::ClauseNode>>& gold,
                                 const PipelineConfig& config);

std::vector<std::vector<repr::ClauseNode>> identify_clauses(const std::vector<Sentence>& sentences,
                                                            const ClauseModels& models,
                                                            size_t workers = 1);

// ---------------------------------------------------------------------------
// Cascaded parsing

// A labelled phrase with the cascade level that produced it (1 = base
// chunks; the final S wrap gets the level after the last cascade step).
struct Phrase {
  ChunkSpan span;
  size_t level = 1;

  bool operator==(const Phrase&) const = default;
};

struct ParseNode {
  std::string label;  // phrase type, or POS for a leaf
  size_t start = 0;
  size_t end = 0;
  std::string word;   // leaves only
  std::vector<ParseNode> children;
};

struct LevelModels {
  TaggerPtr open;   // "[-TYPE" / "."
  TaggerPtr close;  // "]-TYPE" / "."
};

// Phrase height: 1 for phrases containing no other phrase.
std::vector<size_t> phrase_heights(std::span<const ChunkSpan> phrases);

// Level L (1-based) learns phrases of height L+1 on sentences compressed by
// the maximal gold phrases of height <= L. Returns up to `levels` models;
// levels without training material end the list.
std::vector<LevelModels> train_level_models(const std::vector<Sentence>& sentences, const SpanSets& gold,
                                            const PipelineConfig& config, size_t levels);

using BaseChunker = std::function<SpanSets(const std::vector<Sentence>&)>;

struct CascadeResult {
  std::vector<std::vector<Phrase>> phrases;  // per sentence
  std::vector<size_t> levels_run;            // per sentence, cascade steps that added phrases
};

// Base chunking, then repeated compress-and-chunk with the level models
// using bracket streams only, stopping when a level adds nothing or the
// models run out.
CascadeResult run_cascade(const std::vector<Sentence>& sentences, const SpanSets& base,
                          std::span<const LevelModels> level_models, size_t max_levels,
                          const PipelineConfig& config, const WarningSink& warn = {});

// Nested NP phrases per sentence.
SpanSets parse_np(const std::vector<Sentence>& sentences, const BaseChunker& base_chunker,
                  std::span<const LevelModels> level_models, const PipelineConfig& config,
                  const WarningSink& warn = {});

struct ParseResult {
  std::vector<std::vector<Phrase>> phrases;
  std::vector<ParseNode> trees;
};

// Typed base chunks, up to max_parse_levels cascade steps, then an S node
// over any sentence whose root is not a clause.
ParseResult parse_full(const std::vector<Sentence>& sentences, const BaseChunker& typed_chunker,
                       std::span<const LevelModels> level_models, const PipelineConfig& config,
                       const WarningSink& warn = {});

bool is_clause_label(const std::string& label);

ParseNode build_tree(std::span<const Token> sentence, std::vector<Phrase> phrases);
std::string tree_to_string(const ParseNode& node);

// Phrases produced at or before `level`.
std::vector<std::vector<ChunkSpan>> spans_up_to(const std::vector<std::vector<Phrase>>& phrases,
                                                size_t level);

// ---------------------------------------------------------------------------
// Leak-free cascaded cross-validation

struct FoldPlan {
  struct InnerFold {
    size_t test = 0;
    std::vector<size_t> train;
  };
  struct Fold {
    size_t test = 0;
    std::vector<size_t> train;
    // Runs that produce pass-2 training context tags (nested mode only).
    std::vector<InnerFold> inner;
  };
  size_t sections = 0;
  LeakMode mode = LeakMode::kGoldInTrain;
  std::vector<Fold> folds;
};

FoldPlan build_fold_plan(size_t sections, LeakMode mode);

// Bit s set: gold labels of section s influenced the value.
using Provenance = uint64_t;

struct CascadeCvResult {
  // [section][sentence] -> pass-2 tags and their provenance.
  std::vector<TagSequences> predictions;
  std::vector<std::vector<Provenance>> provenance;
  // Per fold: provenance of all material used to train its pass-2 model.
  std::vector<Provenance> training_provenance;
};

// Two-pass tagging under a fold plan. Every derived tag carries the set of
// sections whose gold labels reached it, transitively.
CascadeCvResult run_cascaded_cv(const std::vector<std::vector<Sentence>>& sections,
                                const std::vector<TagSequences>& gold,
                                const FoldPlan& plan, const features::FeatureTemplate& pass1,
                                const features::FeatureTemplate& pass2,
                                const mbl::LearnerConfig& learner);

// ---------------------------------------------------------------------------
// Persistence

// Trained components of any subset of the pipeline stages.
struct ModelBundle {
  std::optional<ChunkerModels> np;
  std::optional<TypedChunkerModels> typed;
  std::optional<ClauseModels> clauses;
  std::vector<LevelModels> np_levels;
  std::vector<LevelModels> parse_levels;
};

void save_chunker(const ChunkerModels& models, std::ostream& out);
ChunkerModels load_chunker(std::istream& in);

void save_bundle(const ModelBundle& bundle, std::ostream& out);
ModelBundle load_bundle(std::istream& in);
void save_bundle_file(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle_file(const std::string& path);

}  // namespace mbsp::pipeline

#endif  // MBSP_PIPELINE_H_
