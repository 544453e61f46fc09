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

#ifndef MBSP_FEATURES_H_
#define MBSP_FEATURES_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mbsp/repr.h"

namespace mbsp {

// One word position. `chunk` holds a chunk tag when the sentence carries
// chunk annotation (gold, or predicted by an earlier pass).
struct Token {
  std::string word;
  std::string pos;
  std::optional<std::string> chunk;

  bool operator==(const Token&) const = default;
};

using Sentence = std::vector<Token>;

}  // namespace mbsp

namespace mbsp::features {

enum class Channel { kWord, kPos, kChunk };

struct Feature {
  Channel channel = Channel::kWord;
  int offset = 0;

  auto operator<=>(const Feature&) const = default;
};

inline constexpr int kMaxOffset = 4;

// An ordered set of (channel, offset) pairs. Features are kept in canonical
// order: words, then POS tags, then chunk tags, each by ascending offset.
// The focus chunk tag (offset 0) is never allowed.
class FeatureTemplate {
 public:
  FeatureTemplate() = default;
  explicit FeatureTemplate(std::vector<Feature> features);

  // "w[-2..0] p[-4..3] c[-2,-1,1,2]"
  static FeatureTemplate parse(std::string_view text);
  std::string to_string() const;

  // Symmetric word+POS window, optionally with chunk context (focus excluded).
  static FeatureTemplate window(int words, int pos, int chunks = 0);

  const std::vector<Feature>& features() const { return features_; }
  size_t size() const { return features_.size(); }
  bool empty() const { return features_.empty(); }
  bool contains(const Feature& f) const;
  bool uses_chunks() const;

  FeatureTemplate with(const Feature& f) const;
  FeatureTemplate without(const Feature& f) const;

  auto operator<=>(const FeatureTemplate&) const = default;

 private:
  std::vector<Feature> features_;
};

// Feature values for the token at `index`; positions outside the sentence
// yield the PAD symbol.
std::vector<std::string> extract(std::span<const Token> sentence, size_t index,
                                 const FeatureTemplate& tmpl);

struct SelectionStep {
  FeatureTemplate tmpl;
  double score = 0.0;
};

struct SelectionReport {
  FeatureTemplate best_set;
  double best_score = 0.0;
  // Every improvement of the global best, in order (starts with the empty set).
  std::vector<SelectionStep> score_history;
  size_t beam_width = 1;
  size_t evaluations = 0;
  size_t sweeps = 0;
};

struct SelectionOptions {
  size_t beam = 5;
  bool bidirectional = true;  // false: additions only (forward selection)
};

using TemplateScorer = std::function<double(const FeatureTemplate&)>;

// Beam hill climbing over feature subsets starting from the empty template.
// Each sweep expands every not-yet-expanded member of the frontier (the
// `beam` best templates evaluated so far) by adding one candidate and, when
// bidirectional, by removing one feature. The search ends when the frontier
// holds no unexpanded template. Ties prefer smaller, then canonically
// earlier templates.
SelectionReport select_features(std::span<const Feature> candidates, const TemplateScorer& evaluate,
                                const SelectionOptions& options = {});

// Index of the head of an NP chunk: the final word of the first run of noun
// tags (POS starting with "NN", or a compressed "NP"), else the final word.
size_t np_head(std::span<const Token> chunk);

using HeadRule = std::function<size_t(std::span<const Token> chunk, const std::string& type)>;

// "default": NP rule for NP chunks, final word otherwise; "final": always the
// final word.
HeadRule head_rule(std::string_view name);

// A compressed sentence: each chunk reduced to its head token whose POS is
// replaced by the chunk type. `origin[i]` is the original token range that
// compressed token i stands for.
struct CompressedSentence {
  std::vector<Token> tokens;
  std::vector<std::pair<size_t, size_t>> origin;
};

CompressedSentence compress_tracked(std::span<const Token> sentence,
                                    std::span<const repr::ChunkSpan> chunks, const HeadRule& rule);

// Further compresses an already compressed sentence, composing origins.
CompressedSentence compress_tracked(const CompressedSentence& sentence,
                                    std::span<const repr::ChunkSpan> chunks, const HeadRule& rule);

std::vector<Token> compress(std::span<const Token> sentence, std::span<const repr::ChunkSpan> chunks,
                            const HeadRule& rule = head_rule("default"));

}  // namespace mbsp::features

#endif  // MBSP_FEATURES_H_
