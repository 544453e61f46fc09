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

#ifndef MBSP_SYNTH_H_
#define MBSP_SYNTH_H_

// Seeded context-free generator of small bracketed English-like corpora.
// Base chunks appear as phrases of their own (a PP chunk holds only the
// preposition, a VP chunk only the verb group), so a single tree yields
// NP chunks, typed chunks, clauses, nested NPs and full parses.

#include <cstdint>
#include <vector>

#include "mbsp/corpus.h"

namespace mbsp::synth {

struct GrammarOptions {
  // Recursion budget for PP attachment, coordination and embedded clauses.
  size_t max_depth = 3;
  double pp_attach = 0.35;
  double coordination = 0.12;
  double embedding = 0.25;
  double clause_coordination = 0.15;
  // Probability of replacing a token's POS by a plausible wrong tag,
  // imitating an automatic tagger.
  double pos_noise = 0.04;
};

std::vector<io::TreeSentence> generate_trees(size_t count, uint64_t seed, const GrammarOptions& options = {});

// word POS NP-chunk (IOB2 over base NPs only).
io::Corpus np_chunk_corpus(const std::vector<io::TreeSentence>& trees);
// word POS typed-chunk (IOB2 over all base phrases).
io::Corpus typed_chunk_corpus(const std::vector<io::TreeSentence>& trees);
// word POS typed-chunk clause.
io::Corpus clause_corpus(const std::vector<io::TreeSentence>& trees);

// Every NP phrase per sentence (base and nested).
std::vector<std::vector<repr::ChunkSpan>> np_phrases(const std::vector<io::TreeSentence>& trees);

}  // namespace mbsp::synth

#endif  // MBSP_SYNTH_H_
