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

#ifndef MBSP_CORPUS_H_
#define MBSP_CORPUS_H_

// Column corpora (one token per line, blank line between sentences) and
// bracketed trees.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mbsp/features.h"
#include "mbsp/repr.h"

namespace mbsp::io {

using Row = std::vector<std::string>;

struct Corpus {
  std::vector<std::vector<Row>> sentences;
  char separator = '\t';
  // Optional "#columns ..." header naming the column roles.
  std::vector<std::string> header;
  // Whether the last sentence was followed by a blank line.
  bool trailing_blank = true;

  size_t columns() const;
};

// Throws ParseError (with the line number) on ragged rows, empty fields or a
// blank first line.
Corpus read_corpus(std::istream& in);
void write_corpus(const Corpus& corpus, std::ostream& out);

// File variants; IoError when the file cannot be opened.
Corpus read_corpus_file(const std::string& path);
void write_corpus_file(const Corpus& corpus, const std::string& path);

// Column roles by index. Names: "word", "pos", "chunk", "clause".
struct ColumnRoles {
  size_t word = 0;
  size_t pos = 1;
  std::optional<size_t> chunk;
  std::optional<size_t> clause;

  // Parses "word,pos,chunk" (or space separated).
  static ColumnRoles parse(const std::string& spec);
  // Roles from the corpus header, else word/pos plus chunk when a third
  // column exists.
  static ColumnRoles for_corpus(const Corpus& corpus);
};

std::vector<Sentence> to_sentences(const Corpus& corpus, const ColumnRoles& roles);

// Chunk spans from the chunk column (permissive IOB decoding).
std::vector<std::vector<repr::ChunkSpan>> chunk_spans(const Corpus& corpus, const ColumnRoles& roles);

// Clause column: per token "(S" repeated for each clause opening there, "*",
// then "S)" for each clause closing there, e.g. "(S(S*", "*", "*S)".
std::vector<std::string> clause_column(std::span<const repr::ClauseNode> forest, size_t length);
std::vector<repr::ClauseNode> parse_clause_column(std::span<const std::string> column);

std::vector<std::vector<repr::ClauseNode>> clause_forests(const Corpus& corpus, const ColumnRoles& roles);

// Builds a corpus from sentences (word, pos, and chunk when every token has
// one) plus any extra per-token columns.
Corpus make_corpus(const std::vector<Sentence>& sentences,
                   const std::vector<std::vector<std::vector<std::string>>>& extra_columns = {},
                   const std::vector<std::string>& header = {});

// Bracketed trees: "(S (NP (DT the) (NN cat)) (VP (VBD sat)))". Preterminal
// nodes become tokens; all other nodes become phrases.
struct TreeSentence {
  Sentence tokens;
  std::vector<repr::ChunkSpan> phrases;  // pre-order, outer before inner
};

TreeSentence parse_tree(const std::string& text);
std::vector<TreeSentence> read_trees(std::istream& in);
std::vector<TreeSentence> read_trees_file(const std::string& path);
std::string format_tree(const TreeSentence& tree);

// Phrases containing no other phrase.
std::vector<repr::ChunkSpan> base_phrases(const TreeSentence& tree);
// Phrases with one of the given labels.
std::vector<repr::ChunkSpan> phrases_labelled(const TreeSentence& tree, const std::vector<std::string>& labels);
// Clauses: phrases labelled exactly "S".
std::vector<repr::ClauseNode> tree_clauses(const TreeSentence& tree);
// Tokens carrying IOB2 tags of the base phrases in their chunk column.
Sentence with_base_chunks(const TreeSentence& tree);

}  // namespace mbsp::io

#endif  // MBSP_CORPUS_H_
