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

#include "mbsp/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mbsp/common.h"
#include "mbsp/pipeline.h"

namespace mbsp::io {

namespace {

constexpr std::string_view kHeaderPrefix = "#columns";

bool is_blank(std::string_view line) { return trim(line).empty(); }

size_t role_index(const std::vector<std::string>& names, const std::string& role) {
  auto it = std::find(names.begin(), names.end(), role);
  return it == names.end() ? names.size() : static_cast<size_t>(it - names.begin());
}

}  // namespace

size_t Corpus::columns() const {
  for (const auto& s : sentences) {
    if (!s.empty()) return s.front().size();
  }
  return 0;
}

Corpus read_corpus(std::istream& in) {
  Corpus corpus;
  std::string line;
  size_t line_no = 0;
  size_t width = 0;
  bool separator_known = false;
  bool in_sentence = false;
  bool last_blank = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind(kHeaderPrefix, 0) == 0) {
      corpus.header = split_whitespace(std::string_view(line).substr(kHeaderPrefix.size()));
      if (corpus.header.empty()) throw ParseError("empty column header", line_no);
      continue;
    }
    if (is_blank(line)) {
      if (corpus.sentences.empty() && !in_sentence) throw ParseError("corpus starts with a blank line", line_no);
      in_sentence = false;
      last_blank = true;
      continue;
    }
    last_blank = false;
    if (!separator_known) {
      corpus.separator = line.find('\t') != std::string::npos ? '\t' : ' ';
      separator_known = true;
    }
    Row row = split(line, corpus.separator);
    for (const auto& f : row) {
      if (f.empty()) throw ParseError("empty field", line_no);
    }
    if (width == 0) {
      width = row.size();
      if (!corpus.header.empty() && corpus.header.size() != width) {
        throw ParseError("header names " + std::to_string(corpus.header.size()) + " columns but rows have " +
                             std::to_string(width),
                         line_no);
      }
    } else if (row.size() != width) {
      throw ParseError("row has " + std::to_string(row.size()) + " columns, expected " + std::to_string(width),
                       line_no);
    }
    if (!in_sentence) {
      corpus.sentences.emplace_back();
      in_sentence = true;
    }
    corpus.sentences.back().push_back(std::move(row));
  }
  corpus.trailing_blank = last_blank || corpus.sentences.empty();
  return corpus;
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  if (!corpus.header.empty()) out << kHeaderPrefix << ' ' << join(corpus.header, " ") << '\n';
  const std::string sep(1, corpus.separator);
  for (size_t s = 0; s < corpus.sentences.size(); ++s) {
    for (const auto& row : corpus.sentences[s]) out << join(row, sep) << '\n';
    if (s + 1 < corpus.sentences.size() || corpus.trailing_blank) out << '\n';
  }
}

Corpus read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus '" + path + "'");
  try {
    return read_corpus(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.message(), e.line());
  }
}

void write_corpus_file(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus '" + path + "'");
  write_corpus(corpus, out);
  if (!out) throw IoError("write to '" + path + "' failed");
}

ColumnRoles ColumnRoles::parse(const std::string& list) {
  std::string text = list;
  std::replace(text.begin(), text.end(), ',', ' ');
  const auto names = split_whitespace(text);
  ColumnRoles roles;
  const size_t w = role_index(names, "word"), p = role_index(names, "pos");
  if (w == names.size() || p == names.size()) throw ConfigError("column roles must name 'word' and 'pos'");
  for (const auto& n : names) {
    if (n != "word" && n != "pos" && n != "chunk" && n != "clause" && n != "-") {
      throw ConfigError("unknown column role '" + n + "'");
    }
  }
  roles.word = w;
  roles.pos = p;
  if (size_t c = role_index(names, "chunk"); c < names.size()) roles.chunk = c;
  if (size_t c = role_index(names, "clause"); c < names.size()) roles.clause = c;
  return roles;
}

ColumnRoles ColumnRoles::for_corpus(const Corpus& corpus) {
  if (!corpus.header.empty()) return parse(join(corpus.header, " "));
  ColumnRoles roles;
  if (corpus.columns() >= 3) roles.chunk = 2;
  if (corpus.columns() >= 4) roles.clause = 3;
  return roles;
}

std::vector<Sentence> to_sentences(const Corpus& corpus, const ColumnRoles& roles) {
  const size_t width = corpus.columns();
  for (size_t idx : {roles.word, roles.pos}) {
    if (width && idx >= width) throw ConfigError("column role index " + std::to_string(idx) + " out of range");
  }
  if (width && roles.chunk && *roles.chunk >= width) throw ConfigError("chunk column out of range");
  std::vector<Sentence> out;
  out.reserve(corpus.sentences.size());
  for (const auto& rows : corpus.sentences) {
    Sentence s;
    s.reserve(rows.size());
    for (const auto& row : rows) {
      Token t{row[roles.word], row[roles.pos], std::nullopt};
      if (roles.chunk) t.chunk = row[*roles.chunk];
      s.push_back(std::move(t));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::vector<repr::ChunkSpan>> chunk_spans(const Corpus& corpus, const ColumnRoles& roles) {
  if (!roles.chunk) throw ConfigError("corpus has no chunk column");
  std::vector<std::vector<repr::ChunkSpan>> out;
  for (const auto& rows : corpus.sentences) {
    std::vector<std::string> tags;
    for (const auto& row : rows) tags.push_back(row.at(*roles.chunk));
    out.push_back(repr::decode(tags, repr::Scheme::kIOB2));
  }
  return out;
}

std::vector<std::string> clause_column(std::span<const repr::ClauseNode> forest, size_t length) {
  std::vector<size_t> opens(length, 0), closes(length, 0);
  for (const auto& [s, e] : repr::flatten(forest)) {
    if (e >= length) throw DomainError("clause extends beyond the sentence");
    ++opens[s];
    ++closes[e];
  }
  std::vector<std::string> out(length);
  for (size_t i = 0; i < length; ++i) {
    std::string cell;
    for (size_t k = 0; k < opens[i]; ++k) cell += "(S";
    cell += '*';
    for (size_t k = 0; k < closes[i]; ++k) cell += "S)";
    out[i] = std::move(cell);
  }
  return out;
}

std::vector<repr::ClauseNode> parse_clause_column(std::span<const std::string> column) {
  std::vector<size_t> stack;
  std::vector<std::pair<size_t, size_t>> spans;
  for (size_t i = 0; i < column.size(); ++i) {
    const std::string& cell = column[i];
    const size_t star = cell.find('*');
    if (star == std::string::npos) throw DomainError("clause cell '" + cell + "' lacks '*'");
    for (size_t k = 0; k < star; ++k) {
      if (cell[k] == '(') stack.push_back(i);
    }
    for (size_t k = star + 1; k < cell.size(); ++k) {
      if (cell[k] != ')') continue;
      if (stack.empty()) throw DomainError("unbalanced clause column at token " + std::to_string(i));
      spans.emplace_back(stack.back(), i);
      stack.pop_back();
    }
  }
  if (!stack.empty()) throw DomainError("unclosed clause in clause column");
  return repr::build_forest(std::move(spans));
}

std::vector<std::vector<repr::ClauseNode>> clause_forests(const Corpus& corpus, const ColumnRoles& roles) {
  if (!roles.clause) throw ConfigError("corpus has no clause column");
  std::vector<std::vector<repr::ClauseNode>> out;
  for (const auto& rows : corpus.sentences) {
    std::vector<std::string> col;
    for (const auto& row : rows) col.push_back(row.at(*roles.clause));
    out.push_back(parse_clause_column(col));
  }
  return out;
}

Corpus make_corpus(const std::vector<Sentence>& sentences,
                   const std::vector<std::vector<std::vector<std::string>>>& extra_columns,
                   const std::vector<std::string>& header) {
  Corpus corpus;
  corpus.separator = ' ';
  corpus.header = header;
  for (const auto& col : extra_columns) {
    if (col.size() != sentences.size()) throw DomainError("extra column is not aligned with the sentences");
  }
  bool chunks = !sentences.empty();
  for (const auto& s : sentences) {
    for (const auto& t : s) chunks = chunks && t.chunk.has_value();
  }
  for (size_t k = 0; k < sentences.size(); ++k) {
    std::vector<Row> rows;
    for (size_t i = 0; i < sentences[k].size(); ++i) {
      const auto& t = sentences[k][i];
      Row row{t.word, t.pos};
      if (chunks) row.push_back(*t.chunk);
      for (const auto& col : extra_columns) row.push_back(col[k].at(i));
      rows.push_back(std::move(row));
    }
    corpus.sentences.push_back(std::move(rows));
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Trees

namespace {

class TreeParser {
 public:
  explicit TreeParser(const std::string& text) : text_(text) {}

  TreeSentence parse() {
    skip_space();
    TreeSentence tree;
    node(tree, 0);
    skip_space();
    if (pos_ != text_.size()) fail("trailing text after tree");
    return tree;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DomainError(what + " at offset " + std::to_string(pos_));
  }

  std::string atom() {
    const size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  void node(TreeSentence& tree, size_t depth) {
    if (depth > 1000) fail("tree too deep");
    if (pos_ >= text_.size() || text_[pos_] != '(') fail("expected '('");
    ++pos_;
    skip_space();
    const std::string label = atom();
    skip_space();
    if (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')') {
      const std::string word = atom();
      skip_space();
      if (pos_ >= text_.size() || text_[pos_] != ')') fail("preterminal with more than one word");
      ++pos_;
      if (label.empty()) fail("preterminal without a tag");
      tree.tokens.push_back({word, label, std::nullopt});
      return;
    }
    const size_t start = tree.tokens.size();
    const size_t slot = tree.phrases.size();
    if (!label.empty()) tree.phrases.push_back({start, start, label});
    bool any = false;
    while (pos_ < text_.size() && text_[pos_] == '(') {
      node(tree, depth + 1);
      skip_space();
      any = true;
    }
    if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
    ++pos_;
    if (!any) fail("empty phrase");
    if (!label.empty()) tree.phrases[slot].end = tree.tokens.size() - 1;
  }

  const std::string& text_;
  size_t pos_ = 0;
};

}  // namespace

TreeSentence parse_tree(const std::string& text) { return TreeParser(text).parse(); }

std::vector<TreeSentence> read_trees(std::istream& in) {
  std::vector<TreeSentence> out;
  std::string line, buffer;
  size_t line_no = 0, start_line = 0;
  int depth = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (buffer.empty() && is_blank(line)) continue;
    if (buffer.empty()) start_line = line_no;
    for (char c : line) {
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (depth < 0) throw ParseError("unbalanced ')'", line_no);
    }
    buffer += line;
    buffer += ' ';
    if (depth == 0) {
      try {
        out.push_back(parse_tree(buffer));
      } catch (const DomainError& e) {
        throw ParseError(e.what(), start_line);
      }
      buffer.clear();
    }
  }
  if (!buffer.empty() && !is_blank(buffer)) throw ParseError("unterminated tree", start_line);
  return out;
}

std::vector<TreeSentence> read_trees_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tree file '" + path + "'");
  return read_trees(in);
}

std::string format_tree(const TreeSentence& tree) {
  std::vector<pipeline::Phrase> phrases;
  for (size_t i = 0; i < tree.phrases.size(); ++i) {
    phrases.push_back({tree.phrases[i], tree.phrases.size() - i});
  }
  auto root = pipeline::build_tree(tree.tokens, phrases);
  return pipeline::tree_to_string(root);
}

std::vector<repr::ChunkSpan> base_phrases(const TreeSentence& tree) {
  const auto& ps = tree.phrases;
  std::vector<repr::ChunkSpan> out;
  for (size_t i = 0; i < ps.size(); ++i) {
    bool inner = false;
    for (size_t j = 0; j < ps.size() && !inner; ++j) {
      if (j == i) continue;
      const bool within = ps[i].start <= ps[j].start && ps[j].end <= ps[i].end;
      const bool same = ps[i].start == ps[j].start && ps[i].end == ps[j].end;
      inner = within && (!same || j > i);
    }
    if (!inner) out.push_back(ps[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<repr::ChunkSpan> phrases_labelled(const TreeSentence& tree, const std::vector<std::string>& labels) {
  std::vector<repr::ChunkSpan> out;
  for (const auto& p : tree.phrases) {
    if (std::find(labels.begin(), labels.end(), p.type) != labels.end()) out.push_back(p);
  }
  return out;
}

std::vector<repr::ClauseNode> tree_clauses(const TreeSentence& tree) {
  std::vector<std::pair<size_t, size_t>> spans;
  for (const auto& p : tree.phrases) {
    if (p.type == "S") spans.emplace_back(p.start, p.end);
  }
  return repr::build_forest(std::move(spans));
}

Sentence with_base_chunks(const TreeSentence& tree) {
  const auto tags = repr::encode(base_phrases(tree), repr::Scheme::kIOB2, tree.tokens.size());
  Sentence out = tree.tokens;
  for (size_t i = 0; i < out.size(); ++i) out[i].chunk = tags[i];
  return out;
}

}  // namespace mbsp::io
