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

#include "mbsp/repr.h"

#include <algorithm>
#include <map>

#include "mbsp/common.h"

namespace mbsp::repr {

namespace {

std::string suffix(const std::string& type) { return type.empty() ? "" : "-" + type; }

std::vector<ChunkSpan> sorted(std::span<const ChunkSpan> spans) {
  std::vector<ChunkSpan> out(spans.begin(), spans.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kIOB1: return "IOB1";
    case Scheme::kIOB2: return "IOB2";
    case Scheme::kIOE1: return "IOE1";
    case Scheme::kIOE2: return "IOE2";
    case Scheme::kOpen: return "O";
    case Scheme::kClose: return "C";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "IOB1") return Scheme::kIOB1;
  if (name == "IOB2") return Scheme::kIOB2;
  if (name == "IOE1") return Scheme::kIOE1;
  if (name == "IOE2") return Scheme::kIOE2;
  if (name == "O") return Scheme::kOpen;
  if (name == "C") return Scheme::kClose;
  throw ConfigError("unknown tag scheme '" + name + "'");
}

bool is_io_scheme(Scheme scheme) { return scheme != Scheme::kOpen && scheme != Scheme::kClose; }

void validate_spans(std::span<const ChunkSpan> spans, size_t sentence_length) {
  auto ordered = sorted(spans);
  for (size_t i = 0; i < ordered.size(); ++i) {
    const auto& s = ordered[i];
    if (s.start > s.end || s.end >= sentence_length) {
      throw DomainError("span (" + std::to_string(s.start) + "," + std::to_string(s.end) +
                        ") out of bounds for length " + std::to_string(sentence_length));
    }
    if (i > 0 && ordered[i - 1].end >= s.start) {
      throw DomainError("overlapping spans at token " + std::to_string(s.start));
    }
  }
}

std::vector<std::string> encode(std::span<const ChunkSpan> spans, Scheme scheme,
                                size_t sentence_length) {
  validate_spans(spans, sentence_length);
  const bool io = is_io_scheme(scheme);
  std::vector<std::string> tags(sentence_length, io ? kOutside : kNoBracket);
  // Type of the chunk covering each token, or nullopt outside chunks.
  std::vector<const ChunkSpan*> owner(sentence_length, nullptr);
  for (const auto& s : spans) {
    for (size_t i = s.start; i <= s.end; ++i) owner[i] = &s;
  }
  for (const auto& s : spans) {
    const std::string sfx = suffix(s.type);
    switch (scheme) {
      case Scheme::kIOB1:
      case Scheme::kIOB2: {
        for (size_t i = s.start; i <= s.end; ++i) tags[i] = "I" + sfx;
        const bool follows_same = s.start > 0 && owner[s.start - 1] != nullptr &&
                                  owner[s.start - 1]->type == s.type;
        if (scheme == Scheme::kIOB2 || follows_same) tags[s.start] = "B" + sfx;
        break;
      }
      case Scheme::kIOE1:
      case Scheme::kIOE2: {
        for (size_t i = s.start; i <= s.end; ++i) tags[i] = "I" + sfx;
        const bool followed_same = s.end + 1 < sentence_length && owner[s.end + 1] != nullptr &&
                                   owner[s.end + 1]->type == s.type;
        if (scheme == Scheme::kIOE2 || followed_same) tags[s.end] = "E" + sfx;
        break;
      }
      case Scheme::kOpen:
        tags[s.start] = "[" + sfx;
        break;
      case Scheme::kClose:
        tags[s.end] = "]" + sfx;
        break;
    }
  }
  return tags;
}

std::pair<std::string, std::string> split_tag(const std::string& tag) {
  if (tag.size() >= 2 && tag[1] == '-') return {tag.substr(0, 1), tag.substr(2)};
  return {tag, ""};
}

std::vector<ChunkSpan> decode(std::span<const std::string> tags, Scheme scheme) {
  if (!is_io_scheme(scheme)) {
    throw DomainError("a single bracket stream (" + to_string(scheme) +
                      ") does not determine chunks; decode O and C together");
  }
  std::vector<ChunkSpan> out;
  std::string prev_prefix = kOutside, prev_type;
  for (size_t i = 0; i < tags.size(); ++i) {
    auto [prefix, type] = split_tag(tags[i]);
    if (prefix == kOutside) {
      prev_prefix = prefix;
      prev_type.clear();
      continue;
    }
    const bool starts = out.empty() || prev_prefix == kOutside || prev_type != type ||
                        prefix == "B" || prev_prefix == "E" || out.back().end + 1 != i;
    if (starts) {
      out.push_back({i, i, type});
    } else {
      out.back().end = i;
    }
    prev_prefix = prefix;
    prev_type = type;
  }
  return out;
}

std::vector<ChunkSpan> decode_brackets(std::span<const std::string> opens,
                                       std::span<const std::string> closes) {
  if (opens.size() != closes.size()) throw DomainError("open and close streams differ in length");
  return innermost_spans(balance_brackets(open_marks(opens), close_marks(closes)));
}

std::vector<std::string> convert(std::span<const std::string> tags, Scheme from, Scheme to) {
  return encode(decode(tags, from), to, tags.size());
}

std::string to_string(MatchMode mode) {
  switch (mode) {
    case MatchMode::kSameType: return "same-type";
    case MatchMode::kAnyOpen: return "any-open";
    case MatchMode::kAnyClose: return "any-close";
  }
  return "?";
}

MatchMode match_mode_from_string(const std::string& name) {
  if (name == "same-type") return MatchMode::kSameType;
  if (name == "any-open") return MatchMode::kAnyOpen;
  if (name == "any-close") return MatchMode::kAnyClose;
  throw ConfigError("unknown bracket match mode '" + name + "'");
}

std::vector<ChunkSpan> balance_brackets(const BracketStream& opens, const BracketStream& closes,
                                        MatchMode mode) {
  if (opens.size() != closes.size()) throw DomainError("open and close streams differ in length");
  struct Open {
    size_t pos;
    std::string type;
  };
  std::vector<Open> stack;
  std::vector<ChunkSpan> out;
  for (size_t i = 0; i < opens.size(); ++i) {
    if (opens[i]) stack.push_back({i, *opens[i]});
    if (!closes[i] || stack.empty()) continue;
    const std::string& close_type = *closes[i];
    size_t j = stack.size();
    if (mode == MatchMode::kSameType) {
      while (j > 0 && stack[j - 1].type != close_type) --j;
      if (j == 0) continue;  // no compatible open: drop the close
    }
    const Open& match = stack[j - 1];
    out.push_back({match.pos, i, mode == MatchMode::kAnyClose ? match.type : close_type});
    // Opens above the match can no longer close without crossing.
    stack.resize(j - 1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ChunkSpan> innermost_spans(std::span<const ChunkSpan> spans) {
  std::vector<ChunkSpan> out;
  for (const auto& s : spans) {
    const bool encloses = std::any_of(spans.begin(), spans.end(), [&](const ChunkSpan& t) {
      return (t.start != s.start || t.end != s.end) && s.start <= t.start && t.end <= s.end;
    });
    if (!encloses) out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

BracketStream marks(std::span<const std::string> tags, char square, char round) {
  BracketStream out(tags.size());
  for (size_t i = 0; i < tags.size(); ++i) {
    const std::string& t = tags[i];
    if (t.empty() || (t[0] != square && t[0] != round)) continue;
    out[i] = t.size() >= 2 && t[1] == '-' ? t.substr(2) : std::string();
  }
  return out;
}

}  // namespace

BracketStream open_marks(std::span<const std::string> tags) { return marks(tags, '[', '('); }
BracketStream close_marks(std::span<const std::string> tags) { return marks(tags, ']', ')'); }

std::vector<ClauseNode> balance_clauses(std::span<const size_t> opens,
                                        std::span<const size_t> closes,
                                        size_t sentence_length) {
  const size_t n = sentence_length;
  std::vector<bool> is_open(n, false);
  std::vector<size_t> close_count(n, 0);
  for (size_t p : opens) {
    if (p >= n) throw DomainError("clause open position out of range");
    is_open[p] = true;
  }
  for (size_t p : closes) {
    if (p >= n) throw DomainError("clause close position out of range");
    ++close_count[p];
  }

  std::vector<size_t> stack;
  std::vector<std::pair<size_t, size_t>> built;
  for (size_t i = 0; i < n; ++i) {
    if (is_open[i]) stack.push_back(i);
    for (size_t c = 0; c < close_count[i]; ++c) {
      if (stack.empty()) break;                           // rule 3
      if (stack.back() == 0 && i + 1 != n) break;         // rule 4
      built.emplace_back(stack.back(), i);
      stack.pop_back();
    }
  }
  // Rule 5, innermost first.
  while (!stack.empty()) {
    const size_t start = stack.back();
    stack.pop_back();
    size_t end = std::max(n >= 2 ? n - 2 : 0, start);
    for (const auto& [s, e] : built) {
      if (s > start) end = std::max(end, e);
    }
    built.emplace_back(start, end);
  }
  return build_forest(std::move(built));
}

std::vector<ClauseNode> build_forest(std::vector<std::pair<size_t, size_t>> spans) {
  std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  });
  spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
  std::vector<ClauseNode> roots;
  // Path from a root to the most recently inserted node.
  std::vector<ClauseNode*> path;
  for (const auto& [s, e] : spans) {
    if (s > e) throw DomainError("clause with start after end");
    while (!path.empty() && path.back()->end < s) path.pop_back();
    if (!path.empty() && path.back()->end < e) {
      throw DomainError("crossing clauses at token " + std::to_string(s));
    }
    auto& siblings = path.empty() ? roots : path.back()->children;
    siblings.push_back({s, e, {}});
    // Re-derive the path: pointers into `siblings` may have moved, so walk
    // from the root again.
    path.clear();
    std::vector<ClauseNode>* level = &roots;
    while (level && !level->empty()) {
      ClauseNode* last = &level->back();
      if (last->start > s || last->end < e) break;
      path.push_back(last);
      level = &last->children;
    }
  }
  return roots;
}

namespace {

void flatten_into(const ClauseNode& node, std::vector<std::pair<size_t, size_t>>& out) {
  out.emplace_back(node.start, node.end);
  for (const auto& child : node.children) flatten_into(child, out);
}

}  // namespace

std::vector<std::pair<size_t, size_t>> flatten(std::span<const ClauseNode> forest) {
  std::vector<std::pair<size_t, size_t>> out;
  for (const auto& root : forest) flatten_into(root, out);
  return out;
}

bool is_proper_nesting(std::span<const ChunkSpan> spans) {
  for (const auto& a : spans) {
    for (const auto& b : spans) {
      if (a.start < b.start && b.start <= a.end && a.end < b.end) return false;
    }
  }
  return true;
}

}  // namespace mbsp::repr
