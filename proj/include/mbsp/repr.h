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

#ifndef MBSP_REPR_H_
#define MBSP_REPR_H_

// Chunk tag schemes (IOB1, IOB2, IOE1, IOE2 and the open/close bracket
// streams), conversions between them, and repair of inconsistent bracket
// streams into balanced chunk and clause structures.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mbsp::repr {

// Inclusive token range with a phrase label; an empty label means untyped.
struct ChunkSpan {
  size_t start = 0;
  size_t end = 0;
  std::string type;

  auto operator<=>(const ChunkSpan&) const = default;
};

enum class Scheme { kIOB1, kIOB2, kIOE1, kIOE2, kOpen, kClose };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);
bool is_io_scheme(Scheme scheme);

inline constexpr const char* kOutside = "O";
inline constexpr const char* kNoBracket = ".";

// Spans must be sorted-or-not, in bounds, non-overlapping; DomainError
// otherwise.
void validate_spans(std::span<const ChunkSpan> spans, size_t sentence_length);

std::vector<std::string> encode(std::span<const ChunkSpan> spans, Scheme scheme,
                                size_t sentence_length);

// Total, permissive decoding of an IO-scheme tag sequence: I after O (or
// after a different type) starts a chunk, B always starts one, E always
// ends one. Returns spans in sentence order. Open/close streams alone are
// rejected with DomainError; use decode_brackets for the O+C pair.
std::vector<ChunkSpan> decode(std::span<const std::string> tags, Scheme scheme);

// O+C decoding: balanced, innermost-only spans from two bracket streams.
std::vector<ChunkSpan> decode_brackets(std::span<const std::string> opens,
                                       std::span<const std::string> closes);

// encode(decode(tags, from), to). `from` must be an IO scheme.
std::vector<std::string> convert(std::span<const std::string> tags, Scheme from, Scheme to);

// Split "B-NP" into ("B", "NP"); "O" and "." have an empty type.
std::pair<std::string, std::string> split_tag(const std::string& tag);

enum class MatchMode {
  kSameType,  // close pairs with the nearest open of equal type
  kAnyOpen,   // close pairs with the nearest open of any type; close type wins
  kAnyClose,  // open pairs with a close of any type; open type wins
};

std::string to_string(MatchMode mode);
MatchMode match_mode_from_string(const std::string& name);

// One optional bracket per token and side; the value is the phrase type
// ("" for untyped).
using BracketStream = std::vector<std::optional<std::string>>;

// Left-to-right stack matching; at a token the open mark is processed before
// the close mark. Unmatched marks are discarded. Output spans never cross
// but may nest.
std::vector<ChunkSpan> balance_brackets(const BracketStream& opens, const BracketStream& closes,
                                        MatchMode mode = MatchMode::kSameType);

// Keep only spans that contain no other span: the flat chunk reading of a
// balanced bracket structure.
std::vector<ChunkSpan> innermost_spans(std::span<const ChunkSpan> spans);

// Bracket streams from O and C tag sequences ("[", "[-NP", "(" ... / ".").
BracketStream open_marks(std::span<const std::string> tags);
BracketStream close_marks(std::span<const std::string> tags);

struct ClauseNode {
  size_t start = 0;
  size_t end = 0;
  std::vector<ClauseNode> children;

  bool operator==(const ClauseNode&) const = default;
};

// Clause repair rules:
//  1. one clause starts at each open position (duplicates collapse);
//  2. each close mark ends one clause (innermost open first), but
//  3. closes with no open clause are ignored, and
//  4. non-final closes that would end a clause opened at token 0 are ignored;
//  5. clauses still open at the end close at the penultimate token, or later
//     when that is needed to keep the structure properly nested.
std::vector<ClauseNode> balance_clauses(std::span<const size_t> opens,
                                        std::span<const size_t> closes,
                                        size_t sentence_length);

// Flattened (start, end) pairs of a forest in pre-order.
std::vector<std::pair<size_t, size_t>> flatten(std::span<const ClauseNode> forest);

// Forest built from properly nested spans; throws DomainError on crossing.
std::vector<ClauseNode> build_forest(std::vector<std::pair<size_t, size_t>> spans);

bool is_proper_nesting(std::span<const ChunkSpan> spans);

}  // namespace mbsp::repr

#endif  // MBSP_REPR_H_
