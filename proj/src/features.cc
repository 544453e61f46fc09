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

#include "mbsp/features.h"

#include <algorithm>
#include <map>
#include <set>

#include "mbsp/common.h"

namespace mbsp::features {

namespace {

char channel_letter(Channel c) {
  switch (c) {
    case Channel::kWord: return 'w';
    case Channel::kPos: return 'p';
    case Channel::kChunk: return 'c';
  }
  return '?';
}

Channel channel_from_letter(char c) {
  switch (c) {
    case 'w': return Channel::kWord;
    case 'p': return Channel::kPos;
    case 'c': return Channel::kChunk;
  }
  throw DomainError(std::string("unknown feature channel '") + c + "'");
}

int parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) throw DomainError("missing offset in feature template");
  try {
    size_t pos = 0;
    int v = std::stoi(std::string(s), &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DomainError("bad offset '" + std::string(s) + "' in feature template");
  }
}

bool canonical_less(const FeatureTemplate& a, const FeatureTemplate& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a.features() < b.features();
}

}  // namespace

FeatureTemplate::FeatureTemplate(std::vector<Feature> features) : features_(std::move(features)) {
  for (const auto& f : features_) {
    if (f.offset < -kMaxOffset || f.offset > kMaxOffset) {
      throw DomainError("feature offset " + std::to_string(f.offset) + " outside [-" +
                        std::to_string(kMaxOffset) + "," + std::to_string(kMaxOffset) + "]");
    }
    if (f.channel == Channel::kChunk && f.offset == 0) {
      throw DomainError("the focus chunk tag cannot be a feature");
    }
  }
  std::sort(features_.begin(), features_.end());
  features_.erase(std::unique(features_.begin(), features_.end()), features_.end());
}

FeatureTemplate FeatureTemplate::parse(std::string_view text) {
  std::vector<Feature> out;
  for (const auto& group : split_whitespace(text)) {
    const auto open = group.find('[');
    if (open != 1 || group.back() != ']') {
      throw DomainError("malformed feature group '" + group + "'");
    }
    const Channel channel = channel_from_letter(group[0]);
    const std::string body = group.substr(2, group.size() - 3);
    if (trim(body).empty()) continue;
    for (const auto& item : split(body, ',')) {
      const auto range = item.find("..");
      if (range == std::string::npos) {
        out.push_back({channel, parse_int(item)});
        continue;
      }
      const int lo = parse_int(std::string_view(item).substr(0, range));
      const int hi = parse_int(std::string_view(item).substr(range + 2));
      if (lo > hi) throw DomainError("empty offset range '" + item + "'");
      for (int o = lo; o <= hi; ++o) {
        // Ranges may span the focus for words/POS; the chunk focus is skipped.
        if (channel == Channel::kChunk && o == 0) continue;
        out.push_back({channel, o});
      }
    }
  }
  return FeatureTemplate(std::move(out));
}

std::string FeatureTemplate::to_string() const {
  std::string out;
  for (Channel ch : {Channel::kWord, Channel::kPos, Channel::kChunk}) {
    std::vector<int> offsets;
    for (const auto& f : features_) {
      if (f.channel == ch) offsets.push_back(f.offset);
    }
    if (offsets.empty()) continue;
    std::vector<std::string> items;
    for (size_t i = 0; i < offsets.size();) {
      size_t j = i;
      while (j + 1 < offsets.size() && offsets[j + 1] == offsets[j] + 1) ++j;
      if (j - i >= 2) {
        items.push_back(std::to_string(offsets[i]) + ".." + std::to_string(offsets[j]));
      } else {
        for (size_t t = i; t <= j; ++t) items.push_back(std::to_string(offsets[t]));
      }
      i = j + 1;
    }
    if (!out.empty()) out += ' ';
    out += channel_letter(ch);
    out += '[' + join(items, ",") + ']';
  }
  return out;
}

FeatureTemplate FeatureTemplate::window(int words, int pos, int chunks) {
  std::vector<Feature> out;
  for (int o = -words; o <= words; ++o) out.push_back({Channel::kWord, o});
  for (int o = -pos; o <= pos; ++o) out.push_back({Channel::kPos, o});
  for (int o = -chunks; o <= chunks; ++o) {
    if (o != 0) out.push_back({Channel::kChunk, o});
  }
  return FeatureTemplate(std::move(out));
}

bool FeatureTemplate::contains(const Feature& f) const {
  return std::binary_search(features_.begin(), features_.end(), f);
}

bool FeatureTemplate::uses_chunks() const {
  return std::any_of(features_.begin(), features_.end(),
                     [](const Feature& f) { return f.channel == Channel::kChunk; });
}

FeatureTemplate FeatureTemplate::with(const Feature& f) const {
  auto copy = features_;
  copy.push_back(f);
  return FeatureTemplate(std::move(copy));
}

FeatureTemplate FeatureTemplate::without(const Feature& f) const {
  auto copy = features_;
  copy.erase(std::remove(copy.begin(), copy.end(), f), copy.end());
  return FeatureTemplate(std::move(copy));
}

std::vector<std::string> extract(std::span<const Token> sentence, size_t index,
                                 const FeatureTemplate& tmpl) {
  if (index >= sentence.size()) {
    throw DomainError("token index " + std::to_string(index) + " outside sentence of length " +
                      std::to_string(sentence.size()));
  }
  std::vector<std::string> out;
  out.reserve(tmpl.size());
  for (const auto& f : tmpl.features()) {
    const long pos = static_cast<long>(index) + f.offset;
    if (pos < 0 || pos >= static_cast<long>(sentence.size())) {
      out.emplace_back(kPad);
      continue;
    }
    const Token& t = sentence[static_cast<size_t>(pos)];
    switch (f.channel) {
      case Channel::kWord: out.push_back(t.word); break;
      case Channel::kPos: out.push_back(t.pos); break;
      case Channel::kChunk:
        if (!t.chunk) throw DomainError("template uses chunk tags but the sentence has none");
        out.push_back(*t.chunk);
        break;
    }
  }
  return out;
}

SelectionReport select_features(std::span<const Feature> candidates, const TemplateScorer& evaluate,
                                const SelectionOptions& options) {
  if (options.beam == 0) throw DomainError("beam width must be at least 1");
  std::vector<Feature> pool(candidates.begin(), candidates.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  SelectionReport report;
  report.beam_width = options.beam;
  std::map<FeatureTemplate, double> scores;
  std::set<FeatureTemplate> expanded;

  auto better = [](double sa, const FeatureTemplate& a, double sb, const FeatureTemplate& b) {
    if (sa != sb) return sa > sb;
    return canonical_less(a, b);
  };
  auto score_of = [&](const FeatureTemplate& t) {
    auto it = scores.find(t);
    if (it != scores.end()) return it->second;
    const double s = evaluate(t);
    ++report.evaluations;
    scores.emplace(t, s);
    if (better(s, t, report.best_score, report.best_set)) {
      report.best_set = t;
      report.best_score = s;
      report.score_history.push_back({t, s});
    }
    return s;
  };

  report.best_score = evaluate(FeatureTemplate{});
  ++report.evaluations;
  scores.emplace(FeatureTemplate{}, report.best_score);
  report.score_history.push_back({FeatureTemplate{}, report.best_score});

  for (;;) {
    std::vector<std::pair<double, FeatureTemplate>> ranked;
    ranked.reserve(scores.size());
    for (const auto& [t, s] : scores) ranked.emplace_back(s, t);
    const size_t width = std::min(options.beam, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<long>(width), ranked.end(),
                      [&](const auto& a, const auto& b) { return better(a.first, a.second, b.first, b.second); });
    std::vector<FeatureTemplate> frontier;
    for (size_t i = 0; i < width; ++i) {
      if (!expanded.count(ranked[i].second)) frontier.push_back(ranked[i].second);
    }
    if (frontier.empty()) break;
    ++report.sweeps;
    for (const auto& t : frontier) {
      expanded.insert(t);
      for (const auto& c : pool) {
        if (!t.contains(c)) score_of(t.with(c));
      }
      if (!options.bidirectional) continue;
      for (const auto& f : t.features()) score_of(t.without(f));
    }
  }
  return report;
}

namespace {

bool is_noun(const std::string& pos) { return pos.rfind("NN", 0) == 0 || pos == "NP"; }

}  // namespace

size_t np_head(std::span<const Token> chunk) {
  if (chunk.empty()) throw DomainError("empty chunk has no head");
  for (size_t i = 0; i < chunk.size(); ++i) {
    if (!is_noun(chunk[i].pos)) continue;
    while (i + 1 < chunk.size() && is_noun(chunk[i + 1].pos)) ++i;
    return i;
  }
  return chunk.size() - 1;
}

HeadRule head_rule(std::string_view name) {
  if (name == "default") {
    return [](std::span<const Token> chunk, const std::string& type) -> size_t {
      if (type == "NP" || type.empty()) return np_head(chunk);
      if (chunk.empty()) throw DomainError("empty chunk has no head");
      return chunk.size() - 1;
    };
  }
  if (name == "final") {
    return [](std::span<const Token> chunk, const std::string&) -> size_t {
      if (chunk.empty()) throw DomainError("empty chunk has no head");
      return chunk.size() - 1;
    };
  }
  throw ConfigError("unknown head rule '" + std::string(name) + "'");
}

CompressedSentence compress_tracked(const CompressedSentence& sentence,
                                    std::span<const repr::ChunkSpan> chunks, const HeadRule& rule) {
  const auto& tokens = sentence.tokens;
  repr::validate_spans(chunks, tokens.size());
  std::vector<const repr::ChunkSpan*> starting(tokens.size(), nullptr);
  for (const auto& c : chunks) starting[c.start] = &c;

  CompressedSentence out;
  for (size_t i = 0; i < tokens.size();) {
    const repr::ChunkSpan* c = starting[i];
    if (!c) {
      out.tokens.push_back(tokens[i]);
      out.origin.push_back(sentence.origin[i]);
      ++i;
      continue;
    }
    std::span<const Token> members(tokens.data() + c->start, c->end - c->start + 1);
    const size_t head = rule(members, c->type);
    if (head >= members.size()) throw DomainError("head rule returned an index outside the chunk");
    Token t = members[head];
    t.pos = c->type;
    t.chunk.reset();
    out.tokens.push_back(std::move(t));
    out.origin.emplace_back(sentence.origin[c->start].first, sentence.origin[c->end].second);
    i = c->end + 1;
  }
  return out;
}

CompressedSentence compress_tracked(std::span<const Token> sentence,
                                    std::span<const repr::ChunkSpan> chunks, const HeadRule& rule) {
  CompressedSentence identity;
  identity.tokens.assign(sentence.begin(), sentence.end());
  for (size_t i = 0; i < sentence.size(); ++i) identity.origin.emplace_back(i, i);
  return compress_tracked(identity, chunks, rule);
}

std::vector<Token> compress(std::span<const Token> sentence, std::span<const repr::ChunkSpan> chunks,
                            const HeadRule& rule) {
  return compress_tracked(sentence, chunks, rule).tokens;
}

}  // namespace mbsp::features
