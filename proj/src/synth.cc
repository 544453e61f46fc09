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

#include "mbsp/synth.h"

#include <map>
#include <random>
#include <string>

#include "mbsp/common.h"

namespace mbsp::synth {

namespace {

struct Entry {
  const char* word;
  const char* pos;
};

// Several words occur under more than one tag (plans NNS/VBZ, cut NN/VB/VBD,
// that DT/IN), which keeps the chunking tasks from being trivial.
const std::vector<Entry> kDeterminers = {{"the", "DT"}, {"a", "DT"}, {"this", "DT"}, {"that", "DT"},
                                         {"every", "DT"}, {"some", "DT"}, {"its", "PRP$"}};
const std::vector<Entry> kAdjectives = {{"big", "JJ"}, {"old", "JJ"}, {"new", "JJ"}, {"small", "JJ"},
                                        {"local", "JJ"}, {"final", "JJ"}, {"strong", "JJ"}, {"red", "JJ"},
                                        {"average", "JJ"}, {"key", "JJ"}};
const std::vector<Entry> kNouns = {{"cat", "NN"},    {"plan", "NN"},   {"market", "NN"}, {"report", "NN"},
                                   {"price", "NN"},  {"deal", "NN"},   {"rate", "NN"},   {"bank", "NN"},
                                   {"cut", "NN"},    {"change", "NN"}, {"cost", "NN"},   {"house", "NN"},
                                   {"average", "NN"}, {"share", "NN"}, {"record", "NN"}, {"firm", "NN"}};
const std::vector<Entry> kPlurals = {{"plans", "NNS"},  {"markets", "NNS"}, {"reports", "NNS"},
                                     {"prices", "NNS"}, {"deals", "NNS"},   {"rates", "NNS"},
                                     {"cuts", "NNS"},   {"changes", "NNS"}, {"costs", "NNS"},
                                     {"shares", "NNS"}, {"records", "NNS"}, {"firms", "NNS"}};
const std::vector<Entry> kProper = {{"Smith", "NNP"}, {"Jones", "NNP"}, {"Paris", "NNP"}, {"Acme", "NNP"},
                                    {"Boston", "NNP"}, {"Texas", "NNP"}, {"Mary", "NNP"}};
const std::vector<Entry> kPronouns = {{"he", "PRP"}, {"she", "PRP"}, {"it", "PRP"}, {"they", "PRP"},
                                      {"we", "PRP"}};
const std::vector<Entry> kNumbers = {{"two", "CD"}, {"three", "CD"}, {"10", "CD"}, {"366.50", "CD"},
                                     {"many", "JJ"}};
const std::vector<Entry> kPast = {{"saw", "VBD"},  {"sold", "VBD"},    {"bought", "VBD"}, {"made", "VBD"},
                                  {"cut", "VBD"},  {"reported", "VBD"}, {"changed", "VBD"},
                                  {"said", "VBD"}, {"raised", "VBD"}};
const std::vector<Entry> kPresent = {{"sees", "VBZ"},    {"sells", "VBZ"},   {"plans", "VBZ"},
                                     {"reports", "VBZ"}, {"changes", "VBZ"}, {"costs", "VBZ"},
                                     {"cuts", "VBZ"},    {"records", "VBZ"}, {"rates", "VBZ"}};
const std::vector<Entry> kBase = {{"see", "VB"},  {"sell", "VB"},   {"buy", "VB"},    {"cut", "VB"},
                                  {"make", "VB"}, {"change", "VB"}, {"report", "VB"}, {"cost", "VB"}};
const std::vector<Entry> kParticiples = {{"sold", "VBN"}, {"bought", "VBN"}, {"made", "VBN"},
                                         {"cut", "VBN"},  {"raised", "VBN"}, {"changed", "VBN"}};
const std::vector<Entry> kModals = {{"will", "MD"}, {"can", "MD"}, {"may", "MD"}, {"would", "MD"}};
const std::vector<Entry> kPrepositions = {{"in", "IN"},   {"on", "IN"},   {"with", "IN"}, {"near", "IN"},
                                          {"for", "IN"},  {"of", "IN"},   {"after", "IN"}, {"at", "IN"}};
const std::vector<Entry> kAdverbs = {{"very", "RB"}, {"quickly", "RB"}, {"also", "RB"}, {"not", "RB"},
                                     {"still", "RB"}};
const std::vector<Entry> kConjunctions = {{"and", "CC"}, {"but", "CC"}, {"or", "CC"}};
const std::vector<Entry> kComplementizers = {{"that", "IN"}, {"because", "IN"}, {"while", "IN"}};

// Plausible tagger confusions.
const std::map<std::string, std::vector<std::string>> kConfusions = {
    {"NN", {"JJ", "VB", "NNP"}}, {"NNS", {"VBZ"}},    {"VBZ", {"NNS"}},  {"VBD", {"VBN"}},
    {"VBN", {"VBD", "JJ"}},      {"JJ", {"NN", "RB"}}, {"IN", {"RB", "DT"}}, {"DT", {"IN"}},
    {"VB", {"NN", "VBP"}},       {"CD", {"JJ"}},       {"RB", {"IN", "JJ"}}};

class Builder {
 public:
  Builder(std::mt19937_64& rng, const GrammarOptions& opt) : rng_(rng), opt_(opt) {}

  io::TreeSentence take() { return std::move(tree_); }

  void sentence() {
    const size_t s = open("S");
    if (chance(opt_.clause_coordination)) {
      const size_t a = open("S");
      clause(0);
      close(a);
      word(pick(kConjunctions));
      const size_t b = open("S");
      clause(0);
      close(b);
    } else {
      clause(0);
    }
    word({".", "."});
    close(s);
  }

 private:
  bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }
  size_t below(size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng_); }
  const Entry& pick(const std::vector<Entry>& list) { return list[below(list.size())]; }

  size_t open(const char* label) {
    tree_.phrases.push_back({tree_.tokens.size(), tree_.tokens.size(), label});
    return tree_.phrases.size() - 1;
  }
  void close(size_t slot) { tree_.phrases[slot].end = tree_.tokens.size() - 1; }

  void word(const Entry& e) {
    std::string pos = e.pos;
    if (chance(opt_.pos_noise)) {
      auto it = kConfusions.find(pos);
      if (it != kConfusions.end()) pos = it->second[below(it->second.size())];
    }
    tree_.tokens.push_back({e.word, pos, std::nullopt});
  }

  void clause(size_t depth) {
    np(depth);
    vp(depth);
  }

  void np(size_t depth) {
    const bool room = depth < opt_.max_depth;
    const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    if (room && r < opt_.pp_attach) {
      const size_t n = open("NP");
      np_base();
      pp(depth + 1);
      close(n);
    } else if (room && r < opt_.pp_attach + opt_.coordination) {
      const size_t n = open("NP");
      np_base();
      word(pick(kConjunctions));
      np_base();
      close(n);
    } else {
      np_base();
    }
  }

  void np_base() {
    const size_t n = open("NP");
    const size_t kind = below(20);
    if (kind < 9) {
      if (!chance(0.15)) word(pick(kDeterminers));
      const size_t adjectives = below(3);
      for (size_t i = 0; i < adjectives; ++i) word(pick(kAdjectives));
      if (chance(0.25)) word(pick(kNouns));
      word(chance(0.5) ? pick(kNouns) : pick(kPlurals));
    } else if (kind < 12) {
      word(pick(kProper));
      if (chance(0.4)) word(pick(kProper));
    } else if (kind < 15) {
      word(pick(kPronouns));
    } else if (kind < 17) {
      word(pick(kNumbers));
      word(pick(kPlurals));
    } else {
      word(pick(kDeterminers));
      word(pick(kNouns));
    }
    close(n);
  }

  void pp(size_t depth) {
    const size_t p = open("PP");
    const size_t head = open("PP");
    word(pick(kPrepositions));
    close(head);
    np(depth);
    close(p);
  }

  void verb_group() {
    const size_t v = open("VP");
    switch (below(5)) {
      case 0:
        word(pick(kPast));
        break;
      case 1:
        word(pick(kModals));
        word(pick(kBase));
        break;
      case 2:
        word(pick(kPresent));
        break;
      case 3:
        word({"has", "VBZ"});
        word(pick(kParticiples));
        break;
      default:
        word(pick(kModals));
        word({"not", "RB"});
        word(pick(kBase));
        break;
    }
    close(v);
  }

  void vp(size_t depth) {
    const size_t v = open("VP");
    verb_group();
    const bool room = depth < opt_.max_depth;
    const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    if (room && r < opt_.embedding) {
      const size_t sbar = open("SBAR");
      const size_t comp = open("SBAR");
      word(pick(kComplementizers));
      close(comp);
      const size_t s = open("S");
      clause(depth + 1);
      close(s);
      close(sbar);
    } else if (r < 0.75) {
      np(depth);
      if (room && chance(0.3)) pp(depth + 1);
    } else if (r < 0.87) {
      const size_t a = open("ADJP");
      if (chance(0.5)) word(pick(kAdverbs));
      word(pick(kAdjectives));
      close(a);
    } else {
      const size_t a = open("ADVP");
      word(pick(kAdverbs));
      close(a);
    }
    close(v);
  }

  std::mt19937_64& rng_;
  const GrammarOptions& opt_;
  io::TreeSentence tree_;
};

io::Corpus chunk_corpus(const std::vector<io::TreeSentence>& trees, bool np_only, bool clauses) {
  std::vector<Sentence> sentences;
  std::vector<std::vector<std::string>> clause_col;
  for (const auto& t : trees) {
    auto base = io::base_phrases(t);
    if (np_only) std::erase_if(base, [](const repr::ChunkSpan& s) { return s.type != "NP"; });
    const auto tags = repr::encode(base, repr::Scheme::kIOB2, t.tokens.size());
    Sentence s = t.tokens;
    for (size_t i = 0; i < s.size(); ++i) s[i].chunk = tags[i];
    sentences.push_back(std::move(s));
    if (clauses) clause_col.push_back(io::clause_column(io::tree_clauses(t), t.tokens.size()));
  }
  if (clauses) return io::make_corpus(sentences, {clause_col}, {"word", "pos", "chunk", "clause"});
  return io::make_corpus(sentences, {}, {"word", "pos", "chunk"});
}

}  // namespace

std::vector<io::TreeSentence> generate_trees(size_t count, uint64_t seed, const GrammarOptions& options) {
  std::mt19937_64 rng(seed);
  std::vector<io::TreeSentence> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    Builder b(rng, options);
    b.sentence();
    out.push_back(b.take());
  }
  return out;
}

io::Corpus np_chunk_corpus(const std::vector<io::TreeSentence>& trees) {
  return chunk_corpus(trees, true, false);
}

io::Corpus typed_chunk_corpus(const std::vector<io::TreeSentence>& trees) {
  return chunk_corpus(trees, false, false);
}

io::Corpus clause_corpus(const std::vector<io::TreeSentence>& trees) { return chunk_corpus(trees, false, true); }

std::vector<std::vector<repr::ChunkSpan>> np_phrases(const std::vector<io::TreeSentence>& trees) {
  std::vector<std::vector<repr::ChunkSpan>> out;
  for (const auto& t : trees) out.push_back(io::phrases_labelled(t, {"NP"}));
  return out;
}

}  // namespace mbsp::synth
