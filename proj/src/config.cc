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

#include "mbsp/config.h"

#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

#include "mbsp/common.h"

namespace mbsp::config {

namespace {

size_t to_size(const std::string& key, const std::string& v) {
  size_t pos = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty() || v.front() == '-') {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return static_cast<size_t>(x);
}

size_t to_k(const std::string& key, const std::string& v) {
  const size_t k = to_size(key, v);
  if (k == 0) throw ConfigError("'" + key + "' must be at least 1");
  return k;
}

int to_int(const std::string& key, const std::string& v) {
  const size_t x = to_size(key, v);
  if (x > 1000) throw ConfigError("'" + key + "' is out of range");
  return static_cast<int>(x);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

const std::vector<repr::Scheme> kSchemes = {repr::Scheme::kIOB1, repr::Scheme::kIOB2, repr::Scheme::kIOE1,
                                            repr::Scheme::kIOE2, repr::Scheme::kOpen, repr::Scheme::kClose};

using Setter = std::function<void(Settings&, const std::string& key, const std::string& value)>;

std::map<std::string, Setter> setters() {
  std::map<std::string, Setter> m;
  auto& p = m;
  p["learner.tie_policy"] = [](Settings& s, const std::string&, const std::string& v) {
    const auto t = mbl::tie_policy_from_string(v);
    for (auto* lc : {&s.pipeline.chunk_learner, &s.pipeline.type_learner, &s.pipeline.clause_learner,
                     &s.pipeline.level_learner, &s.xor_learner}) {
      lc->tie_policy = t;
    }
  };
  p["learner.fallback"] = [](Settings& s, const std::string& k, const std::string& v) {
    const bool b = to_bool(k, v);
    for (auto* lc : {&s.pipeline.chunk_learner, &s.pipeline.type_learner, &s.pipeline.clause_learner,
                     &s.pipeline.level_learner}) {
      lc->degenerate_weight_fallback = b;
    }
  };
  p["chunk.k"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.pipeline.chunk_learner.k = to_k(k, v);
  };
  p["chunk.representations"] = [](Settings& s, const std::string&, const std::string& v) {
    s.pipeline.representations.clear();
    for (const auto& name : split_whitespace(v)) {
      s.pipeline.representations.push_back(pipeline::representation_from_string(name));
    }
  };
  p["chunk.second_pass"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.pipeline.second_pass = to_bool(k, v);
  };
  p["chunk.combiner"] = [](Settings& s, const std::string&, const std::string& v) {
    s.pipeline.combiner = combine::method_from_string(v);
  };
  p["chunk.match_mode"] = [](Settings& s, const std::string&, const std::string& v) {
    s.pipeline.match_mode = repr::match_mode_from_string(v);
  };
  for (auto scheme : kSchemes) {
    const std::string name = repr::to_string(scheme);
    p["chunk.pass1." + name] = [scheme](Settings& s, const std::string&, const std::string& v) {
      s.pipeline.pass1[scheme] = features::FeatureTemplate::parse(v);
    };
    p["chunk.pass2." + name] = [scheme](Settings& s, const std::string&, const std::string& v) {
      s.pipeline.pass2[scheme] = features::FeatureTemplate::parse(v);
    };
  }
  p["types.strategy"] = [](Settings& s, const std::string&, const std::string& v) {
    s.pipeline.type_strategy = pipeline::type_strategy_from_string(v);
  };
  p["types.k"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.pipeline.type_learner.k = to_k(k, v);
  };
  p["types.list"] = [](Settings& s, const std::string&, const std::string& v) {
    s.pipeline.chunk_types = split_whitespace(v);
  };
  p["clauses.k"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.pipeline.clause_learner.k = to_k(k, v);
  };
  p["clauses.open_context"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.pipeline.clause_open_context = to_int(k, v);
  };
  p["clauses.close_context"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.pipeline.clause_close_context = to_int(k, v);
  };
  p["parse.k"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.pipeline.level_learner.k = to_k(k, v);
  };
  p["parse.context"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.pipeline.level_context = to_int(k, v);
  };
  p["parse.max_levels"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.pipeline.max_parse_levels = to_size(k, v);
  };
  p["parse.np_levels"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.pipeline.np_parse_levels = to_size(k, v);
  };
  p["parse.head_rule"] = [](Settings& s, const std::string&, const std::string& v) {
    features::head_rule(v);
    s.pipeline.head_rule = v;
  };
  p["eval.beta"] = [](Settings& s, const std::string& k, const std::string& v) { s.eval.beta = to_double(k, v); };
  p["eval.samples"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.eval.bootstrap_samples = to_size(k, v);
  };
  p["eval.tail"] = [](Settings& s, const std::string& k, const std::string& v) { s.eval.tail = to_double(k, v); };
  p["select.beam"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.selection.beam = to_size(k, v);
    if (s.selection.beam == 0) throw ConfigError("'select.beam' must be positive");
  };
  p["select.bidirectional"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.selection.bidirectional = to_bool(k, v);
  };
  p["select.folds"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.selection_folds = to_size(k, v);
    if (s.selection_folds < 2) throw ConfigError("'select.folds' must be at least 2");
  };
  p["cv.mode"] = [](Settings& s, const std::string&, const std::string& v) {
    s.leak_mode = pipeline::leak_mode_from_string(v);
  };
  p["cv.sections"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.cv_sections = to_size(k, v);
  };
  p["xor.k"] = [](Settings& s, const std::string& k, const std::string& v) { s.xor_learner.k = to_k(k, v); };
  p["run.seed"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.seed = to_size(k, v);
    s.eval.seed = s.seed;
  };
  p["run.workers"] = [](Settings& s, const std::string& k, const std::string& v) {
    s.workers = std::max<size_t>(1, to_size(k, v));
    s.pipeline.workers = s.workers;
    s.eval.workers = s.workers;
  };
  return m;
}

}  // namespace

KeyValues parse(std::istream& in) {
  KeyValues out;
  std::string line, section;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) throw ParseError("malformed section header", line_no);
      section = std::string(trim(t.substr(1, t.size() - 2)));
      if (section.find_first_of(" \t=") != std::string::npos) throw ParseError("malformed section name", line_no);
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key(trim(t.substr(0, eq)));
    const std::string value(trim(t.substr(eq + 1)));
    if (key.empty()) throw ParseError("empty key", line_no);
    const std::string full = section.empty() ? key : section + "." + key;
    if (!out.emplace(full, value).second) throw ParseError("key '" + full + "' given twice", line_no);
  }
  return out;
}

KeyValues parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.message(), e.line());
  }
}

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
  const size_t eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + text + "' is not key=value");
  return {std::string(trim(std::string_view(text).substr(0, eq))),
          std::string(trim(std::string_view(text).substr(eq + 1)))};
}

void apply(const KeyValues& values, Settings& settings) {
  const auto table = setters();
  std::vector<std::string> unknown;
  for (const auto& [k, v] : values) {
    if (!table.count(k)) unknown.push_back(k);
  }
  if (!unknown.empty()) throw ConfigError("unknown configuration keys: " + join(unknown, ", "));
  for (const auto& [k, v] : values) table.at(k)(settings, k, v);
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& [k, v] : setters()) out.push_back(k);
  return out;
}

std::string render(const Settings& s) {
  std::ostringstream out;
  const auto& p = s.pipeline;
  out << "[learner]\n"
      << "tie_policy = " << mbl::to_string(p.chunk_learner.tie_policy) << '\n'
      << "fallback = " << (p.chunk_learner.degenerate_weight_fallback ? "true" : "false") << "\n\n";
  out << "[chunk]\n";
  std::vector<std::string> reps;
  for (auto r : p.representations) reps.push_back(pipeline::to_string(r));
  out << "representations = " << join(reps, " ") << '\n'
      << "k = " << p.chunk_learner.k << '\n'
      << "second_pass = " << (p.second_pass ? "true" : "false") << '\n'
      << "combiner = " << combine::to_string(p.combiner) << '\n'
      << "match_mode = " << repr::to_string(p.match_mode) << '\n';
  for (const auto& [scheme, t] : p.pass1) out << "pass1." << repr::to_string(scheme) << " = " << t.to_string() << '\n';
  for (const auto& [scheme, t] : p.pass2) out << "pass2." << repr::to_string(scheme) << " = " << t.to_string() << '\n';
  out << "\n[types]\n"
      << "strategy = " << pipeline::to_string(p.type_strategy) << '\n'
      << "k = " << p.type_learner.k << '\n';
  if (!p.chunk_types.empty()) out << "list = " << join(p.chunk_types, " ") << '\n';
  out << "\n[clauses]\n"
      << "k = " << p.clause_learner.k << '\n'
      << "open_context = " << p.clause_open_context << '\n'
      << "close_context = " << p.clause_close_context << '\n';
  out << "\n[parse]\n"
      << "k = " << p.level_learner.k << '\n'
      << "context = " << p.level_context << '\n'
      << "max_levels = " << p.max_parse_levels << '\n'
      << "np_levels = " << p.np_parse_levels << '\n'
      << "head_rule = " << p.head_rule << '\n';
  out << "\n[eval]\n"
      << "beta = " << format_double(s.eval.beta) << '\n'
      << "samples = " << s.eval.bootstrap_samples << '\n'
      << "tail = " << format_double(s.eval.tail) << '\n';
  out << "\n[select]\n"
      << "beam = " << s.selection.beam << '\n'
      << "bidirectional = " << (s.selection.bidirectional ? "true" : "false") << '\n'
      << "folds = " << s.selection_folds << '\n';
  out << "\n[cv]\n"
      << "mode = " << pipeline::to_string(s.leak_mode) << '\n'
      << "sections = " << s.cv_sections << '\n';
  out << "\n[xor]\n"
      << "k = " << s.xor_learner.k << '\n';
  out << "\n[run]\n"
      << "seed = " << s.seed << '\n'
      << "workers = " << s.workers << '\n';
  return out.str();
}

}  // namespace mbsp::config
