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

#ifndef MBSP_CONFIG_H_
#define MBSP_CONFIG_H_

// Flat key-value configuration with one section per pipeline stage:
//
//   [chunk]
//   representations = IOB1 IOE2 O+C
//   k = 3
//   pass1.IOB1 = w[-4..0] p[-2..3]
//
// Keys are addressed as "section.key". Unknown keys are an error.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mbsp/eval.h"
#include "mbsp/features.h"
#include "mbsp/pipeline.h"

namespace mbsp::config {

using KeyValues = std::map<std::string, std::string>;

// Comments start with '#' or ';'. Throws ParseError on malformed lines or a
// key given twice.
KeyValues parse(std::istream& in);
KeyValues parse_file(const std::string& path);

// "section.key=value" (command-line override form).
std::pair<std::string, std::string> parse_assignment(const std::string& text);

struct Settings {
  pipeline::PipelineConfig pipeline;
  eval::EvalConfig eval;
  features::SelectionOptions selection;
  size_t selection_folds = 5;
  pipeline::LeakMode leak_mode = pipeline::LeakMode::kNestedCv;
  size_t cv_sections = 10;
  uint64_t seed = 0;
  size_t workers = 1;
  mbl::LearnerConfig xor_learner{3, mbl::TiePolicy::kGlobalClassFrequency, true};
};

// Applies every key to `settings`; unknown keys raise one ConfigError that
// lists all of them.
void apply(const KeyValues& values, Settings& settings);

// Every key `apply` understands (pass-template keys listed per scheme).
std::vector<std::string> known_keys();

// Settings in file form; parse(render(s)) applied to defaults gives s back.
std::string render(const Settings& settings);

}  // namespace mbsp::config

#endif  // MBSP_CONFIG_H_
