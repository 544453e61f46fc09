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

#ifndef MBSP_COMMON_H_
#define MBSP_COMMON_H_

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mbsp {

// Raised when an operation's input violates its contract (empty dataset,
// arity mismatch, out-of-range index, ...). The CLI maps it to exit code 1.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or missing model components.
class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

// File-level failures. The CLI maps it to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input; carries the offending line number.
class ParseError : public DomainError {
 public:
  ParseError(const std::string& what, size_t line)
      : DomainError(what + " (line " + std::to_string(line) + ")"), message_(what), line_(line) {}
  size_t line() const { return line_; }
  // The message without the line suffix, for rethrowing with more context.
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  size_t line_;
};

// Reserved feature value for positions outside the sentence.
inline constexpr std::string_view kPad = "_PAD_";

std::vector<std::string> split_whitespace(std::string_view line);
std::vector<std::string> split(std::string_view line, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string_view trim(std::string_view s);

// Backslash escaping for tab/newline/backslash so arbitrary symbols survive
// the line-oriented persistence formats.
std::string escape_symbol(std::string_view s);
std::string unescape_symbol(std::string_view s);

// Shortest round-trippable decimal form of a double.
std::string format_double(double v);
double parse_double(std::string_view s);

// Calls body(i) for i in [0, n) on up to `workers` threads (striped by
// index). The first exception thrown by any call is rethrown here.
void parallel_for(size_t n, size_t workers, const std::function<void(size_t)>& body);

}  // namespace mbsp

#endif  // MBSP_COMMON_H_
