// Copyright 2026 The PerkwE Authors.
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

#ifndef PERKWE_ERRORS_HPP_
#define PERKWE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace perkwe {

// Invalid configuration values or unknown config keys. The only error class
// that aborts a dataset evaluation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dataset or request document that violates its JSON schema. The message
// carries the JSON path (e.g. "$.conversations[0].turns[1].question") or the
// byte offset of a syntax error.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Prompt budget too small to hold the instruction and the question.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a precondition (empty gold list, index out of range...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace perkwe

#endif  // PERKWE_ERRORS_HPP_
