// Copyright 2026 The lexnav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace lexnav {

// Malformed input text (vector files, maps, configs, checkpoints).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A word or object that is not known to the store or map.
class LookupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structurally well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API misuse, e.g. stepping a finished episode or mismatched shapes.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace lexnav
