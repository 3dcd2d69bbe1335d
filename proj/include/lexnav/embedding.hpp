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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lexnav/error.hpp"

namespace lexnav {

struct EmbeddingVector {
  std::string word;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

/// Immutable word -> vector map loaded from a flat text vector file.
///
/// Every entry has the same dimension. Lookups of unknown words throw
/// LookupError; there is no zero-vector fallback.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(std::string_view word) const {
    return index_.find(std::string(word)) != index_.end();
  }

  const EmbeddingVector& vector(std::string_view word) const {
    const auto it = index_.find(std::string(word));
    if (it == index_.end()) {
      throw LookupError("word not in embedding vocabulary: '" + std::string(word) + "'");
    }
    return entries_[it->second];
  }

  /// Entries in file order.
  std::span<const EmbeddingVector> entries() const { return entries_; }

  /// Copy with every vector multiplied by `factor`.
  EmbeddingStore scaled(double factor) const {
    EmbeddingStore out = *this;
    for (auto& e : out.entries_) {
      for (auto& v : e.values) v *= factor;
    }
    return out;
  }

 private:
  friend EmbeddingStore load_embeddings(std::istream&, std::optional<std::size_t>);

  std::size_t dimension_ = 0;
  std::vector<EmbeddingVector> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses `word v1 ... vd` lines. Blank lines and lines starting with `#`
/// are skipped. Errors name the 1-based line number.
inline EmbeddingStore load_embeddings(std::istream& source,
                                      std::optional<std::size_t> expected_dim = std::nullopt) {
  EmbeddingStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    const std::string_view trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto tokens = detail::split_ws(trimmed);
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (tokens.size() < 2) throw ParseError(where + "expected a word followed by values");

    EmbeddingVector entry{std::string(tokens[0]), {}};
    entry.values.reserve(tokens.size() - 1);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const auto v = detail::parse_double(tokens[i]);
      if (!v) throw ParseError(where + "non-numeric token '" + std::string(tokens[i]) + "'");
      if (!std::isfinite(*v)) throw ParseError(where + "non-finite value");
      entry.values.push_back(*v);
    }
    if (store.entries_.empty()) {
      store.dimension_ = entry.values.size();
    } else if (entry.values.size() != store.dimension_) {
      throw ParseError(where + "dimension " + std::to_string(entry.values.size()) +
                       " differs from " + std::to_string(store.dimension_));
    }
    if (store.index_.count(entry.word) != 0) {
      throw ParseError(where + "duplicate word '" + entry.word + "'");
    }
    store.index_.emplace(entry.word, store.entries_.size());
    store.entries_.push_back(std::move(entry));
  }
  if (store.entries_.empty()) throw ParseError("embedding file contains no vectors");
  if (expected_dim && *expected_dim != store.dimension_) {
    throw ParseError("expected dimension " + std::to_string(*expected_dim) + ", file has " +
                     std::to_string(store.dimension_));
  }
  return store;
}

/// Writes the store in the same text format; values use 17 significant
/// digits so a reload is bit-identical.
inline void save_embeddings(const EmbeddingStore& store, std::ostream& sink) {
  char buf[32];
  for (const auto& e : store.entries()) {
    sink << e.word;
    for (double v : e.values) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      sink << buf;
    }
    sink << '\n';
  }
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw UsageError("cosine: dimension mismatch " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine: zero-norm vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  return cosine(std::span<const double>(a.values), std::span<const double>(b.values));
}

struct SimilarityEntry {
  std::string word;
  double score;
};

struct SimilarityReport {
  std::string target;
  std::vector<SimilarityEntry> rankings;  // descending score, ties by word
};

inline SimilarityReport similarity_report(const EmbeddingStore& store, std::string_view target,
                                          std::span<const std::string> priors) {
  if (priors.empty()) throw ValidationError("prior set is empty");
  const auto& t = store.vector(target);
  SimilarityReport report{std::string(target), {}};
  std::vector<std::string> unique(priors.begin(), priors.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  for (const auto& w : unique) {
    if (w == target) throw ValidationError("target '" + w + "' is also listed as a prior");
    report.rankings.push_back({w, cosine(t, store.vector(w))});
  }
  std::stable_sort(report.rankings.begin(), report.rankings.end(),
                   [](const SimilarityEntry& a, const SimilarityEntry& b) {
                     return a.score > b.score;
                   });
  return report;
}

/// The prior whose vector has the highest cosine with the target. Ties go
/// to the lexicographically smallest word.
inline SimilarityEntry nearest_prior(const EmbeddingStore& store, std::string_view target,
                                     std::span<const std::string> priors) {
  return similarity_report(store, target, priors).rankings.front();
}

}  // namespace lexnav
