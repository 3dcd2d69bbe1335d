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
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lexnav/embedding.hpp"
#include "lexnav/error.hpp"

namespace lexnav::harness {

inline constexpr const char* kCsvHeader =
    "env_step,episodes,success_rate,mean_return,mean_ep_len,epsilon,frac_greedy,frac_prior,frac_random";

struct EpisodeRecord {
  long end_step = 0;  // env_step after the episode's last step
  int length = 0;
  double episode_return = 0.0;
  bool success = false;
};

struct MetricsRow {
  long env_step = 0;
  long episodes = 0;
  double success_rate = 0.0;
  double mean_return = 0.0;
  double mean_ep_len = 0.0;
  double epsilon = 0.0;
  double frac_greedy = 0.0;
  double frac_prior = 0.0;
  double frac_random = 0.0;
};

struct TrailingWindow {
  std::size_t count = 0;
  std::size_t successes = 0;
  double return_sum = 0.0;
  long length_sum = 0;
};

/// Statistics of the (up to) `window` episodes before index `last`.
inline TrailingWindow trailing(const std::vector<EpisodeRecord>& eps, std::size_t last, std::size_t window) {
  TrailingWindow w;
  const std::size_t first = last > window ? last - window : 0;
  for (std::size_t i = first; i < last; ++i) {
    ++w.count;
    w.successes += eps[i].success ? 1 : 0;
    w.return_sum += eps[i].episode_return;
    w.length_sum += eps[i].length;
  }
  return w;
}

/// A partial window never meets the criterion.
inline bool meets_criterion(const TrailingWindow& w, std::size_t window, double rate) {
  return w.count == window &&
         static_cast<double>(w.successes) >= rate * static_cast<double>(window) - 1e-9;
}

struct RunMetrics {
  std::vector<MetricsRow> rows;
  std::vector<EpisodeRecord> episodes;
  std::optional<long> steps_to_criterion;  // nullopt: budget exhausted
  long total_steps = 0;
  std::string prior_word;  // transfer runs only

  /// Re-scans the episode log for the first step at which the trailing
  /// success rate reaches `rate`.
  std::optional<long> criterion_step(double rate, std::size_t window) const {
    TrailingWindow w;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
      w.successes += episodes[i].success ? 1 : 0;
      ++w.count;
      if (w.count > window) {
        w.successes -= episodes[i - window].success ? 1 : 0;
        --w.count;
      }
      if (meets_criterion(w, window, rate)) return episodes[i].end_step;
    }
    return std::nullopt;
  }

  void write_csv(std::ostream& out) const {
    out << kCsvHeader << '\n';
    char buf[256];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%ld,%ld,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.env_step, r.episodes,
                    r.success_rate, r.mean_return, r.mean_ep_len, r.epsilon, r.frac_greedy, r.frac_prior,
                    r.frac_random);
      out << buf;
    }
  }

  std::string csv() const {
    std::ostringstream ss;
    write_csv(ss);
    return ss.str();
  }
};

inline std::vector<MetricsRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty metrics CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ParseError("unexpected metrics CSV header: '" + line + "'");
  std::vector<MetricsRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (lexnav::detail::trim(line).empty()) continue;
    std::vector<double> f;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto v = lexnav::detail::parse_double(lexnav::detail::trim(cell));
      if (!v) throw ParseError("metrics CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      f.push_back(*v);
    }
    if (f.size() != 9) throw ParseError("metrics CSV line " + std::to_string(line_no) + ": expected 9 columns");
    rows.push_back({static_cast<long>(f[0]), static_cast<long>(f[1]), f[2], f[3], f[4], f[5], f[6], f[7], f[8]});
  }
  return rows;
}

struct BandPoint {
  long env_step = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Per-step mean and min/max of success rate across runs. A run that
/// stopped early (criterion reached) holds its last value.
inline std::vector<BandPoint> aggregate_runs(const std::vector<std::vector<MetricsRow>>& runs) {
  if (runs.empty()) throw ValidationError("aggregate_runs: no runs");
  std::vector<long> steps;
  for (const auto& r : runs) {
    for (const auto& row : r) steps.push_back(row.env_step);
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

  std::vector<BandPoint> out;
  std::vector<std::size_t> cursor(runs.size(), 0);
  for (const long s : steps) {
    BandPoint p{s, 0.0, 1e300, -1e300};
    std::size_t n = 0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const auto& r = runs[k];
      while (cursor[k] + 1 < r.size() && r[cursor[k] + 1].env_step <= s) ++cursor[k];
      if (r.empty() || r[cursor[k]].env_step > s) continue;  // run has not logged yet
      const double v = r[cursor[k]].success_rate;
      p.mean += v;
      p.min = std::min(p.min, v);
      p.max = std::max(p.max, v);
      ++n;
    }
    if (n == 0) continue;
    p.mean /= static_cast<double>(n);
    out.push_back(p);
  }
  return out;
}

inline std::vector<BandPoint> aggregate_runs(const std::vector<RunMetrics>& runs) {
  std::vector<std::vector<MetricsRow>> rows;
  for (const auto& r : runs) rows.push_back(r.rows);
  return aggregate_runs(rows);
}

template <typename T>
T median(std::vector<T> v) {
  if (v.empty()) throw ValidationError("median of empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

}  // namespace lexnav::harness
