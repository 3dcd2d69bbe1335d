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

#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lexnav/error.hpp"
#include "lexnav/rng.hpp"

namespace lexnav {

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum class Action : int { North = 0, East = 1, South = 2, West = 3 };
inline constexpr int kNumActions = 4;

inline constexpr std::array<Action, kNumActions> kAllActions = {Action::North, Action::East,
                                                                Action::South, Action::West};

inline Cell moved(Cell c, Action a) {
  switch (a) {
    case Action::North: return {c.x, c.y - 1};
    case Action::East: return {c.x + 1, c.y};
    case Action::South: return {c.x, c.y + 1};
    case Action::West: return {c.x - 1, c.y};
  }
  return c;
}

inline const char* action_name(Action a) {
  static constexpr const char* names[] = {"North", "East", "South", "West"};
  return names[static_cast<int>(a)];
}

enum class TileKind : std::uint8_t { Wall, Floor, Object };

struct Tile {
  TileKind kind = TileKind::Wall;
  bool spawn = false;
  std::string object;  // word, when kind == Object
};

/// Glyph -> object word for the apartment legend.
inline const std::map<char, std::string>& object_legend() {
  static const std::map<char, std::string> legend = {
      {'S', "shower"}, {'B', "bathtub"}, {'T', "toilet"},   {'O', "stove"},    {'A', "toaster"},
      {'L', "table"},  {'M', "microwave"}, {'D', "bed"},    {'W', "wardrobe"}, {'N', "nightstand"},
  };
  return legend;
}

inline constexpr std::string_view kDefaultMap =
    "#########################\n"
    "#S.....#O......#D......W#\n"
    "#......#.......#........#\n"
    "#B.....#A..L..M#.......N#\n"
    "#......#.......#........#\n"
    "#T.....#.......#........#\n"
    "###.#####..######...#####\n"
    "#>>>>>>>>>>>>>>>>>>>>>>>#\n"
    "#>>>>>>>>>>>>>>>>>>>>>>>#\n"
    "#>>>>>>>>>>>>>>>>>>>>>>>#\n"
    "#########################\n";

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Static apartment layout. Built only through parse_map, which checks
/// every structural invariant, including reachability of each object's
/// success region from every spawn cell. Per-object shortest-path
/// distance fields are computed once at construction.
class ApartmentMap {
 public:
  int width() const { return width_; }
  int height() const { return height_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  const Tile& tile(Cell c) const { return tiles_[index(c)]; }
  bool passable(Cell c) const { return in_bounds(c) && tile(c).kind == TileKind::Floor; }

  const std::vector<Cell>& spawn_cells() const { return spawn_; }
  const std::vector<Cell>& passable_cells() const { return passable_; }

  /// Object words in row-major order of appearance.
  const std::vector<std::string>& objects() const { return object_order_; }
  bool has_object(std::string_view word) const {
    return objects_.find(std::string(word)) != objects_.end();
  }

  Cell object_cell(std::string_view word) const { return entry(word).cell; }

  /// Passable 4-neighbours of the object's cell.
  const std::vector<Cell>& success_cells(std::string_view word) const {
    return entry(word).success;
  }

  bool is_success(Cell c, std::string_view word) const {
    const auto& e = entry(word);
    return e.distance[index(c)] == 0;
  }

  /// Shortest 4-connected path length from `from` to the nearest success
  /// cell of `word`.
  int bfs_distance(Cell from, std::string_view word) const {
    if (!passable(from)) {
      throw UsageError("bfs_distance: cell (" + std::to_string(from.x) + "," +
                       std::to_string(from.y) + ") is not passable");
    }
    const int d = entry(word).distance[index(from)];
    if (d == kUnreachable) throw ValidationError("object '" + std::string(word) + "' unreachable");
    return d;
  }

  std::string to_text() const {
    std::string out;
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) out += glyphs_[index({x, y})];
      out += '\n';
    }
    return out;
  }

  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }

 private:
  friend ApartmentMap parse_map(std::string_view);

  struct ObjectEntry {
    Cell cell;
    std::vector<Cell> success;
    std::vector<int> distance;  // per cell, kUnreachable for walls/islands
  };

  const ObjectEntry& entry(std::string_view word) const {
    const auto it = objects_.find(std::string(word));
    if (it == objects_.end()) throw LookupError("unknown goal object '" + std::string(word) + "'");
    return it->second;
  }

  std::vector<int> distance_field(const std::vector<Cell>& sources) const {
    std::vector<int> dist(tiles_.size(), kUnreachable);
    std::deque<Cell> queue;
    for (const Cell s : sources) {
      dist[index(s)] = 0;
      queue.push_back(s);
    }
    while (!queue.empty()) {
      const Cell c = queue.front();
      queue.pop_front();
      for (const Action a : kAllActions) {
        const Cell n = moved(c, a);
        if (passable(n) && dist[index(n)] == kUnreachable) {
          dist[index(n)] = dist[index(c)] + 1;
          queue.push_back(n);
        }
      }
    }
    return dist;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Tile> tiles_;
  std::vector<char> glyphs_;
  std::vector<Cell> spawn_;
  std::vector<Cell> passable_;
  std::vector<std::string> object_order_;
  std::map<std::string, ObjectEntry> objects_;
};

/// Parses the ASCII apartment format: `#` wall, `.` floor, `>` spawn floor,
/// uppercase letters from object_legend().
inline ApartmentMap parse_map(std::string_view text) {
  std::vector<std::string> rows;
  {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      rows.push_back(line);
    }
    while (!rows.empty() && rows.back().empty()) rows.pop_back();
  }
  if (rows.empty()) throw ParseError("map is empty");
  const std::size_t width = rows.front().size();
  if (width == 0) throw ParseError("map row 1 is empty");
  for (std::size_t y = 0; y < rows.size(); ++y) {
    if (rows[y].size() != width) {
      throw ParseError("ragged map: row " + std::to_string(y + 1) + " has " +
                       std::to_string(rows[y].size()) + " columns, expected " +
                       std::to_string(width));
    }
  }

  ApartmentMap map;
  map.width_ = static_cast<int>(width);
  map.height_ = static_cast<int>(rows.size());
  map.tiles_.resize(width * rows.size());
  map.glyphs_.resize(width * rows.size());
  const auto& legend = object_legend();
  for (int y = 0; y < map.height_; ++y) {
    for (int x = 0; x < map.width_; ++x) {
      const char g = rows[y][x];
      const Cell c{x, y};
      Tile& t = map.tiles_[map.index(c)];
      map.glyphs_[map.index(c)] = g;
      const auto at = " at (" + std::to_string(x) + "," + std::to_string(y) + ")";
      if (g == '#') {
        t.kind = TileKind::Wall;
      } else if (g == '.' || g == '>') {
        t.kind = TileKind::Floor;
        t.spawn = g == '>';
      } else if (const auto it = legend.find(g); it != legend.end()) {
        if (map.objects_.count(it->second) != 0) {
          throw ParseError(std::string("duplicate object glyph '") + g + "'" + at);
        }
        t.kind = TileKind::Object;
        t.object = it->second;
        map.objects_[it->second].cell = c;
        map.object_order_.push_back(it->second);
      } else {
        throw ParseError(std::string("unknown glyph '") + g + "'" + at);
      }
      const bool border = x == 0 || y == 0 || x == map.width_ - 1 || y == map.height_ - 1;
      if (border && t.kind != TileKind::Wall) {
        throw ValidationError("border cell" + at + " is not a wall");
      }
    }
  }

  for (int y = 0; y < map.height_; ++y) {
    for (int x = 0; x < map.width_; ++x) {
      const Tile& t = map.tiles_[map.index({x, y})];
      if (t.kind == TileKind::Floor) map.passable_.push_back({x, y});
      if (t.spawn) map.spawn_.push_back({x, y});
    }
  }
  if (map.spawn_.empty()) throw ValidationError("map has no spawn cell");

  for (const auto& word : map.object_order_) {
    auto& e = map.objects_[word];
    for (const Action a : kAllActions) {
      const Cell n = moved(e.cell, a);
      if (map.passable(n)) e.success.push_back(n);
    }
    if (e.success.empty()) {
      throw ValidationError("unreachable object '" + word + "': no passable neighbour");
    }
    e.distance = map.distance_field(e.success);
    for (const Cell s : map.spawn_) {
      if (e.distance[map.index(s)] == kUnreachable) {
        throw ValidationError("unreachable object '" + word + "' from spawn (" +
                              std::to_string(s.x) + "," + std::to_string(s.y) + ")");
      }
    }
  }
  return map;
}

using FeatureVector = std::vector<double>;

/// one-hot(x, width) followed by one-hot(y, height).
inline FeatureVector encode_observation(const ApartmentMap& map, Cell position) {
  FeatureVector f(static_cast<std::size_t>(map.width() + map.height()), 0.0);
  f[static_cast<std::size_t>(position.x)] = 1.0;
  f[static_cast<std::size_t>(map.width() + position.y)] = 1.0;
  return f;
}

struct Observation {
  Cell position;
  FeatureVector features;
};

struct GridState {
  Cell position;
  std::string goal;
  int steps_taken = 0;
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  bool success = false;
  int distance_before = 0;
  int distance_after = 0;
};

struct RewardConfig {
  double distance_scale = 1.0;
  double slack = -0.01;
  double goal_bonus = 10.0;
  int max_steps = 500;
};

/// One episode-at-a-time navigation environment over a shared map.
class GridEnv {
 public:
  explicit GridEnv(std::shared_ptr<const ApartmentMap> map, RewardConfig reward = {})
      : map_(std::move(map)), reward_(reward) {
    if (!map_) throw UsageError("GridEnv: null map");
  }

  const ApartmentMap& map() const { return *map_; }
  const GridState& state() const { return state_; }
  const RewardConfig& reward_config() const { return reward_; }
  bool done() const { return done_; }

  /// Spawns uniformly over the map's spawn cells.
  Observation reset(std::string_view goal, Rng& rng) {
    if (!map_->has_object(goal)) throw LookupError("unknown goal object '" + std::string(goal) + "'");
    const auto& spawns = map_->spawn_cells();
    return reset_at(spawns[uniform_index(rng, spawns.size())], goal);
  }

  Observation reset_at(Cell start, std::string_view goal) {
    if (!map_->passable(start)) throw UsageError("reset_at: start cell is not passable");
    state_ = GridState{start, std::string(goal), 0};
    distance_ = map_->bfs_distance(start, goal);
    done_ = false;
    return observe();
  }

  StepOutcome step(Action action) {
    if (done_) throw UsageError("step called after the episode finished");
    StepOutcome out;
    out.distance_before = distance_;
    const Cell next = moved(state_.position, action);
    if (map_->passable(next)) state_.position = next;
    distance_ = map_->bfs_distance(state_.position, state_.goal);
    out.distance_after = distance_;
    ++state_.steps_taken;
    out.success = map_->is_success(state_.position, state_.goal);
    out.reward = reward_.distance_scale * (out.distance_before - out.distance_after) + reward_.slack;
    if (out.success) out.reward += reward_.goal_bonus;
    out.done = out.success || state_.steps_taken >= reward_.max_steps;
    done_ = out.done;
    out.observation = observe();
    return out;
  }

  Observation observe() const {
    return {state_.position, encode_observation(*map_, state_.position)};
  }

 private:
  std::shared_ptr<const ApartmentMap> map_;
  RewardConfig reward_;
  GridState state_;
  int distance_ = 0;
  bool done_ = true;
};

}  // namespace lexnav
