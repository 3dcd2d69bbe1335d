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

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lexnav/lexnav.hpp"

namespace {

using namespace lexnav;
using namespace lexnav::harness;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

#ifndef LEXNAV_DATA_DIR
#define LEXNAV_DATA_DIR "data"
#endif

std::string default_embeddings() { return std::string(LEXNAV_DATA_DIR) + "/objects50d.vec"; }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

void print_run_summary(const RunMetrics& m) {
  std::cout << "env_steps " << m.total_steps << "\nepisodes " << m.episodes.size() << "\nsteps_to_criterion ";
  if (m.steps_to_criterion) {
    std::cout << *m.steps_to_criterion << '\n';
  } else {
    std::cout << "budget-exhausted\n";
  }
  if (!m.prior_word.empty()) std::cout << "prior " << m.prior_word << '\n';
}

std::shared_ptr<const EmbeddingStore> load_store(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open embeddings '" + path + "'");
  return std::make_shared<const EmbeddingStore>(load_embeddings(in));
}

std::string series_label(const std::filesystem::path& p) {
  std::string stem = p.stem().string();
  const auto pos = stem.rfind("_seed");
  if (pos != std::string::npos && pos + 5 < stem.size() &&
      stem.find_first_not_of("0123456789", pos + 5) == std::string::npos) {
    stem.erase(pos);
  }
  return stem;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lexnav: goal-conditional navigation agents with embedding-guided transfer"};
  app.require_subcommand(1);

  std::string config_path, out_path, policy_out, prior = "auto";
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto* train = app.add_subcommand("train", "Train an agent on the configured goal set");
  train->add_option("--config", config_path, "Run config (key = value)")->required()->check(CLI::ExistingFile);
  train->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { seed = s; seed_given = true; },
                                            "Seed (overrides the config)");
  train->add_option("--out", out_path, "Metrics CSV")->required();
  train->add_option("--save-policy", policy_out, "Write the trained policy checkpoint here");

  auto* transfer = app.add_subcommand("transfer", "Train on a new goal, biasing exploration with a prior policy");
  transfer->add_option("--config", config_path, "Run config (key = value)")->required()->check(CLI::ExistingFile);
  transfer->add_option("--prior", prior, "Prior goal word, 'auto' (embedding nearest) or 'none'");
  transfer->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { seed = s; seed_given = true; },
                                               "Seed (overrides the config)");
  transfer->add_option("--out", out_path, "Metrics CSV")->required();
  transfer->add_option("--save-policy", policy_out, "Write the trained policy checkpoint here");

  std::string policy_path, goals_list, map_path, embeddings_path = default_embeddings();
  int episodes = 200;
  auto* eval = app.add_subcommand("eval", "Greedy evaluation of a saved policy");
  eval->add_option("--policy", policy_path, "Policy checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--goals", goals_list, "Comma-separated goal words")->required();
  eval->add_option("--map", map_path, "Map file (default: built-in apartment)");
  eval->add_option("--embeddings", embeddings_path, "Vector file for embedding-mode policies");
  eval->add_option("--episodes", episodes, "Number of episodes");
  eval->add_option("--seed", seed, "Evaluation seed");

  std::string target, priors_list, csv_path;
  auto* similarity = app.add_subcommand("similarity", "Rank prior goals by cosine similarity to a target");
  similarity->add_option("--target", target, "Target word")->required();
  similarity->add_option("--priors", priors_list, "Comma-separated prior words")->required();
  similarity->add_option("--embeddings", embeddings_path, "Vector file");
  similarity->add_option("--csv", csv_path, "Also write word,score CSV here");

  auto* render = app.add_subcommand("render-map", "Validate and print a map with object coordinates");
  render->add_option("--map", map_path, "Map file (default: built-in apartment)");

  std::vector<std::string> inputs, labels;
  std::string title = "success rate";
  auto* plot = app.add_subcommand("plot", "Render metrics CSVs as an SVG learning-curve plot");
  plot->add_option("--inputs", inputs, "Metrics CSVs; files named <label>_seed<N>.csv are grouped")
      ->required()
      ->check(CLI::ExistingFile);
  plot->add_option("--labels", labels, "Series label per input (overrides file names)");
  plot->add_option("--out", out_path, "SVG output")->required();
  plot->add_option("--title", title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*train || *transfer) {
      RunConfig config = load_config(config_path);
      if (seed_given) config.seed = seed;
      if (*transfer) config.transfer.prior = prior;
      const Resources res = load_resources(config);
      const RunResult result = *train ? run_training(config, res) : run_transfer(config, res);
      write_file(out_path, result.metrics.csv());
      if (!policy_out.empty()) {
        std::ofstream out(policy_out);
        if (!out) throw std::runtime_error("cannot write '" + policy_out + "'");
        save_policy(result.agent, out);
      }
      print_run_summary(result.metrics);
    } else if (*eval) {
      auto map = std::make_shared<const ApartmentMap>(
          parse_map(map_path.empty() ? std::string(kDefaultMap) : read_text_file(map_path)));
      std::ifstream in(policy_path);
      std::shared_ptr<const EmbeddingStore> store;
      if (std::filesystem::exists(embeddings_path)) store = load_store(embeddings_path);
      const Agent agent = load_policy(in, store);
      const auto goals = harness::detail::split_list(goals_list);
      for (const auto& g : goals) {
        if (!map->has_object(g)) throw ValidationError("goal '" + g + "' is not an object on the map");
      }
      const auto e = evaluate(agent, map, goals, episodes, seed);
      std::cout << std::fixed << std::setprecision(4) << "success_rate " << e.success_rate << "\nmean_length "
                << e.mean_length << '\n';
    } else if (*similarity) {
      const auto store = load_store(embeddings_path);
      const auto priors = harness::detail::split_list(priors_list);
      const auto report = similarity_report(*store, target, priors);
      std::size_t width = 4;
      for (const auto& r : report.rankings) width = std::max(width, r.word.size());
      std::cout << "target: " << report.target << '\n';
      std::cout << std::left << std::setw(static_cast<int>(width)) << "word" << "  score\n";
      for (const auto& r : report.rankings) {
        std::cout << std::left << std::setw(static_cast<int>(width)) << r.word << "  " << std::fixed
                  << std::setprecision(6) << std::showpos << r.score << std::noshowpos << '\n';
      }
      if (!csv_path.empty()) {
        std::ostringstream csv;
        csv << "word,score\n";
        for (const auto& r : report.rankings) csv << r.word << ',' << std::setprecision(17) << r.score << '\n';
        write_file(csv_path, csv.str());
      }
    } else if (*render) {
      const ApartmentMap map = parse_map(map_path.empty() ? std::string(kDefaultMap) : read_text_file(map_path));
      std::cout << map.to_text() << '\n'
                << map.width() << "x" << map.height() << ", " << map.spawn_cells().size() << " spawn cells\n";
      for (const auto& w : map.objects()) {
        const Cell c = map.object_cell(w);
        std::cout << std::left << std::setw(11) << w << " (" << c.x << "," << c.y << ")  success cells "
                  << map.success_cells(w).size() << '\n';
      }
    } else if (*plot) {
      if (!labels.empty() && labels.size() != inputs.size()) {
        throw ValidationError("--labels needs one label per input");
      }
      std::map<std::string, std::vector<std::vector<MetricsRow>>> groups;
      std::vector<std::string> order;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        const std::string label = labels.empty() ? series_label(inputs[i]) : labels[i];
        std::ifstream in(inputs[i]);
        if (!groups.count(label)) order.push_back(label);
        groups[label].push_back(read_csv(in));
      }
      std::vector<PlotSeries> series;
      for (const auto& label : order) {
        std::vector<std::vector<MetricsRow>> runs;
        for (auto& r : groups[label]) {
          if (!r.empty()) runs.push_back(r);
        }
        if (runs.empty()) throw ValidationError("series '" + label + "' has no rows");
        series.push_back({label, aggregate_runs(runs)});
      }
      write_file(out_path, plot_svg(series, title));
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const LookupError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
