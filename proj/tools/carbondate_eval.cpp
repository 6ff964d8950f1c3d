// Scores the estimator against known creation dates: a gold CSV replayed
// from a cassette, or a synthetic world descriptor.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "carbondate/error.hpp"
#include "carbondate/eval.hpp"
#include "carbondate/service.hpp"
#include "carbondate/world.hpp"

using namespace carbondate;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Evaluate creation-date estimates"};

  std::string gold_path, world_path, replay_path, out_dir = "eval-out", now, sources, axis_name = "normalized";
  std::vector<std::string> ablate_names;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::size_t parallelism = 1;

  auto* gold_opt = app.add_option("--gold", gold_path, "CSV uri,real_date,category")->check(CLI::ExistingFile);
  auto* world_opt = app.add_option("--world", world_path, "world descriptor JSON")->check(CLI::ExistingFile);
  gold_opt->excludes(world_opt);
  app.add_option("--replay", replay_path, "cassette answering upstream requests")->check(CLI::ExistingFile);
  app.add_option("--ablate", ablate_names, "method to ablate (repeatable; default all)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--now", now, "clock override, YYYY-MM-DDTHH:MM:SSZ");
  app.add_option("--sources", sources, "comma-separated methods to enable");
  app.add_option("--axis", axis_name, "AUC x-axis")->check(CLI::IsMember({"normalized", "raw"}));
  app.add_option("--workers", workers, "records evaluated at once");
  app.add_option("--parallelism", parallelism, "sources queried at once per record");

  CLI11_PARSE(app, argc, argv);

  if (gold_path.empty() == world_path.empty()) {
    std::cerr << "exactly one of --gold or --world is required\n";
    return 1;
  }
  if (!gold_path.empty() && replay_path.empty()) {
    std::cerr << "--gold needs --replay\n";
    return 1;
  }

  try {
    ServiceConfig config = ServiceConfig::from_environment();
    config.parallelism = std::max<std::size_t>(parallelism, 1);
    if (!sources.empty()) config.enabled = parse_method_list(sources);
    if (!now.empty()) config.now = parse_iso_timestamp(now);
    std::vector<Method> ablations;
    for (const auto& n : ablate_names) ablations.push_back(parse_method(n));

    std::vector<GoldRecord> gold;
    std::unique_ptr<Estimator> estimator;
    if (!world_path.empty()) {
      std::ifstream in(world_path);
      auto world = world_from_json(nlohmann::json::parse(in));
      gold = gold_from_world(world);
      std::shared_ptr<const Cassette> cassette;
      if (!replay_path.empty()) {
        cassette = std::make_shared<const Cassette>(Cassette::load(replay_path));
      } else {
        // The generator is deterministic, so the descriptor alone rebuilds its cassette.
        cassette = std::make_shared<const Cassette>(
            generate_world(world.seed, world.resources.size(), world.model, config.endpoints).cassette);
      }
      auto clock = fixed_clock(config.now ? *config.now : cassette->recorded_at());
      estimator = std::make_unique<Estimator>(config, std::make_shared<ReplayTransport>(cassette), clock);
    } else {
      config.mode = TransportMode::replay;
      config.cassette = replay_path;
      estimator = std::make_unique<Estimator>(config);
      gold = load_gold(gold_path, PlausibilityWindow::ending_at(estimator->now()));
    }

    auto records = evaluate_corpus(*estimator, gold, workers);
    auto axis = axis_name == "raw" ? AucAxis::raw_index : AucAxis::normalized;
    auto summary = summarize(records, ablations, axis);

    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / "summary.json") << to_json(summary).dump(2) << '\n';
    {
      std::ofstream out(fs::path(out_dir) / "records.jsonl");
      for (const auto& r : records) out << to_json(r).dump() << '\n';
    }
    {
      std::ofstream out(fs::path(out_dir) / "deltas.csv");
      out << "index,x,best_delta\n";
      auto deltas = sorted_best_deltas(records);
      for (std::size_t i = 0; i < deltas.size(); ++i) {
        double x = deltas.size() > 1 ? static_cast<double>(i) / static_cast<double>(deltas.size() - 1) : 0.0;
        out << i << ',' << x << ',' << deltas[i] << '\n';
      }
    }

    std::cout << "n=" << summary.n << " estimated=" << summary.estimated_count << " exact=" << summary.exact_count;
    if (summary.auc_full) std::cout << " auc=" << *summary.auc_full;
    std::cout << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
