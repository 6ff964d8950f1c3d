// Creation-date estimator: HTTP service, one-shot and batch lookups, and a
// synthetic world generator for offline runs.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "carbondate/error.hpp"
#include "carbondate/service.hpp"
#include "carbondate/world.hpp"

using namespace carbondate;

namespace {

struct Flags {
  std::string listen;
  std::string sources;
  long long timeout_ms = 0;
  long long parallelism = 0;
  std::string replay;
  std::string record;
  std::string now;
  std::string format;
  bool cache = false;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--listen", f.listen, "host:port to serve on");
  app->add_option("--sources", f.sources, "comma-separated methods to enable");
  app->add_option("--timeout-ms", f.timeout_ms, "per-request upstream timeout");
  app->add_option("--parallelism", f.parallelism, "sources queried at once per URI");
  auto* replay = app->add_option("--replay", f.replay, "answer upstream requests from this cassette");
  auto* record = app->add_option("--record", f.record, "query live upstreams and record into this cassette");
  replay->excludes(record);
  app->add_option("--now", f.now, "clock override, YYYY-MM-DDTHH:MM:SSZ");
  app->add_option("--format", f.format, "report keys")->check(CLI::IsMember({"legacy", "generic"}));
  app->add_flag("--cache", f.cache, "memoize responses per URI");
}

// CARBONDATE_CONFIG first, then flags on top.
ServiceConfig build_config(const Flags& f) {
  ServiceConfig c = ServiceConfig::from_environment();
  if (!f.listen.empty()) c.listen = f.listen;
  if (!f.sources.empty()) c.enabled = parse_method_list(f.sources);
  if (f.timeout_ms) c.timeout = std::chrono::milliseconds{f.timeout_ms};
  if (f.parallelism) {
    if (f.parallelism < 1) throw ConfigError("parallelism must be at least 1");
    c.parallelism = static_cast<std::size_t>(f.parallelism);
  }
  if (!f.replay.empty()) {
    c.mode = TransportMode::replay;
    c.cassette = f.replay;
  }
  if (!f.record.empty()) {
    c.mode = TransportMode::record;
    c.cassette = f.record;
  }
  if (!f.now.empty()) c.now = parse_iso_timestamp(f.now);
  if (!f.format.empty()) c.style = parse_report_style(f.format);
  if (f.cache) c.cache = true;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimate when a web resource was created"};
  app.require_subcommand(1);

  Flags flags;

  auto* serve = app.add_subcommand("serve", "serve GET /cd/{uri} and GET /healthz");
  add_common(serve, flags);

  std::vector<std::string> uris;
  auto* estimate = app.add_subcommand("estimate", "print the report for each URI");
  add_common(estimate, flags);
  estimate->add_option("uri", uris, "target URIs")->required();

  std::string batch_in = "-", batch_out = "-";
  auto* batch = app.add_subcommand("batch", "one URI per input line, one JSON report per output line");
  add_common(batch, flags);
  batch->add_option("input", batch_in, "URI list, - for stdin");
  batch->add_option("-o,--output", batch_out, "JSON-lines output, - for stdout");

  std::uint64_t seed = 1;
  std::size_t count = 200;
  std::string lags_path, cassette_out, world_out, uris_out;
  bool zero_lag = false;
  auto* gen = app.add_subcommand("generate-world", "write a synthetic cassette and its ground truth");
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("-n,--count", count, "number of resources");
  gen->add_option("--lags", lags_path, "lag model JSON")->check(CLI::ExistingFile);
  gen->add_flag("--zero-lag", zero_lag, "every source present with zero lag");
  gen->add_option("--cassette", cassette_out, "cassette output path")->required();
  gen->add_option("--world", world_out, "world descriptor output path")->required();
  gen->add_option("--uris", uris_out, "also write the resource URIs, one per line");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      LagModel model = zero_lag ? LagModel::zero_lag() : LagModel::defaults();
      if (!lags_path.empty()) {
        std::ifstream in(lags_path);
        model = lag_model_from_json(nlohmann::json::parse(in));
      }
      ServiceConfig c = ServiceConfig::from_environment();
      auto generated = generate_world(seed, count, model, c.endpoints);
      generated.cassette.save(cassette_out);
      std::ofstream(world_out) << to_json(generated.world).dump(2) << '\n';
      if (!uris_out.empty()) {
        std::ofstream out(uris_out);
        for (const auto& r : generated.world.resources) out << r.uri.str() << '\n';
      }
      std::cerr << "wrote " << generated.world.resources.size() << " resources, " << generated.cassette.size()
                << " interactions\n";
      return 0;
    }

    Estimator estimator(build_config(flags));

    if (*serve) {
      auto [host, port] = parse_listen_address(estimator.config().listen);
      Server server(estimator);
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!server.listen(host, port)) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return 1;
      }
      return 0;
    }

    if (*estimate) {
      int rc = 0;
      for (const auto& u : uris) {
        auto resp = estimator.handle_estimate(u);
        std::cout << resp.body << '\n';
        if (resp.status != 200) rc = 2;
      }
      return rc;
    }

    if (*batch) {
      std::ifstream file;
      std::istream* in = &std::cin;
      if (batch_in != "-") {
        file.open(batch_in);
        if (!file) {
          std::cerr << "cannot read " << batch_in << "\n";
          return 1;
        }
        in = &file;
      }
      std::ofstream outfile;
      std::ostream* out = &std::cout;
      if (batch_out != "-") {
        outfile.open(batch_out);
        if (!outfile) {
          std::cerr << "cannot write " << batch_out << "\n";
          return 1;
        }
        out = &outfile;
      }
      estimator.run_batch(*in, *out);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
