#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "carbondate/cassette.hpp"
#include "carbondate/evidence.hpp"
#include "carbondate/sources.hpp"
#include "carbondate/uri.hpp"

namespace carbondate {

/// How one source trails the true creation time.
struct SourceLag {
  double absent_probability = 0.0;  // in [0, 1]
  std::int64_t min_seconds = 0;
  std::int64_t max_seconds = 0;  // inclusive; lags are uniform on [min, max]
};

/// Parameters of a synthetic world. Creation times are whole days drawn
/// uniformly from [creation_from, creation_to].
struct LagModel {
  std::map<Method, SourceLag> sources;
  DayDate creation_from{std::chrono::year{2003} / 1 / 1};
  DayDate creation_to{std::chrono::year{2011} / 12 / 31};
  UtcTimestamp now{std::chrono::sys_days{std::chrono::year{2013} / 3 / 1}};

  /// Archives trail by hours to more than a year, social posts by minutes
  /// to days; the remaining sources sit in between.
  static LagModel defaults();

  /// Every source present with zero lag.
  static LagModel zero_lag();

  /// Throws InvalidLagModel.
  void validate() const;
};

nlohmann::ordered_json to_json(const LagModel& model);
LagModel lag_model_from_json(const nlohmann::json& j);

struct WorldResource {
  CanonicalUri uri;
  UtcTimestamp true_creation;
  /// Lag per method; nothing when the source has no record of the resource.
  std::map<Method, std::optional<std::int64_t>> lag_seconds;

  /// true_creation + lag for present sources.
  std::optional<UtcTimestamp> source_time(Method m) const;
  /// Minimum over present sources.
  std::optional<UtcTimestamp> expected_estimate() const;
};

/// Ground truth for a generated cassette.
struct SyntheticWorld {
  std::uint64_t seed = 0;
  LagModel model;
  std::vector<WorldResource> resources;
};

nlohmann::ordered_json to_json(const SyntheticWorld& world);
SyntheticWorld world_from_json(const nlohmann::json& j);

struct GeneratedWorld {
  SyntheticWorld world;
  Cassette cassette;
};

/// Deterministic in (seed, n, model, endpoints). The cassette answers every
/// request the six sources make for each resource, with backlink pages whose
/// captures link to the resource from creation + backlink lag onward.
/// Search-index lags are truncated to whole days; a source whose time would
/// fall after `model.now` is recorded as absent.
GeneratedWorld generate_world(std::uint64_t seed, std::size_t n, const LagModel& model,
                              const UpstreamEndpoints& endpoints = {});

}  // namespace carbondate
