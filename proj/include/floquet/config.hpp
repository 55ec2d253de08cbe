#pragma once

// Run configuration: a JSON document describing the model, the seeds and the
// estimator settings. parse_config(to_json(c)) == c for every valid config.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "floquet/cocycle.hpp"
#include "floquet/principal.hpp"

namespace floquet {

struct OrbitOptions {
  std::int64_t anchor = 0;
  std::int64_t backward = 20;
  std::int64_t forward = 20;

  friend bool operator==(const OrbitOptions&, const OrbitOptions&) = default;
};

struct RunConfig {
  explicit RunConfig(CocycleModel m) : model(std::move(m)) {}

  CocycleModel model;
  std::optional<CocycleModel> model_hi;  // compare only
  std::vector<std::uint64_t> seeds;
  std::int64_t horizon = 100000;
  std::optional<std::int64_t> burn_in;
  PullbackOptions pullback;
  int period = 1;  // 0 selects the smallest focusing period
  int batches = 32;
  int workers = 0;  // 0 = machine parallelism
  std::size_t trace_points = 200;
  double epsilon = 0.01;
  std::int64_t probes = 256;
  OrbitOptions orbit;

  friend bool operator==(const RunConfig& lhs, const RunConfig& rhs);
};

nlohmann::json distribution_to_json(const Distribution& d);
Distribution distribution_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const CocycleModel& model);
CocycleModel model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunConfig& config);
/// Throws ConfigError on missing keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& file);

LyapunovOptions lyapunov_options(const RunConfig& config, int period);

}  // namespace floquet
