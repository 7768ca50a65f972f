#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edgefm/scenario.hpp"

namespace edgefm {

struct Range {
  double low = 0.0;
  double high = 0.0;
  bool operator==(const Range&) const = default;
};

struct NodeSkeleton {
  std::string id;
  NodeKind kind = NodeKind::EdgeDevice;
  bool operator==(const NodeSkeleton&) const = default;
};

struct UserSkeleton {
  std::string id;
  std::string attached;
  std::vector<std::string> types;
  bool operator==(const UserSkeleton&) const = default;
};

struct TierRanges {
  std::vector<Range> demand;  // per resource
  Range workload;
  Range output;
  Range rate;         // core: constant rate
  Range gamma_shape;  // light: gamma rate parameters
  Range gamma_scale;
  Prices prices;
  bool operator==(const TierRanges&) const = default;
};

// Structure of a scenario plus the per-entity parameter ranges that
// sample_scenario draws from.
struct ScenarioRanges {
  std::vector<std::string> resources;
  double propagation_speed = 200.0;
  std::vector<NodeSkeleton> nodes;
  std::vector<std::pair<std::string, std::string>> links;
  std::vector<UserSkeleton> users;
  std::vector<std::pair<std::string, Tier>> microservices;
  std::vector<TaskType> task_types;  // payload and deadline are drawn

  TierRanges core;
  TierRanges light;
  std::vector<Range> device_capacity;
  std::vector<Range> server_capacity;
  Range arrival_mean;
  Range deadline;
  Range input_payload;
  Range link_bandwidth;
  Range link_distance;
  Range snr_shape;
  Range snr_spread;
  Range user_bandwidth;

  Parameters params;

  // Throws ConfigError naming the field of an inverted or negative range.
  void validate() const;
  bool operator==(const ScenarioRanges&) const = default;
};

struct ExperimentConfig {
  std::vector<std::string> strategies{"proposed", "lbrr", "ga", "prop-avg"};
  std::vector<std::uint64_t> seeds;  // empty: 1..trials
  std::size_t trials = 20;
  std::vector<double> multipliers{1.0};
  std::size_t horizon = 2000;
  std::size_t jobs = 1;

  std::vector<std::uint64_t> seed_list() const;
  bool operator==(const ExperimentConfig&) const = default;
};

// A config file holds either ranges (sampled per seed) or a concrete scenario.
struct ConfigFile {
  std::optional<ScenarioRanges> ranges;
  std::optional<Scenario> scenario;
  ExperimentConfig experiment;
};

// Built-in defaults: 8 edge devices, 2 edge servers, 4 users, 4 task types
// over 6 core and 9 light microservices, Table I ranges.
ScenarioRanges default_ranges();

Scenario sample_scenario(const ScenarioRanges& r, std::uint64_t seed);

// Parse errors carry "line L, column C"; field errors carry the dotted field
// path and, when it can be located, its line. Both throw ConfigError.
ConfigFile parse_config(const std::string& text, const std::string& source = "config");
ConfigFile load_config(const std::filesystem::path& path);

std::string scenario_to_json(const Scenario& s, const ExperimentConfig* experiment = nullptr);
std::string ranges_to_json(const ScenarioRanges& r, const ExperimentConfig* experiment = nullptr);
Scenario scenario_from_json(const std::string& text);

// key=value override of a tunable, keys as in the parameters section
// (e.g. "xi", "kappa", "ga.population").
void apply_override(Parameters& p, const std::string& key, const std::string& value);

}  // namespace edgefm
