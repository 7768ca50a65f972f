#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "edgefm/catalog.hpp"
#include "edgefm/cost.hpp"
#include "edgefm/stochastic.hpp"
#include "edgefm/topology.hpp"

namespace edgefm {

// Arrival process of one (user, task type) pair, tasks per ms.
struct Subscription {
  std::size_t user = 0;
  std::size_t task_type = 0;
  DistributionSpec arrivals;

  bool operator==(const Subscription&) const = default;
};

struct GaParams {
  int population = 24;
  int generations = 30;
  double mutation = 0.1;
  double crossover = 0.7;
  double lambda = 500.0;
  int tournament = 3;
  int gene_max = 3;
  double horizon_fraction = 0.25;

  bool operator==(const GaParams&) const = default;
};

struct Parameters {
  // static core placement
  double xi = 1.0;
  double decay = 0.05;
  double urgency_floor = 0.0;   // C1
  std::optional<int> big_m;     // C2; per-pair capacity bound when unset
  double min_fraction = 1.0;    // C3
  std::optional<int> kappa;     // |core| + 2 when unset
  double reserve = 0.3;
  // C2 counts busy instance-slots (arrivals times a/f, never below the
  // arrival count) instead of raw arrivals per slot.
  bool work_coverage = true;
  std::size_t node_limit = 2000;
  // online light deployment
  double zeta = 1.0;
  double eta = 1.0;
  double phi = 1.0;
  double epsilon = 0.2;
  int y_max = 16;
  ParallelismCostMode cost_mode = ParallelismCostMode::PerInstance;
  // simulation
  double expiry_factor = 3.0;
  GaParams ga;

  void validate() const;
  bool operator==(const Parameters&) const = default;
};

struct Scenario {
  NetworkGraph graph;
  Catalog catalog;
  std::vector<Subscription> subscriptions;
  Parameters params;

  // Throws InvalidArgument when subscriptions reference unknown users/types.
  void validate() const;
  // Copy with every arrival mean multiplied by factor.
  Scenario scaled(double factor) const;
  // Mean arrivals per ms of task type n, summed over users.
  double type_rate(std::size_t n) const;

  bool operator==(const Scenario&) const = default;
};

}  // namespace edgefm
