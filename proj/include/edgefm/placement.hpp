#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "edgefm/matrix.hpp"
#include "edgefm/scenario.hpp"

namespace edgefm {

// Mean-value latency split around stage m at node v: preceding (arrival of
// all inputs at v), current (own processing), succeeding (descendants'
// processing). ms.
struct LatencyTriple {
  double preceding = 0.0;
  double current = 0.0;
  double succeeding = 0.0;
};

// Mean-value view of a scenario: every random quantity replaced by its mean,
// predecessors placed on the nodes that minimize network plus processing time.
class MeanLatencyModel {
 public:
  explicit MeanLatencyModel(const Scenario& s);

  // Throws InvalidArgument if m is not a stage of type n, NoPathError if the
  // inputs cannot reach v.
  LatencyTriple profile(std::size_t user, std::size_t type, NodeId v, std::size_t ms) const;
  double mean_uplink(std::size_t user, std::size_t type) const;
  double mean_processing(std::size_t ms) const;
  const Scenario& scenario() const noexcept { return *s_; }

 private:
  // arrival[stage](node): mean time all inputs of stage reach node.
  const Matrix<double>& arrivals(std::size_t user, std::size_t type) const;

  const Scenario* s_;
  TransferTable transfers_;  // payload index: ms outputs first, then type inputs
  mutable std::vector<Matrix<double>> cache_;
  mutable std::vector<bool> cached_;
};

LatencyTriple mean_latency_profiles(const Scenario& s, std::size_t user, std::size_t type,
                                    NodeId v, std::size_t ms);

// z~ over nodes: each subscription using m spreads its mean rate across nodes
// with weights softmax(-decay * preceding latency).
std::vector<double> estimate_load(const MeanLatencyModel& model, std::size_t ms, double decay);

// max((D - preceding - current) / succeeding, floor); +inf for a positive
// budget with no descendants.
double urgency(const LatencyTriple& t, double deadline, double floor);

// load * sum(urgencies); zero load gives zero.
double qos_score(double load, std::span<const double> urgencies);

struct PlacementProblem {
  std::vector<std::string> node_ids;
  std::vector<std::string> ms_ids;        // core microservices, column order
  Matrix<double> capacity;                // node x resource, after the light reserve
  Matrix<double> demand;                  // ms x resource
  std::vector<double> unit_cost;          // deploy + maintain
  Matrix<double> score;                   // Q, node x ms
  Matrix<double> load;                    // z~, node x ms
  Matrix<int> big_m;                      // C2 per pair
  std::vector<int> coverage;              // ceil(sum_v z~) per ms
  double xi = 1.0;
  double min_fraction = 1.0;              // C3
  int kappa = 0;
  std::size_t node_limit = 20000;

  std::size_t nodes() const { return node_ids.size(); }
  std::size_t services() const { return ms_ids.size(); }
  // Largest count of m that fits alone on v, capped by big_m.
  int pair_bound(std::size_t v, std::size_t m) const;
  void validate() const;
};

PlacementProblem build_placement_problem(const Scenario& s);

struct PlacementSolution {
  Matrix<int> instances;  // node x ms
  Matrix<int> indicator;  // 1 where instances > 0
  double objective = 0.0;
  bool optimal = false;
  std::size_t nodes_explored = 0;
};

double placement_objective(const PlacementProblem& p, const Matrix<int>& x);

// Empty string when x satisfies every constraint, otherwise the first failure.
std::string placement_violation(const PlacementProblem& p, const Matrix<int>& x);

// Exact minimizer of sum x (c - xi Q) under joint node capacity, coverage,
// integrality and the diversity floor. Throws InfeasibleError.
PlacementSolution solve_placement(const PlacementProblem& p);

}  // namespace edgefm
