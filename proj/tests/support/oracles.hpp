#pragma once

// Independent reference implementations used as test oracles. None of these
// call the library routine they are meant to check.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "edgefm/catalog.hpp"
#include "edgefm/controller.hpp"
#include "edgefm/latency.hpp"
#include "edgefm/placement.hpp"
#include "edgefm/scenario.hpp"
#include "edgefm/sim.hpp"
#include "edgefm/topology.hpp"

namespace oracle {

using edgefm::NodeId;

// Shortest route latency by enumerating every simple path (tiny graphs only).
double path_enumeration_latency(const edgefm::NetworkGraph& g, NodeId src, NodeId dst,
                                double payload);

// End-to-end time as the longest root-to-sink chain of summed delays. node
// and processing are indexed by stage.
double chain_enumeration_latency(const edgefm::TaskDag& dag, const edgefm::Catalog& cat,
                                 std::span<const NodeId> node, std::span<const double> processing,
                                 double uplink, NodeId entry, double input_payload,
                                 const edgefm::TransferFn& transfer);

// Random inverse tree on n stages over microservices "s0".."s{n-1}". Stage i
// feeds a random later stage, so the last one is the unique sink.
edgefm::TaskType random_inverse_tree(std::size_t n, std::mt19937_64& rng);

// Every stage reachable from `stage` by repeated edge relaxation.
std::vector<std::string> reachable(const edgefm::TaskType& t, const std::string& stage);

// Feasibility check written from the constraint list: joint capacity,
// per pair bound, coverage, diversity floor.
bool placement_feasible(const edgefm::PlacementProblem& p, const edgefm::Matrix<int>& x);

struct Exhaustive {
  double objective = 0.0;
  edgefm::Matrix<int> x;
};
// Minimum of sum x (c - xi Q) over every matrix with 0 <= x <= pair bound.
std::optional<Exhaustive> exhaustive_placement(const edgefm::PlacementProblem& p);

// Random tiny placement problem: |V| <= 3, |M| <= 3, pair bounds <= 3.
edgefm::PlacementProblem random_tiny_placement(std::mt19937_64& rng);

// Best slot objective over every light deployment with carry <= x <= bound
// that fits the residual capacities.
struct SlotOptimum {
  double objective = 0.0;
  edgefm::Matrix<int> x;
  std::size_t deployments = 0;
};
SlotOptimum exhaustive_slot(const edgefm::ControllerInput& in, const edgefm::DelayTable& delays,
                            int bound);

// Completion time of one task among y sharing an instance from a slot
// boundary on: each slot serves f(t)/y with f drawn fresh per slot.
double fair_share_completion(double workload, double shape, double scale, int y,
                             std::mt19937_64& rng);

// Recomputes each dispatched stage's input arrival time from the logged
// hosts with routes found by path enumeration, and checks the timing rules
// of the trace. Returns an empty string when the task is consistent.
std::string replay_task(const edgefm::Scenario& s, const edgefm::TaskTrace& t);

// Ordinary least squares y = a + b x.
struct Fit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};
Fit least_squares(std::span<const double> x, std::span<const double> y);

// Synthetic controller input: V nodes, M light services, J requests with
// random network delays, ample residual capacity.
edgefm::ControllerInput synthetic_input(std::size_t V, std::size_t M, std::size_t J,
                                        std::mt19937_64& rng);
// Delay rows a*y/mean for the given (workload, mean rate) pairs.
edgefm::DelayTable linear_delays(std::span<const std::pair<double, double>> ms, int y_max);

}  // namespace oracle
