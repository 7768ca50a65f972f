#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgefm/capacity.hpp"
#include "edgefm/catalog.hpp"
#include "edgefm/cost.hpp"
#include "edgefm/matrix.hpp"
#include "edgefm/topology.hpp"

namespace edgefm {

struct VirtualQueue {
  std::size_t task = 0;
  double value = 1.0;   // H, ms
  double floor = 1.0;   // zeta
  double weight = 1.0;  // phi
};

// H <- max(H + T - D, floor)
VirtualQueue queue_update(VirtualQueue q, double observed_latency, double deadline);

// eta * slot_cost + sum_j phi_j H_j (T_j - D_j)
double penalty(double slot_cost, double eta, std::span<const VirtualQueue> queues,
               std::span<const double> latency, std::span<const double> deadline);

enum class DelayModel { EffectiveCapacity, MeanValue };

std::string to_string(DelayModel m);

// Per light microservice (tier order) delay as a function of per-instance
// parallelism y, for y in [1, max_parallelism()].
class DelayTable {
 public:
  DelayTable() = default;
  DelayTable(const Catalog& catalog, DelayModel model, double epsilon, int y_max);
  explicit DelayTable(std::vector<std::vector<double>> rows);

  // 0 for y == 0, +inf beyond max_parallelism().
  double delay(std::size_t light, int y) const;
  int max_parallelism() const noexcept { return y_max_; }
  std::size_t size() const noexcept { return rows_.size(); }
  DelayModel model() const noexcept { return model_; }
  const std::vector<CapacityProfile>& profiles() const noexcept { return profiles_; }

 private:
  std::vector<std::vector<double>> rows_;
  std::vector<CapacityProfile> profiles_;
  DelayModel model_ = DelayModel::EffectiveCapacity;
  int y_max_ = 0;
};

// A queued task whose next stage runs light microservice `ms` (tier position).
struct LightRequest {
  std::size_t id = 0;
  std::size_t ms = 0;
  double weight = 1.0;    // phi * H
  double unserved = 0.0;  // latency charged if left unassigned this slot
  std::vector<double> network;  // per node: ms until inputs arrive there
};

struct ControllerInput {
  Matrix<int> carry;        // busy instances, node x light
  Matrix<int> previous;     // instances deployed in the previous slot
  Matrix<double> residual;  // node x resource left for additional light instances
  Matrix<double> demand;    // light x resource
  std::vector<Prices> prices;
  double eta = 1.0;
  ParallelismCostMode mode = ParallelismCostMode::PerInstance;
  std::vector<LightRequest> requests;

  std::size_t nodes() const { return carry.rows(); }
  std::size_t services() const { return carry.cols(); }
};

struct Commit {
  NodeId node = 0;
  std::size_t ms = 0;
  double delta = 0.0;
};

struct ControllerCounters {
  std::size_t iterations = 0;             // greedy loop passes
  std::size_t candidate_evaluations = 0;  // feasible (node, ms) candidates scored
  std::size_t next_hop_evaluations = 0;   // (task, candidate) pairs visited
};

struct SlotDecision {
  Matrix<int> instances;  // x_t
  Matrix<int> added;      // x_t - carry
  Matrix<int> tally;      // tasks assigned per (node, ms) this slot
  std::vector<std::optional<NodeId>> assignment;  // per request
  std::vector<Commit> commits;
  ControllerCounters counters;
  double slot_cost = 0.0;
};

// network(v) + delay(ceil((tally + 1) / instances)). Throws InvalidArgument on a
// stage mismatch or no instance, NoPathError when v is unreachable.
double next_hop_delta(const LightRequest& r, NodeId v, std::size_t ms, int tally,
                      int instances, const DelayTable& delays);

// Requests in decision order: larger weight first, then input order.
std::vector<std::size_t> priority_order(const std::vector<LightRequest>& requests);

// Sequential best-response routing onto a fixed deployment.
std::vector<std::optional<NodeId>> route_requests(const ControllerInput& in,
                                                  const DelayTable& delays,
                                                  const Matrix<int>& instances);

// eta * slot cost + sum of weight * latency for a fixed deployment routed by
// route_requests; unassigned requests contribute their unserved latency.
double slot_objective(const ControllerInput& in, const DelayTable& delays,
                      const Matrix<int>& instances);

// Greedy drift-plus-penalty deployment for one slot.
SlotDecision greedy_slot(const ControllerInput& in, const DelayTable& delays);

}  // namespace edgefm
