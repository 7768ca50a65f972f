#include "edgefm/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "edgefm/error.hpp"

namespace edgefm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int ceil_div(int a, int b) { return (a + b - 1) / b; }

bool fits(const Matrix<double>& residual, NodeId v, const Matrix<double>& demand,
          std::size_t m) {
  for (std::size_t k = 0; k < demand.cols(); ++k)
    if (demand(m, k) > residual(v, k) + 1e-9) return false;
  return true;
}

double pair_cost(const Prices& p, ParallelismCostMode mode, int x, int before, int tally) {
  int level = mode == ParallelismCostMode::PerInstance ? 1 : (x > 0 ? ceil_div(tally, x) : 0);
  return p.deploy * std::max(0, x - before) + (p.maintain + p.parallelism * level) * x;
}

void check_input(const ControllerInput& in, const DelayTable& delays) {
  const std::size_t V = in.nodes(), M = in.services();
  if (in.previous.rows() != V || in.previous.cols() != M)
    throw InvalidArgument("controller: previous shape mismatch");
  if (in.residual.rows() != V) throw InvalidArgument("controller: residual shape mismatch");
  if (in.demand.rows() != M || in.demand.cols() != in.residual.cols())
    throw InvalidArgument("controller: demand shape mismatch");
  if (in.prices.size() != M) throw InvalidArgument("controller: price list mismatch");
  if (delays.size() != M) throw InvalidArgument("controller: delay table mismatch");
  for (const auto& r : in.requests) {
    if (r.ms >= M) throw InvalidArgument("controller: request for unknown microservice");
    if (r.network.size() != V) throw InvalidArgument("controller: request network size");
  }
}

struct Routing {
  std::vector<std::optional<NodeId>> assign;
  Matrix<int> tally;
};

Routing route(const ControllerInput& in, const DelayTable& delays, const Matrix<int>& x,
              const std::vector<std::size_t>& order) {
  Routing r{std::vector<std::optional<NodeId>>(in.requests.size()),
            Matrix<int>(in.nodes(), in.services(), 0)};
  for (std::size_t j : order) {
    const LightRequest& q = in.requests[j];
    double best = kInf;
    std::optional<NodeId> pick;
    for (NodeId v = 0; v < in.nodes(); ++v) {
      int n = x(v, q.ms);
      if (n <= 0 || !std::isfinite(q.network[v])) continue;
      double d = q.network[v] + delays.delay(q.ms, ceil_div(r.tally(v, q.ms) + 1, n));
      if (d < best) {
        best = d;
        pick = v;
      }
    }
    if (pick) {
      r.assign[j] = pick;
      ++r.tally(*pick, q.ms);
    }
  }
  return r;
}

double latency_of(const LightRequest& q, const std::optional<NodeId>& at, const Matrix<int>& x,
                  const Matrix<int>& tally, const DelayTable& delays) {
  if (!at) return q.unserved;
  int n = x(*at, q.ms);
  return q.network[*at] + delays.delay(q.ms, ceil_div(tally(*at, q.ms), n));
}

}  // namespace

VirtualQueue queue_update(VirtualQueue q, double observed_latency, double deadline) {
  q.value = std::max(q.value + observed_latency - deadline, q.floor);
  return q;
}

double penalty(double slot_cost, double eta, std::span<const VirtualQueue> queues,
               std::span<const double> latency, std::span<const double> deadline) {
  if (eta < 0) throw InvalidArgument("eta must be non-negative");
  if (latency.size() != queues.size() || deadline.size() != queues.size())
    throw InvalidArgument("penalty: length mismatch");
  double l = eta * slot_cost;
  for (std::size_t j = 0; j < queues.size(); ++j)
    l += queues[j].weight * queues[j].value * (latency[j] - deadline[j]);
  return l;
}

std::string to_string(DelayModel m) {
  return m == DelayModel::EffectiveCapacity ? "effective_capacity" : "mean_value";
}

DelayTable::DelayTable(const Catalog& catalog, DelayModel model, double epsilon, int y_max)
    : model_(model), y_max_(y_max) {
  if (y_max < 1) throw InvalidArgument("y_max must be at least 1");
  for (std::size_t m : catalog.light()) {
    const Microservice& ms = catalog.ms(m);
    std::vector<double> row;
    if (model == DelayModel::EffectiveCapacity) {
      profiles_.push_back(build_profile(ms, epsilon, y_max));
      row = profiles_.back().bound;
    } else {
      for (int y = 1; y <= y_max; ++y) row.push_back(mean_value_delay(ms, y));
    }
    rows_.push_back(std::move(row));
  }
}

DelayTable::DelayTable(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) return;
  y_max_ = static_cast<int>(rows_.front().size());
  for (const auto& r : rows_)
    if (static_cast<int>(r.size()) != y_max_) throw InvalidArgument("ragged delay table");
}

double DelayTable::delay(std::size_t light, int y) const {
  if (y <= 0) return 0.0;
  if (y > y_max_) return kInf;
  return rows_.at(light)[static_cast<std::size_t>(y - 1)];
}

double next_hop_delta(const LightRequest& r, NodeId v, std::size_t ms, int tally,
                      int instances, const DelayTable& delays) {
  if (ms != r.ms) throw InvalidArgument("candidate microservice is not the task's next stage");
  if (v >= r.network.size()) throw InvalidArgument("node out of range");
  if (instances <= 0) throw InvalidArgument("candidate has no instance");
  if (!std::isfinite(r.network[v])) throw NoPathError("candidate node is unreachable");
  return r.network[v] + delays.delay(ms, ceil_div(tally + 1, instances));
}

std::vector<std::size_t> priority_order(const std::vector<LightRequest>& requests) {
  std::vector<std::size_t> order(requests.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return requests[a].weight > requests[b].weight;
  });
  return order;
}

std::vector<std::optional<NodeId>> route_requests(const ControllerInput& in,
                                                  const DelayTable& delays,
                                                  const Matrix<int>& instances) {
  check_input(in, delays);
  return route(in, delays, instances, priority_order(in.requests)).assign;
}

double slot_objective(const ControllerInput& in, const DelayTable& delays,
                      const Matrix<int>& instances) {
  check_input(in, delays);
  Routing r = route(in, delays, instances, priority_order(in.requests));
  double cost = 0.0;
  for (NodeId v = 0; v < in.nodes(); ++v)
    for (std::size_t m = 0; m < in.services(); ++m)
      cost += pair_cost(in.prices[m], in.mode, instances(v, m), in.previous(v, m), r.tally(v, m));
  double obj = in.eta * cost;
  for (std::size_t j = 0; j < in.requests.size(); ++j)
    obj += in.requests[j].weight * latency_of(in.requests[j], r.assign[j], instances, r.tally, delays);
  return obj;
}

SlotDecision greedy_slot(const ControllerInput& in, const DelayTable& delays) {
  check_input(in, delays);
  const std::size_t V = in.nodes(), M = in.services(), J = in.requests.size();
  const std::vector<std::size_t> order = priority_order(in.requests);

  SlotDecision d;
  Matrix<int> x = in.carry;
  Matrix<double> residual = in.residual;
  Routing state = route(in, delays, x, order);
  std::vector<double> cur(J);
  for (std::size_t j = 0; j < J; ++j)
    cur[j] = latency_of(in.requests[j], state.assign[j], x, state.tally, delays);

  std::vector<char> mark(J, 0), best_mark(J, 0);
  while (true) {
    ++d.counters.iterations;
    double best = 0.0;
    bool found = false;
    NodeId bv = 0;
    std::size_t bm = 0;
    for (NodeId v = 0; v < V; ++v) {
      for (std::size_t m = 0; m < M; ++m) {
        if (!fits(residual, v, in.demand, m)) continue;
        ++d.counters.candidate_evaluations;
        const int nx = x(v, m) + 1;
        int k = state.tally(v, m);
        double before = 0.0, after_network = 0.0, after_weight = 0.0;
        for (std::size_t j : order) {
          ++d.counters.next_hop_evaluations;
          mark[j] = 0;
          const LightRequest& q = in.requests[j];
          if (q.ms != m) continue;
          if (state.assign[j] && *state.assign[j] == v) {
            mark[j] = 1;
          } else {
            if (!std::isfinite(q.network[v])) continue;
            int eff = ceil_div(k + 1, nx);
            if (eff > delays.max_parallelism()) continue;
            if (!(q.network[v] + delays.delay(m, eff) < cur[j])) continue;
            mark[j] = 2;
            ++k;
          }
          before += q.weight * cur[j];
          after_network += q.weight * q.network[v];
          after_weight += q.weight;
        }
        double after = after_network + after_weight * delays.delay(m, ceil_div(k, nx));
        double dc = pair_cost(in.prices[m], in.mode, nx, in.previous(v, m), k) -
                    pair_cost(in.prices[m], in.mode, nx - 1, in.previous(v, m), state.tally(v, m));
        double delta = in.eta * dc + (after - before);
        if (delta < best - 1e-12) {
          best = delta;
          found = true;
          bv = v;
          bm = m;
          best_mark = mark;
        }
      }
    }
    if (!found) break;
    ++x(bv, bm);
    for (std::size_t k = 0; k < residual.cols(); ++k) residual(bv, k) -= in.demand(bm, k);
    for (std::size_t j = 0; j < J; ++j) {
      if (best_mark[j] != 2) continue;
      if (state.assign[j]) --state.tally(*state.assign[j], bm);
      state.assign[j] = bv;
      ++state.tally(bv, bm);
    }
    for (std::size_t j = 0; j < J; ++j)
      if (in.requests[j].ms == bm)
        cur[j] = latency_of(in.requests[j], state.assign[j], x, state.tally, delays);
    d.commits.push_back({bv, bm, best});
  }

  d.instances = x;
  d.added = Matrix<int>(V, M, 0);
  for (NodeId v = 0; v < V; ++v)
    for (std::size_t m = 0; m < M; ++m) d.added(v, m) = x(v, m) - in.carry(v, m);
  d.tally = state.tally;
  d.assignment = state.assign;
  double cost = 0.0;
  for (NodeId v = 0; v < V; ++v)
    for (std::size_t m = 0; m < M; ++m)
      cost += pair_cost(in.prices[m], in.mode, x(v, m), in.previous(v, m), state.tally(v, m));
  d.slot_cost = cost;
  return d;
}

}  // namespace edgefm
