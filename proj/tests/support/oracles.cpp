#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

namespace oracle {

using namespace edgefm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double edge_weight(const NetworkGraph& g, const Link& l, double payload) {
  return payload / l.bandwidth + l.distance / g.propagation_speed();
}

// All-pairs route latency by Floyd-Warshall over the link list.
Matrix<double> all_pairs(const NetworkGraph& g, double payload) {
  const std::size_t n = g.node_count();
  Matrix<double> d(n, n, kInf);
  for (std::size_t v = 0; v < n; ++v) d(v, v) = 0.0;
  for (const Link& l : g.links()) {
    double w = edge_weight(g, l, payload);
    d(l.a, l.b) = std::min(d(l.a, l.b), w);
    d(l.b, l.a) = std::min(d(l.b, l.a), w);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  return d;
}

bool close(double a, double b, double tol = 1e-7) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

}  // namespace

double path_enumeration_latency(const NetworkGraph& g, NodeId src, NodeId dst, double payload) {
  if (src == dst) return 0.0;
  double best = kInf;
  std::vector<bool> on(g.node_count(), false);
  std::function<void(NodeId, double)> walk = [&](NodeId v, double acc) {
    if (v == dst) {
      best = std::min(best, acc);
      return;
    }
    on[v] = true;
    for (const Link& l : g.links()) {
      NodeId w;
      if (l.a == v) w = l.b;
      else if (l.b == v) w = l.a;
      else continue;
      if (!on[w]) walk(w, acc + edge_weight(g, l, payload));
    }
    on[v] = false;
  };
  walk(src, 0.0);
  return best;
}

double chain_enumeration_latency(const TaskDag& dag, const Catalog& cat,
                                 std::span<const NodeId> node, std::span<const double> processing,
                                 double uplink, NodeId entry, double input_payload,
                                 const TransferFn& transfer) {
  auto hop = [&](NodeId a, NodeId b, double size) { return a == b ? 0.0 : transfer(a, b, size); };
  double worst = -kInf;
  for (std::size_t root : dag.roots()) {
    double sum = uplink + hop(entry, node[root], input_payload);
    std::size_t s = root;
    while (true) {
      sum += processing[s];
      std::size_t c = dag.child(s);
      if (c == kNoStage) break;
      sum += hop(node[s], node[c], cat.ms(dag.ms(s)).output);
      s = c;
    }
    worst = std::max(worst, sum);
  }
  return worst;
}

TaskType random_inverse_tree(std::size_t n, std::mt19937_64& rng) {
  TaskType t;
  t.id = "rand";
  for (std::size_t i = 0; i < n; ++i) t.stages.push_back("s" + std::to_string(i));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i + 1, n - 1);
    t.edges.emplace_back(t.stages[i], t.stages[pick(rng)]);
  }
  return t;
}

std::vector<std::string> reachable(const TaskType& t, const std::string& stage) {
  std::set<std::string> seen;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [a, b] : t.edges) {
      if ((a == stage || seen.count(a)) && !seen.count(b)) {
        seen.insert(b);
        grew = true;
      }
    }
  }
  seen.erase(stage);
  return {seen.begin(), seen.end()};
}

bool placement_feasible(const PlacementProblem& p, const Matrix<int>& x) {
  const std::size_t V = p.nodes(), M = p.services(), K = p.capacity.cols();
  int nonzero = 0;
  for (std::size_t v = 0; v < V; ++v) {
    for (std::size_t k = 0; k < K; ++k) {
      double used = 0.0;
      for (std::size_t m = 0; m < M; ++m) used += p.demand(m, k) * x(v, m);
      if (used > p.capacity(v, k) + 1e-9) return false;
    }
    for (std::size_t m = 0; m < M; ++m) {
      if (x(v, m) < 0 || x(v, m) > p.big_m(v, m)) return false;
      if (x(v, m) > 0) ++nonzero;
    }
  }
  for (std::size_t m = 0; m < M; ++m) {
    int total = 0;
    for (std::size_t v = 0; v < V; ++v) total += x(v, m);
    if (total < p.coverage[m]) return false;
  }
  return nonzero >= p.kappa;
}

std::optional<Exhaustive> exhaustive_placement(const PlacementProblem& p) {
  const std::size_t V = p.nodes(), M = p.services();
  Matrix<int> x(V, M, 0);
  std::vector<int> upper(V * M);
  for (std::size_t v = 0; v < V; ++v)
    for (std::size_t m = 0; m < M; ++m) {
      int b = p.big_m(v, m);
      for (std::size_t k = 0; k < p.capacity.cols(); ++k)
        if (p.demand(m, k) > 0)
          b = std::min(b, static_cast<int>(std::floor(p.capacity(v, k) / p.demand(m, k) + 1e-9)));
      upper[v * M + m] = std::max(0, b);
    }
  std::optional<Exhaustive> best;
  while (true) {
    if (placement_feasible(p, x)) {
      double obj = 0.0;
      for (std::size_t v = 0; v < V; ++v)
        for (std::size_t m = 0; m < M; ++m)
          obj += x(v, m) * (p.unit_cost[m] - p.xi * p.score(v, m));
      if (!best || obj < best->objective - 1e-12) best = Exhaustive{obj, x};
    }
    std::size_t i = 0;
    for (; i < V * M; ++i) {
      if (x.data()[i] < upper[i]) {
        ++x.data()[i];
        break;
      }
      x.data()[i] = 0;
    }
    if (i == V * M) break;
  }
  return best;
}

PlacementProblem random_tiny_placement(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PlacementProblem p;
  const std::size_t V = dim(rng), M = dim(rng), K = 2;
  for (std::size_t v = 0; v < V; ++v) p.node_ids.push_back("n" + std::to_string(v));
  for (std::size_t m = 0; m < M; ++m) p.ms_ids.push_back("c" + std::to_string(m));
  p.capacity = Matrix<double>(V, K);
  for (double& c : p.capacity.data()) c = 2.0 + 10.0 * u(rng);
  p.demand = Matrix<double>(M, K);
  for (double& d : p.demand.data()) d = 1.0 + 4.0 * u(rng);
  p.score = Matrix<double>(V, M);
  for (double& q : p.score.data()) q = 40.0 * u(rng);
  p.load = Matrix<double>(V, M, 0.0);
  p.big_m = Matrix<int>(V, M);
  for (int& b : p.big_m.data()) b = std::uniform_int_distribution<int>(0, 3)(rng);
  for (std::size_t m = 0; m < M; ++m) {
    p.unit_cost.push_back(24.0);
    p.coverage.push_back(std::uniform_int_distribution<int>(0, 2)(rng));
  }
  p.xi = u(rng) < 0.25 ? 0.0 : 2.0 * u(rng);
  p.kappa = std::uniform_int_distribution<int>(0, static_cast<int>(std::min<std::size_t>(V * M, 4)))(rng);
  p.min_fraction = 1.0;
  p.node_limit = 200000;
  return p;
}

SlotOptimum exhaustive_slot(const ControllerInput& in, const DelayTable& delays, int bound) {
  const std::size_t V = in.nodes(), M = in.services(), K = in.residual.cols();
  Matrix<int> x = in.carry;
  SlotOptimum best;
  best.objective = kInf;
  while (true) {
    bool fits = true;
    for (std::size_t v = 0; v < V && fits; ++v)
      for (std::size_t k = 0; k < K; ++k) {
        double add = 0.0;
        for (std::size_t m = 0; m < M; ++m) add += (x(v, m) - in.carry(v, m)) * in.demand(m, k);
        if (add > in.residual(v, k) + 1e-9) fits = false;
      }
    if (fits) {
      ++best.deployments;
      double obj = slot_objective(in, delays, x);
      if (obj < best.objective - 1e-12) {
        best.objective = obj;
        best.x = x;
      }
    }
    std::size_t i = 0;
    for (; i < V * M; ++i) {
      int lo = in.carry.data()[i];
      if (x.data()[i] < std::max(lo, bound)) {
        ++x.data()[i];
        break;
      }
      x.data()[i] = lo;
    }
    if (i == V * M) break;
  }
  return best;
}

double fair_share_completion(double workload, double shape, double scale, int y,
                             std::mt19937_64& rng) {
  std::gamma_distribution<double> rate(shape, scale);
  double served = 0.0;
  for (long slot = 0;; ++slot) {
    double speed = rate(rng) / y;
    if (served + speed >= workload) return static_cast<double>(slot) + (workload - served) / speed;
    served += speed;
  }
}

std::string replay_task(const Scenario& s, const TaskTrace& t) {
  const Catalog& cat = s.catalog;
  const TaskDag& dag = cat.dag(t.type);
  const TaskType& type = cat.task_types()[t.type];
  std::ostringstream err;
  auto route = [&](NodeId a, NodeId b, double size) {
    return a == b ? 0.0 : all_pairs(s.graph, size)(a, b);
  };
  for (std::size_t st = 0; st < dag.size(); ++st) {
    const StageTrace& x = t.stages[st];
    if (!x.dispatched) {
      if (t.status == TaskStatus::Done) err << "done task with undispatched stage " << st;
      continue;
    }
    double ready;
    if (dag.parents(st).empty()) {
      ready = t.arrival + t.uplink + route(t.entry, x.node, type.input_payload);
    } else {
      ready = x.dispatch;
      for (std::size_t p : dag.parents(st)) {
        const StageTrace& px = t.stages[p];
        if (!px.dispatched) {
          err << "stage " << st << " dispatched before parent " << p;
          return err.str();
        }
        if (px.finish > x.dispatch + 1e-9) {
          err << "stage " << st << " dispatched at " << x.dispatch << " before parent finish "
              << px.finish;
          return err.str();
        }
        ready = std::max(ready, std::max(px.finish, x.dispatch) +
                                    route(px.node, x.node, cat.ms(px.ms).output));
      }
    }
    if (!close(ready, x.ready)) {
      err << "stage " << st << " ready " << x.ready << " expected " << ready;
      return err.str();
    }
    if (x.start < x.ready - 1e-9) {
      err << "stage " << st << " starts before its inputs arrive";
      return err.str();
    }
    const Microservice& ms = cat.ms(x.ms);
    if (ms.tier == Tier::Core) {
      if (!close(x.finish - x.start, ms.workload / ms.rate.first)) {
        err << "core stage " << st << " runs " << x.finish - x.start << " instead of "
            << ms.workload / ms.rate.first;
        return err.str();
      }
    } else {
      if (!close(x.start, x.ready) || !(x.finish > x.start) || x.share < 1) {
        err << "light stage " << st << " has inconsistent timing";
        return err.str();
      }
    }
  }
  if (t.status == TaskStatus::Done) {
    const StageTrace& sink = t.stages[dag.sink()];
    if (!close(sink.finish, t.finish)) err << "task finish differs from sink finish";
  }
  return err.str();
}

Fit least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  Fit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

ControllerInput synthetic_input(std::size_t V, std::size_t M, std::size_t J, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ControllerInput in;
  in.carry = Matrix<int>(V, M, 0);
  in.previous = Matrix<int>(V, M, 0);
  in.residual = Matrix<double>(V, 2, 1e6);
  in.demand = Matrix<double>(M, 2, 1.0);
  in.prices.assign(M, Prices{4.0, 1.0, 0.5});
  in.eta = 1.0;
  for (std::size_t j = 0; j < J; ++j) {
    LightRequest r;
    r.id = j;
    r.ms = j % M;
    r.weight = 1.0 + 9.0 * u(rng);
    r.unserved = 50.0 + 50.0 * u(rng);
    for (std::size_t v = 0; v < V; ++v) r.network.push_back(20.0 * u(rng));
    in.requests.push_back(std::move(r));
  }
  return in;
}

DelayTable linear_delays(std::span<const std::pair<double, double>> ms, int y_max) {
  std::vector<std::vector<double>> rows;
  for (const auto& [a, f] : ms) {
    std::vector<double> row;
    for (int y = 1; y <= y_max; ++y) row.push_back(a * y / f);
    rows.push_back(std::move(row));
  }
  return DelayTable(std::move(rows));
}

}  // namespace oracle
