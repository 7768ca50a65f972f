#include "edgefm/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edgefm/error.hpp"
#include "edgefm/latency.hpp"
#include "edgefm/lp.hpp"

namespace edgefm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Scores are capped so the integer program stays finite when a stage with no
// descendants has a positive budget.
constexpr double kScoreCap = 1e9;

bool hostable(const Microservice& m, const Node& n) {
  for (std::size_t k = 0; k < m.demand.size(); ++k)
    if (m.demand[k] > n.capacity[k]) return false;
  return true;
}

std::vector<double> payload_list(const Scenario& s) {
  std::vector<double> p;
  for (const auto& m : s.catalog.microservices()) p.push_back(m.output);
  for (const auto& t : s.catalog.task_types()) p.push_back(t.input_payload);
  return p;
}

}  // namespace

MeanLatencyModel::MeanLatencyModel(const Scenario& s)
    : s_(&s), transfers_(s.graph, payload_list(s)) {
  std::size_t n = s.graph.users().size() * s.catalog.task_types().size();
  cache_.resize(n);
  cached_.assign(n, false);
}

double MeanLatencyModel::mean_uplink(std::size_t user, std::size_t type) const {
  const User& u = s_->graph.users().at(user);
  return uplink_delay(s_->catalog.task_types().at(type).input_payload, u.bandwidth,
                      mean(u.snr));
}

double MeanLatencyModel::mean_processing(std::size_t ms) const {
  const Microservice& m = s_->catalog.ms(ms);
  return processing_delay(m.workload, mean(m.rate));
}

const Matrix<double>& MeanLatencyModel::arrivals(std::size_t user, std::size_t type) const {
  std::size_t key = user * s_->catalog.task_types().size() + type;
  if (cached_.at(key)) return cache_[key];
  const auto& cat = s_->catalog;
  const auto& g = s_->graph;
  const TaskDag& dag = cat.dag(type);
  const std::size_t nodes = g.node_count();
  const std::size_t input_index = cat.microservices().size() + type;
  auto tr = [&](std::size_t payload, NodeId a, NodeId b) {
    return a == b ? 0.0 : transfers_.delay(payload, a, b);
  };
  Matrix<double> arr(dag.size(), nodes, kInf);
  Matrix<double> done(dag.size(), nodes, kInf);
  const double up = mean_uplink(user, type);
  const NodeId entry = g.users()[user].attached;
  for (std::size_t s : dag.order()) {
    const std::size_t m = dag.ms(s);
    for (NodeId w = 0; w < nodes; ++w) {
      double a = 0.0;
      if (dag.parents(s).empty()) {
        a = up + tr(input_index, entry, w);
      } else {
        for (std::size_t p : dag.parents(s)) {
          double best = kInf;
          for (NodeId w2 = 0; w2 < nodes; ++w2)
            best = std::min(best, done(p, w2) + tr(dag.ms(p), w2, w));
          a = std::max(a, best);
        }
      }
      arr(s, w) = a;
      if (hostable(cat.ms(m), g.node(w))) done(s, w) = a + mean_processing(m);
    }
  }
  cache_[key] = std::move(arr);
  cached_[key] = true;
  return cache_[key];
}

LatencyTriple MeanLatencyModel::profile(std::size_t user, std::size_t type, NodeId v,
                                        std::size_t ms) const {
  const TaskDag& dag = s_->catalog.dag(type);
  std::size_t stage = dag.stage_of(ms);
  if (stage == kNoStage)
    throw InvalidArgument("microservice " + s_->catalog.ms(ms).id + " is not used by " +
                          s_->catalog.task_types()[type].id);
  if (v >= s_->graph.node_count()) throw InvalidArgument("node out of range");
  LatencyTriple t;
  t.preceding = arrivals(user, type)(stage, v);
  if (!std::isfinite(t.preceding))
    throw NoPathError("inputs of " + s_->catalog.ms(ms).id + " cannot reach " +
                      s_->graph.node(v).id);
  t.current = mean_processing(ms);
  for (std::size_t d : dag.descendants(stage)) t.succeeding += mean_processing(dag.ms(d));
  return t;
}

LatencyTriple mean_latency_profiles(const Scenario& s, std::size_t user, std::size_t type,
                                    NodeId v, std::size_t ms) {
  MeanLatencyModel model(s);
  return model.profile(user, type, v, ms);
}

std::vector<double> estimate_load(const MeanLatencyModel& model, std::size_t ms, double decay) {
  if (decay < 0) throw InvalidArgument("decay must be non-negative");
  const Scenario& s = model.scenario();
  const std::size_t nodes = s.graph.node_count();
  std::vector<double> z(nodes, 0.0);
  const auto& users_of = s.catalog.types_using(ms);
  for (const auto& sub : s.subscriptions) {
    if (std::find(users_of.begin(), users_of.end(), sub.task_type) == users_of.end()) continue;
    double rate = mean(sub.arrivals);
    if (!(rate > 0)) continue;
    std::vector<double> d(nodes, kInf);
    double dmin = kInf;
    for (NodeId v = 0; v < nodes; ++v) {
      try {
        d[v] = model.profile(sub.user, sub.task_type, v, ms).preceding;
      } catch (const NoPathError&) {
        continue;
      }
      dmin = std::min(dmin, d[v]);
    }
    if (!std::isfinite(dmin)) continue;
    std::vector<double> w(nodes, 0.0);
    double total = 0.0;
    for (NodeId v = 0; v < nodes; ++v) {
      if (!std::isfinite(d[v])) continue;
      w[v] = std::exp(-decay * (d[v] - dmin));
      total += w[v];
    }
    for (NodeId v = 0; v < nodes; ++v) z[v] += rate * w[v] / total;
  }
  return z;
}

double urgency(const LatencyTriple& t, double deadline, double floor) {
  if (t.succeeding < 0) throw InvalidArgument("succeeding latency must be non-negative");
  double budget = deadline - t.preceding - t.current;
  if (t.succeeding == 0) return budget > 0 ? kInf : floor;
  return std::max(budget / t.succeeding, floor);
}

double qos_score(double load, std::span<const double> urgencies) {
  if (load == 0) return 0.0;
  double sum = 0.0;
  for (double u : urgencies) sum += u;
  return load * sum;
}

int PlacementProblem::pair_bound(std::size_t v, std::size_t m) const {
  double b = big_m(v, m);
  for (std::size_t k = 0; k < demand.cols(); ++k) {
    if (demand(m, k) <= 0) continue;
    b = std::min(b, std::floor(capacity(v, k) / demand(m, k) + 1e-9));
  }
  return static_cast<int>(std::max(0.0, b));
}

void PlacementProblem::validate() const {
  const std::size_t V = nodes(), M = services();
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument("placement problem: " + what);
  };
  need(capacity.rows() == V, "capacity rows");
  need(demand.rows() == M && demand.cols() == capacity.cols(), "demand shape");
  need(unit_cost.size() == M && coverage.size() == M, "per-service vectors");
  need(score.rows() == V && score.cols() == M, "score shape");
  need(load.rows() == V && load.cols() == M, "load shape");
  need(big_m.rows() == V && big_m.cols() == M, "big_m shape");
  need(xi >= 0, "xi must be non-negative");
  need(min_fraction > 0 && min_fraction <= 1, "min_fraction must lie in (0, 1]");
  need(kappa >= 0 && static_cast<std::size_t>(kappa) <= V * M, "kappa out of range");
  for (double q : score.data()) need(std::isfinite(q), "scores must be finite");
  for (int c : coverage) need(c >= 0, "coverage must be non-negative");
}

PlacementProblem build_placement_problem(const Scenario& s) {
  s.validate();
  const auto& cat = s.catalog;
  const auto& g = s.graph;
  const Parameters& prm = s.params;
  MeanLatencyModel model(s);
  PlacementProblem p;
  const std::size_t V = g.node_count(), K = g.resource_count(), M = cat.core().size();
  for (const auto& n : g.nodes()) p.node_ids.push_back(n.id);
  p.capacity = Matrix<double>(V, K);
  for (NodeId v = 0; v < V; ++v)
    for (std::size_t k = 0; k < K; ++k) p.capacity(v, k) = (1.0 - prm.reserve) * g.node(v).capacity[k];
  p.demand = Matrix<double>(M, K);
  p.score = Matrix<double>(V, M);
  p.load = Matrix<double>(V, M);
  p.big_m = Matrix<int>(V, M);
  for (std::size_t c = 0; c < M; ++c) {
    const std::size_t m = cat.core()[c];
    const Microservice& ms = cat.ms(m);
    p.ms_ids.push_back(ms.id);
    for (std::size_t k = 0; k < K; ++k) p.demand(c, k) = ms.demand[k];
    p.unit_cost.push_back(ms.prices.deploy + ms.prices.maintain);
    std::vector<double> z = estimate_load(model, m, prm.decay);
    double total = 0.0;
    for (NodeId v = 0; v < V; ++v) {
      p.load(v, c) = z[v];
      total += z[v];
      std::vector<double> terms;
      const auto& types = cat.types_using(m);
      for (const auto& sub : s.subscriptions) {
        if (!(mean(sub.arrivals) > 0)) continue;
        if (std::find(types.begin(), types.end(), sub.task_type) == types.end()) continue;
        try {
          LatencyTriple t = model.profile(sub.user, sub.task_type, v, m);
          terms.push_back(urgency(t, cat.task_types()[sub.task_type].deadline, prm.urgency_floor));
        } catch (const NoPathError&) {
        }
      }
      p.score(v, c) = std::min(qos_score(z[v], terms), kScoreCap);
      if (prm.big_m) {
        p.big_m(v, c) = *prm.big_m;
      } else {
        double b = 0.0;
        bool any = false;
        for (std::size_t k = 0; k < K; ++k) {
          if (ms.demand[k] <= 0) continue;
          b = std::max(b, std::floor(g.node(v).capacity[k] / ms.demand[k]));
          any = true;
        }
        p.big_m(v, c) = any ? static_cast<int>(std::min(b, 1e6)) : 1000000;
      }
    }
    if (prm.work_coverage) total *= std::max(1.0, ms.workload / mean(ms.rate));
    p.coverage.push_back(static_cast<int>(std::ceil(total - 1e-9)));
  }
  p.xi = prm.xi;
  p.min_fraction = prm.min_fraction;
  p.kappa = prm.kappa ? *prm.kappa : static_cast<int>(M) + 2;
  p.node_limit = prm.node_limit;
  return p;
}

double placement_objective(const PlacementProblem& p, const Matrix<int>& x) {
  double obj = 0.0;
  for (std::size_t v = 0; v < p.nodes(); ++v)
    for (std::size_t m = 0; m < p.services(); ++m)
      obj += x(v, m) * (p.unit_cost[m] - p.xi * p.score(v, m));
  return obj;
}

std::string placement_violation(const PlacementProblem& p, const Matrix<int>& x) {
  const std::size_t V = p.nodes(), M = p.services(), K = p.capacity.cols();
  if (x.rows() != V || x.cols() != M) return "shape";
  int nonzero = 0;
  for (std::size_t v = 0; v < V; ++v) {
    for (std::size_t m = 0; m < M; ++m) {
      if (x(v, m) < 0) return "negative count at " + p.node_ids[v] + "/" + p.ms_ids[m];
      if (x(v, m) > 0) {
        ++nonzero;
        if (x(v, m) > p.big_m(v, m)) return "C4 upper link at " + p.node_ids[v] + "/" + p.ms_ids[m];
        if (x(v, m) < p.min_fraction) return "C5 lower link at " + p.node_ids[v] + "/" + p.ms_ids[m];
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      double used = 0.0;
      for (std::size_t m = 0; m < M; ++m) used += p.demand(m, k) * x(v, m);
      if (used > p.capacity(v, k) + 1e-9) return "C1 capacity at " + p.node_ids[v];
    }
  }
  for (std::size_t m = 0; m < M; ++m) {
    int total = 0;
    for (std::size_t v = 0; v < V; ++v) total += x(v, m);
    if (total < p.coverage[m]) return "C2 coverage of " + p.ms_ids[m];
  }
  if (nonzero < p.kappa) return "C6 diversity floor";
  return "";
}

namespace {

struct Pair {
  std::size_t v, m;
  int bound;
};

lp::Problem relaxation(const PlacementProblem& p, const std::vector<Pair>& pairs,
                       bool with_coverage) {
  lp::Problem lpp;
  const std::size_t n = pairs.size(), K = p.capacity.cols();
  for (const auto& pr : pairs) {
    lpp.cost.push_back(p.unit_cost[pr.m] - p.xi * p.score(pr.v, pr.m));
    lpp.lower.push_back(0.0);
    lpp.upper.push_back(pr.bound);
  }
  for (std::size_t v = 0; v < p.nodes(); ++v) {
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<double> row(n, 0.0);
      bool any = false;
      for (std::size_t j = 0; j < n; ++j) {
        if (pairs[j].v != v) continue;
        row[j] = p.demand(pairs[j].m, k);
        any = any || row[j] > 0;
      }
      if (!any) continue;
      lpp.rows.push_back(std::move(row));
      lpp.sense.push_back(lp::Sense::LessEqual);
      lpp.rhs.push_back(p.capacity(v, k));
    }
  }
  if (with_coverage) {
    for (std::size_t m = 0; m < p.services(); ++m) {
      if (p.coverage[m] <= 0) continue;
      std::vector<double> row(n, 0.0);
      for (std::size_t j = 0; j < n; ++j)
        if (pairs[j].m == m) row[j] = 1.0;
      lpp.rows.push_back(std::move(row));
      lpp.sense.push_back(lp::Sense::GreaterEqual);
      lpp.rhs.push_back(p.coverage[m]);
    }
  }
  return lpp;
}

PlacementSolution to_solution(const PlacementProblem& p, const std::vector<Pair>& pairs,
                              const std::vector<long>& x) {
  PlacementSolution sol;
  sol.instances = Matrix<int>(p.nodes(), p.services(), 0);
  sol.indicator = Matrix<int>(p.nodes(), p.services(), 0);
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    sol.instances(pairs[j].v, pairs[j].m) = static_cast<int>(x[j]);
    sol.indicator(pairs[j].v, pairs[j].m) = x[j] > 0 ? 1 : 0;
  }
  sol.objective = placement_objective(p, sol.instances);
  return sol;
}

}  // namespace

PlacementSolution solve_placement(const PlacementProblem& p) {
  p.validate();
  std::vector<Pair> pairs;
  for (std::size_t m = 0; m < p.services(); ++m)
    for (std::size_t v = 0; v < p.nodes(); ++v) {
      int b = p.pair_bound(v, m);
      if (b >= 1) pairs.push_back({v, m, b});
    }
  for (std::size_t m = 0; m < p.services(); ++m) {
    long room = 0;
    for (const auto& pr : pairs)
      if (pr.m == m) room += pr.bound;
    if (room < p.coverage[m])
      throw InfeasibleError("C2", "coverage of " + p.ms_ids[m] + " needs " +
                                      std::to_string(p.coverage[m]) + " instances but at most " +
                                      std::to_string(room) + " fit");
  }
  if (pairs.size() < static_cast<std::size_t>(p.kappa))
    throw InfeasibleError("C6", "diversity floor " + std::to_string(p.kappa) + " exceeds the " +
                                    std::to_string(pairs.size()) + " feasible pairs");

  // Dropping coverage and diversity separates the program by node. When the
  // separated optimum happens to satisfy them it is optimal for the whole.
  {
    std::vector<long> joined(pairs.size(), 0);
    bool ok = true;
    std::size_t explored = 0;
    for (std::size_t v = 0; v < p.nodes() && ok; ++v) {
      std::vector<Pair> local;
      std::vector<std::size_t> where;
      for (std::size_t j = 0; j < pairs.size(); ++j)
        if (pairs[j].v == v) {
          local.push_back(pairs[j]);
          where.push_back(j);
        }
      if (local.empty()) continue;
      lp::IntegerProblem ip{relaxation(p, local, false), 0, p.node_limit};
      lp::IntegerSolution r = lp::solve_integer(ip);
      explored += r.nodes;
      if (r.status != lp::SearchStatus::Optimal) {
        ok = false;
        break;
      }
      for (std::size_t i = 0; i < local.size(); ++i) joined[where[i]] = r.x[i];
    }
    if (ok) {
      PlacementSolution sol = to_solution(p, pairs, joined);
      sol.nodes_explored = explored;
      if (placement_violation(p, sol.instances).empty()) {
        sol.optimal = true;
        return sol;
      }
    }
  }

  lp::IntegerProblem ip{relaxation(p, pairs, true), static_cast<std::size_t>(p.kappa),
                        p.node_limit};
  lp::IntegerSolution r = lp::solve_integer(ip);
  if (r.x.empty()) {
    if (r.status == lp::SearchStatus::NodeLimit)
      throw InfeasibleError("search", "node limit reached before any feasible placement");
    throw InfeasibleError("C1", "joint node capacity cannot satisfy coverage and diversity");
  }
  PlacementSolution sol = to_solution(p, pairs, r.x);
  sol.optimal = r.status == lp::SearchStatus::Optimal;
  sol.nodes_explored = r.nodes;
  return sol;
}

}  // namespace edgefm
