#include "edgefm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "edgefm/error.hpp"
#include "edgefm/placement.hpp"
#include "edgefm/sim.hpp"

namespace edgefm {

std::string to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::Proposed: return "proposed";
    case StrategyKind::Lbrr: return "lbrr";
    case StrategyKind::Ga: return "ga";
    case StrategyKind::PropAvg: return "prop-avg";
  }
  return "?";
}

StrategyKind strategy_from_string(const std::string& name) {
  if (name == "proposed") return StrategyKind::Proposed;
  if (name == "lbrr") return StrategyKind::Lbrr;
  if (name == "ga") return StrategyKind::Ga;
  if (name == "prop-avg") return StrategyKind::PropAvg;
  throw InvalidArgument("unknown strategy '" + name + "'");
}

std::optional<NodeId> least_utilized_node(const NetworkGraph& g, const Matrix<double>& used,
                                          const std::vector<double>& demand) {
  std::optional<NodeId> best;
  double best_util = 0.0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const auto& cap = g.node(v).capacity;
    bool fits = true;
    double util = 0.0;
    for (std::size_t k = 0; k < cap.size(); ++k) {
      if (used(v, k) + demand[k] > cap[k] + 1e-9) fits = false;
      if (cap[k] > 0) util = std::max(util, used(v, k) / cap[k]);
    }
    if (!fits) continue;
    if (!best || util < best_util - 1e-12) {
      best = v;
      best_util = util;
    }
  }
  return best;
}

Deployment lbrr_plan(const Scenario& s, std::vector<std::vector<NodeId>>* light_order) {
  const auto& cat = s.catalog;
  const std::size_t V = s.graph.node_count();
  MeanLatencyModel model(s);
  Matrix<double> used(V, s.graph.resource_count(), 0.0);
  if (light_order) light_order->assign(cat.light().size(), {});
  Deployment d{Matrix<int>(V, cat.core().size(), 0),
               Matrix<int>(V, cat.light().size(), 0)};
  auto place = [&](std::size_t m, Matrix<int>& x) {
    std::vector<double> z = estimate_load(model, m, s.params.decay);
    double total = 0.0;
    for (double v : z) total += v;
    const int want = static_cast<int>(std::ceil(total - 1e-9));
    const auto& demand = cat.ms(m).demand;
    for (int i = 0; i < want; ++i) {
      auto v = least_utilized_node(s.graph, used, demand);
      if (!v) throw InfeasibleError("capacity", "no node can host another " + cat.ms(m).id);
      x(*v, cat.tier_position(m))++;
      if (light_order && cat.ms(m).tier == Tier::Light)
        (*light_order)[cat.tier_position(m)].push_back(*v);
      for (std::size_t k = 0; k < demand.size(); ++k) used(*v, k) += demand[k];
    }
  };
  for (std::size_t m : cat.core()) place(m, d.core);
  for (std::size_t m : cat.light()) place(m, *d.light);
  return d;
}

Deployment LbrrStrategy::deploy(const Scenario& s, std::uint64_t, std::size_t) {
  Deployment d = lbrr_plan(s, &ring_);
  light_ = *d.light;
  y_max_ = s.params.y_max;
  core_next_.assign(s.catalog.core().size(), 0);
  light_next_.assign(s.catalog.light().size(), 0);
  return d;
}

std::size_t LbrrStrategy::dispatch_core(const CoreQuery& q) {
  const auto& c = *q.candidates;
  if (c.empty()) throw InvalidArgument("no core candidates");
  std::size_t& next = core_next_.at(q.core);
  // Candidates are listed in instance order; rotate from the pointer.
  std::size_t first = 0;
  while (first < c.size() && c[first].instance < next) ++first;
  std::size_t pick = c.size();
  for (std::size_t k = 0; k < c.size(); ++k) {
    std::size_t i = (first + k) % c.size();
    if (!c[i].busy) {
      pick = i;
      break;
    }
  }
  if (pick == c.size()) pick = first % c.size();
  next = c[pick].instance + 1;
  return pick;
}

LightPlan LbrrStrategy::plan_light(const ControllerInput& in, std::size_t) {
  LightPlan plan;
  plan.instances = light_;
  plan.assignment.assign(in.requests.size(), std::nullopt);
  std::vector<std::vector<int>> cohort(ring_.size());
  for (std::size_t l = 0; l < ring_.size(); ++l) cohort[l].assign(ring_[l].size(), 0);
  for (std::size_t j = 0; j < in.requests.size(); ++j) {
    const LightRequest& r = in.requests[j];
    const auto& ring = ring_.at(r.ms);
    if (ring.empty()) continue;
    std::size_t& next = light_next_[r.ms];
    for (std::size_t k = 0; k < ring.size(); ++k) {
      std::size_t i = (next + k) % ring.size();
      ++plan.counters.next_hop_evaluations;
      if (cohort[r.ms][i] >= y_max_ || !std::isfinite(r.network[ring[i]])) continue;
      cohort[r.ms][i]++;
      plan.assignment[j] = ring[i];
      next = i + 1;
      break;
    }
  }
  return plan;
}

StaticPlanStrategy::StaticPlanStrategy(std::string name, Deployment plan)
    : name_(std::move(name)), plan_(std::move(plan)) {}

Deployment StaticPlanStrategy::deploy(const Scenario& s, std::uint64_t, std::size_t) {
  delays_ = DelayTable(s.catalog, DelayModel::MeanValue, s.params.epsilon, s.params.y_max);
  if (!plan_.light) plan_.light = Matrix<int>(s.graph.node_count(), s.catalog.light().size(), 0);
  return plan_;
}

std::size_t StaticPlanStrategy::dispatch_core(const CoreQuery& q) {
  return earliest_finish(*q.candidates);
}

LightPlan StaticPlanStrategy::plan_light(const ControllerInput& in, std::size_t) {
  LightPlan plan;
  plan.instances = *plan_.light;
  plan.assignment = route_requests(in, delays_, plan.instances);
  return plan;
}

namespace {

int tournament(const std::vector<double>& fit, int size, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, fit.size() - 1);
  std::size_t best = pick(rng);
  for (int i = 1; i < size; ++i) {
    std::size_t c = pick(rng);
    if (fit[c] < fit[best] || (fit[c] == fit[best] && c < best)) best = c;
  }
  return static_cast<int>(best);
}

}  // namespace

GeneticResult genetic_search(const std::vector<int>& upper, const FitnessFn& fitness,
                             const RepairFn& repair, const GaParams& params, std::uint64_t seed,
                             std::vector<std::vector<int>> initial) {
  if (params.population < 1 || params.generations < 0 || params.tournament < 1)
    throw InvalidArgument("GA parameters must be positive");
  if (params.mutation < 0 || params.mutation > 1 || params.crossover < 0 || params.crossover > 1)
    throw InvalidArgument("GA rates must lie in [0,1]");
  const std::size_t L = upper.size();
  SeededStream stream(seed, "genetic-search");
  auto& rng = stream.engine();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GeneticResult out;
  std::map<std::vector<int>, double> cache;
  auto score = [&](const std::vector<int>& g) {
    auto it = cache.find(g);
    if (it != cache.end()) return it->second;
    double f = fitness(g);
    ++out.evaluations;
    cache.emplace(g, f);
    return f;
  };
  auto random_gene = [&](std::size_t i) {
    return std::uniform_int_distribution<int>(0, upper[i])(rng);
  };

  std::vector<std::vector<int>> pop = std::move(initial);
  if (pop.size() > static_cast<std::size_t>(params.population))
    pop.resize(static_cast<std::size_t>(params.population));
  for (auto& g : pop) {
    if (g.size() != L) throw InvalidArgument("initial genome has the wrong length");
    for (std::size_t i = 0; i < L; ++i) g[i] = std::clamp(g[i], 0, upper[i]);
    if (repair) repair(g);
  }
  while (pop.size() < static_cast<std::size_t>(params.population)) {
    std::vector<int> g(L);
    for (std::size_t i = 0; i < L; ++i) g[i] = random_gene(i);
    if (repair) repair(g);
    pop.push_back(std::move(g));
  }
  std::vector<double> fit(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) fit[i] = score(pop[i]);
  out.initial_fitness = fit;

  auto best_index = [&] {
    return static_cast<std::size_t>(std::min_element(fit.begin(), fit.end()) - fit.begin());
  };
  out.best_by_generation.push_back(fit[best_index()]);

  for (int gen = 0; gen < params.generations; ++gen) {
    std::vector<std::vector<int>> next{pop[best_index()]};
    while (next.size() < pop.size()) {
      const auto& a = pop[tournament(fit, params.tournament, rng)];
      const auto& b = pop[tournament(fit, params.tournament, rng)];
      std::vector<int> child = a;
      if (L > 1 && unit(rng) < params.crossover) {
        std::size_t cut = std::uniform_int_distribution<std::size_t>(1, L - 1)(rng);
        std::copy(b.begin() + static_cast<std::ptrdiff_t>(cut), b.end(),
                  child.begin() + static_cast<std::ptrdiff_t>(cut));
      }
      for (std::size_t i = 0; i < L; ++i)
        if (unit(rng) < params.mutation) child[i] = random_gene(i);
      if (repair) repair(child);
      next.push_back(std::move(child));
    }
    pop = std::move(next);
    for (std::size_t i = 0; i < pop.size(); ++i) fit[i] = score(pop[i]);
    out.best_by_generation.push_back(fit[best_index()]);
  }
  std::size_t b = best_index();
  out.genome = pop[b];
  out.fitness = fit[b];
  return out;
}

std::vector<int> encode_plan(const Deployment& d) {
  std::vector<int> g(d.core.data().begin(), d.core.data().end());
  if (d.light) g.insert(g.end(), d.light->data().begin(), d.light->data().end());
  return g;
}

Deployment decode_plan(const Scenario& s, const std::vector<int>& genome) {
  const std::size_t V = s.graph.node_count();
  const std::size_t C = s.catalog.core().size();
  const std::size_t L = s.catalog.light().size();
  if (genome.size() != V * (C + L)) throw InvalidArgument("genome length does not match scenario");
  Deployment d{Matrix<int>(V, C, 0), Matrix<int>(V, L, 0)};
  std::size_t i = 0;
  for (NodeId v = 0; v < V; ++v)
    for (std::size_t c = 0; c < C; ++c) d.core(v, c) = genome[i++];
  for (NodeId v = 0; v < V; ++v)
    for (std::size_t l = 0; l < L; ++l) (*d.light)(v, l) = genome[i++];
  return d;
}

namespace {

// Global microservice index of each gene position within one node block.
std::vector<std::size_t> gene_services(const Scenario& s) {
  std::vector<std::size_t> out(s.catalog.core());
  out.insert(out.end(), s.catalog.light().begin(), s.catalog.light().end());
  return out;
}

std::size_t gene_at(const Scenario& s, NodeId v, std::size_t block_pos) {
  const std::size_t V = s.graph.node_count();
  const std::size_t C = s.catalog.core().size();
  const std::size_t L = s.catalog.light().size();
  return block_pos < C ? v * C + block_pos : V * C + v * L + (block_pos - C);
}

}  // namespace

std::vector<int> gene_bounds(const Scenario& s, int gene_max) {
  const std::size_t V = s.graph.node_count();
  auto services = gene_services(s);
  std::vector<int> upper(V * services.size(), 0);
  for (NodeId v = 0; v < V; ++v) {
    const auto& cap = s.graph.node(v).capacity;
    for (std::size_t p = 0; p < services.size(); ++p) {
      const auto& demand = s.catalog.ms(services[p]).demand;
      int fit = gene_max;
      for (std::size_t k = 0; k < cap.size(); ++k)
        if (demand[k] > 0) fit = std::min(fit, static_cast<int>(std::floor(cap[k] / demand[k] + 1e-9)));
      upper[gene_at(s, v, p)] = std::max(fit, 0);
    }
  }
  return upper;
}

void repair_plan(const Scenario& s, std::vector<int>& genome) {
  auto services = gene_services(s);
  for (NodeId v = 0; v < s.graph.node_count(); ++v) {
    const auto& cap = s.graph.node(v).capacity;
    while (true) {
      bool over = false;
      for (std::size_t k = 0; k < cap.size() && !over; ++k) {
        double used = 0.0;
        for (std::size_t p = 0; p < services.size(); ++p)
          used += genome[gene_at(s, v, p)] * s.catalog.ms(services[p]).demand[k];
        over = used > cap[k] + 1e-9;
      }
      if (!over) break;
      std::size_t worst = 0;
      for (std::size_t p = 1; p < services.size(); ++p)
        if (genome[gene_at(s, v, p)] > genome[gene_at(s, v, worst)]) worst = p;
      genome[gene_at(s, v, worst)]--;
    }
  }
}

Deployment GaStrategy::deploy(const Scenario& s, std::uint64_t seed, std::size_t horizon) {
  const GaParams& prm = s.params.ga;
  if (prm.lambda < 0) throw InvalidArgument("GA lambda must be non-negative");
  const std::size_t short_horizon =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::round(prm.horizon_fraction * horizon)));
  const std::uint64_t eval_seed = splitmix64(seed ^ 0x9a5eedULL);
  FitnessFn fitness = [&](const std::vector<int>& g) {
    StaticPlanStrategy candidate("ga", decode_plan(s, g));
    TrialReport r = run_trial(s, candidate, eval_seed, TrialOptions{short_horizon, 1.0, false});
    double violation = r.arrivals == 0 ? 0.0 : 1.0 - r.on_time_rate();
    return r.cost_total() + prm.lambda * violation * static_cast<double>(short_horizon);
  };
  RepairFn repair = [&](std::vector<int>& g) { repair_plan(s, g); };
  std::vector<int> upper = gene_bounds(s, prm.gene_max);
  std::vector<std::vector<int>> initial{std::vector<int>(upper.size(), 0)};
  result_ = genetic_search(upper, fitness, repair, prm, seed, std::move(initial));
  plan_ = std::make_unique<StaticPlanStrategy>("ga", decode_plan(s, result_.genome));
  return plan_->deploy(s, seed, horizon);
}

std::size_t GaStrategy::dispatch_core(const CoreQuery& q) { return plan_->dispatch_core(q); }

LightPlan GaStrategy::plan_light(const ControllerInput& in, std::size_t slot) {
  return plan_->plan_light(in, slot);
}

std::unique_ptr<Strategy> make_prop_avg() {
  return std::make_unique<TwoTierStrategy>(DelayModel::MeanValue, "prop-avg");
}

std::unique_ptr<Strategy> make_strategy(StrategyKind k) {
  switch (k) {
    case StrategyKind::Proposed: return make_proposed();
    case StrategyKind::Lbrr: return std::make_unique<LbrrStrategy>();
    case StrategyKind::Ga: return std::make_unique<GaStrategy>();
    case StrategyKind::PropAvg: return make_prop_avg();
  }
  throw InvalidArgument("unknown strategy kind");
}

std::unique_ptr<Strategy> make_strategy(const std::string& name) {
  return make_strategy(strategy_from_string(name));
}

}  // namespace edgefm
