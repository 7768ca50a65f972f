#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "edgefm/scenario.hpp"
#include "edgefm/strategy.hpp"

namespace edgefm {

enum class StrategyKind { Proposed, Lbrr, Ga, PropAvg };

std::string to_string(StrategyKind k);
StrategyKind strategy_from_string(const std::string& name);

// Node with the lowest bottleneck utilization (max over resources of
// used/capacity) that still fits `demand`; ties go to the lower index.
std::optional<NodeId> least_utilized_node(const NetworkGraph& g, const Matrix<double>& used,
                                          const std::vector<double>& demand);

// Static plan placing ceil(sum_v z~) instances per microservice, core tier
// first, one at a time on the least utilized node. Throws InfeasibleError
// ("capacity") when an instance fits nowhere. light_order receives, per light
// microservice, the host node of each instance in placement order.
Deployment lbrr_plan(const Scenario& s, std::vector<std::vector<NodeId>>* light_order = nullptr);

class LbrrStrategy : public Strategy {
 public:
  std::string name() const override { return "lbrr"; }
  Deployment deploy(const Scenario& s, std::uint64_t seed, std::size_t horizon) override;
  // Next instance in round-robin order that is idle, else the next one.
  std::size_t dispatch_core(const CoreQuery& q) override;
  // Requests in arrival order, each to the next instance whose cohort is below
  // the parallelism cap this slot.
  LightPlan plan_light(const ControllerInput& in, std::size_t slot) override;

 private:
  Matrix<int> light_;
  int y_max_ = 16;
  std::vector<std::size_t> core_next_;
  std::vector<std::vector<NodeId>> ring_;  // per light ms, placement order
  std::vector<std::size_t> light_next_;
};

// Fixed plan for both tiers; light tasks routed greedily on mean delays.
class StaticPlanStrategy : public Strategy {
 public:
  StaticPlanStrategy(std::string name, Deployment plan);
  std::string name() const override { return name_; }
  Deployment deploy(const Scenario& s, std::uint64_t seed, std::size_t horizon) override;
  std::size_t dispatch_core(const CoreQuery& q) override;
  LightPlan plan_light(const ControllerInput& in, std::size_t slot) override;

 private:
  std::string name_;
  Deployment plan_;
  DelayTable delays_;
};

struct GeneticResult {
  std::vector<int> genome;
  double fitness = 0.0;
  std::vector<double> best_by_generation;  // entry 0 is the initial population
  std::vector<double> initial_fitness;
  std::size_t evaluations = 0;  // distinct genomes scored
};

using FitnessFn = std::function<double(const std::vector<int>&)>;
using RepairFn = std::function<void(std::vector<int>&)>;

// Minimizes fitness over integer genomes with gene i in [0, upper[i]].
// Tournament selection, one-point crossover, per-gene uniform mutation and
// elitism of one. `initial` seeds the first population, the rest is random.
GeneticResult genetic_search(const std::vector<int>& upper, const FitnessFn& fitness,
                             const RepairFn& repair, const GaParams& params, std::uint64_t seed,
                             std::vector<std::vector<int>> initial = {});

// Genome layout: X^cr row-major (node x core), then X^lt (node x light).
std::vector<int> encode_plan(const Deployment& d);
Deployment decode_plan(const Scenario& s, const std::vector<int>& genome);
std::vector<int> gene_bounds(const Scenario& s, int gene_max);
// Decrements the largest gene of each over-committed node until it fits.
void repair_plan(const Scenario& s, std::vector<int>& genome);

class GaStrategy : public Strategy {
 public:
  std::string name() const override { return "ga"; }
  // Fitness = cost + lambda * violation rate * horizon of a short seeded run.
  Deployment deploy(const Scenario& s, std::uint64_t seed, std::size_t horizon) override;
  std::size_t dispatch_core(const CoreQuery& q) override;
  LightPlan plan_light(const ControllerInput& in, std::size_t slot) override;
  const GeneticResult& result() const noexcept { return result_; }

 private:
  GeneticResult result_;
  std::unique_ptr<StaticPlanStrategy> plan_;
};

std::unique_ptr<Strategy> make_prop_avg();
std::unique_ptr<Strategy> make_strategy(StrategyKind k);
std::unique_ptr<Strategy> make_strategy(const std::string& name);

}  // namespace edgefm
