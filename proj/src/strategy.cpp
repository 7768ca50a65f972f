#include "edgefm/strategy.hpp"

#include "edgefm/error.hpp"
#include "edgefm/placement.hpp"

namespace edgefm {

std::size_t earliest_finish(const std::vector<CoreCandidate>& c) {
  if (c.empty()) throw InvalidArgument("no core candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i].finish < c[best].finish - 1e-12) best = i;
  }
  return best;
}

TwoTierStrategy::TwoTierStrategy(DelayModel model, std::string name)
    : model_(model), name_(std::move(name)) {}

Deployment TwoTierStrategy::deploy(const Scenario& s, std::uint64_t, std::size_t) {
  delays_ = DelayTable(s.catalog, model_, s.params.epsilon, s.params.y_max);
  PlacementSolution sol = solve_placement(build_placement_problem(s));
  return Deployment{sol.instances, std::nullopt};
}

std::size_t TwoTierStrategy::dispatch_core(const CoreQuery& q) {
  return earliest_finish(*q.candidates);
}

LightPlan TwoTierStrategy::plan_light(const ControllerInput& in, std::size_t) {
  SlotDecision d = greedy_slot(in, delays_);
  return LightPlan{std::move(d.instances), std::move(d.assignment), d.counters,
                   std::move(d.commits)};
}

std::unique_ptr<Strategy> make_proposed() {
  return std::make_unique<TwoTierStrategy>(DelayModel::EffectiveCapacity, "proposed");
}

}  // namespace edgefm
