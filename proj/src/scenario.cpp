#include "edgefm/scenario.hpp"

#include <cmath>

#include "edgefm/error.hpp"

namespace edgefm {

void Parameters::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("parameter ") + what);
  };
  need(xi >= 0, "xi must be non-negative");
  need(decay >= 0, "decay must be non-negative");
  need(!big_m || *big_m >= 1, "big_m must be at least 1");
  need(min_fraction > 0 && min_fraction <= 1, "min_fraction must lie in (0, 1]");
  need(!kappa || *kappa >= 0, "kappa must be non-negative");
  need(reserve >= 0 && reserve < 1, "reserve must lie in [0, 1)");
  need(node_limit >= 1, "node_limit must be positive");
  need(zeta > 0, "zeta must be positive");
  need(eta >= 0, "eta must be non-negative");
  need(phi > 0, "phi must be positive");
  need(epsilon > 0 && epsilon <= 1, "epsilon must lie in (0, 1]");
  need(y_max >= 1, "y_max must be at least 1");
  need(expiry_factor >= 1, "expiry_factor must be at least 1");
  need(ga.population >= 2, "ga.population must be at least 2");
  need(ga.generations >= 1, "ga.generations must be positive");
  need(ga.mutation >= 0 && ga.mutation <= 1, "ga.mutation must lie in [0, 1]");
  need(ga.crossover >= 0 && ga.crossover <= 1, "ga.crossover must lie in [0, 1]");
  need(ga.lambda >= 0, "ga.lambda must be non-negative");
  need(ga.tournament >= 1, "ga.tournament must be positive");
  need(ga.gene_max >= 0, "ga.gene_max must be non-negative");
  need(ga.horizon_fraction > 0 && ga.horizon_fraction <= 1,
       "ga.horizon_fraction must lie in (0, 1]");
}

void Scenario::validate() const {
  params.validate();
  if (catalog.microservices().empty()) throw InvalidArgument("catalog is empty");
  if (graph.node_count() == 0) throw InvalidArgument("network has no nodes");
  if (!graph.connected()) throw InvalidArgument("network is not connected");
  for (const auto& m : catalog.microservices())
    if (m.demand.size() != graph.resource_count())
      throw InvalidArgument("microservice " + m.id + " demand does not match resource types");
  for (const auto& s : subscriptions) {
    if (s.user >= graph.users().size()) throw InvalidArgument("subscription for unknown user");
    if (s.task_type >= catalog.task_types().size())
      throw InvalidArgument("subscription for unknown task type");
    if (s.arrivals.family != Family::Poisson && s.arrivals.family != Family::Constant)
      throw InvalidArgument("arrivals must be poisson or constant");
    s.arrivals.validate();
    if (s.arrivals.first < 0) throw InvalidArgument("negative arrival rate");
  }
}

Scenario Scenario::scaled(double factor) const {
  Scenario s = *this;
  for (auto& sub : s.subscriptions) sub.arrivals = scale_mean(sub.arrivals, factor);
  return s;
}

double Scenario::type_rate(std::size_t n) const {
  double r = 0.0;
  for (const auto& s : subscriptions)
    if (s.task_type == n) r += mean(s.arrivals);
  return r;
}

}  // namespace edgefm
