#pragma once

// Small hand-built scenarios shared by the test suites.

#include <string>
#include <vector>

#include "edgefm/scenario.hpp"

namespace fixture {

using namespace edgefm;

inline Microservice core_ms(std::string id, double workload, double rate,
                            std::vector<double> demand = {2, 2}, double output = 0.5) {
  Microservice m;
  m.id = std::move(id);
  m.tier = Tier::Core;
  m.demand = std::move(demand);
  m.workload = workload;
  m.output = output;
  m.rate = DistributionSpec::constant(rate);
  m.prices = {20.0, 4.0, 0.0};
  return m;
}

inline Microservice light_ms(std::string id, double workload, DistributionSpec rate,
                             std::vector<double> demand = {1, 1}, double output = 0.5) {
  Microservice m;
  m.id = std::move(id);
  m.tier = Tier::Light;
  m.demand = std::move(demand);
  m.workload = workload;
  m.output = output;
  m.rate = rate;
  m.prices = {4.0, 1.0, 0.5};
  return m;
}

inline TaskType task(std::string id, std::vector<std::string> stages,
                     std::vector<std::pair<std::string, std::string>> edges, double payload,
                     double deadline) {
  return TaskType{std::move(id), std::move(stages), std::move(edges), payload, deadline};
}

// A line of n nodes with unit-bandwidth, zero-distance links; the first node
// is an edge device hosting one user with constant SNR 3 (rate b * 2).
inline NetworkGraph line_graph(std::size_t n, std::vector<double> capacity = {64, 64},
                               double link_bandwidth = 1.0) {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < n; ++i)
    nodes.push_back({"n" + std::to_string(i), i == 0 ? NodeKind::EdgeDevice : NodeKind::EdgeServer,
                     capacity});
  std::vector<Link> links;
  for (std::size_t i = 0; i + 1 < n; ++i) links.push_back({i, i + 1, link_bandwidth, 0.0});
  std::vector<User> users{{"u1", 0, 1.0, DistributionSpec::constant(3.0)}};
  return NetworkGraph({"cpu", "gpu"}, std::move(nodes), std::move(links), std::move(users), 200.0);
}

// Two nodes, one core and two light services, two task types:
//   a: la -> c1 -> lb     b: c1 -> lb
inline Scenario two_node_scenario(double arrivals = 0.4) {
  Scenario s;
  s.graph = line_graph(2, {32, 32}, 0.5);
  s.catalog = Catalog({core_ms("c1", 4.0, 16.0), light_ms("la", 1.0, DistributionSpec::gamma(2, 5)),
                       light_ms("lb", 0.5, DistributionSpec::gamma(1.5, 8))},
                      {task("a", {"la", "c1", "lb"}, {{"la", "c1"}, {"c1", "lb"}}, 1.0, 60.0),
                       task("b", {"c1", "lb"}, {{"c1", "lb"}}, 2.0, 40.0)},
                      2);
  s.subscriptions = {{0, 0, DistributionSpec::poisson(arrivals)},
                     {0, 1, DistributionSpec::poisson(arrivals)}};
  s.params.kappa = 1;
  return s;
}

// One node, a single core stage: every task runs alone on its own instance.
inline Scenario single_stage_scenario(double arrivals) {
  Scenario s;
  s.graph = line_graph(1);
  s.catalog = Catalog({core_ms("c1", 2.0, 8.0)}, {task("t", {"c1"}, {}, 2.0, 50.0)}, 2);
  s.subscriptions = {{0, 0, DistributionSpec::constant(arrivals)}};
  s.params.kappa = 1;
  return s;
}

}  // namespace fixture
