#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "edgefm/catalog.hpp"
#include "edgefm/error.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace edgefm;

namespace {

TaskType graph(std::vector<std::string> stages, std::vector<std::pair<std::string, std::string>> e) {
  return fixture::task("t", std::move(stages), std::move(e), 1.0, 50.0);
}

bool is_topological(const TaskType& t, const std::vector<std::string>& order) {
  for (const auto& [a, b] : t.edges) {
    auto pa = std::find(order.begin(), order.end(), a);
    auto pb = std::find(order.begin(), order.end(), b);
    if (pa == order.end() || pb == order.end() || pa > pb) return false;
  }
  return true;
}

std::string first_violation(const TaskType& t) {
  try {
    validate_inverse_tree(t);
  } catch (const StructuralError& e) {
    return e.stage();
  }
  return "";
}

}  // namespace

TEST_SUITE("catalog") {
  TEST_CASE("inverse tree validation") {
    CHECK(first_violation(graph({"a"}, {})).empty());
    CHECK(first_violation(graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}})).empty());
    CHECK(first_violation(graph({"a", "b", "c", "d"},
                                {{"a", "b"}, {"a", "c"}, {"b", "d"}, {"c", "d"}})) == "a");
    CHECK_FALSE(first_violation(graph({"a", "b"}, {{"a", "b"}, {"b", "a"}})).empty());
    CHECK_FALSE(first_violation(graph({"a", "b"}, {})).empty());
  }

  TEST_CASE("topological order examples") {
    CHECK(topological_stages(graph({"c", "b", "a"}, {{"a", "b"}, {"b", "c"}})) ==
          std::vector<std::string>{"a", "b", "c"});
    CHECK(topological_stages(graph({"c", "b", "a"}, {{"a", "c"}, {"b", "c"}})) ==
          std::vector<std::string>{"a", "b", "c"});
  }

  TEST_CASE("two-level inverse tree order is one of all valid orders") {
    TaskType t = graph({"l1", "l2", "l3", "c1", "c2", "c3"},
                       {{"l1", "c1"}, {"l2", "c1"}, {"l3", "c2"}, {"c1", "c3"}, {"c2", "c3"}});
    std::vector<std::string> perm = t.stages;
    std::sort(perm.begin(), perm.end());
    std::set<std::vector<std::string>> valid;
    do {
      if (is_topological(t, perm)) valid.insert(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    auto order = topological_stages(t);
    CHECK(valid.count(order) == 1);
    CHECK(order.size() == t.stages.size());
  }

  TEST_CASE("descendants examples") {
    TaskType chain = graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
    CHECK(descendants(chain, "c").empty());
    CHECK(descendants(chain, "a") == std::vector<std::string>{"b", "c"});
    CHECK_THROWS_AS(descendants(chain, "z"), InvalidArgument);
  }

  TEST_CASE("descendants match edge relaxation on random trees") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
      std::size_t n = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
      TaskType t = oracle::random_inverse_tree(n, rng);
      validate_inverse_tree(t);
      auto order = topological_stages(t);
      CHECK(is_topological(t, order));
      CHECK(std::is_permutation(order.begin(), order.end(), t.stages.begin()));
      for (const auto& s : t.stages) {
        auto d = descendants(t, s);
        std::vector<std::string> sorted = d;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == oracle::reachable(t, s));
        CHECK(std::find(d.begin(), d.end(), s) == d.end());
        // single outgoing edge: descendants form one chain to the sink
        for (std::size_t i = 0; i + 1 < d.size(); ++i)
          CHECK(std::find(t.edges.begin(), t.edges.end(), std::pair{d[i], d[i + 1]}) !=
                t.edges.end());
      }
      CHECK(descendants(t, order.back()).empty());
    }
  }

  TEST_CASE("catalog indexes tiers and shared services") {
    Scenario s = fixture::two_node_scenario();
    const Catalog& c = s.catalog;
    CHECK(c.core() == std::vector<std::size_t>{0});
    CHECK(c.light() == std::vector<std::size_t>{1, 2});
    CHECK(c.tier_position(2) == 1);
    CHECK(c.types_using(c.ms_index("lb")) == std::vector<std::size_t>{0, 1});
    const TaskDag& d = c.dag(0);
    CHECK(d.size() == 3);
    CHECK(d.ms(d.sink()) == c.ms_index("lb"));
    CHECK(d.stage_of(c.ms_index("c1")) != kNoStage);
    CHECK(c.dag(1).stage_of(c.ms_index("la")) == kNoStage);
  }

  TEST_CASE("catalog rejects malformed services and types") {
    using fixture::core_ms;
    using fixture::light_ms;
    auto make = [](std::vector<Microservice> ms, std::vector<TaskType> t) {
      return Catalog(std::move(ms), std::move(t), 2);
    };
    Microservice zero = core_ms("c", 0.0, 1.0);
    CHECK_THROWS_AS(make({zero}, {}), InvalidArgument);
    Microservice random_core = core_ms("c", 1.0, 1.0);
    random_core.rate = DistributionSpec::gamma(1, 1);
    CHECK_THROWS_AS(make({random_core}, {}), InvalidArgument);
    CHECK_THROWS_AS(make({core_ms("c", 1, 1), core_ms("c", 1, 1)}, {}), InvalidArgument);
    CHECK_THROWS_AS(make({core_ms("c", 1, 1, {1})}, {}), InvalidArgument);
    CHECK_THROWS_AS(make({core_ms("c", 1, 1)}, {fixture::task("t", {"x"}, {}, 1, 10)}),
                    StructuralError);
    CHECK_THROWS_AS(make({core_ms("c", 1, 1)}, {fixture::task("t", {"c"}, {}, 1, 0)}),
                    InvalidArgument);
    CHECK_THROWS_AS(make({core_ms("c", 1, 1), light_ms("l", 1, DistributionSpec::gamma(1, 1))},
                         {fixture::task("t", {"c", "l"}, {{"c", "l"}, {"l", "c"}}, 1, 10)}),
                    StructuralError);
  }

  TEST_CASE("tier names round-trip") {
    CHECK(tier_from_string(to_string(Tier::Core)) == Tier::Core);
    CHECK(tier_from_string(to_string(Tier::Light)) == Tier::Light);
    CHECK_THROWS_AS(tier_from_string("medium"), InvalidArgument);
  }
}
