#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "edgefm/cost.hpp"
#include "edgefm/error.hpp"

using namespace edgefm;

namespace {

const std::vector<Prices> kCore{{20.0, 4.0, 0.0}};
const std::vector<Prices> kLight{{4.0, 1.0, 0.5}};

std::vector<Matrix<int>> series(std::initializer_list<int> xs) {
  std::vector<Matrix<int>> s;
  for (int x : xs) s.emplace_back(1, 1, x);
  return s;
}

}  // namespace

TEST_SUITE("cost") {
  TEST_CASE("core cost examples") {
    CHECK(core_cost(Matrix<int>(1, 1, 0), 10, kCore) == 0.0);
    CHECK(core_cost(Matrix<int>(1, 1, 1), 10, kCore) == doctest::Approx(60.0));
    CHECK(core_cost(Matrix<int>(1, 1, 2), 10, kCore) ==
          doctest::Approx(2 * core_cost(Matrix<int>(1, 1, 1), 10, kCore)));
    CHECK_THROWS_AS(core_cost(Matrix<int>(1, 1, -1), 10, kCore), InvalidArgument);
  }

  TEST_CASE("light cost examples") {
    CHECK(light_cost(series({0, 0, 0}), kLight) == 0.0);
    CHECK(light_cost(series({1, 1, 1}), kLight) == doctest::Approx(8.5));
    CHECK(light_cost(series({0, 2, 1}), kLight) == doctest::Approx(12.5));
  }

  TEST_CASE("parallelism charged per level in the alternative mode") {
    auto x = series({1, 2});
    std::vector<Matrix<int>> y{Matrix<int>(1, 1, 3), Matrix<int>(1, 1, 1)};
    // deploy 4 + 4, maintain 1 + 2, parallelism 0.5 * (3*1 + 1*2)
    CHECK(light_cost(x, kLight, ParallelismCostMode::PerSlotTimesY, y) == doctest::Approx(13.5));
    CHECK_THROWS_AS(light_cost(x, kLight, ParallelismCostMode::PerSlotTimesY), InvalidArgument);
    CHECK(parallelism_mode_from_string(to_string(ParallelismCostMode::PerSlotTimesY)) ==
          ParallelismCostMode::PerSlotTimesY);
    CHECK(parallelism_mode_from_string("per_instance") == ParallelismCostMode::PerInstance);
  }

  TEST_CASE("costs are monotone in every count") {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> u(0, 4);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<Matrix<int>> s;
      for (int t = 0; t < 5; ++t) {
        Matrix<int> m(2, 1);
        for (int& x : m.data()) x = u(rng);
        s.push_back(m);
      }
      double base = light_cost(s, kLight);
      auto more = s;
      int t = u(rng);
      more[t](u(rng) % 2, 0) += 1;
      // an extra instance pays maintenance and parallelism but may spare one
      // deployment in the next slot
      CHECK(light_cost(more, kLight) >= base + 1.5 - 4.0 - 1e-12);
      auto last = s;
      last[4](u(rng) % 2, 0) += 1;
      CHECK(light_cost(last, kLight) >= base + 1.5 - 1e-12);
      Matrix<int> core(2, 1);
      for (int& x : core.data()) x = u(rng);
      Matrix<int> bigger = core;
      bigger(u(rng) % 2, 0) += 1;
      CHECK(core_cost(bigger, 7, kCore) > core_cost(core, 7, kCore));
    }
  }

  // With aggregate counts the property needs a background schedule that never
  // shrinks: on [3, 0, 0] an instance started at slot 1 reuses a released
  // one for free, started at slot 2 it pays a deployment.
  TEST_CASE("starting an instance one slot later never costs more") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<int> xs(6);
      for (int& x : xs) x = std::uniform_int_distribution<int>(0, 3)(rng);
      std::sort(xs.begin(), xs.end());
      int start = std::uniform_int_distribution<int>(0, 4)(rng);
      int end = std::uniform_int_distribution<int>(start + 1, 5)(rng);
      auto with = [&](int from) {
        std::vector<Matrix<int>> s;
        for (int t = 0; t < 6; ++t) s.emplace_back(1, 1, xs[t] + (t >= from && t <= end ? 1 : 0));
        return light_cost(s, kLight);
      };
      CHECK(with(start + 1) <= with(start) + 1e-12);
    }
  }

  TEST_CASE("a shrinking background breaks the shift property") {
    // one extra instance over slots 1..2 versus only slot 2, on top of [3, 0, 0]
    CHECK(light_cost(series({3, 1, 1}), kLight) == doctest::Approx(19.5));
    CHECK(light_cost(series({3, 0, 1}), kLight) == doctest::Approx(22.0));
  }

  TEST_CASE("scaling prices scales costs") {
    std::vector<Prices> scaled{{8.0, 2.0, 1.0}};
    auto s = series({2, 0, 3, 3});
    CHECK(light_cost(s, scaled) == doctest::Approx(2 * light_cost(s, kLight)));
  }

  TEST_CASE("ledger totals equal the sum of its slots") {
    CostLedger ledger;
    auto s = series({1, 3, 2});
    for (std::size_t t = 0; t < s.size(); ++t) {
      SlotCost c = light_slot_cost(t ? &s[t - 1] : nullptr, s[t], kLight,
                                   ParallelismCostMode::PerInstance);
      c.core_maintain = 4.0;
      ledger.record(c);
    }
    double light = 0.0;
    for (const auto& c : ledger.slots()) {
      light += c.light();
      CHECK(c.light_deploy >= 0);
      CHECK(c.light_maintain >= 0);
      CHECK(c.light_parallelism >= 0);
    }
    CHECK(ledger.light_total() == doctest::Approx(light));
    CHECK(ledger.light_total() == doctest::Approx(light_cost(s, kLight)));
    CHECK(ledger.core_total() == doctest::Approx(12.0));
    CHECK(ledger.total() == doctest::Approx(light + 12.0));
  }
}
