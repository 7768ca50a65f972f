#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "edgefm/capacity.hpp"
#include "edgefm/error.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace edgefm;

TEST_SUITE("capacity") {
  TEST_CASE("small theta recovers the mean rate") {
    for (const auto& d : {DistributionSpec::gamma(2, 10), DistributionSpec::gamma(1, 1),
                          DistributionSpec::nakagami(2, 0.8), DistributionSpec::uniform(1, 5),
                          DistributionSpec::poisson(3)})
      CHECK(effective_capacity(d, 1e-6) == doctest::Approx(mean(d)).epsilon(1e-3));
  }

  TEST_CASE("gamma closed form and Monte Carlo agree") {
    const auto d = DistributionSpec::gamma(2, 10);
    CHECK(effective_capacity(d, 0.1) == doctest::Approx(2.0 * std::log(2.0) / 0.1).epsilon(1e-12));
    CHECK(effective_capacity(d, 0.1) == doctest::Approx(13.863).epsilon(1e-4));
    SeededStream s(4, "ec");
    double mc = effective_capacity_monte_carlo(d, 0.1, s, 1000000);
    CHECK(std::abs(mc / effective_capacity(d, 0.1) - 1.0) < 0.01);
  }

  TEST_CASE("closed forms of every family agree with Monte Carlo") {
    SeededStream s(12, "families");
    for (const auto& d : {DistributionSpec::nakagami(1.5, 0.7), DistributionSpec::uniform(0.5, 3),
                          DistributionSpec::poisson(2.5), DistributionSpec::gamma(1.3, 7)}) {
      for (double theta : {0.05, 0.5, 2.0}) {
        double mc = effective_capacity_monte_carlo(d, theta, s, 400000);
        CHECK(std::abs(mc / effective_capacity(d, theta) - 1.0) < 0.01);
      }
    }
  }

  TEST_CASE("constant service has no slack") {
    for (double theta : {1e-3, 0.7, 50.0})
      CHECK(effective_capacity(DistributionSpec::constant(3.5), theta) == doctest::Approx(3.5));
    CHECK_THROWS_AS(effective_capacity(DistributionSpec::constant(1), 0.0), InvalidArgument);
  }

  TEST_CASE("effective capacity is bounded and non-increasing in theta") {
    for (const auto& d : {DistributionSpec::gamma(1, 20), DistributionSpec::gamma(2, 1),
                          DistributionSpec::nakagami(3, 1), DistributionSpec::uniform(0, 2)}) {
      double prev = mean(d);
      for (double theta = 1e-4; theta < 1e3; theta *= 1.5) {
        double e = effective_capacity(d, theta);
        CHECK(e >= 0.0);
        CHECK(e <= mean(d) * (1 + 1e-12));
        CHECK(e <= prev * (1 + 1e-12));
        prev = e;
      }
    }
  }

  TEST_CASE("tail probability") {
    const auto g = DistributionSpec::gamma(2, 10);
    double e = effective_capacity(g, 0.1);
    CHECK(tail_probability(g, 0.1, 0.0) == doctest::Approx(e / 20.0));
    CHECK(tail_probability(g, 0.1, 0.0) <= 1.0);
    CHECK(tail_probability(DistributionSpec::constant(2), 0.3, 4.0) ==
          doctest::Approx(std::exp(-0.3 * 2 * 4)));
    CHECK(tail_probability(g, 0.1, 1.0) == doctest::Approx(0.1733).epsilon(1e-3));
  }

  TEST_CASE("no-guarantee limit and deterministic service") {
    auto gm = fixture::light_ms("l", 1.5, DistributionSpec::gamma(2, 4));
    CapacityProfile p = build_profile(gm, 1.0, 8);
    for (int y = 1; y <= 8; ++y) CHECK(p.g(y) == doctest::Approx(1.5 * y / 8.0).epsilon(1e-6));
    auto cm = fixture::light_ms("k", 2.0, DistributionSpec::constant(4.0));
    CapacityProfile q = build_profile(cm, 0.2, 8);
    for (int y = 1; y <= 8; ++y) CHECK(q.g(y) == doctest::Approx(2.0 * y / 4.0).epsilon(1e-6));
  }

  TEST_CASE("g covers simulated fair-share completions with the target probability") {
    auto ms = fixture::light_ms("l", 1.0, DistributionSpec::gamma(1, 10));
    CapacityProfile p = build_profile(ms, 0.2, 4);
    std::mt19937_64 rng(2);
    const int n = 100000;
    int above = 0;
    for (int i = 0; i < n; ++i)
      if (oracle::fair_share_completion(1.0, 1, 10, 1, rng) > p.g(1)) ++above;
    CHECK(static_cast<double>(above) / n <= 0.2);
  }

  TEST_CASE("profile shape") {
    auto ms = fixture::light_ms("l", 1.2, DistributionSpec::gamma(1.5, 6));
    CapacityProfile a = build_profile(ms, 0.2, 16);
    CapacityProfile b = build_profile(ms, 0.05, 16);
    CHECK(a.max_parallelism() == 16);
    CHECK(a.g(0) == 0.0);
    for (int y = 1; y <= 16; ++y) {
      CHECK(a.theta[y - 1] > 0);
      CHECK(a.g(y) >= mean_value_delay(ms, y));
      CHECK(a.g(y) > mean_value_delay(ms, y));
      CHECK(b.g(y) >= a.g(y));
      if (y > 1) CHECK(a.g(y) > a.g(y - 1));
      // the stored exponent attains the bound
      double at = (1.2 * y + std::log(1 / 0.2) / a.theta[y - 1]) / effective_capacity(ms.rate, a.theta[y - 1]);
      CHECK(at == doctest::Approx(a.g(y)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(a.g(17), InvalidArgument);
  }

  TEST_CASE("profile preconditions") {
    auto ms = fixture::light_ms("l", 1, DistributionSpec::gamma(1, 1));
    CHECK_THROWS_AS(build_profile(ms, 0.0, 4), InvalidArgument);
    CHECK_THROWS_AS(build_profile(ms, 1.5, 4), InvalidArgument);
    CHECK_THROWS_AS(build_profile(ms, 0.2, 0), InvalidArgument);
    CHECK_THROWS_AS(build_profile(fixture::core_ms("c", 1, 1), 0.2, 4), InvalidArgument);
  }

  TEST_CASE("mean value delay") {
    CHECK(mean_value_delay(fixture::light_ms("l", 2, DistributionSpec::constant(4)), 1) ==
          doctest::Approx(0.5));
    auto g = fixture::light_ms("l", 1, DistributionSpec::gamma(2, 10));
    CHECK(mean_value_delay(g, 3) == doctest::Approx(0.15));
    CHECK(mean_value_delay(g, 6) == doctest::Approx(2 * mean_value_delay(g, 3)));
  }

  TEST_CASE("profile dump") {
    auto ms = fixture::light_ms("l", 1, DistributionSpec::gamma(1, 5));
    std::vector<CapacityProfile> ps{build_profile(ms, 0.2, 3)};
    std::ostringstream out;
    write_profiles_csv(out, ps);
    std::string text = out.str();
    CHECK(text.rfind("ms,y,theta,g\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  }
}
