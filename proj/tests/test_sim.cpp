#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "edgefm/error.hpp"
#include "edgefm/sim.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace edgefm;

namespace {

TrialReport run(const Scenario& s, std::uint64_t seed, std::size_t horizon, bool trace = true,
                double multiplier = 1.0) {
  auto strategy = make_proposed();
  return run_trial(s, *strategy, seed, TrialOptions{horizon, multiplier, trace});
}

TrialRow row(std::string name, std::uint64_t seed, std::size_t on_time, double cost,
             double multiplier = 1.0) {
  TrialRow r;
  r.strategy = std::move(name);
  r.seed = seed;
  r.multiplier = multiplier;
  r.arrivals = 100;
  r.completions = on_time;
  r.on_time = on_time;
  r.cost_core = cost;
  return r;
}

}  // namespace

TEST_SUITE("sim") {
  TEST_CASE("zero arrivals cost only the core deployment") {
    Scenario s = fixture::single_stage_scenario(0.0);
    TrialReport r = run(s, 1, 30);
    CHECK(r.arrivals == 0);
    CHECK(r.cost_light == 0.0);
    int n = r.core_deployment(0, 0);
    CHECK(n == 1);
    CHECK(r.cost_core == doctest::Approx(n * (20.0 + 4.0 * 30)));
    CHECK(r.on_time_rate() == 0.0);
    CHECK(r.min_queue == doctest::Approx(s.params.zeta));
  }

  TEST_CASE("single stage latency is uplink plus processing") {
    Scenario s = fixture::single_stage_scenario(1.0);
    TrialReport r = run(s, 3, 50);
    CHECK(r.arrivals == 50);
    // each task finishes 1.25 ms after arrival, so the last one is still open
    CHECK(r.completions == 49);
    CHECK(r.on_time == 49);
    CHECK(r.active == 1);
    for (const auto& t : r.tasks) {
      if (t.status != TaskStatus::Done) continue;
      CHECK(t.uplink == doctest::Approx(1.0));
      CHECK(t.latency() == doctest::Approx(1.25));
    }
  }

  TEST_CASE("two node trace replays under the timing rules") {
    Scenario s = fixture::two_node_scenario(0.6);
    TrialReport r = run(s, 11, 50);
    REQUIRE(r.tasks.size() == r.arrivals);
    CHECK(r.arrivals > 20);
    for (const auto& t : r.tasks) {
      std::string err = oracle::replay_task(s, t);
      CHECK_MESSAGE(err.empty(), "task " << t.id << ": " << err);
    }
    CHECK(audit_resources(s, r).empty());
    CHECK(r.completions > 0);
  }

  TEST_CASE("every arrival is accounted for by type") {
    Scenario s = fixture::two_node_scenario(1.5);
    TrialReport r = run(s, 5, 200, false);
    std::size_t total = 0;
    for (std::size_t n = 0; n < 2; ++n) {
      CHECK(r.arrivals_by_type[n] ==
            r.completions_by_type[n] + r.expired_by_type[n] + r.active_by_type[n]);
      total += r.arrivals_by_type[n];
    }
    CHECK(total == r.arrivals);
    CHECK(r.arrivals == r.completions + r.expired + r.active);
    std::size_t per_slot = 0;
    for (const auto& m : r.slots) per_slot += m.arrivals;
    CHECK(per_slot == r.arrivals);
  }

  TEST_CASE("trials are deterministic in the seed") {
    Scenario s = fixture::two_node_scenario(0.8);
    TrialReport a = run(s, 42, 150);
    TrialReport b = run(s, 42, 150);
    CHECK(a.arrivals == b.arrivals);
    CHECK(a.on_time == b.on_time);
    CHECK(a.cost_light == b.cost_light);
    std::ostringstream ja, jb;
    write_trace_jsonl(ja, a);
    write_trace_jsonl(jb, b);
    CHECK(ja.str() == jb.str());
    TrialReport c = run(s, 43, 150);
    std::ostringstream jc;
    write_trace_jsonl(jc, c);
    CHECK(ja.str() != jc.str());
  }

  TEST_CASE("queues stay above the floor and light deployments fit") {
    Scenario s = fixture::two_node_scenario(2.0);
    TrialReport r = run(s, 9, 300);
    CHECK(r.min_queue >= s.params.zeta);
    for (const auto& m : r.slots)
      if (m.active > 0) CHECK(m.min_H >= s.params.zeta);
    CHECK(audit_resources(s, r).empty());
    CHECK(r.light_stages > 0);
    MESSAGE("light stages above their bound: " << r.light_bound_exceeded << "/" << r.light_stages);
  }

  TEST_CASE("load multiplier scales arrivals") {
    Scenario s = fixture::two_node_scenario(0.5);
    TrialReport a = run(s, 2, 400, false, 1.0);
    TrialReport b = run(s, 2, 400, false, 2.0);
    CHECK(b.arrivals > a.arrivals);
    CHECK(b.multiplier == 2.0);
    CHECK_THROWS_AS(run(s, 2, 10, false, 0.0), InvalidArgument);
    CHECK_THROWS_AS(run(s, 2, 0, false), InvalidArgument);
  }

  TEST_CASE("slot csv") {
    Scenario s = fixture::single_stage_scenario(1.0);
    TrialReport r = run(s, 1, 5, false);
    std::ostringstream out;
    write_slot_csv(out, r);
    std::string text = out.str();
    CHECK(text.rfind("slot,arrivals,completions,on_time,expired,cost_core,cost_light,mean_H,max_H\n",
                     0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
  }

  TEST_CASE("quantiles and summaries") {
    std::vector<double> v{1, 2, 3, 4};
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
    CHECK(quantile(v, 1.0) == 4.0);
    CHECK_THROWS_AS(quantile({}, 0.5), InvalidArgument);
    Distribution d = describe(v);
    CHECK(d.mean == doctest::Approx(2.5));
    CHECK(d.std == doctest::Approx(1.2909944));
    std::vector<double> one{0.7};
    CHECK(describe(one).std == 0.0);
    Interval ci = bootstrap_mean_ci(v, 0.95, 2000, 1);
    CHECK(ci.low <= 2.5);
    CHECK(ci.high >= 2.5);
    CHECK(ci.low >= 1.0);
    CHECK(ci.high <= 4.0);
  }

  TEST_CASE("aggregate of a single report") {
    std::vector<TrialRow> rows{row("p", 1, 90, 10.0)};
    ExperimentSummary s = aggregate(rows);
    REQUIRE(s.groups.size() == 1);
    CHECK(s.groups[0].on_time.mean == doctest::Approx(0.9));
    CHECK(s.groups[0].on_time.std == 0.0);
    CHECK(s.paired.empty());
    CHECK_THROWS_AS(aggregate(std::vector<TrialRow>{}), InvalidArgument);
  }

  TEST_CASE("aggregate pairs strategies by seed") {
    std::vector<TrialRow> rows{row("p", 1, 90, 10.0), row("p", 2, 80, 12.0),
                               row("q", 1, 85, 8.0),  row("q", 2, 82, 13.0),
                               row("q", 3, 10, 1.0),  row("p", 1, 90, 10.0, 2.0)};
    ExperimentSummary s = aggregate(rows);
    REQUIRE(s.groups.size() == 3);
    CHECK(s.groups[0].strategy == "p");
    CHECK(s.groups[2].multiplier == 2.0);
    REQUIRE(s.paired.size() == 1);
    const PairedSummary& p = s.paired[0];
    CHECK(p.strategy == "q");
    CHECK(p.pairs == 2);
    CHECK(p.on_time_diff == doctest::Approx((-0.05 + 0.02) / 2));
    CHECK(p.cost_diff == doctest::Approx((-2.0 + 1.0) / 2));
    CHECK(p.on_time_lower == doctest::Approx(0.5));
    CHECK(p.cost_lower == doctest::Approx(0.5));
    ExperimentSummary r = aggregate(rows, "q");
    REQUIRE(r.paired.size() == 2);
    CHECK(r.paired[0].strategy == "p");
  }

  TEST_CASE("duplicated rows give zero spread") {
    std::vector<TrialRow> rows(5, row("p", 1, 70, 3.0));
    Distribution d = aggregate(rows).groups[0].on_time;
    CHECK(d.std == 0.0);
    CHECK(d.q05 == doctest::Approx(0.7));
    CHECK(d.q95 == doctest::Approx(0.7));
  }
}
