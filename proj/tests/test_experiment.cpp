#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "edgefm/error.hpp"
#include "edgefm/experiment.hpp"
#include "support/fixtures.hpp"

using namespace edgefm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("edgefm_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.scenario = fixture::two_node_scenario(0.8);
  spec.strategies = {"proposed", "lbrr"};
  spec.seeds = {1, 2, 3};
  spec.multipliers = {1.0, 1.5, 2.0};
  spec.horizon = 120;
  return spec;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(EDGEFM_CLI) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("one trial gives one row") {
    ExperimentSpec spec = small_spec();
    spec.strategies = {"proposed"};
    spec.seeds = {4};
    spec.multipliers = {1.0};
    ExperimentResult r = run_experiment(spec);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.failures.empty());
    CHECK(r.rows[0].strategy == "proposed");
    CHECK(r.rows[0].seed == 4);
    REQUIRE(r.summary.groups.size() == 1);
    CHECK(r.summary.paired.empty());
  }

  TEST_CASE("matrix of strategies, seeds and multipliers") {
    ExperimentSpec spec = small_spec();
    spec.out = scratch("matrix");
    spec.jobs = 2;
    ExperimentResult r = run_experiment(spec);
    CHECK(r.failures.empty());
    REQUIRE(r.rows.size() == 2 * 3 * 3);
    CHECK(r.rows.front().strategy == "proposed");
    CHECK(r.rows.back().strategy == "lbrr");
    CHECK(r.summary.groups.size() == 6);
    CHECK(r.summary.paired.size() == 3);
    for (const char* f : {"experiment.csv", "long.csv", "summary.csv", "paired.csv"})
      CHECK(fs::exists(spec.out / f));
    CHECK(fs::exists(spec.out / "scenarios" / "scenario_s2.json"));
    std::size_t trials = 0;
    for (const auto& e : fs::directory_iterator(spec.out / "trials")) trials += e.is_regular_file();
    CHECK(trials == 18);

    // rerunning, on one thread this time, reproduces every byte
    ExperimentSpec again = spec;
    again.out = scratch("matrix_again");
    again.jobs = 1;
    run_experiment(again);
    for (const char* f : {"experiment.csv", "long.csv", "summary.csv", "paired.csv"})
      CHECK(slurp(spec.out / f) == slurp(again.out / f));

    // summaries recomputed from the written rows match
    std::ifstream in(spec.out / "experiment.csv");
    std::vector<TrialRow> rows = read_experiment_csv(in);
    REQUIRE(rows.size() == r.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].strategy == r.rows[i].strategy);
      CHECK(rows[i].on_time == r.rows[i].on_time);
      CHECK(rows[i].cost() == r.rows[i].cost());
    }
    std::ostringstream s;
    write_summary_csv(s, aggregate(rows, "proposed"));
    CHECK(s.str() == slurp(spec.out / "summary.csv"));
    fs::remove_all(spec.out);
    fs::remove_all(again.out);
  }

  TEST_CASE("ranges sample one scenario per seed with overrides") {
    ExperimentSpec spec;
    spec.ranges = default_ranges();
    spec.overrides = {{"xi", "3"}};
    Scenario a = scenario_for_seed(spec, 1);
    CHECK(a.params.xi == 3.0);
    CHECK(a == sample_scenario([] {
            ScenarioRanges r = default_ranges();
            r.params.xi = 3.0;
            return r;
          }(), 1));
    CHECK_FALSE(a == scenario_for_seed(spec, 2));
  }

  TEST_CASE("experiment settings validation") {
    ExperimentSpec spec = small_spec();
    spec.validate();
    spec.strategies = {"nope"};
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
    spec = small_spec();
    spec.ranges = default_ranges();
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
    spec = small_spec();
    spec.multipliers = {0.0};
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
    spec = small_spec();
    spec.seeds.clear();
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  }

  TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 264612.5, 1e-12, 0.0}) {
      std::string s = format_number(v);
      CHECK(std::stod(s) == v);
    }
    CHECK(format_number(2.0) == "2");
  }

  TEST_CASE("command line runs, summarizes and rejects bad configs") {
    fs::path dir = scratch("cli");
    fs::create_directories(dir);
    {
      std::ofstream cfg(dir / "two_node.json");
      cfg << scenario_to_json(fixture::two_node_scenario(0.8));
    }
    std::string cfg = (dir / "two_node.json").string();
    CHECK(run_cli("run --config " + cfg + " --strategy proposed lbrr --seeds 1 2 --horizon 80 --out " +
                  (dir / "out").string() + " --trace") == 0);
    CHECK(fs::exists(dir / "out" / "experiment.csv"));
    CHECK(fs::exists(dir / "out" / "traces"));
    CHECK(run_cli("summarize --in " + (dir / "out").string() + " --out " + (dir / "sum").string()) ==
          0);
    CHECK(slurp(dir / "sum" / "summary.csv") == slurp(dir / "out" / "summary.csv"));
    CHECK(run_cli("place --config " + cfg) == 0);
    CHECK(run_cli("sample --seed 3 --out " + (dir / "s3.json").string()) == 0);
    CHECK(scenario_from_json(slurp(dir / "s3.json")) == sample_scenario(default_ranges(), 3));
    {
      std::ofstream bad(dir / "bad.json");
      bad << "{ \"topology\": ";
    }
    CHECK(run_cli("run --config " + (dir / "bad.json").string()) == 2);
    CHECK(run_cli("run --config " + cfg + " --strategy nope --horizon 10 --out " +
                  (dir / "x").string()) != 0);
    fs::remove_all(dir);
  }
}
