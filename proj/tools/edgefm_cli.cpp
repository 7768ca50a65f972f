// edgefm: sample scenarios, solve the static placement, run experiments and
// summarize results.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "edgefm/config.hpp"
#include "edgefm/error.hpp"
#include "edgefm/experiment.hpp"
#include "edgefm/placement.hpp"

using namespace edgefm;

namespace {

ConfigFile config_or_default(const std::string& path) {
  if (path.empty()) {
    ConfigFile f;
    f.ranges = default_ranges();
    return f;
  }
  return load_config(path);
}

std::vector<std::pair<std::string, std::string>> parse_sets(const std::vector<std::string>& sets) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-tier microservice deployment simulator for edge inference"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  std::vector<std::string> sets;

  auto* sample_cmd = app.add_subcommand("sample", "Draw a concrete scenario from a ranges config");
  sample_cmd->add_option("--config", config, "Ranges config (built-in Table I defaults when omitted)");
  sample_cmd->add_option("--seed", seed, "Scenario seed");
  sample_cmd->add_option("--out", out, "Output file (stdout when omitted)");
  sample_cmd->add_option("--set", sets, "Parameter override key=value");

  double multiplier = 1.0;
  auto* place_cmd = app.add_subcommand("place", "Solve the static core placement only");
  place_cmd->add_option("--config", config, "Scenario or ranges config");
  place_cmd->add_option("--seed", seed, "Scenario seed for ranges configs");
  place_cmd->add_option("--multiplier", multiplier, "Arrival load multiplier")->check(CLI::PositiveNumber);
  place_cmd->add_option("--set", sets, "Parameter override key=value");

  std::vector<std::string> strategies;
  std::vector<std::uint64_t> seeds;
  std::vector<double> multipliers;
  std::size_t trials = 0;
  std::size_t horizon = 0;
  std::size_t jobs = 0;
  bool traces = false;
  auto* run_cmd = app.add_subcommand("run", "Run the strategy x seed x multiplier matrix");
  run_cmd->add_option("--config", config, "Scenario or ranges config");
  run_cmd->add_option("--strategy", strategies, "proposed, lbrr, ga, prop-avg")->delimiter(',');
  run_cmd->add_option("--seeds,--seed", seeds, "Trial seeds")->delimiter(',');
  run_cmd->add_option("--trials", trials, "Use seeds 1..N");
  run_cmd->add_option("--multipliers,--multiplier", multipliers, "Load multipliers")->delimiter(',');
  run_cmd->add_option("--horizon", horizon, "Slots per trial");
  run_cmd->add_option("--out", out, "Output directory (default $EDGEFM_OUT or ./results)");
  run_cmd->add_option("--jobs", jobs, "Concurrent trials");
  run_cmd->add_option("--set", sets, "Parameter override key=value");
  run_cmd->add_flag("--trace", traces, "Write JSON-lines task traces");

  std::string input;
  auto* sum_cmd = app.add_subcommand("summarize", "Recompute summaries from an experiment.csv");
  sum_cmd->add_option("--in", input, "experiment.csv or the directory holding it")->required();
  sum_cmd->add_option("--out", out, "Directory for summary.csv and paired.csv");
  std::string reference;
  sum_cmd->add_option("--reference", reference, "Reference strategy for paired rows");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample_cmd) {
      ConfigFile f = config_or_default(config);
      if (!f.ranges) throw ConfigError(config + ": sample needs a ranges config");
      for (const auto& [k, v] : parse_sets(sets)) apply_override(f.ranges->params, k, v);
      std::string body = scenario_to_json(sample_scenario(*f.ranges, seed));
      if (out.empty()) {
        std::cout << body;
      } else {
        std::ofstream o(out);
        if (!o) throw Error("cannot write " + out);
        o << body;
      }
      return 0;
    }
    if (*place_cmd) {
      ExperimentSpec spec = spec_from_config(config_or_default(config));
      spec.overrides = parse_sets(sets);
      Scenario s = scenario_for_seed(spec, seed).scaled(multiplier);
      PlacementProblem p = build_placement_problem(s);
      PlacementSolution sol = solve_placement(p);
      std::cout << "objective " << sol.objective << (sol.optimal ? " (optimal)" : " (node limit)")
                << ", " << sol.nodes_explored << " nodes explored\n";
      std::cout << "node";
      for (const auto& m : p.ms_ids) std::cout << ',' << m;
      std::cout << '\n';
      for (std::size_t v = 0; v < p.nodes(); ++v) {
        std::cout << p.node_ids[v];
        for (std::size_t m = 0; m < p.services(); ++m) std::cout << ',' << sol.instances(v, m);
        std::cout << '\n';
      }
      return 0;
    }
    if (*run_cmd) {
      ConfigFile f = config_or_default(config);
      ExperimentSpec spec = spec_from_config(f);
      if (!strategies.empty()) spec.strategies = strategies;
      if (!seeds.empty()) {
        spec.seeds = seeds;
      } else if (trials > 0) {
        spec.seeds.clear();
        for (std::size_t i = 1; i <= trials; ++i) spec.seeds.push_back(i);
      }
      if (!multipliers.empty()) spec.multipliers = multipliers;
      if (horizon > 0) spec.horizon = horizon;
      if (jobs > 0) spec.jobs = jobs;
      spec.out = out.empty() ? default_output_dir() : std::filesystem::path(out);
      spec.overrides = parse_sets(sets);
      spec.traces = traces;
      ExperimentResult r = run_experiment(spec, &std::cerr);
      if (!r.rows.empty()) print_comparison(std::cout, r.summary);
      std::cout << "results in " << spec.out.string() << '\n';
      for (const auto& e : r.failures) std::cerr << "trial aborted: " << e << '\n';
      return r.failures.empty() ? 0 : 1;
    }
    if (*sum_cmd) {
      std::filesystem::path in = input;
      if (std::filesystem::is_directory(in)) in /= "experiment.csv";
      std::ifstream f(in);
      if (!f) throw ConfigError(in.string() + ": cannot open");
      std::vector<TrialRow> rows = read_experiment_csv(f);
      if (rows.empty()) throw ConfigError(in.string() + ": no trial rows");
      ExperimentSummary s = aggregate(rows, reference);
      print_comparison(std::cout, s);
      if (!out.empty()) {
        std::filesystem::create_directories(out);
        std::ofstream a(std::filesystem::path(out) / "summary.csv");
        write_summary_csv(a, s);
        std::ofstream b(std::filesystem::path(out) / "paired.csv");
        write_paired_csv(b, s);
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
