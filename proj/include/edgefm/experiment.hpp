#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edgefm/config.hpp"
#include "edgefm/sim.hpp"

namespace edgefm {

struct ExperimentSpec {
  // Exactly one of these is set. With ranges every seed samples its own scenario.
  std::optional<ScenarioRanges> ranges;
  std::optional<Scenario> scenario;
  std::vector<std::string> strategies;
  std::vector<std::uint64_t> seeds;
  std::vector<double> multipliers{1.0};
  std::size_t horizon = 2000;
  std::filesystem::path out;  // empty: nothing written
  std::size_t jobs = 1;
  std::vector<std::pair<std::string, std::string>> overrides;  // key=value on parameters
  bool traces = false;  // JSON-lines task traces per trial

  // Throws InvalidArgument.
  void validate() const;
};

ExperimentSpec spec_from_config(const ConfigFile& f);

// Scenario used for one seed, overrides applied.
Scenario scenario_for_seed(const ExperimentSpec& spec, std::uint64_t seed);

struct ExperimentResult {
  std::vector<TrialRow> rows;         // strategy-major, then seed, then multiplier
  std::vector<std::string> failures;  // one message per aborted trial
  ExperimentSummary summary;
};

// Runs the strategy x seed x multiplier matrix on up to spec.jobs threads and
// writes the CSVs under spec.out. Aborted trials are listed in failures.
ExperimentResult run_experiment(const ExperimentSpec& spec, std::ostream* log = nullptr);

// Shortest round-trip decimal form.
std::string format_number(double v);

void write_experiment_csv(std::ostream& out, const std::vector<TrialRow>& rows);
std::vector<TrialRow> read_experiment_csv(std::istream& in);
// Long format: strategy, seed, multiplier, metric, value.
void write_long_csv(std::ostream& out, const std::vector<TrialRow>& rows);
void write_summary_csv(std::ostream& out, const ExperimentSummary& s);
void write_paired_csv(std::ostream& out, const ExperimentSummary& s);
void print_comparison(std::ostream& out, const ExperimentSummary& s);

// $EDGEFM_OUT when set, else "results".
std::filesystem::path default_output_dir();

}  // namespace edgefm
