#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "edgefm/controller.hpp"
#include "edgefm/matrix.hpp"
#include "edgefm/scenario.hpp"
#include "edgefm/strategy.hpp"

namespace edgefm {

struct SlotMetrics {
  std::size_t slot = 0;
  std::size_t arrivals = 0;
  std::size_t completions = 0;
  std::size_t on_time = 0;
  std::size_t expired = 0;
  double cost_core = 0.0;
  double cost_light = 0.0;
  double mean_H = 0.0;  // over tasks still active at the slot end, 0 when none
  double max_H = 0.0;
  double min_H = 0.0;
  std::size_t active = 0;
  std::size_t light_requests = 0;
  ControllerCounters counters;
};

enum class TaskStatus { Active, Done, Expired };

struct StageTrace {
  std::size_t ms = 0;  // global microservice index
  bool dispatched = false;
  NodeId node = 0;
  double dispatch = 0.0;  // slot boundary the decision was taken at
  double ready = 0.0;     // all inputs present at node
  double start = 0.0;
  double finish = 0.0;
  int share = 1;          // light cohort size on the instance, 1 for core
  double bound = 0.0;     // g(share) for light stages, 0 for core
};

struct TaskTrace {
  std::size_t id = 0;
  std::size_t user = 0;
  std::size_t type = 0;
  double arrival = 0.0;
  double uplink = 0.0;
  double deadline = 0.0;
  NodeId entry = 0;
  TaskStatus status = TaskStatus::Active;
  double finish = 0.0;  // sink completion when done
  std::vector<StageTrace> stages;  // indexed like the task type's dag

  double latency() const { return finish - arrival; }
};

struct TrialOptions {
  std::size_t horizon = 2000;
  double multiplier = 1.0;
  bool keep_trace = false;
};

struct TrialReport {
  std::string strategy;
  std::uint64_t seed = 0;
  double multiplier = 1.0;
  std::size_t horizon = 0;

  std::size_t arrivals = 0;
  std::size_t completions = 0;
  std::size_t on_time = 0;
  std::size_t expired = 0;
  std::size_t active = 0;
  std::vector<std::size_t> arrivals_by_type;
  std::vector<std::size_t> completions_by_type;
  std::vector<std::size_t> expired_by_type;
  std::vector<std::size_t> active_by_type;

  double cost_core = 0.0;
  double cost_light = 0.0;
  double min_queue = 0.0;  // smallest H seen on any task in any slot

  std::size_t light_stages = 0;
  std::size_t light_bound_exceeded = 0;  // actual delay above g(share)

  std::vector<SlotMetrics> slots;
  Matrix<int> core_deployment;
  std::vector<Matrix<int>> light_schedule;  // kept with keep_trace
  std::vector<TaskTrace> tasks;             // kept with keep_trace

  double cost_total() const { return cost_core + cost_light; }
  double completion_rate() const;
  double on_time_rate() const;
};

// Runs one trial. The scenario is scaled by options.multiplier before the
// strategy sees it. Throws ConstraintViolation when a plan breaks the node
// capacities in some slot.
TrialReport run_trial(const Scenario& s, Strategy& strategy, std::uint64_t seed,
                      const TrialOptions& options);

// Recomputes per-slot resource usage from the deployment trace. Returns an
// empty string when every slot fits, otherwise a description of the first
// violation. Needs a report produced with keep_trace.
std::string audit_resources(const Scenario& s, const TrialReport& r);

void write_slot_csv(std::ostream& out, const TrialReport& r);
// One JSON object per task.
void write_trace_jsonl(std::ostream& out, const TrialReport& r);

// Final metrics of one trial, the unit of aggregation.
struct TrialRow {
  std::string strategy;
  std::uint64_t seed = 0;
  double multiplier = 1.0;
  std::size_t arrivals = 0;
  std::size_t completions = 0;
  std::size_t on_time = 0;
  std::size_t expired = 0;
  std::size_t active = 0;
  double cost_core = 0.0;
  double cost_light = 0.0;

  double completion_rate() const;
  double on_time_rate() const;
  double cost() const { return cost_core + cost_light; }
};

TrialRow row_of(const TrialReport& r);

struct Distribution {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for n < 2
  double q05 = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
};

// Linear-interpolated quantile of a non-empty sample.
double quantile(std::vector<double> values, double q);
Distribution describe(std::span<const double> values);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Percentile bootstrap interval for the mean.
Interval bootstrap_mean_ci(std::span<const double> values, double level,
                           std::size_t resamples, std::uint64_t seed);

struct GroupSummary {
  std::string strategy;
  double multiplier = 1.0;
  Distribution on_time;
  Distribution completion;
  Distribution cost;
  Interval on_time_ci;
};

// Per seed comparison of a strategy with a reference at one multiplier.
struct PairedSummary {
  std::string strategy;
  std::string reference;
  double multiplier = 1.0;
  std::size_t pairs = 0;
  double on_time_diff = 0.0;  // mean of strategy - reference
  double cost_diff = 0.0;
  double on_time_lower = 0.0;  // fraction of pairs with lower on-time rate
  double cost_lower = 0.0;     // fraction of pairs with lower cost
};

struct ExperimentSummary {
  std::vector<GroupSummary> groups;
  std::vector<PairedSummary> paired;
};

// Groups by (strategy, multiplier) in first-appearance order. Paired rows
// compare every strategy against `reference` (the first strategy when empty).
ExperimentSummary aggregate(std::span<const TrialRow> rows, const std::string& reference = {});

}  // namespace edgefm
