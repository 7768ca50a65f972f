#include "edgefm/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "edgefm/baselines.hpp"
#include "edgefm/error.hpp"

namespace edgefm {

namespace fs = std::filesystem;

void ExperimentSpec::validate() const {
  if (ranges.has_value() == scenario.has_value())
    throw InvalidArgument("experiment needs exactly one of ranges or scenario");
  if (strategies.empty()) throw InvalidArgument("experiment needs at least one strategy");
  for (const auto& s : strategies) strategy_from_string(s);
  if (seeds.empty()) throw InvalidArgument("experiment needs at least one seed");
  if (multipliers.empty()) throw InvalidArgument("experiment needs at least one multiplier");
  for (double m : multipliers)
    if (!(m > 0)) throw InvalidArgument("multipliers must be positive");
  if (horizon == 0) throw InvalidArgument("horizon must be positive");
  if (jobs == 0) throw InvalidArgument("jobs must be positive");
}

ExperimentSpec spec_from_config(const ConfigFile& f) {
  ExperimentSpec s;
  s.ranges = f.ranges;
  s.scenario = f.scenario;
  s.strategies = f.experiment.strategies;
  s.seeds = f.experiment.seed_list();
  s.multipliers = f.experiment.multipliers;
  s.horizon = f.experiment.horizon;
  s.jobs = f.experiment.jobs;
  return s;
}

Scenario scenario_for_seed(const ExperimentSpec& spec, std::uint64_t seed) {
  Scenario s;
  if (spec.ranges) {
    ScenarioRanges r = *spec.ranges;
    for (const auto& [k, v] : spec.overrides) apply_override(r.params, k, v);
    s = sample_scenario(r, seed);
  } else {
    s = *spec.scenario;
    for (const auto& [k, v] : spec.overrides) apply_override(s.params, k, v);
  }
  return s;
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trial_stem(const std::string& strategy, std::uint64_t seed, double mult) {
  return strategy + "_s" + std::to_string(seed) + "_m" + format_number(mult);
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << body;
}

struct Job {
  std::size_t strategy;
  std::size_t seed;
  std::size_t mult;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, std::ostream* log) {
  spec.validate();
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < spec.strategies.size(); ++a)
    for (std::size_t b = 0; b < spec.seeds.size(); ++b)
      for (std::size_t c = 0; c < spec.multipliers.size(); ++c) jobs.push_back({a, b, c});

  std::vector<Scenario> scenarios;
  for (std::uint64_t seed : spec.seeds) scenarios.push_back(scenario_for_seed(spec, seed));

  std::vector<std::optional<TrialRow>> rows(jobs.size());
  std::vector<std::string> slot_csv(jobs.size());
  std::vector<std::string> trace(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& j = jobs[i];
      const std::string& name = spec.strategies[j.strategy];
      const std::uint64_t seed = spec.seeds[j.seed];
      const double mult = spec.multipliers[j.mult];
      try {
        auto strategy = make_strategy(name);
        TrialReport r = run_trial(scenarios[j.seed], *strategy, seed,
                                  TrialOptions{spec.horizon, mult, spec.traces});
        rows[i] = row_of(r);
        std::ostringstream csv;
        write_slot_csv(csv, r);
        slot_csv[i] = csv.str();
        if (spec.traces) {
          std::ostringstream t;
          write_trace_jsonl(t, r);
          trace[i] = t.str();
        }
        if (log) {
          std::lock_guard<std::mutex> lock(log_mutex);
          *log << name << " seed " << seed << " x" << format_number(mult) << ": on-time "
               << std::fixed << std::setprecision(3) << r.on_time_rate() << ", cost "
               << std::setprecision(1) << r.cost_total() << std::defaultfloat << '\n';
        }
      } catch (const std::exception& e) {
        errors[i] = trial_stem(name, seed, mult) + ": " + e.what();
        if (log) {
          std::lock_guard<std::mutex> lock(log_mutex);
          *log << "aborted " << errors[i] << '\n';
        }
      }
    }
  };
  std::size_t threads = std::min(spec.jobs, jobs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentResult out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (rows[i]) out.rows.push_back(*rows[i]);
    if (!errors[i].empty()) out.failures.push_back(errors[i]);
  }
  if (!out.rows.empty()) out.summary = aggregate(out.rows, spec.strategies.front());

  if (!spec.out.empty()) {
    fs::create_directories(spec.out / "trials");
    fs::create_directories(spec.out / "scenarios");
    for (std::size_t b = 0; b < spec.seeds.size(); ++b)
      write_file(spec.out / "scenarios" / ("scenario_s" + std::to_string(spec.seeds[b]) + ".json"),
                 scenario_to_json(scenarios[b]));
    if (spec.traces) fs::create_directories(spec.out / "traces");
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (!rows[i]) continue;
      std::string stem = trial_stem(spec.strategies[jobs[i].strategy], spec.seeds[jobs[i].seed],
                                    spec.multipliers[jobs[i].mult]);
      write_file(spec.out / "trials" / (stem + ".csv"), slot_csv[i]);
      if (spec.traces) write_file(spec.out / "traces" / (stem + ".jsonl"), trace[i]);
    }
    std::ostringstream a, b, c, d;
    write_experiment_csv(a, out.rows);
    write_long_csv(b, out.rows);
    write_file(spec.out / "experiment.csv", a.str());
    write_file(spec.out / "long.csv", b.str());
    if (!out.rows.empty()) {
      write_summary_csv(c, out.summary);
      write_paired_csv(d, out.summary);
      write_file(spec.out / "summary.csv", c.str());
      write_file(spec.out / "paired.csv", d.str());
    }
  }
  return out;
}

void write_experiment_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << "strategy,seed,multiplier,arrivals,completions,on_time,expired,active,cost_core,"
         "cost_light,cost_total,on_time_rate,completion_rate\n";
  for (const auto& r : rows) {
    out << r.strategy << ',' << r.seed << ',' << format_number(r.multiplier) << ',' << r.arrivals
        << ',' << r.completions << ',' << r.on_time << ',' << r.expired << ',' << r.active << ','
        << format_number(r.cost_core) << ',' << format_number(r.cost_light) << ','
        << format_number(r.cost()) << ',' << format_number(r.on_time_rate()) << ','
        << format_number(r.completion_rate()) << '\n';
  }
}

std::vector<TrialRow> read_experiment_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("experiment csv: empty file");
  std::vector<TrialRow> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() < 10) throw ConfigError("experiment csv: line " + std::to_string(n) + ": too few columns");
    try {
      TrialRow r;
      r.strategy = f[0];
      r.seed = std::stoull(f[1]);
      r.multiplier = std::stod(f[2]);
      r.arrivals = std::stoull(f[3]);
      r.completions = std::stoull(f[4]);
      r.on_time = std::stoull(f[5]);
      r.expired = std::stoull(f[6]);
      r.active = std::stoull(f[7]);
      r.cost_core = std::stod(f[8]);
      r.cost_light = std::stod(f[9]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ConfigError("experiment csv: line " + std::to_string(n) + ": malformed number");
    }
  }
  return rows;
}

void write_long_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << "strategy,seed,multiplier,metric,value\n";
  for (const auto& r : rows) {
    auto emit = [&](const char* metric, double v) {
      out << r.strategy << ',' << r.seed << ',' << format_number(r.multiplier) << ',' << metric
          << ',' << format_number(v) << '\n';
    };
    emit("on_time_rate", r.on_time_rate());
    emit("completion_rate", r.completion_rate());
    emit("cost", r.cost());
  }
}

void write_summary_csv(std::ostream& out, const ExperimentSummary& s) {
  out << "strategy,multiplier,metric,n,mean,std,q05,q25,q50,q75,q95,ci_low,ci_high\n";
  for (const auto& g : s.groups) {
    auto emit = [&](const char* metric, const Distribution& d, const Interval* ci) {
      out << g.strategy << ',' << format_number(g.multiplier) << ',' << metric << ',' << d.n << ','
          << format_number(d.mean) << ',' << format_number(d.std) << ',' << format_number(d.q05)
          << ',' << format_number(d.q25) << ',' << format_number(d.q50) << ','
          << format_number(d.q75) << ',' << format_number(d.q95) << ',';
      if (ci) out << format_number(ci->low) << ',' << format_number(ci->high);
      else out << ',';
      out << '\n';
    };
    emit("on_time_rate", g.on_time, &g.on_time_ci);
    emit("completion_rate", g.completion, nullptr);
    emit("cost", g.cost, nullptr);
  }
}

void write_paired_csv(std::ostream& out, const ExperimentSummary& s) {
  out << "strategy,reference,multiplier,pairs,on_time_diff,cost_diff,on_time_lower,cost_lower\n";
  for (const auto& p : s.paired) {
    out << p.strategy << ',' << p.reference << ',' << format_number(p.multiplier) << ',' << p.pairs
        << ',' << format_number(p.on_time_diff) << ',' << format_number(p.cost_diff) << ','
        << format_number(p.on_time_lower) << ',' << format_number(p.cost_lower) << '\n';
  }
}

void print_comparison(std::ostream& out, const ExperimentSummary& s) {
  out << std::left << std::setw(10) << "strategy" << std::setw(7) << "load" << std::setw(18)
      << "on-time mean+-sd" << std::setw(10) << "on-time p5" << std::setw(12) << "completion"
      << "cost mean\n";
  for (const auto& g : s.groups) {
    std::ostringstream ot;
    ot << std::fixed << std::setprecision(3) << g.on_time.mean << "+-" << g.on_time.std;
    out << std::left << std::setw(10) << g.strategy << std::setw(7)
        << (format_number(g.multiplier) + "x") << std::setw(18) << ot.str() << std::fixed
        << std::setprecision(3) << std::setw(10) << g.on_time.q05 << std::setw(12)
        << g.completion.mean << std::setprecision(1) << g.cost.mean << std::defaultfloat << '\n';
  }
}

fs::path default_output_dir() {
  const char* env = std::getenv("EDGEFM_OUT");
  return env && *env ? fs::path(env) : fs::path("results");
}

}  // namespace edgefm
