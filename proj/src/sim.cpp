#include "edgefm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

#include "json.hpp"

#include "edgefm/error.hpp"
#include "edgefm/latency.hpp"

namespace edgefm {

namespace {

constexpr double kTimeEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_rate(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Concurrency-one server with a calendar of reservations, gaps can be filled.
struct CoreInstance {
  NodeId node = 0;
  std::vector<std::pair<double, double>> busy;  // sorted, disjoint

  double earliest(double ready, double length) const {
    double at = ready;
    for (const auto& [s, e] : busy) {
      if (e <= at + kTimeEps) continue;
      if (s >= at + length - kTimeEps) break;
      at = std::max(at, e);
    }
    return at;
  }
  void reserve(double s, double e) {
    auto it = std::lower_bound(busy.begin(), busy.end(), std::make_pair(s, e));
    busy.insert(it, {s, e});
  }
  void prune(double now) {
    auto keep = std::remove_if(busy.begin(), busy.end(),
                               [&](const auto& iv) { return iv.second <= now + kTimeEps; });
    busy.erase(keep, busy.end());
  }
  bool busy_after(double now) const {
    for (const auto& iv : busy)
      if (iv.second > now + kTimeEps) return true;
    return false;
  }
};

struct LightInstance {
  double busy_until = 0.0;
  std::size_t base = 0;  // slot of creation, rates[k] belongs to slot base + k
  std::vector<double> rates;
};

struct LightPool {
  std::vector<LightInstance> instances;
  SeededStream stream;
  DistributionSpec rate;
  double workload = 1.0;
};

struct StageInfo {
  std::size_t ms = 0;
  bool core = false;
  std::size_t pos = 0;  // tier position
};

struct Task {
  TaskTrace trace;
  VirtualQueue queue;
  std::size_t undispatched = 0;
  double committed = 0.0;  // latest known finish among dispatched stages
};

class Engine {
 public:
  Engine(const Scenario& s, Strategy& strategy, std::uint64_t seed, const TrialOptions& opt)
      : s_(s), strategy_(strategy), seed_(seed), opt_(opt) {}

  TrialReport run();

 private:
  void setup();
  void arrivals(std::size_t t);
  void dispatch_core(std::size_t t, Task& task, std::size_t stage);
  void plan_light(std::size_t t, const std::vector<std::pair<std::size_t, std::size_t>>& queued);
  static double light_finish(LightPool& pool, LightInstance& inst, double start, int share);
  double ready_at(const Task& task, std::size_t stage, NodeId v, double now) const;
  void close_slot(std::size_t t, SlotMetrics& m);

  const Scenario& s_;
  Strategy& strategy_;
  std::uint64_t seed_;
  TrialOptions opt_;

  std::size_t nodes_ = 0;
  std::size_t resources_ = 0;
  std::vector<std::vector<StageInfo>> stages_;  // per task type
  TransferTable transfers_;
  std::vector<SeededStream> arrival_streams_;
  std::vector<SeededStream> snr_streams_;
  std::vector<double> snr_;
  std::vector<std::vector<CoreInstance>> core_;  // per core position
  Matrix<double> core_usage_;                    // node x resource
  std::vector<LightPool> light_;                 // node * |light| + pos
  Matrix<int> previous_;
  Matrix<double> light_demand_;
  std::vector<Prices> light_prices_;
  DelayTable bounds_;  // ground-truth-free diagnostic of g

  std::vector<Task> tasks_;
  std::vector<std::size_t> active_;
  TrialReport report_;
};

void Engine::setup() {
  nodes_ = s_.graph.node_count();
  resources_ = s_.graph.resource_count();
  const auto& cat = s_.catalog;

  std::vector<double> payloads;
  for (const auto& m : cat.microservices()) payloads.push_back(m.output);
  for (const auto& t : cat.task_types()) payloads.push_back(t.input_payload);
  transfers_ = TransferTable(s_.graph, payloads);

  for (std::size_t n = 0; n < cat.task_types().size(); ++n) {
    const TaskDag& dag = cat.dag(n);
    std::vector<StageInfo> info(dag.size());
    for (std::size_t st = 0; st < dag.size(); ++st) {
      std::size_t m = dag.ms(st);
      info[st] = {m, cat.ms(m).tier == Tier::Core, cat.tier_position(m)};
    }
    stages_.push_back(std::move(info));
  }

  std::string trial = "trial-" + std::to_string(seed_);
  for (std::size_t i = 0; i < s_.subscriptions.size(); ++i)
    arrival_streams_.emplace_back(seed_, stream_label(trial, "sub-" + std::to_string(i), "arrivals"));
  for (const auto& u : s_.graph.users())
    snr_streams_.emplace_back(seed_, stream_label(trial, u.id, "snr"));
  snr_.assign(s_.graph.users().size(), 0.0);

  const std::size_t L = cat.light().size();
  light_demand_ = Matrix<double>(L, resources_, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    const auto& m = cat.ms(cat.light()[l]);
    light_prices_.push_back(m.prices);
    for (std::size_t k = 0; k < resources_; ++k) light_demand_(l, k) = m.demand.at(k);
  }
  for (NodeId v = 0; v < nodes_; ++v) {
    for (std::size_t l = 0; l < L; ++l) {
      std::string entity = s_.graph.node(v).id + ":" + cat.ms(cat.light()[l]).id;
      const auto& m = cat.ms(cat.light()[l]);
      light_.push_back(LightPool{{}, SeededStream(seed_, stream_label(trial, entity, "rate")),
                                 m.rate, m.workload});
    }
  }
  previous_ = Matrix<int>(nodes_, L, 0);
  bounds_ = DelayTable(cat, DelayModel::EffectiveCapacity, s_.params.epsilon, s_.params.y_max);
}

void Engine::arrivals(std::size_t t) {
  const auto& users = s_.graph.users();
  for (std::size_t u = 0; u < users.size(); ++u) snr_[u] = sample(users[u].snr, snr_streams_[u]);
  for (std::size_t i = 0; i < s_.subscriptions.size(); ++i) {
    const auto& sub = s_.subscriptions[i];
    std::uint64_t k = sample_count(sub.arrivals, arrival_streams_[i]);
    const TaskType& type = s_.catalog.task_types()[sub.task_type];
    const User& user = users[sub.user];
    for (std::uint64_t c = 0; c < k; ++c) {
      Task task;
      task.trace.id = tasks_.size();
      task.trace.user = sub.user;
      task.trace.type = sub.task_type;
      task.trace.arrival = static_cast<double>(t);
      try {
        task.trace.uplink = uplink_delay(type.input_payload, user.bandwidth, snr_[sub.user]);
      } catch (const ZeroRateError&) {
        task.trace.uplink = kInf;
      }
      task.trace.deadline = type.deadline;
      task.trace.entry = user.attached;
      const TaskDag& dag = s_.catalog.dag(sub.task_type);
      task.trace.stages.resize(dag.size());
      for (std::size_t st = 0; st < dag.size(); ++st) task.trace.stages[st].ms = dag.ms(st);
      task.queue = VirtualQueue{task.trace.id, s_.params.zeta, s_.params.zeta, s_.params.phi};
      task.undispatched = dag.size();
      task.committed = task.trace.arrival + task.trace.uplink;
      active_.push_back(tasks_.size());
      tasks_.push_back(std::move(task));
      report_.arrivals_by_type[sub.task_type]++;
    }
    report_.slots[t].arrivals += k;
  }
}

double Engine::ready_at(const Task& task, std::size_t stage, NodeId v, double now) const {
  const TaskDag& dag = s_.catalog.dag(task.trace.type);
  const auto& parents = dag.parents(stage);
  if (parents.empty()) {
    std::size_t input = s_.catalog.microservices().size() + task.trace.type;
    double hop = task.trace.entry == v ? 0.0 : transfers_.delay(input, task.trace.entry, v);
    return task.trace.arrival + task.trace.uplink + hop;
  }
  double at = now;
  for (std::size_t p : parents) {
    const StageTrace& ps = task.trace.stages[p];
    double hop = ps.node == v ? 0.0 : transfers_.delay(ps.ms, ps.node, v);
    at = std::max(at, std::max(ps.finish, now) + hop);
  }
  return at;
}

void Engine::dispatch_core(std::size_t t, Task& task, std::size_t stage) {
  const double now = static_cast<double>(t);
  const StageInfo& info = stages_[task.trace.type][stage];
  const Microservice& ms = s_.catalog.ms(info.ms);
  const double length = processing_delay(ms.workload, ms.rate.first);
  auto& pool = core_[info.pos];

  std::vector<CoreCandidate> candidates;
  std::vector<double> ready(nodes_, -1.0);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    NodeId v = pool[i].node;
    if (ready[v] < 0.0) ready[v] = ready_at(task, stage, v, now);
    if (!std::isfinite(ready[v])) continue;
    double start = pool[i].earliest(ready[v], length);
    candidates.push_back({v, i, start, start + length, pool[i].busy_after(now)});
  }
  if (candidates.empty()) return;  // no reachable instance, retry next slot

  CoreQuery q{task.trace.id, info.pos, now, &candidates};
  std::size_t pick = strategy_.dispatch_core(q);
  if (pick >= candidates.size()) throw ConstraintViolation("core dispatch index out of range");
  const CoreCandidate& c = candidates[pick];
  pool[c.instance].reserve(c.start, c.finish);

  StageTrace& st = task.trace.stages[stage];
  st.dispatched = true;
  st.node = c.node;
  st.dispatch = now;
  st.ready = ready[c.node];
  st.start = c.start;
  st.finish = c.finish;
  st.share = 1;
  st.bound = 0.0;
  task.undispatched--;
  task.committed = std::max(task.committed, c.finish);
}

double Engine::light_finish(LightPool& pool, LightInstance& inst, double start, int share) {
  double residual = pool.workload;
  double at = start;
  auto slot = static_cast<std::size_t>(std::floor(at));
  const std::size_t guard = slot + 1000000;
  while (slot < guard) {
    while (inst.base + inst.rates.size() <= slot) inst.rates.push_back(-1.0);
    double& f = inst.rates[slot - inst.base];
    if (f < 0.0) f = std::max(0.0, sample(pool.rate, pool.stream));
    double speed = f / share;
    double window = static_cast<double>(slot + 1) - at;
    if (speed * window >= residual) return at + residual / speed;
    residual -= speed * window;
    at = static_cast<double>(slot + 1);
    ++slot;
  }
  return kInf;
}


void Engine::plan_light(std::size_t t,
                        const std::vector<std::pair<std::size_t, std::size_t>>& queued) {
  const double now = static_cast<double>(t);
  const std::size_t L = s_.catalog.light().size();
  SlotMetrics& metrics = report_.slots[t];

  ControllerInput in;
  in.carry = Matrix<int>(nodes_, L, 0);
  for (NodeId v = 0; v < nodes_; ++v)
    for (std::size_t l = 0; l < L; ++l)
      for (const auto& inst : light_[v * L + l].instances)
        if (inst.busy_until > now + kTimeEps) in.carry(v, l)++;
  in.previous = previous_;
  in.residual = Matrix<double>(nodes_, resources_, 0.0);
  for (NodeId v = 0; v < nodes_; ++v) {
    for (std::size_t k = 0; k < resources_; ++k) {
      double left = s_.graph.node(v).capacity[k] - core_usage_(v, k);
      for (std::size_t l = 0; l < L; ++l) left -= in.carry(v, l) * light_demand_(l, k);
      in.residual(v, k) = left;
    }
  }
  in.demand = light_demand_;
  in.prices = light_prices_;
  in.eta = s_.params.eta;
  in.mode = s_.params.cost_mode;

  std::vector<std::vector<double>> ready(queued.size());
  for (std::size_t i = 0; i < queued.size(); ++i) {
    const Task& task = tasks_[queued[i].first];
    std::size_t stage = queued[i].second;
    LightRequest r;
    r.id = i;
    r.ms = stages_[task.trace.type][stage].pos;
    r.weight = task.queue.weight * task.queue.value;
    r.unserved = task.trace.deadline;
    r.network.resize(nodes_);
    ready[i].resize(nodes_);
    for (NodeId v = 0; v < nodes_; ++v) {
      ready[i][v] = ready_at(task, stage, v, now);
      r.network[v] = ready[i][v] - now;
    }
    in.requests.push_back(std::move(r));
  }

  LightPlan plan = strategy_.plan_light(in, t);
  const Matrix<int>& x = plan.instances;
  if (x.rows() != nodes_ || x.cols() != L)
    throw ConstraintViolation("light plan has wrong dimensions in slot " + std::to_string(t));
  for (NodeId v = 0; v < nodes_; ++v) {
    for (std::size_t l = 0; l < L; ++l)
      if (x(v, l) < in.carry(v, l))
        throw ConstraintViolation("slot " + std::to_string(t) + ": node " + s_.graph.node(v).id +
                                  " released a busy light instance");
    for (std::size_t k = 0; k < resources_; ++k) {
      double used = core_usage_(v, k);
      for (std::size_t l = 0; l < L; ++l) used += x(v, l) * light_demand_(l, k);
      if (used > s_.graph.node(v).capacity[k] + 1e-9)
        throw ConstraintViolation("slot " + std::to_string(t) + ": node " + s_.graph.node(v).id +
                                  " over capacity on resource " + s_.graph.resources()[k]);
    }
  }
  if (plan.assignment.size() != queued.size())
    throw ConstraintViolation("light assignment size mismatch in slot " + std::to_string(t));

  // Resize pools: busy instances stay, idle ones are kept up to the target.
  std::vector<std::vector<std::size_t>> order(nodes_ * L);
  for (NodeId v = 0; v < nodes_; ++v) {
    for (std::size_t l = 0; l < L; ++l) {
      auto& pool = light_[v * L + l];
      std::vector<LightInstance> busy, idle;
      for (auto& inst : pool.instances)
        (inst.busy_until > now + kTimeEps ? busy : idle).push_back(std::move(inst));
      std::size_t want = static_cast<std::size_t>(x(v, l));
      pool.instances = std::move(busy);
      std::size_t busy_count = pool.instances.size();
      for (auto& inst : idle) {
        if (pool.instances.size() >= want) break;
        pool.instances.push_back(std::move(inst));
      }
      while (pool.instances.size() < want) pool.instances.push_back(LightInstance{now, t, {}});
      // new work goes to idle instances first
      auto& o = order[v * L + l];
      for (std::size_t i = busy_count; i < want; ++i) o.push_back(i);
      for (std::size_t i = 0; i < busy_count; ++i) o.push_back(i);
    }
  }

  Matrix<int> tally(nodes_, L, 0);
  std::vector<std::vector<std::size_t>> cohort_of(nodes_ * L);  // request indices per slot
  std::vector<std::size_t> instance_of(queued.size(), 0);
  for (std::size_t i = 0; i < queued.size(); ++i) {
    if (!plan.assignment[i]) continue;
    NodeId v = *plan.assignment[i];
    std::size_t l = in.requests[i].ms;
    if (v >= nodes_ || x(v, l) <= 0 || !std::isfinite(ready[i][v]))
      throw ConstraintViolation("slot " + std::to_string(t) +
                                ": light task routed to a node without a usable instance");
    const auto& o = order[v * L + l];
    instance_of[i] = o[static_cast<std::size_t>(tally(v, l)) % o.size()];
    tally(v, l)++;
    cohort_of[v * L + l].push_back(i);
  }

  for (std::size_t key = 0; key < cohort_of.size(); ++key) {
    if (cohort_of[key].empty()) continue;
    auto& pool = light_[key];
    std::size_t l = key % L;
    // Each cohort keeps the share fixed at dispatch; earlier cohorts on the
    // same instance keep theirs.
    std::vector<int> share(pool.instances.size(), 0);
    for (std::size_t i : cohort_of[key]) share[instance_of[i]]++;
    for (std::size_t i : cohort_of[key]) {
      Task& task = tasks_[queued[i].first];
      std::size_t stage = queued[i].second;
      NodeId v = key / L;
      std::size_t k = instance_of[i];
      LightInstance& inst = pool.instances[k];
      double start = ready[i][v];
      double finish = light_finish(pool, inst, start, share[k]);
      inst.busy_until = std::max(inst.busy_until, finish);

      StageTrace& st = task.trace.stages[stage];
      st.dispatched = true;
      st.node = v;
      st.dispatch = now;
      st.ready = ready[i][v];
      st.start = start;
      st.finish = finish;
      st.share = share[k];
      st.bound = bounds_.delay(l, share[k]);
      task.undispatched--;
      task.committed = std::max(task.committed, finish);
      report_.light_stages++;
      if (finish - start > st.bound + kTimeEps) report_.light_bound_exceeded++;
    }
  }

  Matrix<int> parallelism(nodes_, L, 0);
  for (NodeId v = 0; v < nodes_; ++v)
    for (std::size_t l = 0; l < L; ++l)
      if (x(v, l) > 0) parallelism(v, l) = (tally(v, l) + x(v, l) - 1) / x(v, l);
  SlotCost c = light_slot_cost(t == 0 ? nullptr : &previous_, x, light_prices_,
                               s_.params.cost_mode, &parallelism);
  metrics.cost_light = c.light();
  metrics.light_requests = queued.size();
  metrics.counters = plan.counters;
  previous_ = x;
  if (opt_.keep_trace) report_.light_schedule.push_back(x);
}

void Engine::close_slot(std::size_t t, SlotMetrics& m) {
  const double end = static_cast<double>(t + 1);
  std::vector<std::size_t> still;
  double sum_h = 0.0;
  double max_h = 0.0;
  double min_h = kInf;
  for (std::size_t idx : active_) {
    Task& task = tasks_[idx];
    TaskTrace& tr = task.trace;
    const StageTrace& sink = tr.stages[s_.catalog.dag(tr.type).sink()];
    if (sink.dispatched && sink.finish <= end + kTimeEps) {
      tr.status = TaskStatus::Done;
      tr.finish = sink.finish;
      m.completions++;
      report_.completions_by_type[tr.type]++;
      if (tr.latency() <= tr.deadline + kTimeEps) m.on_time++;
      continue;
    }
    if (end - tr.arrival > s_.params.expiry_factor * tr.deadline) {
      tr.status = TaskStatus::Expired;
      m.expired++;
      report_.expired_by_type[tr.type]++;
      continue;
    }
    double latency = std::max(end, task.committed) - tr.arrival;
    task.queue = queue_update(task.queue, latency, tr.deadline);
    sum_h += task.queue.value;
    max_h = std::max(max_h, task.queue.value);
    min_h = std::min(min_h, task.queue.value);
    still.push_back(idx);
  }
  active_ = std::move(still);
  m.active = active_.size();
  if (!active_.empty()) {
    m.mean_H = sum_h / static_cast<double>(active_.size());
    m.max_H = max_h;
    m.min_H = min_h;
    report_.min_queue = std::min(report_.min_queue, min_h);
  }
}

TrialReport Engine::run() {
  if (opt_.horizon == 0) throw InvalidArgument("horizon must be positive");
  setup();
  const auto& cat = s_.catalog;
  const std::size_t types = cat.task_types().size();
  report_.strategy = strategy_.name();
  report_.seed = seed_;
  report_.multiplier = opt_.multiplier;
  report_.horizon = opt_.horizon;
  report_.arrivals_by_type.assign(types, 0);
  report_.completions_by_type.assign(types, 0);
  report_.expired_by_type.assign(types, 0);
  report_.active_by_type.assign(types, 0);
  report_.min_queue = s_.params.zeta;
  report_.slots.resize(opt_.horizon);

  Deployment dep = strategy_.deploy(s_, seed_, opt_.horizon);
  const std::size_t C = cat.core().size();
  if (dep.core.rows() != nodes_ || dep.core.cols() != C)
    throw ConstraintViolation("core deployment has wrong dimensions");
  core_usage_ = Matrix<double>(nodes_, resources_, 0.0);
  core_.assign(C, {});
  double core_deploy = 0.0;
  double core_maintain = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    const Microservice& ms = cat.ms(cat.core()[c]);
    for (NodeId v = 0; v < nodes_; ++v) {
      int n = dep.core(v, c);
      if (n < 0) throw ConstraintViolation("negative core instance count");
      for (int i = 0; i < n; ++i) core_[c].push_back(CoreInstance{v, {}});
      for (std::size_t k = 0; k < resources_; ++k) core_usage_(v, k) += n * ms.demand[k];
      core_deploy += n * ms.prices.deploy;
      core_maintain += n * ms.prices.maintain;
    }
  }
  for (NodeId v = 0; v < nodes_; ++v)
    for (std::size_t k = 0; k < resources_; ++k)
      if (core_usage_(v, k) > s_.graph.node(v).capacity[k] + 1e-9)
        throw ConstraintViolation("core deployment over capacity at node " + s_.graph.node(v).id);
  report_.core_deployment = dep.core;

  std::vector<std::pair<std::size_t, std::size_t>> queued;
  for (std::size_t t = 0; t < opt_.horizon; ++t) {
    const double now = static_cast<double>(t);
    SlotMetrics& m = report_.slots[t];
    m.slot = t;
    arrivals(t);
    for (auto& pool : core_)
      for (auto& inst : pool) inst.prune(now);

    queued.clear();
    for (std::size_t idx : active_) {
      Task& task = tasks_[idx];
      if (task.undispatched == 0) continue;
      const TaskDag& dag = cat.dag(task.trace.type);
      for (std::size_t st = 0; st < dag.size(); ++st) {
        if (task.trace.stages[st].dispatched) continue;
        bool runnable = true;
        for (std::size_t p : dag.parents(st)) {
          const StageTrace& ps = task.trace.stages[p];
          if (!ps.dispatched || ps.finish > now + kTimeEps) {
            runnable = false;
            break;
          }
        }
        if (!runnable) continue;
        if (stages_[task.trace.type][st].core)
          dispatch_core(t, task, st);
        else
          queued.emplace_back(idx, st);
      }
    }
    plan_light(t, queued);

    m.cost_core = core_maintain + (t == 0 ? core_deploy : 0.0);
    close_slot(t, m);

    report_.arrivals += m.arrivals;
    report_.completions += m.completions;
    report_.on_time += m.on_time;
    report_.expired += m.expired;
    report_.cost_core += m.cost_core;
    report_.cost_light += m.cost_light;
  }
  report_.active = active_.size();
  for (std::size_t idx : active_) report_.active_by_type[tasks_[idx].trace.type]++;
  if (opt_.keep_trace) {
    report_.tasks.reserve(tasks_.size());
    for (auto& task : tasks_) report_.tasks.push_back(std::move(task.trace));
  }
  return std::move(report_);
}

}  // namespace

double TrialReport::completion_rate() const { return safe_rate(completions, arrivals); }
double TrialReport::on_time_rate() const { return safe_rate(on_time, arrivals); }
double TrialRow::completion_rate() const { return safe_rate(completions, arrivals); }
double TrialRow::on_time_rate() const { return safe_rate(on_time, arrivals); }

TrialReport run_trial(const Scenario& s, Strategy& strategy, std::uint64_t seed,
                      const TrialOptions& options) {
  if (!(options.multiplier > 0.0)) throw InvalidArgument("load multiplier must be positive");
  Scenario scaled = s.scaled(options.multiplier);
  Engine engine(scaled, strategy, seed, options);
  return engine.run();
}

std::string audit_resources(const Scenario& s, const TrialReport& r) {
  const auto& cat = s.catalog;
  const std::size_t V = s.graph.node_count();
  const std::size_t K = s.graph.resource_count();
  if (r.light_schedule.size() != r.horizon) return "trace holds no light schedule";
  for (std::size_t t = 0; t < r.horizon; ++t) {
    const Matrix<int>& x = r.light_schedule[t];
    for (NodeId v = 0; v < V; ++v) {
      for (std::size_t k = 0; k < K; ++k) {
        double used = 0.0;
        for (std::size_t c = 0; c < cat.core().size(); ++c)
          used += r.core_deployment(v, c) * cat.ms(cat.core()[c]).demand[k];
        for (std::size_t l = 0; l < cat.light().size(); ++l)
          used += x(v, l) * cat.ms(cat.light()[l]).demand[k];
        if (used > s.graph.node(v).capacity[k] + 1e-9)
          return "slot " + std::to_string(t) + " node " + s.graph.node(v).id + " resource " +
                 s.graph.resources()[k];
      }
    }
  }
  return {};
}

void write_slot_csv(std::ostream& out, const TrialReport& r) {
  out << "slot,arrivals,completions,on_time,expired,cost_core,cost_light,mean_H,max_H\n";
  for (const auto& m : r.slots) {
    out << m.slot << ',' << m.arrivals << ',' << m.completions << ',' << m.on_time << ','
        << m.expired << ',' << m.cost_core << ',' << m.cost_light << ',' << m.mean_H << ','
        << m.max_H << '\n';
  }
}

void write_trace_jsonl(std::ostream& out, const TrialReport& r) {
  for (const auto& t : r.tasks) {
    nlohmann::json j;
    j["id"] = t.id;
    j["user"] = t.user;
    j["type"] = t.type;
    j["arrival"] = t.arrival;
    j["uplink"] = t.uplink;
    j["deadline"] = t.deadline;
    j["entry"] = t.entry;
    j["status"] = t.status == TaskStatus::Done ? "done"
                  : t.status == TaskStatus::Expired ? "expired"
                                                    : "active";
    if (t.status == TaskStatus::Done) j["finish"] = t.finish;
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& st : t.stages) {
      nlohmann::json e{{"ms", st.ms}, {"dispatched", st.dispatched}};
      if (st.dispatched) {
        e["node"] = st.node;
        e["dispatch"] = st.dispatch;
        e["ready"] = st.ready;
        e["start"] = st.start;
        e["finish"] = st.finish;
        e["share"] = st.share;
      }
      stages.push_back(std::move(e));
    }
    j["stages"] = std::move(stages);
    out << j.dump() << '\n';
  }
}

TrialRow row_of(const TrialReport& r) {
  return TrialRow{r.strategy, r.seed,    r.multiplier, r.arrivals,  r.completions,
                  r.on_time,  r.expired, r.active,     r.cost_core, r.cost_light};
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  double pos = q * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  double w = pos - static_cast<double>(lo);
  return values[lo] + w * (values[hi] - values[lo]);
}

Distribution describe(std::span<const double> values) {
  Distribution d;
  d.n = values.size();
  if (values.empty()) return d;
  std::vector<double> v(values.begin(), values.end());
  d.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - d.mean) * (x - d.mean);
    d.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  d.q05 = quantile(v, 0.05);
  d.q25 = quantile(v, 0.25);
  d.q50 = quantile(v, 0.50);
  d.q75 = quantile(v, 0.75);
  d.q95 = quantile(v, 0.95);
  return d;
}

Interval bootstrap_mean_ci(std::span<const double> values, double level, std::size_t resamples,
                           std::uint64_t seed) {
  if (values.empty()) throw InvalidArgument("bootstrap of an empty sample");
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must be in (0,1)");
  SeededStream rng(seed, "bootstrap");
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> means;
  means.reserve(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += values[pick(rng.engine())];
    means.push_back(sum / static_cast<double>(values.size()));
  }
  double tail = (1.0 - level) / 2.0;
  return {quantile(means, tail), quantile(means, 1.0 - tail)};
}

ExperimentSummary aggregate(std::span<const TrialRow> rows, const std::string& reference) {
  if (rows.empty()) throw InvalidArgument("aggregate needs at least one trial");
  ExperimentSummary out;
  std::vector<std::pair<std::string, double>> keys;
  for (const auto& r : rows) {
    std::pair<std::string, double> key{r.strategy, r.multiplier};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [name, mult] : keys) {
    std::vector<double> on_time, completion, cost;
    for (const auto& r : rows) {
      if (r.strategy != name || r.multiplier != mult) continue;
      on_time.push_back(r.on_time_rate());
      completion.push_back(r.completion_rate());
      cost.push_back(r.cost());
    }
    GroupSummary g{name, mult, describe(on_time), describe(completion), describe(cost), {}};
    g.on_time_ci = bootstrap_mean_ci(on_time, 0.95, 2000, 7);
    out.groups.push_back(std::move(g));
  }

  const std::string ref = reference.empty() ? rows.front().strategy : reference;
  for (const auto& [name, mult] : keys) {
    if (name == ref) continue;
    std::map<std::uint64_t, const TrialRow*> base;
    for (const auto& r : rows)
      if (r.strategy == ref && r.multiplier == mult) base[r.seed] = &r;
    PairedSummary p{name, ref, mult, 0, 0.0, 0.0, 0.0, 0.0};
    for (const auto& r : rows) {
      if (r.strategy != name || r.multiplier != mult) continue;
      auto it = base.find(r.seed);
      if (it == base.end()) continue;
      double dt = r.on_time_rate() - it->second->on_time_rate();
      double dc = r.cost() - it->second->cost();
      p.pairs++;
      p.on_time_diff += dt;
      p.cost_diff += dc;
      if (dt < 0.0) p.on_time_lower += 1.0;
      if (dc < 0.0) p.cost_lower += 1.0;
    }
    if (p.pairs > 0) {
      double n = static_cast<double>(p.pairs);
      p.on_time_diff /= n;
      p.cost_diff /= n;
      p.on_time_lower /= n;
      p.cost_lower /= n;
    }
    out.paired.push_back(p);
  }
  return out;
}

}  // namespace edgefm
