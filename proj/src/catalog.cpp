#include "edgefm/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>

#include "edgefm/error.hpp"

namespace edgefm {

namespace {

struct IndexedGraph {
  std::vector<std::string> names;
  std::vector<std::size_t> child;
  std::vector<std::vector<std::size_t>> parents;
};

// Builds index form and checks everything except acyclicity and sink count.
IndexedGraph index_graph(const TaskType& t) {
  IndexedGraph g;
  if (t.stages.empty()) throw StructuralError("", "task type " + t.id + " has no stages");
  std::map<std::string, std::size_t> pos;
  for (const auto& s : t.stages) {
    if (!pos.emplace(s, g.names.size()).second)
      throw StructuralError(s, "stage " + s + " listed twice in " + t.id);
    g.names.push_back(s);
  }
  const std::size_t n = g.names.size();
  g.child.assign(n, kNoStage);
  g.parents.assign(n, {});
  std::vector<std::size_t> out(n, 0);
  for (const auto& [p, c] : t.edges) {
    auto ip = pos.find(p);
    auto ic = pos.find(c);
    if (ip == pos.end()) throw StructuralError(p, "edge from unknown stage " + p);
    if (ic == pos.end()) throw StructuralError(c, "edge to unknown stage " + c);
    if (ip->second == ic->second) throw StructuralError(p, "self loop at " + p);
    ++out[ip->second];
    if (g.child[ip->second] == kNoStage) g.child[ip->second] = ic->second;
    g.parents[ic->second].push_back(ip->second);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (out[i] > 1)
      throw StructuralError(g.names[i], "stage " + g.names[i] + " has more than one successor");
  return g;
}

void check_shape(const IndexedGraph& g, const std::string& type_id) {
  const std::size_t n = g.names.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t v = i;
    for (std::size_t steps = 0; v != kNoStage; ++steps) {
      if (steps > n)
        throw StructuralError(g.names[i], "cycle through " + g.names[i] + " in " + type_id);
      v = g.child[v];
    }
  }
  std::size_t sinks = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.child[i] != kNoStage) continue;
    if (++sinks > 1)
      throw StructuralError(g.names[i], "extra sink " + g.names[i] + " in " + type_id);
  }
}

std::vector<std::size_t> topo(const IndexedGraph& g) {
  const std::size_t n = g.names.size();
  std::vector<std::size_t> indeg(n);
  for (std::size_t i = 0; i < n; ++i) indeg[i] = g.parents[i].size();
  auto cmp = [&](std::size_t a, std::size_t b) { return g.names[a] > g.names[b]; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> ready(cmp);
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push(i);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    std::size_t s = ready.top();
    ready.pop();
    order.push_back(s);
    std::size_t c = g.child[s];
    if (c != kNoStage && --indeg[c] == 0) ready.push(c);
  }
  return order;
}

}  // namespace

std::string to_string(Tier t) { return t == Tier::Core ? "core" : "light"; }

Tier tier_from_string(const std::string& s) {
  if (s == "core") return Tier::Core;
  if (s == "light") return Tier::Light;
  throw InvalidArgument("unknown tier '" + s + "'");
}

void validate_inverse_tree(const TaskType& t) { check_shape(index_graph(t), t.id); }

std::vector<std::string> topological_stages(const TaskType& t) {
  IndexedGraph g = index_graph(t);
  check_shape(g, t.id);
  std::vector<std::string> out;
  for (std::size_t i : topo(g)) out.push_back(g.names[i]);
  return out;
}

std::vector<std::string> descendants(const TaskType& t, const std::string& stage) {
  IndexedGraph g = index_graph(t);
  check_shape(g, t.id);
  auto it = std::find(g.names.begin(), g.names.end(), stage);
  if (it == g.names.end()) throw InvalidArgument("unknown stage " + stage);
  std::vector<std::string> out;
  for (std::size_t v = g.child[it - g.names.begin()]; v != kNoStage; v = g.child[v])
    out.push_back(g.names[v]);
  return out;
}

TaskDag::TaskDag(const TaskType& t, const std::vector<Microservice>& catalog) {
  IndexedGraph g = index_graph(t);
  check_shape(g, t.id);
  for (const auto& name : g.names) {
    auto it = std::find_if(catalog.begin(), catalog.end(),
                           [&](const Microservice& m) { return m.id == name; });
    if (it == catalog.end())
      throw StructuralError(name, "stage " + name + " is not a catalog microservice");
    ms_.push_back(static_cast<std::size_t>(it - catalog.begin()));
  }
  child_ = g.child;
  parents_ = g.parents;
  for (auto& p : parents_) std::sort(p.begin(), p.end());
  order_ = topo(g);
  for (std::size_t s = 0; s < size(); ++s) {
    if (parents_[s].empty()) roots_.push_back(s);
    if (child_[s] == kNoStage) sink_ = s;
  }
}

std::vector<std::size_t> TaskDag::descendants(std::size_t s) const {
  std::vector<std::size_t> out;
  for (std::size_t v = child_.at(s); v != kNoStage; v = child_[v]) out.push_back(v);
  return out;
}

std::size_t TaskDag::stage_of(std::size_t m) const {
  for (std::size_t s = 0; s < ms_.size(); ++s)
    if (ms_[s] == m) return s;
  return kNoStage;
}

Catalog::Catalog(std::vector<Microservice> microservices, std::vector<TaskType> types,
                 std::size_t resource_count)
    : ms_(std::move(microservices)), types_(std::move(types)) {
  std::set<std::string> ids;
  tier_pos_.resize(ms_.size());
  for (std::size_t m = 0; m < ms_.size(); ++m) {
    const auto& s = ms_[m];
    if (!ids.insert(s.id).second) throw InvalidArgument("duplicate microservice id " + s.id);
    if (s.demand.size() != resource_count)
      throw InvalidArgument("microservice " + s.id + " demand length mismatch");
    for (double d : s.demand)
      if (!(d >= 0) || !std::isfinite(d))
        throw InvalidArgument("microservice " + s.id + " has invalid demand");
    if (!(s.workload > 0)) throw InvalidArgument("microservice " + s.id + " workload must be positive");
    if (!(s.output >= 0)) throw InvalidArgument("microservice " + s.id + " output must be non-negative");
    s.rate.validate();
    if (!(mean(s.rate) > 0)) throw InvalidArgument("microservice " + s.id + " needs a positive mean rate");
    if (s.tier == Tier::Core && s.rate.family != Family::Constant)
      throw InvalidArgument("core microservice " + s.id + " needs a constant rate");
    if (s.prices.deploy < 0 || s.prices.maintain < 0 || s.prices.parallelism < 0)
      throw InvalidArgument("microservice " + s.id + " has a negative price");
    if (s.tier == Tier::Core) {
      tier_pos_[m] = core_.size();
      core_.push_back(m);
    } else {
      tier_pos_[m] = light_.size();
      light_.push_back(m);
    }
  }
  std::set<std::string> tids;
  users_.assign(ms_.size(), {});
  for (std::size_t n = 0; n < types_.size(); ++n) {
    const auto& t = types_[n];
    if (!tids.insert(t.id).second) throw InvalidArgument("duplicate task type id " + t.id);
    if (!(t.deadline > 0)) throw InvalidArgument("task type " + t.id + " deadline must be positive");
    if (!(t.input_payload >= 0)) throw InvalidArgument("task type " + t.id + " payload must be non-negative");
    dags_.emplace_back(t, ms_);
    for (std::size_t s = 0; s < dags_.back().size(); ++s) users_[dags_.back().ms(s)].push_back(n);
  }
}

std::size_t Catalog::ms_index(const std::string& id) const {
  for (std::size_t m = 0; m < ms_.size(); ++m)
    if (ms_[m].id == id) return m;
  throw InvalidArgument("unknown microservice " + id);
}

std::size_t Catalog::type_index(const std::string& id) const {
  for (std::size_t n = 0; n < types_.size(); ++n)
    if (types_[n].id == id) return n;
  throw InvalidArgument("unknown task type " + id);
}

}  // namespace edgefm
