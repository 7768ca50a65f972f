#include "edgefm/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "edgefm/error.hpp"

namespace edgefm {

using json = nlohmann::json;

namespace {

// Line of the dotted path's last key, found by scanning for each key in turn.
std::optional<std::size_t> locate(const std::string& text, const std::string& path) {
  std::size_t pos = 0;
  bool any = false;
  std::string name;
  auto seek = [&](const std::string& key) {
    if (key.empty()) return true;
    std::size_t at = text.find('"' + key + '"', pos);
    if (at == std::string::npos) return false;
    pos = at;
    any = true;
    return true;
  };
  for (char c : path) {
    if (c == '.' || c == '[') {
      if (!seek(name)) return std::nullopt;
      name.clear();
      if (c == '[') name = "\x01";  // skip index text
    } else if (c == ']') {
      name.clear();
    } else if (name != "\x01") {
      name += c;
    }
  }
  if (name != "\x01" && !seek(name)) return std::nullopt;
  if (!any) return std::nullopt;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n'));
}

class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    std::string msg = source_ + ": field '" + path + "': " + what;
    if (auto line = locate(text_, path)) msg += " (line " + std::to_string(*line) + ")";
    throw ConfigError(msg);
  }

  const json& at(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(join(path, key), "missing");
    return *it;
  }

  const json* find(const json& obj, const std::string& key) const {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  void only(const json& obj, std::initializer_list<const char*> keys, const std::string& path) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (const char* k : keys) ok = ok || it.key() == k;
      if (!ok) fail(join(path, it.key()), "unknown field");
    }
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
  }
  double number(const json& obj, const std::string& key, const std::string& path) const {
    return number(at(obj, key, path), join(path, key));
  }
  long long integer(const json& j, const std::string& path) const {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long long>();
  }
  long long integer(const json& obj, const std::string& key, const std::string& path) const {
    return integer(at(obj, key, path), join(path, key));
  }
  std::size_t count(const json& obj, const std::string& key, const std::string& path) const {
    long long v = integer(obj, key, path);
    if (v < 0) fail(join(path, key), "must be non-negative");
    return static_cast<std::size_t>(v);
  }
  bool boolean(const json& obj, const std::string& key, const std::string& path) const {
    const json& j = at(obj, key, path);
    if (!j.is_boolean()) fail(join(path, key), "expected true or false");
    return j.get<bool>();
  }
  std::string string(const json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }
  std::string string(const json& obj, const std::string& key, const std::string& path) const {
    return string(at(obj, key, path), join(path, key));
  }
  const json& array(const json& obj, const std::string& key, const std::string& path) const {
    const json& a = at(obj, key, path);
    if (!a.is_array()) fail(join(path, key), "expected an array");
    return a;
  }
  std::vector<double> numbers(const json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], index(path, i)));
    return out;
  }
  std::vector<std::string> strings(const json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(string(j[i], index(path, i)));
    return out;
  }
  std::pair<std::string, std::string> pair(const json& j, const std::string& path) const {
    if (!j.is_array() || j.size() != 2) fail(path, "expected [from, to]");
    return {string(j[0], index(path, 0)), string(j[1], index(path, 1))};
  }

  Range range(const json& j, const std::string& path) const {
    if (!j.is_array() || j.size() != 2) fail(path, "expected [low, high]");
    Range r{number(j[0], index(path, 0)), number(j[1], index(path, 1))};
    if (r.low > r.high) fail(path, "range is inverted (low > high)");
    return r;
  }
  Range range(const json& obj, const std::string& key, const std::string& path) const {
    return range(at(obj, key, path), join(path, key));
  }
  std::vector<Range> ranges(const json& obj, const std::string& key, const std::string& path) const {
    const json& a = array(obj, key, path);
    std::vector<Range> out;
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(range(a[i], index(join(path, key), i)));
    return out;
  }

  Prices prices(const json& j, const std::string& path) const {
    auto v = numbers(j, path);
    if (v.size() != 3) fail(path, "expected [deploy, maintain, parallelism]");
    return Prices{v[0], v[1], v[2]};
  }

  DistributionSpec distribution(const json& j, const std::string& path) const {
    std::string fam = string(at(j, "family", path), join(path, "family"));
    DistributionSpec d;
    try {
      d.family = family_from_string(fam);
    } catch (const Error& e) {
      fail(join(path, "family"), e.what());
    }
    switch (d.family) {
      case Family::Poisson:
        only(j, {"family", "mean"}, path);
        d.first = number(j, "mean", path);
        break;
      case Family::Nakagami:
        only(j, {"family", "shape", "spread"}, path);
        d.first = number(j, "shape", path);
        d.second = number(j, "spread", path);
        break;
      case Family::Gamma:
        only(j, {"family", "shape", "scale"}, path);
        d.first = number(j, "shape", path);
        d.second = number(j, "scale", path);
        break;
      case Family::Constant:
        only(j, {"family", "value"}, path);
        d.first = number(j, "value", path);
        break;
      case Family::Uniform:
        only(j, {"family", "low", "high"}, path);
        d.first = number(j, "low", path);
        d.second = number(j, "high", path);
        break;
    }
    try {
      d.validate();
    } catch (const Error& e) {
      fail(path, e.what());
    }
    return d;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
  static std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
  }

 private:
  const std::string& text_;
  std::string source_;
};

json distribution_json(const DistributionSpec& d) {
  switch (d.family) {
    case Family::Poisson: return {{"family", "poisson"}, {"mean", d.first}};
    case Family::Nakagami: return {{"family", "nakagami"}, {"shape", d.first}, {"spread", d.second}};
    case Family::Gamma: return {{"family", "gamma"}, {"shape", d.first}, {"scale", d.second}};
    case Family::Constant: return {{"family", "constant"}, {"value", d.first}};
    case Family::Uniform: return {{"family", "uniform"}, {"low", d.first}, {"high", d.second}};
  }
  return {};
}

json range_json(const Range& r) { return json::array({r.low, r.high}); }

json ranges_json(const std::vector<Range>& rs) {
  json a = json::array();
  for (const auto& r : rs) a.push_back(range_json(r));
  return a;
}

json prices_json(const Prices& p) { return json::array({p.deploy, p.maintain, p.parallelism}); }

json params_json(const Parameters& p) {
  json j{{"xi", p.xi},
         {"decay", p.decay},
         {"urgency_floor", p.urgency_floor},
         {"min_fraction", p.min_fraction},
         {"reserve", p.reserve},
         {"work_coverage", p.work_coverage},
         {"node_limit", p.node_limit},
         {"zeta", p.zeta},
         {"eta", p.eta},
         {"phi", p.phi},
         {"epsilon", p.epsilon},
         {"y_max", p.y_max},
         {"cost_mode", to_string(p.cost_mode)},
         {"expiry_factor", p.expiry_factor}};
  if (p.big_m) j["big_m"] = *p.big_m;
  if (p.kappa) j["kappa"] = *p.kappa;
  j["ga"] = {{"population", p.ga.population},
             {"generations", p.ga.generations},
             {"mutation", p.ga.mutation},
             {"crossover", p.ga.crossover},
             {"lambda", p.ga.lambda},
             {"tournament", p.ga.tournament},
             {"gene_max", p.ga.gene_max},
             {"horizon_fraction", p.ga.horizon_fraction}};
  return j;
}

// Missing keys keep their defaults; unknown keys are errors.
Parameters read_params(const Reader& rd, const json& j, const std::string& path) {
  Parameters p;
  rd.only(j, {"xi", "decay", "urgency_floor", "big_m", "min_fraction", "kappa", "reserve",
              "work_coverage", "node_limit", "zeta", "eta", "phi", "epsilon", "y_max", "cost_mode",
              "expiry_factor", "ga"},
          path);
  auto num = [&](const char* key, double& out) {
    if (rd.find(j, key)) out = rd.number(j, key, path);
  };
  auto integer = [&](const char* key, auto& out) {
    if (rd.find(j, key)) out = static_cast<std::remove_reference_t<decltype(out)>>(rd.integer(j, key, path));
  };
  num("xi", p.xi);
  num("decay", p.decay);
  num("urgency_floor", p.urgency_floor);
  num("min_fraction", p.min_fraction);
  num("reserve", p.reserve);
  if (rd.find(j, "work_coverage")) p.work_coverage = rd.boolean(j, "work_coverage", path);
  integer("node_limit", p.node_limit);
  num("zeta", p.zeta);
  num("eta", p.eta);
  num("phi", p.phi);
  num("epsilon", p.epsilon);
  integer("y_max", p.y_max);
  num("expiry_factor", p.expiry_factor);
  if (rd.find(j, "big_m")) p.big_m = static_cast<int>(rd.integer(j, "big_m", path));
  if (rd.find(j, "kappa")) p.kappa = static_cast<int>(rd.integer(j, "kappa", path));
  if (rd.find(j, "cost_mode")) {
    try {
      p.cost_mode = parallelism_mode_from_string(rd.string(j, "cost_mode", path));
    } catch (const Error& e) {
      rd.fail(Reader::join(path, "cost_mode"), e.what());
    }
  }
  if (const json* g = rd.find(j, "ga")) {
    std::string gp = Reader::join(path, "ga");
    rd.only(*g, {"population", "generations", "mutation", "crossover", "lambda", "tournament",
                 "gene_max", "horizon_fraction"},
            gp);
    auto gnum = [&](const char* key, double& out) {
      if (rd.find(*g, key)) out = rd.number(*g, key, gp);
    };
    auto gint = [&](const char* key, int& out) {
      if (rd.find(*g, key)) out = static_cast<int>(rd.integer(*g, key, gp));
    };
    gint("population", p.ga.population);
    gint("generations", p.ga.generations);
    gnum("mutation", p.ga.mutation);
    gnum("crossover", p.ga.crossover);
    gnum("lambda", p.ga.lambda);
    gint("tournament", p.ga.tournament);
    gint("gene_max", p.ga.gene_max);
    gnum("horizon_fraction", p.ga.horizon_fraction);
  }
  try {
    p.validate();
  } catch (const Error& e) {
    rd.fail(path, e.what());
  }
  return p;
}

json experiment_json(const ExperimentConfig& e) {
  json j{{"strategies", e.strategies},
         {"multipliers", e.multipliers},
         {"horizon", e.horizon},
         {"jobs", e.jobs}};
  if (e.seeds.empty())
    j["trials"] = e.trials;
  else
    j["seeds"] = e.seeds;
  return j;
}

ExperimentConfig read_experiment(const Reader& rd, const json& j, const std::string& path) {
  ExperimentConfig e;
  rd.only(j, {"strategies", "seeds", "trials", "multipliers", "horizon", "jobs"}, path);
  if (rd.find(j, "strategies")) e.strategies = rd.strings(j["strategies"], Reader::join(path, "strategies"));
  if (const json* s = rd.find(j, "seeds")) {
    if (!s->is_array()) rd.fail(Reader::join(path, "seeds"), "expected an array of integers");
    for (std::size_t i = 0; i < s->size(); ++i) {
      long long v = rd.integer((*s)[i], Reader::index(Reader::join(path, "seeds"), i));
      if (v < 0) rd.fail(Reader::index(Reader::join(path, "seeds"), i), "must be non-negative");
      e.seeds.push_back(static_cast<std::uint64_t>(v));
    }
  }
  if (rd.find(j, "trials")) e.trials = rd.count(j, "trials", path);
  if (rd.find(j, "multipliers")) e.multipliers = rd.numbers(j["multipliers"], Reader::join(path, "multipliers"));
  if (rd.find(j, "horizon")) e.horizon = rd.count(j, "horizon", path);
  if (rd.find(j, "jobs")) e.jobs = rd.count(j, "jobs", path);
  if (e.strategies.empty()) rd.fail(Reader::join(path, "strategies"), "needs at least one strategy");
  if (e.seeds.empty() && e.trials == 0) rd.fail(Reader::join(path, "trials"), "needs at least one seed");
  for (double m : e.multipliers)
    if (!(m > 0)) rd.fail(Reader::join(path, "multipliers"), "multipliers must be positive");
  if (e.multipliers.empty()) rd.fail(Reader::join(path, "multipliers"), "needs at least one multiplier");
  if (e.horizon == 0) rd.fail(Reader::join(path, "horizon"), "must be positive");
  if (e.jobs == 0) rd.fail(Reader::join(path, "jobs"), "must be positive");
  return e;
}

json task_type_json(const TaskType& t, bool concrete) {
  json edges = json::array();
  for (const auto& [a, b] : t.edges) edges.push_back(json::array({a, b}));
  json j{{"id", t.id}, {"stages", t.stages}, {"edges", edges}};
  if (concrete) {
    j["input_payload"] = t.input_payload;
    j["deadline"] = t.deadline;
  }
  return j;
}

TaskType read_task_type(const Reader& rd, const json& j, const std::string& path, bool concrete) {
  if (concrete)
    rd.only(j, {"id", "stages", "edges", "input_payload", "deadline"}, path);
  else
    rd.only(j, {"id", "stages", "edges"}, path);
  TaskType t;
  t.id = rd.string(j, "id", path);
  t.stages = rd.strings(rd.array(j, "stages", path), Reader::join(path, "stages"));
  const json& edges = rd.array(j, "edges", path);
  for (std::size_t i = 0; i < edges.size(); ++i)
    t.edges.push_back(rd.pair(edges[i], Reader::index(Reader::join(path, "edges"), i)));
  if (concrete) {
    t.input_payload = rd.number(j, "input_payload", path);
    t.deadline = rd.number(j, "deadline", path);
  }
  return t;
}

Tier read_tier(const Reader& rd, const json& j, const std::string& path) {
  try {
    return tier_from_string(rd.string(j, "tier", path));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    rd.fail(Reader::join(path, "tier"), e.what());
  }
}

NodeKind read_kind(const Reader& rd, const json& j, const std::string& path) {
  try {
    return node_kind_from_string(rd.string(j, "kind", path));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    rd.fail(Reader::join(path, "kind"), e.what());
  }
}

std::size_t lookup(const Reader& rd, const std::map<std::string, std::size_t>& ids,
                   const std::string& id, const std::string& path) {
  auto it = ids.find(id);
  if (it == ids.end()) rd.fail(path, "unknown id '" + id + "'");
  return it->second;
}

Scenario read_scenario(const Reader& rd, const json& root) {
  const json& topo = rd.at(root, "topology", "");
  rd.only(topo, {"resources", "propagation_speed", "nodes", "links", "users"}, "topology");
  auto resources = rd.strings(rd.array(topo, "resources", "topology"), "topology.resources");
  double speed = rd.number(topo, "propagation_speed", "topology");

  std::vector<Node> nodes;
  std::map<std::string, std::size_t> node_ids;
  const json& jn = rd.array(topo, "nodes", "topology");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    std::string p = Reader::index("topology.nodes", i);
    rd.only(jn[i], {"id", "kind", "capacity"}, p);
    Node n{rd.string(jn[i], "id", p), read_kind(rd, jn[i], p),
           rd.numbers(rd.at(jn[i], "capacity", p), Reader::join(p, "capacity"))};
    if (!node_ids.emplace(n.id, i).second) rd.fail(Reader::join(p, "id"), "duplicate node id");
    nodes.push_back(std::move(n));
  }
  std::vector<Link> links;
  const json& jl = rd.array(topo, "links", "topology");
  for (std::size_t i = 0; i < jl.size(); ++i) {
    std::string p = Reader::index("topology.links", i);
    rd.only(jl[i], {"a", "b", "bandwidth", "distance"}, p);
    links.push_back(Link{lookup(rd, node_ids, rd.string(jl[i], "a", p), Reader::join(p, "a")),
                         lookup(rd, node_ids, rd.string(jl[i], "b", p), Reader::join(p, "b")),
                         rd.number(jl[i], "bandwidth", p), rd.number(jl[i], "distance", p)});
  }
  std::vector<User> users;
  std::map<std::string, std::size_t> user_ids;
  const json& ju = rd.array(topo, "users", "topology");
  for (std::size_t i = 0; i < ju.size(); ++i) {
    std::string p = Reader::index("topology.users", i);
    rd.only(ju[i], {"id", "attached", "bandwidth", "snr"}, p);
    User u{rd.string(ju[i], "id", p),
           lookup(rd, node_ids, rd.string(ju[i], "attached", p), Reader::join(p, "attached")),
           rd.number(ju[i], "bandwidth", p),
           rd.distribution(rd.at(ju[i], "snr", p), Reader::join(p, "snr"))};
    if (!user_ids.emplace(u.id, i).second) rd.fail(Reader::join(p, "id"), "duplicate user id");
    users.push_back(std::move(u));
  }

  const json& cat = rd.at(root, "catalog", "");
  rd.only(cat, {"microservices", "task_types"}, "catalog");
  std::vector<Microservice> ms;
  const json& jm = rd.array(cat, "microservices", "catalog");
  for (std::size_t i = 0; i < jm.size(); ++i) {
    std::string p = Reader::index("catalog.microservices", i);
    rd.only(jm[i], {"id", "tier", "demand", "workload", "output", "rate", "prices"}, p);
    Microservice m;
    m.id = rd.string(jm[i], "id", p);
    m.tier = read_tier(rd, jm[i], p);
    m.demand = rd.numbers(rd.at(jm[i], "demand", p), Reader::join(p, "demand"));
    m.workload = rd.number(jm[i], "workload", p);
    m.output = rd.number(jm[i], "output", p);
    m.rate = rd.distribution(rd.at(jm[i], "rate", p), Reader::join(p, "rate"));
    m.prices = rd.prices(rd.at(jm[i], "prices", p), Reader::join(p, "prices"));
    ms.push_back(std::move(m));
  }
  std::vector<TaskType> types;
  const json& jt = rd.array(cat, "task_types", "catalog");
  for (std::size_t i = 0; i < jt.size(); ++i)
    types.push_back(read_task_type(rd, jt[i], Reader::index("catalog.task_types", i), true));

  Scenario s;
  try {
    s.graph = NetworkGraph(resources, nodes, links, users, speed);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    rd.fail("topology", e.what());
  }
  std::map<std::string, std::size_t> type_ids;
  for (std::size_t i = 0; i < types.size(); ++i) type_ids.emplace(types[i].id, i);
  try {
    s.catalog = Catalog(ms, types, resources.size());
  } catch (const StructuralError& e) {
    rd.fail("catalog.task_types", std::string(e.what()) + " (stage " + e.stage() + ")");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    rd.fail("catalog", e.what());
  }

  const json& js = rd.array(root, "subscriptions", "");
  for (std::size_t i = 0; i < js.size(); ++i) {
    std::string p = Reader::index("subscriptions", i);
    rd.only(js[i], {"user", "type", "arrivals"}, p);
    s.subscriptions.push_back(
        Subscription{lookup(rd, user_ids, rd.string(js[i], "user", p), Reader::join(p, "user")),
                     lookup(rd, type_ids, rd.string(js[i], "type", p), Reader::join(p, "type")),
                     rd.distribution(rd.at(js[i], "arrivals", p), Reader::join(p, "arrivals"))});
  }
  if (const json* pj = rd.find(root, "parameters")) s.params = read_params(rd, *pj, "parameters");
  try {
    s.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    rd.fail("subscriptions", e.what());
  }
  return s;
}

TierRanges read_tier_ranges(const Reader& rd, const json& j, const std::string& path, Tier tier) {
  TierRanges t;
  if (tier == Tier::Core)
    rd.only(j, {"demand", "workload", "output", "rate", "prices"}, path);
  else
    rd.only(j, {"demand", "workload", "output", "gamma_shape", "gamma_scale", "prices"}, path);
  t.demand = rd.ranges(j, "demand", path);
  t.workload = rd.range(j, "workload", path);
  t.output = rd.range(j, "output", path);
  if (tier == Tier::Core) {
    t.rate = rd.range(j, "rate", path);
  } else {
    t.gamma_shape = rd.range(j, "gamma_shape", path);
    t.gamma_scale = rd.range(j, "gamma_scale", path);
  }
  t.prices = rd.prices(rd.at(j, "prices", path), Reader::join(path, "prices"));
  return t;
}

json tier_ranges_json(const TierRanges& t, Tier tier) {
  json j{{"demand", ranges_json(t.demand)},
         {"workload", range_json(t.workload)},
         {"output", range_json(t.output)},
         {"prices", prices_json(t.prices)}};
  if (tier == Tier::Core) {
    j["rate"] = range_json(t.rate);
  } else {
    j["gamma_shape"] = range_json(t.gamma_shape);
    j["gamma_scale"] = range_json(t.gamma_scale);
  }
  return j;
}

ScenarioRanges read_ranges(const Reader& rd, const json& root) {
  ScenarioRanges r;
  const json& topo = rd.at(root, "topology", "");
  rd.only(topo, {"resources", "propagation_speed", "nodes", "links", "users"}, "topology");
  r.resources = rd.strings(rd.array(topo, "resources", "topology"), "topology.resources");
  r.propagation_speed = rd.number(topo, "propagation_speed", "topology");
  const json& jn = rd.array(topo, "nodes", "topology");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    std::string p = Reader::index("topology.nodes", i);
    rd.only(jn[i], {"id", "kind"}, p);
    r.nodes.push_back(NodeSkeleton{rd.string(jn[i], "id", p), read_kind(rd, jn[i], p)});
  }
  const json& jl = rd.array(topo, "links", "topology");
  for (std::size_t i = 0; i < jl.size(); ++i)
    r.links.push_back(rd.pair(jl[i], Reader::index("topology.links", i)));
  const json& ju = rd.array(topo, "users", "topology");
  for (std::size_t i = 0; i < ju.size(); ++i) {
    std::string p = Reader::index("topology.users", i);
    rd.only(ju[i], {"id", "attached", "types"}, p);
    r.users.push_back(UserSkeleton{rd.string(ju[i], "id", p), rd.string(ju[i], "attached", p),
                                   rd.strings(rd.array(ju[i], "types", p), Reader::join(p, "types"))});
  }

  const json& cat = rd.at(root, "catalog", "");
  rd.only(cat, {"microservices", "task_types"}, "catalog");
  const json& jm = rd.array(cat, "microservices", "catalog");
  for (std::size_t i = 0; i < jm.size(); ++i) {
    std::string p = Reader::index("catalog.microservices", i);
    rd.only(jm[i], {"id", "tier"}, p);
    r.microservices.emplace_back(rd.string(jm[i], "id", p), read_tier(rd, jm[i], p));
  }
  const json& jt = rd.array(cat, "task_types", "catalog");
  for (std::size_t i = 0; i < jt.size(); ++i)
    r.task_types.push_back(read_task_type(rd, jt[i], Reader::index("catalog.task_types", i), false));

  const json& g = rd.at(root, "ranges", "");
  rd.only(g, {"core", "light", "edge_device", "edge_server", "arrival_mean", "deadline",
              "input_payload", "link_bandwidth", "link_distance", "snr_shape", "snr_spread",
              "user_bandwidth"},
          "ranges");
  r.core = read_tier_ranges(rd, rd.at(g, "core", "ranges"), "ranges.core", Tier::Core);
  r.light = read_tier_ranges(rd, rd.at(g, "light", "ranges"), "ranges.light", Tier::Light);
  const json& ed = rd.at(g, "edge_device", "ranges");
  rd.only(ed, {"capacity"}, "ranges.edge_device");
  r.device_capacity = rd.ranges(ed, "capacity", "ranges.edge_device");
  const json& es = rd.at(g, "edge_server", "ranges");
  rd.only(es, {"capacity"}, "ranges.edge_server");
  r.server_capacity = rd.ranges(es, "capacity", "ranges.edge_server");
  r.arrival_mean = rd.range(g, "arrival_mean", "ranges");
  r.deadline = rd.range(g, "deadline", "ranges");
  r.input_payload = rd.range(g, "input_payload", "ranges");
  r.link_bandwidth = rd.range(g, "link_bandwidth", "ranges");
  r.link_distance = rd.range(g, "link_distance", "ranges");
  r.snr_shape = rd.range(g, "snr_shape", "ranges");
  r.snr_spread = rd.range(g, "snr_spread", "ranges");
  r.user_bandwidth = rd.range(g, "user_bandwidth", "ranges");
  if (const json* pj = rd.find(root, "parameters")) r.params = read_params(rd, *pj, "parameters");
  try {
    r.validate();
  } catch (const ConfigError& e) {
    // re-raise with line information
    std::string what = e.what();
    auto q1 = what.find('\'');
    auto q2 = what.find('\'', q1 + 1);
    if (q1 != std::string::npos && q2 != std::string::npos)
      rd.fail(what.substr(q1 + 1, q2 - q1 - 1), what.substr(what.find(": ", q2) + 2));
    throw;
  }
  return r;
}

double draw(const Range& r, SeededStream& rng) { return rng.uniform(r.low, r.high); }

}  // namespace

void ScenarioRanges::validate() const {
  auto bad = [](const std::string& field, const std::string& what) {
    throw ConfigError("field '" + field + "': " + what);
  };
  auto check = [&](const Range& r, const std::string& field, bool positive) {
    if (r.low > r.high) bad(field, "range is inverted (low > high)");
    if (r.low < 0 || (positive && !(r.low > 0))) bad(field, positive ? "must be positive" : "must be non-negative");
  };
  auto check_all = [&](const std::vector<Range>& rs, const std::string& field) {
    if (rs.size() != resources.size()) bad(field, "needs one range per resource type");
    for (std::size_t i = 0; i < rs.size(); ++i) check(rs[i], field + "[" + std::to_string(i) + "]", false);
  };
  check_all(core.demand, "ranges.core.demand");
  check_all(light.demand, "ranges.light.demand");
  check_all(device_capacity, "ranges.edge_device.capacity");
  check_all(server_capacity, "ranges.edge_server.capacity");
  check(core.workload, "ranges.core.workload", true);
  check(core.output, "ranges.core.output", false);
  check(core.rate, "ranges.core.rate", true);
  check(light.workload, "ranges.light.workload", true);
  check(light.output, "ranges.light.output", false);
  check(light.gamma_shape, "ranges.light.gamma_shape", true);
  check(light.gamma_scale, "ranges.light.gamma_scale", true);
  check(arrival_mean, "ranges.arrival_mean", false);
  check(deadline, "ranges.deadline", true);
  check(input_payload, "ranges.input_payload", true);
  check(link_bandwidth, "ranges.link_bandwidth", true);
  check(link_distance, "ranges.link_distance", false);
  check(snr_shape, "ranges.snr_shape", false);
  if (snr_shape.low < 0.5) bad("ranges.snr_shape", "nakagami shape must be at least 0.5");
  check(snr_spread, "ranges.snr_spread", true);
  check(user_bandwidth, "ranges.user_bandwidth", true);
  if (!(propagation_speed > 0)) bad("topology.propagation_speed", "must be positive");
}

std::vector<std::uint64_t> ExperimentConfig::seed_list() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (std::size_t i = 1; i <= trials; ++i) out.push_back(i);
  return out;
}

ScenarioRanges default_ranges() {
  ScenarioRanges r;
  r.resources = {"cpu", "ram", "gpu", "vram"};
  r.propagation_speed = 200.0;
  for (int i = 1; i <= 8; ++i) r.nodes.push_back({"ed" + std::to_string(i), NodeKind::EdgeDevice});
  r.nodes.push_back({"es1", NodeKind::EdgeServer});
  r.nodes.push_back({"es2", NodeKind::EdgeServer});
  // Each device hangs off one server; devices of a cluster form a chain.
  for (int i = 1; i <= 8; ++i) r.links.emplace_back("ed" + std::to_string(i), i % 2 ? "es1" : "es2");
  for (int i = 1; i + 2 <= 8; ++i)
    r.links.emplace_back("ed" + std::to_string(i), "ed" + std::to_string(i + 2));
  r.links.emplace_back("es1", "es2");
  for (int c = 1; c <= 6; ++c) r.microservices.emplace_back("c" + std::to_string(c), Tier::Core);
  for (int l = 1; l <= 9; ++l) r.microservices.emplace_back("l" + std::to_string(l), Tier::Light);
  auto type = [](std::string id, std::vector<std::pair<std::string, std::string>> edges) {
    TaskType t;
    t.id = std::move(id);
    for (const auto& [a, b] : edges) {
      for (const auto& s : {a, b})
        if (std::find(t.stages.begin(), t.stages.end(), s) == t.stages.end()) t.stages.push_back(s);
    }
    t.edges = std::move(edges);
    return t;
  };
  r.task_types = {
      type("t1", {{"l1", "c1"}, {"l2", "c2"}, {"c1", "c5"}, {"c2", "c5"}, {"c5", "l7"}}),
      type("t2", {{"l3", "c3"}, {"l1", "c1"}, {"c3", "c6"}, {"c1", "c6"}, {"c6", "l8"}}),
      type("t3", {{"l4", "c4"}, {"l5", "c2"}, {"c4", "c5"}, {"c2", "c5"}, {"c5", "l9"}}),
      type("t4", {{"l6", "c3"}, {"c3", "c6"}, {"c6", "l9"}}),
  };
  for (int u = 0; u < 4; ++u) {
    r.users.push_back({"u" + std::to_string(u + 1), "ed" + std::to_string(u % 8 + 1),
                       {"t" + std::to_string(u % 4 + 1)}});
  }
  r.core.demand = {{2, 16}, {1, 4}, {4, 32}, {4, 32}};
  r.core.workload = {2, 16};
  r.core.output = {0.1, 1};
  r.core.rate = {8, 32};
  r.core.prices = {20.0, 4.0, 0.0};
  r.light.demand = {{0.5, 2}, {0, 0.5}, {0.25, 4}, {0, 1}};
  r.light.workload = {0.5, 2};
  r.light.output = {0.25, 1.5};
  r.light.gamma_shape = {1, 2};
  r.light.gamma_scale = {1, 20};
  r.light.prices = {4.0, 1.0, 0.5};
  r.device_capacity = {{1, 64}, {1, 32}, {0, 64}, {0, 64}};
  r.server_capacity = {{128, 256}, {64, 128}, {1024, 2048}, {256, 512}};
  r.arrival_mean = {0.15, 1.5};
  r.deadline = {50, 100};
  r.input_payload = {0.5, 4};
  r.link_bandwidth = {0.1, 1.0};
  r.link_distance = {0.1, 1.0};
  r.snr_shape = {1.5, 3};
  r.snr_spread = {0.5, 1};
  r.user_bandwidth = {0.2, 0.6};
  return r;
}

Scenario sample_scenario(const ScenarioRanges& r, std::uint64_t seed) {
  r.validate();
  SeededStream rng(seed, "scenario");
  std::map<std::string, std::size_t> node_ids;
  std::vector<Node> nodes;
  for (const auto& sk : r.nodes) {
    const auto& caps = sk.kind == NodeKind::EdgeServer ? r.server_capacity : r.device_capacity;
    Node n{sk.id, sk.kind, {}};
    for (const auto& c : caps) n.capacity.push_back(draw(c, rng));
    node_ids.emplace(sk.id, nodes.size());
    nodes.push_back(std::move(n));
  }
  auto node = [&](const std::string& id) {
    auto it = node_ids.find(id);
    if (it == node_ids.end()) throw ConfigError("field 'topology': unknown node id '" + id + "'");
    return it->second;
  };
  std::vector<Link> links;
  for (const auto& [a, b] : r.links)
    links.push_back(Link{node(a), node(b), draw(r.link_bandwidth, rng), draw(r.link_distance, rng)});
  std::vector<User> users;
  for (const auto& u : r.users) {
    double shape = draw(r.snr_shape, rng);
    double spread = draw(r.snr_spread, rng);
    users.push_back(User{u.id, node(u.attached), draw(r.user_bandwidth, rng),
                         DistributionSpec::nakagami(shape, spread)});
  }

  std::vector<Microservice> ms;
  for (const auto& [id, tier] : r.microservices) {
    const TierRanges& t = tier == Tier::Core ? r.core : r.light;
    Microservice m;
    m.id = id;
    m.tier = tier;
    for (const auto& d : t.demand) m.demand.push_back(draw(d, rng));
    m.workload = draw(t.workload, rng);
    m.output = draw(t.output, rng);
    if (tier == Tier::Core) {
      m.rate = DistributionSpec::constant(draw(t.rate, rng));
    } else {
      double shape = draw(t.gamma_shape, rng);
      double scale = draw(t.gamma_scale, rng);
      m.rate = DistributionSpec::gamma(shape, scale);
    }
    m.prices = t.prices;
    ms.push_back(std::move(m));
  }
  std::vector<TaskType> types = r.task_types;
  std::map<std::string, std::size_t> type_ids;
  for (std::size_t i = 0; i < types.size(); ++i) {
    types[i].input_payload = draw(r.input_payload, rng);
    types[i].deadline = draw(r.deadline, rng);
    type_ids.emplace(types[i].id, i);
  }

  Scenario s;
  s.graph = NetworkGraph(r.resources, nodes, links, users, r.propagation_speed);
  s.catalog = Catalog(ms, types, r.resources.size());
  for (std::size_t u = 0; u < r.users.size(); ++u) {
    for (const auto& t : r.users[u].types) {
      auto it = type_ids.find(t);
      if (it == type_ids.end()) throw ConfigError("field 'topology.users': unknown task type '" + t + "'");
      s.subscriptions.push_back(
          Subscription{u, it->second, DistributionSpec::poisson(draw(r.arrival_mean, rng))});
    }
  }
  s.params = r.params;
  s.validate();
  return s;
}

ConfigFile parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ": parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col));
  }
  Reader rd(text, source);
  if (!root.is_object()) rd.fail("", "top level must be an object");
  ConfigFile out;
  if (root.contains("ranges")) {
    rd.only(root, {"topology", "catalog", "ranges", "parameters", "experiment"}, "");
    out.ranges = read_ranges(rd, root);
  } else {
    rd.only(root, {"topology", "catalog", "subscriptions", "parameters", "experiment"}, "");
    out.scenario = read_scenario(rd, root);
  }
  if (const json* e = rd.find(root, "experiment")) out.experiment = read_experiment(rd, *e, "experiment");
  return out;
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string scenario_to_json(const Scenario& s, const ExperimentConfig* experiment) {
  const auto& g = s.graph;
  json nodes = json::array(), links = json::array(), users = json::array();
  for (const auto& n : g.nodes())
    nodes.push_back({{"id", n.id}, {"kind", to_string(n.kind)}, {"capacity", n.capacity}});
  for (const auto& l : g.links())
    links.push_back({{"a", g.node(l.a).id}, {"b", g.node(l.b).id}, {"bandwidth", l.bandwidth},
                     {"distance", l.distance}});
  for (const auto& u : g.users())
    users.push_back({{"id", u.id}, {"attached", g.node(u.attached).id}, {"bandwidth", u.bandwidth},
                     {"snr", distribution_json(u.snr)}});
  json ms = json::array(), types = json::array(), subs = json::array();
  for (const auto& m : s.catalog.microservices())
    ms.push_back({{"id", m.id}, {"tier", to_string(m.tier)}, {"demand", m.demand},
                  {"workload", m.workload}, {"output", m.output}, {"rate", distribution_json(m.rate)},
                  {"prices", prices_json(m.prices)}});
  for (const auto& t : s.catalog.task_types()) types.push_back(task_type_json(t, true));
  for (const auto& sub : s.subscriptions)
    subs.push_back({{"user", g.users()[sub.user].id},
                    {"type", s.catalog.task_types()[sub.task_type].id},
                    {"arrivals", distribution_json(sub.arrivals)}});
  json root{{"topology",
             {{"resources", g.resources()}, {"propagation_speed", g.propagation_speed()},
              {"nodes", nodes}, {"links", links}, {"users", users}}},
            {"catalog", {{"microservices", ms}, {"task_types", types}}},
            {"subscriptions", subs},
            {"parameters", params_json(s.params)}};
  if (experiment) root["experiment"] = experiment_json(*experiment);
  return root.dump(2) + "\n";
}

std::string ranges_to_json(const ScenarioRanges& r, const ExperimentConfig* experiment) {
  json nodes = json::array(), links = json::array(), users = json::array();
  for (const auto& n : r.nodes) nodes.push_back({{"id", n.id}, {"kind", to_string(n.kind)}});
  for (const auto& [a, b] : r.links) links.push_back(json::array({a, b}));
  for (const auto& u : r.users) users.push_back({{"id", u.id}, {"attached", u.attached}, {"types", u.types}});
  json ms = json::array(), types = json::array();
  for (const auto& [id, tier] : r.microservices) ms.push_back({{"id", id}, {"tier", to_string(tier)}});
  for (const auto& t : r.task_types) types.push_back(task_type_json(t, false));
  json ranges{{"core", tier_ranges_json(r.core, Tier::Core)},
              {"light", tier_ranges_json(r.light, Tier::Light)},
              {"edge_device", {{"capacity", ranges_json(r.device_capacity)}}},
              {"edge_server", {{"capacity", ranges_json(r.server_capacity)}}},
              {"arrival_mean", range_json(r.arrival_mean)},
              {"deadline", range_json(r.deadline)},
              {"input_payload", range_json(r.input_payload)},
              {"link_bandwidth", range_json(r.link_bandwidth)},
              {"link_distance", range_json(r.link_distance)},
              {"snr_shape", range_json(r.snr_shape)},
              {"snr_spread", range_json(r.snr_spread)},
              {"user_bandwidth", range_json(r.user_bandwidth)}};
  json root{{"topology",
             {{"resources", r.resources}, {"propagation_speed", r.propagation_speed},
              {"nodes", nodes}, {"links", links}, {"users", users}}},
            {"catalog", {{"microservices", ms}, {"task_types", types}}},
            {"ranges", ranges},
            {"parameters", params_json(r.params)}};
  if (experiment) root["experiment"] = experiment_json(*experiment);
  return root.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  ConfigFile f = parse_config(text, "scenario");
  if (!f.scenario) throw ConfigError("scenario: expected a concrete scenario, found ranges");
  return *f.scenario;
}

void apply_override(Parameters& p, const std::string& key, const std::string& value) {
  json j = params_json(p);
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = value;  // bare strings such as cost modes
  }
  if (key.rfind("ga.", 0) == 0) {
    std::string sub = key.substr(3);
    if (!j["ga"].contains(sub)) throw ConfigError("override: unknown parameter '" + key + "'");
    j["ga"][sub] = v;
  } else {
    if (key == "ga" || (!j.contains(key) && key != "big_m" && key != "kappa"))
      throw ConfigError("override: unknown parameter '" + key + "'");
    j[key] = v;
  }
  std::string text = j.dump();
  Reader rd(text, "override");
  p = read_params(rd, j, "");
}

}  // namespace edgefm
