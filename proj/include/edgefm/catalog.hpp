#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "edgefm/stochastic.hpp"

namespace edgefm {

enum class Tier { Core, Light };

std::string to_string(Tier t);
Tier tier_from_string(const std::string& s);

struct Prices {
  double deploy = 0.0;
  double maintain = 0.0;
  double parallelism = 0.0;

  bool operator==(const Prices&) const = default;
};

// workload a_m and output size b_m in MB. Core rates are constant specs,
// light rates are stochastic (gamma in the default ranges), in MB/ms.
struct Microservice {
  std::string id;
  Tier tier = Tier::Light;
  std::vector<double> demand;
  double workload = 1.0;
  double output = 0.0;
  DistributionSpec rate = DistributionSpec{Family::Constant, 1.0, 0.0};
  Prices prices;

  bool operator==(const Microservice&) const = default;
};

// Stages are microservice ids; an edge (p, c) means p feeds c.
struct TaskType {
  std::string id;
  std::vector<std::string> stages;
  std::vector<std::pair<std::string, std::string>> edges;
  double input_payload = 1.0;  // MB
  double deadline = 100.0;     // ms

  bool operator==(const TaskType&) const = default;
};

// Throws StructuralError naming the first violating stage when the graph is
// not an inverse tree (out-degree <= 1, acyclic, exactly one sink).
void validate_inverse_tree(const TaskType& t);

// Topological order; ties between ready stages go to the smaller id.
std::vector<std::string> topological_stages(const TaskType& t);

// Every stage reachable downstream of `stage`, excluding itself, in path order.
std::vector<std::string> descendants(const TaskType& t, const std::string& stage);

inline constexpr std::size_t kNoStage = std::numeric_limits<std::size_t>::max();

// Index form of a validated task type. Stage s runs microservice ms(s).
class TaskDag {
 public:
  TaskDag() = default;
  TaskDag(const TaskType& t, const std::vector<Microservice>& catalog);

  std::size_t size() const noexcept { return ms_.size(); }
  std::size_t ms(std::size_t s) const { return ms_.at(s); }
  const std::vector<std::size_t>& parents(std::size_t s) const { return parents_.at(s); }
  std::size_t child(std::size_t s) const { return child_.at(s); }
  std::size_t sink() const noexcept { return sink_; }
  const std::vector<std::size_t>& order() const noexcept { return order_; }
  const std::vector<std::size_t>& roots() const noexcept { return roots_; }
  std::vector<std::size_t> descendants(std::size_t s) const;
  // Stage index running microservice m, or kNoStage.
  std::size_t stage_of(std::size_t m) const;

 private:
  std::vector<std::size_t> ms_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::size_t> child_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> roots_;
  std::size_t sink_ = 0;
};

class Catalog {
 public:
  Catalog() = default;
  Catalog(std::vector<Microservice> microservices, std::vector<TaskType> types,
          std::size_t resource_count);

  const std::vector<Microservice>& microservices() const noexcept { return ms_; }
  const std::vector<TaskType>& task_types() const noexcept { return types_; }
  const Microservice& ms(std::size_t m) const { return ms_.at(m); }
  const TaskDag& dag(std::size_t n) const { return dags_.at(n); }
  std::size_t ms_index(const std::string& id) const;
  std::size_t type_index(const std::string& id) const;

  // Global microservice indices of each tier, in catalog order.
  const std::vector<std::size_t>& core() const noexcept { return core_; }
  const std::vector<std::size_t>& light() const noexcept { return light_; }
  // Position of microservice m within its tier list.
  std::size_t tier_position(std::size_t m) const { return tier_pos_.at(m); }
  // Task types whose graph contains microservice m.
  const std::vector<std::size_t>& types_using(std::size_t m) const { return users_.at(m); }

  bool operator==(const Catalog& o) const { return ms_ == o.ms_ && types_ == o.types_; }

 private:
  std::vector<Microservice> ms_;
  std::vector<TaskType> types_;
  std::vector<TaskDag> dags_;
  std::vector<std::size_t> core_;
  std::vector<std::size_t> light_;
  std::vector<std::size_t> tier_pos_;
  std::vector<std::vector<std::size_t>> users_;
};

}  // namespace edgefm
