#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "edgefm/controller.hpp"
#include "edgefm/matrix.hpp"
#include "edgefm/scenario.hpp"

namespace edgefm {

// One core instance able to take the task, with the slot it would get.
struct CoreCandidate {
  NodeId node = 0;
  std::size_t instance = 0;  // index within the microservice's instance list
  double start = 0.0;
  double finish = 0.0;
  bool busy = false;  // holds a reservation ending after now
};

struct CoreQuery {
  std::size_t task = 0;
  std::size_t core = 0;  // core tier position
  double now = 0.0;
  const std::vector<CoreCandidate>* candidates = nullptr;
};

struct LightPlan {
  Matrix<int> instances;  // x_t, node x light
  std::vector<std::optional<NodeId>> assignment;
  ControllerCounters counters;
  std::vector<Commit> commits;
};

struct Deployment {
  Matrix<int> core;                  // node x core
  std::optional<Matrix<int>> light;  // static light plan, node x light
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::string name() const = 0;
  // Called once per trial with the load-scaled scenario.
  virtual Deployment deploy(const Scenario& s, std::uint64_t seed, std::size_t horizon) = 0;
  // Returns an index into *q.candidates.
  virtual std::size_t dispatch_core(const CoreQuery& q) = 0;
  virtual LightPlan plan_light(const ControllerInput& in, std::size_t slot) = 0;
};

// Earliest finishing candidate; ties go to the lower node, then instance.
std::size_t earliest_finish(const std::vector<CoreCandidate>& c);

// Static core placement from the integer program, light instances from the
// greedy controller each slot. MeanValue delays give the mean-value ablation.
class TwoTierStrategy : public Strategy {
 public:
  explicit TwoTierStrategy(DelayModel model, std::string name);
  std::string name() const override { return name_; }
  Deployment deploy(const Scenario& s, std::uint64_t seed, std::size_t horizon) override;
  std::size_t dispatch_core(const CoreQuery& q) override;
  LightPlan plan_light(const ControllerInput& in, std::size_t slot) override;
  const DelayTable& delays() const noexcept { return delays_; }

 private:
  DelayModel model_;
  std::string name_;
  DelayTable delays_;
};

std::unique_ptr<Strategy> make_proposed();

}  // namespace edgefm
