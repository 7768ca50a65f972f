#pragma once

#include <span>
#include <string>
#include <vector>

#include "edgefm/catalog.hpp"
#include "edgefm/matrix.hpp"

namespace edgefm {

// per_instance charges the parallelism price once per live instance per slot;
// per_slot_times_y multiplies it by the instance's parallelism level.
enum class ParallelismCostMode { PerInstance, PerSlotTimesY };

std::string to_string(ParallelismCostMode m);
ParallelismCostMode parallelism_mode_from_string(const std::string& s);

// Sum over (v,m) of (deploy + horizon * maintain) * x. prices[c] belongs to column c.
double core_cost(const Matrix<int>& x, std::size_t horizon, std::span<const Prices> prices);

struct SlotCost {
  double core_deploy = 0.0;
  double core_maintain = 0.0;
  double light_deploy = 0.0;
  double light_maintain = 0.0;
  double light_parallelism = 0.0;

  double core() const { return core_deploy + core_maintain; }
  double light() const { return light_deploy + light_maintain + light_parallelism; }
  double total() const { return core() + light(); }
};

// Light charges for one slot. previous == nullptr marks the first slot, where
// every instance pays deployment. parallelism is required in PerSlotTimesY mode.
SlotCost light_slot_cost(const Matrix<int>* previous, const Matrix<int>& current,
                         std::span<const Prices> prices, ParallelismCostMode mode,
                         const Matrix<int>* parallelism = nullptr);

double light_cost(std::span<const Matrix<int>> schedule, std::span<const Prices> prices,
                  ParallelismCostMode mode = ParallelismCostMode::PerInstance,
                  std::span<const Matrix<int>> parallelism = {});

class CostLedger {
 public:
  void record(const SlotCost& c);
  const std::vector<SlotCost>& slots() const noexcept { return slots_; }
  double core_total() const noexcept { return core_; }
  double light_total() const noexcept { return light_; }
  double total() const noexcept { return core_ + light_; }

 private:
  std::vector<SlotCost> slots_;
  double core_ = 0.0;
  double light_ = 0.0;
};

}  // namespace edgefm
