#include "edgefm/cost.hpp"

#include <algorithm>

#include "edgefm/error.hpp"

namespace edgefm {

std::string to_string(ParallelismCostMode m) {
  return m == ParallelismCostMode::PerInstance ? "per_instance" : "per_slot_times_y";
}

ParallelismCostMode parallelism_mode_from_string(const std::string& s) {
  if (s == "per_instance") return ParallelismCostMode::PerInstance;
  if (s == "per_slot_times_y") return ParallelismCostMode::PerSlotTimesY;
  throw InvalidArgument("unknown parallelism cost mode '" + s + "'");
}

namespace {

void check_counts(const Matrix<int>& x, std::span<const Prices> prices) {
  if (x.cols() != prices.size()) throw InvalidArgument("price list does not match columns");
  for (int v : x.data())
    if (v < 0) throw InvalidArgument("negative instance count");
}

}  // namespace

double core_cost(const Matrix<int>& x, std::size_t horizon, std::span<const Prices> prices) {
  check_counts(x, prices);
  double total = 0.0;
  for (std::size_t v = 0; v < x.rows(); ++v)
    for (std::size_t m = 0; m < x.cols(); ++m)
      total += (prices[m].deploy + static_cast<double>(horizon) * prices[m].maintain) * x(v, m);
  return total;
}

SlotCost light_slot_cost(const Matrix<int>* previous, const Matrix<int>& current,
                         std::span<const Prices> prices, ParallelismCostMode mode,
                         const Matrix<int>* parallelism) {
  check_counts(current, prices);
  if (previous && (previous->rows() != current.rows() || previous->cols() != current.cols()))
    throw InvalidArgument("schedule shape changed between slots");
  if (mode == ParallelismCostMode::PerSlotTimesY && !parallelism)
    throw InvalidArgument("per_slot_times_y needs parallelism levels");
  SlotCost c;
  for (std::size_t v = 0; v < current.rows(); ++v) {
    for (std::size_t m = 0; m < current.cols(); ++m) {
      int x = current(v, m);
      int before = previous ? (*previous)(v, m) : 0;
      c.light_deploy += prices[m].deploy * std::max(0, x - before);
      c.light_maintain += prices[m].maintain * x;
      int level = mode == ParallelismCostMode::PerInstance ? 1 : (*parallelism)(v, m);
      c.light_parallelism += prices[m].parallelism * level * x;
    }
  }
  return c;
}

double light_cost(std::span<const Matrix<int>> schedule, std::span<const Prices> prices,
                  ParallelismCostMode mode, std::span<const Matrix<int>> parallelism) {
  if (mode == ParallelismCostMode::PerSlotTimesY && parallelism.size() != schedule.size())
    throw InvalidArgument("parallelism series length mismatch");
  double total = 0.0;
  for (std::size_t t = 0; t < schedule.size(); ++t) {
    const Matrix<int>* prev = t == 0 ? nullptr : &schedule[t - 1];
    const Matrix<int>* y = parallelism.empty() ? nullptr : &parallelism[t];
    total += light_slot_cost(prev, schedule[t], prices, mode, y).light();
  }
  return total;
}

void CostLedger::record(const SlotCost& c) {
  slots_.push_back(c);
  core_ += c.core();
  light_ += c.light();
}

}  // namespace edgefm
