#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace edgefm::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded };

// minimize c.x  subject to  rows (a_i . x  sense_i  b_i),  lower <= x <= upper.
// Lower bounds must be finite.
struct Problem {
  std::vector<double> cost;
  std::vector<std::vector<double>> rows;  // dense, one entry per variable
  std::vector<Sense> sense;
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct Solution {
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

// Dense bounded-variable primal simplex, two phases, Bland's rule.
Solution solve(const Problem& p);

// Mixed-integer layer: every variable integral, at least `min_nonzero`
// variables strictly positive. Best-first branch-and-bound on the LP bound.
struct IntegerProblem {
  Problem relaxation;
  std::size_t min_nonzero = 0;
  std::size_t node_limit = 200000;
};

enum class SearchStatus { Optimal, NodeLimit, Infeasible };

struct IntegerSolution {
  SearchStatus status = SearchStatus::Infeasible;
  double objective = kInf;
  std::vector<long> x;
  std::size_t nodes = 0;
};

IntegerSolution solve_integer(const IntegerProblem& p);

// Row and bound check with absolute tolerance.
bool feasible(const Problem& p, const std::vector<long>& x, double tol = 1e-9);

}  // namespace edgefm::lp
