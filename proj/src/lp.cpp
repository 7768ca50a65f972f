#include "edgefm/lp.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "edgefm/error.hpp"

namespace edgefm::lp {

namespace {

constexpr double kEps = 1e-9;
constexpr double kPivotEps = 1e-11;

class Tableau {
 public:
  explicit Tableau(const Problem& p) : n_(p.cost.size()), m_(p.rows.size()) {
    if (p.sense.size() != m_ || p.rhs.size() != m_ || p.lower.size() != n_ ||
        p.upper.size() != n_)
      throw InvalidArgument("lp: inconsistent dimensions");
    for (const auto& r : p.rows)
      if (r.size() != n_) throw InvalidArgument("lp: row length mismatch");
    for (std::size_t j = 0; j < n_; ++j)
      if (!std::isfinite(p.lower[j]) || p.upper[j] < p.lower[j] - kEps)
        throw InvalidArgument("lp: invalid bounds");

    // Columns: structural [0,n), slack [n,n+m), artificial [n+m, n+2m).
    cols_ = n_ + 2 * m_;
    lower_.assign(cols_, 0.0);
    upper_.assign(cols_, kInf);
    for (std::size_t j = 0; j < n_; ++j) {
      lower_[j] = p.lower[j];
      upper_[j] = std::max(p.upper[j], p.lower[j]);
    }
    at_upper_.assign(cols_, false);
    basic_row_.assign(cols_, npos);
    t_.assign(m_, std::vector<double>(cols_, 0.0));
    beta_.assign(m_, 0.0);
    basis_.assign(m_, 0);

    for (std::size_t i = 0; i < m_; ++i) {
      double sigma = p.sense[i] == Sense::LessEqual ? 1.0 : -1.0;
      double r = p.rhs[i];
      for (std::size_t j = 0; j < n_; ++j) r -= p.rows[i][j] * lower_[j];
      // row: a.x + sigma*s + alpha*art = b
      std::vector<double>& row = t_[i];
      for (std::size_t j = 0; j < n_; ++j) row[j] = p.rows[i][j];
      row[n_ + i] = sigma;
      std::size_t art = n_ + m_ + i;
      if (sigma * r >= 0) {
        // slack basic with value sigma*r; normalize coefficient to +1
        for (double& v : row) v *= sigma;
        basis_[i] = n_ + i;
        beta_[i] = sigma * r;
        upper_[art] = 0.0;  // unused artificial, fixed at zero
      } else {
        double alpha = r > 0 ? 1.0 : -1.0;
        row[art] = alpha;
        for (double& v : row) v *= alpha;
        basis_[i] = art;
        beta_[i] = std::abs(r);
        needs_phase1_ = true;
      }
      basic_row_[basis_[i]] = i;
    }
  }

  Solution run(const Problem& p) {
    Solution sol;
    if (needs_phase1_) {
      std::vector<double> c1(cols_, 0.0);
      for (std::size_t i = 0; i < m_; ++i) c1[n_ + m_ + i] = 1.0;
      if (!iterate(c1)) throw SearchFailure("lp: phase one unbounded");
      double infeas = 0.0;
      for (std::size_t i = 0; i < m_; ++i)
        if (basis_[i] >= n_ + m_) infeas += beta_[i];
      if (infeas > 1e-7) {
        sol.status = Status::Infeasible;
        return sol;
      }
      for (std::size_t i = 0; i < m_; ++i) upper_[n_ + m_ + i] = 0.0;
    }
    std::vector<double> c2(cols_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) c2[j] = p.cost[j];
    if (!iterate(c2)) {
      sol.status = Status::Unbounded;
      return sol;
    }
    sol.status = Status::Optimal;
    sol.x.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) sol.x[j] = value(j);
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) sol.objective += p.cost[j] * sol.x[j];
    return sol;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  double value(std::size_t j) const {
    if (basic_row_[j] != npos) return beta_[basic_row_[j]];
    return at_upper_[j] ? upper_[j] : lower_[j];
  }

  // Returns false when unbounded.
  bool iterate(const std::vector<double>& c) {
    for (std::size_t guard = 0; guard < 100000; ++guard) {
      std::size_t q = npos;
      double dir = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (basic_row_[j] != npos) continue;
        if (upper_[j] - lower_[j] <= kEps) continue;
        double d = c[j];
        for (std::size_t i = 0; i < m_; ++i)
          if (t_[i][j] != 0.0) d -= c[basis_[i]] * t_[i][j];
        if (!at_upper_[j] && d < -kEps) {
          q = j;
          dir = 1.0;
          break;
        }
        if (at_upper_[j] && d > kEps) {
          q = j;
          dir = -1.0;
          break;
        }
      }
      if (q == npos) return true;

      double step = upper_[q] - lower_[q];  // bound flip
      std::size_t leave_row = npos;
      bool leave_to_upper = false;
      for (std::size_t i = 0; i < m_; ++i) {
        double a = dir * t_[i][q];
        std::size_t b = basis_[i];
        double lim;
        bool to_upper;
        if (a > kPivotEps) {
          lim = (beta_[i] - lower_[b]) / a;
          to_upper = false;
        } else if (a < -kPivotEps && std::isfinite(upper_[b])) {
          lim = (upper_[b] - beta_[i]) / (-a);
          to_upper = true;
        } else {
          continue;
        }
        lim = std::max(lim, 0.0);
        bool tie_wins = leave_row != npos && lim <= step + kEps && b < basis_[leave_row];
        if (lim < step - kEps || tie_wins) {
          step = lim;
          leave_row = i;
          leave_to_upper = to_upper;
        }
      }
      if (!std::isfinite(step)) return false;

      for (std::size_t i = 0; i < m_; ++i) beta_[i] -= dir * t_[i][q] * step;
      if (leave_row == npos) {
        at_upper_[q] = !at_upper_[q];
        continue;
      }
      double entering_value = (at_upper_[q] ? upper_[q] : lower_[q]) + dir * step;
      std::size_t out = basis_[leave_row];
      basic_row_[out] = npos;
      at_upper_[out] = leave_to_upper;
      pivot(leave_row, q);
      basis_[leave_row] = q;
      basic_row_[q] = leave_row;
      beta_[leave_row] = entering_value;
      at_upper_[q] = false;
    }
    throw SearchFailure("lp: iteration limit reached");
  }

  void pivot(std::size_t r, std::size_t q) {
    std::vector<double>& pr = t_[r];
    double inv = 1.0 / pr[q];
    for (double& v : pr) v *= inv;
    pr[q] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double f = t_[i][q];
      if (f == 0.0) continue;
      std::vector<double>& row = t_[i];
      for (std::size_t j = 0; j < cols_; ++j)
        if (pr[j] != 0.0) row[j] -= f * pr[j];
      row[q] = 0.0;
    }
  }

  std::size_t n_, m_, cols_ = 0;
  std::vector<double> lower_, upper_;
  std::vector<bool> at_upper_;
  std::vector<std::size_t> basic_row_;
  std::vector<std::vector<double>> t_;
  std::vector<double> beta_;
  std::vector<std::size_t> basis_;
  bool needs_phase1_ = false;
};

}  // namespace

Solution solve(const Problem& p) {
  Tableau t(p);
  return t.run(p);
}

bool feasible(const Problem& p, const std::vector<long>& x, double tol) {
  if (x.size() != p.cost.size()) return false;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j] < p.lower[j] - tol || x[j] > p.upper[j] + tol) return false;
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += p.rows[i][j] * static_cast<double>(x[j]);
    if (p.sense[i] == Sense::LessEqual ? s > p.rhs[i] + tol : s < p.rhs[i] - tol) return false;
  }
  return true;
}

namespace {

struct Node {
  double bound;
  std::size_t order;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct NodeCmp {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.order > b.order;
  }
};

double objective_of(const Problem& p, const std::vector<long>& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += p.cost[j] * static_cast<double>(x[j]);
  return s;
}

std::size_t count_nonzero(const std::vector<long>& x) {
  return static_cast<std::size_t>(std::count_if(x.begin(), x.end(), [](long v) { return v > 0; }));
}

// Rounds down, then restores rows and the nonzero floor greedily by cost.
bool repair_from(const Problem& p, std::size_t min_nonzero, const std::vector<double>& lp_x,
                 const std::vector<double>& lower, const std::vector<double>& upper,
                 bool rounded, std::vector<long>& out) {
  const std::size_t n = lp_x.size();
  out.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = static_cast<long>(rounded ? std::max(lower[j], std::floor(lp_x[j] + 1e-9)) : lower[j]);
  std::vector<std::size_t> by_cost(n);
  for (std::size_t j = 0; j < n; ++j) by_cost[j] = j;
  std::stable_sort(by_cost.begin(), by_cost.end(),
                   [&](std::size_t a, std::size_t b) { return p.cost[a] < p.cost[b]; });
  auto try_add = [&](std::size_t j) {
    if (out[j] + 1 > upper[j] + 1e-9) return false;
    ++out[j];
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
      if (p.sense[i] != Sense::LessEqual || p.rows[i][j] <= 0) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += p.rows[i][k] * static_cast<double>(out[k]);
      if (s > p.rhs[i] + 1e-9) {
        --out[j];
        return false;
      }
    }
    return true;
  };
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    if (p.sense[i] != Sense::GreaterEqual) continue;
    for (std::size_t guard = 0; guard < 100000; ++guard) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += p.rows[i][k] * static_cast<double>(out[k]);
      if (s >= p.rhs[i] - 1e-9) break;
      bool added = false;
      for (std::size_t j : by_cost)
        if (p.rows[i][j] > 0 && try_add(j)) {
          added = true;
          break;
        }
      if (!added) return false;
    }
  }
  for (std::size_t j : by_cost) {
    if (count_nonzero(out) >= min_nonzero) break;
    if (out[j] == 0) try_add(j);
  }
  // Take any remaining strictly improving units.
  for (std::size_t j : by_cost) {
    if (p.cost[j] >= 0) break;
    while (try_add(j)) {
    }
  }
  return count_nonzero(out) >= min_nonzero && feasible(p, out);
}

// Rounds the relaxation down and greedily restores >= rows, falling back to a
// start from the lower bounds when the rounded point leaves no room.
bool repair(const Problem& p, std::size_t min_nonzero, const std::vector<double>& lp_x,
            const std::vector<double>& lower, const std::vector<double>& upper,
            std::vector<long>& out) {
  return repair_from(p, min_nonzero, lp_x, lower, upper, true, out) ||
         repair_from(p, min_nonzero, lp_x, lower, upper, false, out);
}

}  // namespace

IntegerSolution solve_integer(const IntegerProblem& ip) {
  const Problem& base = ip.relaxation;
  const std::size_t n = base.cost.size();
  IntegerSolution best;
  std::vector<double> lo0(n), hi0(n);
  for (std::size_t j = 0; j < n; ++j) {
    lo0[j] = std::ceil(base.lower[j] - 1e-9);
    hi0[j] = std::floor(base.upper[j] + 1e-9);
    if (hi0[j] < lo0[j]) return best;
  }

  Problem work = base;
  auto relax = [&](const std::vector<double>& lo, const std::vector<double>& hi) {
    work.lower = lo;
    work.upper = hi;
    return solve(work);
  };
  auto openable = [&](const std::vector<double>& hi) {
    std::size_t c = 0;
    for (double h : hi)
      if (h >= 1) ++c;
    return c;
  };

  std::priority_queue<Node, std::vector<Node>, NodeCmp> open;
  std::size_t order = 0;
  if (openable(hi0) < ip.min_nonzero) return best;
  Solution root = relax(lo0, hi0);
  if (root.status != Status::Optimal) return best;
  {
    std::vector<long> guess;
    if (repair(base, ip.min_nonzero, root.x, lo0, hi0, guess)) {
      best.x = guess;
      best.objective = objective_of(base, guess);
      best.status = SearchStatus::Optimal;
    }
  }
  open.push(Node{root.objective, order++, lo0, hi0});
  bool exhausted = true;
  while (!open.empty()) {
    if (best.nodes >= ip.node_limit) {
      exhausted = false;
      break;
    }
    Node node = open.top();
    open.pop();
    if (node.bound >= best.objective - 1e-9) continue;
    ++best.nodes;
    Solution s = relax(node.lower, node.upper);
    if (s.status != Status::Optimal) continue;
    if (s.objective >= best.objective - 1e-9) continue;
    if (best.x.empty()) {
      std::vector<long> guess;
      if (repair(base, ip.min_nonzero, s.x, node.lower, node.upper, guess)) {
        best.x = guess;
        best.objective = objective_of(base, guess);
        best.status = SearchStatus::Optimal;
      }
    }

    std::size_t frac = n;
    double frac_score = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      double f = s.x[j] - std::floor(s.x[j]);
      if (f > 1e-6 && f < 1 - 1e-6) {
        double score = 0.5 - std::abs(f - 0.5);
        if (score > frac_score + 1e-12) {
          frac_score = score;
          frac = j;
        }
      }
    }
    if (frac == n) {
      std::vector<long> xi(n);
      for (std::size_t j = 0; j < n; ++j) xi[j] = std::lround(s.x[j]);
      if (count_nonzero(xi) >= ip.min_nonzero) {
        if (feasible(base, xi)) {
          double obj = objective_of(base, xi);
          if (obj < best.objective - 1e-12) {
            best.objective = obj;
            best.x = xi;
            best.status = SearchStatus::Optimal;
          }
        }
        continue;
      }
      // Integral but too sparse: force one more variable open or shut.
      std::size_t pick = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (xi[j] != 0 || node.lower[j] >= 1 || node.upper[j] < 1) continue;
        if (pick == n || base.cost[j] < base.cost[pick]) pick = j;
      }
      if (pick == n) continue;
      Node a = node, b = node;
      a.lower[pick] = 1;
      a.bound = s.objective;
      a.order = order++;
      b.upper[pick] = 0;
      b.bound = s.objective;
      b.order = order++;
      open.push(std::move(a));
      if (openable(b.upper) >= ip.min_nonzero) open.push(std::move(b));
      continue;
    }
    Node down = node, up = node;
    down.upper[frac] = std::floor(s.x[frac]);
    down.bound = s.objective;
    down.order = order++;
    up.lower[frac] = std::ceil(s.x[frac]);
    up.bound = s.objective;
    up.order = order++;
    if (openable(down.upper) >= ip.min_nonzero) open.push(std::move(down));
    open.push(std::move(up));
  }
  if (best.x.empty()) {
    best.status = exhausted ? SearchStatus::Infeasible : SearchStatus::NodeLimit;
  } else if (!exhausted) {
    best.status = SearchStatus::NodeLimit;
  }
  return best;
}

}  // namespace edgefm::lp
