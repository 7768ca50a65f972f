#include "edgefm/capacity.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "edgefm/error.hpp"

namespace edgefm {

namespace {

void check_theta(double theta) {
  if (!(theta > 0) || !std::isfinite(theta)) throw InvalidArgument("theta must be positive");
}

double finite_or_throw(double v, const DistributionSpec& rate, double theta) {
  if (!std::isfinite(v))
    throw DivergenceError("effective capacity diverges for " + to_string(rate.family) +
                          " at theta=" + std::to_string(theta));
  return v;
}

}  // namespace

double effective_capacity(const DistributionSpec& rate, double theta) {
  check_theta(theta);
  rate.validate();
  double v = 0.0;
  switch (rate.family) {
    case Family::Gamma:
      v = rate.first * std::log1p(theta * rate.second) / theta;
      break;
    case Family::Nakagami:
      v = rate.first * std::log1p(theta * rate.second / rate.first) / theta;
      break;
    case Family::Constant:
      v = rate.first;
      break;
    case Family::Poisson:
      v = -rate.first * std::expm1(-theta) / theta;
      break;
    case Family::Uniform: {
      double w = rate.second - rate.first;
      if (w == 0) {
        v = rate.first;
      } else {
        double tw = theta * w;
        v = rate.first - std::log(-std::expm1(-tw) / tw) / theta;
      }
      break;
    }
  }
  return finite_or_throw(v, rate, theta);
}

double effective_capacity_monte_carlo(const DistributionSpec& rate, double theta,
                                      SeededStream& stream, std::size_t draws) {
  check_theta(theta);
  if (draws == 0) throw InvalidArgument("need at least one draw");
  double acc = 0.0;
  for (std::size_t i = 0; i < draws; ++i) acc += std::exp(-theta * sample(rate, stream));
  acc /= static_cast<double>(draws);
  if (!(acc > 0)) throw DivergenceError("sample mean of exp(-theta f) underflowed");
  return finite_or_throw(-std::log(acc) / theta, rate, theta);
}

double tail_probability(const DistributionSpec& rate, double theta, double delay) {
  if (delay < 0) throw InvalidArgument("delay must be non-negative");
  double ec = effective_capacity(rate, theta);
  double m = mean(rate);
  if (!(m > 0)) throw ZeroRateError("mean rate is zero");
  return ec / m * std::exp(-theta * ec * delay);
}

double CapacityProfile::g(int y) const {
  if (y == 0) return 0.0;
  if (y < 0 || y > max_parallelism())
    throw InvalidArgument("parallelism " + std::to_string(y) + " outside profile of " + ms_id);
  return bound[static_cast<std::size_t>(y - 1)];
}

CapacityProfile build_profile(const Microservice& ms, double epsilon, int y_max,
                              SharingRule rule) {
  if (ms.tier != Tier::Light) throw InvalidArgument("profiles are built for light microservices");
  if (!(epsilon > 0 && epsilon <= 1)) throw InvalidArgument("epsilon must lie in (0, 1]");
  if (y_max < 1) throw InvalidArgument("y_max must be at least 1");
  (void)rule;  // FairShare is the only rule; the task rate is f/y.
  CapacityProfile p;
  p.ms_id = ms.id;
  p.epsilon = epsilon;
  p.workload = ms.workload;
  p.mean_rate = mean(ms.rate);
  if (!(p.mean_rate > 0)) throw ZeroRateError("microservice " + ms.id + " has zero mean rate");
  const double slack = std::log(1.0 / epsilon);
  const bool deterministic = ms.rate.family == Family::Constant ||
                             (ms.rate.family == Family::Uniform && ms.rate.first == ms.rate.second);

  std::vector<double> grid(kThetaGrid);
  std::vector<double> ec(kThetaGrid);
  const double lmin = std::log(kThetaMin), lmax = std::log(kThetaMax);
  for (int i = 0; i < kThetaGrid; ++i) {
    grid[i] = std::exp(lmin + (lmax - lmin) * i / (kThetaGrid - 1));
    if (!deterministic && slack > 0) ec[i] = effective_capacity(ms.rate, grid[i]);
  }

  for (int y = 1; y <= y_max; ++y) {
    const double work = ms.workload * y;
    if (deterministic || slack == 0) {
      p.bound.push_back(work / p.mean_rate);
      p.theta.push_back(deterministic ? kThetaMax : kThetaMin);
      continue;
    }
    auto h = [&](double theta) {
      return (work + slack / theta) / effective_capacity(ms.rate, theta);
    };
    int best = -1;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kThetaGrid; ++i) {
      if (!(ec[i] > 0)) continue;
      double v = (work + slack / grid[i]) / ec[i];
      if (v < best_val) {
        best_val = v;
        best = i;
      }
    }
    if (best < 0) throw SearchFailure("no finite bound on the theta grid for " + ms.id);
    double lo = std::log(grid[best > 0 ? best - 1 : 0]);
    double hi = std::log(grid[best + 1 < kThetaGrid ? best + 1 : best]);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    double fa = h(std::exp(a)), fb = h(std::exp(b));
    while (std::exp(hi) - std::exp(lo) > kThetaTolerance * std::exp(0.5 * (lo + hi))) {
      if (fa < fb) {
        hi = b;
        b = a;
        fb = fa;
        a = hi - phi * (hi - lo);
        fa = h(std::exp(a));
      } else {
        lo = a;
        a = b;
        fa = fb;
        b = lo + phi * (hi - lo);
        fb = h(std::exp(b));
      }
    }
    double theta = std::exp(0.5 * (lo + hi));
    double val = h(theta);
    if (!(val < best_val)) {
      val = best_val;
      theta = grid[best];
    }
    if (!std::isfinite(val)) throw SearchFailure("theta refinement diverged for " + ms.id);
    p.bound.push_back(val);
    p.theta.push_back(theta);
  }
  return p;
}

double mean_value_delay(const Microservice& ms, int y) {
  if (y < 0) throw InvalidArgument("parallelism must be non-negative");
  double m = mean(ms.rate);
  if (!(m > 0)) throw ZeroRateError("microservice " + ms.id + " has zero mean rate");
  return ms.workload * y / m;
}

void write_profiles_csv(std::ostream& out, std::span<const CapacityProfile> profiles) {
  out << "ms,y,theta,g\n";
  out << std::setprecision(17);
  for (const auto& p : profiles)
    for (int y = 1; y <= p.max_parallelism(); ++y)
      out << p.ms_id << ',' << y << ',' << p.theta[y - 1] << ',' << p.bound[y - 1] << '\n';
}

}  // namespace edgefm
