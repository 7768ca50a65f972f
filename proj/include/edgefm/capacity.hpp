#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "edgefm/catalog.hpp"
#include "edgefm/stochastic.hpp"

namespace edgefm {

inline constexpr double kThetaMin = 1e-4;
inline constexpr double kThetaMax = 1e3;
inline constexpr int kThetaGrid = 200;
inline constexpr double kThetaTolerance = 1e-4;

// E^c(theta) = -ln E[exp(-theta f)] / theta for a per-slot service rate f.
double effective_capacity(const DistributionSpec& rate, double theta);

// Sample-average estimate of the same quantity.
double effective_capacity_monte_carlo(const DistributionSpec& rate, double theta,
                                      SeededStream& stream, std::size_t draws);

// (E^c / E[f]) * exp(-theta * E^c * delay)
double tail_probability(const DistributionSpec& rate, double theta, double delay);

// Each of y concurrent tasks on an instance receives f(t)/y per slot.
enum class SharingRule { FairShare };

struct CapacityProfile {
  std::string ms_id;
  double epsilon = 0.2;
  double workload = 0.0;
  double mean_rate = 0.0;
  std::vector<double> bound;  // bound[y-1] = g(y), ms
  std::vector<double> theta;  // minimizing exponent per y

  int max_parallelism() const { return static_cast<int>(bound.size()); }
  // g(0) is 0; y beyond max_parallelism() throws InvalidArgument.
  double g(int y) const;
};

// g(y) = min over theta of (a*y + ln(1/eps)/theta) / E^c(theta): the delay a
// task sharing an instance with y-1 others exceeds with probability <= eps.
CapacityProfile build_profile(const Microservice& ms, double epsilon, int y_max,
                              SharingRule rule = SharingRule::FairShare);

// a*y / E[f]
double mean_value_delay(const Microservice& ms, int y);

// Columns: ms,y,theta,g
void write_profiles_csv(std::ostream& out, std::span<const CapacityProfile> profiles);

}  // namespace edgefm
