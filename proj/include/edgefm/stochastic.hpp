#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace edgefm {

enum class Family { Poisson, Nakagami, Gamma, Constant, Uniform };

std::string to_string(Family f);
Family family_from_string(std::string_view name);

// Parameter meaning by family:
//   poisson   first = mean
//   nakagami  first = shape mu, second = spread omega (samples are power values)
//   gamma     first = shape k,  second = scale s
//   constant  first = value
//   uniform   first = low,      second = high
struct DistributionSpec {
  Family family = Family::Constant;
  double first = 0.0;
  double second = 0.0;

  static DistributionSpec poisson(double mean);
  static DistributionSpec nakagami(double shape, double spread);
  static DistributionSpec gamma(double shape, double scale);
  static DistributionSpec constant(double value);
  static DistributionSpec uniform(double low, double high);

  // Throws InvalidArgument when parameters are out of domain.
  void validate() const;

  bool operator==(const DistributionSpec&) const = default;
};

std::uint64_t fnv1a64(std::string_view text);
std::uint64_t splitmix64(std::uint64_t x);

std::string stream_label(std::string_view trial, std::string_view entity,
                         std::string_view purpose);

// Independent pseudo-random stream keyed by (seed, label). Two streams with
// the same key produce identical sequences.
class SeededStream {
 public:
  SeededStream(std::uint64_t seed, std::string_view label);

  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& label() const noexcept { return label_; }
  std::mt19937_64& engine() noexcept { return engine_; }

  double uniform(double low, double high);

 private:
  std::uint64_t seed_;
  std::string label_;
  std::mt19937_64 engine_;
};

double sample(const DistributionSpec& spec, SeededStream& stream);

// Integer draw for counting processes: poisson, or a rounded constant.
std::uint64_t sample_count(const DistributionSpec& spec, SeededStream& stream);

double mean(const DistributionSpec& spec);

// Same family with the mean multiplied by factor (arrival load scaling).
DistributionSpec scale_mean(const DistributionSpec& spec, double factor);

}  // namespace edgefm
