#include "edgefm/stochastic.hpp"

#include <cmath>

#include "edgefm/error.hpp"

namespace edgefm {

std::string to_string(Family f) {
  switch (f) {
    case Family::Poisson: return "poisson";
    case Family::Nakagami: return "nakagami";
    case Family::Gamma: return "gamma";
    case Family::Constant: return "constant";
    case Family::Uniform: return "uniform";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "poisson") return Family::Poisson;
  if (name == "nakagami") return Family::Nakagami;
  if (name == "gamma") return Family::Gamma;
  if (name == "constant") return Family::Constant;
  if (name == "uniform") return Family::Uniform;
  throw InvalidArgument("unknown distribution family '" + std::string(name) + "'");
}

DistributionSpec DistributionSpec::poisson(double mean) {
  DistributionSpec d{Family::Poisson, mean, 0.0};
  d.validate();
  return d;
}

DistributionSpec DistributionSpec::nakagami(double shape, double spread) {
  DistributionSpec d{Family::Nakagami, shape, spread};
  d.validate();
  return d;
}

DistributionSpec DistributionSpec::gamma(double shape, double scale) {
  DistributionSpec d{Family::Gamma, shape, scale};
  d.validate();
  return d;
}

DistributionSpec DistributionSpec::constant(double value) {
  DistributionSpec d{Family::Constant, value, 0.0};
  d.validate();
  return d;
}

DistributionSpec DistributionSpec::uniform(double low, double high) {
  DistributionSpec d{Family::Uniform, low, high};
  d.validate();
  return d;
}

void DistributionSpec::validate() const {
  auto bad = [&](const char* why) {
    throw InvalidArgument(to_string(family) + ": " + why);
  };
  if (!std::isfinite(first) || !std::isfinite(second)) bad("non-finite parameter");
  switch (family) {
    case Family::Poisson:
      if (first <= 0) bad("mean must be positive");
      break;
    case Family::Nakagami:
      if (first < 0.5) bad("shape must be at least 0.5");
      if (second <= 0) bad("spread must be positive");
      break;
    case Family::Gamma:
      if (first <= 0 || second <= 0) bad("shape and scale must be positive");
      break;
    case Family::Constant:
      break;
    case Family::Uniform:
      if (first > second) bad("low exceeds high");
      break;
  }
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string stream_label(std::string_view trial, std::string_view entity,
                         std::string_view purpose) {
  std::string s;
  s.reserve(trial.size() + entity.size() + purpose.size() + 2);
  s.append(trial).append("/").append(entity).append("/").append(purpose);
  return s;
}

SeededStream::SeededStream(std::uint64_t seed, std::string_view label)
    : seed_(seed), label_(label) {
  std::uint64_t k = splitmix64(seed ^ splitmix64(fnv1a64(label)));
  std::uint64_t k2 = splitmix64(k);
  std::seed_seq seq{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                    static_cast<std::uint32_t>(k2), static_cast<std::uint32_t>(k2 >> 32)};
  engine_.seed(seq);
}

double SeededStream::uniform(double low, double high) {
  return std::uniform_real_distribution<double>(low, high)(engine_);
}

double sample(const DistributionSpec& spec, SeededStream& stream) {
  spec.validate();
  auto& eng = stream.engine();
  switch (spec.family) {
    case Family::Poisson:
      return static_cast<double>(
          std::poisson_distribution<std::uint64_t>(spec.first)(eng));
    case Family::Nakagami:
      // Power of a Nakagami-m amplitude is gamma(m, omega/m).
      return std::gamma_distribution<double>(spec.first, spec.second / spec.first)(eng);
    case Family::Gamma:
      return std::gamma_distribution<double>(spec.first, spec.second)(eng);
    case Family::Constant:
      return spec.first;
    case Family::Uniform:
      if (spec.first == spec.second) return spec.first;
      return std::uniform_real_distribution<double>(spec.first, spec.second)(eng);
  }
  return 0.0;
}

std::uint64_t sample_count(const DistributionSpec& spec, SeededStream& stream) {
  spec.validate();
  switch (spec.family) {
    case Family::Poisson:
      return std::poisson_distribution<std::uint64_t>(spec.first)(stream.engine());
    case Family::Constant:
      if (spec.first < 0) throw InvalidArgument("negative constant count");
      return static_cast<std::uint64_t>(std::llround(spec.first));
    default:
      throw InvalidArgument("counting draws need a poisson or constant spec, got " +
                            to_string(spec.family));
  }
}

double mean(const DistributionSpec& spec) {
  switch (spec.family) {
    case Family::Poisson: return spec.first;
    case Family::Nakagami: return spec.second;
    case Family::Gamma: return spec.first * spec.second;
    case Family::Constant: return spec.first;
    case Family::Uniform: return 0.5 * (spec.first + spec.second);
  }
  return 0.0;
}

DistributionSpec scale_mean(const DistributionSpec& spec, double factor) {
  if (!(factor > 0)) throw InvalidArgument("scale factor must be positive");
  DistributionSpec d = spec;
  switch (spec.family) {
    case Family::Poisson:
    case Family::Constant:
      d.first *= factor;
      break;
    case Family::Nakagami:
    case Family::Gamma:
      d.second *= factor;
      break;
    case Family::Uniform:
      d.first *= factor;
      d.second *= factor;
      break;
  }
  return d;
}

}  // namespace edgefm
