#include <cmath>

#include <fmt/format.h>

#include "projsplit/errors.hpp"
#include "projsplit/operators.hpp"

namespace projsplit {

std::string to_string(ErrorMode mode) {
  switch (mode) {
    case ErrorMode::kNone:
      return "none";
    case ErrorMode::kScaledRandom:
      return "scaled-random";
    case ErrorMode::kAdversarialAligned:
      return "adversarial-aligned";
  }
  return "none";
}

ErrorMode error_mode_from_string(const std::string& name) {
  if (name == "none") return ErrorMode::kNone;
  if (name == "scaled-random") return ErrorMode::kScaledRandom;
  if (name == "adversarial-aligned") return ErrorMode::kAdversarialAligned;
  throw ConfigError(fmt::format("unknown error mode '{}'", name));
}

ErrorInjector::ErrorInjector(ErrorMode mode, double sigma, double delta, std::uint64_t seed)
    : mode_(mode), sigma_(sigma), delta_(delta), rng_(seed) {
  if (!(sigma >= 0.0 && sigma < 1.0))
    throw ConfigError(fmt::format("error injector: sigma must lie in [0,1), got {}", sigma));
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw ConfigError(fmt::format("error injector: delta must be >= 0, got {}", delta));
}

Activation ErrorInjector::activate(const MonotoneOperator& op, const Vector& z, const Vector& w,
                                   double rho) {
  Activation exact = backward_step(op, z, w, rho, Vector(z.dim()));
  if (mode_ == ErrorMode::kNone || delta_ == 0.0) return exact;

  const Vector residual = z - exact.x;
  const double r = norm(residual);
  if (r == 0.0) return exact;

  Vector direction(z.dim());
  if (mode_ == ErrorMode::kAdversarialAligned) {
    direction = (-1.0 / r) * residual;
  } else {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& v : direction) v = gauss(rng_);
    const double g = norm(direction);
    if (g == 0.0) return exact;
    std::uniform_real_distribution<double> unit(0.5, 1.0);
    direction *= unit(rng_) / g;
  }

  double magnitude = std::sqrt(delta_) * r;
  for (int s = 0; s <= kMaxShrinks; ++s, magnitude *= 0.5) {
    Vector e = magnitude * direction;
    Activation act = backward_step(op, z, w, rho, e);
    if (check_error_conditions(z, act.x, act.y, w, rho, act.e, sigma_, delta_).passed())
      return act;
  }
  return exact;
}

}  // namespace projsplit
