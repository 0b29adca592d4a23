#include "csflock/potential.hpp"

#include <cmath>
#include <string>

#include "csflock/errors.hpp"

namespace csflock {

namespace {

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

[[noreturn]] void wrong_regime(const char* op, const Potential& p) {
  throw RegimeError(std::string(op) + " is not defined for beta = " + std::to_string(p.beta()) +
                    " (" + std::string(to_string(p.regime())) + ")");
}

}  // namespace

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::LongRange:
      return "long-range";
    case Regime::Critical:
      return "critical";
    case Regime::ShortRange:
      return "short-range";
  }
  return "unknown";
}

Potential::Potential(double beta) : beta_(beta), regime_(Regime::LongRange) {
  if (!std::isfinite(beta) || beta <= 0.0) {
    throw DomainError("communication exponent must be finite and positive, got " +
                      std::to_string(beta));
  }
  if (beta == 1.0) {
    regime_ = Regime::Critical;
  } else if (beta > 1.0) {
    regime_ = Regime::ShortRange;
  }
}

double Potential::abs_power(double x) const {
  return std::exp((1.0 - beta_) * std::log(std::fabs(x)));
}

double Potential::weight(double r) const {
  if (r == 0.0) throw DomainError("communication weight is singular at r = 0");
  return std::exp(-beta_ * std::log(std::fabs(r)));
}

double Potential::origin_potential(double x) const {
  if (regime_ != Regime::LongRange) wrong_regime("origin potential", *this);
  if (x == 0.0) return 0.0;
  return sign_of(x) * abs_power(x) / (1.0 - beta_);
}

double Potential::origin_potential_inverse(double c) const {
  if (regime_ != Regime::LongRange) wrong_regime("origin potential inverse", *this);
  if (!(c >= 0.0)) throw RangeError("origin potential inverse needs c >= 0");
  if (c == 0.0) return 0.0;
  return std::exp(std::log((1.0 - beta_) * c) / (1.0 - beta_));
}

double Potential::unit_potential(double x) const {
  if (regime_ == Regime::LongRange) wrong_regime("unit potential", *this);
  if (x == 0.0) throw DomainError("unit potential is singular at x = 0");
  if (regime_ == Regime::Critical) return sign_of(x) * std::log(std::fabs(x));
  return sign_of(x) * (1.0 - abs_power(x)) / (beta_ - 1.0);
}

double Potential::unit_potential_limit() const {
  if (regime_ != Regime::ShortRange) wrong_regime("unit potential limit", *this);
  return 1.0 / (beta_ - 1.0);
}

double Potential::unit_potential_inverse(double c) const {
  if (regime_ == Regime::LongRange) wrong_regime("unit potential inverse", *this);
  if (regime_ == Regime::Critical) return std::exp(c);
  if (!(c < unit_potential_limit())) {
    throw RangeError("unit potential inverse needs c < " + std::to_string(unit_potential_limit()));
  }
  // [1 / (1 - c (beta-1))]^(1/(beta-1))
  return std::exp(-std::log1p(-c * (beta_ - 1.0)) / (beta_ - 1.0));
}

double Potential::interaction(double x) const {
  return regime_ == Regime::LongRange ? origin_potential(x) : unit_potential(x);
}

double Potential::interaction_inverse(double c) const {
  return regime_ == Regime::LongRange ? origin_potential_inverse(c) : unit_potential_inverse(c);
}

}  // namespace csflock
