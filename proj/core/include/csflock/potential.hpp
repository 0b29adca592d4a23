#pragma once

#include <string_view>

namespace csflock {

enum class Regime {
  LongRange,   // 0 < beta < 1
  Critical,    // beta == 1
  ShortRange,  // beta > 1
};

std::string_view to_string(Regime regime) noexcept;

/// Singular communication weight |r|^-beta together with its potentials.
///
/// Two antiderivatives are used depending on the regime:
///  - the origin-anchored potential, integrating the weight from 0 (only
///    finite for beta < 1);
///  - the unit-anchored potential, integrating from 1 (beta >= 1), which is
///    bounded above by `unit_potential_limit()` when beta > 1.
/// Both are odd extensions to the negative half-line.
///
/// The regime boundary is sharp: beta == 1.0 exactly selects Critical and any
/// other value selects its literal regime.
class Potential {
 public:
  /// Throws DomainError unless beta is finite and positive.
  explicit Potential(double beta);

  double beta() const noexcept { return beta_; }
  Regime regime() const noexcept { return regime_; }

  /// |r|^-beta. Throws DomainError at r == 0.
  double weight(double r) const;

  /// sgn(x) |x|^(1-beta) / (1-beta). LongRange only.
  double origin_potential(double x) const;

  /// Positive-branch inverse of origin_potential; c must be >= 0.
  double origin_potential_inverse(double c) const;

  /// sgn(x) log|x| (Critical) or sgn(x) (1 - |x|^(1-beta)) / (beta-1)
  /// (ShortRange). Throws DomainError at x == 0.
  double unit_potential(double x) const;

  /// 1 / (beta - 1). ShortRange only.
  double unit_potential_limit() const;

  /// Positive-branch inverse of unit_potential. For ShortRange c must be
  /// strictly below the limit.
  double unit_potential_inverse(double c) const;

  /// The first-order interaction term: origin potential for LongRange (with
  /// interaction(0) == 0), unit potential otherwise.
  double interaction(double x) const;

  /// Positive-branch inverse of `interaction`.
  double interaction_inverse(double c) const;

 private:
  // |x|^(1-beta) through exp/log so the odd extension never touches pow of a
  // negative base.
  double abs_power(double x) const;

  double beta_;
  Regime regime_;
};

}  // namespace csflock
