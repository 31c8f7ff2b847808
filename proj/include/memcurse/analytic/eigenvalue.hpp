#pragma once

#include <complex>

namespace memcurse::analytic {

using complex = std::complex<double>;

/// Poles are reported when |1 - λ̄λ*| or 1 - |λ|² falls below this.
inline constexpr double kPoleTolerance = 1e-12;

/// A stable recurrent eigenvalue, |λ| < 1.
class Eigenvalue {
 public:
  enum class Representation { Cartesian, Polar };

  static Eigenvalue cartesian(double re, double im);
  /// nu >= 0; theta is wrapped into (-π, π].
  static Eigenvalue polar(double nu, double theta);
  static Eigenvalue from_complex(complex z) { return cartesian(z.real(), z.imag()); }

  complex value() const { return value_; }
  double magnitude() const { return std::abs(value_); }
  double angle() const { return std::arg(value_); }
  Representation representation() const { return repr_; }

 private:
  Eigenvalue(complex v, Representation r) : value_(v), repr_(r) {}
  complex value_;
  Representation repr_;
};

}  // namespace memcurse::analytic
