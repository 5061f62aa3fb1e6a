#pragma once

#include <string>
#include <vector>

namespace heatbath {

/// Smooth scalar potential of one real variable, restricted to polynomials.
///
/// The harmonic shortcut `k x^2 / 2` is stored as the polynomial {0, 0, k/2} but
/// remembers its kind so that configs and reports can echo it back.
class Potential {
 public:
  enum class Kind { polynomial, harmonic };

  Potential() = default;

  /// Coefficients in ascending order: c[0] + c[1] x + c[2] x^2 + ...
  static Potential polynomial(std::vector<double> coefficients);
  static Potential harmonic(double stiffness);

  double value(double x) const;
  double first_derivative(double x) const;
  double second_derivative(double x) const;

  /// True when the second derivative is the zero polynomial.
  bool second_derivative_vanishes() const;

  Kind kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double stiffness() const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::polynomial;
  std::vector<double> coeffs_;
};

}  // namespace heatbath
