#include "heatbath/potential.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace heatbath {

Potential Potential::polynomial(std::vector<double> coefficients) {
  for (double c : coefficients) {
    if (!std::isfinite(c)) throw std::invalid_argument("polynomial coefficient is not finite");
  }
  while (!coefficients.empty() && coefficients.back() == 0.0) coefficients.pop_back();
  Potential p;
  p.kind_ = Kind::polynomial;
  p.coeffs_ = std::move(coefficients);
  return p;
}

Potential Potential::harmonic(double stiffness) {
  if (!std::isfinite(stiffness)) throw std::invalid_argument("harmonic stiffness is not finite");
  Potential p = polynomial({0.0, 0.0, 0.5 * stiffness});
  p.kind_ = Kind::harmonic;
  return p;
}

// Horner evaluation of the n-th derivative.
static double horner_derivative(const std::vector<double>& c, int order, double x) {
  double acc = 0.0;
  for (int k = static_cast<int>(c.size()) - 1; k >= order; --k) {
    double factor = 1.0;
    for (int j = 0; j < order; ++j) factor *= static_cast<double>(k - j);
    acc = acc * x + factor * c[static_cast<std::size_t>(k)];
  }
  return acc;
}

double Potential::value(double x) const { return horner_derivative(coeffs_, 0, x); }
double Potential::first_derivative(double x) const { return horner_derivative(coeffs_, 1, x); }
double Potential::second_derivative(double x) const { return horner_derivative(coeffs_, 2, x); }

bool Potential::second_derivative_vanishes() const { return coeffs_.size() <= 2; }

double Potential::stiffness() const { return coeffs_.size() > 2 ? 2.0 * coeffs_[2] : 0.0; }

std::string Potential::describe() const {
  if (kind_ == Kind::harmonic) return fmt::format("harmonic(k={})", stiffness());
  std::string s = "polynomial(";
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (i) s += ", ";
    s += fmt::format("{}", coeffs_[i]);
  }
  return s + ")";
}

}  // namespace heatbath
