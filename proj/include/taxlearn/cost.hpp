#pragma once

#include <functional>
#include <string>
#include <vector>

namespace taxlearn {

/// Analytic facility cost on [0,1] with exact derivative and antiderivative.
///
/// Supported kinds: constant c, affine a + b u, polynomial sum_k a_k u^k and
/// monomial s * u^p (real p, with p == 1 or p >= 2 so the cost stays smooth).
class CostFunction {
 public:
  enum class Kind { kConstant, kAffine, kPolynomial, kMonomial };

  static CostFunction constant(double value);
  static CostFunction affine(double intercept, double slope);
  static CostFunction polynomial(std::vector<double> coefficients);
  static CostFunction monomial(double scale, double exponent);

  Kind kind() const { return kind_; }
  std::string describe() const;

  double value(double u) const;
  double derivative(double u) const;
  double second_derivative(double u) const;
  // ∫_0^u c(s) ds.
  double antiderivative(double u) const;

  // Upper bound on |c''| over [0,1], i.e. the smoothness constant β of this cost.
  double smoothness() const;

  // Polynomial coefficients (constant/affine/polynomial kinds).
  const std::vector<double>& coefficients() const { return coefficients_; }
  double scale() const { return scale_; }
  double exponent() const { return exponent_; }

  /// Checks the modelling assumptions on a 1024-point grid: values in [0,1],
  /// non-decreasing, and u c'(u) non-decreasing. Throws InstanceError naming
  /// the violated assumption.
  void validate() const;

 private:
  CostFunction(Kind kind, std::vector<double> coefficients, double scale, double exponent);

  Kind kind_;
  std::vector<double> coefficients_;
  double scale_ = 0.0;
  double exponent_ = 0.0;
};

/// u ↦ u c'(u). Only oracles and tests use this; the learner never sees it.
std::function<double(double)> marginal_cost_tax(const CostFunction& cost);

}  // namespace taxlearn
