#include "taxlearn/cost.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "taxlearn/errors.hpp"

namespace taxlearn {
namespace {

constexpr int kCheckPoints = 1024;
constexpr double kCheckTol = 1e-12;

double horner(const std::vector<double>& a, double u) {
  double acc = 0.0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * u + *it;
  return acc;
}

std::vector<double> differentiate(const std::vector<double>& a) {
  std::vector<double> d;
  for (std::size_t k = 1; k < a.size(); ++k) d.push_back(static_cast<double>(k) * a[k]);
  return d;
}

}  // namespace

CostFunction::CostFunction(Kind kind, std::vector<double> coefficients, double scale,
                           double exponent)
    : kind_(kind), coefficients_(std::move(coefficients)), scale_(scale), exponent_(exponent) {
  for (double a : coefficients_) {
    if (!std::isfinite(a)) throw InstanceError("cost: non-finite coefficient");
  }
}

CostFunction CostFunction::constant(double value) {
  return CostFunction(Kind::kConstant, {value}, 0.0, 0.0);
}

CostFunction CostFunction::affine(double intercept, double slope) {
  return CostFunction(Kind::kAffine, {intercept, slope}, 0.0, 0.0);
}

CostFunction CostFunction::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) throw InstanceError("cost: polynomial needs coefficients");
  return CostFunction(Kind::kPolynomial, std::move(coefficients), 0.0, 0.0);
}

CostFunction CostFunction::monomial(double scale, double exponent) {
  if (!std::isfinite(scale) || !std::isfinite(exponent)) {
    throw InstanceError("cost: non-finite monomial parameters");
  }
  if (!(exponent == 1.0 || exponent >= 2.0)) {
    throw InstanceError("cost: monomial exponent must be 1 or >= 2 (smoothness)");
  }
  return CostFunction(Kind::kMonomial, {}, scale, exponent);
}

std::string CostFunction::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::kConstant:
      out << "constant(" << coefficients_[0] << ")";
      break;
    case Kind::kAffine:
      out << "affine(" << coefficients_[0] << ", " << coefficients_[1] << ")";
      break;
    case Kind::kPolynomial: {
      out << "polynomial(";
      for (std::size_t k = 0; k < coefficients_.size(); ++k) {
        out << (k ? ", " : "") << coefficients_[k];
      }
      out << ")";
      break;
    }
    case Kind::kMonomial:
      out << scale_ << "*u^" << exponent_;
      break;
  }
  return out.str();
}

double CostFunction::value(double u) const {
  if (kind_ == Kind::kMonomial) return scale_ * std::pow(u, exponent_);
  return horner(coefficients_, u);
}

double CostFunction::derivative(double u) const {
  if (kind_ == Kind::kMonomial) {
    if (exponent_ == 1.0) return scale_;
    return scale_ * exponent_ * std::pow(u, exponent_ - 1.0);
  }
  return horner(differentiate(coefficients_), u);
}

double CostFunction::second_derivative(double u) const {
  if (kind_ == Kind::kMonomial) {
    if (exponent_ == 1.0) return 0.0;
    if (exponent_ == 2.0) return 2.0 * scale_;
    return scale_ * exponent_ * (exponent_ - 1.0) * std::pow(u, exponent_ - 2.0);
  }
  return horner(differentiate(differentiate(coefficients_)), u);
}

double CostFunction::antiderivative(double u) const {
  if (kind_ == Kind::kMonomial) {
    return scale_ * std::pow(u, exponent_ + 1.0) / (exponent_ + 1.0);
  }
  double acc = 0.0;
  for (std::size_t k = coefficients_.size(); k-- > 0;) {
    acc = acc * u + coefficients_[k] / static_cast<double>(k + 1);
  }
  return acc * u;
}

double CostFunction::smoothness() const {
  switch (kind_) {
    case Kind::kConstant:
    case Kind::kAffine:
      return 0.0;
    case Kind::kMonomial:
      // |c''| = |s| p (p-1) u^{p-2} peaks at u = 1 for p >= 2.
      return exponent_ == 1.0 ? 0.0 : std::abs(scale_) * exponent_ * (exponent_ - 1.0);
    case Kind::kPolynomial: {
      // Grid maximum of |c''| plus the largest possible change of c'' between
      // grid points, bounded through sum |k(k-1)(k-2) a_k|.
      const auto d2 = differentiate(differentiate(coefficients_));
      const auto d3 = differentiate(d2);
      double lipschitz = 0.0;
      for (double a : d3) lipschitz += std::abs(a);
      const int n = 4096;
      double best = 0.0;
      for (int i = 0; i <= n; ++i) {
        best = std::max(best, std::abs(horner(d2, static_cast<double>(i) / n)));
      }
      return d3.empty() ? best : best + lipschitz * 0.5 / n;
    }
  }
  return 0.0;
}

void CostFunction::validate() const {
  double prev_value = value(0.0);
  double prev_marginal = 0.0;
  for (int i = 0; i <= kCheckPoints; ++i) {
    const double u = static_cast<double>(i) / kCheckPoints;
    const double v = value(u);
    const double d = derivative(u);
    const double marginal = u * d;
    if (v < -kCheckTol || v > 1.0 + kCheckTol) {
      throw InstanceError("cost " + describe() + ": value outside [0,1] at u=" + std::to_string(u));
    }
    if (d < -kCheckTol || v < prev_value - kCheckTol) {
      throw InstanceError("cost " + describe() +
                          ": violates monotonicity (non-decreasing cost) at u=" + std::to_string(u));
    }
    if (marginal < prev_marginal - kCheckTol) {
      throw InstanceError("cost " + describe() +
                          ": violates marginal-cost monotonicity (u c'(u) non-decreasing) at u=" +
                          std::to_string(u));
    }
    prev_value = v;
    prev_marginal = marginal;
  }
}

std::function<double(double)> marginal_cost_tax(const CostFunction& cost) {
  return [cost](double u) { return u * cost.derivative(u); };
}

}  // namespace taxlearn
