#pragma once

// Laplace transforms of nonnegative measures on [0, ∞):
//   g(s) = Σ_j w_j e^{-s t_j} + ∫₀^∞ e^{-st} density(t) dt.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tracemono/common.hpp"
#include "tracemono/operator_core.hpp"
#include "tracemono/quadrature.hpp"

namespace tracemono {

struct Atom {
  double t = 0.0;
  double w = 0.0;
};

/// scale·t^α·e^{-decay·t}
struct PowerLawTerm {
  double alpha = 0.0;
  double scale = 1.0;
  double decay = 0.0;
};

/// Sum of power-law terms. A single term is the plain power-law density.
struct PowerLawDensity {
  std::vector<PowerLawTerm> terms;
};

/// Piecewise-linear density on an ascending grid, zero outside it.
struct TabulatedDensity {
  std::vector<double> grid;
  std::vector<double> values;

  double operator()(double t) const {
    if (t < grid.front() || t > grid.back()) return 0.0;
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    if (it == grid.end()) return values.back();
    const auto hi = static_cast<std::size_t>(it - grid.begin());
    const std::size_t lo = hi - 1;
    const double frac = (t - grid[lo]) / (grid[hi] - grid[lo]);
    return values[lo] + frac * (values[hi] - values[lo]);
  }
};

using Density = std::variant<std::monostate, PowerLawDensity, TabulatedDensity>;

struct LaplaceMeasure {
  std::vector<Atom> atoms;
  Density density;

  /// Throws DomainError on a negative location/weight, alpha ≤ -1,
  /// nonpositive scale, negative decay or a malformed table.
  void validate() const {
    for (const Atom& a : atoms) {
      if (!(a.t >= 0.0) || !(a.w >= 0.0) || !std::isfinite(a.t) || !std::isfinite(a.w))
        throw DomainError("LaplaceMeasure: atom locations and weights must be finite and nonnegative");
    }
    if (const auto* p = std::get_if<PowerLawDensity>(&density)) {
      for (const PowerLawTerm& term : p->terms) {
        if (!(term.alpha > -1.0)) throw DomainError("LaplaceMeasure: power-law alpha must exceed -1");
        if (!(term.scale > 0.0)) throw DomainError("LaplaceMeasure: power-law scale must be positive");
        if (!(term.decay >= 0.0)) throw DomainError("LaplaceMeasure: power-law decay must be nonnegative");
      }
    } else if (const auto* tab = std::get_if<TabulatedDensity>(&density)) {
      if (tab->grid.size() < 2 || tab->grid.size() != tab->values.size())
        throw DomainError("LaplaceMeasure: tabulated density needs >= 2 grid points and matching values");
      for (std::size_t i = 0; i < tab->grid.size(); ++i) {
        if (!(tab->values[i] >= 0.0) || !std::isfinite(tab->values[i]))
          throw DomainError("LaplaceMeasure: tabulated values must be nonnegative");
        if (i > 0 && !(tab->grid[i] > tab->grid[i - 1]))
          throw DomainError("LaplaceMeasure: tabulated grid must be strictly ascending");
      }
      if (!(tab->grid.front() >= 0.0)) throw DomainError("LaplaceMeasure: tabulated grid must start at t >= 0");
    }
  }

  bool has_density() const { return !std::holds_alternative<std::monostate>(density); }

  /// g(s) converges for s > abscissa.
  double abscissa() const {
    double out = -kInf;
    if (const auto* p = std::get_if<PowerLawDensity>(&density))
      for (const PowerLawTerm& term : p->terms) out = std::max(out, -term.decay);
    return out;
  }
};

inline LaplaceMeasure operator*(double c, LaplaceMeasure m) {
  for (Atom& a : m.atoms) a.w *= c;
  if (auto* p = std::get_if<PowerLawDensity>(&m.density))
    for (PowerLawTerm& term : p->terms) term.scale *= c;
  if (auto* tab = std::get_if<TabulatedDensity>(&m.density))
    for (double& v : tab->values) v *= c;
  return m;
}

/// Sum of measures. Tabulated densities cannot be merged with other densities.
inline LaplaceMeasure operator+(LaplaceMeasure x, const LaplaceMeasure& y) {
  x.atoms.insert(x.atoms.end(), y.atoms.begin(), y.atoms.end());
  if (!y.has_density()) return x;
  if (!x.has_density()) {
    x.density = y.density;
    return x;
  }
  auto* px = std::get_if<PowerLawDensity>(&x.density);
  const auto* py = std::get_if<PowerLawDensity>(&y.density);
  if (px == nullptr || py == nullptr) throw DomainError("LaplaceMeasure: cannot add tabulated densities");
  px->terms.insert(px->terms.end(), py->terms.begin(), py->terms.end());
  return x;
}

class ClassLFunction {
 public:
  static constexpr int kLaguerreNodes = 64;

  ClassLFunction(LaplaceMeasure measure, std::string label)
      : measure_(std::move(measure)), label_(std::move(label)) {
    measure_.validate();
    if (const auto* p = std::get_if<PowerLawDensity>(&measure_.density)) {
      for (const PowerLawTerm& term : p->terms)
        rules_.push_back(std::make_shared<const quad::Rule>(quad::gauss_laguerre(kLaguerreNodes, term.alpha)));
    }
  }

  /// s^{-β}: density t^{β-1}/Γ(β).
  static ClassLFunction power(double beta) {
    if (!(beta > 0.0)) throw DomainError("power: beta must be positive");
    LaplaceMeasure m;
    m.density = PowerLawDensity{{PowerLawTerm{beta - 1.0, 1.0 / std::tgamma(beta), 0.0}}};
    return ClassLFunction(std::move(m), "power(" + fmt(beta) + ")");
  }

  /// e^{-as}: unit atom at t = a.
  static ClassLFunction exponential(double a) {
    if (!(a >= 0.0)) throw DomainError("exponential: a must be nonnegative");
    LaplaceMeasure m;
    m.atoms.push_back({a, 1.0});
    return ClassLFunction(std::move(m), "exponential(" + fmt(a) + ")");
  }

  /// (s+a)^{-ρ}: density e^{-at}·t^{ρ-1}/Γ(ρ).
  static ClassLFunction shifted_power(double rho, double a) {
    if (!(rho > 0.0) || !(a >= 0.0)) throw DomainError("shifted_power: need rho > 0 and a >= 0");
    LaplaceMeasure m;
    m.density = PowerLawDensity{{PowerLawTerm{rho - 1.0, 1.0 / std::tgamma(rho), a}}};
    return ClassLFunction(std::move(m), "shifted_power(" + fmt(rho) + "," + fmt(a) + ")");
  }

  const LaplaceMeasure& measure() const { return measure_; }
  const std::string& label() const { return label_; }

  /// g(s) for s > 0.
  double eval_scalar(double s) const {
    if (!(s > 0.0)) throw DomainError("eval_scalar: s must be positive, got " + fmt(s));
    return value(s);
  }

  /// g(s) on the whole convergence half-line s > abscissa; atom-only
  /// measures are entire.
  double value(double s) const {
    if (!(s > measure_.abscissa())) throw DomainError("class-L function diverges at s = " + fmt(s));
    double total = 0.0;
    for (const Atom& a : measure_.atoms) total += a.w * std::exp(-s * a.t);
    if (const auto* p = std::get_if<PowerLawDensity>(&measure_.density)) {
      for (std::size_t i = 0; i < p->terms.size(); ++i) {
        const PowerLawTerm& term = p->terms[i];
        // ∫ e^{-(s+d)t} t^α dt = (s+d)^{-(α+1)} ∫ e^{-u} u^α du
        total += term.scale * std::pow(s + term.decay, -(term.alpha + 1.0)) * rule_sum(*rules_[i]);
      }
    } else if (const auto* tab = std::get_if<TabulatedDensity>(&measure_.density)) {
      total += tabulated_integral(*tab, s, 0);
    }
    return total;
  }

  /// g'(s) = -∫ t e^{-st} dρ(t).
  double derivative(double s) const {
    if (!(s > measure_.abscissa())) throw DomainError("class-L derivative diverges at s = " + fmt(s));
    double total = 0.0;
    for (const Atom& a : measure_.atoms) total -= a.w * a.t * std::exp(-s * a.t);
    if (const auto* p = std::get_if<PowerLawDensity>(&measure_.density)) {
      for (std::size_t i = 0; i < p->terms.size(); ++i) {
        const PowerLawTerm& term = p->terms[i];
        total -= term.scale * (term.alpha + 1.0) * std::pow(s + term.decay, -(term.alpha + 2.0)) *
                 rule_sum(*rules_[i]);
      }
    } else if (const auto* tab = std::get_if<TabulatedDensity>(&measure_.density)) {
      total -= tabulated_integral(*tab, s, 1);
    }
    return total;
  }

  /// Nodes (t_i, W_i) such that ∫ φ dρ ≈ Σ W_i φ(t_i) for every φ(t) = e^{-tλ}
  /// with λ ∈ [lambda_min, lambda_max]; atoms are included exactly.
  quad::Rule laplace_rule(double lambda_min, double lambda_max) const {
    quad::Rule out;
    for (const Atom& a : measure_.atoms) {
      out.nodes.push_back(a.t);
      out.weights.push_back(a.w);
    }
    if (const auto* p = std::get_if<PowerLawDensity>(&measure_.density)) {
      for (const PowerLawTerm& term : p->terms) {
        const double kmin = lambda_min + term.decay;
        if (!(kmin > 0.0)) throw DomainError(label_ + ": Laplace integral diverges at eigenvalue " + fmt(lambda_min));
        const quad::Rule r = quad::log_trapezoid(term.alpha, kmin, std::max(kmin, lambda_max + term.decay));
        for (std::size_t i = 0; i < r.size(); ++i) {
          out.nodes.push_back(r.nodes[i]);
          out.weights.push_back(term.scale * r.weights[i] * std::exp(-term.decay * r.nodes[i]));
        }
      }
    } else if (const auto* tab = std::get_if<TabulatedDensity>(&measure_.density)) {
      const quad::Rule gl = quad::gauss_legendre(20);
      for (std::size_t seg = 0; seg + 1 < tab->grid.size(); ++seg) {
        const double a = tab->grid[seg], b = tab->grid[seg + 1];
        for (std::size_t i = 0; i < gl.size(); ++i) {
          const double t = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
          out.nodes.push_back(t);
          out.weights.push_back(0.5 * (b - a) * gl.weights[i] * (*tab)(t));
        }
      }
    }
    return out;
  }

 private:
  static std::string fmt(double x) {
    std::ostringstream s;
    s << x;
    return s.str();
  }

  static double rule_sum(const quad::Rule& r) {
    double sum = 0.0;
    for (double w : r.weights) sum += w;
    return sum;
  }

  // ∫ t^k e^{-st} density(t) dt over the grid, segments beyond e^{-st} < 1e-16
  // dropped.
  static double tabulated_integral(const TabulatedDensity& tab, double s, int k) {
    double total = 0.0;
    for (std::size_t seg = 0; seg + 1 < tab.grid.size(); ++seg) {
      const double a = tab.grid[seg], b = tab.grid[seg + 1];
      if (std::exp(-s * a) < 1e-16) break;
      auto integrand = [&](double t) { return std::pow(t, k) * std::exp(-s * t) * tab(t); };
      const double scale = std::max(1e-300, std::exp(-s * a) * std::max(tab.values[seg], tab.values[seg + 1]));
      total += quad::adaptive_simpson(integrand, a, b, 1e-13 * scale * std::max(1.0, b - a));
    }
    return total;
  }

  LaplaceMeasure measure_;
  std::string label_;
  std::vector<std::shared_ptr<const quad::Rule>> rules_;
};

/// Atom of a Hansen measure μ on [0, ∞).
struct HansenAtom {
  double lambda = 0.0;
  double w = 0.0;
};

/// f(s) = Σ_j w_j (1+λ_j)/(1+sλ_j) as the Laplace transform of
/// h(t) = Σ_j w_j (1 + 1/λ_j) e^{-t/λ_j}. A λ = 0 atom contributes a
/// constant, which has no integrable density, and is rejected.
inline ClassLFunction hansen_to_classL(const std::vector<HansenAtom>& mu) {
  PowerLawDensity h;
  std::ostringstream label;
  label << "hansen(";
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const HansenAtom& a = mu[j];
    if (!(a.w >= 0.0)) throw DomainError("hansen_to_classL: weights must be nonnegative");
    if (!(a.lambda > 0.0))
      throw DomainError("hansen_to_classL: atom at lambda = 0 gives a constant term with no Laplace density");
    if (a.w > 0.0) h.terms.push_back(PowerLawTerm{0.0, a.w * (1.0 + 1.0 / a.lambda), 1.0 / a.lambda});
    label << (j ? ";" : "") << a.lambda << ":" << a.w;
  }
  label << ")";
  LaplaceMeasure m;
  if (!h.terms.empty()) m.density = std::move(h);
  return ClassLFunction(std::move(m), label.str());
}

enum class EvalPath { spectral, quadrature };

/// g(op) either by functional calculus on the eigenvalues or as the
/// semigroup integral Σ W_i e^{-t_i·op} over Laplace nodes.
inline SymmetricOperator eval_operator(const ClassLFunction& g, const SymmetricOperator& op,
                                       EvalPath path = EvalPath::spectral) {
  if (path == EvalPath::spectral) return apply_function(op, [&g](double s) { return g.value(s); });
  if (op.dim() == 0) return op;
  const Vector& lambda = op.eigenvalues();
  const quad::Rule rule = g.laplace_rule(lambda(0), lambda(lambda.size() - 1));
  Vector values = Vector::Zero(lambda.size());
  for (std::size_t i = 0; i < rule.size(); ++i)
    values += rule.weights[i] * (-rule.nodes[i] * lambda.array()).exp().matrix();
  return SymmetricOperator::from_spectrum(values, op.eigenvectors());
}

}  // namespace tracemono
