#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "tracemono/common.hpp"

namespace tracemono::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

namespace detail {

// Golub–Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
// mass·(first eigenvector component)².
inline Rule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mass) {
  const Eigen::Index n = diag.size();
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    j(i, i) = diag(i);
    if (i + 1 < n) j(i, i + 1) = j(i + 1, i) = offdiag(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(j);
  Rule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    r.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    r.weights[static_cast<std::size_t>(i)] = mass * v0 * v0;
  }
  return r;
}

}  // namespace detail

/// n-point generalized Gauss–Laguerre rule for ∫₀^∞ u^α e^{-u} f(u) du.
/// Weights sum to Γ(α+1).
inline Rule gauss_laguerre(int n, double alpha) {
  if (n < 1 || !(alpha > -1.0)) throw ConfigError("gauss_laguerre: need n >= 1 and alpha > -1");
  Eigen::VectorXd diag(n), off(n > 1 ? n - 1 : 0);
  for (int i = 0; i < n; ++i) diag(i) = 2.0 * i + alpha + 1.0;
  for (int i = 1; i < n; ++i) off(i - 1) = std::sqrt(i * (i + alpha));
  return detail::golub_welsch(diag, off, std::tgamma(alpha + 1.0));
}

/// n-point Gauss–Legendre rule on [-1, 1].
inline Rule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("gauss_legendre: need n >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), off(n > 1 ? n - 1 : 0);
  for (int i = 1; i < n; ++i) off(i - 1) = i / std::sqrt(4.0 * i * i - 1.0);
  return detail::golub_welsch(diag, off, 2.0);
}

namespace detail {

template <class F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                    int depth, bool& converged) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  if (depth <= 0) {
    converged = false;
    return left + right + diff / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, converged) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, converged);
}

}  // namespace detail

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`. Throws
/// IntegrationError if the recursion limit is hit or the result is not finite.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 40) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  bool converged = true;
  const double r = detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth, converged);
  if (!converged || !std::isfinite(r)) throw IntegrationError("adaptive_simpson: did not converge");
  return r;
}

/// Trapezoid rule in x = ln t for ∫₀^∞ φ(t)·t^α dt where φ(t) is a sum of
/// e^{-κt} with κ ∈ [kappa_min, kappa_max]. The integrand in x decays
/// exponentially on the left and double-exponentially on the right, so the
/// equispaced rule converges geometrically in 1/step. Weights include t^α·dt.
inline Rule log_trapezoid(double alpha, double kappa_min, double kappa_max, double step = 0.2) {
  if (!(alpha > -1.0)) throw ConfigError("log_trapezoid: need alpha > -1");
  if (!(kappa_min > 0.0) || kappa_max < kappa_min) throw DomainError("log_trapezoid: decay rate must be positive");
  // left cut: (κ_max t)^{α+1} ≤ 1e-17
  const double x_lo = std::log(1e-17) / (alpha + 1.0) - std::log(kappa_max);
  // right cut: e^{-κ_min t}·(κ_min t)^α ≤ 1e-18
  double u = 40.0;
  while (u - alpha * std::log(u) < 42.0) u *= 1.25;
  const double x_hi = std::log(u / kappa_min);
  Rule r;
  const int count = static_cast<int>(std::ceil((x_hi - x_lo) / step));
  r.nodes.reserve(static_cast<std::size_t>(count + 1));
  r.weights.reserve(static_cast<std::size_t>(count + 1));
  for (int i = 0; i <= count; ++i) {
    const double x = x_lo + i * step;
    r.nodes.push_back(std::exp(x));
    r.weights.push_back(step * std::exp((alpha + 1.0) * x));
  }
  return r;
}

}  // namespace tracemono::quad
