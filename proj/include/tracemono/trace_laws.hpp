#pragma once

// Trace inequalities for form-ordered pairs. Every check returns
// InequalityResult records carrying enough context to replay the case.
//
// Conventions: a projector P_B is a SpectralProjector of B_sub (subspace
// coordinates); its A-side trace is taken against the zero extension V·P·Vᵀ.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tracemono/class_l.hpp"
#include "tracemono/common.hpp"
#include "tracemono/form_order.hpp"
#include "tracemono/operator_core.hpp"

namespace tracemono {

struct InequalityResult {
  std::string suite;
  std::uint64_t seed = 0;
  double param = 0.0;  // n, β, t or an index depending on the suite
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs − lhs
  bool pass = true;
  bool log_domain = false;  // lhs/rhs are natural logarithms
  std::string note;
};

/// slack = rhs − lhs; passes iff slack ≥ −tol·max(1, |rhs|). In the log
/// domain the relative tolerance becomes an absolute one on logarithms.
inline InequalityResult make_result(std::string suite, double lhs, double rhs, double tol, double param = 0.0,
                                    bool log_domain = false) {
  InequalityResult r;
  r.suite = std::move(suite);
  r.param = param;
  r.lhs = lhs;
  r.rhs = rhs;
  r.log_domain = log_domain;
  if (log_domain) {
    r.slack = lhs == rhs ? 0.0 : rhs - lhs;  // both −inf for an empty projector
    r.pass = r.slack >= -tol;
  } else {
    r.slack = rhs - lhs;
    r.pass = r.slack >= -tol * std::max(1.0, std::abs(rhs));
  }
  return r;
}

namespace detail {

inline double log_sum_exp(const std::vector<double>& logs) {
  double top = -kInf;
  for (double x : logs) top = std::max(top, x);
  if (top == -kInf) return -kInf;
  double sum = 0.0;
  for (double x : logs) sum += std::exp(x - top);
  return top + std::log(sum);
}

// Weights of the zero-extended projector in the eigenbasis of A.
inline Vector ambient_weights(const FormPair& pair, const SpectralProjector& p) {
  if (p.source_dim != pair.subspace_dim()) throw DimensionError("projector does not live on B's subspace");
  return projector_weights(pair.extend_columns(p.vectors), pair.A);
}

// log Σ c_i (x_i + a)^{-power}, terms with c_i = 0 dropped.
inline double log_power_trace(const Vector& weights, const Vector& spectrum, double a, double power) {
  std::vector<double> logs;
  for (Index i = 0; i < spectrum.size(); ++i)
    if (weights(i) > 0.0) logs.push_back(std::log(weights(i)) - power * std::log(spectrum(i) + a));
  return log_sum_exp(logs);
}

}  // namespace detail

/// Tr P_λ ≤ (λ+a)^{2^n}·Tr(P_λ (A+a)^{-2^n}) for n = 1..n_max, with P_λ the
/// zero-extended rank-one eigenprojector of B for eigenvalue index λ_index.
inline std::vector<InequalityResult> iterated_squaring_chain(const FormPair& pair, Index lambda_index,
                                                             const CheckConfig& cfg, std::uint64_t seed = 0) {
  cfg.check_against(pair);
  if (lambda_index < 0 || lambda_index >= pair.subspace_dim())
    throw ConfigError("iterated_squaring_chain: eigenvalue index out of range");
  const double lambda = pair.B_sub.eigenvalues()(lambda_index);
  if (!(lambda + cfg.a > 0.0)) throw ConfigError("iterated_squaring_chain: need lambda + a > 0");
  const SpectralProjector p = projector_from_indices(pair.B_sub, {lambda_index});
  const Vector c = detail::ambient_weights(pair, p);
  const Vector& spec_a = pair.A.eigenvalues();

  std::vector<InequalityResult> out;
  for (int n = 1; n <= cfg.n_max; ++n) {
    const double power = std::ldexp(1.0, n);
    bool use_log = n >= cfg.log_domain_from;
    double rhs = 0.0;
    if (!use_log) {
      // Σ c_i ((λ+a)/(x_i+a))^{2^n} over A's spectral weights.
      for (Index i = 0; i < spec_a.size(); ++i)
        if (c(i) > 0.0) rhs += c(i) * std::pow((lambda + cfg.a) / (spec_a(i) + cfg.a), power);
      use_log = !std::isfinite(rhs);
    }
    InequalityResult r;
    if (use_log) {
      const double log_rhs = power * std::log(lambda + cfg.a) + detail::log_power_trace(c, spec_a, cfg.a, power);
      r = make_result("iterated_squaring", 0.0, log_rhs, cfg.tol_cmp, n, true);
    } else {
      r = make_result("iterated_squaring", 1.0, rhs, cfg.tol_cmp, n);
    }
    r.seed = seed;
    r.note = "lambda_index=" + std::to_string(lambda_index);
    out.push_back(std::move(r));
  }
  return out;
}

/// Tr(P_B (B+a)^{-2^n}) ≤ Tr(P_B (A+a)^{-2^n}) for n = 1..n_max.
inline std::vector<InequalityResult> power_trace_check(const FormPair& pair, const SpectralProjector& p,
                                                       const CheckConfig& cfg, std::uint64_t seed = 0) {
  cfg.check_against(pair);
  if (!(cfg.a + pair.B_sub.lower_bound() > 0.0)) throw ConfigError("power_trace_check: need a > -inf spec(B)");
  const Vector c = detail::ambient_weights(pair, p);
  const Matrix ext = pair.extend(p.matrix);
  std::vector<InequalityResult> out;
  for (int n = 1; n <= cfg.n_max; ++n) {
    const double power = std::ldexp(1.0, n);
    InequalityResult r;
    if (n >= cfg.log_domain_from) {
      const Vector ones = Vector::Ones(p.rank());
      const double log_lhs = detail::log_power_trace(ones, p.eigenvalues_selected, cfg.a, power);
      const double log_rhs = detail::log_power_trace(c, pair.A.eigenvalues(), cfg.a, power);
      r = make_result("power_trace", log_lhs, log_rhs, cfg.tol_cmp, n, true);
    } else {
      auto f = [&](double x) { return std::pow(x + cfg.a, -power); };
      const double lhs = weighted_trace(p, apply_function(pair.B_sub, f));
      const double rhs = weighted_trace(ext, apply_function(pair.A, f).matrix());
      r = make_result("power_trace", lhs, rhs, cfg.tol_cmp, n);
    }
    r.seed = seed;
    r.note = "rank=" + std::to_string(p.rank());
    out.push_back(std::move(r));
  }
  return out;
}

/// Tr(P_B e^{-tB}) ≤ Tr(P_B e^{-tA}).
inline InequalityResult heat_trace_check(const FormPair& pair, const SpectralProjector& p, double t,
                                         double tol = Tolerances{}.cmp, std::uint64_t seed = 0) {
  if (!(t > 0.0)) throw ConfigError("heat_trace_check: need t > 0");
  auto f = [t](double x) { return std::exp(-t * x); };
  const double lhs = weighted_trace(p, apply_function(pair.B_sub, f));
  const double rhs = weighted_trace(pair.extend(p.matrix), apply_function(pair.A, f).matrix());
  InequalityResult r = make_result("heat_trace", lhs, rhs, tol, t);
  r.seed = seed;
  r.note = "rank=" + std::to_string(p.rank());
  return r;
}

inline std::vector<InequalityResult> heat_trace_check(const FormPair& pair, const SpectralProjector& p,
                                                      const std::vector<double>& times,
                                                      double tol = Tolerances{}.cmp, std::uint64_t seed = 0) {
  std::vector<InequalityResult> out;
  for (double t : times) out.push_back(heat_trace_check(pair, p, t, tol, seed));
  return out;
}

struct ConvergencePoint {
  int n = 0;
  double approximation = 0.0;  // Tr (1 + t(op+b)/2^n)^{-2^n}
  double exact = 0.0;          // Tr e^{-t(op+b)}
  double deviation = 0.0;
};

/// Deviation of the resolvent-power approximation of the heat trace.
inline std::vector<ConvergencePoint> exp_limit_convergence(const SymmetricOperator& op, double t, double b,
                                                           const std::vector<int>& n_list) {
  if (n_list.empty()) return {};
  const int n_min = *std::min_element(n_list.begin(), n_list.end());
  if (!(1.0 + t * (op.lower_bound() + b) / std::ldexp(1.0, n_min) > 0.0))
    throw ConfigError("exp_limit_convergence: 1 + t(lambda_min + b)/2^n must be positive");
  const Vector& lambda = op.eigenvalues();
  double exact = 0.0;
  for (Index i = 0; i < lambda.size(); ++i) exact += std::exp(-t * (lambda(i) + b));
  std::vector<ConvergencePoint> out;
  for (int n : n_list) {
    const double big_n = std::ldexp(1.0, n);
    double approx = 0.0;
    for (Index i = 0; i < lambda.size(); ++i) approx += std::exp(-big_n * std::log1p(t * (lambda(i) + b) / big_n));
    out.push_back({n, approx, exact, std::abs(approx - exact)});
  }
  return out;
}

/// Tr P_B g(B) ≤ Tr P_B g(A) by two routes: functional calculus, and the
/// Laplace integral of heat traces ∫ Tr(P e^{-tX}) dρ(t) on common nodes.
struct ClassLCheck {
  InequalityResult spectral;
  InequalityResult quadrature;
  double route_gap = 0.0;  // max relative disagreement of lhs and rhs between routes
  bool routes_agree = true;
  bool pass() const { return spectral.pass && quadrature.pass && routes_agree; }
};

inline ClassLCheck classL_trace_check(const FormPair& pair, const SpectralProjector& p, const ClassLFunction& g,
                                      double tol = Tolerances{}.cmp, double route_tol = 1e-6,
                                      std::uint64_t seed = 0) {
  ClassLCheck out;
  auto gf = [&g](double x) { return g.value(x); };
  const double lhs = weighted_trace(p, apply_function(pair.B_sub, gf));
  const double rhs = weighted_trace(pair.extend(p.matrix), apply_function(pair.A, gf).matrix());
  out.spectral = make_result("classL_spectral", lhs, rhs, tol);

  const Vector c = detail::ambient_weights(pair, p);
  const Vector& spec_a = pair.A.eigenvalues();
  const double lo = std::min(pair.A.lower_bound(), pair.B_sub.lower_bound());
  const double hi = std::max(pair.A.upper_bound(), pair.B_sub.upper_bound());
  const quad::Rule rule = g.laplace_rule(lo, hi);
  double lhs_q = 0.0, rhs_q = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double t = rule.nodes[i];
    double heat_b = 0.0, heat_a = 0.0;
    for (Index j = 0; j < p.rank(); ++j) heat_b += std::exp(-t * p.eigenvalues_selected(j));
    for (Index j = 0; j < spec_a.size(); ++j) heat_a += c(j) * std::exp(-t * spec_a(j));
    lhs_q += rule.weights[i] * heat_b;
    rhs_q += rule.weights[i] * heat_a;
  }
  out.quadrature = make_result("classL_quadrature", lhs_q, rhs_q, tol);

  auto rel = [](double x, double y) {
    const double scale = std::max(std::abs(x), std::abs(y));
    return scale == 0.0 ? 0.0 : std::abs(x - y) / scale;
  };
  out.route_gap = std::max(rel(lhs, lhs_q), rel(rhs, rhs_q));
  out.routes_agree = out.route_gap <= route_tol;
  for (InequalityResult* r : {&out.spectral, &out.quadrature}) {
    r->seed = seed;
    r->note = g.label();
  }
  return out;
}

/// Tr(P_B (B+a)^{-β}) ≤ Tr(P_B (A+a)^{-β}) for any β > 0.
inline InequalityResult power_beta_check(const FormPair& pair, const SpectralProjector& p, double a, double beta,
                                         double tol = Tolerances{}.cmp, std::uint64_t seed = 0) {
  if (!(beta > 0.0)) throw ConfigError("power_beta_check: need beta > 0");
  if (!(a + pair.A.lower_bound() > 0.0) || !(a + pair.B_sub.lower_bound() > 0.0))
    throw DomainError("power_beta_check: need a > -inf spec(A)");
  auto f = [a, beta](double x) { return std::pow(x + a, -beta); };
  const double lhs = weighted_trace(p, apply_function(pair.B_sub, f));
  const double rhs = weighted_trace(pair.extend(p.matrix), apply_function(pair.A, f).matrix());
  InequalityResult r = make_result("power_beta", lhs, rhs, tol, beta);
  r.seed = seed;
  r.note = "a=" + std::to_string(a);
  return r;
}

/// Nonnegative weight f applied to B's eigenvalues.
struct WeightFunction {
  std::function<double(double)> f;
  std::string label;
};

/// Tr f(B)g(B) ≤ Tr f(B)g(A), summed eigenvalue by eigenvalue over an
/// orthonormal eigenbasis of B.
inline InequalityResult weighted_check(const FormPair& pair, const WeightFunction& f, const ClassLFunction& g,
                                       double tol = Tolerances{}.cmp, std::uint64_t seed = 0) {
  const Vector& lambda = pair.B_sub.eigenvalues();
  const SymmetricOperator g_a = apply_function(pair.A, [&g](double x) { return g.value(x); });
  double lhs = 0.0, rhs = 0.0;
  for (Index j = 0; j < lambda.size(); ++j) {
    const double weight = f.f(lambda(j));
    if (!(weight >= 0.0)) throw DomainError("weighted_check: weight function negative at eigenvalue " +
                                            std::to_string(lambda(j)));
    if (weight == 0.0) continue;
    const Vector v = pair.basis * pair.B_sub.eigenvectors().col(j);
    lhs += weight * g.value(lambda(j));
    rhs += weight * v.dot(g_a.matrix() * v);
  }
  InequalityResult r = make_result("weighted", lhs, rhs, tol);
  r.seed = seed;
  r.note = f.label + "*" + g.label();
  return r;
}

/// Eigenvalue-by-eigenvalue route to Tr g(B) ≤ Tr g(A): one record per k
/// comparing g(μ_k(B)) with g(μ_k(VᵀAV)) (interlacing), then the trace.
inline std::vector<InequalityResult> minmax_check(const FormPair& pair, const ClassLFunction& g,
                                                  double tol = Tolerances{}.cmp, std::uint64_t seed = 0) {
  const Vector& mu_b = pair.B_sub.eigenvalues();
  const Vector mu_c = pair.compressed_A().eigenvalues();
  std::vector<InequalityResult> out;
  double tr_b = 0.0;
  for (Index k = 0; k < mu_b.size(); ++k) {
    const double gb = g.value(mu_b(k));
    tr_b += gb;
    InequalityResult r = make_result("minmax_pointwise", gb, g.value(mu_c(k)), tol, static_cast<double>(k));
    r.seed = seed;
    r.note = g.label();
    out.push_back(std::move(r));
  }
  double tr_a = 0.0;
  for (Index i = 0; i < pair.A.dim(); ++i) tr_a += g.value(pair.A.eigenvalues()(i));
  InequalityResult r = make_result("minmax_trace", tr_b, tr_a, tol);
  r.seed = seed;
  r.note = g.label();
  out.push_back(std::move(r));
  return out;
}

/// Kato's resolvent inequality as a record: lhs = 0, rhs = λ_min of
/// (A+a)^{-1} − (B+a)^{-1}.
inline InequalityResult kato_result(const FormPair& pair, double a, double tol = Tolerances{}.cmp,
                                    std::uint64_t seed = 0) {
  const PsdResult psd = kato_check(pair, a, tol);
  InequalityResult r = make_result("kato", 0.0, psd.margin, tol, a);
  r.pass = psd.pass;
  r.seed = seed;
  return r;
}

}  // namespace tracemono
