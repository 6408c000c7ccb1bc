#pragma once

// Sampling tests for operator monotonicity. Both tests are one-sided: they
// can refute membership in the monotone classes, never prove it.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tracemono/class_l.hpp"
#include "tracemono/common.hpp"
#include "tracemono/form_order.hpp"
#include "tracemono/operator_core.hpp"

namespace tracemono {

/// Real function of one variable with an optional analytic derivative.
struct ScalarFunction {
  std::function<double(double)> f;
  std::function<double(double)> df;  // empty: Richardson-extrapolated central differences
  std::string label;

  double operator()(double x) const { return f(x); }

  double derivative(double x) const {
    if (df) return df(x);
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    auto central = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
    return (4.0 * central(0.5 * h) - central(h)) / 3.0;
  }

  static ScalarFunction from_class_l(const ClassLFunction& g) {
    return {[g](double s) { return g.value(s); }, [g](double s) { return g.derivative(s); }, g.label()};
  }
};

/// J ⊂ ℝ; defaults to the open half-line (0, ∞).
struct IntervalDomain {
  double lo = 0.0;
  double hi = kInf;
  bool lo_open = true;
  bool hi_open = true;

  bool contains(double x) const {
    const bool above = lo_open ? x > lo : x >= lo;
    const bool below = hi_open ? x < hi : x <= hi;
    return above && below;
  }
};

enum class Direction { increasing, decreasing };

inline const char* to_string(Direction d) { return d == Direction::increasing ? "increasing" : "decreasing"; }

/// Löwner matrix of first divided differences, f′ on the diagonal.
inline SymmetricOperator loewner_matrix(const ScalarFunction& f, const std::vector<double>& points) {
  const auto n = static_cast<Index>(points.size());
  Matrix l(n, n);
  for (Index i = 0; i < n; ++i) {
    const double xi = points[static_cast<std::size_t>(i)];
    l(i, i) = f.derivative(xi);
    for (Index j = 0; j < i; ++j) {
      const double xj = points[static_cast<std::size_t>(j)];
      if (std::abs(xi - xj) <= 1e-8) throw DomainError("loewner_matrix: coincident points");
      l(i, j) = l(j, i) = (f(xi) - f(xj)) / (xi - xj);
    }
  }
  return SymmetricOperator(l);
}

namespace detail {

// Window [lo, hi] ⊂ J drawn at random scale; used to place spectra and points.
inline std::pair<double, double> random_window(const IntervalDomain& j, Rng& rng) {
  if (!(j.hi > j.lo)) throw ConfigError("IntervalDomain: need lo < hi");
  if (std::isfinite(j.lo) && std::isfinite(j.hi)) {
    const double pad = 1e-6 * (j.hi - j.lo);
    const double a = rng.uniform(j.lo + pad, j.hi - pad);
    const double b = rng.uniform(j.lo + pad, j.hi - pad);
    return {std::min(a, b), std::max(a, b)};
  }
  if (std::isfinite(j.lo)) {
    const double offset = std::pow(10.0, rng.uniform(-2.0, 1.0));
    const double width = std::pow(10.0, rng.uniform(-2.0, 2.0));
    return {j.lo + offset, j.lo + offset + width};
  }
  if (std::isfinite(j.hi)) {
    const double offset = std::pow(10.0, rng.uniform(-2.0, 1.0));
    const double width = std::pow(10.0, rng.uniform(-2.0, 2.0));
    return {j.hi - offset - width, j.hi - offset};
  }
  const double centre = rng.uniform(-10.0, 10.0);
  const double width = std::pow(10.0, rng.uniform(-2.0, 2.0));
  return {centre - 0.5 * width, centre + 0.5 * width};
}

inline std::uint64_t label_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

}  // namespace detail

struct PairVerdict {
  bool violated = false;
  int trials_run = 0;
  int trial_index = -1;
  std::uint64_t trial_seed = 0;
  Matrix A, B;          // witness pair with A ≤ B
  double margin = 0.0;  // min eigenvalue of the difference that should be PSD
};

/// Ordered pair A ≤ B (full mode) with both spectra inside J, derived from
/// `seed` alone.
inline std::pair<SymmetricOperator, SymmetricOperator> random_pair_in(const IntervalDomain& j, int dim,
                                                                      std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xA11CE));
  const double perturbation = std::pow(10.0, rng.uniform(-1.5, 0.5));
  const FormPair pair = random_ordered_pair(dim, dim, 1.0, seed, perturbation);
  const auto [w_lo, w_hi] = detail::random_window(j, rng);
  const double m_a = pair.A.lower_bound();
  const double span = pair.B_sub.upper_bound() - m_a;
  if (!(span > 0.0)) throw ConfigError("random_pair_in: degenerate pair");
  const double c = (w_hi - w_lo) / span;
  auto place = [&](const SymmetricOperator& op) {
    Matrix m = c * op.matrix();
    m.diagonal().array() += w_lo - c * m_a;
    return SymmetricOperator(m);
  };
  SymmetricOperator a = place(pair.A), b = place(pair.B_sub);
  if (!j.contains(a.lower_bound()) || !j.contains(b.upper_bound()))
    throw ConfigError("random_pair_in: spectra cannot be placed inside J");
  return {std::move(a), std::move(b)};
}

/// Searches for A ≤ B with spectra in J such that f(A) ≤ f(B) (increasing)
/// or f(B) ≤ f(A) (decreasing) fails by more than 1e-8·max(1, ‖diff‖).
inline PairVerdict monotone_pair_test(const ScalarFunction& f, Direction direction, const IntervalDomain& j,
                                      int dim, int trials, std::uint64_t seed) {
  if (dim < 2 || dim > 4) throw ConfigError("monotone_pair_test: dim must be 2, 3 or 4");
  PairVerdict v;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = mix_seed(seed, static_cast<std::uint64_t>(t));
    const auto [a, b] = random_pair_in(j, dim, trial_seed);
    const SymmetricOperator fa = apply_function(a, f.f), fb = apply_function(b, f.f);
    const PsdResult r = direction == Direction::increasing ? psd_check(fb - fa, 1e-8) : psd_check(fa - fb, 1e-8);
    v.trials_run = t + 1;
    if (!r.pass && r.margin < -1e-8) {
      v.violated = true;
      v.trial_index = t;
      v.trial_seed = trial_seed;
      v.A = a.matrix();
      v.B = b.matrix();
      v.margin = r.margin;
      return v;
    }
  }
  return v;
}

struct LoewnerVerdict {
  bool refuted = false;
  int sets_run = 0;
  std::vector<double> points;
  double min_eig = 0.0;
};

/// Random point sets of size 2..max_points in J; for a decreasing test the
/// Löwner matrix of −f must be PSD.
inline LoewnerVerdict loewner_search(const ScalarFunction& f, Direction direction, const IntervalDomain& j,
                                     int sets, int max_points, std::uint64_t seed) {
  if (max_points < 2) throw ConfigError("loewner_search: need max_points >= 2");
  const double sign = direction == Direction::increasing ? 1.0 : -1.0;
  const ScalarFunction oriented{[&f, sign](double x) { return sign * f(x); },
                                [&f, sign](double x) { return sign * f.derivative(x); }, f.label};
  LoewnerVerdict v;
  for (int s = 0; s < sets; ++s) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
    const int count = rng.integer(2, max_points);
    const auto [lo, hi] = detail::random_window(j, rng);
    std::vector<double> pts;
    while (static_cast<int>(pts.size()) < count) {
      const double x = rng.uniform(lo, hi);
      bool far = j.contains(x);
      for (double p : pts) far = far && std::abs(p - x) > 1e-6 * std::max(1.0, hi - lo);
      if (far) pts.push_back(x);
    }
    const PsdResult r = psd_check(loewner_matrix(oriented, pts), 1e-8);
    v.sets_run = s + 1;
    if (!r.pass && r.margin < -1e-8) {
      v.refuted = true;
      v.points = pts;
      v.min_eig = r.margin;
      return v;
    }
  }
  return v;
}

struct HansenMeasure {
  std::vector<HansenAtom> atoms;

  double total_mass() const {
    double m = 0.0;
    for (const HansenAtom& a : atoms) m += a.w;
    return m;
  }

  void validate() const {
    for (const HansenAtom& a : atoms)
      if (!(a.lambda >= 0.0) || !(a.w >= 0.0) || !std::isfinite(a.lambda) || !std::isfinite(a.w))
        throw DomainError("HansenMeasure: atoms must have finite lambda >= 0 and weight >= 0");
  }
};

/// g̃(s) = Σ_j w_j·s(1+λ_j)/(s+λ_j) for s > 0.
inline ScalarFunction hansen_build(const HansenMeasure& mu) {
  mu.validate();
  auto value = [mu](double s) {
    if (!(s > 0.0)) throw DomainError("hansen function: s must be positive");
    double total = 0.0;
    for (const HansenAtom& a : mu.atoms) total += a.w * s * (1.0 + a.lambda) / (s + a.lambda);
    return total;
  };
  auto deriv = [mu](double s) {
    if (!(s > 0.0)) throw DomainError("hansen function: s must be positive");
    double total = 0.0;
    for (const HansenAtom& a : mu.atoms) total += a.w * (1.0 + a.lambda) * a.lambda / ((s + a.lambda) * (s + a.lambda));
    return total;
  };
  std::ostringstream label;
  label << "hansen_tilde(";
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) label << (i ? ";" : "") << mu.atoms[i].lambda << ":" << mu.atoms[i].w;
  label << ")";
  return {value, deriv, label.str()};
}

/// s ↦ g(1/s).
inline ScalarFunction involution(const ScalarFunction& g) {
  ScalarFunction out;
  out.f = [g](double s) {
    if (!(s > 0.0)) throw DomainError("involution: s must be positive");
    return g(1.0 / s);
  };
  out.df = [g](double s) {
    if (!(s > 0.0)) throw DomainError("involution: s must be positive");
    return -g.derivative(1.0 / s) / (s * s);
  };
  out.label = "involution(" + g.label + ")";
  return out;
}

enum class Membership { consistent, refuted, inconclusive };

inline const char* to_string(Membership m) {
  switch (m) {
    case Membership::consistent: return "consistent-with-monotone";
    case Membership::refuted: return "refuted";
    case Membership::inconclusive: return "inconclusive";
  }
  return "";
}

struct SearchBudget {
  int pair_trials = 10000;
  int pair_dim = 2;
  int loewner_sets = 1000;
  int loewner_max_points = 4;
};

struct ClassificationReport {
  std::string label;
  Direction direction = Direction::decreasing;
  std::uint64_t seed = 0;
  LoewnerVerdict loewner;
  PairVerdict pair;
  Membership verdict = Membership::consistent;
  bool tests_disagree = false;  // one test refuted, the other did not
  bool in_class_L = false;
  std::string class_L_construction;  // empty when not known to be in the class
};

/// Runs both refutation searches. Seeds derive from (seed, label) so a given
/// function always replays the same witnesses.
inline ClassificationReport classify(const ScalarFunction& f, Direction direction,
                                     const std::optional<ClassLFunction>& as_class_l = std::nullopt,
                                     const SearchBudget& budget = {}, std::uint64_t seed = 0,
                                     const IntervalDomain& j = {}) {
  ClassificationReport rep;
  rep.label = f.label;
  rep.direction = direction;
  rep.seed = mix_seed(seed, detail::label_hash(f.label));
  rep.loewner = loewner_search(f, direction, j, budget.loewner_sets, budget.loewner_max_points, rep.seed);
  rep.pair = monotone_pair_test(f, direction, j, budget.pair_dim, budget.pair_trials, mix_seed(rep.seed, 1));
  rep.verdict = rep.loewner.refuted || rep.pair.violated ? Membership::refuted : Membership::consistent;
  rep.tests_disagree = rep.loewner.refuted != rep.pair.violated;
  if (as_class_l) {
    rep.in_class_L = true;
    rep.class_L_construction = as_class_l->label();
  }
  return rep;
}

/// Reports for e^{-s}, (s+1)^{-2} (both in the Laplace class, expected to
/// be refuted as monotone decreasing), s^{-1} and s^{-1/2} (expected to
/// survive). An expected refutation that is not found is reported as
/// inconclusive rather than consistent.
inline std::vector<ClassificationReport> strict_inclusion_demo(const SearchBudget& budget = {},
                                                               std::uint64_t seed = 0) {
  struct Case {
    ClassLFunction g;
    bool expect_refutation;
  };
  const std::vector<Case> cases{{ClassLFunction::exponential(1.0), true},
                                {ClassLFunction::shifted_power(2.0, 1.0), true},
                                {ClassLFunction::power(1.0), false},
                                {ClassLFunction::power(0.5), false}};
  std::vector<ClassificationReport> out;
  for (const Case& c : cases) {
    ClassificationReport rep =
        classify(ScalarFunction::from_class_l(c.g), Direction::decreasing, c.g, budget, seed);
    if (c.expect_refutation && rep.verdict == Membership::consistent) rep.verdict = Membership::inconclusive;
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace tracemono
