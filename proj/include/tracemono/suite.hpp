#pragma once

// Seeded corpus of form-ordered pairs and the full battery of trace checks
// run on each one.

#include <cstdint>
#include <string>
#include <vector>

#include "tracemono/class_l.hpp"
#include "tracemono/form_order.hpp"
#include "tracemono/parallel.hpp"
#include "tracemono/trace_laws.hpp"

namespace tracemono::suite {

struct CorpusConfig {
  int pairs = 300;
  int max_dim = 8;
  double spread = 3.0;
  double floor = 0.2;         // added to both spectra
  double shift = 1.0;         // resolvent / power shift a
  double tol = Tolerances{}.cmp;
  double route_tol = 1e-6;
  int n_max = 6;
  int log_domain_from = 7;
  bool reverse_order = false;  // debug: swap A and B, so the ordering fails
};

/// Pair i of the corpus: dimension 2..max_dim, alternating full and subspace mode.
inline FormPair corpus_pair(const CorpusConfig& cfg, std::uint64_t seed, int i) {
  const int n = 2 + i % (cfg.max_dim - 1);
  const bool full = cfg.reverse_order || i % 2 == 0;
  const int k = full ? n : 1 + static_cast<int>(mix_seed(seed, 2 * i + 1) % static_cast<std::uint64_t>(n - 1));
  FormPair pair = random_ordered_pair(n, k, cfg.spread, mix_seed(seed, 2 * i), 1.0);
  pair = affine_map(pair, 1.0, cfg.floor);
  if (cfg.reverse_order) pair = FormPair::full(pair.B_sub, pair.A);
  return pair;
}

inline std::vector<ClassLFunction> function_battery() {
  return {ClassLFunction::power(0.5),      ClassLFunction::power(1.0),
          ClassLFunction::power(3.0),      ClassLFunction::exponential(2.0),
          ClassLFunction::shifted_power(2.0, 1.0), hansen_to_classL({{1.0, 1.0}})};
}

/// Projector onto the lower half (at least one) of B's eigenvalues.
inline SpectralProjector lower_half_projector(const FormPair& pair) {
  std::vector<Index> idx;
  const Index k = pair.subspace_dim();
  for (Index j = 0; j < (k + 1) / 2; ++j) idx.push_back(j);
  return projector_from_indices(pair.B_sub, idx);
}

/// Every check on one pair, Kato first. `seed` tags the records.
inline std::vector<InequalityResult> check_pair(const FormPair& pair, const CorpusConfig& cfg, std::uint64_t seed,
                                                const std::vector<ClassLFunction>& battery) {
  std::vector<InequalityResult> out;
  auto add = [&out](std::vector<InequalityResult> rs) {
    for (InequalityResult& r : rs) out.push_back(std::move(r));
  };
  out.push_back(kato_result(pair, cfg.shift, cfg.tol, seed));

  CheckConfig cc;
  cc.a = cfg.shift;
  cc.n_max = cfg.n_max;
  cc.tol_cmp = cfg.tol;
  cc.log_domain_from = cfg.log_domain_from;
  add(iterated_squaring_chain(pair, 0, cc, seed));

  const SpectralProjector p = lower_half_projector(pair);
  add(power_trace_check(pair, p, cc, seed));
  add(heat_trace_check(pair, p, {0.1, 1.0, 10.0}, cfg.tol, seed));
  for (const ClassLFunction& g : battery) {
    ClassLCheck c = classL_trace_check(pair, p, g, cfg.tol, cfg.route_tol, seed);
    if (!c.routes_agree) {
      c.quadrature.pass = false;
      c.quadrature.note += " route_gap=" + std::to_string(c.route_gap);
    }
    out.push_back(std::move(c.spectral));
    out.push_back(std::move(c.quadrature));
  }
  for (double beta : {0.5, 1.0, 2.0}) out.push_back(power_beta_check(pair, p, cfg.shift, beta, cfg.tol, seed));

  const double mid = pair.B_sub.eigenvalues()((pair.subspace_dim() - 1) / 2);
  const WeightFunction indicator{[mid](double x) { return x <= mid ? 1.0 : 0.0; }, "indicator"};
  const WeightFunction decay{[](double x) { return std::exp(-x); }, "exp"};
  out.push_back(weighted_check(pair, indicator, battery[1], cfg.tol, seed));
  out.push_back(weighted_check(pair, decay, battery[0], cfg.tol, seed));
  add(minmax_check(pair, battery[1], cfg.tol, seed));
  return out;
}

/// Runs the whole corpus. Pair i is tagged with seed mix_seed(seed, 2i),
/// its generator seed. Rows come back in pair order whatever `jobs` is.
inline std::vector<InequalityResult> run_corpus(const CorpusConfig& cfg, std::uint64_t seed, unsigned jobs = 1) {
  if (cfg.pairs < 1) throw ConfigError("run_corpus: pairs must be >= 1");
  if (cfg.max_dim < 2) throw ConfigError("run_corpus: max_dim must be >= 2");
  const std::vector<ClassLFunction> battery = function_battery();
  std::vector<std::vector<InequalityResult>> slots(static_cast<std::size_t>(cfg.pairs));
  parallel_for(slots.size(), jobs, [&](std::size_t i) {
    const int idx = static_cast<int>(i);
    slots[i] = check_pair(corpus_pair(cfg, seed, idx), cfg, mix_seed(seed, 2 * i), battery);
  });
  std::vector<InequalityResult> out;
  for (auto& s : slots)
    for (InequalityResult& r : s) out.push_back(std::move(r));
  return out;
}

}  // namespace tracemono::suite
