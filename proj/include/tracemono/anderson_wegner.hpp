#pragma once

// 1-D Anderson-type model on [0, L] with piecewise-linear finite elements.
//
//   B = H_Λ      conforming P1 space, Dirichlet at 0 and L, kinetic + potential
//   A = H_{N,Λ}  broken P1 space, one block per unit cell, no potential; the
//                two boundary cells are clamped at their outer endpoint
//
// Both are expressed in L²-orthonormal coordinates through the symmetric
// square root of the mass (Gram) matrix, so the conforming space embeds
// isometrically into the broken one and q_A ≤ q_B holds exactly.

#include <array>
#include <limits>
#include <tuple>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tracemono/common.hpp"
#include "tracemono/form_order.hpp"
#include "tracemono/operator_core.hpp"
#include "tracemono/parallel.hpp"
#include "tracemono/trace_laws.hpp"

namespace tracemono {

struct LatticeModel {
  int L = 8;                // number of unit cells, |Λ| = L
  int mesh_per_cell = 8;    // elements per unit cell, h = 1/m
  double coupling = 1.0;    // V_ω = coupling·Σ_j ω_j·1_{cell j}, ω_j ~ U[0, 1]
  int min_eigen_count = 0;  // config error if the conforming space is smaller

  void validate() const {
    if (L < 1) throw ConfigError("LatticeModel: L must be positive");
    if (mesh_per_cell < 2) throw ConfigError("LatticeModel: mesh_per_cell must be >= 2");
    if (!(coupling >= 0.0) || !std::isfinite(coupling)) throw ConfigError("LatticeModel: coupling must be >= 0");
    if (conforming_dim() < min_eigen_count)
      throw ConfigError("LatticeModel: mesh too coarse for the requested eigenvalue count");
  }

  int conforming_dim() const { return L * mesh_per_cell - 1; }
  int broken_dim() const { return L == 1 ? mesh_per_cell - 1 : L * (mesh_per_cell + 1) - 2; }
};

struct DisorderSample {
  std::vector<double> omegas;
  std::uint64_t seed = 0;
};

inline DisorderSample draw_disorder(int cells, std::uint64_t seed) {
  Rng rng(seed);
  DisorderSample s;
  s.seed = seed;
  s.omegas.resize(static_cast<std::size_t>(cells));
  for (double& w : s.omegas) w = rng.uniform();
  return s;
}

struct CellBlock {
  Index offset = 0;  // first broken-space coordinate of the cell
  Index size = 0;
  bool interior = true;     // false for the two cells touching ∂Λ
  SymmetricOperator op;     // −Δ_{N,j} (mixed at the outer end for boundary cells)
};

struct AssembledPair {
  LatticeModel model;
  DisorderSample sample;
  SymmetricOperator dirichlet_op;  // B = H_Λ
  SymmetricOperator broken_op;     // A = H_{N,Λ}
  Matrix embedding;                // V: conforming → broken, orthonormal columns
  std::vector<CellBlock> cells;
  // Raw Galerkin matrices of the conforming space, kept for audit and oracles.
  Matrix stiffness, mass, potential;
  Matrix mass_inv_sqrt;

  FormPair form_pair() const { return FormPair::subspace(broken_op, embedding, dirichlet_op); }
};

namespace detail {

inline void add_element(Matrix& m, Index i, Index j, double diag, double off) {
  if (i >= 0) m(i, i) += diag;
  if (j >= 0) m(j, j) += diag;
  if (i >= 0 && j >= 0) {
    m(i, j) += off;
    m(j, i) += off;
  }
}

}  // namespace detail

/// Disorder-independent part of the assembly, reusable across samples.
class Assembler {
 public:
  explicit Assembler(LatticeModel model) : model_(model) {
    model_.validate();
    const int m = model_.mesh_per_cell;
    const double h = 1.0 / m;
    const Index k = model_.conforming_dim();
    const Index n = model_.broken_dim();

    // Conforming space: global nodes 0..L·m, unknowns are nodes 1..L·m−1.
    stiffness_ = Matrix::Zero(k, k);
    mass_ = Matrix::Zero(k, k);
    const int elements = model_.L * m;
    for (int e = 0; e < elements; ++e) {
      const Index i = e - 1, j = e;  // unknown index of nodes e and e+1
      detail::add_element(stiffness_, i, j < k ? j : -1, 1.0 / h, -1.0 / h);
      detail::add_element(mass_, i, j < k ? j : -1, 2.0 * h / 6.0, h / 6.0);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> mass_eig(mass_);
    mass_inv_sqrt_ = mass_eig.operatorInverseSqrt();

    // Broken space: cell-local nodes 0..m, the outer node of each boundary
    // cell removed.
    Matrix embed_raw = Matrix::Zero(n, k);  // broken coefficients of a conforming function
    Matrix blocks = Matrix::Zero(n, n);
    Matrix mass_sqrt_broken = Matrix::Zero(n, n);
    Index offset = 0;
    for (int c = 0; c < model_.L; ++c) {
      const int first = c == 0 ? 1 : 0;
      const int last = c == model_.L - 1 ? m - 1 : m;
      const Index size = last - first + 1;
      Matrix ks = Matrix::Zero(size, size), ms = Matrix::Zero(size, size);
      for (int e = 0; e < m; ++e) {
        const Index i = e >= first && e <= last ? e - first : -1;
        const Index j = e + 1 >= first && e + 1 <= last ? e + 1 - first : -1;
        detail::add_element(ks, i, j, 1.0 / h, -1.0 / h);
        detail::add_element(ms, i, j, 2.0 * h / 6.0, h / 6.0);
      }
      Eigen::SelfAdjointEigenSolver<Matrix> ms_eig(ms);
      const Matrix s_inv = ms_eig.operatorInverseSqrt();
      CellBlock block;
      block.offset = offset;
      block.size = size;
      block.interior = c != 0 && c != model_.L - 1;
      block.op = SymmetricOperator(s_inv * ks * s_inv);
      blocks.block(offset, offset, size, size) = block.op.matrix();
      mass_sqrt_broken.block(offset, offset, size, size) = ms_eig.operatorSqrt();
      for (int l = first; l <= last; ++l) {
        const Index global = static_cast<Index>(c) * m + l;  // global node, unknown index global − 1
        if (global >= 1 && global <= k) embed_raw(offset + (l - first), global - 1) = 1.0;
      }
      cells_.push_back(std::move(block));
      offset += size;
    }
    broken_op_ = SymmetricOperator(blocks);
    embedding_ = mass_sqrt_broken * embed_raw * mass_inv_sqrt_;
  }

  const LatticeModel& model() const { return model_; }

  AssembledPair assemble(const DisorderSample& sample) const {
    if (static_cast<int>(sample.omegas.size()) != model_.L)
      throw DimensionError("assemble: disorder sample length must equal L");
    const int m = model_.mesh_per_cell;
    const double h = 1.0 / m;
    const Index k = model_.conforming_dim();
    Matrix potential = Matrix::Zero(k, k);
    for (int e = 0; e < model_.L * m; ++e) {
      const double v = model_.coupling * sample.omegas[static_cast<std::size_t>(e / m)];
      if (v == 0.0) continue;
      const Index i = e - 1, j = e;
      detail::add_element(potential, i, j < k ? j : -1, v * 2.0 * h / 6.0, v * h / 6.0);
    }
    AssembledPair out;
    out.model = model_;
    out.sample = sample;
    out.dirichlet_op = SymmetricOperator(mass_inv_sqrt_ * (stiffness_ + potential) * mass_inv_sqrt_);
    out.broken_op = broken_op_;
    out.embedding = embedding_;
    out.cells = cells_;
    out.stiffness = stiffness_;
    out.mass = mass_;
    out.potential = std::move(potential);
    out.mass_inv_sqrt = mass_inv_sqrt_;
    return out;
  }

 private:
  LatticeModel model_;
  Matrix stiffness_, mass_, mass_inv_sqrt_, embedding_;
  SymmetricOperator broken_op_;
  std::vector<CellBlock> cells_;
};

inline AssembledPair assemble(const LatticeModel& model, const DisorderSample& sample) {
  return Assembler(model).assemble(sample);
}

/// I = [lo, hi]; the projector uses I_η = [lo − η, hi + η].
struct EnergyInterval {
  double lo = 0.0;
  double hi = 0.0;
  double eta_pad = 0.1;

  void validate() const {
    if (!(lo <= hi)) throw ConfigError("EnergyInterval: need lo <= hi");
    if (!(eta_pad >= 0.0)) throw ConfigError("EnergyInterval: eta_pad must be nonnegative");
  }
  double width() const { return hi - lo; }
  double padded_hi() const { return hi + eta_pad; }
};

/// Number of eigenvalues of H_Λ in the closed interval [lo, hi].
inline int eigenvalue_count(const AssembledPair& pair, const EnergyInterval& interval) {
  interval.validate();
  int count = 0;
  for (Index i = 0; i < pair.dirichlet_op.dim(); ++i) {
    const double x = pair.dirichlet_op.eigenvalues()(i);
    if (x >= interval.lo && x <= interval.hi) ++count;
  }
  return count;
}

/// The three links of
///   Tr E(I_η) ≤ e^{I_{η,+}} Tr(E e^{−H_Λ}) ≤ e^{I_{η,+}} Tr(E e^{−H_{N,Λ}})
///             = e^{I_{η,+}} Σ_j Tr(E e^{Δ_{N,j}} χ_j).
/// The last link is an identity and passes iff both sides agree to
/// 1e-10·max(1, |rhs|).
inline std::array<InequalityResult, 3> chain_check(const AssembledPair& pair, const EnergyInterval& interval,
                                                   double tol = Tolerances{}.cmp) {
  interval.validate();
  const FormPair fp = pair.form_pair();
  const SpectralProjector e = spectral_projector(pair.dirichlet_op, interval.lo - interval.eta_pad,
                                                 interval.padded_hi());
  const double top = interval.padded_hi();
  const double boost = std::exp(top);
  std::array<InequalityResult, 3> out;

  double boosted = 0.0;
  for (Index j = 0; j < e.rank(); ++j) boosted += std::exp(top - e.eigenvalues_selected(j));
  out[0] = make_result("wegner_step1", static_cast<double>(e.rank()), boosted, tol);

  const InequalityResult heat = heat_trace_check(fp, e, 1.0, tol);
  out[1] = make_result("wegner_step2", boost * heat.lhs, boost * heat.rhs, tol);

  const Matrix ext = fp.extend(e.matrix);
  double by_cells = 0.0;
  for (const CellBlock& cell : pair.cells) {
    const SymmetricOperator heat_cell = apply_function(cell.op, [](double x) { return std::exp(-x); });
    by_cells += weighted_trace(ext.block(cell.offset, cell.offset, cell.size, cell.size), heat_cell.matrix());
  }
  out[2] = make_result("wegner_step3", boost * heat.rhs, boost * by_cells, tol);
  out[2].pass = std::abs(out[2].slack) <= 1e-10 * std::max(1.0, std::abs(out[2].rhs));

  for (InequalityResult& r : out) {
    r.seed = pair.sample.seed;
    r.param = interval.width();
    r.note = "rank=" + std::to_string(e.rank());
  }
  return out;
}

struct WegnerRow {
  double width = 0.0;
  double lo = 0.0, hi = 0.0;
  int L = 0;
  int trials = 0;
  int hits = 0;
  double p_hat = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // Wilson score, 95 %
  double mean_count = 0.0;
  bool uninformative = false;       // all-zero or all-one hit column
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  int points = 0;
  bool valid() const { return points >= 2 && std::isfinite(r_squared); }
};

struct WegnerReport {
  std::vector<WegnerRow> grid;
  LinearFit fit;  // p_hat against |I|·|Λ| over informative rows with p_hat ≤ 0.5
  std::uint64_t master_seed = 0;
  int chain_failures = 0;
  int chain_checks = 0;
  std::vector<InequalityResult> first_failures;
};

inline std::pair<double, double> wilson_interval(int hits, int trials) {
  if (trials <= 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double n = trials;
  const double p = hits / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Least squares of p_hat on width·L over informative rows with p_hat ≤ 0.5.
inline LinearFit fit_wegner(const std::vector<WegnerRow>& grid) {
  std::vector<std::pair<double, double>> pts;
  for (const WegnerRow& r : grid)
    if (!r.uninformative && r.p_hat <= 0.5) pts.emplace_back(r.width * r.L, r.p_hat);
  LinearFit fit;
  fit.points = static_cast<int>(pts.size());
  if (pts.size() < 2) return fit;
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : pts) {
    const double r = y - (fit.intercept + fit.slope * x);
    ss_res += r * r;
  }
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

/// Monte Carlo estimate of P{Tr E_Λ(I) ≥ 1} for every interval. Trial t
/// draws ω from mix_seed(master_seed, t); all intervals share that sample.
/// Every sample also runs chain_check on every interval.
inline WegnerReport wegner_mc(const LatticeModel& model, const std::vector<EnergyInterval>& intervals, int trials,
                              std::uint64_t master_seed, unsigned jobs = 1, double tol = Tolerances{}.cmp) {
  if (trials < 1) throw ConfigError("wegner_mc: trials must be >= 1");
  for (const EnergyInterval& iv : intervals) iv.validate();
  const Assembler assembler(model);
  const std::size_t ni = intervals.size();

  struct TrialOutcome {
    std::vector<int> counts;
    int failures = 0;
    std::vector<InequalityResult> failed;
  };
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));
  parallel_for(outcomes.size(), jobs, [&](std::size_t t) {
    const DisorderSample sample = draw_disorder(model.L, mix_seed(master_seed, t));
    const AssembledPair pair = assembler.assemble(sample);
    TrialOutcome& o = outcomes[t];
    o.counts.resize(ni);
    for (std::size_t i = 0; i < ni; ++i) {
      o.counts[i] = eigenvalue_count(pair, intervals[i]);
      for (const InequalityResult& r : chain_check(pair, intervals[i], tol)) {
        if (!r.pass) {
          ++o.failures;
          o.failed.push_back(r);
        }
      }
    }
  });

  WegnerReport rep;
  rep.master_seed = master_seed;
  rep.chain_checks = static_cast<int>(3 * ni) * trials;
  for (const TrialOutcome& o : outcomes) {
    rep.chain_failures += o.failures;
    for (const InequalityResult& r : o.failed)
      if (rep.first_failures.size() < 10) rep.first_failures.push_back(r);
  }
  for (std::size_t i = 0; i < ni; ++i) {
    WegnerRow row;
    row.width = intervals[i].width();
    row.lo = intervals[i].lo;
    row.hi = intervals[i].hi;
    row.L = model.L;
    row.trials = trials;
    long total = 0;
    for (const TrialOutcome& o : outcomes) {
      total += o.counts[i];
      if (o.counts[i] >= 1) ++row.hits;
    }
    row.p_hat = static_cast<double>(row.hits) / trials;
    row.mean_count = static_cast<double>(total) / trials;
    std::tie(row.ci_lo, row.ci_hi) = wilson_interval(row.hits, trials);
    row.uninformative = row.hits == 0 || row.hits == trials;
    rep.grid.push_back(row);
  }
  rep.fit = fit_wegner(rep.grid);
  return rep;
}

/// Concatenates per-box-size reports and refits over the combined grid.
inline WegnerReport merge_reports(const std::vector<WegnerReport>& parts) {
  WegnerReport out;
  for (const WegnerReport& p : parts) {
    out.master_seed = p.master_seed;
    out.grid.insert(out.grid.end(), p.grid.begin(), p.grid.end());
    out.chain_failures += p.chain_failures;
    out.chain_checks += p.chain_checks;
    for (const InequalityResult& r : p.first_failures)
      if (out.first_failures.size() < 10) out.first_failures.push_back(r);
  }
  out.fit = fit_wegner(out.grid);
  return out;
}

}  // namespace tracemono
