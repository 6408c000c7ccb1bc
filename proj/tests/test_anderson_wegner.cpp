#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "tracemono/anderson_wegner.hpp"

using namespace tracemono;

namespace {

LatticeModel model(int L, int m, double coupling) {
  LatticeModel mdl;
  mdl.L = L;
  mdl.mesh_per_cell = m;
  mdl.coupling = coupling;
  return mdl;
}

// P1 Dirichlet Laplacian on [0, N·h]: generalized eigenvalues of the
// (stiffness, mass) pair in closed form.
std::vector<double> p1_dirichlet_eigenvalues(int elements, double h) {
  std::vector<double> out;
  for (int k = 1; k < elements; ++k) {
    const double c = std::cos(k * M_PI / elements);
    out.push_back(6.0 / (h * h) * (1.0 - c) / (2.0 + c));
  }
  return out;
}

}  // namespace

TEST(Assembly, Dimensions) {
  EXPECT_EQ(model(8, 8, 1).conforming_dim(), 63);
  EXPECT_EQ(model(8, 8, 1).broken_dim(), 70);
  EXPECT_EQ(model(1, 8, 1).broken_dim(), 7);
  const AssembledPair p = assemble(model(4, 5, 1.0), draw_disorder(4, 1));
  EXPECT_EQ(p.dirichlet_op.dim(), 19);
  EXPECT_EQ(p.broken_op.dim(), 22);
  EXPECT_EQ(p.embedding.rows(), 22);
  EXPECT_EQ(p.embedding.cols(), 19);
  ASSERT_EQ(p.cells.size(), 4u);
  EXPECT_FALSE(p.cells.front().interior);
  EXPECT_TRUE(p.cells[1].interior);
  EXPECT_EQ(p.cells.front().size, 5);
  EXPECT_EQ(p.cells[1].size, 6);
}

TEST(Assembly, FreeSpectrumMatchesClosedFormAndGeneralizedOracle) {
  for (int L : {1, 3, 4}) {
    const int m = 6;
    const AssembledPair p = assemble(model(L, m, 2.0), DisorderSample{std::vector<double>(L, 0.0), 0});
    const std::vector<double> want = p1_dirichlet_eigenvalues(L * m, 1.0 / m);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> gen(p.stiffness, p.mass);
    for (Index i = 0; i < p.dirichlet_op.dim(); ++i) {
      EXPECT_NEAR(p.dirichlet_op.eigenvalues()(i), want[static_cast<std::size_t>(i)], 1e-9 * want.back());
      EXPECT_NEAR(p.dirichlet_op.eigenvalues()(i), gen.eigenvalues()(i), 1e-9 * want.back());
    }
  }
}

TEST(Assembly, EmbeddingIsIsometricAndBlocksAreNeumannCells) {
  const AssembledPair p = assemble(model(5, 4, 1.0), draw_disorder(5, 2));
  const Index k = p.embedding.cols();
  EXPECT_LE((p.embedding.transpose() * p.embedding - Matrix::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-12);
  for (const CellBlock& c : p.cells) {
    const Matrix off = p.broken_op.matrix().block(c.offset, 0, c.size, c.offset);
    if (off.size() > 0) {
      EXPECT_EQ(off.cwiseAbs().maxCoeff(), 0.0);
    }
    if (c.interior) {
      EXPECT_NEAR(c.op.lower_bound(), 0.0, 1e-10);  // Neumann cell has constants
    } else {
      EXPECT_GT(c.op.lower_bound(), 0.1);  // clamped at the outer end
    }
  }
}

TEST(Assembly, KineticFormsAgreeWithoutPotential) {
  const AssembledPair p = assemble(model(6, 5, 0.0), draw_disorder(6, 3));
  const FormPair fp = p.form_pair();
  const Matrix margin = fp.B_sub.matrix() - fp.compressed_A().matrix();
  EXPECT_LE(margin.cwiseAbs().maxCoeff(), 1e-10 * p.dirichlet_op.upper_bound());
}

TEST(Assembly, SingleCellMarginIsZero) {
  const AssembledPair p = assemble(model(1, 8, 0.0), draw_disorder(1, 0));
  const FormCertificate c = validate(p.form_pair(), Tolerances{1e-8, 1e-12, 1e-9});
  EXPECT_TRUE(c.ok());
  EXPECT_NEAR(c.margin, 0.0, 1e-8);
}

TEST(Assembly, FormOrderingHoldsForSamples) {
  const Assembler asmb(model(8, 8, 4.0));
  for (std::uint64_t s = 0; s < 100; ++s) {
    const FormPair fp = asmb.assemble(draw_disorder(8, s)).form_pair();
    const FormCertificate c = validate(fp, Tolerances{1e-8, 1e-12, 1e-9});
    EXPECT_TRUE(c.ok()) << "sample " << s << " margin " << c.margin;
  }
}

TEST(Assembly, BottomEigenvalueMonotoneInDisorder) {
  const Assembler asmb(model(6, 6, 3.0));
  for (std::uint64_t s = 0; s < 50; ++s) {
    DisorderSample lo = draw_disorder(6, s);
    DisorderSample hi = lo;
    Rng rng(mix_seed(s, 99));
    for (double& w : hi.omegas) w += rng.uniform();
    EXPECT_LE(asmb.assemble(lo).dirichlet_op.lower_bound(), asmb.assemble(hi).dirichlet_op.lower_bound() + 1e-10);
  }
}

TEST(Assembly, InvalidModels) {
  EXPECT_THROW(model(0, 8, 1).validate(), ConfigError);
  EXPECT_THROW(model(2, 1, 1).validate(), ConfigError);
  EXPECT_THROW(model(2, 4, -1).validate(), ConfigError);
  LatticeModel big = model(2, 4, 1);
  big.min_eigen_count = 100;
  EXPECT_THROW(big.validate(), ConfigError);
  EXPECT_THROW(assemble(model(3, 4, 1), draw_disorder(2, 0)), DimensionError);
}

TEST(Counting, ExamplesAndMonotonicity) {
  const AssembledPair free4 = assemble(model(4, 8, 1.0), DisorderSample{std::vector<double>(4, 0.0), 0});
  const std::vector<double> want = p1_dirichlet_eigenvalues(32, 1.0 / 8);
  const int oracle = static_cast<int>(std::count_if(want.begin(), want.end(), [](double x) { return x <= 15.0; }));
  EXPECT_EQ(eigenvalue_count(free4, {0.0, 15.0}), oracle);
  EXPECT_EQ(eigenvalue_count(free4, {-5.0, -1.0}), 0);
  EXPECT_EQ(eigenvalue_count(free4, {0.0, 1e9}), 31);

  const AssembledPair p = assemble(model(8, 8, 4.0), draw_disorder(8, 5));
  for (double w : {0.1, 0.5, 1.0, 2.0})
    EXPECT_LE(eigenvalue_count(p, {3.0 - w / 2, 3.0 + w / 2}), eigenvalue_count(p, {3.0 - w, 3.0 + w}));
}

TEST(Chain, PassesOnSamples) {
  const Assembler asmb(model(8, 8, 1.0));
  for (std::uint64_t s = 0; s < 30; ++s) {
    for (const InequalityResult& r : chain_check(asmb.assemble(draw_disorder(8, s)), {0.0, 5.0, 0.1}))
      EXPECT_TRUE(r.pass) << r.suite << " sample " << s << " slack " << r.slack;
  }
}

TEST(Chain, EmptyIntervalAndDegenerateBox) {
  const AssembledPair p = assemble(model(4, 4, 1.0), draw_disorder(4, 0));
  for (const InequalityResult& r : chain_check(p, {-10.0, -9.0, 0.1})) {
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_EQ(r.rhs, 0.0);
  }
  const AssembledPair one = assemble(model(1, 8, 0.0), draw_disorder(1, 0));
  const auto rs = chain_check(one, {0.0, 50.0, 0.1});
  EXPECT_LE(std::abs(rs[1].slack), 1e-10 * std::max(1.0, rs[1].rhs));
  EXPECT_LE(std::abs(rs[2].slack), 1e-10 * std::max(1.0, rs[2].rhs));
  EXPECT_THROW(chain_check(p, {2.0, 1.0}), ConfigError);
}

TEST(Wilson, KnownValues) {
  const auto [lo, hi] = wilson_interval(5, 10);
  EXPECT_NEAR(lo, 0.2365930905, 1e-9);
  EXPECT_NEAR(hi, 0.7634069095, 1e-9);
  const auto [z0, z1] = wilson_interval(0, 20);
  const double z2 = 1.959963984540054 * 1.959963984540054;
  EXPECT_EQ(z0, 0.0);
  EXPECT_NEAR(z1, z2 / (20.0 + z2), 1e-12);
}

TEST(Fit, ExactLineAndFiltering) {
  std::vector<WegnerRow> grid;
  for (double w : {0.01, 0.02, 0.03}) {
    WegnerRow r;
    r.width = w;
    r.L = 10;
    r.p_hat = 0.05 + 1.5 * w * 10;
    grid.push_back(r);
  }
  WegnerRow saturated;
  saturated.width = 0.1;
  saturated.L = 10;
  saturated.p_hat = 0.9;
  grid.push_back(saturated);
  WegnerRow dead = saturated;
  dead.p_hat = 0.0;
  dead.uninformative = true;
  grid.push_back(dead);
  const LinearFit f = fit_wegner(grid);
  EXPECT_EQ(f.points, 3);
  EXPECT_NEAR(f.slope, 1.5, 1e-12);
  EXPECT_NEAR(f.intercept, 0.05, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_FALSE(fit_wegner({}).valid());
}

TEST(WegnerMc, NoDisorderGivesDeterministicHits) {
  const std::vector<EnergyInterval> iv{{0.0, 0.5, 0.1}, {0.0, 1.0, 0.1}};
  const WegnerReport r = wegner_mc(model(4, 6, 0.0), iv, 5, 1);
  for (const WegnerRow& row : r.grid) EXPECT_TRUE(row.p_hat == 0.0 || row.p_hat == 1.0);
  EXPECT_EQ(r.chain_failures, 0);
  EXPECT_EQ(r.chain_checks, 30);
}

TEST(WegnerMc, ReproducibleAndScheduleIndependent) {
  const std::vector<EnergyInterval> iv{{2.9, 3.1, 0.1}, {2.8, 3.2, 0.1}};
  const WegnerReport a = wegner_mc(model(8, 6, 4.0), iv, 20, 7, 1);
  const WegnerReport b = wegner_mc(model(8, 6, 4.0), iv, 20, 7, 3);
  ASSERT_EQ(a.grid.size(), b.grid.size());
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    EXPECT_EQ(a.grid[i].hits, b.grid[i].hits);
    EXPECT_EQ(a.grid[i].mean_count, b.grid[i].mean_count);
  }
  EXPECT_LE(a.grid[0].hits, a.grid[1].hits);
  EXPECT_THROW(wegner_mc(model(8, 6, 4.0), iv, 0, 7), ConfigError);
}

TEST(WegnerMc, MergeConcatenatesAndRefits) {
  const std::vector<EnergyInterval> iv{{2.9, 3.1, 0.1}};
  const WegnerReport a = wegner_mc(model(4, 6, 4.0), iv, 10, 1);
  const WegnerReport b = wegner_mc(model(6, 6, 4.0), iv, 10, 1);
  const WegnerReport m = merge_reports({a, b});
  EXPECT_EQ(m.grid.size(), 2u);
  EXPECT_EQ(m.chain_checks, a.chain_checks + b.chain_checks);
  EXPECT_EQ(m.grid[1].L, 6);
}
