#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "tracemono/operator_core.hpp"

using namespace tracemono;

namespace {

Matrix random_symmetric(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.normal();
  return m;
}

// exp(M) by scaling and squaring with a 20-term Taylor series.
Matrix taylor_exp(const Matrix& m) {
  int squarings = 0;
  double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  const Matrix x = m / std::ldexp(1.0, squarings);
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  Matrix sum = term;
  for (int k = 1; k <= 20; ++k) {
    term = term * x / k;
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

}  // namespace

TEST(SymmetricOperator, TwoByTwoMatchesCharacteristicPolynomial) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Matrix m = random_symmetric(2, seed);
    const double tr = m.trace(), det = m.determinant();
    const double disc = std::sqrt(tr * tr / 4.0 - det);
    const SymmetricOperator op(m);
    EXPECT_NEAR(op.eigenvalues()(0), tr / 2.0 - disc, 1e-12);
    EXPECT_NEAR(op.eigenvalues()(1), tr / 2.0 + disc, 1e-12);
  }
}

TEST(SymmetricOperator, DecompositionReconstructsAndIsOrthonormal) {
  for (Index n : {1, 3, 8, 20}) {
    const SymmetricOperator op(random_symmetric(n, 100 + n));
    const Matrix& q = op.eigenvectors();
    EXPECT_LE((q.transpose() * q - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
    const Matrix back = q * op.eigenvalues().asDiagonal() * q.transpose();
    EXPECT_LE((back - op.matrix()).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, op.max_abs()));
    for (Index i = 1; i < n; ++i) EXPECT_LE(op.eigenvalues()(i - 1), op.eigenvalues()(i));
  }
}

TEST(SymmetricOperator, EigenvectorSignsAreCanonical) {
  const SymmetricOperator a(random_symmetric(5, 7));
  const SymmetricOperator b(random_symmetric(5, 7));
  EXPECT_EQ(a.eigenvectors(), b.eigenvectors());
}

TEST(SymmetricOperator, RejectsBadInput) {
  EXPECT_THROW(SymmetricOperator(Matrix::Zero(2, 3)), DimensionError);
  Matrix nan = Matrix::Identity(2, 2);
  nan(0, 1) = std::nan("");
  EXPECT_THROW(SymmetricOperator{nan}, DomainError);
  EXPECT_THROW(SymmetricOperator::identity(2) + SymmetricOperator::identity(3), DimensionError);
}

TEST(SymmetricOperator, EmptyOperator) {
  const SymmetricOperator op(Matrix(0, 0));
  EXPECT_EQ(op.dim(), 0);
  EXPECT_TRUE(psd_check(op).pass);
}

TEST(SymmetricOperator, FromSpectrumSortsValues) {
  Vector v(3);
  v << 3.0, -1.0, 2.0;
  const SymmetricOperator op = SymmetricOperator::from_spectrum(v, Matrix::Identity(3, 3));
  EXPECT_EQ(op.eigenvalues()(0), -1.0);
  EXPECT_EQ(op.eigenvalues()(2), 3.0);
  EXPECT_DOUBLE_EQ(op.matrix()(1, 1), -1.0);
}

TEST(ApplyFunction, ExponentialMatchesTaylorOracle) {
  for (Index n : {2, 4, 7}) {
    const SymmetricOperator op(random_symmetric(n, 40 + n));
    const Matrix got = apply_function(op, [](double x) { return std::exp(x); }).matrix();
    const Matrix want = taylor_exp(op.matrix());
    EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-11 * want.cwiseAbs().maxCoeff());
  }
}

TEST(ApplyFunction, PolynomialMatchesMatrixProduct) {
  const SymmetricOperator op(random_symmetric(6, 3));
  const Matrix got = apply_function(op, [](double x) { return x * x - 2.0 * x + 1.0; }).matrix();
  const Matrix& m = op.matrix();
  const Matrix want = m * m - 2.0 * m + Matrix::Identity(6, 6);
  EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(ApplyFunction, DomainErrorNamesEigenvalue) {
  Vector d(2);
  d << -1.5, 2.0;
  try {
    apply_function(SymmetricOperator::diagonal(d), [](double x) { return std::log(x); });
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("-1.5"), std::string::npos) << e.what();
  }
}

TEST(PsdCheck, ReportsWitness) {
  Vector d(3);
  d << 1.0, -0.25, 2.0;
  const PsdResult r = psd_check(SymmetricOperator::diagonal(d));
  EXPECT_FALSE(r.pass);
  EXPECT_DOUBLE_EQ(r.margin, -0.25);
  EXPECT_NEAR(std::abs(r.witness(1)), 1.0, 1e-15);
  EXPECT_TRUE(psd_check(SymmetricOperator::identity(3)).pass);
  EXPECT_THROW(psd_check(SymmetricOperator::identity(2), -1.0), ConfigError);
}

TEST(PsdCheck, GramMatricesArePsd) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Matrix x = random_symmetric(5, seed);
    EXPECT_TRUE(psd_check(SymmetricOperator(x.transpose() * x)).pass);
  }
}

TEST(SpectralProjector, IdempotentWithTraceEqualToRank) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SymmetricOperator op(random_symmetric(7, seed));
    const SpectralProjector p = spectral_projector(op, -0.5, 1.0);
    EXPECT_LE((p.matrix * p.matrix - p.matrix).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(p.matrix.trace(), static_cast<double>(p.rank()), 1e-12);
    for (Index j = 0; j < p.rank(); ++j) {
      EXPECT_GE(p.eigenvalues_selected(j), -0.5);
      EXPECT_LE(p.eigenvalues_selected(j), 1.0);
    }
  }
}

TEST(SpectralProjector, ClosedIntervalAndClusterSplit) {
  Vector d(4);
  d << 0.0, 1.0, 1.0 + 1e-12, 3.0;
  const SymmetricOperator op = SymmetricOperator::diagonal(d);
  const SpectralProjector closed = spectral_projector(op, 0.0, 3.0);
  EXPECT_EQ(closed.rank(), 4);
  const SpectralProjector split = spectral_projector(op, 0.5, 1.0);
  EXPECT_EQ(split.rank(), 1);
  EXPECT_TRUE(split.boundary_split);
  EXPECT_EQ(spectral_projector(op, 5.0, 6.0).rank(), 0);
  EXPECT_THROW(spectral_projector(op, 2.0, 1.0), ConfigError);
  EXPECT_THROW(projector_from_indices(op, {7}), DimensionError);
}

TEST(WeightedTrace, MatchesDirectTrace) {
  const SymmetricOperator op(random_symmetric(6, 11));
  const SymmetricOperator m(random_symmetric(6, 12));
  const SpectralProjector p = spectral_projector(op, -10.0, 0.0);
  EXPECT_NEAR(weighted_trace(p, m), (p.matrix * m.matrix()).trace(), 1e-12);
  EXPECT_THROW(weighted_trace(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), DimensionError);
}
