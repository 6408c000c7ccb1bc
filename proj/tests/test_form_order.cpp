#include <gtest/gtest.h>

#include "tracemono/form_order.hpp"

using namespace tracemono;

TEST(FormPair, GeneratedPairsAreValid) {
  for (int seed = 0; seed < 200; ++seed) {
    const int n = 1 + seed % 8;
    const int k = 1 + seed % n;
    const FormPair pair = random_ordered_pair(n, k, 5.0, static_cast<std::uint64_t>(seed));
    const FormCertificate c = validate(pair);
    EXPECT_TRUE(c.ok()) << "seed " << seed;
    EXPECT_EQ(pair.mode, k == n ? PairMode::full : PairMode::subspace);
  }
}

TEST(FormPair, GeneratorIsDeterministic) {
  const FormPair a = random_ordered_pair(6, 4, 2.0, 99);
  const FormPair b = random_ordered_pair(6, 4, 2.0, 99);
  EXPECT_EQ(a.A.matrix(), b.A.matrix());
  EXPECT_EQ(a.B_sub.matrix(), b.B_sub.matrix());
  EXPECT_EQ(a.basis, b.basis);
}

TEST(FormPair, ValidateDetectsReversedOrdering) {
  const FormPair pair = random_ordered_pair(5, 5, 3.0, 4);
  const FormPair reversed = FormPair::full(pair.B_sub, pair.A);
  const FormCertificate c = validate(reversed);
  EXPECT_TRUE(c.domain_ok);
  EXPECT_FALSE(c.ordering_ok);
  EXPECT_LT(c.margin, 0.0);
}

TEST(FormPair, ValidateDetectsNonOrthonormalBasis) {
  FormPair pair = random_ordered_pair(5, 3, 3.0, 4);
  pair.basis.col(0) *= 2.0;
  EXPECT_FALSE(validate(pair).domain_ok);
}

TEST(FormPair, DimensionMismatches) {
  EXPECT_THROW(FormPair::full(SymmetricOperator::identity(2), SymmetricOperator::identity(3)), DimensionError);
  EXPECT_THROW(FormPair::subspace(SymmetricOperator::identity(3), Matrix::Identity(3, 2),
                                  SymmetricOperator::identity(1)),
               DimensionError);
  EXPECT_THROW(random_ordered_pair(3, 4, 1.0, 0), ConfigError);
}

TEST(Kato, HoldsOnGeneratedPairs) {
  for (int seed = 0; seed < 300; ++seed) {
    const int n = 2 + seed % 7;
    const FormPair pair = random_ordered_pair(n, 1 + seed % n, 4.0, static_cast<std::uint64_t>(seed));
    for (double a : {0.1, 1.0, 10.0}) EXPECT_TRUE(kato_check(pair, a).pass) << "seed " << seed;
  }
}

TEST(Kato, FailsWhenOrderingReversed) {
  const FormPair pair = random_ordered_pair(4, 4, 3.0, 1);
  EXPECT_FALSE(kato_check(FormPair::full(pair.B_sub, pair.A), 1.0).pass);
}

TEST(Kato, SingularShiftIsDomainError) {
  const FormPair pair = random_ordered_pair(3, 3, 1.0, 2);
  EXPECT_THROW(kato_check(pair, -pair.A.lower_bound()), DomainError);
  EXPECT_THROW(variational_value(pair, Side::A, Vector::Ones(3), -1e6), DomainError);
}

TEST(ExtendedResolvent, VanishesOffTheSubspace) {
  const FormPair pair = random_ordered_pair(6, 3, 2.0, 5);
  const Matrix ext = extended_resolvent(pair, 1.0).matrix();
  const Matrix complement = Matrix::Identity(6, 6) - pair.basis * pair.basis.transpose();
  EXPECT_LE((ext * complement).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(VariationalValue, MatchesResolventQuadraticForm) {
  Rng rng(17);
  for (int seed = 0; seed < 50; ++seed) {
    const FormPair pair = random_ordered_pair(5, 1 + seed % 5, 3.0, static_cast<std::uint64_t>(seed));
    Vector psi(5);
    for (Index i = 0; i < 5; ++i) psi(i) = rng.normal();
    const double a = 0.7;
    const double va = variational_value(pair, Side::A, psi, a);
    const double vb = variational_value(pair, Side::B, psi, a);
    EXPECT_NEAR(va, psi.dot(resolvent(pair.A, a).matrix() * psi), 1e-10 * std::max(1.0, va));
    EXPECT_NEAR(vb, psi.dot(extended_resolvent(pair, a).matrix() * psi), 1e-10 * std::max(1.0, vb));
    EXPECT_LE(vb, va + 1e-10 * std::max(1.0, va));
  }
}

TEST(AffineMap, PreservesOrdering) {
  for (int seed = 0; seed < 50; ++seed) {
    const FormPair pair = random_ordered_pair(5, 3, 2.0, static_cast<std::uint64_t>(seed));
    const FormPair mapped = affine_map(pair, 2.5, -1.0);
    EXPECT_TRUE(validate(mapped).ok());
    EXPECT_NEAR(mapped.A.lower_bound(), 2.5 * pair.A.lower_bound() - 1.0, 1e-12);
  }
  EXPECT_THROW(affine_map(random_ordered_pair(2, 2, 1.0, 0), 0.0, 1.0), ConfigError);
}

TEST(CheckConfig, RejectsInvalidParameters) {
  const FormPair pair = random_ordered_pair(3, 3, 1.0, 0);
  CheckConfig cfg;
  cfg.a = -5.0;
  EXPECT_THROW(cfg.check_against(pair), ConfigError);
  cfg = {};
  cfg.t = 0.0;
  EXPECT_THROW(cfg.check_against(pair), ConfigError);
  cfg = {};
  cfg.n_max = 0;
  EXPECT_THROW(cfg.check_against(pair), ConfigError);
}
