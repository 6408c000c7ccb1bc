#pragma once

// Form-ordered operator pairs: A on the ambient space, B on a subspace
// (the form domain of B) with q_A ≤ q_B there.

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

#include "tracemono/common.hpp"
#include "tracemono/operator_core.hpp"

namespace tracemono {

enum class PairMode { full, subspace };

struct FormPair {
  SymmetricOperator A;      // n×n
  PairMode mode = PairMode::full;
  Matrix basis;             // n×k, orthonormal columns; identity in full mode
  SymmetricOperator B_sub;  // k×k, B in the subspace basis

  static FormPair full(SymmetricOperator a, SymmetricOperator b) {
    if (a.dim() != b.dim()) throw DimensionError("FormPair::full: A and B differ in dimension");
    const Index n = a.dim();
    return FormPair{std::move(a), PairMode::full, Matrix::Identity(n, n), std::move(b)};
  }

  static FormPair subspace(SymmetricOperator a, Matrix basis, SymmetricOperator b_sub) {
    if (basis.rows() != a.dim() || basis.cols() != b_sub.dim())
      throw DimensionError("FormPair::subspace: basis must be dim(A) x dim(B_sub)");
    return FormPair{std::move(a), PairMode::subspace, std::move(basis), std::move(b_sub)};
  }

  Index ambient_dim() const { return A.dim(); }
  Index subspace_dim() const { return B_sub.dim(); }
  double shift_floor() const { return -A.lower_bound(); }

  /// VᵀAV, the form of A restricted to the subspace.
  SymmetricOperator compressed_A() const {
    return SymmetricOperator(basis.transpose() * A.matrix() * basis);
  }

  /// Embeds a k×k matrix as V·M·Vᵀ (zero off the subspace).
  Matrix extend(const Matrix& m) const { return basis * m * basis.transpose(); }

  /// Orthonormal ambient-space columns V·X for subspace columns X.
  Matrix extend_columns(const Matrix& x) const { return basis * x; }
};

/// Parameters of the resolvent-power and heat-trace checks. `m` is the
/// trace-class order, always 0 in finite dimension.
struct CheckConfig {
  double a = 1.0;
  double t = 1.0;
  double b = 0.0;
  int n_max = 6;
  int m = 0;
  double tol_cmp = 1e-9;
  int log_domain_from = 7;  // powers 2^n with n >= this are compared on logarithms

  void check_against(const FormPair& pair) const {
    if (!(a + pair.A.lower_bound() > 0.0)) throw ConfigError("CheckConfig: need a > -inf spec(A)");
    if (!(t > 0.0)) throw ConfigError("CheckConfig: need t > 0");
    if (n_max < 1) throw ConfigError("CheckConfig: need n_max >= 1");
    if (!(tol_cmp > 0.0)) throw ConfigError("CheckConfig: need tol_cmp > 0");
  }
};

struct FormCertificate {
  bool domain_ok = false;
  bool ordering_ok = false;
  double margin = 0.0;  // min eigenvalue of B_sub - VᵀAV
  bool ok() const { return domain_ok && ordering_ok; }
};

inline FormCertificate validate(const FormPair& pair, const Tolerances& tol = {}) {
  if (pair.basis.rows() != pair.A.dim() || pair.basis.cols() != pair.B_sub.dim())
    throw DimensionError("validate: basis, A and B_sub dimensions disagree");
  FormCertificate c;
  const Index k = pair.basis.cols();
  const Matrix gram = pair.basis.transpose() * pair.basis;
  c.domain_ok = k == 0 || (gram - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() <= tol.orth * 10.0;
  const PsdResult order = psd_check(pair.B_sub - pair.compressed_A(), tol.eig);
  c.ordering_ok = order.pass;
  c.margin = order.margin;
  return c;
}

namespace detail {

inline void require_regular_shift(const FormPair& pair, double a) {
  if (!(a + pair.A.lower_bound() > 0.0) || !(a + pair.B_sub.lower_bound() > 0.0)) {
    throw DomainError("singular shift: a = " + std::to_string(a) +
                      " does not exceed -inf spec(A) and -inf spec(B)");
  }
}

}  // namespace detail

inline SymmetricOperator resolvent(const SymmetricOperator& op, double a) {
  if (!(a + op.lower_bound() > 0.0)) throw DomainError("resolvent: shift inside the spectrum");
  return apply_function(op, [a](double x) { return 1.0 / (x + a); });
}

/// V·(B_sub + a)^{-1}·Vᵀ: B's resolvent extended by zero off its form domain.
inline SymmetricOperator extended_resolvent(const FormPair& pair, double a) {
  detail::require_regular_shift(pair, a);
  return SymmetricOperator(pair.extend(resolvent(pair.B_sub, a).matrix()));
}

/// PSD test of (A+a)^{-1} − (B+a)^{-1}.
inline PsdResult kato_check(const FormPair& pair, double a, double tol = Tolerances{}.eig) {
  const SymmetricOperator ext = extended_resolvent(pair, a);
  return psd_check(resolvent(pair.A, a) - ext, tol);
}

enum class Side { A, B };

/// sup over the form domain of 2⟨ψ,φ⟩ − q(φ) − a‖φ‖², solved by a Cholesky
/// solve of the stationarity equation. Equals ψᵀ(A+a)^{-1}ψ for side A and
/// ψᵀ·extended_resolvent·ψ for side B without touching an eigensolver.
inline double variational_value(const FormPair& pair, Side side, const Vector& psi, double a) {
  if (psi.size() != pair.ambient_dim()) throw DimensionError("variational_value: psi has wrong length");
  detail::require_regular_shift(pair, a);
  const bool on_a = side == Side::A;
  const Matrix& op = on_a ? pair.A.matrix() : pair.B_sub.matrix();
  const Vector rhs = on_a ? psi : Vector(pair.basis.transpose() * psi);
  const Matrix shifted = op + a * Matrix::Identity(op.rows(), op.cols());
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) throw DomainError("variational_value: shifted form not positive");
  const Vector phi = llt.solve(rhs);
  return 2.0 * rhs.dot(phi) - phi.dot(shifted * phi);
}

namespace detail {

// Haar-distributed orthogonal matrix from the QR factorisation of a
// Gaussian matrix with R's diagonal signs folded into Q.
inline Matrix random_orthogonal(Index n, Rng& rng) {
  Matrix g(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

}  // namespace detail

/// (c·A + d, c·B + d) for c > 0; preserves the form ordering.
inline FormPair affine_map(const FormPair& pair, double c, double d) {
  if (!(c > 0.0)) throw ConfigError("affine_map: scale must be positive");
  auto map = [c, d](const SymmetricOperator& op) {
    return SymmetricOperator::from_spectrum(c * op.eigenvalues().array() + d, op.eigenvectors());
  };
  FormPair out = pair;
  out.A = map(pair.A);
  out.B_sub = map(pair.B_sub);
  return out;
}

/// Deterministic generator of valid pairs. A has spectrum in [0, spread];
/// B_sub = VᵀAV + WᵀW with W Gaussian of scale `perturbation`·sqrt(spread/k).
/// k == n yields a full-mode pair. perturbation == 0 gives B = A.
inline FormPair random_ordered_pair(int n, int k, double spread, std::uint64_t seed,
                                    double perturbation = 1.0) {
  if (n < 1 || k < 1 || k > n) throw ConfigError("random_ordered_pair: need 1 <= k <= n");
  if (!(spread > 0.0) || perturbation < 0.0) throw ConfigError("random_ordered_pair: need spread > 0");
  Rng rng(seed);
  Vector spectrum(n);
  for (Index i = 0; i < n; ++i) spectrum(i) = rng.uniform(0.0, spread);
  const Matrix q = detail::random_orthogonal(n, rng);
  const SymmetricOperator a(q * spectrum.asDiagonal() * q.transpose());

  Matrix basis = Matrix::Identity(n, n);
  if (k < n) basis = detail::random_orthogonal(n, rng).leftCols(k);

  Matrix w(k, k);
  const double scale = perturbation * std::sqrt(spread / k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i) w(i, j) = scale * rng.normal();

  Matrix compressed = basis.transpose() * a.matrix() * basis;
  compressed = 0.5 * (compressed + compressed.transpose());
  SymmetricOperator b_sub(compressed + w.transpose() * w);
  FormPair pair = k == n ? FormPair::full(a, std::move(b_sub))
                         : FormPair::subspace(a, std::move(basis), std::move(b_sub));
  if (!validate(pair).ok()) throw std::logic_error("random_ordered_pair: generated an invalid pair");
  return pair;
}

}  // namespace tracemono
