#pragma once

// Dense real symmetric operators: spectral decomposition, functional
// calculus, PSD certification, spectral projectors and weighted traces.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tracemono/common.hpp"

namespace tracemono {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Eigenvalues ascending, eigenvectors as orthonormal columns.
struct SpectralDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;
};

namespace detail {

// Fix the sign of each column so its first entry above `floor` in magnitude
// is positive.
inline void canonical_signs(Matrix& q) {
  for (Index j = 0; j < q.cols(); ++j) {
    const double floor = 1e-12 * q.col(j).cwiseAbs().maxCoeff();
    for (Index i = 0; i < q.rows(); ++i) {
      if (std::abs(q(i, j)) > floor) {
        if (q(i, j) < 0.0) q.col(j) *= -1.0;
        break;
      }
    }
  }
}

inline SpectralDecomposition decompose(const Matrix& m) {
  if (m.size() == 0) return {Vector(0), Matrix(0, 0)};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) throw DomainError("sym_eig: eigensolver did not converge");
  SpectralDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
  canonical_signs(out.eigenvectors);
  return out;
}

}  // namespace detail

/// Dense symmetric matrix with its spectral decomposition computed at
/// construction. Immutable; copies share the decomposition.
class SymmetricOperator {
 public:
  SymmetricOperator() : SymmetricOperator(Matrix::Zero(0, 0)) {}

  /// Symmetrizes `m` as (m + mᵀ)/2. Rejects non-square or non-finite input.
  explicit SymmetricOperator(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("SymmetricOperator: matrix is not square");
    if (!m.allFinite()) throw DomainError("SymmetricOperator: non-finite entries");
    matrix_ = 0.5 * (m + m.transpose());
    spectrum_ = std::make_shared<const SpectralDecomposition>(detail::decompose(matrix_));
  }

  static SymmetricOperator identity(Index n) { return SymmetricOperator(Matrix::Identity(n, n)); }
  static SymmetricOperator zero(Index n) { return SymmetricOperator(Matrix::Zero(n, n)); }
  static SymmetricOperator diagonal(const Vector& d) { return SymmetricOperator(Matrix(d.asDiagonal())); }

  /// Builds Q·diag(values)·Qᵀ reusing the known eigenbasis instead of
  /// re-decomposing. `q` must have orthonormal columns.
  static SymmetricOperator from_spectrum(const Vector& values, const Matrix& q) {
    if (!values.allFinite()) throw DomainError("SymmetricOperator: non-finite eigenvalues");
    std::vector<Index> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values(a) < values(b); });
    SpectralDecomposition dec{Vector(values.size()), Matrix(q.rows(), q.cols())};
    for (std::size_t i = 0; i < order.size(); ++i) {
      dec.eigenvalues(static_cast<Index>(i)) = values(order[i]);
      dec.eigenvectors.col(static_cast<Index>(i)) = q.col(order[i]);
    }
    SymmetricOperator out;
    Matrix m = q * values.asDiagonal() * q.transpose();
    out.matrix_ = 0.5 * (m + m.transpose());
    out.spectrum_ = std::make_shared<const SpectralDecomposition>(std::move(dec));
    return out;
  }

  Index dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }
  const SpectralDecomposition& spectrum() const { return *spectrum_; }
  const Vector& eigenvalues() const { return spectrum_->eigenvalues; }
  const Matrix& eigenvectors() const { return spectrum_->eigenvectors; }

  /// inf σ of the operator; +inf for the empty operator.
  double lower_bound() const { return dim() == 0 ? kInf : eigenvalues()(0); }
  double upper_bound() const { return dim() == 0 ? -kInf : eigenvalues()(dim() - 1); }
  double max_abs() const { return dim() == 0 ? 0.0 : matrix_.cwiseAbs().maxCoeff(); }

  SymmetricOperator shifted(double a) const {
    return from_spectrum(eigenvalues().array() + a, eigenvectors());
  }

  friend SymmetricOperator operator+(const SymmetricOperator& x, const SymmetricOperator& y) {
    check_same_dim(x, y);
    return SymmetricOperator(x.matrix_ + y.matrix_);
  }
  friend SymmetricOperator operator-(const SymmetricOperator& x, const SymmetricOperator& y) {
    check_same_dim(x, y);
    return SymmetricOperator(x.matrix_ - y.matrix_);
  }

 private:
  static void check_same_dim(const SymmetricOperator& x, const SymmetricOperator& y) {
    if (x.dim() != y.dim()) throw DimensionError("SymmetricOperator: dimension mismatch");
  }

  Matrix matrix_;
  std::shared_ptr<const SpectralDecomposition> spectrum_;
};

inline const SpectralDecomposition& sym_eig(const SymmetricOperator& op) { return op.spectrum(); }

/// f(op) = Q·diag(f(λᵢ))·Qᵀ. Throws DomainError naming the first eigenvalue
/// at which f is not finite.
template <class F>
SymmetricOperator apply_function(const SymmetricOperator& op, F&& f) {
  const Vector& lambda = op.eigenvalues();
  Vector values(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) {
    double v = 0.0;
    try {
      v = f(lambda(i));
    } catch (const DomainError& e) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "apply_function: function undefined at eigenvalue " << lambda(i) << " (" << e.what() << ")";
      throw DomainError(msg.str());
    }
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "apply_function: function not finite at eigenvalue " << lambda(i);
      throw DomainError(msg.str());
    }
    values(i) = v;
  }
  return SymmetricOperator::from_spectrum(values, op.eigenvectors());
}

struct PsdResult {
  bool pass = true;
  double margin = 0.0;     // smallest eigenvalue
  double threshold = 0.0;  // -tol·max(1, ‖op‖_max)
  Vector witness;          // unit eigenvector of the smallest eigenvalue (on failure)
  double value = 0.0;      // witnessᵀ·op·witness
};

/// Passes iff λ_min ≥ -tol·max(1, ‖op‖_max). On failure the witness is the
/// eigenvector of λ_min and `value` its Rayleigh quotient.
inline PsdResult psd_check(const SymmetricOperator& op, double tol = Tolerances{}.eig) {
  if (tol < 0.0) throw ConfigError("psd_check: tol must be nonnegative");
  PsdResult r;
  if (op.dim() == 0) return r;
  r.margin = op.lower_bound();
  r.threshold = -tol * std::max(1.0, op.max_abs());
  r.pass = r.margin >= r.threshold;
  if (!r.pass) {
    r.witness = op.eigenvectors().col(0);
    r.value = r.witness.dot(op.matrix() * r.witness);
  }
  return r;
}

/// Orthogonal projector onto a set of eigenvectors of some operator.
struct SpectralProjector {
  Index source_dim = 0;
  std::vector<Index> selected_indices;
  Vector eigenvalues_selected;
  Matrix vectors;  // selected eigenvectors as columns
  Matrix matrix;   // vectors·vectorsᵀ
  bool boundary_split = false;

  Index rank() const { return static_cast<Index>(selected_indices.size()); }
};

/// Projector onto the eigenvectors with given indices.
inline SpectralProjector projector_from_indices(const SymmetricOperator& op, std::vector<Index> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  SpectralProjector p;
  p.source_dim = op.dim();
  p.vectors.resize(op.dim(), static_cast<Index>(indices.size()));
  p.eigenvalues_selected.resize(static_cast<Index>(indices.size()));
  for (std::size_t c = 0; c < indices.size(); ++c) {
    const Index i = indices[c];
    if (i < 0 || i >= op.dim()) throw DimensionError("spectral projector: eigen index out of range");
    p.vectors.col(static_cast<Index>(c)) = op.eigenvectors().col(i);
    p.eigenvalues_selected(static_cast<Index>(c)) = op.eigenvalues()(i);
  }
  p.matrix = p.vectors * p.vectors.transpose();
  p.selected_indices = std::move(indices);
  return p;
}

/// Projector onto eigenvalues in the closed interval [lo, hi]. Sets
/// `boundary_split` when an excluded eigenvalue lies within 1e-10 of an
/// included one.
inline SpectralProjector spectral_projector(const SymmetricOperator& op, double lo, double hi) {
  if (!(lo <= hi)) throw ConfigError("spectral_projector: requires lo <= hi");
  const Vector& lambda = op.eigenvalues();
  std::vector<Index> idx;
  for (Index i = 0; i < lambda.size(); ++i)
    if (lambda(i) >= lo && lambda(i) <= hi) idx.push_back(i);
  SpectralProjector p = projector_from_indices(op, idx);
  if (!idx.empty()) {
    constexpr double kClusterGap = 1e-10;
    const Index first = idx.front();
    const Index last = idx.back();
    if (first > 0 && lambda(first) - lambda(first - 1) < kClusterGap) p.boundary_split = true;
    if (last + 1 < lambda.size() && lambda(last + 1) - lambda(last) < kClusterGap) p.boundary_split = true;
  }
  return p;
}

/// Σᵢⱼ P[i][j]·M[j][i].
inline double weighted_trace(const Matrix& p, const Matrix& m) {
  if (p.rows() != m.cols() || p.cols() != m.rows())
    throw DimensionError("weighted_trace: dimension mismatch");
  return p.cwiseProduct(m.transpose()).sum();
}

inline double weighted_trace(const SpectralProjector& p, const SymmetricOperator& m) {
  if (p.source_dim != m.dim()) throw DimensionError("weighted_trace: dimension mismatch");
  return weighted_trace(p.matrix, m.matrix());
}

/// Diagonal weights cᵢ = qᵢᵀ·P·qᵢ of a projector in the eigenbasis of `op`,
/// so Tr(P·f(op)) = Σ cᵢ f(λᵢ). `basis` holds orthonormal columns spanning
/// the range of P (P = basis·basisᵀ).
inline Vector projector_weights(const Matrix& basis, const SymmetricOperator& op) {
  if (basis.rows() != op.dim()) throw DimensionError("projector_weights: dimension mismatch");
  const Matrix overlap = op.eigenvectors().transpose() * basis;
  return overlap.rowwise().squaredNorm();
}

}  // namespace tracemono
