#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace isac {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kHermitianTolerance = 1e-12;

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a factorization needs a PSD input and the smallest
/// eigenvalue falls below the admitted negative tolerance.
class NotPsdError : public LinalgError {
 public:
  explicit NotPsdError(double min_eigenvalue);
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class EigenConvergenceError : public LinalgError {
 public:
  EigenConvergenceError(int sweeps, double residual);
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Dense complex Hermitian matrix. Construction from arbitrary entries
/// checks hermiticity; the stored entries are exactly Hermitian.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMatrix& entries,
                           double tolerance = kHermitianTolerance);

  /// Hermitian part (A + A^H)/2 of a computed product, without a check.
  static HermitianMatrix hermitian_part(const CMatrix& entries);
  static HermitianMatrix identity(Eigen::Index dim);
  static HermitianMatrix zero(Eigen::Index dim);
  static HermitianMatrix diagonal(const RVector& values);
  static HermitianMatrix outer(const CVector& v);

  Eigen::Index dim() const { return a_.rows(); }
  const CMatrix& matrix() const { return a_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return a_(i, j); }

  double trace() const { return a_.diagonal().real().sum(); }
  double frobenius_norm() const { return a_.norm(); }
  /// v^H A v, real by construction.
  double quadratic_form(const CVector& v) const;
  /// Re trace(A B) for Hermitian A, B.
  double trace_product(const HermitianMatrix& other) const;

  HermitianMatrix& operator+=(const HermitianMatrix& other);
  HermitianMatrix& operator-=(const HermitianMatrix& other);
  HermitianMatrix& operator*=(double s);

  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) {
    return a += b;
  }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) {
    return a -= b;
  }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }

 private:
  struct Unchecked {};
  HermitianMatrix(CMatrix entries, Unchecked) : a_(std::move(entries)) {}
  void symmetrize();

  CMatrix a_;
};

struct EigenDecomposition {
  RVector values;   // ascending
  CMatrix vectors;  // unitary, columns match values
  int sweeps = 0;
};

struct JacobiOptions {
  int max_sweeps = 100;
  /// Pair (p,q) is rotated while |a_pq| > relative_tol * sqrt(|a_pp a_qq|).
  double relative_tol = 1e-15;
  /// Off-diagonal entries below absolute_tol * ||A||_F are treated as zero.
  double absolute_tol = 1e-17;
};

/// Cyclic Jacobi eigensolver for Hermitian matrices.
EigenDecomposition eig_hermitian(const HermitianMatrix& a,
                                 const JacobiOptions& options = {});

/// Same, started from a unitary basis that nearly diagonalizes `a`
/// (e.g. the eigenvectors of a nearby matrix). Sweeps then run on
/// basis^H A basis, which is already close to diagonal.
EigenDecomposition eig_hermitian(const HermitianMatrix& a, const CMatrix& warm_basis,
                                 const JacobiOptions& options = {});

/// Factor L with L L^H = A. Positive definite input gives the lower
/// triangular Cholesky factor; rank-deficient PSD input gives an
/// eigenvector-based factor with rank(A) columns. Eigenvalues below
/// `tol` count as zero (default 1e-9 * lambda_max); an eigenvalue below
/// -tol raises NotPsdError.
CMatrix cholesky(const HermitianMatrix& a, std::optional<double> tol = std::nullopt);

/// Frobenius-nearest PSD matrix (negative eigenvalues clipped to zero).
HermitianMatrix project_psd(const HermitianMatrix& a);

/// [[Re A, -Im A], [Im A, Re A]].
RMatrix realify(const HermitianMatrix& a);

/// Inverse of realify on the structured subspace; averages the two copies
/// of each block so any real symmetric input maps to a Hermitian matrix.
HermitianMatrix unrealify(const RMatrix& y);

/// Solve A x = b for Hermitian positive definite A.
CVector solve_hpd(const HermitianMatrix& a, const CVector& b);

}  // namespace isac
