#include "isac/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace isac {

namespace {

std::string format_min_eig(double v) {
  std::ostringstream os;
  os << "matrix is not positive semidefinite (min eigenvalue " << v << ")";
  return os.str();
}

std::string format_convergence(int sweeps, double residual) {
  std::ostringstream os;
  os << "Jacobi eigensolver did not converge after " << sweeps
     << " sweeps (off-diagonal norm " << residual << ")";
  return os.str();
}

double off_diagonal_norm(const CMatrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// Runs cyclic Jacobi sweeps on `a` in place, accumulating rotations into `v`.
int jacobi_sweeps(CMatrix& a, CMatrix& v, const JacobiOptions& options) {
  const Eigen::Index n = a.rows();
  const double floor = options.absolute_tol * a.norm();
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double g = std::abs(apq);
        if (g == 0.0 || g <= floor) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        if (g <= options.relative_tol * std::sqrt(std::abs(app * aqq))) continue;
        rotated = true;

        const Complex e = apq / g;
        const double theta = (aqq - app) / (2.0 * g);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const Complex se = s * e;
        const Complex sec = std::conj(se);

        for (Eigen::Index i = 0; i < n; ++i) {
          const Complex aip = a(i, p);
          const Complex aiq = a(i, q);
          a(i, p) = c * aip - sec * aiq;
          a(i, q) = s * aip + c * std::conj(e) * aiq;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
          const Complex apj = a(p, j);
          const Complex aqj = a(q, j);
          a(p, j) = c * apj - se * aqj;
          a(q, j) = s * apj + c * e * aqj;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = app - t * g;
        a(q, q) = aqq + t * g;
        for (Eigen::Index i = 0; i < n; ++i) {
          const Complex vip = v(i, p);
          const Complex viq = v(i, q);
          v(i, p) = c * vip - sec * viq;
          v(i, q) = s * vip + c * std::conj(e) * viq;
        }
      }
    }
    if (!rotated) return sweep;
  }
  throw EigenConvergenceError(options.max_sweeps, off_diagonal_norm(a));
}

EigenDecomposition sorted(const CMatrix& diag_form, const CMatrix& vectors, int sweeps) {
  const Eigen::Index n = diag_form.rows();
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return diag_form(i, i).real() < diag_form(j, j).real();
  });
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = diag_form(order[k], order[k]).real();
    out.vectors.col(k) = vectors.col(order[k]);
  }
  out.sweeps = sweeps;
  return out;
}

}  // namespace

NotPsdError::NotPsdError(double min_eigenvalue)
    : LinalgError(format_min_eig(min_eigenvalue)), min_eigenvalue_(min_eigenvalue) {}

EigenConvergenceError::EigenConvergenceError(int sweeps, double residual)
    : LinalgError(format_convergence(sweeps, residual)), residual_(residual) {}

HermitianMatrix::HermitianMatrix(const CMatrix& entries, double tolerance) : a_(entries) {
  if (a_.rows() != a_.cols() || a_.rows() == 0)
    throw std::invalid_argument("Hermitian matrix must be square with dim >= 1");
  if (!a_.allFinite()) throw std::invalid_argument("Hermitian matrix has non-finite entries");
  for (Eigen::Index j = 0; j < a_.cols(); ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      if (std::abs(a_(i, j) - std::conj(a_(j, i))) > tolerance) {
        std::ostringstream os;
        os << "matrix is not Hermitian at (" << i << "," << j << ")";
        throw std::invalid_argument(os.str());
      }
    }
  }
  symmetrize();
}

HermitianMatrix HermitianMatrix::hermitian_part(const CMatrix& entries) {
  if (entries.rows() != entries.cols())
    throw std::invalid_argument("Hermitian part requires a square matrix");
  if (!entries.allFinite()) throw std::invalid_argument("Hermitian matrix has non-finite entries");
  HermitianMatrix h(entries, Unchecked{});
  h.symmetrize();
  return h;
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
  return HermitianMatrix(CMatrix::Identity(dim, dim), Unchecked{});
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index dim) {
  return HermitianMatrix(CMatrix::Zero(dim, dim), Unchecked{});
}

HermitianMatrix HermitianMatrix::diagonal(const RVector& values) {
  return HermitianMatrix(values.cast<Complex>().asDiagonal().toDenseMatrix(), Unchecked{});
}

HermitianMatrix HermitianMatrix::outer(const CVector& v) {
  return hermitian_part(v * v.adjoint());
}

void HermitianMatrix::symmetrize() {
  const Eigen::Index n = a_.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    a_(j, j) = a_(j, j).real();
    for (Eigen::Index i = 0; i < j; ++i) {
      const Complex avg = 0.5 * (a_(i, j) + std::conj(a_(j, i)));
      a_(i, j) = avg;
      a_(j, i) = std::conj(avg);
    }
  }
}

double HermitianMatrix::quadratic_form(const CVector& v) const {
  return v.dot(a_ * v).real();
}

double HermitianMatrix::trace_product(const HermitianMatrix& other) const {
  // trace(A B) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij)
  return (a_.array() * other.a_.array().conjugate()).sum().real();
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& other) {
  a_ += other.a_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator-=(const HermitianMatrix& other) {
  a_ -= other.a_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double s) {
  a_ *= s;
  return *this;
}

EigenDecomposition eig_hermitian(const HermitianMatrix& a, const JacobiOptions& options) {
  CMatrix work = a.matrix();
  CMatrix v = CMatrix::Identity(a.dim(), a.dim());
  const int sweeps = jacobi_sweeps(work, v, options);
  return sorted(work, v, sweeps);
}

EigenDecomposition eig_hermitian(const HermitianMatrix& a, const CMatrix& warm_basis,
                                 const JacobiOptions& options) {
  if (warm_basis.rows() != a.dim() || warm_basis.cols() != a.dim())
    throw std::invalid_argument("warm basis dimension mismatch");
  CMatrix work = HermitianMatrix::hermitian_part(warm_basis.adjoint() * a.matrix() * warm_basis)
                     .matrix();
  CMatrix v = warm_basis;
  const int sweeps = jacobi_sweeps(work, v, options);
  return sorted(work, v, sweeps);
}

CMatrix cholesky(const HermitianMatrix& a, std::optional<double> tol) {
  const EigenDecomposition eig = eig_hermitian(a);
  const Eigen::Index n = a.dim();
  const double lambda_max = std::max(eig.values(n - 1), 0.0);
  const double cut = tol.value_or(1e-9 * lambda_max);
  const double lambda_min = eig.values(0);
  if (lambda_min < -cut) throw NotPsdError(lambda_min);

  if (lambda_min > cut) {
    Eigen::LLT<CMatrix> llt(a.matrix());
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < n; ++k)
    if (eig.values(k) > cut) ++rank;
  CMatrix factor(n, rank);
  // Largest eigenvalue first.
  for (Eigen::Index c = 0; c < rank; ++c) {
    const Eigen::Index k = n - 1 - c;
    factor.col(c) = eig.vectors.col(k) * std::sqrt(eig.values(k));
  }
  return factor;
}

HermitianMatrix project_psd(const HermitianMatrix& a) {
  const EigenDecomposition eig = eig_hermitian(a);
  const RVector clipped = eig.values.cwiseMax(0.0);
  return HermitianMatrix::hermitian_part(eig.vectors * clipped.cast<Complex>().asDiagonal() *
                                         eig.vectors.adjoint());
}

RMatrix realify(const HermitianMatrix& a) {
  const Eigen::Index n = a.dim();
  RMatrix y(2 * n, 2 * n);
  const RMatrix re = a.matrix().real();
  const RMatrix im = a.matrix().imag();
  y.topLeftCorner(n, n) = re;
  y.topRightCorner(n, n) = -im;
  y.bottomLeftCorner(n, n) = im;
  y.bottomRightCorner(n, n) = re;
  return y;
}

HermitianMatrix unrealify(const RMatrix& y) {
  if (y.rows() != y.cols() || y.rows() % 2 != 0)
    throw std::invalid_argument("unrealify expects an even-dimensioned square matrix");
  const Eigen::Index n = y.rows() / 2;
  const RMatrix re = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
  const RMatrix im = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
  CMatrix x(n, n);
  x.real() = re;
  x.imag() = im;
  return HermitianMatrix::hermitian_part(x);
}

CVector solve_hpd(const HermitianMatrix& a, const CVector& b) {
  if (b.size() != a.dim()) throw std::invalid_argument("solve_hpd dimension mismatch");
  Eigen::LLT<CMatrix> llt(a.matrix());
  if (llt.info() != Eigen::Success)
    throw LinalgError("solve_hpd: matrix is not Hermitian positive definite");
  CVector x = llt.solve(b);
  if (!x.allFinite()) throw LinalgError("solve_hpd: non-finite solution");
  return x;
}

}  // namespace isac
