#include <random>

#include "doctest.h"
#include "isac/hermitian.hpp"

using namespace isac;

namespace {

CMatrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

HermitianMatrix random_hermitian(std::mt19937_64& rng, int n) {
  const CMatrix g = random_matrix(rng, n, n);
  return HermitianMatrix::hermitian_part(g + g.adjoint());
}

HermitianMatrix random_psd(std::mt19937_64& rng, int n, int rank) {
  const CMatrix g = random_matrix(rng, n, rank);
  return HermitianMatrix::hermitian_part(g * g.adjoint());
}

double unitarity_error(const CMatrix& v) {
  return (v.adjoint() * v - CMatrix::Identity(v.cols(), v.cols())).norm();
}

}  // namespace

TEST_CASE("construction enforces hermiticity") {
  CMatrix ok(2, 2);
  ok << 1.0, Complex(2, 3), Complex(2, -3), 4.0;
  HermitianMatrix h(ok);
  CHECK(h(1, 0) == std::conj(h(0, 1)));

  CMatrix bad = ok;
  bad(1, 0) = Complex(2, 3);
  CHECK_THROWS_AS(HermitianMatrix{bad}, std::invalid_argument);

  CMatrix nan = ok;
  nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(HermitianMatrix{nan}, std::invalid_argument);

  CMatrix imag_diag = ok;
  imag_diag(0, 0) = Complex(1, 1e-14);
  HermitianMatrix cleaned(imag_diag);
  CHECK(cleaned(0, 0).imag() == 0.0);
}

TEST_CASE("eig_hermitian small cases") {
  const auto id = eig_hermitian(HermitianMatrix::identity(3));
  for (int i = 0; i < 3; ++i) CHECK(id.values(i) == doctest::Approx(1.0));
  CHECK(unitarity_error(id.vectors) < 1e-12);

  RVector d(2);
  d << 2.0, -1.0;
  const auto e = eig_hermitian(HermitianMatrix::diagonal(d));
  CHECK(e.values(0) == doctest::Approx(-1.0));
  CHECK(e.values(1) == doctest::Approx(2.0));
}

TEST_CASE("eig_hermitian reconstructs random matrices") {
  std::mt19937_64 rng(7);
  for (int seed = 0; seed < 100; ++seed) {
    const int n = 1 + seed % 20;
    const HermitianMatrix a = random_hermitian(rng, n);
    const auto e = eig_hermitian(a);
    const CMatrix rec = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    CHECK((rec - a.matrix()).norm() <= 1e-9 * std::max(1.0, a.frobenius_norm()));
    CHECK(unitarity_error(e.vectors) < 1e-9);
    CHECK((a.matrix() * e.vectors - e.vectors * e.values.cast<Complex>().asDiagonal()).norm() <
          1e-9 * std::max(1.0, a.frobenius_norm()));
    for (int i = 1; i < n; ++i) CHECK(e.values(i - 1) <= e.values(i));
  }
}

TEST_CASE("warm-started eig agrees with cold start") {
  std::mt19937_64 rng(11);
  const HermitianMatrix a = random_hermitian(rng, 12);
  const auto cold = eig_hermitian(a);
  const HermitianMatrix b = a + 1e-4 * random_hermitian(rng, 12);
  const auto warm = eig_hermitian(b, cold.vectors);
  const auto ref = eig_hermitian(b);
  CHECK((warm.values - ref.values).norm() < 1e-10);
  CHECK(warm.sweeps <= ref.sweeps);
  CHECK_THROWS_AS(eig_hermitian(a, CMatrix::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("eig_hermitian reports non-convergence") {
  std::mt19937_64 rng(3);
  JacobiOptions opts;
  opts.max_sweeps = 1;
  CHECK_THROWS_AS(eig_hermitian(random_hermitian(rng, 8), opts), EigenConvergenceError);
}

TEST_CASE("cholesky") {
  const CMatrix l = cholesky(HermitianMatrix::identity(2));
  CHECK((l - CMatrix::Identity(2, 2)).norm() < 1e-14);

  const CMatrix z = cholesky(HermitianMatrix::zero(3));
  CHECK(z.rows() == 3);
  CHECK(z.cols() == 0);

  std::mt19937_64 rng(5);
  const CVector v = random_matrix(rng, 5, 1);
  const auto vv = HermitianMatrix::outer(v);
  const CMatrix f = cholesky(vv);
  REQUIRE(f.cols() == 1);
  CHECK((f * f.adjoint() - vv.matrix()).norm() <= 1e-8 * vv.frobenius_norm());
  // Equal to v up to a unit phase.
  const Complex phase = f.col(0).dot(v) / v.squaredNorm();
  CHECK(std::abs(phase) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK((f.col(0) * phase - v).norm() < 1e-8 * v.norm());

  for (int seed = 0; seed < 100; ++seed) {
    const int n = 1 + seed % 20;
    const int rank = 1 + seed % n;
    const auto a = random_psd(rng, n, rank);
    const CMatrix fa = cholesky(a);
    CHECK((fa * fa.adjoint() - a.matrix()).norm() <= 1e-8 * a.frobenius_norm());
    CHECK(fa.cols() == rank);
    if (rank == n) {
      CHECK(fa.isLowerTriangular(1e-12));
    }
  }

  RVector d(2);
  d << 1.0, -0.5;
  try {
    (void)cholesky(HermitianMatrix::diagonal(d));
    FAIL("expected NotPsdError");
  } catch (const NotPsdError& e) {
    CHECK(e.min_eigenvalue() == doctest::Approx(-0.5));
  }
}

TEST_CASE("project_psd") {
  RVector d(2);
  d << 1.0, -1.0;
  const auto p = project_psd(HermitianMatrix::diagonal(d));
  CHECK(std::abs(p(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(p(1, 1)) < 1e-14);

  std::mt19937_64 rng(13);
  const auto psd = random_psd(rng, 6, 6);
  CHECK((project_psd(psd).matrix() - psd.matrix()).norm() < 1e-10 * psd.frobenius_norm());

  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_hermitian(rng, 6);
    const auto pa = project_psd(a);
    CHECK(eig_hermitian(pa).values(0) >= -1e-10);
    // Idempotence.
    CHECK((project_psd(pa).matrix() - pa.matrix()).norm() < 1e-9);
    // In the eigenbasis of A, the distance separates per eigenvalue; each
    // negative eigenvalue is matched by a scalar grid search over t >= 0.
    const auto e = eig_hermitian(a);
    double best_total = 0.0;
    for (int i = 0; i < e.values.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= 20000; ++k) {
        const double t = 10.0 * k / 20000.0;
        best = std::min(best, (t - e.values(i)) * (t - e.values(i)));
      }
      best_total += best;
    }
    CHECK((pa.matrix() - a.matrix()).squaredNorm() <= best_total + 1e-9);
    // Non-expansive.
    const auto b = random_hermitian(rng, 6);
    CHECK((pa.matrix() - project_psd(b).matrix()).norm() <=
          (a.matrix() - b.matrix()).norm() + 1e-10);
  }
}

TEST_CASE("realify") {
  const RMatrix r1 = realify(HermitianMatrix::identity(1));
  CHECK((r1 - RMatrix::Identity(2, 2)).norm() == 0.0);

  CMatrix a(2, 2);
  a << 0.0, Complex(0, 1), Complex(0, -1), 0.0;
  RMatrix expected(4, 4);
  expected << 0, 0, 0, -1, 0, 0, 1, 0, 0, 1, 0, 0, -1, 0, 0, 0;
  CHECK((realify(HermitianMatrix(a)) - expected).norm() == 0.0);

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_psd(rng, 5, 1 + trial % 5);
    const RMatrix rp = realify(p);
    CHECK(rp.trace() == doctest::Approx(2.0 * p.trace()));
    const auto ev = eig_hermitian(HermitianMatrix(rp.cast<Complex>())).values;
    CHECK(ev(0) >= -1e-10 * p.frobenius_norm());
    CHECK((unrealify(rp).matrix() - p.matrix()).norm() < 1e-12 * p.frobenius_norm());

    // Both directions: an indefinite matrix stays indefinite.
    const auto h = random_hermitian(rng, 5);
    const double lmin = eig_hermitian(h).values(0);
    const double rmin = eig_hermitian(HermitianMatrix(realify(h).cast<Complex>())).values(0);
    CHECK(rmin == doctest::Approx(lmin).epsilon(1e-9));
  }
}

TEST_CASE("solve_hpd") {
  std::mt19937_64 rng(19);
  const CVector b = random_matrix(rng, 3, 1);
  CHECK((solve_hpd(HermitianMatrix::identity(3), b) - b).norm() < 1e-15);

  RVector d(2);
  d << 2.0, 4.0;
  CVector rhs(2);
  rhs << 2.0, 4.0;
  const CVector x = solve_hpd(HermitianMatrix::diagonal(d), rhs);
  CHECK(std::abs(x(0) - 1.0) < 1e-15);
  CHECK(std::abs(x(1) - 1.0) < 1e-15);

  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_psd(rng, 6, 6) + HermitianMatrix::identity(6);
    const CVector bb = random_matrix(rng, 6, 1);
    CHECK((a.matrix() * solve_hpd(a, bb) - bb).norm() <= 1e-9 * bb.norm());
  }

  RVector s(2);
  s << 1.0, -1.0;
  CHECK_THROWS_AS(solve_hpd(HermitianMatrix::diagonal(s), rhs), LinalgError);
  CHECK_THROWS_AS(solve_hpd(HermitianMatrix::zero(2), rhs), LinalgError);
}
