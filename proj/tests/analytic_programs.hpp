#pragma once

// Cone programs with closed-form optima, shared by the solver unit tests
// and the acceptance run.

#include <random>
#include <string>
#include <vector>

#include "isac/cone_solver.hpp"

namespace isac::testing {

struct AnalyticProgram {
  std::string name;
  cone::ConeProgram program;
  double optimum = 0.0;
};

inline CMatrix random_complex(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

inline CMatrix random_hermitian_matrix(std::mt19937_64& rng, int n) {
  const CMatrix g = random_complex(rng, n, n);
  return 0.5 * (g + g.adjoint());
}

inline cone::AffineFunctional trace_of(int block, const CMatrix& c, double constant = 0.0) {
  return {{{block, c}}, constant};
}

inline cone::AffineFunctional scalar_of(int block, double coeff, double constant = 0.0) {
  return {{{block, CMatrix::Constant(1, 1, coeff)}}, constant};
}

inline double lambda_max(const CMatrix& c) {
  return eig_hermitian(HermitianMatrix::hermitian_part(c)).values.maxCoeff();
}

// maximize trace(C X) s.t. trace(X) = 1, X PSD  ->  lambda_max(C)
inline AnalyticProgram lambda_max_program(const CMatrix& c, cone::BlockKind kind) {
  const int n = static_cast<int>(c.rows());
  AnalyticProgram p;
  p.name = "lambda_max n=" + std::to_string(n);
  const int x = p.program.add_block("X", kind, n);
  p.program.set_objective(trace_of(x, c));
  p.program.add_constraint("unit trace", cone::Equality{trace_of(x, CMatrix::Identity(n, n), -1.0)});
  p.program.add_constraint("psd", cone::PsdCone{{{{x, 1.0}}, {}}});
  p.optimum = lambda_max(c);
  return p;
}

inline std::vector<AnalyticProgram> analytic_programs() {
  std::mt19937_64 rng(20240601);
  std::vector<AnalyticProgram> out;

  out.push_back(lambda_max_program(random_hermitian_matrix(rng, 4), cone::BlockKind::hermitian));
  out.push_back(lambda_max_program(random_hermitian_matrix(rng, 8), cone::BlockKind::hermitian));
  {
    const CMatrix g = random_hermitian_matrix(rng, 6).real().cast<Complex>();
    auto p = lambda_max_program(g, cone::BlockKind::symmetric);
    p.name += " (real)";
    out.push_back(std::move(p));
  }
  {
    // maximize -trace(C X) -> -lambda_min(C)
    const CMatrix c = random_hermitian_matrix(rng, 5);
    auto p = lambda_max_program(-c, cone::BlockKind::hermitian);
    p.name = "lambda_min n=5";
    out.push_back(std::move(p));
  }
  {
    // maximize s s.t. s^2 <= t * 1, t = 4  ->  2
    AnalyticProgram p;
    p.name = "rotated soc epigraph";
    const int s = p.program.add_scalar("s");
    const int t = p.program.add_scalar("t");
    p.program.set_objective(scalar_of(s, 1.0));
    p.program.add_constraint("t fixed", cone::Equality{scalar_of(t, 1.0, -4.0)});
    p.program.add_rotated_cone("epigraph", scalar_of(s, 1.0), scalar_of(t, 1.0),
                               cone::AffineFunctional{{}, 1.0});
    p.optimum = 2.0;
    out.push_back(std::move(p));
  }
  {
    // maximize trace(B X) s.t. ||X - X0||_F <= r  ->  trace(B X0) + r ||B||_F
    AnalyticProgram p;
    p.name = "frobenius ball";
    const int n = 4;
    const CMatrix b = random_hermitian_matrix(rng, n);
    const CMatrix x0 = random_hermitian_matrix(rng, n);
    const double r = 0.7;
    const int x = p.program.add_block("X", cone::BlockKind::hermitian, n);
    p.program.set_objective(trace_of(x, b));
    p.program.add_constraint("ball", cone::FrobeniusBall{{{{x, 1.0}}, -x0}, r});
    p.optimum = (b * x0).trace().real() + r * b.norm();
    out.push_back(std::move(p));
  }
  {
    // maximize a^T x s.t. ||x|| <= 1  ->  ||a||
    AnalyticProgram p;
    p.name = "soc unit ball";
    std::normal_distribution<double> nd(0.0, 1.0);
    cone::SecondOrderCone soc;
    soc.head.constant = 1.0;
    cone::AffineFunctional obj;
    double norm2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      const int xi = p.program.add_scalar("x" + std::to_string(i));
      const double a = nd(rng);
      norm2 += a * a;
      obj.terms.push_back({xi, CMatrix::Constant(1, 1, a)});
      soc.tail.push_back(scalar_of(xi, 1.0));
    }
    p.program.set_objective(obj);
    p.program.add_constraint("ball", soc);
    p.optimum = std::sqrt(norm2);
    out.push_back(std::move(p));
  }
  {
    // maximize x1 + 2 x2 s.t. x1 + x2 <= 1, x >= 0  ->  2
    AnalyticProgram p;
    p.name = "linear program";
    const int x1 = p.program.add_scalar("x1");
    const int x2 = p.program.add_scalar("x2");
    p.program.set_objective({{{x1, CMatrix::Constant(1, 1, 1.0)}, {x2, CMatrix::Constant(1, 1, 2.0)}}, 0.0});
    p.program.add_constraint(
        "budget", cone::Inequality{{{{x1, CMatrix::Constant(1, 1, -1.0)}, {x2, CMatrix::Constant(1, 1, -1.0)}}, 1.0}});
    p.program.add_constraint("x1 >= 0", cone::Inequality{scalar_of(x1, 1.0)});
    p.program.add_constraint("x2 >= 0", cone::Inequality{scalar_of(x2, 1.0)});
    p.optimum = 2.0;
    out.push_back(std::move(p));
  }
  {
    // maximize sum_ij X_ij s.t. X PSD, X_mm <= 1  ->  n^2 (X = all ones)
    AnalyticProgram p;
    const int n = 5;
    p.name = "diagonal caps";
    const int x = p.program.add_block("X", cone::BlockKind::hermitian, n);
    p.program.set_objective(trace_of(x, CMatrix::Ones(n, n)));
    p.program.add_constraint("psd", cone::PsdCone{{{{x, 1.0}}, {}}});
    for (int m = 0; m < n; ++m) {
      CMatrix e = CMatrix::Zero(n, n);
      e(m, m) = -1.0;
      p.program.add_constraint("cap " + std::to_string(m), cone::Inequality{trace_of(x, e, 1.0)});
    }
    p.optimum = n * n;
    out.push_back(std::move(p));
  }
  {
    // Two blocks sharing a unit trace budget -> max of the two lambda_max.
    AnalyticProgram p;
    p.name = "shared trace budget";
    const int n = 4;
    const CMatrix c = random_hermitian_matrix(rng, n);
    const CMatrix d = random_hermitian_matrix(rng, n);
    const int x1 = p.program.add_block("X1", cone::BlockKind::hermitian, n);
    const int x2 = p.program.add_block("X2", cone::BlockKind::hermitian, n);
    p.program.set_objective({{{x1, c}, {x2, d}}, 0.0});
    const CMatrix id = CMatrix::Identity(n, n);
    p.program.add_constraint("budget", cone::Equality{{{{x1, id}, {x2, id}}, -1.0}});
    p.program.add_constraint("psd 1", cone::PsdCone{{{{x1, 1.0}}, {}}});
    p.program.add_constraint("psd 2", cone::PsdCone{{{{x2, 1.0}}, {}}});
    p.optimum = std::max(lambda_max(c), lambda_max(d));
    out.push_back(std::move(p));
  }
  {
    // X PSD with ||X - I||_F <= r, maximize trace(X)  ->  n + r sqrt(n)
    AnalyticProgram p;
    p.name = "ball around identity";
    const int n = 3;
    const double r = 0.5;
    const int x = p.program.add_block("X", cone::BlockKind::hermitian, n);
    p.program.set_objective(trace_of(x, CMatrix::Identity(n, n)));
    p.program.add_constraint("psd", cone::PsdCone{{{{x, 1.0}}, {}}});
    p.program.add_constraint("ball", cone::FrobeniusBall{{{{x, 1.0}}, -CMatrix::Identity(n, n)}, r});
    p.optimum = n + r * std::sqrt(static_cast<double>(n));
    out.push_back(std::move(p));
  }
  {
    // Difference of blocks: maximize trace(C Y) s.t. X - Y PSD, Y PSD,
    // trace(X) = 1, X PSD  ->  max(lambda_max(C), 0)
    AnalyticProgram p;
    p.name = "psd ordering";
    const int n = 4;
    const CMatrix c = random_hermitian_matrix(rng, n);
    const int x = p.program.add_block("X", cone::BlockKind::hermitian, n);
    const int y = p.program.add_block("Y", cone::BlockKind::hermitian, n);
    p.program.set_objective(trace_of(y, c));
    p.program.add_constraint("unit trace", cone::Equality{trace_of(x, CMatrix::Identity(n, n), -1.0)});
    p.program.add_constraint("X - Y", cone::PsdCone{{{{x, 1.0}, {y, -1.0}}, {}}});
    p.program.add_constraint("Y", cone::PsdCone{{{{y, 1.0}}, {}}});
    p.optimum = std::max(lambda_max(c), 0.0);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace isac::testing
