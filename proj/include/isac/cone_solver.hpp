#pragma once

#include <string>
#include <variant>
#include <vector>

#include "isac/hermitian.hpp"

// Solver-agnostic description of a conic program over Hermitian / real
// symmetric matrix blocks and scalar blocks, plus an operator-splitting
// solver for it.
//
// Every functional is real valued: a term contributes Re trace(C X_b) for
// a matrix block (C Hermitian, or real symmetric for symmetric blocks) and
// c * x for a scalar block (C is 1x1, real part used).
namespace isac::cone {

enum class BlockKind { hermitian, symmetric, scalar };

struct BlockSpec {
  std::string name;
  BlockKind kind = BlockKind::scalar;
  int dim = 1;
};

struct LinearTerm {
  int block = 0;
  CMatrix coeff;
};

struct AffineFunctional {
  std::vector<LinearTerm> terms;
  double constant = 0.0;
};

/// sum_b weight_b * C_b X_b C_b^H + offset, all terms of the same kind and
/// dimension. An empty C_b stands for the identity; otherwise C_b is square
/// (and real for symmetric blocks).
struct AffineMatrixMap {
  struct Term {
    int block = 0;
    double weight = 1.0;
    CMatrix congruence;
  };
  std::vector<Term> terms;
  CMatrix offset;  // empty means zero
};

struct Equality {
  AffineFunctional f;  // f == 0
};
struct Inequality {
  AffineFunctional f;  // f >= 0
};
struct PsdCone {
  AffineMatrixMap map;  // map is PSD
};
struct SecondOrderCone {
  AffineFunctional head;               // ||tail||_2 <= head
  std::vector<AffineFunctional> tail;
};
struct FrobeniusBall {
  AffineMatrixMap map;  // ||map||_F <= radius (put -center in map.offset)
  double radius = 0.0;
};

using ConstraintBody = std::variant<Equality, Inequality, PsdCone, SecondOrderCone, FrobeniusBall>;

struct Constraint {
  std::string name;
  ConstraintBody body;
};

class ConeProgram {
 public:
  int add_block(std::string name, BlockKind kind, int dim);
  int add_scalar(std::string name) { return add_block(std::move(name), BlockKind::scalar, 1); }

  /// The program maximizes this functional.
  void set_objective(AffineFunctional objective) { objective_ = std::move(objective); }
  void add_constraint(std::string name, ConstraintBody body);

  /// x^2 <= y * z with y, z >= 0, encoded as ||(2x, y - z)|| <= y + z.
  void add_rotated_cone(std::string name, const AffineFunctional& x, const AffineFunctional& y,
                        const AffineFunctional& z);

  const std::vector<BlockSpec>& blocks() const { return blocks_; }
  const AffineFunctional& objective() const { return objective_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  /// Throws std::invalid_argument naming the first inconsistency.
  void validate() const;

 private:
  std::vector<BlockSpec> blocks_;
  AffineFunctional objective_;
  std::vector<Constraint> constraints_;
};

/// Block values: matrices for matrix blocks, 1x1 for scalars.
using BlockValues = std::vector<CMatrix>;

double evaluate(const AffineFunctional& f, const BlockValues& x);
CMatrix evaluate(const AffineMatrixMap& map, const BlockValues& x);

/// Hermitian blocks become real symmetric blocks of twice the dimension;
/// coefficients are realified and halved so every functional keeps its value.
ConeProgram realify(const ConeProgram& program);
/// Maps a solution of realify(program) back to block values of `program`.
BlockValues unrealify_values(const ConeProgram& program, const BlockValues& real_values);

enum class SolveStatus { optimal, max_iters, infeasible };
const char* to_string(SolveStatus status);

/// Internal iterate, reusable to warm start a program of identical shape.
struct SolverState {
  RVector x;
  RVector s;
  RVector y;
  std::vector<CMatrix> psd_bases;
  double rho = 0.0;
};

struct SolverResult {
  BlockValues blocks;
  double objective = 0.0;
  double primal_residual = 0.0;  // max over constraints, original units
  double dual_residual = 0.0;    // scaled problem
  double gap = 0.0;              // scaled problem, relative
  int iterations = 0;
  SolveStatus status = SolveStatus::max_iters;
  SolverState state;
};

struct SolverOptions {
  double eps = 1e-6;
  int max_iters = 50000;
  double relaxation = 1.5;
  double rho = 0.1;
  double sigma = 1e-6;
  int adapt_interval = 50;
  /// Consecutive iterations with stagnating residual > 1e-3 before the
  /// divergence heuristic may declare infeasibility.
  int stagnation_window = 5000;
  /// Objective normalization; 0 selects ||c||_inf. Passing the expected
  /// magnitude of the optimal value makes the gap test relative to it.
  double objective_scale = 0.0;
};

SolverResult solve(const ConeProgram& program, const SolverOptions& options = {},
                   const SolverState* warm_start = nullptr);

struct ConstraintResidual {
  std::string name;
  double violation = 0.0;
};

/// Recomputes every constraint violation from the block values alone:
/// |f| for equalities, max(0,-f) for inequalities, max(0,-lambda_min) for
/// PSD cones, max(0, ||tail|| - head) for SOCs, max(0, ||.||_F - r) for balls.
std::vector<ConstraintResidual> verify(const ConeProgram& program, const BlockValues& values);
double max_violation(const std::vector<ConstraintResidual>& residuals);

}  // namespace isac::cone
