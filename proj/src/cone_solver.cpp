#include "isac/cone_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace isac::cone {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

int dof(BlockKind kind, int dim) {
  switch (kind) {
    case BlockKind::hermitian:
      return dim * dim;
    case BlockKind::symmetric:
      return dim * (dim + 1) / 2;
    case BlockKind::scalar:
      return 1;
  }
  return 0;
}

CMatrix hermitian_part(const CMatrix& c) { return 0.5 * (c + c.adjoint()); }

// Scaled half-vectorization: dot(svec(C), svec(X)) = Re trace(C X) for
// Hermitian (or real symmetric) C and X, and ||svec(X)|| = ||X||_F.
void svec(const CMatrix& x, BlockKind kind, double* out) {
  const int n = static_cast<int>(x.rows());
  for (int i = 0; i < n; ++i) out[i] = x(i, i).real();
  int k = n;
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      out[k++] = kSqrt2 * x(i, j).real();
      if (kind == BlockKind::hermitian) out[k++] = kSqrt2 * x(i, j).imag();
    }
  }
}

CMatrix smat(const double* v, BlockKind kind, int n) {
  CMatrix x(n, n);
  for (int i = 0; i < n; ++i) x(i, i) = v[i];
  int k = n;
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const double re = v[k++] / kSqrt2;
      const double im = kind == BlockKind::hermitian ? v[k++] / kSqrt2 : 0.0;
      x(i, j) = Complex(re, im);
      x(j, i) = Complex(re, -im);
    }
  }
  return x;
}

enum class ConeType { zero, nonneg, soc, psd };

struct Segment {
  ConeType type;
  int start;
  int length;
  int dim = 0;  // psd only
  BlockKind kind = BlockKind::hermitian;
};

// One constraint's contribution: value(x) = G x + h must lie in the cones
// listed in `segments` (offsets relative to the constraint's first row).
struct RowBlock {
  std::vector<std::vector<std::pair<int, double>>> rows;  // sparse G rows
  std::vector<double> constant;                           // h
  std::vector<Segment> segments;
};

class Encoder {
 public:
  explicit Encoder(const ConeProgram& program) : program_(program) {
    int offset = 0;
    for (const auto& b : program.blocks()) {
      offsets_.push_back(offset);
      offset += dof(b.kind, b.dim);
    }
    n_ = offset;
  }

  int num_vars() const { return n_; }
  int offset(int block) const { return offsets_[static_cast<size_t>(block)]; }

  // Dense coefficient vector and constant of a scalar functional.
  std::pair<std::vector<std::pair<int, double>>, double> functional(const AffineFunctional& f) const {
    std::vector<double> dense_local;
    std::vector<std::pair<int, double>> entries;
    for (const auto& t : f.terms) {
      const auto& spec = program_.blocks()[static_cast<size_t>(t.block)];
      const int base = offset(t.block);
      if (spec.kind == BlockKind::scalar) {
        entries.emplace_back(base, t.coeff(0, 0).real());
        continue;
      }
      dense_local.assign(static_cast<size_t>(dof(spec.kind, spec.dim)), 0.0);
      svec(hermitian_part(t.coeff), spec.kind, dense_local.data());
      for (size_t k = 0; k < dense_local.size(); ++k)
        if (dense_local[k] != 0.0) entries.emplace_back(base + static_cast<int>(k), dense_local[k]);
    }
    return {merge(std::move(entries)), f.constant};
  }

  // Rows of svec(map(x)).
  void matrix_rows(const AffineMatrixMap& map, RowBlock& out, BlockKind& kind, int& dim) const {
    const auto& first = program_.blocks()[static_cast<size_t>(map.terms.front().block)];
    kind = first.kind;
    dim = first.dim;
    const int len = dof(kind, dim);
    std::vector<double> constant(static_cast<size_t>(len), 0.0);
    if (map.offset.size() > 0) svec(hermitian_part(map.offset), kind, constant.data());
    std::vector<RMatrix> dense(map.terms.size());
    for (size_t i = 0; i < map.terms.size(); ++i)
      if (map.terms[i].congruence.size() > 0) dense[i] = congruence_matrix(map.terms[i].congruence, kind);
    for (int r = 0; r < len; ++r) {
      std::vector<std::pair<int, double>> row;
      for (size_t i = 0; i < map.terms.size(); ++i) {
        const auto& t = map.terms[i];
        if (t.weight == 0.0) continue;
        if (dense[i].size() == 0) {
          row.emplace_back(offset(t.block) + r, t.weight);
          continue;
        }
        for (int j = 0; j < len; ++j) {
          const double v = dense[i](r, j);
          if (v != 0.0) row.emplace_back(offset(t.block) + j, t.weight * v);
        }
      }
      out.rows.push_back(merge(std::move(row)));
      out.constant.push_back(constant[static_cast<size_t>(r)]);
    }
  }

  // Matrix of X -> C X C^H acting on svec coordinates.
  static RMatrix congruence_matrix(const CMatrix& c, BlockKind kind) {
    const int n = static_cast<int>(c.rows());
    const int len = dof(kind, n);
    RMatrix l(len, len);
    std::vector<double> e(static_cast<size_t>(len), 0.0);
    for (int j = 0; j < len; ++j) {
      e[static_cast<size_t>(j)] = 1.0;
      const CMatrix y = c * smat(e.data(), kind, n) * c.adjoint();
      svec(y, kind, l.col(j).data());
      e[static_cast<size_t>(j)] = 0.0;
    }
    return l;
  }

  RowBlock rows(const Constraint& c) const {
    RowBlock rb;
    auto push_functional = [&](const AffineFunctional& f) {
      auto [row, h] = functional(f);
      rb.rows.push_back(std::move(row));
      rb.constant.push_back(h);
    };
    std::visit(
        [&](const auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, Equality>) {
            push_functional(body.f);
            rb.segments.push_back({ConeType::zero, 0, 1});
          } else if constexpr (std::is_same_v<T, Inequality>) {
            push_functional(body.f);
            rb.segments.push_back({ConeType::nonneg, 0, 1});
          } else if constexpr (std::is_same_v<T, SecondOrderCone>) {
            push_functional(body.head);
            for (const auto& t : body.tail) push_functional(t);
            rb.segments.push_back({ConeType::soc, 0, static_cast<int>(body.tail.size()) + 1});
          } else if constexpr (std::is_same_v<T, FrobeniusBall>) {
            rb.rows.emplace_back();
            rb.constant.push_back(body.radius);
            BlockKind kind;
            int dim;
            matrix_rows(body.map, rb, kind, dim);
            rb.segments.push_back({ConeType::soc, 0, static_cast<int>(rb.rows.size())});
          } else if constexpr (std::is_same_v<T, PsdCone>) {
            BlockKind kind;
            int dim;
            matrix_rows(body.map, rb, kind, dim);
            rb.segments.push_back({ConeType::psd, 0, static_cast<int>(rb.rows.size()), dim, kind});
          }
        },
        c.body);
    return rb;
  }

  BlockValues unpack(const RVector& x) const {
    BlockValues out;
    for (size_t b = 0; b < program_.blocks().size(); ++b) {
      const auto& spec = program_.blocks()[b];
      const double* v = x.data() + offsets_[b];
      if (spec.kind == BlockKind::scalar) {
        out.push_back(CMatrix::Constant(1, 1, v[0]));
      } else {
        out.push_back(smat(v, spec.kind, spec.dim));
      }
    }
    return out;
  }

 private:
  static std::vector<std::pair<int, double>> merge(std::vector<std::pair<int, double>> e) {
    std::sort(e.begin(), e.end());
    std::vector<std::pair<int, double>> out;
    for (const auto& [i, v] : e) {
      if (!out.empty() && out.back().first == i)
        out.back().second += v;
      else
        out.emplace_back(i, v);
    }
    return out;
  }

  const ConeProgram& program_;
  std::vector<int> offsets_;
  int n_ = 0;
};

void project_soc(double* v, int len) {
  const double t = v[0];
  double nrm = 0.0;
  for (int i = 1; i < len; ++i) nrm += v[i] * v[i];
  nrm = std::sqrt(nrm);
  if (nrm <= t) return;
  if (nrm <= -t) {
    std::fill(v, v + len, 0.0);
    return;
  }
  const double a = 0.5 * (t + nrm);
  v[0] = a;
  const double f = a / nrm;
  for (int i = 1; i < len; ++i) v[i] *= f;
}

struct Workspace {
  std::vector<Segment> segments;       // absolute row offsets
  std::vector<int> constraint_of_row;  // row -> constraint index
  std::vector<double> row_scale;       // per constraint
  std::vector<std::pair<int, int>> constraint_rows;
  std::vector<CMatrix> psd_bases;      // per psd segment (in segment order)
};

void project_cones(RVector& v, Workspace& ws) {
  size_t psd_index = 0;
  for (const auto& seg : ws.segments) {
    double* p = v.data() + seg.start;
    switch (seg.type) {
      case ConeType::zero:
        std::fill(p, p + seg.length, 0.0);
        break;
      case ConeType::nonneg:
        for (int i = 0; i < seg.length; ++i) p[i] = std::max(p[i], 0.0);
        break;
      case ConeType::soc:
        project_soc(p, seg.length);
        break;
      case ConeType::psd: {
        const HermitianMatrix m = HermitianMatrix::hermitian_part(smat(p, seg.kind, seg.dim));
        CMatrix& basis = ws.psd_bases[psd_index++];
        const EigenDecomposition eig = eig_hermitian(m, basis);
        basis = eig.vectors;
        if (eig.values(0) >= 0.0) break;
        Eigen::Index first_pos = 0;
        while (first_pos < eig.values.size() && eig.values(first_pos) <= 0.0) ++first_pos;
        const Eigen::Index npos = eig.values.size() - first_pos;
        CMatrix proj = CMatrix::Zero(seg.dim, seg.dim);
        if (npos > 0) {
          const CMatrix vp = eig.vectors.rightCols(npos);
          proj = vp * eig.values.tail(npos).cast<Complex>().asDiagonal() * vp.adjoint();
        }
        if (seg.kind == BlockKind::symmetric) proj = proj.real().cast<Complex>();
        svec(proj, seg.kind, p);
        break;
      }
    }
  }
}

double inf_norm(const RVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

int ConeProgram::add_block(std::string name, BlockKind kind, int dim) {
  if (dim < 1) throw std::invalid_argument("block dimension must be positive");
  if (kind == BlockKind::scalar) dim = 1;
  blocks_.push_back({std::move(name), kind, dim});
  return static_cast<int>(blocks_.size()) - 1;
}

void ConeProgram::add_constraint(std::string name, ConstraintBody body) {
  constraints_.push_back({std::move(name), std::move(body)});
}

void ConeProgram::add_rotated_cone(std::string name, const AffineFunctional& x,
                                   const AffineFunctional& y, const AffineFunctional& z) {
  auto combine = [](const AffineFunctional& a, double sa, const AffineFunctional& b, double sb) {
    AffineFunctional out;
    for (const auto& t : a.terms) out.terms.push_back({t.block, sa * t.coeff});
    for (const auto& t : b.terms) out.terms.push_back({t.block, sb * t.coeff});
    out.constant = sa * a.constant + sb * b.constant;
    return out;
  };
  SecondOrderCone soc;
  soc.head = combine(y, 1.0, z, 1.0);
  soc.tail.push_back(combine(x, 2.0, x, 0.0));
  soc.tail.push_back(combine(y, 1.0, z, -1.0));
  add_constraint(std::move(name), std::move(soc));
}

void ConeProgram::validate() const {
  const int nb = static_cast<int>(blocks_.size());
  auto fail = [](const std::string& where, const std::string& what) {
    throw std::invalid_argument("cone program: " + where + ": " + what);
  };
  auto check_functional = [&](const AffineFunctional& f, const std::string& where) {
    for (const auto& t : f.terms) {
      if (t.block < 0 || t.block >= nb) fail(where, "unknown block");
      const auto& b = blocks_[static_cast<size_t>(t.block)];
      if (t.coeff.rows() != b.dim || t.coeff.cols() != b.dim)
        fail(where, "coefficient dimension does not match block '" + b.name + "'");
    }
    if (!std::isfinite(f.constant)) fail(where, "non-finite constant");
  };
  auto check_map = [&](const AffineMatrixMap& m, const std::string& where) {
    if (m.terms.empty()) fail(where, "matrix map has no terms");
    const int b0 = m.terms.front().block;
    if (b0 < 0 || b0 >= nb) fail(where, "unknown block");
    const auto& first = blocks_[static_cast<size_t>(b0)];
    if (first.kind == BlockKind::scalar) fail(where, "matrix map over a scalar block");
    for (const auto& t : m.terms) {
      if (t.block < 0 || t.block >= nb) fail(where, "unknown block");
      const auto& b = blocks_[static_cast<size_t>(t.block)];
      if (b.kind != first.kind || b.dim != first.dim) fail(where, "mixed block shapes in map");
      if (t.congruence.size() > 0) {
        if (t.congruence.rows() != b.dim || t.congruence.cols() != b.dim)
          fail(where, "congruence dimension mismatch");
        if (b.kind == BlockKind::symmetric && t.congruence.imag().cwiseAbs().maxCoeff() > 0.0)
          fail(where, "complex congruence on a symmetric block");
      }
    }
    if (m.offset.size() > 0 && (m.offset.rows() != first.dim || m.offset.cols() != first.dim))
      fail(where, "offset dimension mismatch");
  };
  check_functional(objective_, "objective");
  for (const auto& c : constraints_) {
    std::visit(
        [&](const auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, Equality> || std::is_same_v<T, Inequality>) {
            check_functional(body.f, c.name);
          } else if constexpr (std::is_same_v<T, SecondOrderCone>) {
            check_functional(body.head, c.name);
            for (const auto& t : body.tail) check_functional(t, c.name);
          } else if constexpr (std::is_same_v<T, PsdCone>) {
            check_map(body.map, c.name);
          } else if constexpr (std::is_same_v<T, FrobeniusBall>) {
            check_map(body.map, c.name);
            if (!(body.radius >= 0.0)) fail(c.name, "negative radius");
          }
        },
        c.body);
  }
}

double evaluate(const AffineFunctional& f, const BlockValues& x) {
  double v = f.constant;
  for (const auto& t : f.terms) {
    const CMatrix& xb = x[static_cast<size_t>(t.block)];
    if (xb.size() == 1 && t.coeff.size() == 1) {
      v += t.coeff(0, 0).real() * xb(0, 0).real();
    } else {
      v += (t.coeff.array() * xb.transpose().array()).sum().real();
    }
  }
  return v;
}

CMatrix evaluate(const AffineMatrixMap& map, const BlockValues& x) {
  const CMatrix& first = x[static_cast<size_t>(map.terms.front().block)];
  CMatrix out = map.offset.size() > 0 ? map.offset : CMatrix::Zero(first.rows(), first.cols());
  for (const auto& t : map.terms) {
    const CMatrix& xb = x[static_cast<size_t>(t.block)];
    if (t.congruence.size() > 0)
      out += t.weight * (t.congruence * xb * t.congruence.adjoint());
    else
      out += t.weight * xb;
  }
  return out;
}

ConeProgram realify(const ConeProgram& program) {
  const auto& blocks = program.blocks();
  auto is_herm = [&](int b) { return blocks[static_cast<size_t>(b)].kind == BlockKind::hermitian; };
  auto real_coeff = [](const CMatrix& c) {
    return CMatrix(0.5 * realify(HermitianMatrix::hermitian_part(c)).cast<Complex>());
  };
  auto convert_functional = [&](const AffineFunctional& f) {
    AffineFunctional out;
    out.constant = f.constant;
    for (const auto& t : f.terms)
      out.terms.push_back({t.block, is_herm(t.block) ? real_coeff(t.coeff) : t.coeff});
    return out;
  };
  auto convert_map = [&](const AffineMatrixMap& m) {
    AffineMatrixMap out = m;
    if (!is_herm(m.terms.front().block)) return out;
    if (m.offset.size() > 0)
      out.offset = realify(HermitianMatrix::hermitian_part(m.offset)).cast<Complex>();
    for (auto& t : out.terms) {
      if (t.congruence.size() == 0) continue;
      const Eigen::Index n = t.congruence.rows();
      CMatrix c = CMatrix::Zero(2 * n, 2 * n);
      c.topLeftCorner(n, n) = t.congruence.real().cast<Complex>();
      c.topRightCorner(n, n) = (-t.congruence.imag()).cast<Complex>();
      c.bottomLeftCorner(n, n) = t.congruence.imag().cast<Complex>();
      c.bottomRightCorner(n, n) = t.congruence.real().cast<Complex>();
      t.congruence = c;
    }
    return out;
  };

  ConeProgram out;
  for (const auto& b : blocks) {
    if (b.kind == BlockKind::hermitian)
      out.add_block(b.name, BlockKind::symmetric, 2 * b.dim);
    else
      out.add_block(b.name, b.kind, b.dim);
  }
  out.set_objective(convert_functional(program.objective()));
  for (const auto& c : program.constraints()) {
    std::visit(
        [&](const auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, Equality>) {
            out.add_constraint(c.name, Equality{convert_functional(body.f)});
          } else if constexpr (std::is_same_v<T, Inequality>) {
            out.add_constraint(c.name, Inequality{convert_functional(body.f)});
          } else if constexpr (std::is_same_v<T, SecondOrderCone>) {
            SecondOrderCone soc;
            soc.head = convert_functional(body.head);
            for (const auto& t : body.tail) soc.tail.push_back(convert_functional(t));
            out.add_constraint(c.name, std::move(soc));
          } else if constexpr (std::is_same_v<T, PsdCone>) {
            out.add_constraint(c.name, PsdCone{convert_map(body.map)});
          } else if constexpr (std::is_same_v<T, FrobeniusBall>) {
            const double scale = is_herm(body.map.terms.front().block) ? kSqrt2 : 1.0;
            out.add_constraint(c.name, FrobeniusBall{convert_map(body.map), scale * body.radius});
          }
        },
        c.body);
  }
  return out;
}

BlockValues unrealify_values(const ConeProgram& program, const BlockValues& real_values) {
  BlockValues out;
  for (size_t b = 0; b < program.blocks().size(); ++b) {
    if (program.blocks()[b].kind == BlockKind::hermitian)
      out.push_back(unrealify(real_values[b].real()).matrix());
    else
      out.push_back(real_values[b]);
  }
  return out;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::max_iters:
      return "max_iters";
    case SolveStatus::infeasible:
      return "infeasible";
  }
  return "unknown";
}

std::vector<ConstraintResidual> verify(const ConeProgram& program, const BlockValues& values) {
  std::vector<ConstraintResidual> out;
  for (const auto& c : program.constraints()) {
    double violation = 0.0;
    std::visit(
        [&](const auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, Equality>) {
            violation = std::abs(evaluate(body.f, values));
          } else if constexpr (std::is_same_v<T, Inequality>) {
            violation = std::max(0.0, -evaluate(body.f, values));
          } else if constexpr (std::is_same_v<T, SecondOrderCone>) {
            double nrm = 0.0;
            for (const auto& t : body.tail) nrm += std::pow(evaluate(t, values), 2);
            violation = std::max(0.0, std::sqrt(nrm) - evaluate(body.head, values));
          } else if constexpr (std::is_same_v<T, PsdCone>) {
            const auto m = HermitianMatrix::hermitian_part(evaluate(body.map, values));
            violation = std::max(0.0, -eig_hermitian(m).values(0));
          } else if constexpr (std::is_same_v<T, FrobeniusBall>) {
            violation = std::max(0.0, evaluate(body.map, values).norm() - body.radius);
          }
        },
        c.body);
    out.push_back({c.name, violation});
  }
  return out;
}

double max_violation(const std::vector<ConstraintResidual>& residuals) {
  double m = 0.0;
  for (const auto& r : residuals) m = std::max(m, r.violation);
  return m;
}

SolverResult solve(const ConeProgram& program, const SolverOptions& options,
                   const SolverState* warm_start) {
  program.validate();
  const Encoder enc(program);
  const int n = enc.num_vars();

  // Assemble A x + s = b, s in K, with one positive scale per constraint.
  Workspace ws;
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> b_entries;
  int m = 0;
  for (size_t ci = 0; ci < program.constraints().size(); ++ci) {
    RowBlock rb = enc.rows(program.constraints()[ci]);
    double max_norm = 0.0;
    for (const auto& row : rb.rows) {
      double s = 0.0;
      for (const auto& e : row) s += e.second * e.second;
      max_norm = std::max(max_norm, std::sqrt(s));
    }
    const double d = max_norm > 0.0 ? 1.0 / max_norm : 1.0;
    ws.row_scale.push_back(d);
    ws.constraint_rows.emplace_back(m, static_cast<int>(rb.rows.size()));
    for (size_t r = 0; r < rb.rows.size(); ++r) {
      for (const auto& [col, v] : rb.rows[r])
        triplets.emplace_back(m + static_cast<int>(r), col, -d * v);
      b_entries.push_back(d * rb.constant[r]);
    }
    for (auto seg : rb.segments) {
      seg.start += m;
      ws.segments.push_back(seg);
      if (seg.type == ConeType::psd)
        ws.psd_bases.push_back(CMatrix::Identity(seg.dim, seg.dim));
    }
    m += static_cast<int>(rb.rows.size());
  }
  Eigen::SparseMatrix<double> a(m, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  const Eigen::SparseMatrix<double> at = a.transpose();
  const RVector b = Eigen::Map<const RVector>(b_entries.data(), m);

  RVector row_d(m);
  RVector is_eq = RVector::Zero(m);
  for (size_t ci = 0; ci < ws.constraint_rows.size(); ++ci) {
    const auto [start, len] = ws.constraint_rows[ci];
    row_d.segment(start, len).setConstant(ws.row_scale[ci]);
  }
  for (const auto& seg : ws.segments)
    if (seg.type == ConeType::zero) is_eq.segment(seg.start, seg.length).setOnes();

  // Minimize q^T x where q = -objective / kappa.
  RVector q = RVector::Zero(n);
  {
    auto [row, h] = enc.functional(program.objective());
    (void)h;
    for (const auto& [col, v] : row) q(col) = -v;
  }
  double kappa = options.objective_scale > 0.0 ? options.objective_scale : inf_norm(q);
  if (!(kappa > 0.0)) kappa = 1.0;
  q /= kappa;

  RVector x = RVector::Zero(n), s = RVector::Zero(m), y = RVector::Zero(m);
  double rho = options.rho;
  if (warm_start && warm_start->x.size() == n && warm_start->s.size() == m &&
      warm_start->y.size() == m && warm_start->psd_bases.size() == ws.psd_bases.size()) {
    x = warm_start->x;
    s = warm_start->s.cwiseProduct(row_d);
    y = warm_start->y.cwiseQuotient(row_d) / kappa;
    ws.psd_bases = warm_start->psd_bases;
    if (warm_start->rho > 0.0) rho = warm_start->rho;
  }

  auto rho_vector = [&](double r) {
    RVector out(m);
    for (int i = 0; i < m; ++i) out(i) = is_eq(i) > 0.0 ? 1e3 * r : r;
    return out;
  };
  RVector rho_v = rho_vector(rho);

  // Quasi-definite KKT [sigma I, A^T; A, -diag(1/rho)], lower triangle.
  std::vector<Eigen::Triplet<double>> kkt_triplets;
  kkt_triplets.reserve(triplets.size() + static_cast<size_t>(n + m));
  for (int j = 0; j < n; ++j) kkt_triplets.emplace_back(j, j, options.sigma);
  for (int k = 0; k < a.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it)
      kkt_triplets.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int i = 0; i < m; ++i) kkt_triplets.emplace_back(n + i, n + i, -1.0 / rho_v(i));
  Eigen::SparseMatrix<double> kkt(n + m, n + m);
  kkt.setFromTriplets(kkt_triplets.begin(), kkt_triplets.end());
  kkt.makeCompressed();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
  ldlt.analyzePattern(kkt);
  auto refactor = [&]() {
    for (int i = 0; i < m; ++i) kkt.coeffRef(n + i, n + i) = -1.0 / rho_v(i);
    ldlt.factorize(kkt);
    if (ldlt.info() != Eigen::Success) throw LinalgError("cone solver: KKT factorization failed");
  };
  refactor();

  const double alpha = options.relaxation;
  RVector rhs(n + m), sol(n + m), x_tilde(n), s_tilde(m), s_relax(m), v(m);
  RVector ax(m), aty(n), y_prev = y, y_stagnation_ref = y;
  SolverResult result;
  result.status = SolveStatus::max_iters;
  int iter = 0;
  int certificate_hits = 0;
  int stagnant_since = -1;

  auto constraint_residual = [&](const RVector& rp) {
    double worst = 0.0;
    for (size_t ci = 0; ci < ws.constraint_rows.size(); ++ci) {
      const auto [start, len] = ws.constraint_rows[ci];
      worst = std::max(worst, rp.segment(start, len).norm() / ws.row_scale[ci]);
    }
    return worst;
  };

  double primal_res = 0.0, dual_res = 0.0, gap = 0.0;
  for (iter = 1; iter <= options.max_iters; ++iter) {
    rhs.head(n) = options.sigma * x - q;
    rhs.tail(m) = b - s + y.cwiseQuotient(rho_v);
    sol = ldlt.solve(rhs);
    x_tilde = sol.head(n);
    s_tilde = b - a * x_tilde;

    x = alpha * x_tilde + (1.0 - alpha) * x;
    s_relax = alpha * s_tilde + (1.0 - alpha) * s;
    v = s_relax + y.cwiseQuotient(rho_v);
    project_cones(v, ws);
    y_prev = y;
    y += rho_v.cwiseProduct(s_relax - v);
    s = v;

    ax = a * x;
    aty = at * y;
    const RVector rp = ax + s - b;
    primal_res = constraint_residual(rp);
    dual_res = inf_norm(q - aty);
    const double pobj = q.dot(x);
    const double dobj = b.dot(y);
    gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));

    if (primal_res <= options.eps && dual_res <= options.eps && gap <= options.eps) {
      result.status = SolveStatus::optimal;
      break;
    }

    if (iter % options.adapt_interval == 0) {
      // Infeasibility certificate from the dual iterate difference.
      const RVector dy = y_prev - y;
      const double ndy = inf_norm(dy);
      if (ndy > 1e-12 && primal_res > 100.0 * options.eps) {
        const bool certificate = inf_norm(at * dy) <= 1e-6 * ndy && b.dot(dy) < -1e-6 * ndy;
        certificate_hits = certificate ? certificate_hits + 1 : 0;
        if (certificate_hits >= 2 && iter >= 500) {
          result.status = SolveStatus::infeasible;
          break;
        }
      }
      // Stagnation above 1e-3 with a growing dual iterate.
      if (primal_res > 1e-3) {
        if (stagnant_since < 0) {
          stagnant_since = iter;
          y_stagnation_ref = y;
        } else if (iter - stagnant_since >= options.stagnation_window) {
          if (y.norm() > 10.0 * std::max(y_stagnation_ref.norm(), 1e-12)) {
            result.status = SolveStatus::infeasible;
            break;
          }
          stagnant_since = iter;
          y_stagnation_ref = y;
        }
      } else {
        stagnant_since = -1;
      }

      const double p_norm = std::max({inf_norm(ax), inf_norm(s), inf_norm(b), 1e-12});
      const double d_norm = std::max({inf_norm(q), inf_norm(aty), 1e-12});
      const double rp_rel = inf_norm(rp) / p_norm;
      const double rd_rel = dual_res / d_norm;
      if (rd_rel > 0.0 && rp_rel > 0.0) {
        const double rho_new = std::clamp(rho * std::sqrt(rp_rel / rd_rel), 1e-6, 1e6);
        if (rho_new > 5.0 * rho || rho_new < 0.2 * rho) {
          rho = rho_new;
          rho_v = rho_vector(rho);
          refactor();
        }
      }
    }
  }
  result.iterations = std::min(iter, options.max_iters);

  result.blocks = enc.unpack(x);
  result.objective = evaluate(program.objective(), result.blocks);
  result.primal_residual = max_violation(verify(program, result.blocks));
  result.dual_residual = dual_res;
  result.gap = gap;
  result.state.x = x;
  result.state.s = s.cwiseQuotient(row_d);
  result.state.y = kappa * y.cwiseProduct(row_d);
  result.state.psd_bases = ws.psd_bases;
  result.state.rho = rho;
  return result;
}

}  // namespace isac::cone
