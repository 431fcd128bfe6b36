#pragma once

// Block-structured linear matrix inequalities over matrix decision variables,
// and their canonicalization to standard-form SDP data
//   minimize c^T x  subject to  F0_b + sum_i x_i F_ib  >= 0  per block b.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mrkf/linalg.hpp"

namespace mrkf {

struct MatrixVariable {
  std::string name;
  int rows = 0;
  int cols = 0;
  bool symmetric = false;

  /// Symmetric variables are parameterized by their upper triangle.
  int scalar_count() const { return symmetric ? rows * (rows + 1) / 2 : rows * cols; }
};

/// One affine term: left * V * right (or left * V^T * right) placed at the
/// 1-based block position (block_row, block_col). Off-diagonal placements
/// imply the transposed placement at (block_col, block_row).
struct LmiTerm {
  int var = -1;
  Matrix left;
  Matrix right;
  bool transpose_var = false;
  int block_row = 1;
  int block_col = 1;
};

struct LmiBlock {
  std::string name;
  std::vector<int> block_dims;  // partition of the constraint matrix
  Matrix constant;              // dim x dim, may be zero-sized meaning zero
  std::vector<LmiTerm> terms;
  double margin = 0.0;  // constraint sense: assembled matrix >= margin * I

  int dim() const {
    int d = 0;
    for (int b : block_dims) d += b;
    return d;
  }

  int block_offset(int one_based) const {
    int off = 0;
    for (int i = 0; i < one_based - 1; ++i) off += block_dims[i];
    return off;
  }

  LmiBlock& add_term(int var, Matrix left, Matrix right, int brow, int bcol,
                     bool transpose_var = false) {
    terms.push_back({var, std::move(left), std::move(right), transpose_var, brow, bcol});
    return *this;
  }
};

struct SdpProblem {
  std::vector<MatrixVariable> variables;
  std::vector<LmiBlock> blocks;
  int objective_var = -1;        // objective is trace of this variable
  double objective_scale = 1.0;  // minimize objective_scale * trace(variable)

  int add_variable(std::string name, int rows, int cols, bool symmetric) {
    variables.push_back({std::move(name), rows, cols, symmetric});
    return static_cast<int>(variables.size()) - 1;
  }
};

// --- canonical (scalarized) form ----------------------------------------

struct SparseEntry {
  int row;
  int col;
  double val;
};

struct CanonicalBlock {
  int dim = 0;
  Matrix F0;                                // constant minus margin * I
  std::vector<std::vector<SparseEntry>> F;  // per scalar unknown, full symmetric
  std::vector<int> active;                  // scalar ids with nonempty F
};

struct CanonicalForm {
  int m = 0;  // total scalar unknowns
  Vector c;
  std::vector<CanonicalBlock> blocks;
  std::vector<int> var_offset;  // first scalar id of each matrix variable
  const std::vector<MatrixVariable>* variables = nullptr;

  /// Scalar id of entry (i, j) of variable v; for symmetric variables
  /// (i, j) and (j, i) share an unknown.
  int scalar_id(int v, int i, int j) const {
    const MatrixVariable& mv = (*variables)[v];
    if (mv.symmetric) {
      if (i > j) std::swap(i, j);
      // upper-triangle order: (0,0),(0,1),(1,1),(0,2),...
      return var_offset[v] + j * (j + 1) / 2 + i;
    }
    return var_offset[v] + i * mv.cols + j;
  }

  /// Expands a scalar vector back to matrix variable values.
  std::vector<Matrix> devectorize(const Vector& x) const {
    std::vector<Matrix> vals(variables->size());
    for (size_t v = 0; v < variables->size(); ++v) {
      const MatrixVariable& mv = (*variables)[v];
      Matrix m_(mv.rows, mv.cols);
      for (int i = 0; i < mv.rows; ++i)
        for (int j = 0; j < mv.cols; ++j) m_(i, j) = x(scalar_id(static_cast<int>(v), i, j));
      vals[v] = std::move(m_);
    }
    return vals;
  }

  /// Inverse of devectorize; symmetric variables read the upper triangle.
  Vector vectorize(const std::vector<Matrix>& vals) const {
    Vector x = Vector::Zero(m);
    for (size_t v = 0; v < variables->size(); ++v) {
      const MatrixVariable& mv = (*variables)[v];
      for (int i = 0; i < mv.rows; ++i)
        for (int j = 0; j < mv.cols; ++j)
          x(scalar_id(static_cast<int>(v), i, j)) = vals[v](i, j);
    }
    return x;
  }
};

namespace detail {

/// Adds `contrib` (and its transpose when off-diagonal) into `dst` at the
/// block position given by offsets; diagonal placements are symmetrized.
inline void place_symmetric(Matrix& dst, const Matrix& contrib, int ro, int co) {
  if (ro == co && contrib.rows() == contrib.cols()) {
    dst.block(ro, co, contrib.rows(), contrib.cols()) +=
        0.5 * (contrib + contrib.transpose());
  } else {
    dst.block(ro, co, contrib.rows(), contrib.cols()) += contrib;
    dst.block(co, ro, contrib.cols(), contrib.rows()) += contrib.transpose();
  }
}

}  // namespace detail

/// Assembles the affine map of one LMI block at given variable values.
inline Matrix evaluate_block(const LmiBlock& b, const std::vector<Matrix>& values) {
  const int d = b.dim();
  Matrix out = Matrix::Zero(d, d);
  if (b.constant.size() > 0) out = 0.5 * (b.constant + b.constant.transpose());
  for (const LmiTerm& t : b.terms) {
    if (t.var < 0 || t.var >= static_cast<int>(values.size()) ||
        values[t.var].size() == 0)
      throw UnassignedVariable("evaluate_block: variable not assigned");
    const Matrix& v = values[t.var];
    Matrix contrib = t.left * (t.transpose_var ? Matrix(v.transpose()) : v) * t.right;
    detail::place_symmetric(out, contrib, b.block_offset(t.block_row),
                            b.block_offset(t.block_col));
  }
  return 0.5 * (out + out.transpose());
}

inline std::pair<Matrix, double> evaluate_block_with_eig(
    const LmiBlock& b, const std::vector<Matrix>& values) {
  Matrix m = evaluate_block(b, values);
  return {m, min_eigenvalue(m)};
}

inline CanonicalForm canonicalize(const SdpProblem& p) {
  CanonicalForm cf;
  cf.variables = &p.variables;
  cf.var_offset.resize(p.variables.size());
  int m = 0;
  for (size_t v = 0; v < p.variables.size(); ++v) {
    cf.var_offset[v] = m;
    m += p.variables[v].scalar_count();
  }
  cf.m = m;

  cf.c = Vector::Zero(m);
  if (p.objective_var >= 0) {
    if (p.objective_var >= static_cast<int>(p.variables.size()))
      throw UndeclaredVariable("canonicalize: objective variable not declared");
    const MatrixVariable& mv = p.variables[p.objective_var];
    if (mv.rows != mv.cols)
      throw DimensionMismatch("canonicalize: trace objective needs a square variable");
    for (int i = 0; i < mv.rows; ++i)
      cf.c(cf.scalar_id(p.objective_var, i, i)) = p.objective_scale;
  }

  cf.blocks.reserve(p.blocks.size());
  for (const LmiBlock& b : p.blocks) {
    CanonicalBlock cb;
    cb.dim = b.dim();
    cb.F0 = Matrix::Zero(cb.dim, cb.dim);
    if (b.constant.size() > 0) {
      if (b.constant.rows() != cb.dim || b.constant.cols() != cb.dim)
        throw DimensionMismatch("canonicalize: constant term size mismatch in " + b.name);
      cb.F0 = 0.5 * (b.constant + b.constant.transpose());
    }
    cb.F0 -= b.margin * Matrix::Identity(cb.dim, cb.dim);
    cb.F.resize(m);

    // Group terms by variable so each scalar unknown is expanded once per
    // variable with all its placements accumulated densely.
    std::map<int, std::vector<const LmiTerm*>> by_var;
    for (const LmiTerm& t : b.terms) {
      if (t.var < 0 || t.var >= static_cast<int>(p.variables.size()))
        throw UndeclaredVariable("canonicalize: term references undeclared variable in " +
                                 b.name);
      by_var[t.var].push_back(&t);
    }

    Matrix accum(cb.dim, cb.dim);
    for (const auto& [v, terms] : by_var) {
      const MatrixVariable& mv = p.variables[v];
      for (const LmiTerm* t : terms) {
        const int vr = t->transpose_var ? mv.cols : mv.rows;
        const int vc = t->transpose_var ? mv.rows : mv.cols;
        if (t->left.cols() != vr || t->right.rows() != vc)
          throw DimensionMismatch("canonicalize: coefficient shape mismatch in " + b.name);
      }
      const int count = mv.scalar_count();
      for (int s = 0; s < count; ++s) {
        // Recover (i, j) for this scalar.
        int ei, ej;
        if (mv.symmetric) {
          // inverse of j*(j+1)/2 + i with i <= j
          int j = 0;
          while ((j + 1) * (j + 2) / 2 <= s) ++j;
          ei = s - j * (j + 1) / 2;
          ej = j;
        } else {
          ei = s / mv.cols;
          ej = s % mv.cols;
        }
        accum.setZero();
        for (const LmiTerm* t : terms) {
          auto add_basis = [&](int a, int bb) {
            // left * E_ab * right = left.col(a) * right.row(bb)
            Matrix contrib = t->left.col(a) * t->right.row(bb);
            detail::place_symmetric(accum, contrib, b.block_offset(t->block_row),
                                    b.block_offset(t->block_col));
          };
          const int a = t->transpose_var ? ej : ei;
          const int bb = t->transpose_var ? ei : ej;
          add_basis(a, bb);
          if (mv.symmetric && ei != ej) add_basis(bb, a);
        }
        const int sid = cf.var_offset[v] + s;
        for (int r = 0; r < cb.dim; ++r)
          for (int col = 0; col < cb.dim; ++col)
            if (accum(r, col) != 0.0) cb.F[sid].push_back({r, col, accum(r, col)});
      }
    }

    for (int sid = 0; sid < m; ++sid)
      if (!cb.F[sid].empty()) cb.active.push_back(sid);
    cf.blocks.push_back(std::move(cb));
  }
  return cf;
}

}  // namespace mrkf
