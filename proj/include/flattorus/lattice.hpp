#pragma once

#include <cmath>
#include <vector>

#include "flattorus/common.hpp"

namespace flattorus {

/// Gram-Schmidt orthogonalization of a sequence of row vectors.
///
/// `ortho.row(i)` is b'_i, the projection of b_i orthogonally to
/// span(b_0, ..., b_{i-1}); `mu(i, j)` for j < i is <b_i, b'_j> / <b'_j, b'_j>.
/// The diagonal of `mu` is 1 and the upper triangle is 0.
struct GramSchmidtData {
  Matrix ortho;
  Matrix mu;
  Vector norms_sq;

  int dim() const { return static_cast<int>(norms_sq.size()); }
  double norm(int i) const { return std::sqrt(norms_sq(i)); }
};

/// Modified Gram-Schmidt on the rows of `basis`.  Throws DegenerateBasis if
/// some b'_i is shorter than kNumericTolerance * |b_i| (or b_i is zero).
GramSchmidtData gram_schmidt(const Matrix& basis);

/// Orthonormal frame q_0, ..., q_{n-1} (as rows) with q_t parallel to b'_t and
/// its first nonzero coordinate positive.
Matrix orthonormal_frame(const GramSchmidtData& gs);

/// A full-rank lattice in R^n.  Rows of the basis are the generators.
class Lattice {
 public:
  explicit Lattice(Matrix basis);

  static Lattice identity(int n);
  static Lattice diagonal(const Vector& entries);

  int dim() const { return static_cast<int>(basis_.rows()); }
  const Matrix& basis() const { return basis_; }
  Vector row(int i) const { return basis_.row(i).transpose(); }
  const GramSchmidtData& gram_schmidt() const { return gs_; }

  Matrix gram() const { return basis_ * basis_.transpose(); }
  /// |det B|, the covolume.
  double determinant() const;
  /// Sum of coeffs(i) * b_i.
  Vector point(const IntVector& coeffs) const;

 private:
  Matrix basis_;
  GramSchmidtData gs_;
};

/// Basis of the dual lattice: rows of B^{-T}.
Lattice dual_lattice(const Lattice& lattice);

/// L / L_cut, where L_cut is generated by the first `cut` basis vectors.
///
/// The result has rank n - cut and is expressed in the orthonormal frame
/// q_cut, ..., q_{n-1} of span(L_cut)^perp.  cut == 0 returns the lattice
/// itself in the identity frame.
Lattice quotient_lattice(const Lattice& lattice, int cut);

/// The sublattice generated by the first `count` basis vectors, expressed in
/// the orthonormal frame q_0, ..., q_{count-1} of its span.
Lattice prefix_lattice(const Lattice& lattice, int count);

/// A chain {0} = L_{i_0} < L_{i_1} < ... < L_{i_m} = L of primitive sublattices
/// given by cut indices into a fixed basis ordering.  Blocks are numbered
/// 0..m-1; block j consists of GS directions [cuts[j-1], cuts[j]).
class Filtration {
 public:
  Filtration(Lattice lattice, std::vector<int> cuts);

  const Lattice& lattice() const { return lattice_; }
  const std::vector<int>& cuts() const { return cuts_; }
  int size() const { return static_cast<int>(cuts_.size()); }
  int dim() const { return lattice_.dim(); }

  int block_begin(int j) const;
  int block_end(int j) const { return cuts_.at(static_cast<std::size_t>(j)); }
  int block_of(int direction) const;

  /// Rows are the orthonormal GS directions of the basis.
  const Matrix& frame() const { return frame_; }

  /// L_{i_{j+1}} / L_{i_j}: the j-th block quotient, in its GS frame.
  Lattice block_quotient(int j) const;
  /// L_{i_{j+1}}: the sublattice through block j, in its GS frame.
  Lattice prefix_through(int j) const;

 private:
  Lattice lattice_;
  std::vector<int> cuts_;
  Matrix frame_;
};

/// pi_0(x), ..., pi_{m-1}(x): orthogonal projections of x onto the block
/// subspaces, plus prefix and suffix sums over blocks.
struct FiltrationDecomposition {
  std::vector<Vector> blocks;

  /// Sum of blocks [0, j): the projection onto the span of the sublattice
  /// preceding block j.
  Vector prefix_before(int j) const;
  /// Sum of blocks [0, j].
  Vector prefix_through(int j) const;
  /// Sum of blocks [j, m): the projection orthogonal to the sublattice
  /// preceding block j.
  Vector suffix_from(int j) const;
  /// Sum of blocks (j, m).
  Vector suffix_after(int j) const;

 private:
  Vector partial(int begin, int end) const;
};

FiltrationDecomposition filtration_projections(const Filtration& filtration,
                                               const Vector& x);

/// A point of R^n / L, identified by any representative.
struct TorusPoint {
  Vector rep;
};

}  // namespace flattorus
