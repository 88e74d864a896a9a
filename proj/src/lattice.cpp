#include "flattorus/lattice.hpp"

#include <algorithm>
#include <string>

namespace flattorus {

GramSchmidtData gram_schmidt(const Matrix& basis) {
  const auto rows = basis.rows();
  GramSchmidtData gs;
  gs.ortho = Matrix::Zero(rows, basis.cols());
  gs.mu = Matrix::Identity(rows, rows);
  gs.norms_sq = Vector::Zero(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    Eigen::RowVectorXd v = basis.row(i);
    const double input_norm = v.norm();
    for (Eigen::Index j = 0; j < i; ++j) {
      const double coeff = v.dot(gs.ortho.row(j)) / gs.norms_sq(j);
      gs.mu(i, j) = coeff;
      v -= coeff * gs.ortho.row(j);
    }
    // One reorthogonalization pass; the correction is folded into mu.
    for (Eigen::Index j = 0; j < i; ++j) {
      const double coeff = v.dot(gs.ortho.row(j)) / gs.norms_sq(j);
      gs.mu(i, j) += coeff;
      v -= coeff * gs.ortho.row(j);
    }
    const double norm = v.norm();
    if (!(input_norm > 0.0) || !std::isfinite(norm) ||
        norm <= kNumericTolerance * input_norm) {
      throw DegenerateBasis("gram_schmidt: row " + std::to_string(i) +
                            " is (numerically) dependent on earlier rows");
    }
    gs.ortho.row(i) = v;
    gs.norms_sq(i) = v.squaredNorm();
  }
  return gs;
}

Matrix orthonormal_frame(const GramSchmidtData& gs) {
  Matrix frame = gs.ortho;
  for (Eigen::Index t = 0; t < frame.rows(); ++t) {
    frame.row(t) /= gs.norm(static_cast<int>(t));
    for (Eigen::Index c = 0; c < frame.cols(); ++c) {
      if (std::abs(frame(t, c)) > kNumericTolerance) {
        if (frame(t, c) < 0) frame.row(t) *= -1.0;
        break;
      }
    }
  }
  return frame;
}

namespace {

GramSchmidtData validated_gram_schmidt(const Matrix& basis) {
  if (basis.rows() < 1 || basis.rows() != basis.cols()) {
    throw InvalidArgument("lattice basis must be a nonempty square matrix");
  }
  if (!basis.allFinite()) {
    throw InvalidArgument("lattice basis has non-finite entries");
  }
  return gram_schmidt(basis);
}

}  // namespace

Lattice::Lattice(Matrix basis)
    : basis_(std::move(basis)), gs_(validated_gram_schmidt(basis_)) {}

Lattice Lattice::identity(int n) { return Lattice(Matrix::Identity(n, n)); }

Lattice Lattice::diagonal(const Vector& entries) {
  return Lattice(Matrix(entries.asDiagonal()));
}

double Lattice::determinant() const {
  return std::sqrt(gs_.norms_sq.prod());
}

Vector Lattice::point(const IntVector& coeffs) const {
  Vector v = Vector::Zero(dim());
  for (int i = 0; i < dim(); ++i) {
    v += static_cast<double>(coeffs(i)) * basis_.row(i).transpose();
  }
  return v;
}

Lattice dual_lattice(const Lattice& lattice) {
  const Matrix& b = lattice.basis();
  Eigen::FullPivLU<Matrix> lu(b);
  if (!lu.isInvertible()) {
    throw DegenerateBasis("dual_lattice: basis is singular");
  }
  return Lattice(lu.inverse().transpose());
}

Lattice quotient_lattice(const Lattice& lattice, int cut) {
  const int n = lattice.dim();
  if (cut < 0 || cut > n) {
    throw IndexOutOfRange("quotient_lattice: cut " + std::to_string(cut) +
                          " outside [0, " + std::to_string(n) + "]");
  }
  if (cut == 0) return lattice;
  if (cut == n) {
    throw IndexOutOfRange("quotient_lattice: quotient by the whole lattice is trivial");
  }
  const Matrix frame = orthonormal_frame(lattice.gram_schmidt());
  const int rank = n - cut;
  return Lattice(lattice.basis().bottomRows(rank) *
                 frame.bottomRows(rank).transpose());
}

Lattice prefix_lattice(const Lattice& lattice, int count) {
  const int n = lattice.dim();
  if (count < 1 || count > n) {
    throw IndexOutOfRange("prefix_lattice: count " + std::to_string(count) +
                          " outside [1, " + std::to_string(n) + "]");
  }
  const Matrix frame = orthonormal_frame(lattice.gram_schmidt());
  return Lattice(lattice.basis().topRows(count) *
                 frame.topRows(count).transpose());
}

Filtration::Filtration(Lattice lattice, std::vector<int> cuts)
    : lattice_(std::move(lattice)), cuts_(std::move(cuts)) {
  const int n = lattice_.dim();
  if (cuts_.empty() || cuts_.back() != n) {
    throw InvalidArgument("filtration cuts must end at the dimension");
  }
  int previous = 0;
  for (int c : cuts_) {
    if (c <= previous) {
      throw InvalidArgument("filtration cuts must be strictly increasing and positive");
    }
    previous = c;
  }
  frame_ = orthonormal_frame(lattice_.gram_schmidt());
}

int Filtration::block_begin(int j) const {
  if (j < 0 || j >= size()) {
    throw IndexOutOfRange("filtration block " + std::to_string(j));
  }
  return j == 0 ? 0 : cuts_[static_cast<std::size_t>(j - 1)];
}

int Filtration::block_of(int direction) const {
  const auto it = std::upper_bound(cuts_.begin(), cuts_.end(), direction);
  if (direction < 0 || it == cuts_.end()) {
    throw IndexOutOfRange("direction " + std::to_string(direction));
  }
  return static_cast<int>(it - cuts_.begin());
}

Lattice Filtration::block_quotient(int j) const {
  const int begin = block_begin(j);
  const int width = block_end(j) - begin;
  return Lattice(lattice_.basis().block(begin, 0, width, dim()) *
                 frame_.middleRows(begin, width).transpose());
}

Lattice Filtration::prefix_through(int j) const {
  const int end = block_end(j);
  return Lattice(lattice_.basis().topRows(end) *
                 frame_.topRows(end).transpose());
}

Vector FiltrationDecomposition::partial(int begin, int end) const {
  Vector sum = Vector::Zero(blocks.front().size());
  for (int j = std::max(begin, 0); j < end; ++j) {
    sum += blocks[static_cast<std::size_t>(j)];
  }
  return sum;
}

Vector FiltrationDecomposition::prefix_before(int j) const { return partial(0, j); }

Vector FiltrationDecomposition::prefix_through(int j) const {
  return partial(0, j + 1);
}

Vector FiltrationDecomposition::suffix_from(int j) const {
  return partial(j, static_cast<int>(blocks.size()));
}

Vector FiltrationDecomposition::suffix_after(int j) const {
  return partial(j + 1, static_cast<int>(blocks.size()));
}

FiltrationDecomposition filtration_projections(const Filtration& filtration,
                                               const Vector& x) {
  if (x.size() != filtration.dim()) {
    throw InvalidArgument("filtration_projections: dimension mismatch");
  }
  const Matrix& frame = filtration.frame();
  const Vector coords = frame * x;
  FiltrationDecomposition out;
  out.blocks.reserve(static_cast<std::size_t>(filtration.size()));
  for (int j = 0; j < filtration.size(); ++j) {
    const int begin = filtration.block_begin(j);
    const int width = filtration.block_end(j) - begin;
    out.blocks.push_back(frame.middleRows(begin, width).transpose() *
                         coords.segment(begin, width));
  }
  return out;
}

}  // namespace flattorus
