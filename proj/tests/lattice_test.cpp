#include <sstream>

#include "gtest/gtest.h"

#include "flattorus/harness.hpp"
#include "flattorus/lattice.hpp"
#include "flattorus/lattice_io.hpp"
#include "flattorus/rng.hpp"

namespace flattorus {
namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()),
           static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : values) {
    Eigen::Index j = 0;
    for (const double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix reconstruct(const GramSchmidtData& gs) {
  const int n = gs.dim();
  Matrix b = gs.ortho;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) b.row(i) += gs.mu(i, j) * gs.ortho.row(j);
  }
  return b;
}

TEST(GramSchmidt, IdentityIsAlreadyOrthogonal) {
  const GramSchmidtData gs = gram_schmidt(Matrix::Identity(3, 3));
  EXPECT_TRUE(gs.ortho.isApprox(Matrix::Identity(3, 3)));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < i; ++j) EXPECT_EQ(gs.mu(i, j), 0.0);
  }
}

TEST(GramSchmidt, OneStepProjection) {
  const GramSchmidtData gs = gram_schmidt(rows({{1, 0}, {1, 1}}));
  EXPECT_TRUE(gs.ortho.isApprox(Matrix::Identity(2, 2)));
  EXPECT_DOUBLE_EQ(gs.mu(1, 0), 1.0);
}

TEST(GramSchmidt, HalfCoefficient) {
  const Matrix b = rows({{2, 0}, {1, 2}});
  const GramSchmidtData gs = gram_schmidt(b);
  EXPECT_TRUE(gs.ortho.isApprox(rows({{2, 0}, {0, 2}})));
  EXPECT_DOUBLE_EQ(gs.mu(1, 0), 0.5);
  EXPECT_LT((reconstruct(gs) - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GramSchmidt, DependentRowsAreDegenerate) {
  EXPECT_THROW(gram_schmidt(rows({{1, 2}, {2, 4}})), DegenerateBasis);
  EXPECT_THROW(Lattice(rows({{1, 1}, {1, 1}})), DegenerateBasis);
}

TEST(GramSchmidt, ReconstructsRandomIntegerBases) {
  Rng rng(7);
  int tested = 0;
  while (tested < 1000) {
    const int n = static_cast<int>(rng.integer(1, 6));
    Matrix b(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) b(i, j) = static_cast<double>(rng.integer(-5, 5));
    }
    if (std::abs(b.determinant()) < 0.5) continue;
    const GramSchmidtData gs = gram_schmidt(b);
    EXPECT_LT((reconstruct(gs) - b).cwiseAbs().maxCoeff(), 1e-9);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) {
        EXPECT_LT(std::abs(gs.ortho.row(i).dot(gs.ortho.row(j))),
                  1e-9 * std::max(1.0, gs.norms_sq(i) * gs.norms_sq(j)));
      }
    }
    ++tested;
  }
}

TEST(DualLattice, IntegerLatticeIsSelfDual) {
  for (int n = 1; n <= 5; ++n) {
    EXPECT_TRUE(dual_lattice(Lattice::identity(n)).basis().isApprox(Matrix::Identity(n, n)));
  }
}

TEST(DualLattice, DiagonalInverts) {
  const Lattice dual = dual_lattice(Lattice::diagonal(Vector::Constant(2, 2.0)));
  EXPECT_TRUE(dual.basis().isApprox(rows({{0.5, 0}, {0, 0.5}})));
}

TEST(DualLattice, GramIsInverseOfGram) {
  const Lattice l(rows({{1, 0}, {0.5, 1}}));
  const Matrix g = l.gram();
  const Matrix dual_gram = dual_lattice(l).gram();
  EXPECT_LT((dual_gram * g - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DualLattice, InvolutionOnRandomBases) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, 1 + static_cast<int>(seed % 6), 5, 0, seed});
    const Lattice back = dual_lattice(dual_lattice(l));
    EXPECT_LT((back.gram() - l.gram()).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, l.gram().cwiseAbs().maxCoeff()));
  }
}

TEST(QuotientLattice, CutZeroIsTheLattice) {
  const Lattice l(rows({{1, 0}, {0.5, 1}}));
  EXPECT_TRUE(quotient_lattice(l, 0).basis().isApprox(l.basis()));
}

TEST(QuotientLattice, OrthogonalSplit) {
  const Lattice q = quotient_lattice(Lattice::identity(2), 1);
  ASSERT_EQ(q.dim(), 1);
  EXPECT_DOUBLE_EQ(std::abs(q.basis()(0, 0)), 1.0);
}

TEST(QuotientLattice, ProjectsOntoComplement) {
  const Lattice q = quotient_lattice(Lattice(rows({{1, 0}, {0.5, 1}})), 1);
  ASSERT_EQ(q.dim(), 1);
  EXPECT_NEAR(std::abs(q.basis()(0, 0)), 1.0, 1e-15);
}

TEST(QuotientLattice, RejectsOutOfRangeCut) {
  const Lattice l = Lattice::identity(3);
  EXPECT_THROW(quotient_lattice(l, -1), IndexOutOfRange);
  EXPECT_THROW(quotient_lattice(l, 4), IndexOutOfRange);
}

TEST(FiltrationProjections, SingleBlockReturnsInput) {
  const Filtration f(Lattice::identity(3), {3});
  const Vector x = Vector::LinSpaced(3, -1.0, 2.5);
  const FiltrationDecomposition d = filtration_projections(f, x);
  ASSERT_EQ(d.blocks.size(), 1u);
  EXPECT_TRUE(d.blocks[0].isApprox(x));
}

TEST(FiltrationProjections, CoordinateSplit) {
  const Filtration f(Lattice::identity(2), {1, 2});
  const FiltrationDecomposition d = filtration_projections(f, Vector::Map(std::vector<double>{3, 4}.data(), 2));
  ASSERT_EQ(d.blocks.size(), 2u);
  EXPECT_NEAR((d.blocks[0] - Vector::Unit(2, 0) * 3.0).norm(), 0.0, 1e-15);
  EXPECT_NEAR((d.blocks[1] - Vector::Unit(2, 1) * 4.0).norm(), 0.0, 1e-15);
}

TEST(FiltrationProjections, OrthogonalAndComplete) {
  Rng rng(3);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const int n = 2 + static_cast<int>(seed % 5);
    const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, n, 5, 0, seed});
    std::vector<int> cuts;
    for (int c = 1; c <= n; ++c) {
      if (c == n || rng.uniform() < 0.5) cuts.push_back(c);
    }
    const Filtration f(l, cuts);
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.uniform(-3, 3);
    const FiltrationDecomposition d = filtration_projections(f, x);
    ASSERT_EQ(static_cast<int>(d.blocks.size()), f.size());
    Vector sum = Vector::Zero(n);
    double norms = 0.0;
    for (std::size_t a = 0; a < d.blocks.size(); ++a) {
      sum += d.blocks[a];
      norms += d.blocks[a].squaredNorm();
      for (std::size_t b = 0; b < a; ++b) EXPECT_LT(std::abs(d.blocks[a].dot(d.blocks[b])), 1e-9);
    }
    EXPECT_LT((sum - x).norm(), 1e-9);
    EXPECT_NEAR(norms, x.squaredNorm(), 1e-9);
    for (int j = 0; j < f.size(); ++j) {
      EXPECT_LT((d.prefix_before(j) + d.suffix_from(j) - x).norm(), 1e-9);
      EXPECT_LT((d.prefix_through(j) + d.suffix_after(j) - x).norm(), 1e-9);
    }
  }
}

TEST(FiltrationProjections, PrefixVectorsHaveNoLaterComponents) {
  const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, 4, 5, 0, 11});
  const Filtration f(l, {1, 3, 4});
  const FiltrationDecomposition d = filtration_projections(f, l.row(0));
  EXPECT_LT(d.suffix_after(0).norm(), 1e-9);
}

TEST(Filtration, RejectsBadCuts) {
  const Lattice l = Lattice::identity(3);
  EXPECT_THROW(Filtration(l, {2, 1, 3}), InvalidArgument);
  EXPECT_THROW(Filtration(l, {1, 2}), InvalidArgument);
  EXPECT_THROW(Filtration(l, {}), InvalidArgument);
}

TEST(LatticeIo, RoundTripIsExact) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const int n = 1 + static_cast<int>(seed % 5);
    Matrix b = Matrix::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) b(i, j) += rng.uniform(-1, 1) / 3.0;
    }
    const Lattice l(b);
    std::stringstream text;
    write_lattice(text, l);
    const Lattice back = read_lattice(text);
    EXPECT_EQ(back.basis(), l.basis());
  }
}

TEST(LatticeIo, SkipsBlankLines) {
  std::istringstream in("2\n\n1 0\n0.5   1\n\n");
  const Lattice l = read_lattice(in);
  EXPECT_EQ(l.basis(), rows({{1, 0}, {0.5, 1}}));
}

TEST(LatticeIo, MalformedInputIsAParseError) {
  for (const char* text : {"", "x\n", "2\n1 0\n", "2\n1 0\n0 1 2\n", "2\n1 0\n0 a\n",
                           "1\n1\n2\n", "0\n", "2.5\n1 0\n0 1\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(read_lattice(in), ParseError) << text;
  }
}

TEST(LatticeIo, VectorParsingAcceptsCommasAndSpaces) {
  const Vector v = parse_vector("0.25, -1 3e-2");
  ASSERT_EQ(v.size(), 3);
  EXPECT_EQ(v(0), 0.25);
  EXPECT_EQ(v(1), -1.0);
  EXPECT_EQ(v(2), 0.03);
}

}  // namespace
}  // namespace flattorus
