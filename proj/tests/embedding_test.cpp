#include <cmath>
#include <numbers>

#include "gtest/gtest.h"

#include "flattorus/embedding.hpp"
#include "flattorus/filtration.hpp"
#include "flattorus/harness.hpp"
#include "flattorus/rng.hpp"
#include "flattorus/solvers.hpp"
#include "oracles.hpp"

namespace flattorus {
namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double x : values) v(i++) = x;
  return v;
}

TEST(CompressedProjection, SingleBlockIsIdentity) {
  const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, 3, 5, 0, 1});
  const CompressedProjection e = compressed_projection(Filtration(l, {3}), 0.5, 0);
  EXPECT_LT((e.matrix - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  const Lattice image = image_lattice(e);
  EXPECT_LT((image.gram() - l.gram()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(CompressedProjection, OrthogonalBlocksScaleTheTail) {
  const Filtration f(Lattice::identity(2), {1, 2});
  const CompressedProjection e = compressed_projection(f, 0.5, 0);
  const Vector y = e.matrix * vec({3, 4});
  EXPECT_NEAR((y - vec({3, 2})).norm(), 0.0, 1e-15);
  const Lattice image = image_lattice(e);
  Matrix expected(2, 2);
  expected << 1, 0, 0, 0.25;
  EXPECT_LT((image.gram() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(CompressedProjection, LastStageIsThePureProjection) {
  const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, 4, 5, 0, 2});
  const Filtration f(l, {1, 3, 4});
  const CompressedProjection last = compressed_projection(f, 0.5, 2);
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    Vector x(4);
    for (int i = 0; i < 4; ++i) x(i) = rng.uniform(-2, 2);
    EXPECT_LT((last.matrix * x - filtration_projections(f, x).blocks[2]).norm(), 1e-9);
  }
}

TEST(CompressedProjection, RecursiveIdentityAndKernel) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n = 3 + static_cast<int>(seed % 4);
    const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, n, 5, 0, seed});
    std::vector<int> cuts;
    for (int c = 1; c <= n; ++c) cuts.push_back(c);
    const Filtration f(l, cuts);
    const double alpha = 0.6;
    for (int j = 0; j + 1 < f.size(); ++j) {
      const CompressedProjection e = compressed_projection(f, alpha, j);
      const CompressedProjection next = compressed_projection(f, alpha, j + 1);
      Vector x = Vector::LinSpaced(n, -1.0, 1.7);
      const Vector own = filtration_projections(f, x).blocks[static_cast<std::size_t>(j)];
      EXPECT_LT((e.matrix * x - own - alpha * (next.matrix * x)).norm(), 1e-9);
      for (int i = 0; i < f.block_begin(j); ++i) {
        EXPECT_LT((e.matrix * f.lattice().row(i)).norm(), 1e-9);
      }
    }
  }
}

TEST(CompressedProjection, RejectsBadArguments) {
  const Filtration f(Lattice::identity(2), {1, 2});
  EXPECT_THROW(compressed_projection(f, 0.5, 2), IndexOutOfRange);
  EXPECT_THROW(compressed_projection(f, 0.5, -1), IndexOutOfRange);
  EXPECT_THROW(compressed_projection(f, 1.0, 0), InvalidArgument);
  EXPECT_THROW(compressed_projection(f, 0.0, 0), InvalidArgument);
}

TEST(ImageLattice, ShortestVectorIsPreserved) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const int n = 2 + static_cast<int>(seed % 5);
    const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, n, 5, 0, seed});
    const BuiltFiltration b = build_filtration(l, 2.0);
    for (int j = 0; j < b.filtration.size(); ++j) {
      const double image = svp(image_lattice(compressed_projection(b.filtration, 0.5, j))).length;
      const double block = svp(b.filtration.block_quotient(j)).length;
      EXPECT_NEAR(image, block, 1e-9 * block);
    }
  }
}

double g_oracle_z(double x, double s) {
  const Lattice z = Lattice::identity(1);
  return 1.0 - oracle::theta_in_box(z, vec({-x}), s, 12) / oracle::theta_in_box(z, vec({0}), s, 12);
}

TEST(GaussianG, LatticePointsGiveZero) {
  const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, 3, 5, 0, 3});
  EXPECT_EQ(gaussian_g_squared(l, Vector::Zero(3), 1.0).value, 0.0);
  EXPECT_NEAR(gaussian_g_squared(l, l.row(1) - l.row(2), 0.7).value, 0.0, 1e-15);
}

TEST(GaussianG, IntegerLineHalfPoint) {
  const GaussianValue g = gaussian_g_squared(Lattice::identity(1), vec({0.5}), 1.0, 1e-9);
  const double expected = g_oracle_z(0.5, 1.0);
  EXPECT_NEAR(g.value, expected, 1e-9 * expected);
}

TEST(GaussianG, MatchesBruteForceAcrossWidths) {
  for (const double s : {0.05, 0.3, 1.0, 3.0}) {
    for (const double x : {1e-4, 0.01, 0.2, 0.45}) {
      const double g = gaussian_g_squared(Lattice::identity(1), vec({x}), s, 1e-9).value;
      const double expected = g_oracle_z(x, s);
      EXPECT_NEAR(g, expected, 1e-9 * expected + 1e-15) << s << ' ' << x;
    }
  }
}

TEST(GaussianG, Periodic) {
  Rng rng(4);
  for (int t = 0; t < 30; ++t) {
    const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, 1 + t % 4, 5, 0, rng.next()});
    Vector x(l.dim());
    for (int i = 0; i < l.dim(); ++i) x(i) = rng.uniform(-1, 1);
    const double s = rng.uniform(0.3, 3.0);
    const double a = gaussian_g_squared(l, x, s).value;
    const double b = gaussian_g_squared(l, x + 2.0 * l.row(0) - l.row(l.dim() - 1), s).value;
    EXPECT_NEAR(a, b, 2e-9 * std::max(a, 1e-300) + 1e-15);
  }
}

TEST(GaussianEmbedding, ZeroOnEqualPointsAndSymmetric) {
  const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, 2, 5, 0, 5});
  const TorusPoint x{vec({0.3, 0.1})};
  const TorusPoint y{vec({-0.4, 1.2})};
  EXPECT_EQ(gaussian_embed_dist_sq(l, x, x, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(gaussian_embed_dist_sq(l, x, y, 1.0), gaussian_embed_dist_sq(l, y, x, 1.0));
}

TEST(GaussianEmbedding, UpperBound) {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, 1 + t % 4, 5, 0, rng.next()});
    Vector x(l.dim());
    Vector y(l.dim());
    for (int i = 0; i < l.dim(); ++i) {
      x(i) = rng.uniform(-2, 2);
      y(i) = rng.uniform(-2, 2);
    }
    const double s = rng.uniform(0.05, 4.0);
    const double d = torus_dist(l, TorusPoint{x}, TorusPoint{y});
    EXPECT_LE(gaussian_embed_dist_sq(l, TorusPoint{x}, TorusPoint{y}, s),
              std::numbers::pi * d * d + 1e-6);
  }
}

TEST(GaussianEmbedding, SaturatesFarPairs) {
  Rng rng(7);
  const Lattice z2 = Lattice::identity(2);
  const double n = 2.0;
  int checked = 0;
  while (checked < 50) {
    const Vector x = vec({rng.uniform(), rng.uniform()});
    const Vector y = vec({rng.uniform(), rng.uniform()});
    const double d = torus_dist(z2, TorusPoint{x}, TorusPoint{y});
    const double s = rng.uniform(0.01, 0.2);
    if (d <= 2.0 * std::sqrt(n) * s) continue;
    const double value = gaussian_embed_dist_sq(z2, TorusPoint{x}, TorusPoint{y}, s);
    EXPECT_GE(value, s * s * (1.0 - std::exp2(-11.0 * n)) * (1.0 - 1e-9));
    ++checked;
  }
}

TEST(MultiScale, OneScaleIsTheGaussianEmbedding) {
  const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, 3, 5, 0, 8});
  const GaussianEmbeddingSpec spec = make_gaussian_spec(l, 1);
  EXPECT_DOUBLE_EQ(spec.base_s, svp(l).length / (4.0 * std::sqrt(3.0)));
  const TorusPoint x{vec({0.2, 0.4, -0.1})};
  const TorusPoint y{vec({1.1, 0.0, 0.3})};
  EXPECT_DOUBLE_EQ(multi_scale_dist_sq(l, x, y, spec), gaussian_embed_dist_sq(l, x, y, spec.base_s));
  EXPECT_EQ(multi_scale_dist_sq(l, x, x, spec), 0.0);
}

TEST(MultiScale, IntegerLineTwoSidedOnAGrid) {
  const Lattice z = Lattice::identity(1);
  const int k = 4;
  const MultiScaleEmbedding h(z, k);
  double c_h = INFINITY;
  for (int i = 1; i < 10000; ++i) {
    const double t = i / 10000.0;
    const double d = std::min(t, 1.0 - t);
    const double value = h.dist_sq(vec({0.0}), vec({t}));
    EXPECT_LE(value, std::numbers::pi * k * d * d * (1.0 + 1e-9));
    const double saturated = std::min(d, std::ldexp(1.0, k - 1));
    c_h = std::min(c_h, value / (saturated * saturated));
  }
  EXPECT_GT(c_h, 1e-3);
}

TEST(MultiScale, SaturatesBeyondTheTopScale) {
  const Lattice l = Lattice::diagonal(vec({1, 4096}));
  const MultiScaleEmbedding h(l, 4);
  const double near = h.dist_sq(vec({0, 0}), vec({0, 256}));
  const double far = h.dist_sq(vec({0, 0}), vec({0, 2048}));
  EXPECT_NEAR(far, near, 1e-6 * near);
}

TEST(EmbeddingSpec, Defaults) {
  for (int n = 1; n <= 6; ++n) {
    const ResolvedSpec r = resolve_spec(EmbeddingSpec{}, n);
    EXPECT_EQ(r.alpha, 0.5);
    EXPECT_EQ(r.gamma, 32.0 * n);
    EXPECT_DOUBLE_EQ(r.q, 32.0 * n * std::sqrt(static_cast<double>(n)));
    EXPECT_LE(r.q, r.gamma * r.gamma / 32.0 * (1.0 + 1e-12));
    EXPECT_EQ(r.p_n, 1024.0 * n * n * n);
    EXPECT_EQ(r.k, static_cast<int>(std::ceil(std::log2(r.p_n))) + 1);
  }
}

TEST(EmbeddingSpec, RejectsInvalidSettings) {
  EXPECT_THROW(resolve_spec(EmbeddingSpec{0.4}, 2), InvalidArgument);
  EXPECT_THROW(resolve_spec(EmbeddingSpec{1.0}, 2), InvalidArgument);
  EXPECT_THROW(resolve_spec(EmbeddingSpec{0.5, 1.5}, 2), InvalidArgument);
  EXPECT_THROW(resolve_spec(EmbeddingSpec{0.5, std::nullopt, 0}, 2), InvalidArgument);
  EXPECT_THROW(resolve_spec(EmbeddingSpec{0.5, std::nullopt, std::nullopt, std::nullopt, 0.0}, 2),
               InvalidArgument);
}

TEST(Composed, SingleStageEqualsMultiScale) {
  for (int n = 1; n <= 3; ++n) {
    const Lattice l = Lattice::identity(n);
    const ComposedEmbedding e(l, EmbeddingSpec{});
    ASSERT_EQ(e.stages(), 1);
    const MultiScaleEmbedding h(l, e.spec().k);
    const Vector x = Vector::LinSpaced(n, 0.1, 0.6);
    const Vector y = Vector::LinSpaced(n, 0.9, -0.3);
    EXPECT_NEAR(e.evaluate(x, y).total_sq, h.dist_sq(x, y), 1e-12 * h.dist_sq(x, y));
    EXPECT_EQ(e.evaluate(x, x).total_sq, 0.0);
  }
}

TEST(Composed, StageSumIsTheTotal) {
  const Lattice l = Lattice::diagonal(vec({1, 1048576}));
  const ComposedEmbedding e(l, EmbeddingSpec{});
  ASSERT_EQ(e.stages(), 2);
  const ComposedValue v = e.evaluate(vec({0.1, 3.0}), vec({0.7, 400000.0}));
  double sum = 0.0;
  for (const StageValue& s : v.stages) sum += s.embedded_sq;
  EXPECT_NEAR(sum, v.total_sq, 1e-12 * v.total_sq);
  EXPECT_DOUBLE_EQ(composed_dist_sq(l, TorusPoint{vec({0.1, 3.0})}, TorusPoint{vec({0.7, 400000.0})},
                                    EmbeddingSpec{}),
                   v.total_sq);
}

TEST(Composed, SkewedLatticeBehavesLikeTheSquareLattice) {
  const Vector x = vec({0.0, 0.0});
  const Vector y = vec({0.4, 0.0});
  const Lattice skewed = Lattice::diagonal(vec({1, 1048576}));
  const double skewed_ratio =
      std::sqrt(ComposedEmbedding(skewed, EmbeddingSpec{}).evaluate(x, y).total_sq) / 0.4;

  const Lattice square = Lattice::identity(2);
  const DistortionReport report = run_distortion(square, EmbeddingSpec{}, 300, 0);
  double lo = INFINITY;
  double hi = 0.0;
  for (const PairRecord& p : report.pairs) {
    if (p.true_dist < kExcludedDistance) continue;
    lo = std::min(lo, p.ratio);
    hi = std::max(hi, p.ratio);
  }
  const double square_ratio =
      std::sqrt(ComposedEmbedding(square, EmbeddingSpec{}).evaluate(x, y).total_sq) / 0.4;
  lo = std::min(lo, square_ratio);
  hi = std::max(hi, square_ratio);
  EXPECT_GE(skewed_ratio, lo * (1.0 - 1e-6));
  EXPECT_LE(skewed_ratio, hi * (1.0 + 1e-6));
}

}  // namespace
}  // namespace flattorus
