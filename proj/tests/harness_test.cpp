#include <cmath>
#include <sstream>

#include "gtest/gtest.h"

#include "flattorus/embedding.hpp"
#include "flattorus/filtration.hpp"
#include "flattorus/harness.hpp"
#include "flattorus/lemma_suite.hpp"
#include "flattorus/report.hpp"
#include "flattorus/solvers.hpp"

namespace flattorus {
namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double x : values) v(i++) = x;
  return v;
}

TEST(Generate, Hypercubic) {
  EXPECT_EQ(generate(LatticeFamily{FamilyKind::hypercubic, 3}).basis(), Matrix::Identity(3, 3));
}

TEST(Generate, SkewedDiagonal) {
  const Lattice l = generate(LatticeFamily{FamilyKind::skewed_diagonal, 2, 5, 20});
  Matrix expected(2, 2);
  expected << 1, 0, 0, 1048576;
  EXPECT_EQ(l.basis(), expected);
}

TEST(Generate, NearDenseProjection) {
  const Lattice l = generate(LatticeFamily{FamilyKind::near_dense_projection, 2});
  EXPECT_EQ(l.basis()(0, 0), 1.0);
  EXPECT_EQ(l.basis()(0, 1), 0.0);
  EXPECT_NEAR(l.basis()(1, 0), 3.14159265, 1e-8);
  EXPECT_EQ(l.basis()(1, 1), 1.0);
}

TEST(Generate, RandomIntegerIsDeterministicAndFullRank) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const LatticeFamily family{FamilyKind::random_integer, 1 + static_cast<int>(seed % 6), 5, 0, seed};
    const Lattice a = generate(family);
    EXPECT_EQ(a.basis(), generate(family).basis());
    EXPECT_GT(std::abs(a.determinant()), 0.5);
    EXPECT_LE(a.basis().cwiseAbs().maxCoeff(), 5.0);
  }
}

TEST(Generate, FamilyNamesRoundTrip) {
  for (const FamilyKind k : {FamilyKind::hypercubic, FamilyKind::random_integer,
                             FamilyKind::skewed_diagonal, FamilyKind::near_dense_projection}) {
    EXPECT_EQ(parse_family_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_family_kind("cubic"), InvalidArgument);
}

TEST(AspectRatio, GrowsWithSkew) {
  const double a10 = aspect_ratio(generate(LatticeFamily{FamilyKind::skewed_diagonal, 2, 5, 10}));
  const double a20 = aspect_ratio(generate(LatticeFamily{FamilyKind::skewed_diagonal, 2, 5, 20}));
  EXPECT_NEAR(a20 / a10, 1024.0, 1.0);
}

TEST(SamplePairs, Deterministic) {
  const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, 3, 5, 0, 2});
  const std::vector<PointPair> a = sample_pairs(l, 50, 7);
  const std::vector<PointPair> b = sample_pairs(l, 50, 7);
  ASSERT_EQ(a.size(), 50u);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x, b[i].x);
    EXPECT_EQ(a[i].y, b[i].y);
  }
}

TEST(SamplePairs, IncludesShortestVectorMidpoint) {
  const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, 3, 5, 0, 3});
  const Vector half = svp(l).vector / 2.0;
  bool found = false;
  for (const PointPair& p : sample_pairs(l, 40, 0)) {
    if (p.kind == PairKind::shortest_half && (p.x.isZero() && (p.y - half).norm() < 1e-12)) found = true;
  }
  EXPECT_TRUE(found);
}

TEST(SamplePairs, IncludesLastBlockDirections) {
  const Lattice l = generate(LatticeFamily{FamilyKind::skewed_diagonal, 3, 5, 24});
  const BuiltFiltration b = build_filtration(l, default_gamma(3));
  ASSERT_GT(b.filtration.size(), 1);
  int found = 0;
  for (const PointPair& p : sample_pairs(l, 60, 0, &b.filtration)) {
    if (p.kind != PairKind::last_block) continue;
    const FiltrationDecomposition d = filtration_projections(b.filtration, p.y - p.x);
    EXPECT_LT(d.prefix_before(b.filtration.size() - 1).norm(), 1e-9 * (p.y - p.x).norm());
    ++found;
  }
  EXPECT_GT(found, 0);
}

TEST(RunDistortion, UnitCirclePair) {
  const Lattice z = Lattice::identity(1);
  EXPECT_NEAR(torus_dist(z, TorusPoint{vec({0.1})}, TorusPoint{vec({0.9})}), 0.2, 1e-15);
  const DistortionReport r = run_distortion(z, EmbeddingSpec{}, 100, 0);
  EXPECT_GE(r.composed.distortion, 1.0 - 1e-9);
  EXPECT_GT(r.composed.max_expansion, 0.0);
}

TEST(RunDistortion, ConsistentWithPerPairRecords) {
  const Lattice l = generate(LatticeFamily{FamilyKind::random_integer, 3, 5, 0, 4});
  const DistortionReport r = run_distortion(l, EmbeddingSpec{}, 120, 1);
  ASSERT_EQ(r.pairs.size(), 120u);
  std::vector<double> ratios;
  std::size_t excluded = 0;
  for (const PairRecord& p : r.pairs) {
    if (p.true_dist < kExcludedDistance) {
      ++excluded;
      continue;
    }
    EXPECT_GT(p.ratio, 0.0);
    EXPECT_DOUBLE_EQ(p.ratio, p.embedded_dist / p.true_dist);
    ratios.push_back(p.ratio);
  }
  EXPECT_EQ(excluded, r.excluded);
  const DistortionStats s = distortion_stats(ratios);
  EXPECT_EQ(s.max_expansion, r.composed.max_expansion);
  EXPECT_EQ(s.max_contraction, r.composed.max_contraction);
  EXPECT_DOUBLE_EQ(r.composed.distortion, r.composed.max_expansion * r.composed.max_contraction);
  EXPECT_GE(r.composed.distortion, 1.0 - 1e-9);
}

TEST(RunDistortion, IntegerLatticesNeverBelowOne) {
  for (int n = 2; n <= 6; ++n) {
    const DistortionReport r = run_distortion(Lattice::identity(n), EmbeddingSpec{}, 60, 0);
    EXPECT_GE(r.composed.distortion, 1.0 - 1e-9);
  }
}

TEST(RunDistortion, ReportIsDeterministic) {
  const Lattice l = generate(LatticeFamily{FamilyKind::skewed_diagonal, 2, 5, 12});
  const std::string a = dump(to_json(run_distortion(l, EmbeddingSpec{}, 40, 3)));
  const std::string b = dump(to_json(run_distortion(l, EmbeddingSpec{}, 40, 3)));
  EXPECT_EQ(a, b);
}

TEST(RunDistortion, SkewedBaselineSaturatesButComposedDoesNot) {
  const Lattice square = generate(LatticeFamily{FamilyKind::skewed_diagonal, 2, 5, 0});
  const Lattice skewed = generate(LatticeFamily{FamilyKind::skewed_diagonal, 2, 5, 20});
  const DistortionReport a = run_distortion(square, EmbeddingSpec{}, 60, 0);
  const DistortionReport b = run_distortion(skewed, EmbeddingSpec{}, 60, 0);
  EXPECT_LT(b.composed.distortion, 10.0 * a.composed.distortion);
  EXPECT_GT(b.baseline.max_contraction, 100.0 * b.composed.max_contraction);
}

TEST(DistortionStats, MaxExpansionTimesMaxContraction) {
  const DistortionStats s = distortion_stats({0.5, 2.0, 1.0});
  EXPECT_EQ(s.max_expansion, 2.0);
  EXPECT_EQ(s.max_contraction, 2.0);
  EXPECT_EQ(s.distortion, 4.0);
}

TEST(LemmaSuite, SingleCircleIsGreen) {
  const std::vector<CorpusEntry> corpus{{"z1", Lattice::identity(1), std::nullopt}};
  const LemmaLedger ledger = run_lemma_suite(corpus, 0);
  for (const LedgerEntry& e : ledger.entries) EXPECT_TRUE(e.passed) << e.id << ": " << e.first_failure;
  EXPECT_TRUE(ledger.all_passed());
}

TEST(LemmaSuite, SmallCorpusIsGreen) {
  std::vector<CorpusEntry> corpus;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const LatticeFamily f{FamilyKind::random_integer, 1 + static_cast<int>(seed % 4), 5, 0, seed};
    corpus.push_back({family_id(f), generate(f), std::nullopt});
  }
  const LatticeFamily skewed{FamilyKind::skewed_diagonal, 3, 5, 24};
  corpus.push_back({family_id(skewed), generate(skewed), std::nullopt});
  const LemmaLedger ledger = run_lemma_suite(corpus, 1);
  for (const LedgerEntry& e : ledger.entries) {
    EXPECT_TRUE(e.passed) << e.id << ": " << e.first_failure;
    EXPECT_GT(e.checks, 0u) << e.id;
  }
  EXPECT_GT(*ledger.entry("contraction").measured, 1e-3);
}

TEST(LemmaSuite, InjectedGrowthViolationOnlyFailsValidity) {
  const Lattice l = Lattice::diagonal(vec({1, 1.5, 100}));
  const std::vector<CorpusEntry> corpus{{"merged", l, std::vector<int>{1, 3}}};
  const LemmaLedger ledger = run_lemma_suite(corpus, 0);
  EXPECT_FALSE(ledger.entry("filtration_validity").passed);
  EXPECT_FALSE(ledger.all_passed());
  for (const LedgerEntry& e : ledger.entries) {
    if (e.id == "filtration_validity") continue;
    EXPECT_TRUE(e.passed) << e.id << ": " << e.first_failure;
  }
}

TEST(LemmaSuite, UnknownEntryThrows) {
  const LemmaLedger ledger = run_lemma_suite({{"z1", Lattice::identity(1), std::nullopt}}, 0);
  EXPECT_THROW(ledger.entry("nope"), InvalidArgument);
}

TEST(Report, JsonKeysAreStable) {
  const DistortionReport r = run_distortion(Lattice::identity(2), EmbeddingSpec{}, 10, 0, "z2");
  const Json j = to_json(r);
  std::vector<std::string> keys;
  for (const auto& item : j.items()) keys.push_back(item.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"lattice_id", "dim", "config", "cuts", "stage_lambda1",
                                            "pair_count", "excluded_pairs", "composed", "baseline",
                                            "measured_constants", "pairs"}));
  EXPECT_EQ(j["lattice_id"], "z2");
  EXPECT_EQ(j["config"]["seed"], 0);
  EXPECT_TRUE(j["baseline"].contains("empirical_distortion"));
}

TEST(Report, CsvHasOneRowPerPair) {
  const DistortionReport r = run_distortion(Lattice::identity(2), EmbeddingSpec{}, 10, 0);
  std::ostringstream out;
  write_csv(out, r);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 11);
  EXPECT_EQ(text.rfind("index,kind,true_dist,embedded_dist,ratio,baseline_dist,baseline_ratio", 0), 0u);
}

TEST(Report, NonFiniteNumbersBecomeNull) {
  EXPECT_TRUE(number(INFINITY).is_null());
  EXPECT_TRUE(number(NAN).is_null());
  EXPECT_EQ(number(0.25), 0.25);
}

}  // namespace
}  // namespace flattorus
