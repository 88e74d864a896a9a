#include "flattorus/lemma_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "flattorus/filtration.hpp"
#include "flattorus/harness.hpp"
#include "flattorus/reduction.hpp"
#include "flattorus/rng.hpp"
#include "flattorus/solvers.hpp"
#include "flattorus/theta.hpp"

namespace flattorus {

std::vector<CorpusEntry> default_corpus(std::uint64_t seed) {
  std::vector<CorpusEntry> corpus;
  auto add = [&](const LatticeFamily& family) {
    corpus.push_back(CorpusEntry{family_id(family), generate(family), std::nullopt});
  };
  for (int i = 0; i < 200; ++i) {
    add(LatticeFamily{FamilyKind::random_integer, 1 + i % 4, 5, 0.0, derive_seed(seed, i)});
  }
  for (int i = 0; i < 20; ++i) {
    add(LatticeFamily{FamilyKind::random_integer, 5 + i % 2, 5, 0.0, derive_seed(seed, 200 + i)});
  }
  for (int n = 1; n <= 6; ++n) add(LatticeFamily{FamilyKind::hypercubic, n});
  for (const double skew : {0.0, 10.0, 20.0, 30.0}) {
    add(LatticeFamily{FamilyKind::skewed_diagonal, 2, 5, skew});
  }
  add(LatticeFamily{FamilyKind::skewed_diagonal, 3, 5, 24.0});
  add(LatticeFamily{FamilyKind::skewed_diagonal, 4, 5, 30.0});
  for (int n = 2; n <= 3; ++n) add(LatticeFamily{FamilyKind::near_dense_projection, n});
  return corpus;
}

bool LemmaLedger::all_passed() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const LedgerEntry& e) { return e.passed; });
}

const LedgerEntry& LemmaLedger::entry(const std::string& id) const {
  for (const LedgerEntry& e : entries) {
    if (e.id == id) return e;
  }
  throw InvalidArgument("ledger has no entry '" + id + "'");
}

namespace {

enum Property {
  kVoronoi,
  kSubadditivity,
  kSmoothing,
  kGaussianUpper,
  kGaussianSmall,
  kGaussianSparse,
  kGaussianSaturation,
  kDeficitConsistency,
  kMultiScale,
  kFiltrationValidity,
  kCoarsening,
  kPrefixCovering,
  kExpansion,
  kShortestPreserved,
  kClosestChange,
  kContraction,
  kComposed,
  kPropertyCount,
};

struct PropertyInfo {
  const char* id;
  const char* statement;
};

constexpr PropertyInfo kProperties[kPropertyCount] = {
    {"voronoi_projection",
     "|proj_{span L'}(x - v)| <= mu(L') for v closest to x and every basis prefix L'"},
    {"covering_subadditivity", "mu(L)^2 <= mu(L')^2 + mu(L/L')^2 for every basis prefix L'"},
    {"dual_smoothing_bound", "eta_eps(L*) <= 2 sqrt(n) / lambda_1(L) for eps = 2^{-10n}"},
    {"gaussian_upper", "s^2 g_s(x) <= pi dist(x, L)^2"},
    {"gaussian_lower_small",
     "s^2 g_s(x) >= c dist(x, L)^2 when s <= 1/(2 eta_{1/1000}(L*)) and dist <= s/sqrt(2)"},
    {"gaussian_lower_sparse",
     "g_s(x) >= 1 - exp(-pi dist^2/s^2) - 2^{-11n} when lambda_1 >= 4 sqrt(n) s"},
    {"gaussian_saturation", "g_s(x) >= 1 - 2^{-11n} when dist(x, L) > 2 sqrt(n) s"},
    {"gaussian_deficit_consistency",
     "the deficit agrees with 1 - rho_s(L - x) / rho_s(L) from two separate theta sums"},
    {"multiscale_two_sided",
     "(c_H/n) min(d, 2^{k-1} lambda_1)^2 <= |H(x) - H(y)|^2 <= pi k d^2"},
    {"filtration_validity",
     "mu(block) <= q lambda_1(block)/2 and lambda_1 grows by gamma between blocks"},
    {"coarsening_validity",
     "the coarsened KZ filtration is a (gamma sqrt(n), gamma)-filtration, deterministically"},
    {"prefix_covering", "mu(L_j) <= q lambda_1(L_j / L_{j-1}) for gamma >= 2"},
    {"expansion", "sum_j dist(E_j x, E_j y)^2 <= dist(x, y)^2 / (1 - alpha^2)"},
    {"shortest_preserved", "lambda_1(E_j L) = lambda_1(L_j / L_{j-1}) for alpha >= 1/gamma"},
    {"closest_change",
     "|x - v| >= |v - v'|/2, and >= lambda_1/2 for v not realizing dist(x, L)"},
    {"contraction", "sum_j min(d_j, q^2 lambda_1(E_j L))^2 >= c_E dist(x, y)^2"},
    {"composed_two_sided",
     "c_{E,l} d^2 <= sum_j min(d_j, p(n) lambda_1(E_j L))^2, sum_j d_j^2 <= c_{E,u} d^2, "
     "composed distance <= pi k sum_j d_j^2"},
};

class Recorder {
 public:
  Recorder() {
    for (const PropertyInfo& info : kProperties) {
      LedgerEntry entry;
      entry.id = info.id;
      entry.statement = info.statement;
      entries_.push_back(entry);
    }
  }

  void set_lattice(const std::string& id) { lattice_ = id; }

  // Records one check: `ok` decides, `slack` is reported.
  void check(Property p, bool ok, double slack, const std::string& reason = {}) {
    LedgerEntry& e = entries_[p];
    ++e.checks;
    if (std::isfinite(slack) && (!e.worst_slack || slack < *e.worst_slack)) e.worst_slack = slack;
    if (!ok) fail(p, reason.empty() ? "bound violated" : reason);
  }

  void fail(Property p, const std::string& reason) {
    LedgerEntry& e = entries_[p];
    e.passed = false;
    ++e.failures;
    if (e.first_failure.empty()) e.first_failure = lattice_ + ": " + reason;
  }

  void measure_min(Property p, double value) {
    LedgerEntry& e = entries_[p];
    if (!e.measured || value < *e.measured) e.measured = value;
  }

  void measure_max(Property p, double value) {
    LedgerEntry& e = entries_[p];
    if (!e.measured || value > *e.measured) e.measured = value;
  }

  // Runs `body` for property p; any exception is a failure of p only.
  void guarded(Property p, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& ex) {
      ++entries_[p].checks;
      fail(p, std::string("exception: ") + ex.what());
    }
  }

  std::vector<LedgerEntry> take() { return std::move(entries_); }

 private:
  std::vector<LedgerEntry> entries_;
  std::string lattice_;
};

// Margin of value <= bound relative to the larger magnitude.
double upper_slack(double value, double bound) {
  const double scale = std::max({std::abs(value), std::abs(bound), 1e-300});
  return (bound - value) / scale;
}

Vector random_direction(Rng& rng, int n) {
  Vector v(n);
  for (;;) {
    for (int i = 0; i < n; ++i) v(i) = rng.uniform(-1.0, 1.0);
    const double norm = v.norm();
    if (norm > 0.1 && norm <= 1.0) return v / norm;
  }
}

Vector uniform_point(Rng& rng, const Matrix& basis) {
  Vector coords(basis.rows());
  for (Eigen::Index i = 0; i < coords.size(); ++i) coords(i) = rng.uniform();
  return basis.transpose() * coords;
}

// Orthogonal projector onto the span of the first `count` frame rows.
Matrix prefix_projector(const Matrix& frame, int count) {
  const Matrix rows = frame.topRows(count);
  return rows.transpose() * rows;
}

struct LatticeContext {
  const CorpusEntry& entry;
  const ResolvedSpec& spec;
  const SuiteOptions& options;
  Rng rng;
  int n;
  PreparedLattice prepared;
  double lambda1;
  BuiltFiltration built;
  Filtration filtration;  // the one under test
  FiltrationParams params;
  bool filtration_valid = false;
};

void check_voronoi(Recorder& rec, LatticeContext& ctx) {
  const Lattice& kz = ctx.built.filtration.lattice();
  const Matrix frame = orthonormal_frame(kz.gram_schmidt());
  std::vector<double> bounds;
  for (int c = 1; c <= ctx.n; ++c) {
    bounds.push_back(covering_radius(prefix_lattice(kz, c), CoveringMode::upper_bound));
  }
  for (int t = 0; t < ctx.options.points; ++t) {
    const Vector x = uniform_point(ctx.rng, ctx.entry.lattice.basis()) * 3.0;
    const Vector r = x - ctx.prepared.closest_vector(x).closest;
    for (int c = 1; c <= ctx.n; ++c) {
      const double value = (prefix_projector(frame, c) * r).norm();
      const double bound = bounds[static_cast<std::size_t>(c) - 1];
      rec.check(kVoronoi, value <= bound + kNumericTolerance * std::max(1.0, bound),
                upper_slack(value, bound));
    }
  }
}

void check_subadditivity(Recorder& rec, LatticeContext& ctx) {
  const Lattice& kz = ctx.built.filtration.lattice();
  const double sampled = covering_radius(kz, CoveringMode::sampled, 32, ctx.rng.next());
  const double sampled_sq = sampled * sampled;
  for (int c = 1; c < ctx.n; ++c) {
    const double a = covering_radius(prefix_lattice(kz, c), CoveringMode::upper_bound);
    const double b = covering_radius(quotient_lattice(kz, c), CoveringMode::upper_bound);
    const double bound = a * a + b * b;
    rec.check(kSubadditivity, sampled_sq <= bound + 1e-6 * std::max(1.0, bound),
              upper_slack(sampled_sq, bound));
  }
  if (ctx.n == 1) rec.check(kSubadditivity, true, 0.0);
}

void check_smoothing(Recorder& rec, LatticeContext& ctx) {
  const double eps = std::exp2(-10.0 * ctx.n);
  const double eta = smoothing_parameter_of_dual(ctx.entry.lattice, eps);
  const double bound = 2.0 * std::sqrt(static_cast<double>(ctx.n)) / ctx.lambda1;
  rec.check(kSmoothing, eta <= bound * (1.0 + 1e-6), upper_slack(eta, bound));
}

// Differences exercising the Gaussian bounds at every regime.
std::vector<Vector> gaussian_differences(LatticeContext& ctx) {
  std::vector<Vector> diffs;
  const double unit = ctx.lambda1 / std::sqrt(static_cast<double>(ctx.n));
  for (const double factor : {0.01, 0.05, 0.2}) {
    diffs.push_back(random_direction(ctx.rng, ctx.n) * (factor * unit));
  }
  diffs.push_back(svp(ctx.built.filtration.lattice()).vector / 2.0);
  diffs.push_back(ctx.built.filtration.lattice().basis().colwise().sum().transpose() / 2.0);
  for (int t = 0; t < ctx.options.points; ++t) {
    diffs.push_back(uniform_point(ctx.rng, ctx.entry.lattice.basis()) -
                    uniform_point(ctx.rng, ctx.entry.lattice.basis()));
  }
  return diffs;
}

void check_gaussian(Recorder& rec, LatticeContext& ctx, const ThetaEngine& engine) {
  const double n = ctx.n;
  const double base = ctx.lambda1 / (4.0 * std::sqrt(n));
  const double floor_term = std::exp2(-11.0 * n);
  const double small_limit = 0.5 / smoothing_parameter_of_dual(ctx.entry.lattice, 1e-3);
  const std::vector<Vector> diffs = gaussian_differences(ctx);

  for (const int exponent : {-3, -1, 0, 1, 3, 6}) {
    const double s = std::ldexp(base, exponent);
    for (const Vector& x : diffs) {
      const double d = ctx.prepared.closest_vector(x).distance;
      const GaussianValue g = engine.deficit(x, s, ctx.spec.rel_tol);
      const double tol = g.error_bound + 1e-15;
      const double ratio = d * d / (s * s);

      rec.guarded(kGaussianUpper, [&] {
        const double bound = std::numbers::pi * ratio;
        rec.check(kGaussianUpper, g.value <= bound * (1.0 + 1e-9) + tol,
                  upper_slack(g.value, bound));
      });

      if (s <= small_limit && d <= s / std::numbers::sqrt2 && d > kExcludedDistance) {
        const double c = g.value / ratio;
        rec.measure_min(kGaussianSmall, c);
        rec.check(kGaussianSmall, c > 0.0, c, "lower constant not positive");
      }

      if (ctx.lambda1 >= 4.0 * std::sqrt(n) * s) {
        const double bound = 1.0 - std::exp(-std::numbers::pi * ratio) - floor_term;
        rec.check(kGaussianSparse, g.value >= bound - tol, upper_slack(bound, g.value));
      }

      if (d > 2.0 * std::sqrt(n) * s) {
        const double bound = 1.0 - floor_term;
        rec.check(kGaussianSaturation, g.value >= bound - tol, upper_slack(bound, g.value));
      }

      if (exponent >= -1 && exponent <= 3) {
        rec.guarded(kDeficitConsistency, [&] {
          const ThetaResult at_zero = engine.sum(Vector::Zero(ctx.n), s, 1e-12);
          const ThetaResult shifted = engine.sum(-x, s, 1e-12);
          const double direct = 1.0 - shifted.value / at_zero.value;
          const double allowed = 1e-9 + g.error_bound + 4.0 * 1e-12;
          const double gap = std::abs(direct - g.value);
          rec.check(kDeficitConsistency, gap <= allowed, (allowed - gap) / allowed);
        });
      }
    }
  }
}

std::vector<PointPair> embedding_pairs(LatticeContext& ctx) {
  std::vector<PointPair> pairs;
  const Vector zero = Vector::Zero(ctx.n);
  pairs.push_back(PointPair{zero, svp(ctx.built.filtration.lattice()).vector / 2.0,
                            PairKind::shortest_half});
  const Vector x = uniform_point(ctx.rng, ctx.entry.lattice.basis());
  pairs.push_back(PointPair{x, x + random_direction(ctx.rng, ctx.n) * (0.01 * ctx.lambda1),
                            PairKind::small_scale});
  for (int t = 0; t < ctx.options.embedding_pairs; ++t) {
    pairs.push_back(PointPair{uniform_point(ctx.rng, ctx.entry.lattice.basis()),
                              uniform_point(ctx.rng, ctx.entry.lattice.basis()),
                              PairKind::uniform});
  }
  return pairs;
}

void check_multiscale(Recorder& rec, LatticeContext& ctx, const MultiScaleEmbedding& h) {
  const int k = h.spec().k;
  for (const PointPair& pair : embedding_pairs(ctx)) {
    const double d = ctx.prepared.closest_vector(pair.x - pair.y).distance;
    const MultiScaleValue value = h.evaluate(pair.x, pair.y);
    const double upper = std::numbers::pi * k * d * d;
    rec.check(kMultiScale, value.total <= upper * (1.0 + 1e-9) + value.error_bound + 1e-12,
              upper_slack(value.total, upper), "upper bound");
    if (d < kExcludedDistance) continue;
    const double saturated = std::min(d, std::ldexp(h.lambda1(), k - 1));
    const double c = ctx.n * value.total / (saturated * saturated);
    rec.measure_min(kMultiScale, c);
    rec.check(kMultiScale, c > 0.0, c, "lower constant not positive");
  }
}

void check_filtration(Recorder& rec, LatticeContext& ctx) {
  const FiltrationValidation v = validate_filtration(ctx.filtration, ctx.params);
  ctx.filtration_valid = v.valid;
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < v.blocks.size(); ++j) {
    const BlockCheck& b = v.blocks[j];
    slack = std::min(slack, upper_slack(b.covering_upper, ctx.params.q * b.lambda1 / 2.0));
    if (j + 1 < v.blocks.size()) slack = std::min(slack, upper_slack(ctx.params.gamma, b.growth_ratio));
  }
  rec.check(kFiltrationValidity, v.valid, slack, "filtration is not a (q, gamma)-filtration");
}

void check_coarsening(Recorder& rec, LatticeContext& ctx) {
  const FiltrationValidation v = validate_filtration(ctx.built.filtration, ctx.built.params);
  const BuiltFiltration again = build_filtration(ctx.entry.lattice, ctx.params.gamma);
  const bool same = again.filtration.cuts() == ctx.built.filtration.cuts() &&
                    again.filtration.lattice().basis() == ctx.built.filtration.lattice().basis();
  rec.check(kCoarsening, v.valid, v.valid ? 0.0 : -1.0, "coarsened filtration invalid");
  rec.check(kCoarsening, same, same ? 0.0 : -1.0, "rebuild differs");
}

void check_prefix(Recorder& rec, LatticeContext& ctx) {
  for (int j = 0; j < ctx.filtration.size(); ++j) {
    const PrefixBound b = filtration_prefix_bound(ctx.filtration, ctx.params, j);
    rec.check(kPrefixCovering, b.holds, upper_slack(b.covering_upper, b.bound));
  }
}

// Stage distances of each pair on the image tori of `composed`.
std::vector<double> stage_distances(const ComposedEmbedding& composed, const PointPair& pair) {
  std::vector<double> out;
  for (int j = 0; j < composed.stages(); ++j) {
    const CompressedProjection& e = composed.projection(j);
    const Vector diff = e.apply(pair.x) - e.apply(pair.y);
    out.push_back(composed.stage_embedding(j).engine().primal().closest_vector(diff).distance);
  }
  return out;
}

void check_embedding_stages(Recorder& rec, LatticeContext& ctx, const ComposedEmbedding& composed) {
  const double alpha = ctx.spec.alpha;
  const double q = ctx.params.q;
  const int m = composed.stages();
  const std::size_t count = static_cast<std::size_t>(7 + ctx.n + 2 * m + ctx.options.points);
  const auto pairs = sample_pairs(ctx.entry.lattice, count, ctx.rng.next(), &ctx.filtration);

  const bool lemma_regime = ctx.filtration_valid && alpha * ctx.params.gamma >= 1.0;

  if (lemma_regime) {
    rec.guarded(kShortestPreserved, [&] {
      for (int j = 0; j < m; ++j) {
        const double image = composed.stage_embedding(j).lambda1();
        const double block = svp(ctx.filtration.block_quotient(j)).length;
        const double gap = std::abs(image - block);
        rec.check(kShortestPreserved, gap <= kNumericTolerance * block,
                  -gap / block, "lambda_1 of image differs from block");
      }
    });
  }

  for (const PointPair& pair : pairs) {
    const double d = ctx.prepared.closest_vector(pair.x - pair.y).distance;
    const std::vector<double> stages = stage_distances(composed, pair);
    double sum_sq = 0.0;
    double capped = 0.0;
    for (int j = 0; j < m; ++j) {
      const double dj = stages[static_cast<std::size_t>(j)];
      sum_sq += dj * dj;
      const double cj = std::min(dj, q * q * composed.stage_embedding(j).lambda1());
      capped += cj * cj;
    }
    const double bound = d * d / (1.0 - alpha * alpha);
    rec.check(kExpansion, sum_sq <= bound * (1.0 + 1e-6) + 1e-12, upper_slack(sum_sq, bound));

    if (lemma_regime && d >= kExcludedDistance) {
      const double c = capped / (d * d);
      rec.measure_min(kContraction, c);
      rec.check(kContraction, c >= ctx.options.contraction_floor, c - ctx.options.contraction_floor,
                "contraction constant below floor");
    }
  }
}

void check_closest_change(Recorder& rec, LatticeContext& ctx) {
  for (int t = 0; t < ctx.options.points; ++t) {
    const Vector x = uniform_point(ctx.rng, ctx.entry.lattice.basis());
    const auto points = ctx.prepared.nearest_points(x, 100);
    const LatticePoint& best = points.front();
    for (const LatticePoint& p : points) {
      const double half = 0.5 * (p.point - best.point).norm();
      const double tol = kNumericTolerance * std::max(1.0, ctx.lambda1);
      rec.check(kClosestChange, p.distance >= half - tol, upper_slack(half, p.distance));
      const bool realizing = p.distance <= best.distance * (1.0 + 1e-12);
      if (!realizing) {
        rec.check(kClosestChange, p.distance >= 0.5 * ctx.lambda1 - tol,
                  upper_slack(0.5 * ctx.lambda1, p.distance), "non-realizing point too close");
      }
    }
  }
}

void check_composed(Recorder& rec, LatticeContext& ctx, const ComposedEmbedding& composed) {
  const double alpha = ctx.spec.alpha;
  const int k = ctx.spec.k;
  for (const PointPair& pair : embedding_pairs(ctx)) {
    const double d = ctx.prepared.closest_vector(pair.x - pair.y).distance;
    if (d < kExcludedDistance) continue;
    const ComposedValue value = composed.evaluate(pair.x, pair.y);
    double sum_sq = 0.0;
    double capped = 0.0;
    for (std::size_t j = 0; j < value.stages.size(); ++j) {
      const StageValue& s = value.stages[j];
      sum_sq += s.torus_dist * s.torus_dist;
      const double cj = std::min(s.torus_dist, ctx.spec.p_n * s.lambda1);
      capped += cj * cj;
    }
    const double d2 = d * d;
    const double upper = 1.0 / (1.0 - alpha * alpha);
    rec.check(kComposed, sum_sq / d2 <= upper * (1.0 + 1e-6), upper_slack(sum_sq / d2, upper),
              "upper constant exceeds 1/(1 - alpha^2)");
    const double lower = capped / d2;
    rec.measure_min(kComposed, lower);
    rec.check(kComposed, lower > 0.0, lower, "lower constant not positive");
    const double gaussian_upper = std::numbers::pi * k * sum_sq;
    rec.check(kComposed, value.total_sq <= gaussian_upper * (1.0 + 1e-9) + 1e-12,
              upper_slack(value.total_sq, gaussian_upper), "composed exceeds pi k sum d_j^2");
  }
}

}  // namespace

LemmaLedger run_lemma_suite(const std::vector<CorpusEntry>& corpus, std::uint64_t seed,
                            const SuiteOptions& options) {
  Recorder rec;
  LemmaLedger ledger;
  ledger.seed = seed;
  ledger.lattices = corpus.size();

  for (std::size_t index = 0; index < corpus.size(); ++index) {
    const CorpusEntry& entry = corpus[index];
    rec.set_lattice(entry.id);
    const int n = entry.lattice.dim();
    std::optional<LatticeContext> ctx;
    std::optional<ResolvedSpec> spec;
    try {
      spec = resolve_spec(options.spec, n);
      BuiltFiltration built = build_filtration(entry.lattice, spec->gamma);
      Filtration under_test =
          entry.cuts ? Filtration(built.filtration.lattice(), *entry.cuts) : built.filtration;
      PreparedLattice prepared(entry.lattice);
      const double lambda1 = prepared.shortest_vector().length;
      ctx.emplace(LatticeContext{entry, *spec, options, Rng(derive_seed(seed, index)), n,
                                 std::move(prepared), lambda1, built, std::move(under_test),
                                 built.params});
    } catch (const std::exception& ex) {
      for (int p = 0; p < kPropertyCount; ++p) {
        rec.fail(static_cast<Property>(p), std::string("setup: ") + ex.what());
      }
      continue;
    }
    LatticeContext& c = *ctx;

    rec.guarded(kVoronoi, [&] { check_voronoi(rec, c); });
    rec.guarded(kSubadditivity, [&] { check_subadditivity(rec, c); });
    rec.guarded(kSmoothing, [&] { check_smoothing(rec, c); });

    std::optional<MultiScaleEmbedding> h;
    rec.guarded(kMultiScale, [&] {
      h.emplace(entry.lattice, c.spec.k, c.spec.rel_tol);
      check_multiscale(rec, c, *h);
    });
    if (h) {
      // Failures inside are attributed to the specific bound by the inner
      // guards; a throw here comes from the deficit itself.
      rec.guarded(kGaussianUpper, [&] { check_gaussian(rec, c, h->engine()); });
    }

    rec.guarded(kFiltrationValidity, [&] { check_filtration(rec, c); });
    rec.guarded(kCoarsening, [&] { check_coarsening(rec, c); });
    if (c.filtration_valid) {
      rec.guarded(kPrefixCovering, [&] { check_prefix(rec, c); });
    }
    rec.guarded(kClosestChange, [&] { check_closest_change(rec, c); });

    std::optional<ComposedEmbedding> composed;
    rec.guarded(kExpansion, [&] {
      composed.emplace(c.filtration, c.spec);
      check_embedding_stages(rec, c, *composed);
    });
    if (composed && c.filtration_valid) {
      rec.guarded(kComposed, [&] { check_composed(rec, c, *composed); });
    }
  }

  ledger.entries = rec.take();
  return ledger;
}

}  // namespace flattorus
