#include "flattorus/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "flattorus/reduction.hpp"
#include "flattorus/rng.hpp"
#include "flattorus/solvers.hpp"
#include "flattorus/theta.hpp"

namespace flattorus {

const char* to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::hypercubic: return "hypercubic";
    case FamilyKind::random_integer: return "random_integer";
    case FamilyKind::skewed_diagonal: return "skewed_diagonal";
    case FamilyKind::near_dense_projection: return "near_dense_projection";
  }
  return "unknown";
}

FamilyKind parse_family_kind(std::string_view name) {
  for (FamilyKind kind : {FamilyKind::hypercubic, FamilyKind::random_integer,
                          FamilyKind::skewed_diagonal, FamilyKind::near_dense_projection}) {
    if (name == to_string(kind)) return kind;
  }
  throw InvalidArgument("unknown lattice family '" + std::string(name) + "'");
}

std::string family_id(const LatticeFamily& family) {
  std::string id = std::string(to_string(family.kind)) + "-n" + std::to_string(family.n);
  switch (family.kind) {
    case FamilyKind::random_integer:
      id += "-b" + std::to_string(family.entry_bound) + "-seed" + std::to_string(family.seed);
      break;
    case FamilyKind::skewed_diagonal: {
      const double rounded = std::round(family.skew);
      id += "-skew" + (rounded == family.skew ? std::to_string(static_cast<long long>(rounded))
                                              : std::to_string(family.skew));
      break;
    }
    default:
      break;
  }
  return id;
}

Lattice generate(const LatticeFamily& family) {
  const int n = family.n;
  if (n < 1) throw InvalidArgument("generate: dimension must be positive");
  switch (family.kind) {
    case FamilyKind::hypercubic:
      return Lattice::identity(n);

    case FamilyKind::random_integer: {
      if (family.entry_bound < 1) throw InvalidArgument("generate: entry bound must be positive");
      Rng rng(family.seed);
      for (int attempt = 0; attempt < 100; ++attempt) {
        Matrix basis(n, n);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            basis(i, j) = static_cast<double>(rng.integer(-family.entry_bound, family.entry_bound));
          }
        }
        try {
          return Lattice(basis);
        } catch (const DegenerateBasis&) {
        }
      }
      throw DegenerateBasis("generate: no full-rank basis after 100 draws");
    }

    case FamilyKind::skewed_diagonal: {
      if (!std::isfinite(family.skew) || family.skew < 0.0) {
        throw InvalidArgument("generate: skew must be finite and nonnegative");
      }
      Vector entries = Vector::Ones(n);
      for (int i = 1; i < n; ++i) entries(i) = std::exp2(family.skew * i / (n - 1));
      return Lattice::diagonal(entries);
    }

    case FamilyKind::near_dense_projection: {
      Matrix basis = Matrix::Identity(n, n);
      for (int i = 1; i < n; ++i) basis(i, i - 1) = std::numbers::pi;
      return Lattice(basis);
    }
  }
  throw InvalidArgument("generate: unknown family");
}

double aspect_ratio(const Lattice& lattice) {
  const Lattice kz = kz_reduce(lattice);
  return covering_radius(kz, CoveringMode::upper_bound) / svp(kz).length;
}

const char* to_string(PairKind kind) {
  switch (kind) {
    case PairKind::uniform: return "uniform";
    case PairKind::shortest_half: return "shortest_half";
    case PairKind::basis_half: return "basis_half";
    case PairKind::deep_hole: return "deep_hole";
    case PairKind::block_aligned: return "block_aligned";
    case PairKind::last_block: return "last_block";
    case PairKind::small_scale: return "small_scale";
  }
  return "unknown";
}

namespace {

Vector random_direction(Rng& rng, int n) {
  Vector v(n);
  for (;;) {
    for (int i = 0; i < n; ++i) v(i) = rng.uniform(-1.0, 1.0);
    const double norm = v.norm();
    if (norm > 0.1 && norm <= 1.0) return v / norm;
  }
}

Vector uniform_point(Rng& rng, const Matrix& basis) {
  const int n = static_cast<int>(basis.rows());
  Vector coords(n);
  for (int i = 0; i < n; ++i) coords(i) = rng.uniform();
  return basis.transpose() * coords;
}

}  // namespace

std::vector<PointPair> sample_pairs(const Lattice& lattice, std::size_t count,
                                    std::uint64_t seed, const Filtration* filtration) {
  if (count < 1) throw InvalidArgument("sample_pairs: count must be at least 1");
  const int n = lattice.dim();
  Rng rng(seed);
  std::vector<PointPair> pairs;
  const Vector zero = Vector::Zero(n);
  auto add = [&](Vector x, Vector y, PairKind kind) {
    pairs.push_back(PointPair{std::move(x), std::move(y), kind});
  };

  const Lattice reduced = filtration ? filtration->lattice() : kz_reduce(lattice);
  const SvpResult shortest = svp(reduced);
  add(zero, shortest.vector / 2.0, PairKind::shortest_half);
  for (int i = 0; i < n; ++i) add(zero, reduced.row(i) / 2.0, PairKind::basis_half);
  add(zero, reduced.basis().colwise().sum().transpose() / 2.0, PairKind::deep_hole);

  if (filtration) {
    const Matrix& frame = filtration->frame();
    const int m = filtration->size();
    for (int j = 0; j < m; ++j) {
      const int begin = filtration->block_begin(j);
      const int len = filtration->block_end(j) - begin;
      const Matrix rows = frame.middleRows(begin, len);
      const SvpResult block = svp(filtration->block_quotient(j));
      add(zero, rows.transpose() * block.vector / 2.0, PairKind::block_aligned);
      add(zero, rows.transpose() * random_direction(rng, len) * (0.3 * block.length),
          PairKind::block_aligned);
    }
    if (m > 1) {
      const int begin = filtration->block_begin(m - 1);
      const Matrix rows = frame.bottomRows(n - begin);
      const SvpResult block = svp(filtration->block_quotient(m - 1));
      add(zero, rows.transpose() * block.vector / 2.0, PairKind::last_block);
      add(zero, rows.transpose() * random_direction(rng, n - begin) * (0.37 * block.length),
          PairKind::last_block);
    }
  }

  const double scale = shortest.length / std::sqrt(static_cast<double>(n));
  for (const double factor : {0x1p-4, 0x1p-8, 0x1p-12}) {
    const Vector x = uniform_point(rng, lattice.basis());
    add(x, x + random_direction(rng, n) * (factor * scale), PairKind::small_scale);
  }

  if (pairs.size() > count) pairs.resize(count);
  while (pairs.size() < count) {
    Vector x = uniform_point(rng, lattice.basis());
    Vector y = uniform_point(rng, lattice.basis());
    add(std::move(x), std::move(y), PairKind::uniform);
  }
  return pairs;
}

DistortionStats distortion_stats(const std::vector<double>& ratios) {
  DistortionStats stats;
  if (ratios.empty()) return stats;
  for (const double r : ratios) {
    stats.max_expansion = std::max(stats.max_expansion, r);
    stats.max_contraction = std::max(stats.max_contraction,
                                     r > 0.0 ? 1.0 / r : std::numeric_limits<double>::infinity());
  }
  stats.distortion = stats.max_expansion * stats.max_contraction;
  return stats;
}

namespace {

void take_min(std::optional<double>& slot, double value) {
  if (!slot || value < *slot) slot = value;
}

void take_max(std::optional<double>& slot, double value) {
  if (!slot || value > *slot) slot = value;
}

// Scales of one multi-scale embedding at which the small-distance lower
// bound applies: s <= 1 / (2 eta_{1/1000}(L*)).
double small_scale_limit(const Lattice& lattice) {
  return 0.5 / smoothing_parameter_of_dual(lattice, 1e-3);
}

struct Measured {
  double dist = 0.0;
  MultiScaleValue value;
};

Measured measure(const MultiScaleEmbedding& h, const Vector& x, const Vector& y) {
  Measured out;
  out.dist = h.engine().primal().closest_vector(x - y).distance;
  out.value = h.evaluate(x, y);
  return out;
}

void record_multiscale(MeasuredConstants& constants, const MultiScaleEmbedding& h,
                       double small_limit, const Measured& m) {
  if (m.dist < kExcludedDistance) return;
  const GaussianEmbeddingSpec& spec = h.spec();
  const double rank = h.engine().dim();
  const double saturated = std::min(m.dist, std::ldexp(h.lambda1(), spec.k - 1));
  take_min(constants.c_h, rank * m.value.total / (saturated * saturated));
  for (int i = 0; i < spec.k; ++i) {
    const double s = spec.scale(i);
    if (s <= small_limit && m.dist <= s / std::numbers::sqrt2) {
      take_min(constants.c_small, m.value.terms[static_cast<std::size_t>(i)] / (m.dist * m.dist));
    }
  }
}

}  // namespace

DistortionReport run_distortion(const Lattice& lattice, const EmbeddingSpec& spec,
                                std::size_t count, std::uint64_t seed, std::string lattice_id) {
  const int n = lattice.dim();
  require_enumerable(n, "run_distortion");
  DistortionReport report;
  report.lattice_id = std::move(lattice_id);
  report.dim = n;
  report.seed = seed;
  report.spec = resolve_spec(spec, n);
  const ResolvedSpec& rs = report.spec;

  const BuiltFiltration built = build_filtration(lattice, rs.gamma);
  const ComposedEmbedding composed(built.filtration, rs);
  const MultiScaleEmbedding baseline(lattice, rs.k, rs.rel_tol);
  const PreparedLattice prepared(lattice);
  report.cuts = built.filtration.cuts();

  const int m = composed.stages();
  std::vector<double> limits;
  for (int j = 0; j < m; ++j) {
    const MultiScaleEmbedding& h = composed.stage_embedding(j);
    report.stage_lambda1.push_back(h.lambda1());
    limits.push_back(small_scale_limit(h.engine().lattice()));
  }
  const double baseline_limit = small_scale_limit(lattice);

  const std::vector<PointPair> pairs = sample_pairs(lattice, count, seed, &built.filtration);
  report.pair_count = pairs.size();
  std::vector<double> ratios;
  std::vector<double> baseline_ratios;
  MeasuredConstants& constants = report.constants;

  for (const PointPair& pair : pairs) {
    PairRecord record;
    record.kind = pair.kind;
    record.true_dist = torus_dist(prepared, pair.x, pair.y);

    double total_sq = 0.0;
    double stage_sq = 0.0;
    double capped_q = 0.0;
    double capped_p = 0.0;
    for (int j = 0; j < m; ++j) {
      const CompressedProjection& e = composed.projection(j);
      const MultiScaleEmbedding& h = composed.stage_embedding(j);
      const Measured stage = measure(h, e.apply(pair.x), e.apply(pair.y));
      record.stages.push_back(StageRecord{stage.dist, std::sqrt(stage.value.total)});
      total_sq += stage.value.total;
      stage_sq += stage.dist * stage.dist;
      const double cq = std::min(stage.dist, rs.q * rs.q * h.lambda1());
      const double cp = std::min(stage.dist, rs.p_n * h.lambda1());
      capped_q += cq * cq;
      capped_p += cp * cp;
      record_multiscale(constants, h, limits[static_cast<std::size_t>(j)], stage);
    }
    record.embedded_dist = std::sqrt(total_sq);

    const Measured base{record.true_dist, baseline.evaluate(pair.x, pair.y)};
    record.baseline_dist = std::sqrt(base.value.total);
    record_multiscale(constants, baseline, baseline_limit, base);

    if (record.true_dist < kExcludedDistance) {
      ++report.excluded;
    } else {
      const double d2 = record.true_dist * record.true_dist;
      record.ratio = record.embedded_dist / record.true_dist;
      record.baseline_ratio = record.baseline_dist / record.true_dist;
      ratios.push_back(record.ratio);
      baseline_ratios.push_back(record.baseline_ratio);
      take_min(constants.c_e, capped_q / d2);
      take_max(constants.c_e_upper, stage_sq / d2);
      take_min(constants.c_e_lower, capped_p / d2);
    }
    report.pairs.push_back(std::move(record));
  }

  report.composed = distortion_stats(ratios);
  report.baseline = distortion_stats(baseline_ratios);
  return report;
}

}  // namespace flattorus
