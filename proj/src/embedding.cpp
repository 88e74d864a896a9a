#include "flattorus/embedding.hpp"

#include <cmath>
#include <string>

namespace flattorus {

CompressedProjection compressed_projection(const Filtration& filtration, double alpha, int stage) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("compressed_projection: alpha must lie in (0, 1)");
  }
  const int m = filtration.size();
  if (stage < 0 || stage >= m) {
    throw IndexOutOfRange("compressed_projection: stage " + std::to_string(stage) +
                          " outside [0, " + std::to_string(m) + ")");
  }
  const int n = filtration.dim();
  const Matrix& frame = filtration.frame();
  const int begin = filtration.block_begin(stage);

  // Weights per GS direction, in the frame.
  Vector weights = Vector::Zero(n);
  for (int j = stage; j < m; ++j) {
    const double w = std::pow(alpha, j - stage);
    for (int t = filtration.block_begin(j); t < filtration.block_end(j); ++t) weights(t) = w;
  }

  CompressedProjection out{filtration, alpha, stage, Matrix(), Matrix()};
  out.matrix = frame.transpose() * weights.asDiagonal() * frame;
  if (stage == 0) {
    out.image_map = out.matrix;
  } else {
    const int rank = n - begin;
    out.image_map = weights.tail(rank).asDiagonal() * frame.bottomRows(rank);
  }
  return out;
}

Lattice image_lattice(const CompressedProjection& projection) {
  const Matrix& basis = projection.filtration.lattice().basis();
  const int rank = projection.image_dim();
  return Lattice(basis.bottomRows(rank) * projection.image_map.transpose());
}

GaussianEmbeddingSpec make_gaussian_spec(const Lattice& lattice, int k, double rel_tol) {
  if (k < 1) throw InvalidArgument("gaussian spec: k must be at least 1");
  GaussianEmbeddingSpec spec;
  spec.base_s = svp(lattice).length / (4.0 * std::sqrt(static_cast<double>(lattice.dim())));
  spec.k = k;
  spec.rel_tol = rel_tol;
  return spec;
}

GaussianValue gaussian_g_squared(const Lattice& lattice, const Vector& x, double s,
                                 double rel_tol) {
  return ThetaEngine(lattice).deficit(x, s, rel_tol);
}

double gaussian_embed_dist_sq(const Lattice& lattice, const TorusPoint& x, const TorusPoint& y,
                              double s, double rel_tol) {
  return s * s * gaussian_g_squared(lattice, x.rep - y.rep, s, rel_tol).value;
}

MultiScaleEmbedding::MultiScaleEmbedding(Lattice lattice, int k, double rel_tol)
    : engine_(std::move(lattice)), lambda1_(engine_.primal().shortest_vector().length) {
  if (k < 1) throw InvalidArgument("multi-scale embedding: k must be at least 1");
  spec_.base_s = lambda1_ / (4.0 * std::sqrt(static_cast<double>(engine_.dim())));
  spec_.k = k;
  spec_.rel_tol = rel_tol;
}

MultiScaleEmbedding::MultiScaleEmbedding(Lattice lattice, const GaussianEmbeddingSpec& spec)
    : engine_(std::move(lattice)),
      lambda1_(engine_.primal().shortest_vector().length),
      spec_(spec) {
  if (spec_.k < 1 || !(spec_.base_s > 0.0)) {
    throw InvalidArgument("multi-scale embedding: need k >= 1 and base_s > 0");
  }
}

MultiScaleValue MultiScaleEmbedding::evaluate(const Vector& x, const Vector& y) const {
  MultiScaleValue out;
  const Vector diff = x - y;
  for (int i = 0; i < spec_.k; ++i) {
    const double s = spec_.scale(i);
    const GaussianValue g = engine_.deficit(diff, s, spec_.rel_tol);
    const double term = s * s * g.value;
    out.terms.push_back(term);
    out.total += term;
    out.error_bound += s * s * g.error_bound;
    out.clamped += g.clamped ? 1 : 0;
  }
  return out;
}

double multi_scale_dist_sq(const Lattice& lattice, const TorusPoint& x, const TorusPoint& y,
                           const GaussianEmbeddingSpec& spec) {
  return MultiScaleEmbedding(lattice, spec).dist_sq(x.rep, y.rep);
}

double default_gamma(int n) { return 32.0 * n; }

// (32 n sqrt(n))^2 in closed form; squaring a rounded root can land just
// above a power of two and shift k by one.
double default_p(int n) { return 1024.0 * n * n * n; }

int default_k(double p_n) {
  if (!(p_n > 0.0)) throw InvalidArgument("p(n) must be positive");
  return static_cast<int>(std::ceil(std::log2(p_n))) + 1;
}

ResolvedSpec resolve_spec(const EmbeddingSpec& spec, int n) {
  if (n < 1) throw InvalidArgument("embedding spec: dimension must be positive");
  ResolvedSpec out;
  out.alpha = spec.alpha;
  out.gamma = spec.gamma.value_or(default_gamma(n));
  out.q = out.gamma * std::sqrt(static_cast<double>(n));
  out.p_n = spec.p_n.value_or(default_p(n));
  out.rel_tol = spec.rel_tol;
  if (!(out.gamma >= 2.0) || !std::isfinite(out.gamma)) {
    throw InvalidArgument("embedding spec: gamma must be >= 2");
  }
  if (!(out.alpha >= 0.5 && out.alpha < 1.0)) {
    throw InvalidArgument("embedding spec: alpha must lie in [1/2, 1)");
  }
  if (out.alpha * out.gamma < 1.0) {
    throw InvalidArgument("embedding spec: alpha must be >= 1/gamma");
  }
  if (out.q > out.gamma * out.gamma / 32.0 * (1.0 + 1e-12)) {
    throw InvalidArgument("embedding spec: q = gamma sqrt(n) exceeds gamma^2/32 (need gamma >= 32 sqrt(n))");
  }
  if (!(out.p_n > 0.0) || !std::isfinite(out.p_n)) {
    throw InvalidArgument("embedding spec: p(n) must be positive");
  }
  out.k = spec.k.value_or(default_k(out.p_n));
  if (out.k < 1 || out.k > 60) throw InvalidArgument("embedding spec: k must lie in [1, 60]");
  if (!(out.rel_tol > 0.0 && out.rel_tol < 1.0)) {
    throw InvalidArgument("embedding spec: rel_tol must lie in (0, 1)");
  }
  return out;
}

ComposedEmbedding::ComposedEmbedding(const Lattice& lattice, const EmbeddingSpec& spec)
    : spec_(resolve_spec(spec, lattice.dim())) {
  build(build_filtration(lattice, spec_.gamma).filtration);
}

ComposedEmbedding::ComposedEmbedding(Filtration filtration, const ResolvedSpec& spec)
    : spec_(spec) {
  build(filtration);
}

void ComposedEmbedding::build(const Filtration& filtration) {
  for (int j = 0; j < filtration.size(); ++j) {
    projections_.push_back(compressed_projection(filtration, spec_.alpha, j));
    embeddings_.emplace_back(image_lattice(projections_.back()), spec_.k, spec_.rel_tol);
  }
}

ComposedValue ComposedEmbedding::evaluate(const Vector& x, const Vector& y) const {
  ComposedValue out;
  for (std::size_t j = 0; j < projections_.size(); ++j) {
    const Vector ex = projections_[j].apply(x);
    const Vector ey = projections_[j].apply(y);
    const MultiScaleEmbedding& h = embeddings_[j];
    StageValue stage;
    stage.torus_dist = h.engine().primal().closest_vector(ex - ey).distance;
    stage.embedded_sq = h.dist_sq(ex, ey);
    stage.lambda1 = h.lambda1();
    out.total_sq += stage.embedded_sq;
    out.stages.push_back(stage);
  }
  return out;
}

double composed_dist_sq(const Lattice& lattice, const TorusPoint& x, const TorusPoint& y,
                        const EmbeddingSpec& spec) {
  return ComposedEmbedding(lattice, spec).evaluate(x.rep, y.rep).total_sq;
}

}  // namespace flattorus
