#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "flattorus/filtration.hpp"
#include "flattorus/lattice.hpp"
#include "flattorus/theta.hpp"

namespace flattorus {

/// E_j(x) = sum_{i >= j} alpha^{i-j} pi_i(x) for a filtration with blocks
/// numbered from 0.
struct CompressedProjection {
  Filtration filtration;
  double alpha = 0.5;
  int stage = 0;
  /// The map on R^n in ambient coordinates.
  Matrix matrix;
  /// Ambient vector -> coordinates of its image.  For stage 0 these are
  /// ambient coordinates; for later stages the orthonormal GS directions of
  /// the stage's blocks, so the image torus has full rank in its own frame.
  Matrix image_map;

  int image_dim() const { return static_cast<int>(image_map.rows()); }
  Vector apply(const Vector& x) const { return image_map * x; }
};

CompressedProjection compressed_projection(const Filtration& filtration, double alpha, int stage);

/// E_j(L), generated by the images of the basis vectors from the start of
/// block j on.  Throws DegenerateBasis if they are dependent.
Lattice image_lattice(const CompressedProjection& projection);

struct GaussianEmbeddingSpec {
  double base_s = 0.0;
  int k = 1;
  double rel_tol = 1e-9;

  /// s_i = 2^i * base_s for i = 0..k-1.
  double scale(int i) const { return std::ldexp(base_s, i); }
};

/// base_s = lambda_1(L) / (4 sqrt(n)).
GaussianEmbeddingSpec make_gaussian_spec(const Lattice& lattice, int k, double rel_tol = 1e-9);

/// g_s(x) = 1 - rho_s(L - x) / rho_s(L).
GaussianValue gaussian_g_squared(const Lattice& lattice, const Vector& x, double s,
                                 double rel_tol = 1e-9);

/// s^2 * g_s(x - y), the squared distance between the Gaussian embeddings of
/// x and y at width s.
double gaussian_embed_dist_sq(const Lattice& lattice, const TorusPoint& x, const TorusPoint& y,
                              double s, double rel_tol = 1e-9);

struct MultiScaleValue {
  /// s_i^2 g_{s_i}(x - y) for each scale.
  std::vector<double> terms;
  double total = 0.0;
  double error_bound = 0.0;
  int clamped = 0;
};

/// The multi-scale Gaussian embedding of one torus, prepared for repeated use.
class MultiScaleEmbedding {
 public:
  MultiScaleEmbedding(Lattice lattice, int k, double rel_tol = 1e-9);
  MultiScaleEmbedding(Lattice lattice, const GaussianEmbeddingSpec& spec);

  const GaussianEmbeddingSpec& spec() const { return spec_; }
  const ThetaEngine& engine() const { return engine_; }
  double lambda1() const { return lambda1_; }

  MultiScaleValue evaluate(const Vector& x, const Vector& y) const;
  double dist_sq(const Vector& x, const Vector& y) const { return evaluate(x, y).total; }

 private:
  ThetaEngine engine_;
  double lambda1_;
  GaussianEmbeddingSpec spec_;
};

double multi_scale_dist_sq(const Lattice& lattice, const TorusPoint& x, const TorusPoint& y,
                           const GaussianEmbeddingSpec& spec);

/// Tunables of the composed embedding.  Unset values take their defaults for
/// the dimension: gamma = 32 n, p(n) = 1024 n^3, k = ceil(log2 p(n)) + 1.
struct EmbeddingSpec {
  double alpha = 0.5;
  std::optional<double> gamma;
  std::optional<int> k;
  std::optional<double> p_n;
  double rel_tol = 1e-9;
};

struct ResolvedSpec {
  double alpha = 0.5;
  double gamma = 0.0;
  double q = 0.0;
  int k = 1;
  double p_n = 0.0;
  double rel_tol = 1e-9;
};

double default_gamma(int n);
double default_p(int n);
int default_k(double p_n);

/// Fills defaults and checks alpha in [1/2, 1), alpha >= 1/gamma, gamma >= 2,
/// q = gamma sqrt(n) <= gamma^2 / 32, k >= 1, p(n) > 0, rel_tol in (0, 1).
/// Throws InvalidArgument otherwise.
ResolvedSpec resolve_spec(const EmbeddingSpec& spec, int n);

struct StageValue {
  /// dist between E_j(x) and E_j(y) on the image torus.
  double torus_dist = 0.0;
  /// Squared distance after the multi-scale Gaussian embedding of the stage.
  double embedded_sq = 0.0;
  double lambda1 = 0.0;
};

struct ComposedValue {
  std::vector<StageValue> stages;
  double total_sq = 0.0;
};

/// (H o E_0, ..., H o E_{m-1}) with each H built on its image lattice.
class ComposedEmbedding {
 public:
  ComposedEmbedding(const Lattice& lattice, const EmbeddingSpec& spec);
  /// Uses the given filtration instead of building one.
  ComposedEmbedding(Filtration filtration, const ResolvedSpec& spec);

  const ResolvedSpec& spec() const { return spec_; }
  const Filtration& filtration() const { return projections_.front().filtration; }
  int stages() const { return static_cast<int>(projections_.size()); }
  const CompressedProjection& projection(int j) const { return projections_.at(static_cast<std::size_t>(j)); }
  const MultiScaleEmbedding& stage_embedding(int j) const { return embeddings_.at(static_cast<std::size_t>(j)); }

  ComposedValue evaluate(const Vector& x, const Vector& y) const;

 private:
  void build(const Filtration& filtration);

  ResolvedSpec spec_;
  std::vector<CompressedProjection> projections_;
  std::vector<MultiScaleEmbedding> embeddings_;
};

double composed_dist_sq(const Lattice& lattice, const TorusPoint& x, const TorusPoint& y,
                        const EmbeddingSpec& spec);

}  // namespace flattorus
