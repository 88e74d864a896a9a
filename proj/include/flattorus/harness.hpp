#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flattorus/embedding.hpp"
#include "flattorus/filtration.hpp"
#include "flattorus/lattice.hpp"

namespace flattorus {

enum class FamilyKind { hypercubic, random_integer, skewed_diagonal, near_dense_projection };

const char* to_string(FamilyKind kind);
/// Throws InvalidArgument on an unknown name.
FamilyKind parse_family_kind(std::string_view name);

struct LatticeFamily {
  FamilyKind kind = FamilyKind::hypercubic;
  int n = 2;
  /// random_integer: entries drawn from [-entry_bound, entry_bound].
  int entry_bound = 5;
  /// skewed_diagonal: diag(2^{skew * i / (n - 1)}), so the last entry is 2^skew.
  double skew = 0.0;
  std::uint64_t seed = 0;
};

/// Stable identifier such as "skewed_diagonal-n2-skew20".
std::string family_id(const LatticeFamily& family);

/// Deterministic in the family parameters.  random_integer redraws singular
/// matrices up to 100 times, then throws DegenerateBasis.
/// near_dense_projection has rows e_i + pi e_{i-1}, i.e. (1,0), (pi,1) in the plane.
Lattice generate(const LatticeFamily& family);

/// Covering upper bound of the KZ basis over lambda_1, the conditioning
/// figure recorded for each generated lattice.
double aspect_ratio(const Lattice& lattice);

enum class PairKind {
  uniform,
  shortest_half,
  basis_half,
  deep_hole,
  block_aligned,
  last_block,
  small_scale,
};

const char* to_string(PairKind kind);

struct PointPair {
  Vector x;
  Vector y;
  PairKind kind = PairKind::uniform;
};

/// Structured pairs first, then uniform pairs in the fundamental
/// parallelepiped up to `count` in total.  Structured pairs are: (0, v/2)
/// for the shortest vector v, (0, b_i/2) for the KZ basis, the deep-hole
/// candidate (0, sum b_i/2), per-block differences, differences orthogonal to
/// all blocks but the last, and short differences below lambda_1.  Block
/// pairs use `filtration` when given.
std::vector<PointPair> sample_pairs(const Lattice& lattice, std::size_t count,
                                    std::uint64_t seed,
                                    const Filtration* filtration = nullptr);

struct StageRecord {
  double torus_dist = 0.0;
  double embedded_dist = 0.0;
};

struct PairRecord {
  PairKind kind = PairKind::uniform;
  double true_dist = 0.0;
  /// sqrt of the composed squared distance.
  double embedded_dist = 0.0;
  double ratio = 0.0;
  /// The multi-scale embedding of the original torus with the same k.
  double baseline_dist = 0.0;
  double baseline_ratio = 0.0;
  std::vector<StageRecord> stages;
};

/// Worst expansion and contraction over included pairs.  The distortion is
/// their product, an empirical lower bound on the true distortion.
struct DistortionStats {
  double max_expansion = 0.0;
  double max_contraction = 0.0;
  double distortion = 0.0;
};

/// Measured constants; absent when no pair falls in the regime of the bound.
struct MeasuredConstants {
  /// min n_j * |H(x) - H(y)|^2 / min(d_j, 2^{k-1} lambda_1)^2 over stages and
  /// over the baseline.
  std::optional<double> c_h;
  /// min sum_j min(d_j, q^2 lambda_1(E_j L))^2 / d^2.
  std::optional<double> c_e;
  /// max sum_j d_j^2 / d^2.
  std::optional<double> c_e_upper;
  /// min sum_j min(d_j, p(n) lambda_1(E_j L))^2 / d^2.
  std::optional<double> c_e_lower;
  /// min s^2 g_s / d^2 over scales with s <= 1 / (2 eta_{1/1000}(dual)) and
  /// d <= s / sqrt(2).
  std::optional<double> c_small;
};

struct DistortionReport {
  std::string lattice_id;
  int dim = 0;
  std::uint64_t seed = 0;
  ResolvedSpec spec;
  std::vector<int> cuts;
  std::vector<double> stage_lambda1;

  std::size_t pair_count = 0;
  /// Pairs with true distance below kExcludedDistance, kept out of the ratios.
  std::size_t excluded = 0;
  std::vector<PairRecord> pairs;

  DistortionStats composed;
  DistortionStats baseline;
  MeasuredConstants constants;
};

inline constexpr double kExcludedDistance = 1e-12;

/// Samples pairs (with the filtration of the composed embedding) and measures
/// the composed embedding against the exact torus distance, with the plain
/// multi-scale embedding as baseline.  A pure function of its arguments.
DistortionReport run_distortion(const Lattice& lattice, const EmbeddingSpec& spec,
                                std::size_t count, std::uint64_t seed,
                                std::string lattice_id = "lattice");

/// Recomputes the aggregate statistics from per-pair ratios.
DistortionStats distortion_stats(const std::vector<double>& ratios);

}  // namespace flattorus
