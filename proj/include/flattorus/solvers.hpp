#pragma once

#include <cstdint>
#include <vector>

#include "flattorus/lattice.hpp"
#include "flattorus/reduction.hpp"

namespace flattorus {

struct CvpResult {
  Vector closest;
  double distance = 0.0;
  /// Coordinates of `closest` in the input basis.
  IntVector coeffs;
};

struct SvpResult {
  Vector vector;
  double length = 0.0;
  IntVector coeffs;
};

struct LatticePoint {
  Vector point;
  double distance = 0.0;
  IntVector coeffs;
};

/// |target - sum coeffs_i b_i|^2 evaluated in quadruple precision and kept
/// as the unevaluated sum hi + lo, with a bound on its rounding error.
struct CombinationDistance {
  double hi = 0.0;
  double lo = 0.0;
  double error = 0.0;

  double value() const { return hi + lo; }
};

CombinationDistance combination_distance(const Matrix& basis, const IntVector& coeffs,
                                         const Vector& target);

/// Sign of a - b computed without cancellation loss.
double compare_distances(const CombinationDistance& a, const CombinationDistance& b);

/// The tie rule: two distances tie when they differ by no more than their
/// rounding error bounds.  Among tied closest points the lexicographically
/// smallest coefficient vector wins.
bool tied(const CombinationDistance& a, const CombinationDistance& b);

/// combination_distance rounded to double.
double squared_distance_to_combination(const Matrix& basis, const IntVector& coeffs,
                                       const Vector& target);

bool lexicographically_less(const IntVector& a, const IntVector& b);

/// A lattice together with an LLL-reduced basis and its Gram-Schmidt data,
/// for repeated exact enumeration queries.  Immutable after construction.
class PreparedLattice {
 public:
  explicit PreparedLattice(Lattice lattice);

  const Lattice& lattice() const { return lattice_; }
  int dim() const { return lattice_.dim(); }
  const Matrix& reduced_basis() const { return reduced_.lattice.basis(); }
  const GramSchmidtData& reduced_gs() const { return reduced_.lattice.gram_schmidt(); }
  const IntMatrix& transform() const { return reduced_.transform; }

  /// Exact closest vector; ties broken toward the lexicographically smallest
  /// coefficient vector.
  CvpResult closest_vector(const Vector& target) const;

  /// Exact shortest nonzero vector; the coefficient vector has its first
  /// nonzero entry positive and is lexicographically smallest among ties.
  SvpResult shortest_vector() const;

  /// All lattice points within `radius` of `center`, sorted by distance then
  /// coefficients.  Throws NonConvergent if more than `max_points` qualify.
  std::vector<LatticePoint> points_in_ball(const Vector& center, double radius,
                                           std::size_t max_points = 5'000'000) const;

  /// The `count` lattice points nearest to `target` (ties as in cvp).
  std::vector<LatticePoint> nearest_points(const Vector& target, std::size_t count) const;

  IntVector input_coefficients(const std::vector<std::int64_t>& reduced_coeffs) const;

 private:
  Lattice lattice_;
  LllResult reduced_;
};

SvpResult svp(const Lattice& lattice);
CvpResult cvp(const Lattice& lattice, const Vector& target);

/// dist(x - y, L).
double torus_dist(const Lattice& lattice, const TorusPoint& x, const TorusPoint& y);
double torus_dist(const PreparedLattice& lattice, const Vector& x, const Vector& y);

enum class CoveringMode { upper_bound, sampled };

/// `upper_bound`: sqrt(sum |b'_i|^2) / 2 for the basis as given.
/// `sampled`: the largest cvp distance over all half-integer corners of the
/// fundamental parallelepiped plus `random_samples` uniform targets; a lower
/// bound on the covering radius.
double covering_radius(const Lattice& lattice, CoveringMode mode, int random_samples = 64,
                       std::uint64_t seed = 0);

}  // namespace flattorus
