#include "flattorus/solvers.hpp"

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

#include "enumeration.hpp"
#include "flattorus/rng.hpp"

namespace flattorus {

namespace {

// Unevaluated sum hi + lo carrying about 106 bits.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;
};

DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double v = s - a;
  return {s, (a - (s - v)) + (b - v)};
}

DoubleDouble fast_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

DoubleDouble add(DoubleDouble a, DoubleDouble b) {
  DoubleDouble s = two_sum(a.hi, b.hi);
  const DoubleDouble t = two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = fast_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return fast_two_sum(s.hi, s.lo);
}

DoubleDouble mul(DoubleDouble a, DoubleDouble b) {
  const double p = a.hi * b.hi;
  const double e = std::fma(a.hi, b.hi, -p);
  return fast_two_sum(p, e + (a.hi * b.lo + a.lo * b.hi));
}

// Exact when |c| < 2^53.
DoubleDouble product(double c, double b) {
  const double p = c * b;
  return {p, std::fma(c, b, -p)};
}

double magnitude(DoubleDouble a) { return std::abs(a.hi) + std::abs(a.lo); }

}  // namespace

CombinationDistance combination_distance(const Matrix& basis, const IntVector& coeffs,
                                         const Vector& target) {
  // Each double-double addition or multiplication is accurate to a few units
  // of 2^-106 relative to its result; 2^-100 covers that with room to spare.
  const double eps = 0x1p-100;
  DoubleDouble d2;
  double error = 0.0;
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    DoubleDouble component{target(j), 0.0};
    double err = 0.0;
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      if (coeffs(i) == 0 || basis(i, j) == 0.0) continue;
      DoubleDouble p = product(-static_cast<double>(coeffs(i)), basis(i, j));
      if (std::abs(static_cast<double>(coeffs(i))) >= 0x1p53) err += eps * magnitude(p);
      component = add(component, p);
      err += eps * magnitude(component);
    }
    d2 = add(d2, mul(component, component));
    const double c = magnitude(component);
    error += 2.0 * c * err + err * err + eps * c * c;
  }
  error += static_cast<double>(basis.cols()) * eps * magnitude(d2);
  CombinationDistance out;
  out.hi = d2.hi;
  out.lo = d2.lo;
  out.error = error * (1.0 + 1e-12) + 1e-300;
  return out;
}

double compare_distances(const CombinationDistance& a, const CombinationDistance& b) {
  return (a.hi - b.hi) + (a.lo - b.lo);
}

bool tied(const CombinationDistance& a, const CombinationDistance& b) {
  return std::abs(compare_distances(a, b)) <= 2.0 * (a.error + b.error);
}

double squared_distance_to_combination(const Matrix& basis, const IntVector& coeffs,
                                       const Vector& target) {
  return combination_distance(basis, coeffs, target).value();
}

bool lexicographically_less(const IntVector& a, const IntVector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

namespace {

// Collects candidates and keeps those tied with the smallest distance seen.
// Ties are judged against the minimum itself, never against another tie, so
// near-ties cannot chain away from the optimum.
class TieSelector {
 public:
  void offer(IntVector coeffs, const CombinationDistance& d) {
    if (candidates_.empty() || compare_distances(d, min_) < 0.0) {
      min_ = d;
      std::erase_if(candidates_, [&](const auto& c) { return !keep(c.second); });
    }
    if (keep(d)) candidates_.emplace_back(std::move(coeffs), d);
  }

  double min_d2() const { return min_.value(); }

  // Lexicographically smallest coefficients among the ties.
  const std::pair<IntVector, CombinationDistance>& choice() const {
    const auto* best = &candidates_.front();
    for (const auto& c : candidates_) {
      if (lexicographically_less(c.first, best->first)) best = &c;
    }
    return *best;
  }

 private:
  bool keep(const CombinationDistance& d) const {
    return compare_distances(d, min_) <= 0.0 || tied(d, min_);
  }

  CombinationDistance min_;
  std::vector<std::pair<IntVector, CombinationDistance>> candidates_;
};

// Search radius that keeps every tie of `best_d2` inside the ball, with room
// for rounding in the level sums.
double pruning_radius(double best_d2, double scale_sq) {
  return best_d2 * (1.0 + 1e-10) + 1e-24 * scale_sq;
}

void normalize_sign(IntVector& coeffs) {
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    if (coeffs(i) != 0) {
      if (coeffs(i) < 0) coeffs = -coeffs;
      return;
    }
  }
}

}  // namespace

PreparedLattice::PreparedLattice(Lattice lattice)
    : lattice_(std::move(lattice)), reduced_(lll_reduce_with_transform(lattice_)) {}

IntVector PreparedLattice::input_coefficients(
    const std::vector<std::int64_t>& reduced_coeffs) const {
  const auto n = static_cast<Eigen::Index>(reduced_coeffs.size());
  IntVector out = IntVector::Zero(n);
  const IntMatrix& t = reduced_.transform;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::int64_t x = reduced_coeffs[static_cast<std::size_t>(i)];
    if (x != 0) out += x * t.row(i).transpose();
  }
  return out;
}

CvpResult PreparedLattice::closest_vector(const Vector& target) const {
  require_enumerable(dim(), "cvp");
  if (target.size() != dim()) throw InvalidArgument("cvp: target dimension mismatch");
  if (!target.allFinite()) throw InvalidArgument("cvp: non-finite target");
  const GramSchmidtData& gs = reduced_gs();
  const Matrix& input = lattice_.basis();
  const Vector center = detail::gs_coordinates(gs, target);
  const double scale_sq = gs.norms_sq.maxCoeff();

  TieSelector ties;
  {
    IntVector start = input_coefficients(detail::nearest_plane(gs, center));
    const CombinationDistance d = combination_distance(input, start, target);
    ties.offer(std::move(start), d);
  }
  double radius_sq = pruning_radius(ties.min_d2(), scale_sq);
  detail::enumerate_ball(gs, center, radius_sq,
                         [&](const std::vector<std::int64_t>& x, double) {
                           IntVector coeffs = input_coefficients(x);
                           const CombinationDistance d = combination_distance(input, coeffs, target);
                           ties.offer(std::move(coeffs), d);
                           radius_sq = pruning_radius(ties.min_d2(), scale_sq);
                         });
  const auto& [best, best_d] = ties.choice();
  CvpResult result;
  result.coeffs = best;
  result.closest = lattice_.point(best);
  result.distance = std::sqrt(best_d.value());
  return result;
}

SvpResult PreparedLattice::shortest_vector() const {
  require_enumerable(dim(), "svp");
  const GramSchmidtData& gs = reduced_gs();
  const Matrix& input = lattice_.basis();
  const int n = dim();
  const Vector origin = Vector::Zero(n);
  const Vector center = Vector::Zero(n);

  TieSelector ties;
  for (int i = 0; i < n; ++i) {
    std::vector<std::int64_t> unit(static_cast<std::size_t>(n), 0);
    unit[static_cast<std::size_t>(i)] = 1;
    IntVector coeffs = input_coefficients(unit);
    normalize_sign(coeffs);
    ties.offer(coeffs, combination_distance(input, coeffs, origin));
  }
  const double scale_sq = gs.norms_sq.maxCoeff();
  double radius_sq = pruning_radius(ties.min_d2(), scale_sq);
  detail::enumerate_ball(gs, center, radius_sq,
                         [&](const std::vector<std::int64_t>& x, double) {
                           if (std::all_of(x.begin(), x.end(), [](std::int64_t v) { return v == 0; })) {
                             return;
                           }
                           IntVector coeffs = input_coefficients(x);
                           normalize_sign(coeffs);
                           const CombinationDistance d = combination_distance(input, coeffs, origin);
                           ties.offer(std::move(coeffs), d);
                           radius_sq = pruning_radius(ties.min_d2(), scale_sq);
                         });
  const auto& [best, best_d] = ties.choice();
  SvpResult result;
  result.coeffs = best;
  result.vector = lattice_.point(best);
  result.length = std::sqrt(best_d.value());
  return result;
}

std::vector<LatticePoint> PreparedLattice::points_in_ball(const Vector& center,
                                                          double radius,
                                                          std::size_t max_points) const {
  require_enumerable(dim(), "points_in_ball");
  const GramSchmidtData& gs = reduced_gs();
  const Matrix& input = lattice_.basis();
  const Vector center_gs = detail::gs_coordinates(gs, center);
  double radius_sq = radius * radius * (1.0 + 1e-12);
  std::vector<LatticePoint> points;
  detail::enumerate_ball(gs, center_gs, radius_sq,
                         [&](const std::vector<std::int64_t>& x, double) {
                           if (points.size() >= max_points) {
                             throw NonConvergent("points_in_ball: more than " +
                                                 std::to_string(max_points) + " points");
                           }
                           LatticePoint p;
                           p.coeffs = input_coefficients(x);
                           const double d2 = squared_distance_to_combination(input, p.coeffs, center);
                           if (d2 > radius * radius) return;
                           p.distance = std::sqrt(d2);
                           p.point = lattice_.point(p.coeffs);
                           points.push_back(std::move(p));
                         });
  std::sort(points.begin(), points.end(), [](const LatticePoint& a, const LatticePoint& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return lexicographically_less(a.coeffs, b.coeffs);
  });
  return points;
}

std::vector<LatticePoint> PreparedLattice::nearest_points(const Vector& target,
                                                          std::size_t count) const {
  if (count == 0) return {};
  // Grow from the shortest basis vector; the longest one can exceed the
  // needed radius by many orders of magnitude on skewed lattices.
  const double step = reduced_basis().rowwise().norm().minCoeff();
  double radius = closest_vector(target).distance + step;
  for (;;) {
    auto points = points_in_ball(target, radius);
    if (points.size() >= count) {
      points.resize(count);
      return points;
    }
    radius *= 1.5;
  }
}

SvpResult svp(const Lattice& lattice) {
  require_enumerable(lattice.dim(), "svp");
  return PreparedLattice(lattice).shortest_vector();
}

CvpResult cvp(const Lattice& lattice, const Vector& target) {
  require_enumerable(lattice.dim(), "cvp");
  return PreparedLattice(lattice).closest_vector(target);
}

double torus_dist(const PreparedLattice& lattice, const Vector& x, const Vector& y) {
  return lattice.closest_vector(x - y).distance;
}

double torus_dist(const Lattice& lattice, const TorusPoint& x, const TorusPoint& y) {
  return cvp(lattice, x.rep - y.rep).distance;
}

double covering_radius(const Lattice& lattice, CoveringMode mode, int random_samples,
                       std::uint64_t seed) {
  if (mode == CoveringMode::upper_bound) {
    return std::sqrt(lattice.gram_schmidt().norms_sq.sum()) / 2.0;
  }
  const int n = lattice.dim();
  require_enumerable(n, "covering_radius");
  const PreparedLattice prepared(lattice);
  const Matrix& b = lattice.basis();
  double worst = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    Vector target = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) target += 0.5 * b.row(i).transpose();
    }
    worst = std::max(worst, prepared.closest_vector(target).distance);
  }
  Rng rng(seed);
  for (int s = 0; s < random_samples; ++s) {
    Vector target = Vector::Zero(n);
    for (int i = 0; i < n; ++i) target += rng.uniform() * b.row(i).transpose();
    worst = std::max(worst, prepared.closest_vector(target).distance);
  }
  return worst;
}

}  // namespace flattorus
