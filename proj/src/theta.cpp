#include "flattorus/theta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "enumeration.hpp"

namespace flattorus {

const char* to_string(ThetaRoute route) {
  switch (route) {
    case ThetaRoute::automatic: return "automatic";
    case ThetaRoute::primal: return "primal";
    case ThetaRoute::dual: return "dual";
  }
  return "unknown";
}

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogBudget = std::log(kThetaPointBudget);
constexpr double kEpsilon = std::numeric_limits<double>::epsilon();
// log(2^-1075)
constexpr double kLogHalfLeastSubnormal = -1075.0 * std::numbers::ln2;
// GS norm ratio between a prefix and the rest that makes a split worth keeping.
constexpr double kSplitGap = 16.0;
// Estimated point count above which the split route is tried first.
constexpr double kHybridThreshold = 2e4;

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

Vector reduced_norms(const PreparedLattice& p) { return p.reduced_gs().norms_sq.cwiseSqrt(); }

// Any ball of radius r contains at most prod_i (1 + 2r/|b'_i|) lattice points:
// level i of the enumeration tree admits at most that many integers.
double log_count_bound(const Vector& norms, double r) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < norms.size(); ++i) sum += std::log1p(2.0 * r / norms(i));
  return sum;
}

// Log of a bound on sum exp(-pi (d^2 - ref^2) / width^2) over lattice points
// at distance d > radius from an arbitrary center.  Shell k covers
// (radius + k h, radius + (k+1) h] with h = width / 2 and is charged
// count(radius + (k+1) h) points at its inner distance.  Consecutive term
// ratios decrease, so once one drops to 1/2 the rest is a geometric series.
double log_tail_bound(const Vector& norms, double radius, double ref, double width) {
  const double h = width / 2.0;
  const double w2 = width * width;
  auto log_term = [&](int k) {
    const double inner = radius + k * h;
    return log_count_bound(norms, inner + h) - kPi * (inner - ref) * (inner + ref) / w2;
  };
  double previous = log_term(0);
  double log_sum = previous;
  for (int k = 1; k < 100000; ++k) {
    const double next = log_term(k);
    const double log_ratio = next - previous;
    if (log_ratio <= -std::numbers::ln2) {
      return log_add(log_sum, next - std::log1p(-std::exp(log_ratio)));
    }
    log_sum = log_add(log_sum, next);
    previous = next;
  }
  return kInf;
}

struct Plan {
  double radius = 0.0;
  double log_tail = 0.0;
  double log_count = 0.0;
};

// Smallest radius on a grid of step width/2 above `ref` whose tail meets the
// target.  The count estimate is taken at radius + extra, the radius that
// will actually be enumerated.
std::optional<Plan> plan_radius(const Vector& norms, double ref, double width,
                                double log_target, double extra = 0.0) {
  const double h = width / 2.0;
  const double cap = 64.0 * width * std::sqrt(static_cast<double>(norms.size()));
  for (int step = 1;; ++step) {
    const double radius = ref + step * h;
    if (radius - ref > cap) return std::nullopt;
    const double lt = log_tail_bound(norms, radius, ref, width);
    if (lt <= log_target) {
      return Plan{radius, lt, log_count_bound(norms, radius + extra)};
    }
  }
}

bool affordable(const std::optional<Plan>& plan) {
  return plan && plan->log_count <= kLogBudget;
}

template <class F>
std::size_t enumerate(const PreparedLattice& p, const Vector& center, double radius, F&& f) {
  const GramSchmidtData& gs = p.reduced_gs();
  const Vector c = detail::gs_coordinates(gs, center);
  double radius_sq = radius * radius;
  std::size_t count = 0;
  detail::enumerate_ball(gs, c, radius_sq,
                         [&](const std::vector<std::int64_t>& x, double d2) {
                           ++count;
                           f(x, d2);
                         });
  return count;
}

// <sum_i x_i b_i, y> for the reduced basis, from precomputed <b_i, y>.
struct LinearForm {
  Vector dots;
  LinearForm(const PreparedLattice& p, const Vector& y) : dots(p.reduced_basis() * y) {}
  double operator()(const std::vector<std::int64_t>& x) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum += static_cast<double>(x[i]) * dots(static_cast<Eigen::Index>(i));
    }
    return sum;
  }
};

std::optional<Plan> primal_plan(const PreparedLattice& p, double d0, double s, double rel_tol) {
  return plan_radius(reduced_norms(p), d0, s, std::log(rel_tol));
}

ThetaResult primal_sum(const PreparedLattice& p, const Vector& shift, double s, double d0,
                       const Plan& plan) {
  const Vector center = -shift;
  const double s2 = s * s;
  const double d0_sq = d0 * d0;
  double scaled = 0.0;
  ThetaResult result;
  result.points_enumerated = enumerate(p, center, plan.radius,
                                       [&](const std::vector<std::int64_t>&, double d2) {
                                         scaled += std::exp(-kPi * (d2 - d0_sq) / s2);
                                       });
  const double log_scale = -kPi * d0_sq / s2;
  result.value = scaled * std::exp(log_scale);
  result.tail_bound = std::exp(plan.log_tail + log_scale);
  result.radius = plan.radius;
  result.route = ThetaRoute::primal;
  return result;
}

// rho_s(L + shift) = s^n / det(L) * sum_{w in L*} rho_{1/s}(w) cos(2 pi <w, shift>).
std::optional<ThetaResult> dual_sum(const PreparedLattice& dual, double log_det_primal,
                                    const Vector& shift, double s, double rel_tol) {
  const Vector norms = reduced_norms(dual);
  const LinearForm phase(dual, shift);
  const double s2 = s * s;
  const double log_prefactor = dual.dim() * std::log(s) - log_det_primal;
  double log_target = std::log(rel_tol / 2.0);
  for (int attempt = 0; attempt < 8; ++attempt) {
    const auto plan = plan_radius(norms, 0.0, 1.0 / s, log_target);
    if (!affordable(plan)) return std::nullopt;
    double sum = 0.0;
    const std::size_t count = enumerate(
        dual, Vector::Zero(dual.dim()), plan->radius,
        [&](const std::vector<std::int64_t>& x, double d2) {
          sum += std::exp(-kPi * s2 * d2) * std::cos(2.0 * kPi * phase(x));
        });
    const double tail = std::exp(plan->log_tail);
    if (tail <= rel_tol * sum) {
      ThetaResult result;
      result.value = std::exp(log_prefactor) * sum;
      result.tail_bound = std::exp(log_prefactor) * tail;
      result.points_enumerated = count;
      result.radius = plan->radius;
      result.route = ThetaRoute::dual;
      return result;
    }
    log_target = sum > 0.0 ? std::log(rel_tol * sum / 2.0) : log_target - 20.0;
  }
  return std::nullopt;
}

void check_width(double s, double rel_tol) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("theta: width must be positive");
  if (!(rel_tol > 0.0) || !(rel_tol < 1.0)) {
    throw InvalidArgument("theta: rel_tol must lie in (0, 1)");
  }
}

void check_vector(const Vector& v, int dim, const char* what) {
  if (v.size() != dim) throw InvalidArgument(std::string(what) + ": dimension mismatch");
  if (!v.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite vector");
}

// sum_{v in M \ 0} exp(-pi s^2 |v|^2), directly when few points are needed
// and otherwise through Poisson summation over the dual of M.
double excess_mass(const PreparedLattice& m, const PreparedLattice& m_dual, double s,
                   double rel_tol) {
  check_width(s, rel_tol);
  const double shortest = m.shortest_vector().length;
  const auto direct = plan_radius(reduced_norms(m), shortest, 1.0 / s, std::log(rel_tol));
  if (affordable(direct)) {
    double sum = 0.0;
    const double s2 = s * s;
    enumerate(m, Vector::Zero(m.dim()), direct->radius,
              [&](const std::vector<std::int64_t>& x, double d2) {
                for (std::int64_t c : x) {
                  if (c != 0) {
                    sum += std::exp(-kPi * s2 * d2);
                    return;
                  }
                }
              });
    return sum;
  }
  // rho_{1/s}(M) = s^{-n} / det(M) * rho_s(M*).
  const auto plan = primal_plan(m_dual, 0.0, s, rel_tol);
  if (!affordable(plan)) throw NonConvergent("excess mass: both routes exceed the point budget");
  const ThetaResult theta = primal_sum(m_dual, Vector::Zero(m.dim()), s, 0.0, *plan);
  const double log_det_m = std::log(m.lattice().determinant());
  return std::exp(-m.dim() * std::log(s) - log_det_m) * theta.value - 1.0;
}

template <class Excess>
double smoothing_search(Excess excess, double eps, double start) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidArgument("smoothing_parameter: eps must be positive");
  }
  double lo = start;
  double hi = start;
  if (excess(start) > eps) {
    for (int i = 0; excess(hi) > eps; ++i) {
      if (i > 200) throw NonConvergent("smoothing_parameter: no upper bracket");
      lo = hi;
      hi *= 2.0;
    }
  } else {
    for (int i = 0; excess(lo) <= eps; ++i) {
      if (i > 200) throw NonConvergent("smoothing_parameter: no lower bracket");
      hi = lo;
      lo /= 2.0;
    }
  }
  // excess(lo) > eps >= excess(hi); the excess is decreasing in s.
  for (int i = 0; i < 400; ++i) {
    const double mid = std::sqrt(lo * hi);
    const double e = excess(mid);
    if (std::abs(e / eps - 1.0) <= 1e-6) return mid;
    if (mid <= lo || mid >= hi) break;
    (e > eps ? lo : hi) = mid;
  }
  throw NonConvergent("smoothing_parameter: bisection did not reach the tolerance");
}

}  // namespace

ThetaEngine::ThetaEngine(Lattice lattice)
    : primal_(std::move(lattice)), dual_(dual_lattice(primal_.lattice())) {
  require_enumerable(primal_.dim(), "theta");
  const int n = dim();
  const Vector norms = reduced_norms(primal_);
  Matrix frame;
  for (int cut = 1; cut < n; ++cut) {
    const double prefix_max = norms.head(cut).maxCoeff();
    if (norms.tail(n - cut).minCoeff() < kSplitGap * prefix_max) continue;
    if (frame.size() == 0) frame = orthonormal_frame(primal_.reduced_gs());
    Split split;
    split.cut = cut;
    split.quotient_frame = frame.bottomRows(n - cut);
    // The reversed dual basis of the prefix has GS norms 1/|b'_i|, so no
    // nonzero dual vector is shorter than 1 / max |b'_i|.
    split.prefix_dual_norms = norms.head(cut).cwiseInverse();
    split.prefix_dual_lambda = 1.0 / prefix_max;
    split.quotient = std::make_shared<const ThetaEngine>(
        quotient_lattice(Lattice(primal_.reduced_basis()), cut));
    splits_.push_back(std::move(split));
  }
}

ThetaResult ThetaEngine::sum(const Vector& shift, double s, double rel_tol,
                             ThetaRoute route) const {
  check_width(s, rel_tol);
  check_vector(shift, dim(), "theta_sum");
  const double d0 = primal_.closest_vector(-shift).distance;
  if (route != ThetaRoute::dual) {
    // Every point lies at distance >= d0; when the whole shell sum from d0 is
    // below half the least subnormal, the correctly rounded value is 0.
    const double log_far = log_tail_bound(reduced_norms(primal_), d0 * (1.0 - 1e-12), 0.0, s);
    if (log_far < kLogHalfLeastSubnormal) {
      ThetaResult out;
      out.radius = d0;
      return out;
    }
  }
  std::optional<Plan> primal;
  if (route != ThetaRoute::dual) primal = primal_plan(primal_, d0, s, rel_tol);
  if (route == ThetaRoute::primal) {
    if (!affordable(primal)) throw NonConvergent("theta_sum: primal route exceeds its cap");
    return primal_sum(primal_, shift, s, d0, *primal);
  }
  if (route == ThetaRoute::automatic && affordable(primal)) {
    const auto dual_estimate =
        plan_radius(reduced_norms(dual_), 0.0, 1.0 / s, std::log(rel_tol / 2.0));
    if (!dual_estimate || primal->log_count <= dual_estimate->log_count) {
      return primal_sum(primal_, shift, s, d0, *primal);
    }
  }
  const double log_det = std::log(lattice().determinant());
  if (auto result = dual_sum(dual_, log_det, shift, s, rel_tol)) return *result;
  if (route == ThetaRoute::automatic && affordable(primal)) {
    return primal_sum(primal_, shift, s, d0, *primal);
  }
  throw NonConvergent("theta_sum: no route meets the tolerance within the point budget");
}

ThetaResult ThetaEngine::sum_with_radius(const Vector& shift, double s, double radius) const {
  check_width(s, 0.5);
  check_vector(shift, dim(), "theta_sum");
  const double d0 = primal_.closest_vector(-shift).distance;
  if (!(radius >= d0)) throw InvalidArgument("theta_sum: radius below the nearest point");
  const Vector norms = reduced_norms(primal_);
  const Plan plan{radius, log_tail_bound(norms, radius, d0, s), log_count_bound(norms, radius)};
  if (plan.log_count > kLogBudget) throw NonConvergent("theta_sum: radius exceeds the point budget");
  return primal_sum(primal_, shift, s, d0, plan);
}

GaussianValue ThetaEngine::deficit(const Vector& x, double s, double rel_tol,
                                   ThetaRoute route) const {
  check_width(s, rel_tol);
  check_vector(x, dim(), "gaussian deficit");
  const CvpResult nearest = primal_.closest_vector(x);
  GaussianValue out;
  if (nearest.distance == 0.0) return out;
  // After reduction the origin is a closest lattice point to y.
  const Vector y = x - nearest.closest;
  const double y_norm = y.norm();
  const double y_sq = y.squaredNorm();
  const double s2 = s * s;
  const Vector primal_norms = reduced_norms(primal_);
  const Vector dual_norms = reduced_norms(dual_);

  if (route != ThetaRoute::dual) {
    // Every point of L - y lies at distance >= |y|, while rho_s(L) >= 1, so
    // the ratio is bounded by the whole-lattice shell sum from |y|.
    const double log_far = log_tail_bound(primal_norms, y_norm * (1.0 - 1e-12), 0.0, s);
    if (log_far <= std::log(rel_tol / 2.0)) {
      out.value = 1.0;
      out.error_bound = std::exp(log_far);
      return out;
    }
    // Separate sums around 0 and around y; accurate once the ratio is <= 1/2.
    if (y_norm >= 0.6 * s) {
      const auto plan_a = plan_radius(primal_norms, 0.0, s, std::log(rel_tol / 4.0));
      const auto plan_b = plan_radius(primal_norms, y_norm, s, std::log(rel_tol / 4.0));
      if (affordable(plan_a) && affordable(plan_b)) {
        double a = 0.0;
        double b_scaled = 0.0;
        std::size_t count = enumerate(primal_, Vector::Zero(dim()), plan_a->radius,
                                      [&](const std::vector<std::int64_t>&, double d2) {
                                        a += std::exp(-kPi * d2 / s2);
                                      });
        count += enumerate(primal_, y, plan_b->radius,
                           [&](const std::vector<std::int64_t>&, double d2) {
                             b_scaled += std::exp(-kPi * (d2 - y_sq) / s2);
                           });
        const double ratio = b_scaled * std::exp(-kPi * y_sq / s2) / a;
        if (ratio <= 0.5) {
          out.value = 1.0 - ratio;
          out.error_bound = ratio * (rel_tol / 2.0) + 4.0 * kEpsilon;
          out.points_enumerated = count;
          return out;
        }
      }
    }
  }

  auto try_split = [&]() -> std::optional<GaussianValue> {
    for (const Split& split : splits_) {
      // Bound on the prefix dual mass beyond the origin; each prefix coset
      // sum then lies within a factor (1 +- delta) of its volume term.
      const double log_delta = log_tail_bound(
          split.prefix_dual_norms, split.prefix_dual_lambda * (1.0 - 1e-9), 0.0, 1.0 / s);
      if (log_delta > std::log(1e-3)) continue;
      GaussianValue inner = split.quotient->deficit(split.quotient_frame * y, s, rel_tol / 2.0);
      const double error = inner.error_bound + 3.0 * std::exp(log_delta);
      if (error <= rel_tol * inner.value || error <= kNegligibleDeficit) {
        inner.error_bound = error;
        return inner;
      }
    }
    return std::nullopt;
  };

  double log_target = std::log(rel_tol / 3.0);
  if (route == ThetaRoute::automatic && !splits_.empty()) {
    const auto primal = plan_radius(primal_norms, 0.0, s, log_target, y_norm / 2.0);
    const auto dual = plan_radius(dual_norms, 0.0, 1.0 / s, log_target);
    double cheapest = kInf;
    if (primal) cheapest = primal->log_count;
    if (dual) cheapest = std::min(cheapest, dual->log_count);
    if (cheapest > std::log(kHybridThreshold)) {
      if (auto value = try_split()) return *value;
    }
  }

  const LinearForm primal_phase(primal_, y);
  const LinearForm dual_phase(dual_, y);
  const double log_floor = std::log(kNegligibleDeficit / 3.0) - 1.0;
  bool dual_locked = route == ThetaRoute::dual;
  for (int attempt = 0; attempt < 24; ++attempt) {
    std::optional<Plan> primal;
    std::optional<Plan> dual;
    if (!dual_locked) primal = plan_radius(primal_norms, 0.0, s, log_target, y_norm / 2.0);
    if (route != ThetaRoute::primal) dual = plan_radius(dual_norms, 0.0, 1.0 / s, log_target);
    bool use_primal;
    if (route == ThetaRoute::primal) {
      use_primal = true;
    } else if (dual_locked) {
      use_primal = false;
    } else {
      use_primal = affordable(primal) && (!affordable(dual) || primal->log_count <= dual->log_count);
    }
    const std::optional<Plan>& plan = use_primal ? primal : dual;
    if (!affordable(plan)) {
      if (attempt > 0) break;
      throw NonConvergent("gaussian deficit: no route meets the tolerance within the point budget");
    }

    double num = 0.0;
    double den = 0.0;
    double rounding = 0.0;
    std::size_t count = 0;
    if (use_primal) {
      // Pair each v with v - y: the ball around y/2 covers radius R around
      // both 0 and y, and e^a - e^b is formed without cancellation.
      count = enumerate(primal_, y / 2.0, plan->radius + y_norm / 2.0,
                        [&](const std::vector<std::int64_t>& c, double d2) {
                          const double vy = primal_phase(c);
                          const double a = -kPi * (d2 + vy - y_sq / 4.0) / s2;
                          const double gap = kPi * (y_sq - 2.0 * vy) / s2;
                          const double b = a - gap;
                          const double diff = a >= b ? -std::exp(a) * std::expm1(b - a)
                                                     : std::exp(b) * std::expm1(a - b);
                          num += diff;
                          den += std::exp(a);
                          rounding += std::abs(diff) * (4.0 + std::abs(a)) +
                                      4.0 * std::exp(b) * kPi * (y_sq + 2.0 * std::abs(vy)) / s2;
                        });
      rounding *= kEpsilon;
    } else {
      count = enumerate(dual_, Vector::Zero(dim()), plan->radius,
                        [&](const std::vector<std::int64_t>& c, double d2) {
                          const double weight = std::exp(-kPi * s2 * d2);
                          const double sine = std::sin(kPi * dual_phase(c));
                          num += 2.0 * weight * sine * sine;
                          den += weight;
                        });
    }
    const double tail = std::exp(plan->log_tail);
    const double g = num / den;
    rounding /= den;
    const double error = (2.0 * tail + std::abs(g) * tail) / den + rounding;
    out.value = g;
    out.error_bound = error;
    out.route = use_primal ? ThetaRoute::primal : ThetaRoute::dual;
    out.points_enumerated = count;
    if (error <= rel_tol * g || error <= kNegligibleDeficit) break;
    if (use_primal && rounding > rel_tol * g / 2.0) {
      // Cancellation, not truncation, limits the primal sum.
      if (route == ThetaRoute::automatic) {
        if (auto value = try_split()) return *value;
      }
      if (route == ThetaRoute::automatic && affordable(dual)) {
        dual_locked = true;
        continue;
      }
      break;
    }
    if (log_target <= log_floor) break;
    log_target = g > 0.0 ? std::log(rel_tol * g / 3.0) - 1.0 : log_target - 40.0;
    log_target = std::max(log_target, log_floor);
  }
  if (out.value < 0.0 || out.value > 1.0) {
    out.clamped = true;
    out.value = std::clamp(out.value, 0.0, 1.0);
  }
  return out;
}

double ThetaEngine::dual_excess(double s, double rel_tol) const {
  return excess_mass(dual_, primal_, s, rel_tol);
}

double ThetaEngine::primal_excess(double s, double rel_tol) const {
  return excess_mass(primal_, dual_, s, rel_tol);
}

ThetaResult theta_sum(const Lattice& lattice, const Vector& shift, double s, double rel_tol,
                      ThetaRoute route) {
  return ThetaEngine(lattice).sum(shift, s, rel_tol, route);
}

double smoothing_parameter(const Lattice& lattice, double eps) {
  const ThetaEngine engine(lattice);
  const double start = 1.0 / engine.dual().shortest_vector().length;
  return smoothing_search([&](double s) { return engine.dual_excess(s); }, eps, start);
}

double smoothing_parameter_of_dual(const Lattice& lattice, double eps) {
  const ThetaEngine engine(lattice);
  const double start = 1.0 / engine.primal().shortest_vector().length;
  return smoothing_search([&](double s) { return engine.primal_excess(s); }, eps, start);
}

}  // namespace flattorus
