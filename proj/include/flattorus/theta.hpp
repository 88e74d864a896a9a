#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "flattorus/lattice.hpp"
#include "flattorus/solvers.hpp"

namespace flattorus {

/// Which side of the Poisson summation formula evaluates a Gaussian sum.
/// The primal route enumerates L around the shift; the dual route enumerates
/// L* with the reciprocal width.  `automatic` picks the one with fewer
/// points under the shell-count bound.
enum class ThetaRoute { automatic, primal, dual };

const char* to_string(ThetaRoute route);

struct ThetaResult {
  double value = 0.0;
  /// Certified bound on the mass omitted by truncation.
  double tail_bound = 0.0;
  std::size_t points_enumerated = 0;
  /// Truncation radius on the route that was used.
  double radius = 0.0;
  ThetaRoute route = ThetaRoute::primal;
};

/// 1 - rho_s(L - x) / rho_s(L), clamped to [0, 1].
struct GaussianValue {
  double value = 0.0;
  /// Bound on |value - exact| before clamping.
  double error_bound = 0.0;
  bool clamped = false;
  ThetaRoute route = ThetaRoute::primal;
  std::size_t points_enumerated = 0;
};

/// Values of the deficit below this are treated as zero: no relative accuracy
/// is demanded of them.
inline constexpr double kNegligibleDeficit = 1e-280;

/// Upper bound used to pick routes and refuse hopeless sums.  It applies to
/// the shell-count estimate, which overstates the true count.
inline constexpr double kThetaPointBudget = 5e7;

/// A lattice prepared for repeated Gaussian sums: LLL-reduced primal and dual
/// bases with their Gram-Schmidt data.  Immutable after construction.
class ThetaEngine {
 public:
  explicit ThetaEngine(Lattice lattice);

  const Lattice& lattice() const { return primal_.lattice(); }
  const PreparedLattice& primal() const { return primal_; }
  const PreparedLattice& dual() const { return dual_; }
  int dim() const { return primal_.dim(); }

  /// sum_{v in L} exp(-pi |v + shift|^2 / s^2) with tail_bound <= rel_tol * value.
  ThetaResult sum(const Vector& shift, double s, double rel_tol = 1e-9,
                  ThetaRoute route = ThetaRoute::automatic) const;

  /// The primal sum truncated to the ball of the given radius around -shift,
  /// with the certified tail for that radius.
  ThetaResult sum_with_radius(const Vector& shift, double s, double radius) const;

  /// 1 - rho_s(L - x) / rho_s(L) with relative error at most rel_tol.
  GaussianValue deficit(const Vector& x, double s, double rel_tol = 1e-9,
                        ThetaRoute route = ThetaRoute::automatic) const;

  /// sum_{w in L* \ 0} exp(-pi s^2 |w|^2), so that rho_{1/s}(L*) = 1 + excess.
  double dual_excess(double s, double rel_tol = 1e-9) const;
  /// sum_{v in L \ 0} exp(-pi s^2 |v|^2), the same quantity for the dual lattice.
  double primal_excess(double s, double rel_tol = 1e-9) const;

 private:
  // A prefix of the reduced basis whose GS norms are all far below those of
  // the suffix.  At widths where the prefix is smooth, rho_s(L - x) factors
  // into a nearly constant prefix mass times the quotient sum.
  struct Split {
    int cut = 0;
    Matrix quotient_frame;
    Vector prefix_dual_norms;
    double prefix_dual_lambda = 0.0;
    std::shared_ptr<const ThetaEngine> quotient;
  };

  PreparedLattice primal_;
  PreparedLattice dual_;
  std::vector<Split> splits_;
};

ThetaResult theta_sum(const Lattice& lattice, const Vector& shift, double s,
                      double rel_tol = 1e-9, ThetaRoute route = ThetaRoute::automatic);

/// eta_eps(L) = min { s : rho_{1/s}(L*) <= 1 + eps }.
double smoothing_parameter(const Lattice& lattice, double eps);
/// eta_eps(L*), computed without forming the double dual.
double smoothing_parameter_of_dual(const Lattice& lattice, double eps);

}  // namespace flattorus
