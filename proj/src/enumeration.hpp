#pragma once

// Fincke-Pohst enumeration with Schnorr-Euchner zig-zag ordering.
//
// For x in Z^n and a target t with Gram-Schmidt coordinates c
// (t = sum_i c_i b'_i), the squared distance decomposes level by level:
//
//   |t - sum_k x_k b_k|^2 = sum_i |b'_i|^2 (c_i - x_i - sum_{k>i} x_k mu_{k,i})^2
//
// Levels are fixed from n-1 down to 0; a subtree is pruned as soon as the
// partial sum exceeds the current radius.  The visitor may shrink the radius.

#include <cmath>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "flattorus/lattice.hpp"

namespace flattorus::detail {

/// GS coordinates of an ambient vector with respect to `gs`.
inline Vector gs_coordinates(const GramSchmidtData& gs, const Vector& v) {
  Vector c(gs.dim());
  for (int i = 0; i < gs.dim(); ++i) {
    c(i) = gs.ortho.row(i).dot(v) / gs.norms_sq(i);
  }
  return c;
}

template <class Visit>
class BallEnumeration {
 public:
  BallEnumeration(const GramSchmidtData& gs, const Vector& center, double& radius_sq,
                  Visit& visit)
      : gs_(gs),
        center_(center),
        radius_sq_(radius_sq),
        visit_(visit),
        n_(gs.dim()),
        coeffs_(static_cast<std::size_t>(n_), 0),
        partial_(static_cast<std::size_t>(n_) + 1, 0.0) {}

  void run() {
    if (radius_sq_ < 0.0) return;
    level(n_ - 1);
  }

 private:
  bool try_value(int i, std::int64_t value, double level_center) {
    const double d = static_cast<double>(value) - level_center;
    const double total = partial_[static_cast<std::size_t>(i) + 1] + d * d * gs_.norms_sq(i);
    if (total > radius_sq_) return false;
    coeffs_[static_cast<std::size_t>(i)] = value;
    partial_[static_cast<std::size_t>(i)] = total;
    if (i == 0) {
      visit_(coeffs_, total);
    } else {
      level(i - 1);
    }
    return true;
  }

  void level(int i) {
    double level_center = center_(i);
    for (int k = i + 1; k < n_; ++k) {
      level_center -= static_cast<double>(coeffs_[static_cast<std::size_t>(k)]) * gs_.mu(k, i);
    }
    const auto nearest = static_cast<std::int64_t>(std::llround(level_center));
    try_value(i, nearest, level_center);
    const bool up_first = level_center >= static_cast<double>(nearest);
    bool up_open = true;
    bool down_open = true;
    for (std::int64_t step = 1; up_open || down_open; ++step) {
      if (up_first) {
        if (up_open) up_open = try_value(i, nearest + step, level_center);
        if (down_open) down_open = try_value(i, nearest - step, level_center);
      } else {
        if (down_open) down_open = try_value(i, nearest - step, level_center);
        if (up_open) up_open = try_value(i, nearest + step, level_center);
      }
    }
  }

  const GramSchmidtData& gs_;
  const Vector& center_;
  double& radius_sq_;
  Visit& visit_;
  int n_;
  std::vector<std::int64_t> coeffs_;
  std::vector<double> partial_;
};

/// Calls visit(coeffs, dist_sq) for every x with |t - sum x_k b_k|^2 <=
/// radius_sq, where `center_gs` holds t's GS coordinates.  The radius is read
/// on every branch, so the visitor may tighten it.
template <class Visit>
void enumerate_ball(const GramSchmidtData& gs, const Vector& center_gs, double& radius_sq,
                    Visit&& visit) {
  BallEnumeration<std::remove_reference_t<Visit>> e(gs, center_gs, radius_sq, visit);
  e.run();
}

/// Babai's nearest-plane coefficients for a target with GS coordinates c.
inline std::vector<std::int64_t> nearest_plane(const GramSchmidtData& gs, const Vector& c) {
  const int n = gs.dim();
  std::vector<std::int64_t> x(static_cast<std::size_t>(n), 0);
  for (int i = n - 1; i >= 0; --i) {
    double level_center = c(i);
    for (int k = i + 1; k < n; ++k) {
      level_center -= static_cast<double>(x[static_cast<std::size_t>(k)]) * gs.mu(k, i);
    }
    x[static_cast<std::size_t>(i)] = std::llround(level_center);
  }
  return x;
}

}  // namespace flattorus::detail
