#pragma once

#include "flattorus/lattice.hpp"

namespace flattorus {

inline constexpr double kDefaultLllDelta = 0.99;

struct LllResult {
  Lattice lattice;
  /// Unimodular integer matrix with reduced basis = transform * input basis.
  IntMatrix transform;
};

/// Size-reduced basis satisfying the Lovasz condition with parameter delta,
/// 0.25 < delta < 1.
LllResult lll_reduce_with_transform(const Lattice& lattice,
                                    double delta = kDefaultLllDelta);
Lattice lll_reduce(const Lattice& lattice, double delta = kDefaultLllDelta);

/// Korkine-Zolotarev reduction: each b'_i is a shortest vector of L / L_{i-1}
/// and |mu_{i,j}| <= 1/2.  A b'_i that is already shortest is kept, so a KZ
/// basis is a fixed point.  Each b'_i has its first nonzero coordinate
/// positive.  Requires n <= kMaxEnumerationDimension.
Lattice kz_reduce(const Lattice& lattice);

/// Unimodular integer matrix whose first row is the primitive vector `row`.
IntMatrix unimodular_completion(const IntVector& row);

/// Largest |mu_{i,j}| over j < i.
double max_abs_mu(const GramSchmidtData& gs);

}  // namespace flattorus
