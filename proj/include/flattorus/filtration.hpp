#pragma once

#include <vector>

#include "flattorus/lattice.hpp"

namespace flattorus {

struct FiltrationParams {
  double gamma = 2.0;
  double q = 1.0;
};

/// Throws InvalidArgument unless gamma > 1 and q >= 1.
void check_params(const FiltrationParams& params);

/// Cut indices from the scan rule applied to GS norms: block j extends while
/// every norm in it is <= gamma times the first norm of the block (equality
/// included), taking the largest such extension.
std::vector<int> coarsen_cuts(const Vector& gs_norms, double gamma);

struct BuiltFiltration {
  Filtration filtration;
  FiltrationParams params;
};

/// KZ-reduces the lattice and coarsens its GS norms with the scan rule.
/// The parameters are (gamma * sqrt(n), gamma).
BuiltFiltration build_filtration(const Lattice& lattice, double gamma);

struct BlockCheck {
  /// Property 1: covering upper bound of the block quotient against
  /// q * lambda_1 / 2.
  double covering_upper = 0.0;
  double lambda1 = 0.0;
  double covering_ratio = 0.0;  // covering_upper / lambda1
  bool covering_ok = false;
  /// Property 2 against the next block: lambda_1(next) / lambda_1(this).
  /// Absent (0, true) for the last block.
  double growth_ratio = 0.0;
  bool growth_ok = true;
};

struct FiltrationValidation {
  std::vector<BlockCheck> blocks;
  bool valid = true;
};

/// Checks both filtration properties block by block; each comparison allows
/// a relative slack of kNumericTolerance.
FiltrationValidation validate_filtration(const Filtration& filtration,
                                         const FiltrationParams& params);

struct PrefixBound {
  /// q * lambda_1 of block j.
  double bound = 0.0;
  /// Covering upper bound of the sublattice through block j.
  double covering_upper = 0.0;
  bool holds = false;
};

/// Covering radius of the sublattice through block j against
/// q * lambda_1(block j).  Requires gamma >= 2.
PrefixBound filtration_prefix_bound(const Filtration& filtration,
                                    const FiltrationParams& params, int j);

}  // namespace flattorus
