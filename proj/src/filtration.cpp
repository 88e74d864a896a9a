#include "flattorus/filtration.hpp"

#include <cmath>
#include <string>

#include "flattorus/reduction.hpp"
#include "flattorus/solvers.hpp"

namespace flattorus {

void check_params(const FiltrationParams& params) {
  if (!(params.gamma > 1.0) || !std::isfinite(params.gamma)) {
    throw InvalidArgument("filtration: gamma must be a finite number > 1");
  }
  if (!(params.q >= 1.0) || !std::isfinite(params.q)) {
    throw InvalidArgument("filtration: q must be a finite number >= 1");
  }
}

std::vector<int> coarsen_cuts(const Vector& gs_norms, double gamma) {
  if (!(gamma > 1.0)) throw InvalidArgument("coarsen_cuts: gamma must exceed 1");
  const int n = static_cast<int>(gs_norms.size());
  std::vector<int> cuts;
  int begin = 0;
  while (begin < n) {
    const double limit = gamma * gs_norms(begin);
    int end = begin + 1;
    while (end < n && gs_norms(end) <= limit) ++end;
    cuts.push_back(end);
    begin = end;
  }
  return cuts;
}

BuiltFiltration build_filtration(const Lattice& lattice, double gamma) {
  FiltrationParams params{gamma, gamma * std::sqrt(static_cast<double>(lattice.dim()))};
  check_params(params);
  Lattice kz = kz_reduce(lattice);
  const Vector norms = kz.gram_schmidt().norms_sq.cwiseSqrt();
  std::vector<int> cuts = coarsen_cuts(norms, gamma);
  return BuiltFiltration{Filtration(std::move(kz), std::move(cuts)), params};
}

namespace {

bool at_most(double lhs, double rhs) { return lhs <= rhs * (1.0 + kNumericTolerance); }

}  // namespace

FiltrationValidation validate_filtration(const Filtration& filtration,
                                         const FiltrationParams& params) {
  check_params(params);
  FiltrationValidation out;
  const int m = filtration.size();
  std::vector<double> lambdas;
  for (int j = 0; j < m; ++j) {
    const Lattice block = filtration.block_quotient(j);
    BlockCheck check;
    check.lambda1 = svp(block).length;
    check.covering_upper = covering_radius(block, CoveringMode::upper_bound);
    check.covering_ratio = check.covering_upper / check.lambda1;
    check.covering_ok = at_most(check.covering_upper, params.q * check.lambda1 / 2.0);
    lambdas.push_back(check.lambda1);
    out.blocks.push_back(check);
  }
  for (int j = 0; j + 1 < m; ++j) {
    BlockCheck& check = out.blocks[static_cast<std::size_t>(j)];
    check.growth_ratio = lambdas[static_cast<std::size_t>(j) + 1] / lambdas[static_cast<std::size_t>(j)];
    check.growth_ok = at_most(params.gamma, check.growth_ratio);
  }
  for (const BlockCheck& check : out.blocks) {
    out.valid = out.valid && check.covering_ok && check.growth_ok;
  }
  return out;
}

PrefixBound filtration_prefix_bound(const Filtration& filtration,
                                    const FiltrationParams& params, int j) {
  check_params(params);
  if (params.gamma < 2.0) {
    throw InvalidArgument("filtration_prefix_bound: requires gamma >= 2");
  }
  if (j < 0 || j >= filtration.size()) {
    throw IndexOutOfRange("filtration_prefix_bound: block " + std::to_string(j));
  }
  PrefixBound out;
  out.bound = params.q * svp(filtration.block_quotient(j)).length;
  out.covering_upper = covering_radius(filtration.prefix_through(j), CoveringMode::upper_bound);
  out.holds = at_most(out.covering_upper, out.bound);
  return out;
}

}  // namespace flattorus
