#include "flattorus/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flattorus/solvers.hpp"

namespace flattorus {

namespace {

constexpr int kMaxLllIterations = 1'000'000;

// Rounding that leaves |mu| <= 1/2 alone, so an already size-reduced basis
// is never touched because of the 0.5 tie.
std::int64_t reduction_multiplier(double mu) {
  if (std::abs(mu) <= 0.5 * (1.0 + 1e-9)) return 0;
  if (!(std::abs(mu) < 0x1.0p62)) {
    throw NonConvergent("lll: size-reduction coefficient overflows int64");
  }
  return std::llround(mu);
}

void size_reduce_row(Matrix& b, IntMatrix& t, GramSchmidtData& gs, int k, int first) {
  for (int j = k - 1; j >= first; --j) {
    const std::int64_t r = reduction_multiplier(gs.mu(k, j));
    if (r == 0) continue;
    const auto rd = static_cast<double>(r);
    b.row(k) -= rd * b.row(j);
    t.row(k) -= r * t.row(j);
    for (int l = 0; l <= j; ++l) gs.mu(k, l) -= rd * gs.mu(j, l);
  }
}

// LLL on rows [fixed, n), working with projections orthogonal to the first
// `fixed` rows.  Rows before `fixed` are never modified.
void lll_in_place(Matrix& b, IntMatrix& t, double delta, int fixed) {
  const int n = static_cast<int>(b.rows());
  GramSchmidtData gs = gram_schmidt(b);
  int k = fixed + 1;
  for (int iter = 0; k < n; ++iter) {
    if (iter > kMaxLllIterations) {
      throw NonConvergent("lll: iteration cap reached");
    }
    size_reduce_row(b, t, gs, k, fixed);
    gs = gram_schmidt(b);
    const double mu = gs.mu(k, k - 1);
    if (gs.norms_sq(k) + mu * mu * gs.norms_sq(k - 1) >= delta * gs.norms_sq(k - 1)) {
      ++k;
    } else {
      b.row(k).swap(b.row(k - 1));
      t.row(k).swap(t.row(k - 1));
      gs = gram_schmidt(b);
      k = std::max(k - 1, fixed + 1);
    }
  }
}

void check_delta(double delta) {
  if (!(delta > 0.25 && delta < 1.0)) {
    throw InvalidArgument("lll: delta must lie in (0.25, 1)");
  }
}

}  // namespace

LllResult lll_reduce_with_transform(const Lattice& lattice, double delta) {
  check_delta(delta);
  Matrix b = lattice.basis();
  IntMatrix t = IntMatrix::Identity(lattice.dim(), lattice.dim());
  lll_in_place(b, t, delta, 0);
  return LllResult{Lattice(std::move(b)), std::move(t)};
}

Lattice lll_reduce(const Lattice& lattice, double delta) {
  return lll_reduce_with_transform(lattice, delta).lattice;
}

IntMatrix unimodular_completion(const IntVector& row) {
  const auto n = row.size();
  if (n < 1) throw InvalidArgument("unimodular_completion: empty vector");
  // Column operations drive v to e_0; u accumulates their inverse, so that
  // v^T u = row^T holds throughout.
  IntVector v = row;
  IntMatrix u = IntMatrix::Identity(n, n);
  for (;;) {
    Eigen::Index pivot = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (v(i) != 0 && (pivot < 0 || std::abs(v(i)) < std::abs(v(pivot)))) pivot = i;
    }
    if (pivot < 0) throw InvalidArgument("unimodular_completion: zero vector");
    bool reduced = false;
    for (Eigen::Index b = 0; b < n; ++b) {
      if (b == pivot || v(b) == 0) continue;
      const std::int64_t q = v(b) / v(pivot);
      v(b) -= q * v(pivot);
      u.row(pivot) += q * u.row(b);
      reduced = true;
    }
    if (!reduced) {
      if (std::abs(v(pivot)) != 1) {
        throw InvalidArgument("unimodular_completion: vector is not primitive");
      }
      if (pivot != 0) {
        std::swap(v(0), v(pivot));
        u.row(0).swap(u.row(pivot));
      }
      if (v(0) < 0) {
        v(0) = 1;
        u.row(0) *= -1;
      }
      return u;
    }
  }
}

Lattice kz_reduce(const Lattice& lattice) {
  const int n = lattice.dim();
  require_enumerable(n, "kz_reduce");
  LllResult lll = lll_reduce_with_transform(lattice);
  Matrix b = lll.lattice.basis();
  IntMatrix t = lll.transform;
  for (int i = 0; i + 1 < n; ++i) {
    const Lattice current(b);
    const SvpResult shortest = svp(quotient_lattice(current, i));
    if (shortest.length * (1.0 + 1e-12) < current.gram_schmidt().norm(i)) {
      const IntMatrix w = unimodular_completion(shortest.coeffs);
      const int rank = n - i;
      Matrix suffix = Matrix::Zero(rank, n);
      IntMatrix suffix_t = IntMatrix::Zero(rank, n);
      for (int r = 0; r < rank; ++r) {
        for (int c = 0; c < rank; ++c) {
          if (w(r, c) == 0) continue;
          suffix.row(r) += static_cast<double>(w(r, c)) * b.row(i + c);
          suffix_t.row(r) += w(r, c) * t.row(i + c);
        }
      }
      b.bottomRows(rank) = suffix;
      t.bottomRows(rank) = suffix_t;
    }
    lll_in_place(b, t, kDefaultLllDelta, i + 1);
  }

  GramSchmidtData gs = gram_schmidt(b);
  for (int i = 0; i < n; ++i) {
    const double scale = gs.norm(i);
    for (int c = 0; c < n; ++c) {
      const double x = gs.ortho(i, c) / scale;
      if (std::abs(x) > kNumericTolerance) {
        if (x < 0) {
          b.row(i) *= -1.0;
          t.row(i) *= -1;
        }
        break;
      }
    }
  }
  gs = gram_schmidt(b);
  for (int k = 1; k < n; ++k) size_reduce_row(b, t, gs, k, 0);
  return Lattice(std::move(b));
}

double max_abs_mu(const GramSchmidtData& gs) {
  double worst = 0.0;
  for (int i = 0; i < gs.dim(); ++i) {
    for (int j = 0; j < i; ++j) worst = std::max(worst, std::abs(gs.mu(i, j)));
  }
  return worst;
}

}  // namespace flattorus
