#pragma once

#include <memory>

#include "semcert/kernel.hpp"
#include "semcert/provider.hpp"

namespace semcert::models {

/// Two interleaved half-line lattices: the integers 1..depth and the shifted
/// points n + xi/n. From any state the chain jumps to its lattice's base with
/// probability 1/2 and to the next level with probability 1/2; the top level
/// returns to the base deterministically so both lattices stay closed.
struct XiChainSpec {
  double xi = 0.4;
  int depth = 40;
};

Kernel build_xi_chain(const XiChainSpec& spec);

/// Shared-coin coupling: both coordinates reset together or advance together,
/// so each marginal follows the chain exactly and same-lattice pairs coalesce
/// at the first joint reset.
std::unique_ptr<CouplingProvider> xi_chain_sync_provider(const XiChainSpec& spec, const Kernel& kernel);

/// Index of the integer-lattice state at a level (1-based), and the shifted
/// counterpart; convenience for tests and the CLI.
std::size_t xi_integer_index(const XiChainSpec& spec, int level);
std::size_t xi_shifted_index(const XiChainSpec& spec, int level);

/// Uniform grid on [0,3]; one step moves x to 2 - sqrt(x) + U[0, 1/3] on
/// [0,1] and to 2/3 + x/3 + U[0, 1/3] on [1,3], discretised by exact
/// interval-overlap quadrature per grid cell (rows renormalised exactly).
struct IntervalChainSpec {
  int grid_points = 3001;
};

Kernel build_interval_chain(const IntervalChainSpec& spec);

/// One-step row from an arbitrary (possibly off-grid) start in [0,3].
std::vector<double> interval_chain_row_at(const IntervalChainSpec& spec, double y);

/// E[phi(X_n) | X_0 = u] for phi = identity, in closed form.
double interval_chain_closed_form(int n, double u);

/// Random walk with unit-variance Gaussian steps on a grid over
/// [-half_width, half_width]; per-row tail mass is folded into the boundary
/// cells so rows stay exactly stochastic.
struct GaussianWalkSpec {
  double half_width = 8.0;
  double step = 0.01;
};

Kernel build_gaussian_walk(const GaussianWalkSpec& spec);

/// Shared-noise coupling with deterministic gap contraction:
/// Z_{n+1} = Z_n + eta_n + lambda (Y_n - Z_n), Y_{n+1} = Y_n + eta_n, so the
/// gap is exactly (1-lambda)^n (y - x). On the grid the gap is snapped toward
/// zero to a whole number of cells, keeping E d(Z_t, Y_t) <= (1-lambda)^t |x-y|.
std::unique_ptr<CouplingProvider> gaussian_shift_contraction_provider(const GaussianWalkSpec& spec,
                                                                      const Kernel& kernel, double lambda);

/// d_TV(N(x,t), N(y,t)) = 2 Phi(|x-y| / (2 sqrt(t))) - 1.
double gaussian_tv_closed_form(double x, double y, double t);

/// State positions on the real line for a model-built space (all three models
/// are line-embedded; positions recover from distances to the leftmost state).
std::vector<double> line_positions_of(const Kernel& kernel);

}  // namespace semcert::models
