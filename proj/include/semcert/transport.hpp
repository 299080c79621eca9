#pragma once

#include <utility>
#include <vector>

#include "semcert/metric_space.hpp"

namespace semcert::transport {

/// Joint distribution with prescribed marginals, stored sparsely.
struct Coupling {
  std::size_t rows = 0, cols = 0;
  std::vector<Triplet> entries;  // consolidated, ordered by (i, j)
  std::vector<double> mu, nu;    // declared marginals

  static Coupling from_dense(const Matrix& joint, std::vector<double> mu, std::vector<double> nu);

  std::vector<double> row_marginal() const;
  std::vector<double> col_marginal() const;
  Matrix dense() const;
  double total_mass() const;
  double off_diagonal_mass() const;
  /// Largest L1 deviation of realised vs declared marginals.
  double marginal_error() const;
};

/// Exact transport solve with a verified primal-dual certificate.
struct TransportResult {
  double value = 0.0;
  Coupling coupling;
  std::vector<double> potential_mu, potential_nu;  // f, g with f+g <= cost
  double duality_gap = 0.0;                        // value - <f,mu> - <g,nu>
};

struct SolveOptions {
  bool allow_band_path = true;   // greedy path for two-valued interval costs
  bool allow_reduction = true;   // shared-mass reduction for pseudo-metric costs
};

/// Minimum of sum(cost * gamma) over couplings of (mu, nu). Deterministic;
/// every call returns a feasible optimal coupling and feasible dual
/// potentials whose gap is below tol::duality_gap, or throws SolverFailure.
TransportResult wasserstein(const Distribution& mu, const Distribution& nu, const CostMatrix& cost,
                            const SolveOptions& opts = {});

/// Common part on the diagonal, residuals coupled proportionally; attains
/// P(X != Y) = tv_distance(mu, nu).
Coupling maximal_coupling(const Distribution& mu, const Distribution& nu);

struct ClosenessResult {
  double value = 0.0;  // sup over couplings of P(d(X, Y) <= eps)
  Coupling coupling;   // an attaining coupling
};

/// Computed as 1 - W(mu, nu, 1{d > eps}).
ClosenessResult max_closeness(const Distribution& mu, const Distribution& nu, const Matrix& dist, double eps);
/// Hot-loop variant with the indicator cost prebuilt (see CostMatrix::far_indicator).
ClosenessResult max_closeness_with_cost(const Distribution& mu, const Distribution& nu, const CostMatrix& far_cost);

/// Triple law on E^3, stored sparsely.
struct TripleJoint {
  std::size_t n = 0;
  struct Entry {
    std::size_t i, j, k;
    double v;
  };
  std::vector<Entry> entries;

  Coupling marginal12() const;
  Coupling marginal23() const;
  Coupling marginal13() const;
  double total_mass() const;
};

/// Conditional composition of two couplings sharing the middle marginal:
/// T(i,j,k) = g12(i,j) * g23(j,k) / m(j). Throws MarginalMismatch (with the
/// L1 discrepancy) when the shared marginals disagree beyond
/// tol::glue_precondition.
TripleJoint glue(const Coupling& g12, const Coupling& g23);

/// Independent verification route: maximises <phi, mu - nu> over functions
/// with |phi_i - phi_j| <= cost_ij, solved as an uncapacitated min-cost flow
/// on the single-copy graph (successive shortest paths). Requires the cost to
/// be flagged pseudo-metric.
double kantorovich_dual_value(const Distribution& mu, const Distribution& nu, const CostMatrix& cost);

/// Re-checks a result against the full cost: primal feasibility, dual
/// feasibility, value consistency and gap. Throws SolverFailure on violation.
void verify_certificate(const TransportResult& r, const Distribution& mu, const Distribution& nu,
                        const CostMatrix& cost);

}  // namespace semcert::transport
