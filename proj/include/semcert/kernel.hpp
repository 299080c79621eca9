#pragma once

#include <vector>

#include "semcert/metric_space.hpp"

namespace semcert {

/// One invariant distribution per closed communicating class, with the class
/// membership sets. Classes are ordered by their smallest state index.
struct ErgodicDecomposition {
  std::vector<Distribution> measures;
  std::vector<std::vector<std::size_t>> class_members;
};

/// Discrete-time Markov kernel: a row-stochastic matrix over a metric space.
/// All operations are pure; the t-step kernel is realised by iterated products
/// (deterministic, no eigendecomposition).
class Kernel {
 public:
  static Kernel validated(MetricSpace space, Matrix transition);

  const MetricSpace& space() const { return space_; }
  const Matrix& matrix() const { return P_; }
  std::size_t size() const { return space_.size(); }

  /// t-step kernel; step(0) is the identity. Materialises the full matrix
  /// power, so intended for desk-scale spaces.
  Kernel step(int t) const;

  /// (P_t phi)(x_i) for a function given by its value vector.
  std::vector<double> apply_function(std::span<const double> phi, int t) const;

  /// mu P_t.
  Distribution push_measure(const Distribution& mu, int t) const;
  Distribution push_dirac(std::size_t x, int t) const;

  /// Rows x -> P_t(x, .) for a batch of start states; one pass over the
  /// transition matrix per time step regardless of batch size.
  Matrix push_dirac_many(const std::vector<std::size_t>& starts, int t) const;

  /// Same batch pushed through a single sweep to max(times), snapshotting the
  /// rows at every requested time (times need not be sorted or distinct).
  std::vector<Matrix> push_dirac_many_at(const std::vector<std::size_t>& starts,
                                         const std::vector<int>& times) const;

  /// Stationary law of every closed communicating class of the support graph
  /// (entries > tol::graph_edge). Solves (P^T - I) pi = 0 with the
  /// normalisation row replacing one equation; deterministic partial
  /// pivoting, least-squares fallback before SingularSolve.
  ErgodicDecomposition invariant_measures() const;

 private:
  Kernel(MetricSpace space, Matrix P) : space_(std::move(space)), P_(std::move(P)) {}

  MetricSpace space_;
  Matrix P_;
};

}  // namespace semcert
