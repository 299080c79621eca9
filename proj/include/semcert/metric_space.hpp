#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semcert/common.hpp"

namespace semcert {

/// Finite metric state space: labeled points, a validated distance matrix and
/// a distinguished base point. Immutable after construction.
class MetricSpace {
 public:
  /// Full validation: symmetry, zero diagonal, nonnegativity, triangle
  /// inequality (within tol::validation) and base index range.
  /// TriangleViolation reports the worst offending triple.
  static MetricSpace validated(std::vector<std::string> labels, Matrix dist, std::size_t base_index);

  /// Points on the real line; distance |p_i - p_j| satisfies the triangle
  /// inequality by construction so the cubic scan is skipped. Used by the
  /// built-in model constructors.
  static MetricSpace from_line_positions(std::vector<std::string> labels, std::vector<double> positions,
                                         std::size_t base_index);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  double dist(std::size_t i, std::size_t j) const { return dist_(i, j); }
  const Matrix& distance_matrix() const { return dist_; }
  std::size_t base_index() const { return base_; }

  /// Open ball {i : d(i, center) < radius}. Strict inequality.
  std::vector<std::size_t> ball(std::size_t center, double radius) const;

  double diameter() const;
  /// max_i d(i, base), the observed argument range for envelope functions.
  double max_distance_to_base() const;

  std::optional<std::size_t> find_label(const std::string& name) const;

 private:
  MetricSpace(std::vector<std::string> labels, Matrix dist, std::size_t base)
      : labels_(std::move(labels)), dist_(std::move(dist)), base_(base) {}

  std::vector<std::string> labels_;
  Matrix dist_;
  std::size_t base_ = 0;
};

/// Probability vector over a space's indices.
struct Distribution {
  std::vector<double> w;

  /// Checks nonnegativity and unit mass within tol::validation.
  static Distribution validated(std::vector<double> weights);
  static Distribution dirac(std::size_t n, std::size_t at);

  std::size_t size() const { return w.size(); }
  std::vector<std::size_t> support(double threshold = tol::support) const;
};

double tv_distance(const Distribution& mu, const Distribution& nu);

/// Symmetric nonnegative cost with zero diagonal; optionally certified as a
/// pseudo-metric (triangle inequality). Construction analyses the cost once
/// so the transport solver can pick a specialised path:
///   - two-valued {0, v} costs whose per-row zero sets are index intervals
///     admit an exact greedy solve,
///   - pseudo-metric costs admit the shared-mass reduction.
class CostMatrix {
 public:
  /// Full validation (triangle scan when is_pseudo_metric); O(n^3) for the
  /// general case, O(n^2) when the cost is recognisably a line embedding.
  static CostMatrix validated(Matrix values, bool is_pseudo_metric);

  /// For costs obtained from a validated space by monotone capping; the
  /// triangle inequality is inherited, only shape checks run.
  static CostMatrix trusted_pseudo_metric(Matrix values);

  /// c(x,y) = v * 1{base(x,y) > eps}; not a pseudo-metric in general.
  static CostMatrix far_indicator(const Matrix& base, double eps, double v = 1.0);

  /// Discrete metric 1{x != y} (the total-variation cost).
  static CostMatrix mismatch_indicator(std::size_t n);

  std::size_t size() const { return values_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return values_(i, j); }
  const Matrix& values() const { return values_; }
  bool is_pseudo_metric() const { return pseudo_; }

  struct BandStructure {
    double level = 1.0;  // the nonzero value v
    // Per row, the contiguous zero interval [lo, hi]; lo > hi means empty.
    std::vector<std::ptrdiff_t> lo, hi;
  };
  const std::optional<BandStructure>& band() const { return band_; }

 private:
  CostMatrix(Matrix values, bool pseudo) : values_(std::move(values)), pseudo_(pseudo) {}
  void analyse();

  Matrix values_;
  bool pseudo_ = false;
  std::optional<BandStructure> band_;
};

/// d_n(x,y) = min(1, n * d(x,y)): bounded pseudo-metrics increasing to the
/// discrete metric; the separation family used by the ASF profile.
CostMatrix separating_family(const MetricSpace& space, int n);

/// c(x,y) = min(2A, K * d(x,y)); its unit Lipschitz ball is
/// {phi : osc(phi) <= 2A, Lip_d(phi) <= K}, so transport against this cost
/// evaluates the gradient-bound supremum exactly.
CostMatrix capped_lipschitz_cost(const MetricSpace& space, double A, double K);

/// validate_space as a free function (mirrors the file-format entry point).
MetricSpace validate_space(std::vector<std::string> labels, Matrix dist, std::size_t base_index);

}  // namespace semcert
