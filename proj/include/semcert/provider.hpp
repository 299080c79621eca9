#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "semcert/common.hpp"

namespace semcert {

/// Sparse joint probability matrix over a space squared; rows index the
/// approximating coordinate Z, columns the exactly-distributed coordinate Y.
struct SparseJoint {
  std::size_t n = 0;
  std::vector<Triplet> entries;

  std::vector<double> row_marginal() const;
  std::vector<double> col_marginal() const;
  double total_mass() const;
};

/// Family of joint laws (Z_t, Y_t) indexed by a start pair (x, y) and a time.
/// The contract: every joint is a probability matrix and its column marginal
/// equals the kernel's t-step law from y within tol::coupling_marginal (the
/// checkers verify this on use).
class CouplingProvider {
 public:
  virtual ~CouplingProvider() = default;

  virtual SparseJoint joint(std::size_t x, std::size_t y, int t) const = 0;

  /// Optional batch precomputation before a grid sweep.
  virtual void prepare(const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                       const std::vector<int>& times) {
    (void)pairs;
    (void)times;
  }
};

}  // namespace semcert
