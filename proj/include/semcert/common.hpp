#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace semcert {

// Error taxonomy. Every failure mode carries a stable code so callers (and the
// CLI exit-code mapping) can react without parsing messages.
enum class Errc {
  AsymmetricDistance,
  TriangleViolation,
  NegativeDistance,
  BadBaseIndex,
  NonpositiveParameters,
  SpaceMismatch,
  NonFiniteValue,
  SingularSolve,
  SolverFailure,
  MarginalMismatch,
  NotPseudoMetric,
  EmptyBall,
  A1NotSatisfied,
  EmptySupport,
  DistinctMeasuresRequired,
  OutOfDomain,
  NonpositiveTime,
  GridResolutionTooCoarse,
  InvalidArgument,
  InvalidFormat,
};

const char* errc_name(Errc c);

class SemcertError : public std::runtime_error {
 public:
  SemcertError(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

  // Input-shaped failures map to CLI exit code 2; everything else is internal.
  bool is_input_error() const {
    switch (code_) {
      case Errc::AsymmetricDistance:
      case Errc::TriangleViolation:
      case Errc::NegativeDistance:
      case Errc::BadBaseIndex:
      case Errc::NonpositiveParameters:
      case Errc::SpaceMismatch:
      case Errc::NonFiniteValue:
      case Errc::NotPseudoMetric:
      case Errc::OutOfDomain:
      case Errc::NonpositiveTime:
      case Errc::GridResolutionTooCoarse:
      case Errc::InvalidArgument:
      case Errc::InvalidFormat:
        return true;
      default:
        return false;
    }
  }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) {
  throw SemcertError(code, msg);
}

// Fixed numeric contract of the library. These are part of the public
// behaviour (documented in README) and are not scattered magic numbers.
namespace tol {
inline constexpr double validation = 1e-12;        // metric/weight/row-sum validation
inline constexpr double invariant = 1e-10;         // ||mu P - mu||_1 for stationary laws
inline constexpr double coupling_marginal = 1e-10; // transport-result marginal feasibility
inline constexpr double exact_marginal = 1e-12;    // constructive couplings (maximal, glue)
inline constexpr double duality_gap = 1e-8;        // certified primal-dual gap
inline constexpr double dual_feasibility = 1e-10;  // f(x)+g(y) <= c(x,y) + this
inline constexpr double value_consistency = 1e-10; // value vs sum(c*gamma)
inline constexpr double check_slack = 1e-9;        // diagnostic inequality slack
inline constexpr double glue_marginal = 1e-12;     // glued triple re-marginalisation
inline constexpr double glue_precondition = 1e-10; // shared-marginal agreement
inline constexpr double support = 1e-12;           // support membership threshold
inline constexpr double graph_edge = 1e-15;        // structural-edge threshold
inline constexpr double semigroup = 1e-10;         // Chapman-Kolmogorov checks
inline constexpr double positivity = 1e-12;        // "strictly positive" floor
inline constexpr double bound_chain = 1e-10;       // intersection-bound verification
}  // namespace tol

struct Triplet {
  std::size_t i = 0;
  std::size_t j = 0;
  double v = 0.0;
};

// Dense row-major matrix. Deliberately minimal: the project needs row views,
// products and transposes, nothing BLAS-shaped.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), d_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return d_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {d_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {d_.data() + i * cols_, cols_}; }

  const std::vector<double>& data() const { return d_; }
  std::vector<double>& data() { return d_; }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  // this * rhs; streams rhs row-by-row so both operands stay row-major.
  Matrix multiplied(const Matrix& rhs) const;
  Matrix transposed() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> d_;
};

double l1_distance(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);

// Chunked parallel loop over [0, n). Honors SEMCERT_THREADS (env); absent or 0
// means the implementation default (hardware concurrency, capped at 8).
// Workers receive disjoint index ranges; exceptions are rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t begin, std::size_t end)>& body);

std::size_t effective_thread_count();

// Shortest round-trip decimal for report output.
std::string format_double(double v);

}  // namespace semcert
