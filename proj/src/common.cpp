#include "semcert/common.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace semcert {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::AsymmetricDistance: return "AsymmetricDistance";
    case Errc::TriangleViolation: return "TriangleViolation";
    case Errc::NegativeDistance: return "NegativeDistance";
    case Errc::BadBaseIndex: return "BadBaseIndex";
    case Errc::NonpositiveParameters: return "NonpositiveParameters";
    case Errc::SpaceMismatch: return "SpaceMismatch";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::SingularSolve: return "SingularSolve";
    case Errc::SolverFailure: return "SolverFailure";
    case Errc::MarginalMismatch: return "MarginalMismatch";
    case Errc::NotPseudoMetric: return "NotPseudoMetric";
    case Errc::EmptyBall: return "EmptyBall";
    case Errc::A1NotSatisfied: return "A1NotSatisfied";
    case Errc::EmptySupport: return "EmptySupport";
    case Errc::DistinctMeasuresRequired: return "DistinctMeasuresRequired";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::NonpositiveTime: return "NonpositiveTime";
    case Errc::GridResolutionTooCoarse: return "GridResolutionTooCoarse";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidFormat: return "InvalidFormat";
  }
  return "UnknownError";
}

Matrix Matrix::multiplied(const Matrix& rhs) const {
  if (cols_ != rhs.rows_) fail(Errc::InvalidArgument, "matrix product dimension mismatch");
  Matrix out(rows_, rhs.cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double* outi = out.d_.data() + i * rhs.cols_;
    const double* li = d_.data() + i * cols_;
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = li[k];
      if (a == 0.0) continue;
      const double* rk = rhs.d_.data() + k * rhs.cols_;
      for (std::size_t j = 0; j < rhs.cols_; ++j) outi[j] += a * rk[j];
    }
  }
  return out;
}

Matrix Matrix::transposed() const {
  Matrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(Errc::SpaceMismatch, "vector length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double sum(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v;
  return s;
}

std::size_t effective_thread_count() {
  static const std::size_t cached = [] {
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    std::size_t n = std::min<std::size_t>(hw, 8);
    if (const char* env = std::getenv("SEMCERT_THREADS")) {
      long v = 0;
      auto [p, ec] = std::from_chars(env, env + std::string(env).size(), v);
      if (ec == std::errc() && *p == '\0' && v >= 0) {
        if (v > 0) n = static_cast<std::size_t>(v);
      }
    }
    return std::max<std::size_t>(n, 1);
  }();
  return cached;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t threads = std::min(effective_thread_count(), n);
  if (threads <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t b = t * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e] {
      try {
        body(b, e);
      } catch (...) {
        std::scoped_lock lk(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_double(double v) {
  char buf[40];
  // to_chars emits the shortest representation that round-trips.
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, p);
}

}  // namespace semcert
