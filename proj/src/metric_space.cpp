#include "semcert/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace semcert {

namespace {

void check_square(const Matrix& m, const char* what) {
  if (!m.square()) fail(Errc::InvalidArgument, std::string(what) + " matrix must be square");
}

void check_symmetric_zero_diag_nonneg(const Matrix& m, Errc asym, Errc neg) {
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(m(i, i)) || std::abs(m(i, i)) > tol::validation)
      fail(Errc::InvalidArgument, "diagonal entry (" + std::to_string(i) + ") must be 0");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v)) fail(Errc::NonFiniteValue, "non-finite entry at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      if (v < 0.0) fail(neg, "negative entry " + format_double(v) + " at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      if (std::abs(m(i, j) - m(j, i)) > tol::validation)
        fail(asym, "entries (" + std::to_string(i) + "," + std::to_string(j) + ") and (" + std::to_string(j) + "," +
                        std::to_string(i) + ") differ: " + format_double(m(i, j)) + " vs " + format_double(m(j, i)));
    }
  }
}

// Returns true when d(i,j) == |p_i - p_j| for the anchor-derived embedding,
// which certifies the triangle inequality without the cubic scan.
bool line_embedding_certificate(const Matrix& d) {
  const std::size_t n = d.rows();
  if (n < 3) return true;
  // Anchor at the point farthest from 0 to fix the sign convention.
  std::size_t anchor = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i)
    if (d(0, i) > best) best = d(0, i), anchor = i;
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = d(anchor, i);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(std::abs(p[i] - p[j]) - d(i, j)) > tol::validation) return false;
  return true;
}

void check_triangle(const Matrix& d) {
  const std::size_t n = d.rows();
  if (n > 400 && line_embedding_certificate(d)) return;
  double worst = 0.0;
  std::size_t wi = 0, wj = 0, wk = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double dik = d(i, k);
      for (std::size_t j = 0; j < n; ++j) {
        const double excess = dik - d(i, j) - d(j, k);
        if (excess > worst) {
          worst = excess;
          wi = i;
          wj = j;
          wk = k;
        }
      }
    }
  if (worst > tol::validation) {
    std::ostringstream os;
    os << "d(" << wi << "," << wk << ") = " << format_double(d(wi, wk)) << " exceeds d(" << wi << "," << wj << ") + d("
       << wj << "," << wk << ") = " << format_double(d(wi, wj) + d(wj, wk)) << " by " << format_double(worst);
    fail(Errc::TriangleViolation, os.str());
  }
}

}  // namespace

MetricSpace MetricSpace::validated(std::vector<std::string> labels, Matrix dist, std::size_t base_index) {
  check_square(dist, "distance");
  if (dist.rows() != labels.size()) fail(Errc::InvalidArgument, "label count does not match distance matrix size");
  if (labels.empty()) fail(Errc::InvalidArgument, "space must contain at least one state");
  check_symmetric_zero_diag_nonneg(dist, Errc::AsymmetricDistance, Errc::NegativeDistance);
  check_triangle(dist);
  if (base_index >= labels.size())
    fail(Errc::BadBaseIndex, "base index " + std::to_string(base_index) + " out of range [0," + std::to_string(labels.size()) + ")");
  return MetricSpace(std::move(labels), std::move(dist), base_index);
}

MetricSpace MetricSpace::from_line_positions(std::vector<std::string> labels, std::vector<double> positions,
                                             std::size_t base_index) {
  if (labels.size() != positions.size()) fail(Errc::InvalidArgument, "label/position count mismatch");
  if (labels.empty()) fail(Errc::InvalidArgument, "space must contain at least one state");
  if (base_index >= labels.size()) fail(Errc::BadBaseIndex, "base index out of range");
  const std::size_t n = labels.size();
  Matrix d(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(positions[i])) fail(Errc::NonFiniteValue, "non-finite position");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::abs(positions[i] - positions[j]);
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return MetricSpace(std::move(labels), std::move(d), base_index);
}

std::vector<std::size_t> MetricSpace::ball(std::size_t center, double radius) const {
  if (center >= size()) fail(Errc::InvalidArgument, "ball center out of range");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i)
    if (dist_(center, i) < radius) out.push_back(i);
  return out;
}

double MetricSpace::diameter() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = i + 1; j < size(); ++j) m = std::max(m, dist_(i, j));
  return m;
}

double MetricSpace::max_distance_to_base() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) m = std::max(m, dist_(base_, i));
  return m;
}

std::optional<std::size_t> MetricSpace::find_label(const std::string& name) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == name) return i;
  return std::nullopt;
}

Distribution Distribution::validated(std::vector<double> weights) {
  double s = 0.0;
  for (double v : weights) {
    if (!std::isfinite(v)) fail(Errc::NonFiniteValue, "non-finite weight");
    if (v < 0.0) fail(Errc::InvalidArgument, "negative weight " + format_double(v));
    s += v;
  }
  if (std::abs(s - 1.0) > tol::validation)
    fail(Errc::InvalidArgument, "weights sum to " + format_double(s) + ", expected 1");
  return Distribution{std::move(weights)};
}

Distribution Distribution::dirac(std::size_t n, std::size_t at) {
  if (at >= n) fail(Errc::InvalidArgument, "dirac index out of range");
  Distribution d;
  d.w.assign(n, 0.0);
  d.w[at] = 1.0;
  return d;
}

std::vector<std::size_t> Distribution::support(double threshold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > threshold) out.push_back(i);
  return out;
}

double tv_distance(const Distribution& mu, const Distribution& nu) {
  if (mu.size() != nu.size()) fail(Errc::SpaceMismatch, "distributions live on different spaces");
  return 0.5 * l1_distance(mu.w, nu.w);
}

void CostMatrix::analyse() {
  const std::size_t n = values_.rows();
  // Two-valued {0, v} detection with contiguous per-row zero sets.
  double v = 0.0;
  bool two_valued = true;
  for (std::size_t i = 0; i < n && two_valued; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double c = values_(i, j);
      if (c == 0.0) continue;
      if (v == 0.0) {
        v = c;
      } else if (c != v) {
        two_valued = false;
        break;
      }
    }
  if (!two_valued || v == 0.0) return;
  BandStructure b;
  b.level = v;
  b.lo.resize(n);
  b.hi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // lo = first zero, hi = last zero; contiguous iff everything between is zero.
    std::ptrdiff_t lo = -1, hi = -2;
    for (std::size_t j = 0; j < n; ++j) {
      if (values_(i, j) == 0.0) {
        if (lo < 0) lo = static_cast<std::ptrdiff_t>(j);
        hi = static_cast<std::ptrdiff_t>(j);
      }
    }
    for (std::ptrdiff_t j = lo; j >= 0 && j <= hi; ++j)
      if (values_(i, static_cast<std::size_t>(j)) != 0.0) return;  // not contiguous: keep generic
    b.lo[i] = lo;
    b.hi[i] = hi;
  }
  band_ = std::move(b);
}

CostMatrix CostMatrix::validated(Matrix values, bool is_pseudo_metric) {
  check_square(values, "cost");
  check_symmetric_zero_diag_nonneg(values, Errc::AsymmetricDistance, Errc::NegativeDistance);
  if (is_pseudo_metric) check_triangle(values);
  CostMatrix c(std::move(values), is_pseudo_metric);
  c.analyse();
  return c;
}

CostMatrix CostMatrix::trusted_pseudo_metric(Matrix values) {
  check_square(values, "cost");
  CostMatrix c(std::move(values), true);
  c.analyse();
  return c;
}

CostMatrix CostMatrix::far_indicator(const Matrix& base, double eps, double v) {
  check_square(base, "cost");
  if (eps < 0.0) fail(Errc::InvalidArgument, "eps must be >= 0");
  if (v <= 0.0) fail(Errc::InvalidArgument, "indicator level must be positive");
  const std::size_t n = base.rows();
  Matrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = base(i, j) > eps ? v : 0.0;
  CostMatrix c(std::move(m), false);
  c.analyse();
  return c;
}

CostMatrix CostMatrix::mismatch_indicator(std::size_t n) {
  Matrix m(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 0.0;
  CostMatrix c(std::move(m), true);
  c.analyse();
  return c;
}

CostMatrix separating_family(const MetricSpace& space, int n) {
  if (n < 1) fail(Errc::InvalidArgument, "separation index must be >= 1");
  const std::size_t s = space.size();
  Matrix m(s, s, 0.0);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) m(i, j) = std::min(1.0, static_cast<double>(n) * space.dist(i, j));
  return CostMatrix::trusted_pseudo_metric(std::move(m));
}

CostMatrix capped_lipschitz_cost(const MetricSpace& space, double A, double K) {
  if (A < 0.0 || K < 0.0) fail(Errc::InvalidArgument, "cap and slope must be >= 0");
  if (A == 0.0 && K == 0.0) fail(Errc::NonpositiveParameters, "cap and slope cannot both be 0");
  const std::size_t s = space.size();
  Matrix m(s, s, 0.0);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) m(i, j) = std::min(2.0 * A, K * space.dist(i, j));
  return CostMatrix::trusted_pseudo_metric(std::move(m));
}

MetricSpace validate_space(std::vector<std::string> labels, Matrix dist, std::size_t base_index) {
  return MetricSpace::validated(std::move(labels), std::move(dist), base_index);
}

}  // namespace semcert
