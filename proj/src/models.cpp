#include "semcert/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace semcert {

std::vector<double> SparseJoint::row_marginal() const {
  std::vector<double> m(n, 0.0);
  for (const auto& t : entries) m[t.i] += t.v;
  return m;
}

std::vector<double> SparseJoint::col_marginal() const {
  std::vector<double> m(n, 0.0);
  for (const auto& t : entries) m[t.j] += t.v;
  return m;
}

double SparseJoint::total_mass() const {
  double s = 0.0;
  for (const auto& t : entries) s += t.v;
  return s;
}

}  // namespace semcert

namespace semcert::models {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::string level_label(int level) { return std::to_string(level); }
std::string shifted_label(int level) { return std::to_string(level) + "+xi/" + std::to_string(level); }

void validate_xi(const XiChainSpec& s) {
  if (!(s.xi > 0.0 && s.xi < 0.5)) fail(Errc::InvalidArgument, "xi must lie in (0, 1/2)");
  if (s.depth < 2) fail(Errc::InvalidArgument, "depth must be >= 2");
}

void validate_interval(const IntervalChainSpec& s) {
  if (s.grid_points < 31) fail(Errc::GridResolutionTooCoarse, "grid must have at least 31 points");
  if ((s.grid_points - 1) % 3 != 0)
    fail(Errc::GridResolutionTooCoarse, "grid must place 0, 1 and 3 on grid points ((n-1) divisible by 3)");
}

void validate_gaussian(const GaussianWalkSpec& s) {
  if (s.half_width < 6.0) fail(Errc::InvalidArgument, "half width must be >= 6 (per-step truncation mass)");
  if (!(s.step > 0.0) || s.step > 0.05) fail(Errc::InvalidArgument, "step must lie in (0, 0.05]");
  const double cells = s.half_width / s.step;
  if (std::abs(cells - std::round(cells)) > 1e-9)
    fail(Errc::InvalidArgument, "half width must be an integer number of steps");
}

// Shared-coin pair chain for the two-lattice model. States are tracked as
// (lattice, level) and evolved exactly; atoms merge through a map.
class XiSyncProvider final : public CouplingProvider {
 public:
  XiSyncProvider(const XiChainSpec& spec, std::size_t n) : depth_(spec.depth), n_(n) {}

  SparseJoint joint(std::size_t x, std::size_t y, int t) const override {
    if (t < 0) fail(Errc::InvalidArgument, "time must be >= 0");
    if (x >= n_ || y >= n_) fail(Errc::InvalidArgument, "start state out of range");
    using PairState = std::pair<std::size_t, std::size_t>;
    std::map<PairState, double> cur{{{x, y}, 1.0}};
    for (int s = 0; s < t; ++s) {
      std::map<PairState, double> next;
      for (const auto& [st, m] : cur) {
        next[{reset(st.first), reset(st.second)}] += 0.5 * m;
        next[{advance(st.first), advance(st.second)}] += 0.5 * m;
      }
      cur.swap(next);
    }
    SparseJoint j;
    j.n = n_;
    for (const auto& [st, m] : cur) j.entries.push_back({st.first, st.second, m});
    return j;
  }

 private:
  std::size_t base_of(std::size_t i) const { return i < static_cast<std::size_t>(depth_) ? 0 : static_cast<std::size_t>(depth_); }
  int level_of(std::size_t i) const { return static_cast<int>(i % static_cast<std::size_t>(depth_)) + 1; }
  std::size_t reset(std::size_t i) const { return base_of(i); }
  std::size_t advance(std::size_t i) const {
    return level_of(i) < depth_ ? i + 1 : base_of(i);
  }

  int depth_;
  std::size_t n_;
};

// Shared-noise contraction coupling on the Gaussian grid. The joint at time t
// pairs the law of Y_t = y + W_t with Z_t = Y_t - gap_t, where gap_t is
// (1-lambda)^t (y - x) snapped toward zero to a whole number of cells.
class GaussianShiftProvider final : public CouplingProvider {
 public:
  GaussianShiftProvider(const GaussianWalkSpec& spec, const Kernel& kernel, double lambda)
      : kernel_(kernel), h_(spec.step), lambda_(lambda), n_(kernel.size()) {
    if (!(lambda > 0.0 && lambda < 1.0)) fail(Errc::InvalidArgument, "lambda must lie in (0,1)");
    positions_ = line_positions_of(kernel);
  }

  void prepare(const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
               const std::vector<int>& times) override {
    std::vector<std::size_t> ys;
    for (const auto& p : pairs) ys.push_back(p.second);
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    for (int t : times) {
      Matrix rows = kernel_.push_dirac_many(ys, t);
      std::scoped_lock lk(mutex_);
      for (std::size_t k = 0; k < ys.size(); ++k) {
        auto row = rows.row(k);
        cache_[{ys[k], t}] = std::vector<double>(row.begin(), row.end());
      }
    }
  }

  SparseJoint joint(std::size_t x, std::size_t y, int t) const override {
    if (x >= n_ || y >= n_) fail(Errc::InvalidArgument, "start state out of range");
    if (t < 0) fail(Errc::InvalidArgument, "time must be >= 0");
    const std::vector<double>& row = law_of_y(y, t);
    const double gap = std::pow(1.0 - lambda_, t) * (positions_[y] - positions_[x]);
    const auto shift = static_cast<std::ptrdiff_t>(std::trunc(gap / h_));
    SparseJoint j;
    j.n = n_;
    for (std::size_t col = 0; col < n_; ++col) {
      const double m = row[col];
      if (m <= 0.0) continue;
      std::ptrdiff_t zi = static_cast<std::ptrdiff_t>(col) - shift;
      zi = std::clamp<std::ptrdiff_t>(zi, 0, static_cast<std::ptrdiff_t>(n_) - 1);
      j.entries.push_back({static_cast<std::size_t>(zi), col, m});
    }
    return j;
  }

 private:
  const std::vector<double>& law_of_y(std::size_t y, int t) const {
    {
      std::scoped_lock lk(mutex_);
      auto it = cache_.find({y, t});
      if (it != cache_.end()) return it->second;
    }
    Distribution d = kernel_.push_dirac(y, t);
    std::scoped_lock lk(mutex_);
    return cache_.emplace(std::make_pair(y, t), std::move(d.w)).first->second;
  }

  const Kernel& kernel_;
  double h_, lambda_;
  std::size_t n_;
  std::vector<double> positions_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<std::size_t, int>, std::vector<double>> cache_;
};

}  // namespace

Kernel build_xi_chain(const XiChainSpec& spec) {
  validate_xi(spec);
  const int N = spec.depth;
  const std::size_t n = 2 * static_cast<std::size_t>(N);
  std::vector<std::string> labels(n);
  std::vector<double> pos(n);
  for (int k = 0; k < N; ++k) {
    labels[k] = level_label(k + 1);
    pos[k] = k + 1;
    labels[N + k] = shifted_label(k + 1);
    pos[N + k] = (k + 1) + spec.xi / (k + 1);
  }
  MetricSpace space = MetricSpace::from_line_positions(std::move(labels), std::move(pos), 0);
  Matrix P(n, n, 0.0);
  for (int k = 0; k < N; ++k) {
    if (k + 1 < N) {
      P(k, 0) = 0.5;
      P(k, k + 1) = 0.5;
      P(N + k, N) = 0.5;
      P(N + k, N + k + 1) = 0.5;
    } else {
      P(k, 0) = 1.0;
      P(N + k, N) = 1.0;
    }
  }
  return Kernel::validated(std::move(space), std::move(P));
}

std::unique_ptr<CouplingProvider> xi_chain_sync_provider(const XiChainSpec& spec, const Kernel& kernel) {
  validate_xi(spec);
  if (kernel.size() != 2 * static_cast<std::size_t>(spec.depth))
    fail(Errc::SpaceMismatch, "kernel does not match the chain spec");
  return std::make_unique<XiSyncProvider>(spec, kernel.size());
}

std::size_t xi_integer_index(const XiChainSpec& spec, int level) {
  if (level < 1 || level > spec.depth) fail(Errc::InvalidArgument, "level out of range");
  return static_cast<std::size_t>(level - 1);
}

std::size_t xi_shifted_index(const XiChainSpec& spec, int level) {
  if (level < 1 || level > spec.depth) fail(Errc::InvalidArgument, "level out of range");
  return static_cast<std::size_t>(spec.depth + level - 1);
}

Kernel build_interval_chain(const IntervalChainSpec& spec) {
  validate_interval(spec);
  const std::size_t n = static_cast<std::size_t>(spec.grid_points);
  std::vector<std::string> labels(n);
  std::vector<double> pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    pos[i] = (3.0 * static_cast<double>(i)) / static_cast<double>(n - 1);
    labels[i] = format_double(pos[i]);
  }
  MetricSpace space = MetricSpace::from_line_positions(std::move(labels), pos, 0);
  Matrix P(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = interval_chain_row_at(spec, pos[i]);
    for (std::size_t j = 0; j < n; ++j) P(i, j) = row[j];
  }
  return Kernel::validated(std::move(space), std::move(P));
}

std::vector<double> interval_chain_row_at(const IntervalChainSpec& spec, double y) {
  validate_interval(spec);
  if (!(y >= 0.0 && y <= 3.0)) fail(Errc::OutOfDomain, "start must lie in [0,3]");
  const std::size_t n = static_cast<std::size_t>(spec.grid_points);
  const double h = 3.0 / static_cast<double>(n - 1);
  const double a = y <= 1.0 ? 2.0 - std::sqrt(y) : 2.0 / 3.0 + y / 3.0;
  const double b = a + 1.0 / 3.0;
  std::vector<double> row(n, 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double center = (3.0 * static_cast<double>(j)) / static_cast<double>(n - 1);
    const double clo = std::max(0.0, center - 0.5 * h);
    const double chi = std::min(3.0, center + 0.5 * h);
    const double overlap = std::min(chi, b) - std::max(clo, a);
    if (overlap > 0.0) {
      row[j] = 3.0 * overlap;
      total += row[j];
    }
  }
  if (total < 0.999)
    fail(Errc::GridResolutionTooCoarse, "image interval not resolvable on this grid");
  for (double& v : row) v /= total;
  return row;
}

double interval_chain_closed_form(int n, double u) {
  if (n < 1) fail(Errc::OutOfDomain, "time must be >= 1");
  if (!(u >= 0.0 && u <= 3.0)) fail(Errc::OutOfDomain, "argument must lie in [0,3]");
  if (u >= 1.0) {
    const double p = std::pow(3.0, -n);
    return 1.25 * (1.0 - p) + p * u;
  }
  const double p = std::pow(3.0, -(n - 1));
  return 1.25 * (1.0 - p) + p * (2.0 - std::sqrt(u) + 1.0 / 6.0);
}

Kernel build_gaussian_walk(const GaussianWalkSpec& spec) {
  validate_gaussian(spec);
  const auto half_cells = static_cast<std::size_t>(std::llround(spec.half_width / spec.step));
  const std::size_t n = 2 * half_cells + 1;
  const double h = spec.step;
  std::vector<std::string> labels(n);
  std::vector<double> pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    pos[i] = (static_cast<double>(i) - static_cast<double>(half_cells)) * h;
    labels[i] = format_double(pos[i]);
  }
  MetricSpace space = MetricSpace::from_line_positions(std::move(labels), pos, half_cells);
  Matrix P(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    // Cut the real line at the interior cell boundaries; the two boundary
    // cells absorb their whole tails, so the row telescopes to exactly 1.
    double prev = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double boundary = pos[j] + 0.5 * h;
      const double c = normal_cdf(boundary - pos[i]);
      P(i, j) = c - prev;
      prev = c;
    }
    P(i, n - 1) = 1.0 - prev;
  }
  return Kernel::validated(std::move(space), std::move(P));
}

std::unique_ptr<CouplingProvider> gaussian_shift_contraction_provider(const GaussianWalkSpec& spec,
                                                                      const Kernel& kernel, double lambda) {
  validate_gaussian(spec);
  return std::make_unique<GaussianShiftProvider>(spec, kernel, lambda);
}

double gaussian_tv_closed_form(double x, double y, double t) {
  if (!(t > 0.0)) fail(Errc::NonpositiveTime, "time must be positive");
  return std::erf(std::abs(x - y) / (2.0 * std::sqrt(2.0 * t)));
}

std::vector<double> line_positions_of(const Kernel& kernel) {
  const MetricSpace& s = kernel.space();
  const std::size_t n = s.size();
  // Find the two extremes of the embedding; anchoring at the lower-indexed
  // one gives a canonical coordinate d(anchor, .) that reproduces the native
  // coordinates of grid-built models (their state 0 is an endpoint).
  auto farthest_from = [&](std::size_t a) {
    std::size_t best_i = a;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (s.dist(a, i) > best) {
        best = s.dist(a, i);
        best_i = i;
      }
    return best_i;
  };
  const std::size_t e1 = farthest_from(0);
  const std::size_t e2 = farthest_from(e1);
  const std::size_t anchor = std::min(e1, e2);
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = s.dist(anchor, i);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(std::abs(p[i] - p[j]) - s.dist(i, j)) > 1e-9)
        fail(Errc::InvalidArgument, "space is not line-embedded");
  return p;
}

}  // namespace semcert::models
