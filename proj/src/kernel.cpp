#include "semcert/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace semcert {

namespace {

// Iterative Tarjan SCC over the support graph.
std::vector<std::vector<std::size_t>> strongly_connected_components(const Matrix& P, double edge_tol) {
  const std::size_t n = P.rows();
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> comps;
  int next_index = 0;

  struct Frame {
    std::size_t v;
    std::size_t next_child;
  };

  for (std::size_t s = 0; s < n; ++s) {
    if (index[s] >= 0) continue;
    std::vector<Frame> call;
    call.push_back({s, 0});
    index[s] = low[s] = next_index++;
    stack.push_back(s);
    on_stack[s] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      bool descended = false;
      while (f.next_child < n) {
        const std::size_t w = f.next_child++;
        if (P(f.v, w) <= edge_tol) continue;
        if (index[w] < 0) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[f.v] = std::min(low[f.v], index[w]);
      }
      if (descended) continue;
      if (low[f.v] == index[f.v]) {
        std::vector<std::size_t> comp;
        while (true) {
          const std::size_t w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
          if (w == f.v) break;
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
      const std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
    }
  }
  return comps;
}

// Gaussian elimination with partial pivoting; returns false on a pivot
// breakdown instead of throwing so callers can fall back.
bool solve_dense(Matrix A, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = A.rows();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(A(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(A(r, col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < 1e-14) return false;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(piv, j), A(col, j));
      std::swap(b[piv], b[col]);
    }
    const double d = A(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double m = A(r, col) / d;
      if (m == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) A(r, j) -= m * A(col, j);
      b[r] -= m * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
    x[i] = s / A(i, i);
  }
  return true;
}

// Stationary distribution of the kernel restricted to a closed class.
std::vector<double> stationary_on_class(const Matrix& P, const std::vector<std::size_t>& cls) {
  const std::size_t m = cls.size();
  if (m == 1) return {1.0};
  // Rows of (P^T - I) with the last equation replaced by sum(pi) = 1.
  Matrix A(m, m, 0.0);
  std::vector<double> b(m, 0.0);
  for (std::size_t r = 0; r + 1 < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) A(r, c) = P(cls[c], cls[r]) - (r == c ? 1.0 : 0.0);
  }
  for (std::size_t c = 0; c < m; ++c) A(m - 1, c) = 1.0;
  b[m - 1] = 1.0;

  std::vector<double> x;
  if (!solve_dense(A, b, x)) {
    // Least-squares fallback: stack all m stationarity equations plus the
    // normalisation row and solve the normal equations.
    Matrix G(m, m, 0.0);
    std::vector<double> rhs(m, 0.0);
    auto add_row = [&](const std::vector<double>& row, double target) {
      for (std::size_t i = 0; i < m; ++i) {
        rhs[i] += row[i] * target;
        for (std::size_t j = 0; j < m; ++j) G(i, j) += row[i] * row[j];
      }
    };
    std::vector<double> row(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) row[c] = P(cls[c], cls[r]) - (r == c ? 1.0 : 0.0);
      add_row(row, 0.0);
    }
    std::fill(row.begin(), row.end(), 1.0);
    add_row(row, 1.0);
    if (!solve_dense(G, rhs, x))
      fail(Errc::SingularSolve, "stationary system singular for class of size " + std::to_string(m));
  }
  // Scrub tiny negative dust and renormalise.
  double s = 0.0;
  for (double& v : x) {
    if (v < 0.0 && v > -1e-12) v = 0.0;
    if (v < 0.0) fail(Errc::SingularSolve, "stationary solve produced negative mass " + format_double(v));
    s += v;
  }
  if (s <= 0.0) fail(Errc::SingularSolve, "stationary solve produced zero mass");
  for (double& v : x) v /= s;
  return x;
}

}  // namespace

Kernel Kernel::validated(MetricSpace space, Matrix transition) {
  if (!transition.square() || transition.rows() != space.size())
    fail(Errc::InvalidArgument, "transition matrix size does not match space");
  const std::size_t n = transition.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = transition(i, j);
      if (!std::isfinite(v)) fail(Errc::NonFiniteValue, "non-finite transition probability");
      if (v < 0.0) fail(Errc::InvalidArgument, "negative transition probability " + format_double(v));
      s += v;
    }
    if (std::abs(s - 1.0) > tol::validation)
      fail(Errc::InvalidArgument, "row " + std::to_string(i) + " sums to " + format_double(s));
  }
  return Kernel(std::move(space), std::move(transition));
}

Kernel Kernel::step(int t) const {
  if (t < 0) fail(Errc::InvalidArgument, "time must be >= 0");
  Matrix acc = Matrix::identity(size());
  for (int k = 0; k < t; ++k) acc = acc.multiplied(P_);
  return Kernel(space_, std::move(acc));
}

std::vector<double> Kernel::apply_function(std::span<const double> phi, int t) const {
  if (phi.size() != size()) fail(Errc::SpaceMismatch, "function vector length mismatch");
  if (t < 0) fail(Errc::InvalidArgument, "time must be >= 0");
  for (double v : phi)
    if (!std::isfinite(v)) fail(Errc::NonFiniteValue, "non-finite function value");
  std::vector<double> cur(phi.begin(), phi.end()), next(size(), 0.0);
  for (int k = 0; k < t; ++k) {
    for (std::size_t i = 0; i < size(); ++i) {
      const auto row = P_.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < size(); ++j) s += row[j] * cur[j];
      next[i] = s;
    }
    std::swap(cur, next);
  }
  return cur;
}

Distribution Kernel::push_measure(const Distribution& mu, int t) const {
  if (mu.size() != size()) fail(Errc::SpaceMismatch, "measure lives on a different space");
  if (t < 0) fail(Errc::InvalidArgument, "time must be >= 0");
  std::vector<double> cur = mu.w, next(size(), 0.0);
  for (int k = 0; k < t; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
      const double a = cur[i];
      if (a == 0.0) continue;
      const auto row = P_.row(i);
      for (std::size_t j = 0; j < size(); ++j) next[j] += a * row[j];
    }
    std::swap(cur, next);
  }
  Distribution out;
  out.w = std::move(cur);
  return out;
}

Distribution Kernel::push_dirac(std::size_t x, int t) const {
  return push_measure(Distribution::dirac(size(), x), t);
}

Matrix Kernel::push_dirac_many(const std::vector<std::size_t>& starts, int t) const {
  if (t < 0) fail(Errc::InvalidArgument, "time must be >= 0");
  const std::size_t n = size(), r = starts.size();
  Matrix cur(r, n, 0.0);
  for (std::size_t s = 0; s < r; ++s) {
    if (starts[s] >= n) fail(Errc::InvalidArgument, "start state out of range");
    cur(s, starts[s]) = 1.0;
  }
  Matrix next(r, n, 0.0);
  for (int step = 0; step < t; ++step) {
    std::fill(next.data().begin(), next.data().end(), 0.0);
    // Stream P once per step: for each state k, scatter its row into every
    // batch row that holds mass at k.
    for (std::size_t k = 0; k < n; ++k) {
      const auto pk = P_.row(k);
      for (std::size_t s = 0; s < r; ++s) {
        const double a = cur(s, k);
        if (a == 0.0) continue;
        auto outs = next.row(s);
        for (std::size_t j = 0; j < n; ++j) outs[j] += a * pk[j];
      }
    }
    std::swap(cur, next);
  }
  return cur;
}

std::vector<Matrix> Kernel::push_dirac_many_at(const std::vector<std::size_t>& starts,
                                               const std::vector<int>& times) const {
  int max_t = 0;
  for (int t : times) {
    if (t < 0) fail(Errc::InvalidArgument, "time must be >= 0");
    max_t = std::max(max_t, t);
  }
  const std::size_t n = size(), r = starts.size();
  Matrix cur(r, n, 0.0);
  for (std::size_t s = 0; s < r; ++s) {
    if (starts[s] >= n) fail(Errc::InvalidArgument, "start state out of range");
    cur(s, starts[s]) = 1.0;
  }
  std::vector<Matrix> out(times.size());
  auto snapshot = [&](int t) {
    for (std::size_t k = 0; k < times.size(); ++k)
      if (times[k] == t) out[k] = cur;
  };
  snapshot(0);
  Matrix next(r, n, 0.0);
  for (int step = 1; step <= max_t; ++step) {
    std::fill(next.data().begin(), next.data().end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const auto pk = P_.row(k);
      for (std::size_t s = 0; s < r; ++s) {
        const double a = cur(s, k);
        if (a == 0.0) continue;
        auto outs = next.row(s);
        for (std::size_t j = 0; j < n; ++j) outs[j] += a * pk[j];
      }
    }
    std::swap(cur, next);
    snapshot(step);
  }
  return out;
}

ErgodicDecomposition Kernel::invariant_measures() const {
  const std::size_t n = size();
  auto comps = strongly_connected_components(P_, tol::graph_edge);
  // A class is closed when no member has an edge leaving the class.
  std::vector<int> comp_of(n, -1);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (std::size_t v : comps[c]) comp_of[v] = static_cast<int>(c);
  ErgodicDecomposition out;
  std::vector<std::vector<std::size_t>> closed;
  for (const auto& comp : comps) {
    bool is_closed = true;
    for (std::size_t v : comp) {
      for (std::size_t w = 0; w < n && is_closed; ++w)
        if (P_(v, w) > tol::graph_edge && comp_of[w] != comp_of[v]) is_closed = false;
      if (!is_closed) break;
    }
    if (is_closed) closed.push_back(comp);
  }
  std::sort(closed.begin(), closed.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (const auto& cls : closed) {
    const auto pi = stationary_on_class(P_, cls);
    Distribution mu;
    mu.w.assign(n, 0.0);
    for (std::size_t k = 0; k < cls.size(); ++k) mu.w[cls[k]] = pi[k];
    // Invariance check is part of the contract, not just a debug assert.
    const Distribution pushed = push_measure(mu, 1);
    const double res = l1_distance(mu.w, pushed.w);
    if (res > tol::invariant)
      fail(Errc::SingularSolve, "stationary residual " + format_double(res) + " exceeds tolerance");
    out.measures.push_back(std::move(mu));
    out.class_members.push_back(cls);
  }
  return out;
}

}  // namespace semcert
