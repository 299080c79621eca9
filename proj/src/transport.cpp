#include "semcert/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace semcert::transport {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void consolidate(std::vector<Triplet>& ts) {
  std::sort(ts.begin(), ts.end(), [](const Triplet& a, const Triplet& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  std::size_t w = 0;
  for (std::size_t r = 0; r < ts.size(); ++r) {
    if (w > 0 && ts[w - 1].i == ts[r].i && ts[w - 1].j == ts[r].j) {
      ts[w - 1].v += ts[r].v;
    } else {
      ts[w++] = ts[r];
    }
  }
  ts.resize(w);
  ts.erase(std::remove_if(ts.begin(), ts.end(), [](const Triplet& t) { return t.v == 0.0; }), ts.end());
}

// ---------------------------------------------------------------------------
// Dense transportation network simplex.
//
// Nodes 0..ns-1 are sources, ns..ns+ms-1 sinks; the basis is a spanning tree
// with the flow of each tree arc stored at its child endpoint. Entering arcs
// are found by rotating block search over the full arc set; a Bland rule
// takes over after a long degenerate run so the solve always terminates.
// ---------------------------------------------------------------------------

struct LPResult {
  double value = 0.0;
  std::vector<Triplet> flow;    // (source, sink) mass
  std::vector<double> f, g;     // dual potentials
  long pivots = 0;
};

class NetworkSimplex {
 public:
  NetworkSimplex(const Matrix& C, const std::vector<double>& a, const std::vector<double>& b, bool bland)
      : C_(C), a_(a), b_(b), ns_(a.size()), ms_(b.size()), N_(ns_ + ms_), bland_(bland) {
    parent_.assign(N_, -1);
    pflow_.assign(N_, 0.0);
    depth_.assign(N_, 0);
    pot_.assign(N_, 0.0);
    children_.assign(N_, {});
    double scale = 1.0;
    for (double v : C_.data()) scale = std::max(scale, std::abs(v));
    enter_tol_ = 1e-11 * scale;
    block_ = std::max<std::size_t>(64, static_cast<std::size_t>(std::sqrt(static_cast<double>(ns_ * ms_))));
  }

  bool solve(LPResult& out) {
    build_northwest_basis();
    refresh_potentials();
    const long pivot_cap = 4000 + 500 * static_cast<long>(N_);
    long degenerate_run = 0;
    while (true) {
      const auto [ep, eq, rc] = find_entering();
      if (ep < 0) break;
      if (pivots_ >= pivot_cap) return false;
      const double theta = pivot(static_cast<std::size_t>(ep), static_cast<std::size_t>(eq), rc);
      ++pivots_;
      if (theta <= 0.0) {
        if (++degenerate_run > 3 * static_cast<long>(N_)) bland_ = true;
      } else {
        degenerate_run = 0;
      }
    }
    finalize(out);
    return true;
  }

 private:
  bool is_source(std::size_t node) const { return node < ns_; }
  double arc_cost(std::size_t child, std::size_t par) const {
    return is_source(child) ? C_(child, par - ns_) : C_(par, child - ns_);
  }

  void attach(std::size_t node, std::size_t par, double flow) {
    parent_[node] = static_cast<int>(par);
    pflow_[node] = flow;
    depth_[node] = depth_[par] + 1;
    children_[par].push_back(node);
  }

  void build_northwest_basis() {
    std::vector<double> ra = a_, rb = b_;
    std::size_t p = 0, q = 0;
    depth_[0] = 0;  // root = source 0
    while (true) {
      const double t = std::min(ra[p], rb[q]);
      const std::size_t sp = p, sq = ns_ + q;
      if (p == 0 && q == 0) {
        attach(sq, sp, t);
      } else if (parent_[sq] < 0 && sq != 0) {
        attach(sq, sp, t);
      } else {
        attach(sp, sq, t);
      }
      ra[p] -= t;
      rb[q] -= t;
      if (p == ns_ - 1 && q == ms_ - 1) break;
      if (q == ms_ - 1) {
        ++p;
      } else if (p == ns_ - 1) {
        ++q;
      } else if (ra[p] <= rb[q]) {
        ++p;
      } else {
        ++q;
      }
    }
  }

  void refresh_potentials() {
    pot_[0] = 0.0;
    std::vector<std::size_t> stack = {0};
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t c : children_[v]) {
        pot_[c] = arc_cost(c, v) - pot_[v];
        depth_[c] = depth_[v] + 1;
        stack.push_back(c);
      }
    }
  }

  double reduced(std::size_t p, std::size_t q) const { return C_(p, q) - pot_[p] - pot_[ns_ + q]; }

  // Returns (source, sink-col, reduced cost) or (-1,-1,0) at optimality.
  std::tuple<long, long, double> find_entering() {
    const std::size_t total = ns_ * ms_;
    if (bland_) {
      for (std::size_t e = 0; e < total; ++e) {
        const std::size_t p = e / ms_, q = e % ms_;
        if (reduced(p, q) < -enter_tol_)
          return {static_cast<long>(p), static_cast<long>(q), reduced(p, q)};
      }
      return {-1, -1, 0.0};
    }
    std::size_t examined = 0;
    while (examined < total) {
      double best = -enter_tol_;
      long bp = -1, bq = -1;
      const std::size_t stop = std::min(total - examined, block_);
      for (std::size_t k = 0; k < stop; ++k) {
        const std::size_t e = scan_pos_;
        scan_pos_ = scan_pos_ + 1 == total ? 0 : scan_pos_ + 1;
        const std::size_t p = e / ms_, q = e % ms_;
        const double rc = reduced(p, q);
        if (rc < best) {
          best = rc;
          bp = static_cast<long>(p);
          bq = static_cast<long>(q);
        }
      }
      examined += stop;
      if (bp >= 0) return {bp, bq, best};
    }
    return {-1, -1, 0.0};
  }

  // Pivot on entering arc (p, q); returns theta (0 for a degenerate pivot).
  double pivot(std::size_t p, std::size_t q, double rc) {
    const std::size_t u = p, v = ns_ + q;
    path_u_.clear();
    path_v_.clear();
    std::size_t x = u, y = v;
    while (depth_[x] > depth_[y]) {
      path_u_.push_back(x);
      x = static_cast<std::size_t>(parent_[x]);
    }
    while (depth_[y] > depth_[x]) {
      path_v_.push_back(y);
      y = static_cast<std::size_t>(parent_[y]);
    }
    while (x != y) {
      path_u_.push_back(x);
      path_v_.push_back(y);
      x = static_cast<std::size_t>(parent_[x]);
      y = static_cast<std::size_t>(parent_[y]);
    }

    // Arcs at even positions along either path lose flow when the entering
    // arc gains; both walks start adjacent to an endpoint of the entering arc.
    double theta = kInf;
    long leave_side = 0;  // 1 = u-side, 2 = v-side
    std::size_t leave_node = 0;
    auto scan = [&](const std::vector<std::size_t>& path, long side) {
      for (std::size_t k = 0; k < path.size(); k += 2) {
        const double fl = pflow_[path[k]];
        const bool better = fl < theta - 1e-15 ||
                            (fl < theta + 1e-15 && (leave_side == 0 || (bland_ && path[k] < leave_node)));
        if (better) {
          theta = fl;
          leave_side = side;
          leave_node = path[k];
        }
      }
    };
    scan(path_u_, 1);
    scan(path_v_, 2);

    if (!std::isfinite(theta)) theta = 0.0;  // cannot happen: cycles alternate
    if (theta > 0.0) {
      for (std::size_t k = 0; k < path_u_.size(); ++k)
        pflow_[path_u_[k]] += (k % 2 == 0) ? -theta : theta;
      for (std::size_t k = 0; k < path_v_.size(); ++k)
        pflow_[path_v_[k]] += (k % 2 == 0) ? -theta : theta;
    }

    // Replace the leaving arc with the entering arc and re-root the detached
    // subtree at the entering endpoint on that side.
    const std::size_t enter_end = leave_side == 1 ? u : v;
    const std::size_t other_end = leave_side == 1 ? v : u;

    // Reverse the parent chain from enter_end up to leave_node.
    std::size_t cur = enter_end;
    int prev_parent = parent_[cur];
    double prev_flow = pflow_[cur];
    parent_[cur] = static_cast<int>(other_end);
    pflow_[cur] = theta;
    children_[other_end].push_back(cur);
    if (cur != leave_node) {
      std::size_t walk = static_cast<std::size_t>(prev_parent);
      std::size_t child = cur;
      while (true) {
        const int next_parent = parent_[walk];
        const double next_flow = pflow_[walk];
        // arc (child <-> walk) now stored at walk
        detach_child(walk, child);
        parent_[walk] = static_cast<int>(child);
        pflow_[walk] = prev_flow;
        children_[child].push_back(walk);
        if (walk == leave_node) {
          detach_child(static_cast<std::size_t>(next_parent), walk);
          break;
        }
        child = walk;
        walk = static_cast<std::size_t>(next_parent);
        prev_flow = next_flow;
      }
    } else {
      detach_child(static_cast<std::size_t>(prev_parent), cur);
    }

    // Recompute depth and potentials on the re-rooted subtree.
    depth_[enter_end] = depth_[other_end] + 1;
    pot_[enter_end] = arc_cost(enter_end, other_end) - pot_[other_end];
    subtree_stack_.clear();
    subtree_stack_.push_back(enter_end);
    while (!subtree_stack_.empty()) {
      const std::size_t n0 = subtree_stack_.back();
      subtree_stack_.pop_back();
      for (std::size_t c : children_[n0]) {
        depth_[c] = depth_[n0] + 1;
        pot_[c] = arc_cost(c, n0) - pot_[n0];
        subtree_stack_.push_back(c);
      }
    }
    (void)rc;
    return theta;
  }

  void detach_child(std::size_t par, std::size_t child) {
    auto& v = children_[par];
    v.erase(std::find(v.begin(), v.end(), child));
  }

  void finalize(LPResult& out) {
    // Exact flow refresh by subtree imbalance: kills drift accumulated by
    // repeated pivots and makes the marginals hold by construction.
    std::vector<std::size_t> order(N_);
    for (std::size_t i = 0; i < N_; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return depth_[l] > depth_[r]; });
    std::vector<double> sub(N_);
    for (std::size_t i = 0; i < N_; ++i) sub[i] = is_source(i) ? a_[i] : -b_[i - ns_];
    for (std::size_t node : order) {
      if (parent_[node] < 0) continue;
      double m = is_source(node) ? sub[node] : -sub[node];
      if (m < 0.0) m = 0.0;  // basis-feasible up to rounding dust
      pflow_[node] = m;
      sub[static_cast<std::size_t>(parent_[node])] += sub[node];
    }
    refresh_potentials();

    out.pivots = pivots_;
    out.value = 0.0;
    out.flow.clear();
    for (std::size_t node = 0; node < N_; ++node) {
      if (parent_[node] < 0 || pflow_[node] <= 0.0) continue;
      const std::size_t par = static_cast<std::size_t>(parent_[node]);
      const std::size_t src = is_source(node) ? node : par;
      const std::size_t snk = is_source(node) ? par : node;
      out.flow.push_back({src, snk - ns_, pflow_[node]});
      out.value += pflow_[node] * C_(src, snk - ns_);
    }
    out.f.assign(ns_, 0.0);
    out.g.assign(ms_, 0.0);
    for (std::size_t i = 0; i < ns_; ++i) out.f[i] = pot_[i];
    for (std::size_t j = 0; j < ms_; ++j) out.g[j] = pot_[ns_ + j];
  }

  const Matrix& C_;
  const std::vector<double>&a_, &b_;
  std::size_t ns_, ms_, N_;
  bool bland_;
  double enter_tol_ = 1e-11;
  std::size_t block_ = 64, scan_pos_ = 0;
  long pivots_ = 0;
  std::vector<int> parent_;
  std::vector<double> pflow_, pot_;
  std::vector<int> depth_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> path_u_, path_v_, subtree_stack_;
};

LPResult solve_dense_lp(const Matrix& C, const std::vector<double>& a, const std::vector<double>& b) {
  LPResult out;
  {
    NetworkSimplex s(C, a, b, /*bland=*/false);
    if (s.solve(out)) return out;
  }
  // Deterministic restart under the anti-cycling rule before giving up.
  NetworkSimplex s(C, a, b, /*bland=*/true);
  if (s.solve(out)) return out;
  fail(Errc::SolverFailure, "network simplex did not converge");
}

// ---------------------------------------------------------------------------
// Two-valued interval costs: exact greedy matcher plus a min-cut certificate.
//
// The zero set of each row is an index interval; maximising the mass carried
// by zero-cost arcs is then an interval scheduling problem solved by serving
// columns left to right from the active row with the earliest-expiring
// interval. The optimal duals are 0/v indicators of the reachable cut.
// ---------------------------------------------------------------------------

struct BandSolve {
  double matched = 0.0;
  std::vector<Triplet> near_flow;
  std::vector<double> leftover_mu, leftover_nu;
  std::vector<char> in_S, in_NS;
  bool ok = false;
};

BandSolve solve_band(const std::vector<double>& mu, const std::vector<double>& nu,
                     const CostMatrix::BandStructure& band) {
  const std::size_t n = mu.size();
  BandSolve r;
  r.leftover_mu = mu;
  r.leftover_nu = nu;

  std::vector<std::size_t> rows_by_lo;
  rows_by_lo.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (band.lo[i] >= 0 && mu[i] > 0.0) rows_by_lo.push_back(i);
  std::sort(rows_by_lo.begin(), rows_by_lo.end(),
            [&](std::size_t a, std::size_t b) { return band.lo[a] != band.lo[b] ? band.lo[a] < band.lo[b] : a < b; });

  using HeapItem = std::pair<std::ptrdiff_t, std::size_t>;  // (hi, row)
  std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> active;
  std::size_t next_row = 0;

  for (std::size_t j = 0; j < n; ++j) {
    while (next_row < rows_by_lo.size() && band.lo[rows_by_lo[next_row]] <= static_cast<std::ptrdiff_t>(j)) {
      const std::size_t i = rows_by_lo[next_row++];
      active.push({band.hi[i], i});
    }
    while (!active.empty() && active.top().first < static_cast<std::ptrdiff_t>(j)) active.pop();
    double demand = r.leftover_nu[j];
    if (demand <= 0.0) continue;
    while (demand > 0.0 && !active.empty()) {
      const std::size_t i = active.top().second;
      double& supply = r.leftover_mu[i];
      if (supply <= 0.0) {
        active.pop();
        continue;
      }
      const double t = std::min(supply, demand);
      supply -= t;
      demand -= t;
      r.matched += t;
      r.near_flow.push_back({i, j, t});
      if (supply <= 0.0) active.pop();
    }
    r.leftover_nu[j] = demand;
  }

  // Min-cut: S = rows reachable from leftover rows in the residual graph,
  // N(S) = their zero-cost columns; no leftover column may be reachable.
  std::vector<std::vector<std::size_t>> col_suppliers(n);
  for (std::size_t e = 0; e < r.near_flow.size(); ++e) col_suppliers[r.near_flow[e].j].push_back(e);

  r.in_S.assign(n, 0);
  r.in_NS.assign(n, 0);
  std::vector<std::size_t> row_queue;
  for (std::size_t i = 0; i < n; ++i)
    if (r.leftover_mu[i] > 0.0 && mu[i] > 0.0) {
      r.in_S[i] = 1;
      row_queue.push_back(i);
    }
  std::vector<std::size_t> col_queue;
  while (!row_queue.empty() || !col_queue.empty()) {
    if (!row_queue.empty()) {
      const std::size_t i = row_queue.back();
      row_queue.pop_back();
      for (std::ptrdiff_t j = band.lo[i]; j >= 0 && j <= band.hi[i]; ++j) {
        if (!r.in_NS[static_cast<std::size_t>(j)]) {
          r.in_NS[static_cast<std::size_t>(j)] = 1;
          col_queue.push_back(static_cast<std::size_t>(j));
        }
      }
    } else {
      const std::size_t j = col_queue.back();
      col_queue.pop_back();
      if (r.leftover_nu[j] > 1e-12) return r;  // augmenting path: solve is not optimal
      for (std::size_t e : col_suppliers[j]) {
        const std::size_t i = r.near_flow[e].i;
        if (!r.in_S[i]) {
          r.in_S[i] = 1;
          row_queue.push_back(i);
        }
      }
    }
  }
  r.ok = true;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------

Coupling Coupling::from_dense(const Matrix& joint, std::vector<double> mu, std::vector<double> nu) {
  if (joint.rows() != mu.size() || joint.cols() != nu.size())
    fail(Errc::InvalidArgument, "joint matrix shape does not match marginals");
  Coupling c;
  c.rows = joint.rows();
  c.cols = joint.cols();
  c.mu = std::move(mu);
  c.nu = std::move(nu);
  for (std::size_t i = 0; i < c.rows; ++i)
    for (std::size_t j = 0; j < c.cols; ++j) {
      const double v = joint(i, j);
      if (!std::isfinite(v)) fail(Errc::NonFiniteValue, "non-finite joint entry");
      if (v < 0.0) fail(Errc::InvalidArgument, "negative joint entry " + format_double(v));
      if (v > 0.0) c.entries.push_back({i, j, v});
    }
  const double err = c.marginal_error();
  if (err > tol::coupling_marginal)
    fail(Errc::MarginalMismatch, "joint marginals deviate by " + format_double(err));
  return c;
}

std::vector<double> Coupling::row_marginal() const {
  std::vector<double> m(rows, 0.0);
  for (const auto& t : entries) m[t.i] += t.v;
  return m;
}

std::vector<double> Coupling::col_marginal() const {
  std::vector<double> m(cols, 0.0);
  for (const auto& t : entries) m[t.j] += t.v;
  return m;
}

Matrix Coupling::dense() const {
  Matrix m(rows, cols, 0.0);
  for (const auto& t : entries) m(t.i, t.j) += t.v;
  return m;
}

double Coupling::total_mass() const {
  double s = 0.0;
  for (const auto& t : entries) s += t.v;
  return s;
}

double Coupling::off_diagonal_mass() const {
  double s = 0.0;
  for (const auto& t : entries)
    if (t.i != t.j) s += t.v;
  return s;
}

double Coupling::marginal_error() const {
  const auto rm = row_marginal();
  const auto cm = col_marginal();
  return std::max(l1_distance(rm, mu), l1_distance(cm, nu));
}

void verify_certificate(const TransportResult& r, const Distribution& mu, const Distribution& nu,
                        const CostMatrix& cost) {
  const std::size_t n = mu.size();
  const double err = r.coupling.marginal_error();
  if (err > tol::coupling_marginal)
    fail(Errc::SolverFailure, "optimal coupling violates marginals by " + format_double(err));
  double primal = 0.0;
  for (const auto& t : r.coupling.entries) {
    if (t.v < 0.0) fail(Errc::SolverFailure, "negative coupling mass");
    primal += t.v * cost(t.i, t.j);
  }
  if (std::abs(primal - r.value) > tol::value_consistency)
    fail(Errc::SolverFailure, "reported value inconsistent with coupling");
  double worst_slack = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = r.potential_mu[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double s = fi + r.potential_nu[j] - cost(i, j);
      if (s > worst_slack) worst_slack = s;
    }
  }
  if (worst_slack > tol::dual_feasibility)
    fail(Errc::SolverFailure, "dual potentials infeasible by " + format_double(worst_slack));
  double dual = 0.0;
  for (std::size_t i = 0; i < n; ++i) dual += r.potential_mu[i] * mu.w[i] + r.potential_nu[i] * nu.w[i];
  if (std::abs(r.value - dual) > tol::duality_gap)
    fail(Errc::SolverFailure, "duality gap " + format_double(r.value - dual) + " exceeds tolerance");
}

namespace {

// Returns false when the matcher detects an augmenting path (cannot happen
// for valid band structures, but then the caller falls back to the simplex).
bool solve_via_band(const Distribution& mu, const Distribution& nu, const CostMatrix& cost,
                    TransportResult& out) {
  const auto& band = *cost.band();
  auto bs = solve_band(mu.w, nu.w, band);
  if (!bs.ok) return false;
  TransportResult r;
  r.coupling.rows = r.coupling.cols = mu.size();
  r.coupling.mu = mu.w;
  r.coupling.nu = nu.w;
  r.coupling.entries = std::move(bs.near_flow);

  // Complete the coupling: leftover supplies against leftover demands, paired
  // in index order. Every such pair is a far arc, so placement is irrelevant
  // to optimality.
  double leftover = 0.0;
  {
    std::size_t i = 0, j = 0;
    const std::size_t n = mu.size();
    while (true) {
      while (i < n && bs.leftover_mu[i] <= 0.0) ++i;
      while (j < n && bs.leftover_nu[j] <= 0.0) ++j;
      if (i >= n || j >= n) break;
      const double t = std::min(bs.leftover_mu[i], bs.leftover_nu[j]);
      bs.leftover_mu[i] -= t;
      bs.leftover_nu[j] -= t;
      leftover += t;
      r.coupling.entries.push_back({i, j, t});
    }
  }
  consolidate(r.coupling.entries);
  const double v = band.level;
  r.value = v * leftover;
  r.potential_mu.assign(mu.size(), 0.0);
  r.potential_nu.assign(nu.size(), 0.0);
  double dual = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (bs.in_S[i]) {
      r.potential_mu[i] = v;
      dual += v * mu.w[i];
    }
    if (bs.in_NS[i]) {
      r.potential_nu[i] = -v;
      dual -= v * nu.w[i];
    }
  }
  r.duality_gap = r.value - dual;
  // Certificate checks, all linear in the band size so the hot loops that
  // issue thousands of indicator solves stay cheap: structural dual
  // feasibility (every zero-cost arc out of S lands in N(S)), marginal
  // feasibility, value consistency and the gap.
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!bs.in_S[i]) continue;
    for (std::ptrdiff_t j = band.lo[i]; j >= 0 && j <= band.hi[i]; ++j)
      if (!bs.in_NS[static_cast<std::size_t>(j)]) return false;
  }
  if (std::abs(r.duality_gap) > tol::duality_gap) return false;
  const double err = r.coupling.marginal_error();
  if (err > tol::coupling_marginal)
    fail(Errc::SolverFailure, "interval matcher violates marginals by " + format_double(err));
  double primal = 0.0;
  for (const auto& t : r.coupling.entries) primal += t.v * cost(t.i, t.j);
  if (std::abs(primal - r.value) > tol::value_consistency)
    fail(Errc::SolverFailure, "interval matcher value inconsistent with coupling");
  out = std::move(r);
  return true;
}

TransportResult solve_general(const Distribution& mu, const Distribution& nu, const CostMatrix& cost,
                              bool allow_reduction) {
  const std::size_t n = mu.size();
  TransportResult r;
  r.coupling.rows = r.coupling.cols = n;
  r.coupling.mu = mu.w;
  r.coupling.nu = nu.w;

  // Shared mass can sit still when the cost satisfies the triangle
  // inequality; only the residuals need transporting.
  std::vector<double> a = mu.w, b = nu.w;
  const bool reduce = allow_reduction && cost.is_pseudo_metric();
  if (reduce) {
    for (std::size_t i = 0; i < n; ++i) {
      const double m = std::min(a[i], b[i]);
      if (m > 0.0) {
        r.coupling.entries.push_back({i, i, m});
        a[i] -= m;
        b[i] -= m;
      }
    }
  }

  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] > 0.0) rows.push_back(i);
    if (b[i] > 0.0) cols.push_back(i);
  }

  r.potential_mu.assign(n, 0.0);
  r.potential_nu.assign(n, 0.0);

  if (rows.empty() || cols.empty()) {
    // mu == nu (after reduction) or degenerate dust; the zero potentials are
    // feasible because costs are nonnegative with zero diagonal.
    r.value = 0.0;
    r.duality_gap = 0.0;
    if (!reduce) {
      for (std::size_t i = 0; i < n; ++i)
        if (mu.w[i] > 0.0) r.coupling.entries.push_back({i, i, mu.w[i]});
    }
    consolidate(r.coupling.entries);
    return r;
  }

  Matrix C(rows.size(), cols.size());
  std::vector<double> av(rows.size()), bv(cols.size());
  for (std::size_t p = 0; p < rows.size(); ++p) {
    av[p] = a[rows[p]];
    for (std::size_t q = 0; q < cols.size(); ++q) C(p, q) = cost(rows[p], cols[q]);
  }
  for (std::size_t q = 0; q < cols.size(); ++q) bv[q] = b[cols[q]];

  LPResult lp = solve_dense_lp(C, av, bv);
  r.value = lp.value;
  for (const auto& t : lp.flow) r.coupling.entries.push_back({rows[t.i], cols[t.j], t.v});
  consolidate(r.coupling.entries);

  if (reduce) {
    // Canonical extension: g is the cost-inf-convolution of the reduced row
    // potentials, hence cost-Lipschitz; f = -g then keeps every diagonal arc
    // tight, so complementary slackness survives the reduction.
    for (std::size_t j = 0; j < n; ++j) {
      double best = kInf;
      for (std::size_t p = 0; p < rows.size(); ++p) best = std::min(best, cost(rows[p], j) - lp.f[p]);
      r.potential_nu[j] = best;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double best = kInf;
      for (std::size_t j = 0; j < n; ++j) best = std::min(best, cost(i, j) - r.potential_nu[j]);
      r.potential_mu[i] = best;
    }
  } else {
    for (std::size_t p = 0; p < rows.size(); ++p) r.potential_mu[rows[p]] = lp.f[p];
    for (std::size_t q = 0; q < cols.size(); ++q) r.potential_nu[cols[q]] = lp.g[q];
    std::vector<char> row_kept(n, 0), col_kept(n, 0);
    for (std::size_t p : rows) row_kept[p] = 1;
    for (std::size_t q : cols) col_kept[q] = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (col_kept[j]) continue;
      double best = kInf;
      for (std::size_t p : rows) best = std::min(best, cost(p, j) - r.potential_mu[p]);
      r.potential_nu[j] = best;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (row_kept[i]) continue;
      double best = kInf;
      for (std::size_t j = 0; j < n; ++j) best = std::min(best, cost(i, j) - r.potential_nu[j]);
      r.potential_mu[i] = best;
    }
  }

  double dual = 0.0;
  for (std::size_t i = 0; i < n; ++i) dual += r.potential_mu[i] * mu.w[i] + r.potential_nu[i] * nu.w[i];
  r.duality_gap = r.value - dual;
  return r;
}

}  // namespace

TransportResult wasserstein(const Distribution& mu, const Distribution& nu, const CostMatrix& cost,
                            const SolveOptions& opts) {
  if (mu.size() != nu.size()) fail(Errc::SpaceMismatch, "marginals live on different spaces");
  if (cost.size() != mu.size()) fail(Errc::SpaceMismatch, "cost matrix does not match the space");
  if (opts.allow_band_path && cost.band().has_value()) {
    TransportResult r;
    if (solve_via_band(mu, nu, cost, r)) return r;
  }
  TransportResult r = solve_general(mu, nu, cost, opts.allow_reduction);
  if (std::abs(r.duality_gap) > tol::duality_gap) {
    // Deterministic retry without the reduction before declaring failure.
    r = solve_general(mu, nu, cost, false);
  }
  verify_certificate(r, mu, nu, cost);
  return r;
}

Coupling maximal_coupling(const Distribution& mu, const Distribution& nu) {
  if (mu.size() != nu.size()) fail(Errc::SpaceMismatch, "marginals live on different spaces");
  const std::size_t n = mu.size();
  Coupling c;
  c.rows = c.cols = n;
  c.mu = mu.w;
  c.nu = nu.w;
  std::vector<double> ra(n), rb(n);
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = std::min(mu.w[i], nu.w[i]);
    if (m > 0.0) c.entries.push_back({i, i, m});
    ra[i] = mu.w[i] - m;
    rb[i] = nu.w[i] - m;
    residual += ra[i];
  }
  if (residual > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (ra[i] <= 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (rb[j] <= 0.0) continue;
        c.entries.push_back({i, j, ra[i] * rb[j] / residual});
      }
    }
  }
  consolidate(c.entries);
  return c;
}

ClosenessResult max_closeness(const Distribution& mu, const Distribution& nu, const Matrix& dist, double eps) {
  if (eps < 0.0) fail(Errc::InvalidArgument, "eps must be >= 0");
  return max_closeness_with_cost(mu, nu, CostMatrix::far_indicator(dist, eps));
}

ClosenessResult max_closeness_with_cost(const Distribution& mu, const Distribution& nu,
                                        const CostMatrix& far_cost) {
  auto r = wasserstein(mu, nu, far_cost);
  ClosenessResult out;
  out.value = std::clamp(1.0 - r.value, 0.0, 1.0);
  out.coupling = std::move(r.coupling);
  return out;
}

Coupling TripleJoint::marginal12() const {
  Coupling c;
  c.rows = c.cols = n;
  for (const auto& e : entries) c.entries.push_back({e.i, e.j, e.v});
  consolidate(c.entries);
  c.mu = c.row_marginal();
  c.nu = c.col_marginal();
  return c;
}

Coupling TripleJoint::marginal23() const {
  Coupling c;
  c.rows = c.cols = n;
  for (const auto& e : entries) c.entries.push_back({e.j, e.k, e.v});
  consolidate(c.entries);
  c.mu = c.row_marginal();
  c.nu = c.col_marginal();
  return c;
}

Coupling TripleJoint::marginal13() const {
  Coupling c;
  c.rows = c.cols = n;
  for (const auto& e : entries) c.entries.push_back({e.i, e.k, e.v});
  consolidate(c.entries);
  c.mu = c.row_marginal();
  c.nu = c.col_marginal();
  return c;
}

double TripleJoint::total_mass() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.v;
  return s;
}

TripleJoint glue(const Coupling& g12, const Coupling& g23) {
  if (g12.cols != g23.rows) fail(Errc::SpaceMismatch, "couplings do not share the middle space");
  const std::size_t n = g12.cols;
  const auto mid_left = g12.col_marginal();
  const auto mid_right = g23.row_marginal();
  const double mismatch = l1_distance(mid_left, mid_right);
  if (mismatch > tol::glue_precondition)
    fail(Errc::MarginalMismatch, "shared marginals disagree in L1 by " + format_double(mismatch));

  std::vector<std::vector<const Triplet*>> by_mid_left(n), by_mid_right(n);
  for (const auto& t : g12.entries) by_mid_left[t.j].push_back(&t);
  for (const auto& t : g23.entries) by_mid_right[t.i].push_back(&t);

  TripleJoint T;
  T.n = std::max(g12.rows, g23.cols);
  for (std::size_t j = 0; j < n; ++j) {
    const double denom = mid_right[j];
    if (denom == 0.0) {
      if (mid_left[j] > tol::glue_precondition)
        fail(Errc::MarginalMismatch, "mass stranded on an empty middle slice");
      continue;
    }
    for (const Triplet* l : by_mid_left[j])
      for (const Triplet* r : by_mid_right[j]) T.entries.push_back({l->i, j, r->j, l->v * r->v / denom});
  }
  return T;
}

double kantorovich_dual_value(const Distribution& mu, const Distribution& nu, const CostMatrix& cost) {
  if (mu.size() != nu.size()) fail(Errc::SpaceMismatch, "marginals live on different spaces");
  if (cost.size() != mu.size()) fail(Errc::SpaceMismatch, "cost matrix does not match the space");
  if (!cost.is_pseudo_metric()) fail(Errc::NotPseudoMetric, "dual route requires a pseudo-metric cost");
  const std::size_t n = mu.size();

  // Minimum-cost transshipment of the signed imbalance mu - nu over the
  // single-copy graph, by successive shortest paths with Johnson potentials.
  std::vector<double> imbalance(n);
  for (std::size_t i = 0; i < n; ++i) imbalance[i] = mu.w[i] - nu.w[i];
  Matrix flow(n, n, 0.0);
  std::vector<double> pi(n, 0.0), dist(n);
  std::vector<int> pred(n);
  std::vector<char> done(n), pred_res(n);

  const long iter_cap = 10 * static_cast<long>(n) * static_cast<long>(n) + 100;
  long iters = 0;
  while (true) {
    if (++iters > iter_cap) fail(Errc::SolverFailure, "transshipment did not converge");
    std::size_t src = n;
    double best_sur = tol::positivity;
    for (std::size_t i = 0; i < n; ++i)
      if (imbalance[i] > best_sur) {
        best_sur = imbalance[i];
        src = i;
      }
    if (src == n) break;

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(pred.begin(), pred.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    std::fill(pred_res.begin(), pred_res.end(), 0);
    dist[src] = 0.0;
    for (std::size_t it = 0; it < n; ++it) {
      std::size_t u = n;
      double du = kInf;
      for (std::size_t i = 0; i < n; ++i)
        if (!done[i] && dist[i] < du) {
          du = dist[i];
          u = i;
        }
      if (u == n) break;
      done[u] = 1;
      for (std::size_t v = 0; v < n; ++v) {
        if (v == u) continue;
        // forward arc u->v, plus the residual of v->u flow at negative cost
        double rc = cost(u, v) + pi[u] - pi[v];
        if (rc < 0.0 && rc > -1e-9) rc = 0.0;  // rounding guard
        if (dist[u] + rc < dist[v] - 1e-15) {
          dist[v] = dist[u] + rc;
          pred[v] = static_cast<int>(u);
          pred_res[v] = 0;
        }
        if (flow(v, u) > 0.0) {
          double rr = -cost(v, u) + pi[u] - pi[v];
          if (rr < 0.0 && rr > -1e-9) rr = 0.0;
          if (dist[u] + rr < dist[v] - 1e-15) {
            dist[v] = dist[u] + rr;
            pred[v] = static_cast<int>(u);
            pred_res[v] = 1;
          }
        }
      }
    }

    std::size_t dst = n;
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i)
      if (imbalance[i] < -tol::positivity && dist[i] < best) {
        best = dist[i];
        dst = i;
      }
    if (dst == n) fail(Errc::SolverFailure, "transshipment could not route all surplus");

    double amount = std::min(imbalance[src], -imbalance[dst]);
    for (std::size_t v = dst; v != src;) {
      const std::size_t u = static_cast<std::size_t>(pred[v]);
      if (pred_res[v]) amount = std::min(amount, flow(v, u));
      v = u;
    }
    for (std::size_t v = dst; v != src;) {
      const std::size_t u = static_cast<std::size_t>(pred[v]);
      const double cancel = std::min(amount, flow(v, u));
      flow(v, u) -= cancel;
      flow(u, v) += amount - cancel;
      v = u;
    }
    imbalance[src] -= amount;
    imbalance[dst] += amount;
    for (std::size_t i = 0; i < n; ++i)
      if (dist[i] < kInf) pi[i] += std::min(dist[i], best);
  }

  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) value += flow(i, j) * cost(i, j);
  return value;
}

}  // namespace semcert::transport
