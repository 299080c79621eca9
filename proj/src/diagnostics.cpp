#include "semcert/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace semcert::diagnostics {

namespace {

Distribution row_distribution(std::span<const double> row) {
  Distribution d;
  d.w.assign(row.begin(), row.end());
  return d;
}

// Rows P_t(x, .) for every (state, time) a grid sweep needs, computed in one
// pass per distinct time set.
class RowCache {
 public:
  RowCache(const Kernel& kernel, std::vector<std::size_t> states, const std::vector<int>& times)
      : states_(std::move(states)) {
    std::sort(states_.begin(), states_.end());
    states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
    std::vector<int> distinct = times;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    times_ = distinct;
    snapshots_ = kernel.push_dirac_many_at(states_, times_);
  }

  std::span<const double> row(std::size_t state, int t) const {
    const auto si = std::lower_bound(states_.begin(), states_.end(), state);
    const auto ti = std::lower_bound(times_.begin(), times_.end(), t);
    if (si == states_.end() || *si != state || ti == times_.end() || *ti != t)
      fail(Errc::InvalidArgument, "row cache miss");
    return snapshots_[static_cast<std::size_t>(ti - times_.begin())].row(
        static_cast<std::size_t>(si - states_.begin()));
  }

 private:
  std::vector<std::size_t> states_;
  std::vector<int> times_;
  std::vector<Matrix> snapshots_;
};

void validate_pairs(const PairGrid& pairs, std::size_t n) {
  if (pairs.empty()) fail(Errc::InvalidArgument, "pair grid must be non-empty");
  for (const auto& [x, y] : pairs)
    if (x >= n || y >= n) fail(Errc::InvalidArgument, "pair grid state out of range");
}

void validate_times(const std::vector<int>& times, int min_allowed) {
  if (times.empty()) fail(Errc::InvalidArgument, "time list must be non-empty");
  for (int t : times)
    if (t < min_allowed) fail(Errc::InvalidArgument, "time " + std::to_string(t) + " below " + std::to_string(min_allowed));
}

std::vector<std::size_t> pair_states(const PairGrid& pairs) {
  std::vector<std::size_t> s;
  for (const auto& [x, y] : pairs) {
    s.push_back(x);
    s.push_back(y);
  }
  return s;
}

// Validates a provider joint against the kernel law of the second coordinate.
void check_provider_joint(const SparseJoint& joint, std::span<const double> law_y, std::size_t n) {
  if (joint.n != n) fail(Errc::SpaceMismatch, "provider joint has wrong dimension");
  double total = 0.0;
  for (const auto& e : joint.entries) {
    if (e.i >= n || e.j >= n) fail(Errc::MarginalMismatch, "provider joint index out of range");
    if (!(e.v >= 0.0)) fail(Errc::MarginalMismatch, "provider joint has negative mass");
    total += e.v;
  }
  if (std::abs(total - 1.0) > tol::coupling_marginal)
    fail(Errc::MarginalMismatch, "provider joint mass " + format_double(total));
  const auto col = joint.col_marginal();
  const double err = l1_distance(col, law_y);
  if (err > tol::coupling_marginal)
    fail(Errc::MarginalMismatch, "provider second marginal deviates from the kernel law by " + format_double(err));
}

double expected_distance(const SparseJoint& joint, const MetricSpace& space) {
  double s = 0.0;
  for (const auto& e : joint.entries) s += e.v * space.dist(e.i, e.j);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// FuncDesc
// ---------------------------------------------------------------------------

FuncDesc FuncDesc::constant(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) fail(Errc::InvalidArgument, "constant envelope must be finite and >= 0");
  FuncDesc f;
  f.kind_ = Kind::Constant;
  f.b_ = c;
  return f;
}

FuncDesc FuncDesc::affine(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b))
    fail(Errc::InvalidArgument, "affine envelope needs slope >= 0 and offset >= 0");
  FuncDesc f;
  f.kind_ = Kind::Affine;
  f.a_ = a;
  f.b_ = b;
  return f;
}

FuncDesc FuncDesc::table(std::vector<double> args, std::vector<double> values) {
  if (args.empty() || args.size() != values.size())
    fail(Errc::InvalidArgument, "envelope table needs matching non-empty args/values");
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!std::isfinite(args[i]) || !std::isfinite(values[i]) || values[i] < 0.0)
      fail(Errc::InvalidArgument, "envelope table entries must be finite and >= 0");
    if (i > 0 && !(args[i] > args[i - 1]))
      fail(Errc::InvalidArgument, "envelope table args must be strictly increasing");
    if (i > 0 && values[i] < values[i - 1])
      fail(Errc::InvalidArgument, "envelope table must be non-decreasing");
  }
  FuncDesc f;
  f.kind_ = Kind::Table;
  f.args_ = std::move(args);
  f.values_ = std::move(values);
  return f;
}

double FuncDesc::operator()(double u) const {
  switch (kind_) {
    case Kind::Constant:
      return b_;
    case Kind::Affine:
      return a_ * u + b_;
    case Kind::Table: {
      auto it = std::upper_bound(args_.begin(), args_.end(), u);
      if (it == args_.begin()) return values_.front();
      return values_[static_cast<std::size_t>(it - args_.begin()) - 1];
    }
  }
  return 0.0;
}

FuncDesc FuncDesc::scaled_sum(const FuncDesc& f, double sf, const FuncDesc& g, double sg) {
  if (sf < 0.0 || sg < 0.0) fail(Errc::InvalidArgument, "scaled sum needs nonnegative scales");
  const bool f_tab = f.kind_ == Kind::Table, g_tab = g.kind_ == Kind::Table;
  if (!f_tab && !g_tab) {
    const double a = sf * f.a_ + sg * g.a_;
    const double b = sf * f.b_ + sg * g.b_;
    return a == 0.0 ? constant(b) : affine(a, b);
  }
  if ((f_tab && g.kind_ == Kind::Affine && g.a_ > 0.0) || (g_tab && f.kind_ == Kind::Affine && f.a_ > 0.0))
    fail(Errc::InvalidArgument, "cannot combine a step table with a strictly increasing affine term exactly");
  // table + table / table + constant: merge breakpoints and add values.
  std::vector<double> args;
  if (f_tab) args.insert(args.end(), f.args_.begin(), f.args_.end());
  if (g_tab) args.insert(args.end(), g.args_.begin(), g.args_.end());
  if (args.empty()) args.push_back(0.0);
  std::sort(args.begin(), args.end());
  args.erase(std::unique(args.begin(), args.end()), args.end());
  std::vector<double> values;
  values.reserve(args.size());
  for (double u : args) values.push_back(sf * f(u) + sg * g(u));
  return table(std::move(args), std::move(values));
}

void AsfPlusCertificate::validate(std::size_t space_size) const {
  if (x0 >= space_size) fail(Errc::BadBaseIndex, "certificate base point out of range");
  if (times.empty() || slacks.size() != times.size())
    fail(Errc::InvalidArgument, "certificate needs matching non-empty times/slacks");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 1) fail(Errc::InvalidArgument, "certificate times must be >= 1");
    if (i > 0 && times[i] < times[i - 1]) fail(Errc::InvalidArgument, "certificate times must be non-decreasing");
    if (!(slacks[i] >= 0.0)) fail(Errc::InvalidArgument, "certificate slacks must be >= 0");
    if (i > 0 && slacks[i] > slacks[i - 1] + 1e-15)
      fail(Errc::InvalidArgument, "certificate slacks must be non-increasing");
  }
}

// ---------------------------------------------------------------------------
// Gradient bound check
// ---------------------------------------------------------------------------

AsfPlusReport check_asf_plus(const Kernel& kernel, const AsfPlusCertificate& cert, const PairGrid& pairs,
                             const std::vector<AKPair>& ak_grid, double slack) {
  const MetricSpace& space = kernel.space();
  cert.validate(space.size());
  validate_pairs(pairs, space.size());
  if (ak_grid.empty()) fail(Errc::InvalidArgument, "budget grid must be non-empty");
  for (const auto& ak : ak_grid)
    if (!(ak.A > 0.0) || !(ak.K > 0.0)) fail(Errc::InvalidArgument, "budget grid entries must be positive");

  std::vector<CostMatrix> costs;
  costs.reserve(ak_grid.size());
  for (const auto& ak : ak_grid) costs.push_back(capped_lipschitz_cost(space, ak.A, ak.K));

  RowCache rows(kernel, pair_states(pairs), cert.times);

  AsfPlusReport report;
  report.slack = slack;
  report.records.resize(cert.times.size() * pairs.size() * ak_grid.size());

  for (std::size_t ni = 0; ni < cert.times.size(); ++ni) {
    const int t = cert.times[ni];
    const double delta = cert.slacks[ni];
    parallel_for(pairs.size() * ak_grid.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t k = lo; k < hi; ++k) {
        const std::size_t pi = k / ak_grid.size();
        const std::size_t ai = k % ak_grid.size();
        const auto [x, y] = pairs[pi];
        const AKPair ak = ak_grid[ai];
        AsfPlusRecord rec;
        rec.x = x;
        rec.y = y;
        rec.n = ni;
        rec.t = t;
        rec.A = ak.A;
        rec.K = ak.K;
        const double dxy = space.dist(x, y);
        const double u = std::max(space.dist(x, cert.x0), space.dist(y, cert.x0));
        rec.rhs = dxy * cert.F(u) * (ak.A + delta * ak.K);
        if (x == y) {
          rec.lhs = 0.0;
        } else {
          const Distribution mu = row_distribution(rows.row(x, t));
          const Distribution nu = row_distribution(rows.row(y, t));
          rec.lhs = transport::wasserstein(mu, nu, costs[ai]).value;
        }
        rec.margin = rec.rhs - rec.lhs;
        rec.pass = rec.lhs <= rec.rhs + slack;
        report.records[ni * pairs.size() * ak_grid.size() + k] = rec;
      }
    });
  }
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    report.pass = report.pass && report.records[i].pass;
    if (report.records[i].margin < report.records[report.worst].margin) report.worst = i;
  }
  return report;
}

AsfProfile asf_profile(const Kernel& kernel, std::size_t x, const std::vector<int>& times,
                       const std::vector<int>& n_list, const std::vector<double>& radii) {
  const MetricSpace& space = kernel.space();
  if (x >= space.size()) fail(Errc::InvalidArgument, "profile center out of range");
  if (n_list.empty() || n_list.size() != times.size())
    fail(Errc::InvalidArgument, "profile needs matching non-empty times/n_list");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) fail(Errc::InvalidArgument, "separation indices must be increasing");
  if (radii.empty()) fail(Errc::InvalidArgument, "radius list must be non-empty");
  for (double r : radii)
    if (!(r > 0.0)) fail(Errc::InvalidArgument, "radii must be positive");
  validate_times(times, 0);

  const double max_r = *std::max_element(radii.begin(), radii.end());
  std::vector<std::size_t> states = space.ball(x, max_r);
  states.push_back(x);
  RowCache rows(kernel, states, times);

  AsfProfile out;
  out.n_list = n_list;
  out.times = times;
  out.radii = radii;
  out.values = Matrix(n_list.size(), radii.size(), 0.0);
  out.empty_ball.assign(n_list.size(), std::vector<char>(radii.size(), 0));
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    const CostMatrix dn = separating_family(space, n_list[k]);
    const Distribution mu = row_distribution(rows.row(x, times[k]));
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
      const auto ball = space.ball(x, radii[ri]);
      double sup = 0.0;
      bool any = false;
      std::vector<double> vals(ball.size(), 0.0);
      parallel_for(ball.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t b = lo; b < hi; ++b) {
          if (ball[b] == x) continue;
          const Distribution nu = row_distribution(rows.row(ball[b], times[k]));
          vals[b] = transport::wasserstein(mu, nu, dn).value;
        }
      });
      for (std::size_t b = 0; b < ball.size(); ++b) {
        if (ball[b] == x) continue;
        any = true;
        sup = std::max(sup, vals[b]);
      }
      out.values(k, ri) = sup;
      out.empty_ball[k][ri] = any ? 0 : 1;
    }
  }
  out.tail_score.assign(radii.size(), 0.0);
  const std::size_t tail_begin = n_list.size() / 2;
  for (std::size_t ri = 0; ri < radii.size(); ++ri)
    for (std::size_t k = tail_begin; k < n_list.size(); ++k)
      out.tail_score[ri] = std::max(out.tail_score[ri], out.values(k, ri));
  return out;
}

LwiReport check_lwi(const Kernel& kernel, double R, double eps, const std::vector<int>& times) {
  const MetricSpace& space = kernel.space();
  if (!(R > 0.0)) fail(Errc::InvalidArgument, "radius must be positive");
  if (!(eps > 0.0)) fail(Errc::InvalidArgument, "eps must be positive");
  validate_times(times, 0);

  const auto ball = space.ball(space.base_index(), R);
  if (ball.empty()) fail(Errc::EmptyBall, "ball around the base point is empty");

  LwiReport report;
  report.R = R;
  report.eps = eps;
  report.ball_size = ball.size();

  const CostMatrix far = CostMatrix::far_indicator(space.distance_matrix(), eps);

  // Unordered pairs including the diagonal (value 1 there).
  std::vector<std::pair<std::size_t, std::size_t>> idx_pairs;
  for (std::size_t a = 0; a < ball.size(); ++a)
    for (std::size_t b = a; b < ball.size(); ++b) idx_pairs.push_back({a, b});

  for (int t : times) {
    const Matrix rows = kernel.push_dirac_many(ball, t);
    std::vector<double> vals(idx_pairs.size(), 1.0);
    parallel_for(idx_pairs.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t k = lo; k < hi; ++k) {
        const auto [a, b] = idx_pairs[k];
        if (a == b) continue;
        const Distribution mu = row_distribution(rows.row(a));
        const Distribution nu = row_distribution(rows.row(b));
        vals[k] = transport::max_closeness_with_cost(mu, nu, far).value;
      }
    });
    LwiTimeRecord rec;
    rec.t = t;
    rec.value = 1.0;
    rec.argmin_x = ball[idx_pairs[0].first];
    rec.argmin_y = ball[idx_pairs[0].second];
    for (std::size_t k = 0; k < idx_pairs.size(); ++k) {
      if (vals[k] < rec.value) {
        rec.value = vals[k];
        rec.argmin_x = ball[idx_pairs[k].first];
        rec.argmin_y = ball[idx_pairs[k].second];
      }
    }
    rec.positive = rec.value > tol::positivity;
    report.per_time.push_back(rec);
  }

  for (std::size_t i = 0; i < report.per_time.size(); ++i) {
    if (report.per_time[i].positive) {
      report.first_passing_time = report.per_time[i].t;
      report.pass = true;
      for (std::size_t j = i; j < report.per_time.size(); ++j)
        report.pass = report.pass && report.per_time[j].positive;
      break;
    }
  }
  return report;
}

A1Report verify_a1(const Kernel& kernel, CouplingProvider& provider, const FuncDesc& F1, const FuncDesc& F2,
                   const FuncDesc& r, const PairGrid& pairs, const std::vector<int>& times, double slack) {
  const MetricSpace& space = kernel.space();
  validate_pairs(pairs, space.size());
  validate_times(times, 0);
  for (std::size_t i = 1; i < times.size(); ++i)
    if (r(times[i]) > r(times[i - 1]) + 1e-15)
      fail(Errc::InvalidArgument, "rate function must be non-increasing over the sampled times");

  provider.prepare(pairs, times);
  RowCache rows(kernel, pair_states(pairs), times);

  A1Report report;
  report.slack = slack;
  report.F1 = F1;
  report.F2 = F2;
  report.r = r;
  report.times = times;
  report.pairs = pairs;
  report.x0 = space.base_index();
  report.records.resize(pairs.size() * times.size());

  parallel_for(report.records.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      const auto [x, y] = pairs[k / times.size()];
      const int t = times[k % times.size()];
      const SparseJoint joint = provider.joint(x, y, t);
      check_provider_joint(joint, rows.row(y, t), space.size());
      A1Record rec;
      rec.x = x;
      rec.y = y;
      rec.t = t;
      const Distribution law_z = [&] {
        Distribution d;
        d.w = joint.row_marginal();
        return d;
      }();
      rec.tv = tv_distance(law_z, row_distribution(rows.row(x, t)));
      rec.ed = expected_distance(joint, space);
      const double dxy = space.dist(x, y);
      const double u = std::max(space.dist(x, space.base_index()), space.dist(y, space.base_index()));
      rec.tv_bound = F1(u) * dxy;
      rec.ed_bound = F2(u) * r(t) * dxy;
      rec.margin = std::min(rec.tv_bound - rec.tv, rec.ed_bound - rec.ed);
      rec.pass = rec.tv <= rec.tv_bound + slack && rec.ed <= rec.ed_bound + slack;
      report.records[k] = rec;
    }
  });
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    report.pass = report.pass && report.records[i].pass;
    if (report.records[i].margin < report.records[report.worst].margin) report.worst = i;
  }
  return report;
}

A2Report verify_a2(const Kernel& kernel, CouplingProvider& provider, const std::vector<std::size_t>& B,
                   double eps, const FuncDesc& Rf, const std::vector<int>& times, double slack) {
  const MetricSpace& space = kernel.space();
  if (B.empty()) fail(Errc::InvalidArgument, "ball index set must be non-empty");
  for (std::size_t i : B)
    if (i >= space.size()) fail(Errc::InvalidArgument, "ball index out of range");
  if (!(eps > 0.0 && eps <= 1.0)) fail(Errc::InvalidArgument, "eps must lie in (0,1]");
  validate_times(times, 0);

  PairGrid pairs;
  for (std::size_t x : B)
    for (std::size_t y : B) pairs.push_back({x, y});
  provider.prepare(pairs, times);
  RowCache rows(kernel, B, times);

  A2Report report;
  report.slack = slack;
  report.eps = eps;
  report.records.resize(pairs.size() * times.size());

  parallel_for(report.records.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      const auto [x, y] = pairs[k / times.size()];
      const int t = times[k % times.size()];
      const SparseJoint joint = provider.joint(x, y, t);
      check_provider_joint(joint, rows.row(y, t), space.size());
      A2Record rec;
      rec.x = x;
      rec.y = y;
      rec.t = t;
      Distribution law_z;
      law_z.w = joint.row_marginal();
      rec.tv = tv_distance(law_z, row_distribution(rows.row(x, t)));
      rec.ed = expected_distance(joint, space);
      rec.ed_bound = Rf(t);
      rec.margin = std::min((1.0 - eps) - rec.tv, rec.ed_bound - rec.ed);
      rec.pass = rec.tv <= 1.0 - eps + slack && rec.ed <= rec.ed_bound + slack;
      report.records[k] = rec;
    }
  });
  double max_tv = 0.0;
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    report.pass = report.pass && report.records[i].pass;
    max_tv = std::max(max_tv, report.records[i].tv);
    if (report.records[i].margin < report.records[report.worst].margin) report.worst = i;
  }
  report.suggested_eps = 1.0 - max_tv;
  return report;
}

GluedBound glued_coupling_bound(const Kernel& kernel, CouplingProvider& provider, std::size_t x, std::size_t y,
                                int t, double delta) {
  const MetricSpace& space = kernel.space();
  if (x >= space.size() || y >= space.size()) fail(Errc::InvalidArgument, "start state out of range");
  if (delta < 0.0) fail(Errc::InvalidArgument, "delta must be >= 0");

  const SparseJoint joint = provider.joint(x, y, t);
  const Distribution law_y = kernel.push_dirac(y, t);
  check_provider_joint(joint, law_y.w, space.size());
  Distribution law_z;
  law_z.w = joint.row_marginal();
  const Distribution law_x = kernel.push_dirac(x, t);

  const transport::Coupling g_xz = transport::maximal_coupling(law_x, law_z);

  transport::Coupling g_zy;
  g_zy.rows = g_zy.cols = space.size();
  g_zy.entries = joint.entries;
  std::sort(g_zy.entries.begin(), g_zy.entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  g_zy.mu = law_z.w;
  g_zy.nu = law_y.w;

  GluedBound out{transport::glue(g_xz, g_zy), 0.0, 0.0, 0.0, 0.0, false};

  out.p_match = 1.0 - tv_distance(law_x, law_z);
  for (const auto& e : joint.entries)
    if (space.dist(e.i, e.j) <= delta) out.p_close_zy += e.v;
  for (const auto& e : out.triple.entries)
    if (space.dist(e.i, e.k) <= delta) out.closeness += e.v;
  out.lower_bound = out.p_match + out.p_close_zy - 1.0;
  out.inequality_ok = out.closeness >= out.lower_bound - tol::bound_chain;

  // The outer pair of the glued triple must couple the two pushed laws.
  const auto m13 = out.triple.marginal13();
  if (l1_distance(m13.row_marginal(), law_x.w) > tol::coupling_marginal ||
      l1_distance(m13.col_marginal(), law_y.w) > tol::coupling_marginal)
    fail(Errc::MarginalMismatch, "glued triple does not couple the pushed laws");
  return out;
}

AsfPlusCertificate fit_asf_plus_envelope(const A1Report& report) {
  if (!report.pass) fail(Errc::A1NotSatisfied, "drift-coupling verification did not pass on its grid");
  const int max_t = *std::max_element(report.times.begin(), report.times.end());
  if (max_t < 1) fail(Errc::A1NotSatisfied, "drift-coupling report carries no positive time");
  AsfPlusCertificate cert;
  cert.x0 = report.x0;
  for (int n = 1; n <= max_t; ++n) {
    cert.times.push_back(n);
    cert.slacks.push_back(report.r(n));
  }
  cert.F = FuncDesc::scaled_sum(report.F1, 2.0, report.F2, 1.0);
  cert.F_bounded = !cert.F.unbounded_on_ray();
  return cert;
}

Verdict uniqueness_verdict(const Kernel& kernel, const AsfPlusCertificate& cert, const VerdictParams& params) {
  Verdict v;
  v.asf = check_asf_plus(kernel, cert, params.pair_grid, params.ak_grid, params.slack);
  v.lwi = check_lwi(kernel, params.lwi_R, params.lwi_eps, params.lwi_times);
  v.decomposition_count = kernel.invariant_measures().measures.size();
  v.truncation_dependent = cert.F.unbounded_on_ray();
  v.f_bounded = cert.F_bounded && !v.truncation_dependent;
  v.implied = v.asf.pass && v.lwi.pass && v.f_bounded;
  if (!v.implied) {
    if (!v.f_bounded)
      v.reason = "F unbounded/truncation-dependent";
    else if (!v.asf.pass)
      v.reason = "gradient bound check failed";
    else
      v.reason = "local weak irreducibility not established";
  }
  v.consistent = !(v.implied && v.decomposition_count > 1);
  return v;
}

SeparationResult support_separation(const Distribution& mu1, const Distribution& mu2, const MetricSpace& space,
                                    const FuncDesc& F, std::size_t x0, double slack) {
  if (mu1.size() != space.size() || mu2.size() != space.size())
    fail(Errc::SpaceMismatch, "measures live on a different space");
  if (x0 >= space.size()) fail(Errc::BadBaseIndex, "base point out of range");
  const auto s1 = mu1.support();
  const auto s2 = mu2.support();
  if (s1.empty() || s2.empty()) fail(Errc::EmptySupport, "measure has empty support");
  if (l1_distance(mu1.w, mu2.w) <= tol::positivity)
    fail(Errc::DistinctMeasuresRequired, "support separation needs two distinct ergodic measures");

  SeparationResult out;
  out.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t w1 : s1)
    for (std::size_t w2 : s2) {
      const double u = std::max(space.dist(w1, x0), space.dist(w2, x0));
      const double margin = space.dist(w1, w2) * F(u);
      if (margin < out.min_margin) {
        out.min_margin = margin;
        out.witness_w1 = w1;
        out.witness_w2 = w2;
      }
    }
  out.pass = out.min_margin >= 1.0 - slack;
  return out;
}

}  // namespace semcert::diagnostics
