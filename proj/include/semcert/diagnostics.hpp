#pragma once

#include <string>
#include <utility>
#include <vector>

#include "semcert/kernel.hpp"
#include "semcert/provider.hpp"
#include "semcert/transport.hpp"

namespace semcert::diagnostics {

/// Non-decreasing envelope function on [0, infinity): a constant, an affine
/// map a*u + b, or a right-continuous step table (constant extension below
/// the first breakpoint).
class FuncDesc {
 public:
  enum class Kind { Constant, Affine, Table };

  static FuncDesc constant(double c);
  static FuncDesc affine(double a, double b);
  static FuncDesc table(std::vector<double> args, std::vector<double> values);

  double operator()(double u) const;
  Kind kind() const { return kind_; }
  double slope() const { return a_; }
  double offset() const { return b_; }
  const std::vector<double>& args() const { return args_; }
  const std::vector<double>& values() const { return values_; }

  /// True when the descriptor grows without bound on [0, infinity) (affine
  /// with positive slope); tables and constants are bounded by construction.
  bool unbounded_on_ray() const { return kind_ == Kind::Affine && a_ > 0.0; }

  /// sf * f + sg * g, exact; throws InvalidArgument for a table/affine mix
  /// (not representable in this family without loss).
  static FuncDesc scaled_sum(const FuncDesc& f, double sf, const FuncDesc& g, double sg);

 private:
  FuncDesc() = default;
  Kind kind_ = Kind::Constant;
  double a_ = 0.0, b_ = 0.0;
  std::vector<double> args_, values_;
};

/// Candidate data for the gradient-type bound
///   |P_{t_n} phi(x) - P_{t_n} phi(y)|
///     <= d(x,y) F(d(x,x0) v d(y,x0)) (||phi||_inf + delta_n Lip(phi)).
struct AsfPlusCertificate {
  std::size_t x0 = 0;
  std::vector<int> times;      // non-decreasing, >= 1
  std::vector<double> slacks;  // non-increasing, >= 0
  FuncDesc F = FuncDesc::constant(0.0);
  bool F_bounded = false;      // explicit boundedness declaration

  void validate(std::size_t space_size) const;
};

struct AKPair {
  double A = 1.0;  // sup-norm budget
  double K = 1.0;  // Lipschitz budget
};

using PairGrid = std::vector<std::pair<std::size_t, std::size_t>>;

struct AsfPlusRecord {
  std::size_t x = 0, y = 0;
  std::size_t n = 0;  // index into the certificate's times
  int t = 0;
  double A = 0, K = 0;
  double lhs = 0, rhs = 0, margin = 0;
  bool pass = true;
};

struct AsfPlusReport {
  bool pass = true;
  double slack = tol::check_slack;
  std::vector<AsfPlusRecord> records;
  std::size_t worst = 0;  // index of the smallest margin
};

/// Exact check of the gradient bound: the left-hand supremum over
/// {||phi||_inf <= A, Lip <= K} is the transport value against
/// min(2A, K d), evaluated by the certified solver.
AsfPlusReport check_asf_plus(const Kernel& kernel, const AsfPlusCertificate& cert, const PairGrid& pairs,
                             const std::vector<AKPair>& ak_grid, double slack = tol::check_slack);

/// Raw neighbourhood-contraction profile:
/// values(k, r) = sup_{y in B_r(x), y != x} W_{d_{n_k}}(P_{t_k} delta_x, P_{t_k} delta_y).
/// The tail score estimates the large-n limit by the maximum over the second
/// half of n_list. Reported for inspection only, never part of a verdict.
struct AsfProfile {
  std::vector<int> n_list, times;
  std::vector<double> radii;
  Matrix values;                          // n_list.size() x radii.size()
  std::vector<std::vector<char>> empty_ball;  // punctured ball was empty
  std::vector<double> tail_score;         // per radius
};

AsfProfile asf_profile(const Kernel& kernel, std::size_t x, const std::vector<int>& times,
                       const std::vector<int>& n_list, const std::vector<double>& radii);

struct LwiTimeRecord {
  int t = 0;
  double value = 0.0;  // min over ball pairs of the max closeness
  std::size_t argmin_x = 0, argmin_y = 0;
  bool positive = false;
};

struct LwiReport {
  double R = 0, eps = 0;
  std::size_t ball_size = 0;
  std::vector<LwiTimeRecord> per_time;
  int first_passing_time = -1;
  bool pass = false;
};

/// Local weak irreducibility over a finite time list: once the value turns
/// positive it must stay positive for every later listed time.
LwiReport check_lwi(const Kernel& kernel, double R, double eps, const std::vector<int>& times);

struct A1Record {
  std::size_t x = 0, y = 0;
  int t = 0;
  double tv = 0, tv_bound = 0;  // d_TV(Law Z, P_t delta_x) vs F1(.) d(x,y)
  double ed = 0, ed_bound = 0;  // E d(Z, Y) vs F2(.) r(t) d(x,y)
  double margin = 0;
  bool pass = true;
};

struct A1Report {
  bool pass = true;
  double slack = tol::check_slack;
  FuncDesc F1 = FuncDesc::constant(0), F2 = FuncDesc::constant(0), r = FuncDesc::constant(0);
  std::vector<int> times;
  PairGrid pairs;
  std::size_t x0 = 0;
  std::vector<A1Record> records;
  std::size_t worst = 0;
};

/// Drift-coupling verification: the provider's joints must reproduce the
/// kernel's law in the second coordinate, approximate the first in total
/// variation at rate F1(.) d(x,y), and contract the expected distance at
/// rate F2(.) r(t) d(x,y).
A1Report verify_a1(const Kernel& kernel, CouplingProvider& provider, const FuncDesc& F1, const FuncDesc& F2,
                   const FuncDesc& r, const PairGrid& pairs, const std::vector<int>& times,
                   double slack = tol::check_slack);

struct A2Record {
  std::size_t x = 0, y = 0;
  int t = 0;
  double tv = 0;             // vs 1 - eps
  double ed = 0, ed_bound = 0;  // vs R(t)
  double margin = 0;
  bool pass = true;
};

struct A2Report {
  bool pass = true;
  double slack = tol::check_slack;
  double eps = 0;
  double suggested_eps = 0;  // 1 - max measured TV
  std::vector<A2Record> records;
  std::size_t worst = 0;
};

/// Uniform-closeness verification over a ball: total variation stays below
/// 1 - eps while the expected coordinate distance decays under R(t).
A2Report verify_a2(const Kernel& kernel, CouplingProvider& provider, const std::vector<std::size_t>& B,
                   double eps, const FuncDesc& Rf, const std::vector<int>& times,
                   double slack = tol::check_slack);

/// Glue a maximal coupling of (P_t delta_x, Law Z) with the provider's (Z, Y)
/// joint and read off the closeness probability of the outer pair, together
/// with the intersection lower bound it must dominate.
struct GluedBound {
  transport::TripleJoint triple;
  double closeness = 0;    // P(d(V^X, V^Y) <= delta)
  double p_match = 0;      // P(Xt = Zt) under the maximal coupling
  double p_close_zy = 0;   // P(d(Z, Y) <= delta)
  double lower_bound = 0;  // p_match + p_close_zy - 1
  bool inequality_ok = false;
};

GluedBound glued_coupling_bound(const Kernel& kernel, CouplingProvider& provider, std::size_t x, std::size_t y,
                                int t, double delta);

/// Certificate implied by a passing drift-coupling report: t_n = n,
/// delta_n = r(n), F = 2 F1 + F2.
AsfPlusCertificate fit_asf_plus_envelope(const A1Report& report);

struct VerdictParams {
  PairGrid pair_grid;
  std::vector<AKPair> ak_grid;
  double lwi_R = 1.0, lwi_eps = 0.1;
  std::vector<int> lwi_times;
  double slack = tol::check_slack;
};

struct Verdict {
  bool implied = false;
  std::string reason;  // empty when implied
  bool f_bounded = false;
  bool truncation_dependent = false;
  std::size_t decomposition_count = 0;
  bool consistent = true;  // implied forces decomposition_count <= 1
  AsfPlusReport asf;
  LwiReport lwi;
};

/// "At most one invariant law" verdict: gradient bound + local weak
/// irreducibility + a genuinely bounded envelope. Cross-checked against the
/// ergodic decomposition; an implied verdict with two invariant laws would be
/// reported as inconsistent.
Verdict uniqueness_verdict(const Kernel& kernel, const AsfPlusCertificate& cert, const VerdictParams& params);

struct SeparationResult {
  double min_margin = 0;  // min over support pairs of d(w1,w2) * F(...)
  std::size_t witness_w1 = 0, witness_w2 = 0;
  bool pass = false;
};

/// Support separation of two distinct ergodic laws:
/// d(w1, w2) >= 1 / F(d(w1,x0) v d(w2,x0)) on every support pair.
SeparationResult support_separation(const Distribution& mu1, const Distribution& mu2, const MetricSpace& space,
                                    const FuncDesc& F, std::size_t x0, double slack = tol::check_slack);

}  // namespace semcert::diagnostics
