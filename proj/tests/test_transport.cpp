#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "semcert/transport.hpp"

using namespace semcert;
using transport::wasserstein;

namespace {

MetricSpace two_point_space() {
  Matrix d(2, 2, 0.0);
  d(0, 1) = d(1, 0) = 1.0;
  return MetricSpace::validated({"a", "b"}, d, 0);
}

Distribution dist(std::vector<double> w) { return Distribution::validated(std::move(w)); }

}  // namespace

TEST_CASE("tv distance basics") {
  const Distribution mu = dist({0.7, 0.3});
  const Distribution nu = dist({0.4, 0.6});
  CHECK(tv_distance(mu, mu) == 0.0);
  CHECK(tv_distance(mu, nu) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(tv_distance(dist({1.0, 0.0}), dist({0.0, 1.0})) == doctest::Approx(1.0));
  CHECK_THROWS_AS((void)tv_distance(mu, dist({1.0, 0.0, 0.0})), SemcertError);
}

TEST_CASE("two-point transport and duality") {
  const MetricSpace space = two_point_space();
  const Distribution mu = dist({0.7, 0.3});
  const Distribution nu = dist({0.4, 0.6});
  const CostMatrix d_cost = CostMatrix::validated(space.distance_matrix(), true);

  const auto r = wasserstein(mu, nu, d_cost);
  CHECK(r.value == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(std::abs(r.duality_gap) <= tol::duality_gap);
  CHECK(transport::kantorovich_dual_value(mu, nu, d_cost) == doctest::Approx(0.3).epsilon(1e-9));

  // capped cost min(0.2, 10 d): every unit of mismatch mass pays the cap
  const CostMatrix capped = capped_lipschitz_cost(space, 0.1, 10.0);
  CHECK(wasserstein(mu, nu, capped).value == doctest::Approx(0.06).epsilon(1e-12));
  CHECK(transport::kantorovich_dual_value(mu, nu, capped) == doctest::Approx(0.06).epsilon(1e-9));

  // identical marginals ride the diagonal for free
  CHECK(wasserstein(mu, mu, d_cost).value == doctest::Approx(0.0));
}

TEST_CASE("solver matches brute-force oracles on seeded instances") {
  std::mt19937 rng(20240817);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 5;  // up to 6x6
    const auto a = oracle::random_weights(rng, n);
    const auto b = oracle::random_weights(rng, n);
    const Matrix c = oracle::random_cost(rng, n);
    const CostMatrix cost = CostMatrix::validated(c, false);
    const auto r = wasserstein(dist(a), dist(b), cost);
    CHECK(std::abs(r.duality_gap) <= tol::duality_gap);

    const double via_ssp = oracle::integer_sspath(a, b, c);
    CHECK(std::abs(r.value - via_ssp) <= 1e-9);
    if (n * n <= 16) {
      const double via_enum = oracle::vertex_enumeration(a, b, c);
      CHECK(std::abs(via_enum - via_ssp) <= 1e-12);  // the two oracles agree
      CHECK(std::abs(r.value - via_enum) <= 1e-9);
    }
  }
}

TEST_CASE("mismatch-cost transport is total variation") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    const auto a = oracle::random_weights(rng, n);
    const auto b = oracle::random_weights(rng, n);
    const CostMatrix mismatch = CostMatrix::mismatch_indicator(n);
    const Distribution mu = dist(a), nu = dist(b);
    const auto fast = wasserstein(mu, nu, mismatch);
    CHECK(std::abs(fast.value - tv_distance(mu, nu)) <= 1e-12);
    transport::verify_certificate(fast, mu, nu, mismatch);

    // the band fast path and the simplex must agree
    transport::SolveOptions dense_only;
    dense_only.allow_band_path = false;
    const auto slow = wasserstein(mu, nu, mismatch, dense_only);
    CHECK(std::abs(fast.value - slow.value) <= 1e-12);
  }
}

TEST_CASE("cost monotonicity") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 5;
    const auto a = oracle::random_weights(rng, n);
    const auto b = oracle::random_weights(rng, n);
    const Matrix c1 = oracle::random_cost(rng, n);
    Matrix c2 = c1;
    const Matrix extra = oracle::random_cost(rng, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c2(i, j) += extra(i, j);
    const double w1 = wasserstein(dist(a), dist(b), CostMatrix::validated(c1, false)).value;
    const double w2 = wasserstein(dist(a), dist(b), CostMatrix::validated(c2, false)).value;
    CHECK(w1 <= w2 + 1e-10);
  }
}

TEST_CASE("dual route agrees with the primal on pseudo-metric costs") {
  std::mt19937 rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 5;
    const auto a = oracle::random_weights(rng, n);
    const auto b = oracle::random_weights(rng, n);
    const Matrix c = oracle::metric_closure(oracle::random_cost(rng, n));
    const CostMatrix cost = CostMatrix::validated(c, true);
    const double primal = wasserstein(dist(a), dist(b), cost).value;
    const double dual = transport::kantorovich_dual_value(dist(a), dist(b), cost);
    CHECK(std::abs(primal - dual) <= 1e-8);
  }
  // the dual route refuses costs without the triangle certificate
  Matrix c(3, 3, 0.0);
  c(0, 2) = c(2, 0) = 5.0;
  c(0, 1) = c(1, 0) = 1.0;
  c(1, 2) = c(2, 1) = 1.0;
  CHECK_THROWS_AS((void)transport::kantorovich_dual_value(dist({0.5, 0.25, 0.25}), dist({0.25, 0.5, 0.25}),
                                                          CostMatrix::validated(c, false)),
                  SemcertError);
}

TEST_CASE("maximal coupling attains total variation") {
  const Distribution mu = dist({0.7, 0.3});
  const Distribution nu = dist({0.4, 0.6});
  const auto c = transport::maximal_coupling(mu, nu);
  CHECK(c.marginal_error() <= tol::exact_marginal);
  CHECK(c.off_diagonal_mass() == doctest::Approx(0.3).epsilon(1e-14));
  const Matrix dense = c.dense();
  CHECK(dense(0, 0) == doctest::Approx(0.4));
  CHECK(dense(1, 1) == doctest::Approx(0.3));
  CHECK(dense(0, 1) == doctest::Approx(0.3));

  const auto same = transport::maximal_coupling(mu, mu);
  CHECK(same.off_diagonal_mass() == doctest::Approx(0.0));

  const auto swap = transport::maximal_coupling(dist({1.0, 0.0}), dist({0.0, 1.0}));
  CHECK(swap.off_diagonal_mass() == doctest::Approx(1.0));
  CHECK(swap.dense()(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("maximal coupling attains the closeness supremum at eps = 0") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    std::vector<double> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = 0.37 * static_cast<double>(i) + 0.01 * static_cast<double>(trial);
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = "s" + std::to_string(i);
    const MetricSpace space = MetricSpace::from_line_positions(labels, pos, 0);
    const Distribution mu = dist(oracle::random_weights(rng, n));
    const Distribution nu = dist(oracle::random_weights(rng, n));
    const auto close = transport::max_closeness(mu, nu, space.distance_matrix(), 0.0);
    const auto maximal = transport::maximal_coupling(mu, nu);
    CHECK(std::abs(close.value - (1.0 - maximal.off_diagonal_mass())) <= 1e-12);
  }
}

TEST_CASE("closeness is monotone in eps and saturates at the diameter") {
  std::mt19937 rng(123);
  const std::size_t n = 6;
  const std::vector<double> pos{0.0, 0.3, 0.9, 1.0, 2.2, 3.0};
  const std::vector<std::string> labels{"a", "b", "c", "d", "e", "f"};
  const MetricSpace space = MetricSpace::from_line_positions(labels, pos, 0);
  const Distribution mu = dist(oracle::random_weights(rng, n));
  const Distribution nu = dist(oracle::random_weights(rng, n));
  double prev = -1.0;
  for (double eps : {0.0, 0.1, 0.5, 1.0, 2.0, 3.0}) {
    const double v = transport::max_closeness(mu, nu, space.distance_matrix(), eps).value;
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
  CHECK(transport::max_closeness(mu, nu, space.distance_matrix(), space.diameter()).value ==
        doctest::Approx(1.0));
  CHECK(transport::max_closeness(mu, mu, space.distance_matrix(), 0.0).value == doctest::Approx(1.0));
}

TEST_CASE("gluing reconstructs both inputs") {
  // diagonal with diagonal: the triple stays diagonal
  const Distribution mu = dist({0.25, 0.75});
  transport::Coupling diag;
  diag.rows = diag.cols = 2;
  diag.mu = diag.nu = mu.w;
  diag.entries = {{0, 0, 0.25}, {1, 1, 0.75}};
  const auto t = transport::glue(diag, diag);
  CHECK(t.total_mass() == doctest::Approx(1.0));
  for (const auto& e : t.entries) {
    CHECK(e.i == e.j);
    CHECK(e.j == e.k);
  }

  // independent times diagonal keeps the first coordinate independent
  transport::Coupling indep;
  indep.rows = indep.cols = 2;
  indep.mu = indep.nu = mu.w;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) indep.entries.push_back({i, j, mu.w[i] * mu.w[j]});
  const auto t2 = transport::glue(indep, diag);
  const auto m13 = t2.marginal13().dense();
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 2; ++k) CHECK(m13(i, k) == doctest::Approx(mu.w[i] * mu.w[k]).epsilon(1e-14));

  // seeded random pairs on 5 states reconstruct within 1e-12
  std::mt19937 rng(555);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5;
    const Distribution a = dist(oracle::random_weights(rng, n));
    const Distribution b = dist(oracle::random_weights(rng, n));
    const Distribution c = dist(oracle::random_weights(rng, n));
    transport::Coupling g12, g23;
    g12.rows = g12.cols = n;
    g12.mu = a.w;
    g12.nu = b.w;
    g23.rows = g23.cols = n;
    g23.mu = b.w;
    g23.nu = c.w;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (a.w[i] * b.w[j] > 0.0) g12.entries.push_back({i, j, a.w[i] * b.w[j]});
        if (b.w[i] * c.w[j] > 0.0) g23.entries.push_back({i, j, b.w[i] * c.w[j]});
      }
    const auto triple = transport::glue(g12, g23);
    const Matrix r12 = triple.marginal12().dense();
    const Matrix r23 = triple.marginal23().dense();
    const Matrix d12 = g12.dense();
    const Matrix d23 = g23.dense();
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        err = std::max(err, std::abs(r12(i, j) - d12(i, j)));
        err = std::max(err, std::abs(r23(i, j) - d23(i, j)));
      }
    CHECK(err <= 1e-12);
  }
}

TEST_CASE("gluing rejects mismatched middles") {
  transport::Coupling g12, g23;
  g12.rows = g12.cols = 2;
  g12.mu = {1.0, 0.0};
  g12.nu = {1.0, 0.0};
  g12.entries = {{0, 0, 1.0}};
  g23.rows = g23.cols = 2;
  g23.mu = {0.0, 1.0};
  g23.nu = {0.0, 1.0};
  g23.entries = {{1, 1, 1.0}};
  CHECK_THROWS_AS((void)transport::glue(g12, g23), SemcertError);
}

TEST_CASE("certificates hold end to end on indicator costs") {
  std::mt19937 rng(31337);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + rng() % 10;
    std::vector<double> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = 0.25 * static_cast<double>(i);
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = "g" + std::to_string(i);
    const MetricSpace space = MetricSpace::from_line_positions(labels, pos, 0);
    const Distribution mu = dist(oracle::random_weights(rng, n));
    const Distribution nu = dist(oracle::random_weights(rng, n));
    const CostMatrix far = CostMatrix::far_indicator(space.distance_matrix(), 0.5);
    REQUIRE(far.band().has_value());
    const auto r = wasserstein(mu, nu, far);
    transport::verify_certificate(r, mu, nu, far);  // full quadratic audit

    transport::SolveOptions dense_only;
    dense_only.allow_band_path = false;
    CHECK(std::abs(r.value - wasserstein(mu, nu, far, dense_only).value) <= 1e-10);
  }
}
