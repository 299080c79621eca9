#include <doctest.h>

#include <cmath>

#include "semcert/models.hpp"
#include "semcert/transport.hpp"

using namespace semcert;
using namespace semcert::models;

namespace {

Distribution row_of(const Matrix& rows, std::size_t r) {
  Distribution d;
  const auto row = rows.row(r);
  d.w.assign(row.begin(), row.end());
  return d;
}

}  // namespace

TEST_CASE("two-lattice chain transitions") {
  const XiChainSpec spec{0.4, 12};
  const Kernel k = build_xi_chain(spec);
  REQUIRE(k.size() == 24);
  CHECK(k.space().label(0) == "1");
  CHECK(k.space().label(12) == "1+xi/1");

  SUBCASE("integer lattice rows") {
    const std::size_t two = xi_integer_index(spec, 2);
    CHECK(k.matrix()(two, xi_integer_index(spec, 1)) == doctest::Approx(0.5));
    CHECK(k.matrix()(two, xi_integer_index(spec, 3)) == doctest::Approx(0.5));
  }

  SUBCASE("shifted lattice rows") {
    const std::size_t s2 = xi_shifted_index(spec, 2);
    CHECK(k.matrix()(s2, xi_shifted_index(spec, 1)) == doctest::Approx(0.5));
    CHECK(k.matrix()(s2, xi_shifted_index(spec, 3)) == doctest::Approx(0.5));
  }

  SUBCASE("top levels reset to the lattice base") {
    CHECK(k.matrix()(xi_integer_index(spec, 12), xi_integer_index(spec, 1)) == doctest::Approx(1.0));
    CHECK(k.matrix()(xi_shifted_index(spec, 12), xi_shifted_index(spec, 1)) == doctest::Approx(1.0));
  }

  SUBCASE("distances are euclidean on the line") {
    CHECK(k.space().dist(xi_integer_index(spec, 1), xi_shifted_index(spec, 1)) == doctest::Approx(0.4));
    CHECK(k.space().dist(xi_integer_index(spec, 2), xi_shifted_index(spec, 2)) == doctest::Approx(0.2));
  }

  SUBCASE("spec validation") {
    CHECK_THROWS_AS((void)build_xi_chain(XiChainSpec{0.6, 12}), SemcertError);
    CHECK_THROWS_AS((void)build_xi_chain(XiChainSpec{0.4, 1}), SemcertError);
  }
}

TEST_CASE("two-lattice chain has exactly the two geometric invariant laws") {
  const XiChainSpec spec{0.4, 40};
  const Kernel k = build_xi_chain(spec);
  const auto dec = k.invariant_measures();
  REQUIRE(dec.measures.size() == 2);

  // truncated geometric weights 2^-i on each lattice
  double err1 = 0.0, err2 = 0.0;
  for (int level = 1; level <= spec.depth; ++level) {
    const double target = std::pow(2.0, -level);
    err1 += std::abs(dec.measures[0].w[xi_integer_index(spec, level)] - target);
    err2 += std::abs(dec.measures[1].w[xi_shifted_index(spec, level)] - target);
  }
  err1 += std::pow(2.0, -spec.depth);  // tail mass the truncation cannot carry
  err2 += std::pow(2.0, -spec.depth);
  CHECK(err1 <= std::pow(2.0, -36));
  CHECK(err2 <= std::pow(2.0, -36));
}

TEST_CASE("shared-coin provider for the two-lattice chain") {
  const XiChainSpec spec{0.4, 12};
  const Kernel k = build_xi_chain(spec);
  const auto provider = xi_chain_sync_provider(spec, k);

  SUBCASE("one step from an integer pair has the two-atom shape") {
    const auto j = provider->joint(xi_integer_index(spec, 1), xi_integer_index(spec, 3), 1);
    REQUIRE(j.entries.size() == 2);
    CHECK(j.total_mass() == doctest::Approx(1.0));
    // reset atom: both at level 1; advance atom: levels 2 and 4
    bool saw_reset = false, saw_advance = false;
    for (const auto& e : j.entries) {
      if (e.i == xi_integer_index(spec, 1) && e.j == xi_integer_index(spec, 1)) saw_reset = true;
      if (e.i == xi_integer_index(spec, 2) && e.j == xi_integer_index(spec, 4)) saw_advance = true;
      CHECK(e.v == doctest::Approx(0.5));
    }
    CHECK(saw_reset);
    CHECK(saw_advance);
  }

  SUBCASE("marginals follow the chain exactly") {
    for (int t : {1, 3, 6}) {
      const auto j = provider->joint(xi_integer_index(spec, 2), xi_shifted_index(spec, 3), t);
      CHECK(l1_distance(j.col_marginal(), k.push_dirac(xi_shifted_index(spec, 3), t).w) <= 1e-14);
      CHECK(l1_distance(j.row_marginal(), k.push_dirac(xi_integer_index(spec, 2), t).w) <= 1e-14);
    }
  }

  SUBCASE("same-lattice pairs contract geometrically") {
    const std::size_t x = xi_integer_index(spec, 1), y = xi_integer_index(spec, 3);
    for (int t : {1, 2, 5, 8}) {
      const auto j = provider->joint(x, y, t);
      double ed = 0.0;
      for (const auto& e : j.entries) ed += e.v * k.space().dist(e.i, e.j);
      CHECK(ed == doctest::Approx(std::pow(0.5, t) * k.space().dist(x, y)).epsilon(1e-12));
    }
  }

  SUBCASE("cross-lattice pairs never coalesce") {
    const std::size_t x = xi_integer_index(spec, 1), y = xi_shifted_index(spec, 1);
    for (int t : {4, 8, 12}) {
      const auto j = provider->joint(x, y, t);
      double ed = 0.0;
      for (const auto& e : j.entries) ed += e.v * k.space().dist(e.i, e.j);
      CHECK(ed >= spec.xi / spec.depth);  // at least one cross-gap apart
    }
  }
}

TEST_CASE("interval chain grid") {
  const IntervalChainSpec spec{301};
  const Kernel k = build_interval_chain(spec);
  REQUIRE(k.size() == 301);
  const double h = 3.0 / 300.0;

  SUBCASE("row stochasticity is exact") {
    for (std::size_t i = 0; i < k.size(); i += 37) {
      double s = 0.0;
      for (std::size_t j = 0; j < k.size(); ++j) s += k.matrix()(i, j);
      CHECK(std::abs(s - 1.0) <= 1e-14);
    }
  }

  SUBCASE("one-step total variation obeys the square-root modulus") {
    const auto idx_of = [&](double u) { return static_cast<std::size_t>(std::llround(u / h)); };
    const double y1 = 0.25, y2 = 0.36;
    Distribution a = row_of(k.matrix(), idx_of(y1));
    Distribution b = row_of(k.matrix(), idx_of(y2));
    const double tv = tv_distance(a, b);
    CHECK(tv <= 3.0 * (std::sqrt(y2) - std::sqrt(y1)) + 2.0 * h);
  }

  SUBCASE("identity observable matches the closed form") {
    std::vector<double> id(k.size());
    const auto positions = line_positions_of(k);
    for (std::size_t i = 0; i < k.size(); ++i) id[i] = positions[i];
    for (int n : {1, 2, 4, 6}) {
      const auto out = k.apply_function(id, n);
      double worst = 0.0;
      for (std::size_t i = 0; i < k.size(); ++i)
        worst = std::max(worst, std::abs(out[i] - interval_chain_closed_form(n, positions[i])));
      CHECK(worst <= 10.0 * h);
      CHECK(worst <= 1e-3);
    }
  }

  SUBCASE("closed form values") {
    CHECK(interval_chain_closed_form(1, 1.0) == doctest::Approx(7.0 / 6.0).epsilon(1e-15));
    CHECK(interval_chain_closed_form(40, 2.7) == doctest::Approx(1.25).epsilon(1e-12));
    // |E[X_2 | 0] - E[X_2 | 0.25]| = 3^{-1} * 0.5
    const double gap = std::abs(interval_chain_closed_form(2, 0.0) - interval_chain_closed_form(2, 0.25));
    CHECK(gap == doctest::Approx(0.5 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS((void)interval_chain_closed_form(0, 1.0), SemcertError);
    CHECK_THROWS_AS((void)interval_chain_closed_form(1, 3.5), SemcertError);
  }

  SUBCASE("off-grid rows integrate the same uniform image") {
    const auto row = interval_chain_row_at(spec, 0.5);
    CHECK(row.size() == k.size());
    double s = 0.0, mean = 0.0;
    const auto positions = line_positions_of(k);
    for (std::size_t j = 0; j < row.size(); ++j) {
      s += row[j];
      mean += row[j] * positions[j];
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    // E[2 - sqrt(0.5) + U[0,1/3]] = 2 - sqrt(0.5) + 1/6, up to cell aggregation
    CHECK(mean == doctest::Approx(2.0 - std::sqrt(0.5) + 1.0 / 6.0).epsilon(1e-4));
  }

  SUBCASE("grid validation") {
    CHECK_THROWS_AS((void)build_interval_chain(IntervalChainSpec{30}), SemcertError);
    CHECK_THROWS_AS((void)build_interval_chain(IntervalChainSpec{32}), SemcertError);  // 31 % 3 != 0
  }
}

TEST_CASE("gaussian walk grid") {
  const GaussianWalkSpec spec{6.0, 0.05};
  const Kernel k = build_gaussian_walk(spec);
  REQUIRE(k.size() == 241);
  const auto positions = line_positions_of(k);
  const std::size_t center = k.space().base_index();
  CHECK(k.space().label(center) == "0");

  SUBCASE("rows are exactly stochastic") {
    for (std::size_t i = 0; i < k.size(); i += 17) {
      double s = 0.0;
      for (std::size_t j = 0; j < k.size(); ++j) s += k.matrix()(i, j);
      CHECK(std::abs(s - 1.0) <= 1e-14);
    }
  }

  SUBCASE("grid total variation matches the closed form") {
    const std::size_t at0 = center, at1 = center + static_cast<std::size_t>(std::llround(1.0 / spec.step));
    const double tv = tv_distance(row_of(k.matrix(), at0), row_of(k.matrix(), at1));
    const double exact = gaussian_tv_closed_form(0.0, 1.0, 1.0);
    CHECK(exact == doctest::Approx(0.3829249225480262).epsilon(1e-12));
    CHECK(std::abs(tv - exact) <= 10.0 * spec.step);
    CHECK(tv <= exact + 1e-12);  // aggregation can only contract
  }

  SUBCASE("mirror symmetry") {
    const std::size_t off = 30;
    const auto left = k.matrix().row(center - off);
    const auto right = k.matrix().row(center + off);
    double worst = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j)
      worst = std::max(worst, std::abs(left[j] - right[k.size() - 1 - j]));
    CHECK(worst <= 1e-12);
  }

  SUBCASE("closed form sanity") {
    CHECK(gaussian_tv_closed_form(1.0, 1.0, 2.0) == 0.0);
    CHECK(gaussian_tv_closed_form(0.0, 1.0, 50.0) < gaussian_tv_closed_form(0.0, 1.0, 5.0));
    CHECK_THROWS_AS((void)gaussian_tv_closed_form(0.0, 1.0, 0.0), SemcertError);
  }

  SUBCASE("spec validation") {
    CHECK_THROWS_AS((void)build_gaussian_walk(GaussianWalkSpec{4.0, 0.05}), SemcertError);
    CHECK_THROWS_AS((void)build_gaussian_walk(GaussianWalkSpec{6.0, 0.2}), SemcertError);
  }

  SUBCASE("shift-contraction provider has geometric gaps and exact second marginal") {
    const auto provider = gaussian_shift_contraction_provider(spec, k, 0.5);
    const std::size_t x = center - 20, y = center + 20;
    const double dxy = k.space().dist(x, y);
    for (int t : {1, 2, 4}) {
      const auto j = provider->joint(x, y, t);
      CHECK(l1_distance(j.col_marginal(), k.push_dirac(y, t).w) <= 1e-14);
      double ed = 0.0;
      for (const auto& e : j.entries) ed += e.v * k.space().dist(e.i, e.j);
      const double target = std::pow(0.5, t) * dxy;
      CHECK(ed <= target + 1e-12);                 // snapped toward zero, never above
      CHECK(ed >= target - spec.step - 1e-12);     // and within one cell of the ideal gap
    }
    // equal starts: the joint is diagonal
    const auto diag = provider->joint(x, x, 3);
    for (const auto& e : diag.entries) CHECK(e.i == e.j);
  }
}
