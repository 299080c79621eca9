#include <doctest.h>

#include <functional>
#include <random>

#include "oracle.hpp"
#include "semcert/metric_space.hpp"

using namespace semcert;

namespace {

Matrix matrix_from(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  Matrix m(n, rows.begin()->size());
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const SemcertError& e) {
    return e.code();
  }
  throw std::runtime_error("expected a SemcertError");
}

// Exhaustive triple scan, the contract check for every constructed cost.
void check_pseudo_metric_axioms(const Matrix& m) {
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(m(i, i) == 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(m(i, j) >= 0.0);
      CHECK(m(i, j) == m(j, i));
      for (std::size_t k = 0; k < n; ++k) CHECK(m(i, k) <= m(i, j) + m(j, k) + 1e-12);
    }
  }
}

MetricSpace random_line_space(std::mt19937& rng, std::size_t n) {
  std::vector<double> pos(n);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (auto& p : pos) p = u(rng);
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = "p" + std::to_string(i);
  return MetricSpace::from_line_positions(labels, pos, 0);
}

}  // namespace

TEST_CASE("space validation accepts the smallest metric space") {
  const MetricSpace s = validate_space({"a", "b"}, matrix_from({{0, 1}, {1, 0}}), 0);
  CHECK(s.size() == 2);
  CHECK(s.dist(0, 1) == 1.0);
  CHECK(s.base_index() == 0);
  CHECK(s.find_label("b") == std::size_t{1});
  CHECK(!s.find_label("c").has_value());
}

TEST_CASE("space validation rejects bad inputs with the right codes") {
  CHECK(code_of([] { validate_space({"a", "b"}, matrix_from({{0, 1}, {2, 0}}), 0); }) ==
        Errc::AsymmetricDistance);
  CHECK(code_of([] {
          validate_space({"a", "b", "c"}, matrix_from({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}), 0);
        }) == Errc::TriangleViolation);
  CHECK(code_of([] { validate_space({"a", "b"}, matrix_from({{0, -1}, {-1, 0}}), 0); }) ==
        Errc::NegativeDistance);
  CHECK(code_of([] { validate_space({"a", "b"}, matrix_from({{0, 1}, {1, 0}}), 2); }) == Errc::BadBaseIndex);
}

TEST_CASE("triangle violation reports the worst triple") {
  try {
    validate_space({"a", "b", "c"}, matrix_from({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}), 0);
    FAIL("expected TriangleViolation");
  } catch (const SemcertError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("d(0,2)") != std::string::npos);
    CHECK(msg.find("5") != std::string::npos);
  }
}

TEST_CASE("open balls use strict inequality") {
  const MetricSpace s =
      MetricSpace::from_line_positions({"0", "1", "2", "3"}, {0.0, 1.0, 2.0, 3.0}, 0);
  CHECK(s.ball(0, 1.0) == std::vector<std::size_t>{0});
  CHECK(s.ball(0, 1.5) == std::vector<std::size_t>{0, 1});
  CHECK(s.ball(0, 10.0).size() == 4);
  CHECK(s.diameter() == 3.0);
  CHECK(s.max_distance_to_base() == 3.0);
}

TEST_CASE("distribution validation") {
  CHECK_NOTHROW((void)Distribution::validated({0.25, 0.25, 0.5}));
  CHECK(code_of([] { (void)Distribution::validated({0.5, 0.6}); }) == Errc::InvalidArgument);
  CHECK(code_of([] { (void)Distribution::validated({1.5, -0.5}); }) == Errc::InvalidArgument);
  const Distribution d = Distribution::dirac(3, 1);
  CHECK(d.w == std::vector<double>{0.0, 1.0, 0.0});
  CHECK(d.support() == std::vector<std::size_t>{1});
}

TEST_CASE("separation family values and properties") {
  std::mt19937 rng(2024);
  const MetricSpace s = random_line_space(rng, 12);

  SUBCASE("examples") {
    const MetricSpace pair = MetricSpace::from_line_positions({"x", "y"}, {0.0, 0.2}, 0);
    CHECK(separating_family(pair, 1)(0, 1) == doctest::Approx(0.2));
    CHECK(separating_family(pair, 10)(0, 1) == doctest::Approx(1.0));
    CHECK(separating_family(pair, 7)(0, 0) == 0.0);
  }

  SUBCASE("monotone in n, capped at one, pseudo-metric") {
    Matrix prev(s.size(), s.size(), 0.0);
    for (int n : {1, 2, 5, 11, 40}) {
      const CostMatrix d_n = separating_family(s, n);
      CHECK(d_n.is_pseudo_metric());
      check_pseudo_metric_axioms(d_n.values());
      for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
          CHECK(d_n(i, j) <= 1.0);
          CHECK(d_n(i, j) >= prev(i, j));
        }
      prev = d_n.values();
    }
  }

  SUBCASE("rejects n below one") {
    CHECK(code_of([&] { separating_family(s, 0); }) == Errc::InvalidArgument);
  }
}

TEST_CASE("capped lipschitz cost values and properties") {
  const MetricSpace pair = MetricSpace::from_line_positions({"x", "y"}, {0.0, 1.0}, 0);
  CHECK(capped_lipschitz_cost(pair, 0.1, 10.0)(0, 1) == doctest::Approx(0.2));
  CHECK(capped_lipschitz_cost(pair, 10.0, 0.1)(0, 1) == doctest::Approx(0.1));
  const MetricSpace dup = MetricSpace::from_line_positions({"x", "y"}, {1.0, 1.0}, 0);
  CHECK(capped_lipschitz_cost(dup, 1.0, 1.0)(0, 1) == 0.0);
  CHECK(code_of([&] { capped_lipschitz_cost(pair, 0.0, 0.0); }) == Errc::NonpositiveParameters);

  std::mt19937 rng(17);
  const MetricSpace s = random_line_space(rng, 10);
  const double As[] = {0.1, 0.5, 2.0};
  const double Ks[] = {0.2, 1.0, 8.0};
  for (double A : As)
    for (double K : Ks) {
      const CostMatrix c = capped_lipschitz_cost(s, A, K);
      check_pseudo_metric_axioms(c.values());
      const CostMatrix cA = capped_lipschitz_cost(s, A + 0.3, K);
      const CostMatrix cK = capped_lipschitz_cost(s, A, K + 0.7);
      for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
          CHECK(c(i, j) <= cA(i, j) + 1e-15);
          CHECK(c(i, j) <= cK(i, j) + 1e-15);
        }
    }
}

TEST_CASE("pseudo-metric axioms hold on a 200-point space") {
  std::mt19937 rng(5150);
  const MetricSpace s = random_line_space(rng, 200);
  check_pseudo_metric_axioms(separating_family(s, 3).values());
}

TEST_CASE("cost matrices permit zero off-diagonal entries when flagged pseudo") {
  Matrix m(3, 3, 0.0);
  m(0, 2) = m(2, 0) = 1.0;
  m(1, 2) = m(2, 1) = 1.0;
  CHECK_NOTHROW((void)CostMatrix::validated(m, true));
}

TEST_CASE("band analysis recognises indicator structure") {
  const MetricSpace s =
      MetricSpace::from_line_positions({"0", "1", "2", "3", "4"}, {0.0, 1.0, 2.0, 3.0, 4.0}, 0);
  const CostMatrix far = CostMatrix::far_indicator(s.distance_matrix(), 1.5);
  REQUIRE(far.band().has_value());
  CHECK(far.band()->level == 1.0);
  CHECK(far.band()->lo[0] == 0);
  CHECK(far.band()->hi[0] == 1);
  CHECK(far.band()->lo[2] == 1);
  CHECK(far.band()->hi[2] == 3);

  CHECK(CostMatrix::mismatch_indicator(4).band().has_value());

  // a capped cost with three distinct levels stays generic
  const CostMatrix capped = capped_lipschitz_cost(s, 1.0, 1.0);
  CHECK(!capped.band().has_value());
}
