#include <cmath>

#include "doctest.h"
#include "suncet/errors.hpp"
#include "suncet/gradcheck.hpp"
#include "suncet/matrix.hpp"
#include "suncet/rng.hpp"

using namespace suncet;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data) v = rng.next_normal();
  return m;
}

Matrix triple_loop_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j)
      for (std::size_t t = 0; t < a.cols; ++t)
        c.at(i, j) += a.at(i, t) * b.at(t, j);
  return c;
}

double max_rel_diff(const Matrix& a, const Matrix& b) {
  REQUIRE(same_shape(a, b));
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double denom = std::max({std::fabs(a.data[k]), std::fabs(b.data[k]), 1e-12});
    worst = std::max(worst, std::fabs(a.data[k] - b.data[k]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("matmul identity and scalar cases") {
  Matrix eye(3, 3);
  for (std::size_t i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
  Rng rng(11);
  Matrix m = random_matrix(3, 5, rng);
  Matrix out = matmul(eye, m);
  CHECK(max_rel_diff(out, m) == 0.0);

  Matrix a(1, 1, 2.0), b(1, 1, 3.0);
  CHECK(matmul(a, b).at(0, 0) == 6.0);
}

TEST_CASE("matmul agrees with triple-loop reference") {
  Rng rng(22);
  Matrix a = random_matrix(5, 4, rng);
  Matrix b = random_matrix(4, 3, rng);
  CHECK(max_rel_diff(matmul(a, b), triple_loop_matmul(a, b)) <= 1e-12);

  for (int trial = 0; trial < 30; ++trial) {
    std::size_t m = 1 + rng.next_below(16);
    std::size_t k = 1 + rng.next_below(16);
    std::size_t n = 1 + rng.next_below(16);
    Matrix x = random_matrix(m, k, rng);
    Matrix y = random_matrix(k, n, rng);
    CHECK(max_rel_diff(matmul(x, y), triple_loop_matmul(x, y)) <= 1e-12);
  }
}

TEST_CASE("matmul rejects mismatched shapes") {
  Matrix a(2, 3), b(4, 2);
  CHECK_THROWS_AS(matmul(a, b), shape_error);
  CHECK_THROWS_AS(matmul_nt(Matrix(2, 3), Matrix(2, 4)), shape_error);
  CHECK_THROWS_AS(matmul_tn(Matrix(3, 2), Matrix(4, 2)), shape_error);
}

TEST_CASE("matmul_nt and matmul_tn match composed references") {
  Rng rng(33);
  Matrix a = random_matrix(4, 6, rng);
  Matrix b = random_matrix(5, 6, rng);
  Matrix bt(6, 5);
  for (std::size_t i = 0; i < b.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) bt.at(j, i) = b.at(i, j);
  CHECK(max_rel_diff(matmul_nt(a, b), triple_loop_matmul(a, bt)) <= 1e-12);

  Matrix c = random_matrix(6, 4, rng);
  Matrix ct(4, 6);
  for (std::size_t i = 0; i < c.rows; ++i)
    for (std::size_t j = 0; j < c.cols; ++j) ct.at(j, i) = c.at(i, j);
  Matrix d = random_matrix(6, 3, rng);
  CHECK(max_rel_diff(matmul_tn(c, d), triple_loop_matmul(ct, d)) <= 1e-12);
}

TEST_CASE("l2_normalize_rows basics") {
  Matrix x(2, 2);
  x.at(0, 0) = 3.0;
  x.at(0, 1) = 4.0;
  x.at(1, 0) = 1.0;
  x.at(1, 1) = 0.0;
  RowNormalized out = l2_normalize_rows(x);
  CHECK(out.y.at(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(out.y.at(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
  // already-unit row passes through
  CHECK(out.y.at(1, 0) == 1.0);
  CHECK(out.y.at(1, 1) == 0.0);

  Rng rng(44);
  Matrix r = random_matrix(6, 5, rng);
  RowNormalized rn = l2_normalize_rows(r);
  for (std::size_t i = 0; i < r.rows; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < r.cols; ++j) sq += rn.y.at(i, j) * rn.y.at(i, j);
    CHECK(std::fabs(std::sqrt(sq) - 1.0) <= 1e-12);
  }
}

TEST_CASE("l2_normalize_rows zero row uses eps and a linear backward") {
  Matrix x(1, 3);
  RowNormalized out = l2_normalize_rows(x, 1e-12);
  CHECK(out.clamped[0] == 1);
  CHECK(out.y.at(0, 0) == 0.0);
  Matrix dy(1, 3, 2.0);
  Matrix dx = out.backward(dy);
  CHECK(dx.at(0, 0) == doctest::Approx(2.0 / 1e-12));
}

TEST_CASE("l2_normalize_rows backward matches finite differences") {
  Rng rng(55);
  Matrix x = random_matrix(4, 3, rng);
  Matrix weights = random_matrix(4, 3, rng);
  auto f = [&](const Matrix& probe) {
    RowNormalized n = l2_normalize_rows(probe);
    double s = 0.0;
    for (std::size_t k = 0; k < n.y.size(); ++k)
      s += weights.data[k] * n.y.data[k];
    return s;
  };
  RowNormalized n = l2_normalize_rows(x);
  Matrix analytic = n.backward(weights);
  CHECK(gradcheck(f, x, analytic, 1e-6) <= 1e-6);
}

TEST_CASE("logsumexp_rows stability and bounds") {
  Matrix single(1, 1, 42.5);
  CHECK(logsumexp_rows(single)[0] == 42.5);

  Matrix big(1, 2, 1000.0);
  double lse = logsumexp_rows(big)[0];
  CHECK(std::isfinite(lse));
  CHECK(lse == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));

  Matrix zeros(1, 3, 0.0);
  CHECK(logsumexp_rows(zeros)[0] == doctest::Approx(std::log(3.0)));

  Rng rng(66);
  Matrix r(5, 7);
  for (double& v : r.data) v = rng.next_normal() * 10.0;
  auto out = logsumexp_rows(r);
  for (std::size_t i = 0; i < r.rows; ++i) {
    double mx = r.at(i, 0);
    for (std::size_t j = 1; j < r.cols; ++j) mx = std::max(mx, r.at(i, j));
    CHECK(out[i] >= mx);
  }
}

TEST_CASE("gradcheck on an exact quadratic") {
  Rng rng(77);
  Matrix x = random_matrix(3, 4, rng);
  auto f = [](const Matrix& m) {
    double s = 0.0;
    for (double v : m.data) s += v * v;
    return s;
  };
  Matrix grad(3, 4);
  for (std::size_t k = 0; k < x.size(); ++k) grad.data[k] = 2.0 * x.data[k];
  CHECK(gradcheck(f, x, grad, 1e-5) <= 1e-9);
}

TEST_CASE("gradcheck input validation") {
  Matrix x(1, 1, 1.0);
  Matrix g(1, 1, 2.0);
  auto f = [](const Matrix& m) { return m.data[0] * m.data[0]; };
  CHECK_THROWS_AS(gradcheck(f, x, g, 1e-8), std::invalid_argument);
  CHECK_THROWS_AS(gradcheck(f, x, g, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(gradcheck(f, x, Matrix(2, 1), 1e-6), shape_error);

  auto bad = [](const Matrix& m) { return std::log(-1.0 - m.data[0] * 0.0); };
  CHECK_THROWS_AS(gradcheck(bad, x, g, 1e-6), numeric_error);
}
