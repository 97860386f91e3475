#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "homctl/errors.hpp"
#include "test_support.hpp"

using namespace homctl;
using homctl::test::random_vector;
using homctl::test::uniform;

namespace {

Dilation standard(Eigen::Index n) { return Dilation(Matrix::Identity(n, n), Matrix::Identity(n, n)); }

Dilation diag21() { return Dilation(make_matrix({{2, 0}, {0, 1}}), Matrix::Identity(2, 2)); }

// Random strictly monotone pair: G = I + S + N with S skew and N small,
// P = I, so P G + G^T P = 2 I + N + N^T > 0.
Dilation random_monotone(Eigen::Index n) {
  Matrix s = homctl::test::random_matrix(n, n, 2.0);
  s = (s - s.transpose()).eval();
  const Matrix small = homctl::test::random_matrix(n, n, 0.3 / static_cast<double>(n));
  Matrix p = homctl::test::random_matrix(n, n);
  p = (p * p.transpose() + Matrix::Identity(n, n)).eval();
  // Pull the skew part through P so that P G + G^T P stays positive.
  const Matrix g = Matrix::Identity(n, n) + p.inverse() * s + small;
  return Dilation(g, p);
}

Vector central_difference(const Dilation& d, const Vector& x, double step) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector e = Vector::Zero(x.size());
    e(i) = step;
    g(i) = (hom_norm(d, x + e) - hom_norm(d, x - e)) / (2 * step);
  }
  return g;
}

}  // namespace

TEST_CASE("construction checks shapes and symmetry") {
  CHECK_THROWS_AS(Dilation(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), Error);
  CHECK_THROWS_AS(Dilation(Matrix::Identity(2, 2), make_matrix({{1, 1}, {0, 1}})), Error);
  CHECK_THROWS_AS(Dilation(make_matrix({{1, 2, 3}}), Matrix::Identity(1, 1)), Error);
}

TEST_CASE("dilate") {
  const Dilation d = diag21();
  const Vector x = make_vector({1, 1});
  CHECK((dilate(d, 0.0, x) - x).norm() == 0.0);
  CHECK((dilate(d, std::log(2.0), x) - make_vector({4, 2})).norm() < 1e-14);
  CHECK_THROWS_AS(dilate(d, 1.0, make_vector({1, 2, 3})), Error);
  for (int trial = 0; trial < 200; ++trial) {
    const double s = uniform(-3, 3);
    const double t = uniform(-3, 3);
    const Vector v = random_vector(2);
    const Vector lhs = dilate(d, s, dilate(d, t, v));
    CHECK((lhs - dilate(d, s + t, v)).norm() < 1e-12 * std::max(1.0, lhs.norm()));
  }
}

TEST_CASE("strict monotonicity") {
  CHECK(check_strict_monotonicity(standard(2)));
  CHECK(check_strict_monotonicity(homctl::test::oscillator_dilation()));
  CHECK_FALSE(check_strict_monotonicity(Dilation(make_matrix({{1, 10}, {0, 1}}), Matrix::Identity(2, 2))));
  CHECK(diag21().is_anti_hurwitz());
  CHECK_FALSE(Dilation(make_matrix({{1, 0}, {0, -1}}), Matrix::Identity(2, 2)).is_anti_hurwitz());
}

TEST_CASE("hom_norm closed forms") {
  const Dilation osc = homctl::test::oscillator_dilation();
  CHECK(hom_norm(osc, Vector::Zero(2)) == 0.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vector x = random_vector(2);
    x /= osc.weighted_norm(x);
    CHECK(hom_norm(osc, x) == doctest::Approx(1.0).epsilon(1e-12));
    const Vector y = random_vector(3, 10.0);
    CHECK(hom_norm(standard(3), y) == doctest::Approx(y.norm()).epsilon(1e-12));
  }
  for (double a : {1e-8, 0.01, 0.5, 2.0, 1e6}) {
    CHECK(hom_norm(diag21(), make_vector({a, 0})) == doctest::Approx(std::sqrt(a)).epsilon(1e-12));
  }
  CHECK(hom_norm(osc, make_vector({1e-200, 0})) == 0.0);
}

TEST_CASE("hom_norm residual of the defining equation") {
  const Dilation osc = homctl::test::oscillator_dilation();
  for (int trial = 0; trial < 200; ++trial) {
    const Vector x = random_vector(2, std::pow(10.0, uniform(-6, 6)));
    const double n = hom_norm(osc, x);
    CHECK(std::abs(osc.weighted_norm(dilate(osc, -std::log(n), x)) - 1.0) <= 1e-12);
  }
}

TEST_CASE("homogeneity property") {
  std::vector<Dilation> dils{homctl::test::oscillator_dilation(), diag21()};
  for (Eigen::Index n = 2; n <= 4; ++n) dils.push_back(random_monotone(n));
  int cases = 0;
  for (const auto& d : dils) {
    REQUIRE(check_strict_monotonicity(d));
    for (int trial = 0; trial < 60; ++trial, ++cases) {
      const Vector x = random_vector(d.dim());
      const double s = uniform(-5, 5);
      const double lhs = hom_norm(d, dilate(d, s, x));
      CHECK(lhs == doctest::Approx(std::exp(s) * hom_norm(d, x)).epsilon(1e-9));
    }
  }
  CHECK(cases >= 200);
}

TEST_CASE("unit sphere agreement and ordering") {
  const Dilation d = random_monotone(3);
  for (int trial = 0; trial < 200; ++trial) {
    Vector x = random_vector(3);
    x /= d.weighted_norm(x);
    CHECK(std::abs(hom_norm(d, x) - 1.0) <= 1e-9);
    const double scale = uniform(0.1, 3.0);
    const Vector y = scale * x;
    const double hn = hom_norm(d, y);
    CHECK((hn - 1.0) * (scale - 1.0) >= 0.0);
  }
}

TEST_CASE("continuity at the origin") {
  const Dilation d = homctl::test::oscillator_dilation();
  const Vector v = make_vector({0.3, -0.8});
  double prev = hom_norm(d, v);
  for (int j = 1; j <= 60; ++j) {
    const double cur = hom_norm(d, std::pow(2.0, -j) * v);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev < 1e-8);
}

TEST_CASE("gradient closed forms") {
  const Vector x = make_vector({0.3, -1.2, 2.0});
  CHECK((hom_norm_gradient(standard(3), x) - x / x.norm()).norm() < 1e-12);
  CHECK_THROWS_AS(hom_norm_gradient(standard(3), Vector::Zero(3)), Error);
  const Dilation osc = homctl::test::oscillator_dilation();
  for (int trial = 0; trial < 50; ++trial) {
    Vector y = random_vector(2);
    y /= osc.weighted_norm(y);
    CHECK(hom_norm_gradient(osc, y).dot(osc.generator() * y) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("gradient matches central finite differences") {
  const std::vector<Dilation> dils{homctl::test::oscillator_dilation(), random_monotone(3), random_monotone(4)};
  int cases = 0;
  for (const auto& d : dils) {
    for (int trial = 0; trial < 80; ++trial, ++cases) {
      const Vector x = random_vector(d.dim(), uniform(0.2, 3.0));
      const Vector g = hom_norm_gradient(d, x);
      const Vector fd = central_difference(d, x, 1e-6);
      CHECK((g - fd).norm() <= 1e-5 * g.norm());
    }
  }
  CHECK(cases >= 200);
}
