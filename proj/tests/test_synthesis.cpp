#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "homctl/errors.hpp"
#include "test_support.hpp"

using namespace homctl;

namespace {

LinearPlant double_integrator() {
  LinearPlant p;
  p.A = make_matrix({{0, 1}, {0, 0}});
  p.B = make_matrix({{0}, {1}});
  return p;
}

LinearPlant triple_integrator() {
  LinearPlant p;
  p.A = make_matrix({{0, 1, 0}, {0, 0, 1}, {0, 0, 0}});
  p.B = make_matrix({{0}, {0}, {1}});
  return p;
}

LinearPlant two_input_plant() {
  LinearPlant p;
  p.A = make_matrix({{0, 1, 0, 0}, {-2, 0.3, 1, 0}, {0, 0, 0, 1}, {0.5, 0, -1, 0}});
  p.B = make_matrix({{0, 0}, {1, 0}, {0, 0}, {0, 1}});
  return p;
}

void check_generator(const LinearPlant& plant, const GeneratorSolution& sol) {
  const Matrix& A = plant.A;
  CHECK((A * sol.G0 - sol.G0 * A + plant.B * sol.Y0 - A).norm() <= 1e-10);
  CHECK((sol.G0 * plant.B).norm() <= 1e-10);
}

}  // namespace

TEST_CASE("plant validation and controllability") {
  LinearPlant p = harmonic_oscillator();
  CHECK_NOTHROW(p.validate());
  CHECK(p.is_controllable());
  CHECK(p.controllability_index() == 2);
  LinearPlant bad;
  bad.A = Matrix::Identity(2, 2);
  bad.B = make_matrix({{0}, {0}});
  CHECK_FALSE(bad.is_controllable());
  bad.B = make_matrix({{1}, {1}});
  CHECK_FALSE(bad.is_controllable());
  LinearPlant wrong;
  wrong.A = Matrix::Identity(2, 2);
  wrong.B = make_matrix({{1}, {0}, {0}});
  CHECK_THROWS_AS(wrong.validate(), Error);
  p.delay = -1;
  CHECK_THROWS_AS(p.validate(), Error);
  CHECK(triple_integrator().controllability_index() == 3);
}

TEST_CASE("config validation") {
  SynthesisConfig cfg;
  cfg.T = 0;
  try {
    cfg.validate();
    FAIL("T = 0 accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
  }
  CHECK(SynthesisConfig::mu == -1.0);
}

TEST_CASE("generator equation: oscillator least-norm branch") {
  const GeneratorSolution sol = solve_generator_equation(harmonic_oscillator(), SynthesisConfig{});
  check_generator(harmonic_oscillator(), sol);
  CHECK((sol.G0 - make_matrix({{-1, 0}, {0, 0}})).norm() < 1e-12);
  CHECK((sol.Y0 - make_matrix({{-2, 0}})).norm() < 1e-12);
}

TEST_CASE("generator equation: integrator chains and a two-input plant") {
  for (const LinearPlant& p : {double_integrator(), triple_integrator(), two_input_plant()}) {
    const GeneratorSolution sol = solve_generator_equation(p, SynthesisConfig{});
    check_generator(p, sol);
    const Eigen::Index n = p.state_dim();
    const Dilation gd(Matrix::Identity(n, n) - sol.G0, Matrix::Identity(n, n));
    CHECK(gd.is_anti_hurwitz());
  }
  const GeneratorSolution di = solve_generator_equation(double_integrator(), SynthesisConfig{});
  CHECK((di.G0 - make_matrix({{-1, 0}, {0, 0}})).norm() < 1e-12);
}

TEST_CASE("generator equation: uncontrollable plant is infeasible") {
  LinearPlant bad;
  bad.A = Matrix::Identity(2, 2);
  bad.B = make_matrix({{0}, {0}});
  try {
    solve_generator_equation(bad, SynthesisConfig{});
    FAIL("uncontrollable plant accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::infeasible);
  }
}

TEST_CASE("lmi: the hand-tuned oscillator pair satisfies the equality exactly") {
  const Matrix A0 = make_matrix({{0, 1}, {0, 0}});
  const Matrix B = make_matrix({{0}, {1}});
  const Matrix Gd = make_matrix({{2, 0}, {0, 1}});
  const Matrix X = make_matrix({{1, -2}, {-2, 5.5}});
  const Matrix Y = make_matrix({{-5.5, -3}}) * X;
  CHECK((Y - make_matrix({{0.5, -5.5}})).norm() < 1e-15);
  const Matrix eq = A0 * X + X * A0.transpose() + B * Y + Y.transpose() * B.transpose() + Gd * X + X * Gd.transpose();
  CHECK(eq.norm() == 0.0);
  CHECK(min_eig_sym(X) > 0.2);
  CHECK(min_eig_sym(Gd * X + X * Gd.transpose()) > 0.5);
}

TEST_CASE("lmi solver output") {
  const Matrix A0 = make_matrix({{0, 1}, {0, 0}});
  const Matrix B = make_matrix({{0}, {1}});
  const Matrix Gd = make_matrix({{2, 0}, {0, 1}});
  const LmiSolution sol = solve_lmi_feasibility(A0, B, Gd, SynthesisConfig{});
  const Matrix& X = sol.X;
  const Matrix& Y = sol.Y;
  const Matrix eq = A0 * X + X * A0.transpose() + B * Y + Y.transpose() * B.transpose() + Gd * X + X * Gd.transpose();
  CHECK(eq.norm() <= 1e-8 * std::max(1.0, X.norm()));
  CHECK(min_eig_sym(X) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(min_eig_sym(Gd * X + X * Gd.transpose()) > 0.0);
  CHECK(sol.margin > SynthesisConfig{}.feasibility_tolerance);
  for (std::size_t i = 1; i < sol.history.size(); ++i) CHECK(sol.history[i] >= sol.history[i - 1]);

  // Scaling the pair keeps feasibility and the gain.
  const Matrix X2 = 2 * X;
  const Matrix Y2 = 2 * Y;
  const Matrix eq2 =
      A0 * X2 + X2 * A0.transpose() + B * Y2 + Y2.transpose() * B.transpose() + Gd * X2 + X2 * Gd.transpose();
  CHECK(eq2.norm() <= 2e-8 * std::max(1.0, X.norm()));
  CHECK((Y2 * X2.inverse() - Y * X.inverse()).norm() < 1e-12);
}

TEST_CASE("synthesize on the oscillator") {
  SynthesisConfig cfg;
  cfg.T = 1.0;
  const SynthesizedController c = synthesize(harmonic_oscillator(), cfg);
  const VerificationReport report = verify(c, harmonic_oscillator());
  CHECK(report.all_passed());
  CHECK((c.K0 - make_matrix({{1, 0}})).norm() < 1e-12);
  CHECK((c.Gd - make_matrix({{2, 0}, {0, 1}})).norm() < 1e-12);
  CHECK((c.weight() - c.X.inverse()).norm() < 1e-12);
  CHECK(check_strict_monotonicity(c.dilation()));

  cfg.T = 2.0;
  const SynthesizedController c2 = synthesize(harmonic_oscillator(), cfg);
  CHECK((c2.Gd - c.Gd).norm() < 1e-14);
  CHECK((c2.K0 - c.K0).norm() < 1e-14);
  CHECK((c2.K - c.K).norm() < 1e-12);
  CHECK((c2.X - c.X).norm() < 1e-12);
  CHECK((c2.weight() - c.weight()).norm() > 1e-3);
}

TEST_CASE("synthesize on higher-order plants") {
  for (const LinearPlant& p : {double_integrator(), triple_integrator(), two_input_plant()}) {
    const SynthesizedController c = synthesize(p, SynthesisConfig{});
    const VerificationReport report = verify(c, p);
    INFO(report.failures());
    CHECK(report.all_passed());
  }
}

TEST_CASE("homogeneity and nilpotency of synthesized controllers") {
  for (const LinearPlant& p : {harmonic_oscillator(), triple_integrator(), two_input_plant()}) {
    const SynthesizedController c = synthesize(p, SynthesisConfig{});
    const Eigen::Index n = p.state_dim();
    for (int trial = 0; trial < 20; ++trial) {
      const double s = homctl::test::uniform(-3, 3);
      const Matrix d = expm(s * c.Gd);
      // Degree -1: A0 Gd = (Gd - I) A0, hence A0 d(s) = e^{-s} d(s) A0.
      const Matrix lhs = c.A0 * d;
      CHECK((lhs - std::exp(-s) * d * c.A0).norm() <= 1e-8 * std::max(1.0, lhs.norm()));
      CHECK((d * c.B - std::exp(s) * c.B).norm() <= 1e-8 * std::max(1.0, c.B.norm() * std::exp(s)));
    }
    Matrix power = Matrix::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) power = power * (p.A + p.B * c.K0);
    CHECK(power.norm() <= 1e-8);
    CHECK((p.A + p.B * c.K0 - c.A0).norm() <= 1e-12);
  }
}

TEST_CASE("verify the hand-tuned oscillator controller") {
  const SynthesizedController c = oscillator_reference_controller();
  const VerificationReport report = verify(c, harmonic_oscillator());
  CHECK(report.all_passed());
  REQUIRE(report.find("x_positive_definite"));
  CHECK(report.find("x_positive_definite")->value == doctest::Approx((6.5 - std::sqrt(36.25)) / 2).epsilon(1e-12));
  CHECK(report.find("gd_x_positive_definite")->value == doctest::Approx((15 - std::sqrt(193.0)) / 2).epsilon(1e-12));
  for (const auto& check : report.checks) {
    if (!check.is_margin) CHECK(check.value <= 1e-10);
  }
}

TEST_CASE("verify flags corrupted controllers") {
  SynthesizedController bad_x = oscillator_reference_controller();
  bad_x.X = make_matrix({{1, 2}, {2, 1}});
  const VerificationReport r1 = verify(bad_x, harmonic_oscillator());
  CHECK_FALSE(r1.all_passed());
  CHECK_FALSE(r1.find("x_positive_definite")->passed);

  SynthesizedController bad_k = oscillator_reference_controller();
  bad_k.K(0, 0) += 0.1;
  const VerificationReport r2 = verify(bad_k, harmonic_oscillator());
  CHECK_FALSE(r2.find("lmi_equality")->passed);

  LinearPlant three;
  three.A = Matrix::Zero(3, 3);
  three.B = Matrix::Zero(3, 1);
  try {
    verify(oscillator_reference_controller(), three);
    FAIL("dimension mismatch accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension);
  }
}
