#pragma once

#include <string>
#include <vector>

#include "homctl/dilation.hpp"
#include "homctl/matrix_core.hpp"

namespace homctl {

/// x'(t) = A x(t) + B u(t - delay).
struct LinearPlant {
  Matrix A;
  Matrix B;
  double delay = 0.0;

  Eigen::Index state_dim() const noexcept { return A.rows(); }
  Eigen::Index input_dim() const noexcept { return B.cols(); }

  /// Throws on bad shapes, non-finite entries or a negative delay.
  void validate() const;

  /// rank [B, AB, ..., A^{n-1}B] == n, rank relative to the largest singular value.
  bool is_controllable(double rel_tol = 1e-9) const;

  /// Smallest k with rank [B, ..., A^{k-1}B] == n, or 0 if never.
  int controllability_index(double rel_tol = 1e-9) const;
};

struct SynthesisConfig {
  /// Homogeneity degree. The settling-time clock d/dt ||x/r||_d = -1/T is
  /// specific to degree -1, so it is not configurable.
  static constexpr double mu = -1.0;

  double T = 1.0;
  /// Stop threshold on min(lambda_min(X), lambda_min(Gd X + X Gd^T)) with tr X = 1.
  double feasibility_tolerance = 1e-4;
  int max_iterations = 4000;

  void validate() const;
};

struct SynthesizedController {
  Matrix A;  // plant matrices the controller was built for
  Matrix B;
  double T = 1.0;
  double mu = SynthesisConfig::mu;
  Matrix G0, Y0;
  Matrix Gd;
  Matrix A0;
  Matrix X, Y;
  Matrix K0, K;

  /// d(-ln T)^T X^{-1} d(-ln T).
  Matrix weight() const;
  /// Dilation(Gd, weight()).
  Dilation dilation() const;
  /// e^{-ln(T) Gd}.
  Matrix time_scaling() const;
};

/// Solves A G0 - G0 A + B Y0 = A, G0 B = 0 (least-norm first, then a search
/// over the solution set if I + mu G0 is not anti-Hurwitz).
struct GeneratorSolution {
  Matrix G0;
  Matrix Y0;
};
GeneratorSolution solve_generator_equation(const LinearPlant& plant, const SynthesisConfig& cfg);

struct LmiSolution {
  Matrix X;
  Matrix Y;
  /// Final objective min(lambda_min(X), lambda_min(Gd X + X Gd^T)) at tr X = 1.
  double margin = 0.0;
  int iterations = 0;
  /// Objective after every accepted ascent step; non-decreasing.
  std::vector<double> history;
};

/// A0 X + X A0^T + B Y + Y^T B^T + Gd X + X Gd^T = 0 with X > 0 and
/// Gd X + X Gd^T > 0. The result is scaled so that lambda_min(X) = 1.
LmiSolution solve_lmi_feasibility(const Matrix& A0, const Matrix& B, const Matrix& Gd,
                                  const SynthesisConfig& cfg);

/// Full pipeline; every invariant is checked before returning.
SynthesizedController synthesize(const LinearPlant& plant, const SynthesisConfig& cfg);

/// Builds the full record from hand-picked gains: G0 = (Gd - I)/mu,
/// Y0 = K0 (G0 - I), A0 = A + B K0, Y = K X.
SynthesizedController assemble_controller(const LinearPlant& plant, const Matrix& K0,
                                          const Matrix& Gd, const Matrix& K, const Matrix& X,
                                          double T, double mu = SynthesisConfig::mu);

struct VerificationCheck {
  std::string name;
  double value = 0.0;      // residual norm or positive-definiteness margin
  double threshold = 0.0;  // residuals must be <= threshold, margins > threshold
  bool is_margin = false;
  bool passed = false;
};

struct VerificationReport {
  std::vector<VerificationCheck> checks;

  bool all_passed() const;
  const VerificationCheck* find(const std::string& name) const;
  /// Names of the failed checks, comma separated.
  std::string failures() const;
};

VerificationReport verify(const SynthesizedController& controller, const LinearPlant& plant);

}  // namespace homctl
