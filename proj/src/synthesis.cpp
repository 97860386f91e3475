#include "homctl/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "homctl/errors.hpp"

namespace homctl {

namespace {

// Column-major vec() helpers: vec(A X B) = (B^T kron A) vec(X).
Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

double min_real_part(const Matrix& m) {
  double out = std::numeric_limits<double>::infinity();
  for (const auto& lambda : eigenvalues(m)) out = std::min(out, lambda.real());
  return out;
}

double min_singular_value(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues().tail(1)(0) : 0.0;
}

struct GeneratorSystem {
  Matrix lhs;
  Vector rhs;
};

// Unknowns [vec(G0); vec(Y0)]; equations [vec(A G0 - G0 A + B Y0); vec(G0 B)] = [vec(A); 0].
GeneratorSystem generator_system(const LinearPlant& plant) {
  const Eigen::Index n = plant.state_dim();
  const Eigen::Index m = plant.input_dim();
  const Matrix eye_n = Matrix::Identity(n, n);
  GeneratorSystem sys;
  sys.lhs = Matrix::Zero(n * n + n * m, n * n + m * n);
  sys.lhs.topLeftCorner(n * n, n * n) = kron(eye_n, plant.A) - kron(plant.A.transpose(), eye_n);
  sys.lhs.topRightCorner(n * n, m * n) = kron(eye_n, plant.B);
  sys.lhs.bottomLeftCorner(n * m, n * n) = kron(plant.B.transpose(), eye_n);
  sys.rhs = Vector::Zero(n * n + n * m);
  sys.rhs.head(n * n) = vec(plant.A);
  return sys;
}

// Fitness of a G0 candidate: min Re eig(I + mu G0), capped by how far G0 - I
// is from singular.
double generator_fitness(const Matrix& g0, double mu) {
  const Eigen::Index n = g0.rows();
  const Matrix eye = Matrix::Identity(n, n);
  return std::min(min_real_part(eye + mu * g0), min_singular_value(g0 - eye));
}

// Symmetric-matrix basis used by the LMI solver: index k <-> (i, j), i <= j.
std::vector<Matrix> symmetric_basis(Eigen::Index n) {
  std::vector<Matrix> basis;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      Matrix e = Matrix::Zero(n, n);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      basis.push_back(std::move(e));
    }
  }
  return basis;
}

Vector upper_triangle(const Matrix& s) {
  const Eigen::Index n = s.rows();
  Vector out(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) out(k++) = s(i, j);
  }
  return out;
}

// Minimum-norm point of the convex hull of the columns of g (a few columns),
// by projected gradient on the simplex.
Vector min_norm_hull_point(const Matrix& g) {
  const Eigen::Index k = g.cols();
  if (k == 1) return g.col(0);
  Vector w = Vector::Constant(k, 1.0 / static_cast<double>(k));
  const Matrix gram = g.transpose() * g;
  const double lipschitz = std::max(gram.norm(), 1e-300);
  for (int it = 0; it < 500; ++it) {
    Vector next = w - gram * w / lipschitz;
    // Euclidean projection onto the probability simplex.
    Vector sorted = next;
    std::sort(sorted.data(), sorted.data() + k, std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      cumulative += sorted(i);
      const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
      if (sorted(i) - candidate > 0) theta = candidate;
    }
    next = (next.array() - theta).max(0.0).matrix();
    if ((next - w).norm() < 1e-14) {
      w = next;
      break;
    }
    w = next;
  }
  return g * w;
}

class LmiObjective {
 public:
  LmiObjective(std::vector<Matrix> x_basis, std::vector<Matrix> s_basis)
      : x_basis_(std::move(x_basis)), s_basis_(std::move(s_basis)) {}

  Matrix x_of(const Vector& z) const { return combine(x_basis_, z); }
  Matrix s_of(const Vector& z) const { return combine(s_basis_, z); }

  double value(const Vector& z) const {
    return std::min(min_eig_sym(x_of(z)), min_eig_sym(s_of(z)));
  }

  // Subgradients of every eigenvalue within eps of the current minimum.
  Matrix active_subgradients(const Vector& z, double eps) const {
    std::vector<Vector> grads;
    const double t = value(z);
    collect(x_basis_, x_of(z), t, eps, grads);
    collect(s_basis_, s_of(z), t, eps, grads);
    Matrix out(z.size(), static_cast<Eigen::Index>(grads.size()));
    for (std::size_t i = 0; i < grads.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = grads[i];
    return out;
  }

 private:
  static Matrix combine(const std::vector<Matrix>& basis, const Vector& z) {
    Matrix out = Matrix::Zero(basis.front().rows(), basis.front().cols());
    for (std::size_t i = 0; i < basis.size(); ++i) out += z(static_cast<Eigen::Index>(i)) * basis[i];
    return 0.5 * (out + out.transpose());
  }

  static void collect(const std::vector<Matrix>& basis, const Matrix& m, double t, double eps,
                      std::vector<Vector>& grads) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    for (Eigen::Index e = 0; e < m.rows(); ++e) {
      if (solver.eigenvalues()(e) > t + eps) continue;
      const Vector v = solver.eigenvectors().col(e);
      Vector g(static_cast<Eigen::Index>(basis.size()));
      for (std::size_t i = 0; i < basis.size(); ++i) g(static_cast<Eigen::Index>(i)) = v.dot(basis[i] * v);
      grads.push_back(std::move(g));
    }
  }

  std::vector<Matrix> x_basis_;
  std::vector<Matrix> s_basis_;
};

}  // namespace

void LinearPlant::validate() const {
  require_square(A, "plant A");
  if (A.rows() == 0) throw Error(ErrorKind::dimension, "plant: empty state matrix");
  if (B.rows() != A.rows()) {
    throw Error(ErrorKind::dimension, "plant: B must have " + std::to_string(A.rows()) + " rows");
  }
  if (B.cols() == 0) throw Error(ErrorKind::dimension, "plant: B has no columns");
  require_finite(A, "plant A");
  require_finite(B, "plant B");
  if (!(delay >= 0.0) || !std::isfinite(delay)) {
    throw Error(ErrorKind::config, "plant: delay must be a finite non-negative number");
  }
}

int LinearPlant::controllability_index(double rel_tol) const {
  const Eigen::Index n = state_dim();
  const Eigen::Index m = input_dim();
  Matrix reach(n, 0);
  Matrix block = B;
  const double scale = std::max({A.norm(), B.norm(), 1.0});
  for (Eigen::Index k = 1; k <= n; ++k) {
    reach.conservativeResize(n, k * m);
    reach.rightCols(m) = block;
    // Relative rank, with an absolute floor so that B = 0 never counts.
    Eigen::JacobiSVD<Matrix> svd(reach);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > rel_tol * std::max(sv(0), 1e-300) && sv(i) > 1e-14 * scale) ++rank;
    }
    if (rank == n) return static_cast<int>(k);
    block = A * block;
  }
  return 0;
}

bool LinearPlant::is_controllable(double rel_tol) const { return controllability_index(rel_tol) > 0; }

void SynthesisConfig::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw Error(ErrorKind::config, "synthesis: settling time T must be positive");
  }
  if (!(feasibility_tolerance > 0.0)) {
    throw Error(ErrorKind::config, "synthesis: feasibility tolerance must be positive");
  }
  if (max_iterations <= 0) throw Error(ErrorKind::config, "synthesis: max_iterations must be positive");
}

Matrix SynthesizedController::time_scaling() const { return expm(-std::log(T) * Gd); }

Matrix SynthesizedController::weight() const {
  const Matrix scale = time_scaling();
  const Matrix x_inv = X.inverse();
  const Matrix p = scale.transpose() * x_inv * scale;
  return 0.5 * (p + p.transpose());
}

Dilation SynthesizedController::dilation() const { return Dilation(Gd, weight()); }

GeneratorSolution solve_generator_equation(const LinearPlant& plant, const SynthesisConfig& cfg) {
  plant.validate();
  cfg.validate();
  if (!plant.is_controllable()) {
    throw Error(ErrorKind::infeasible, "synthesis: the pair {A, B} is not controllable");
  }
  const Eigen::Index n = plant.state_dim();
  const Eigen::Index m = plant.input_dim();
  const GeneratorSystem sys = generator_system(plant);

  Vector solution;
  try {
    solution = least_norm_solve(sys.lhs, sys.rhs);
  } catch (const Error& e) {
    throw Error(ErrorKind::infeasible,
                std::string("synthesis: generator equation has no solution (internal error): ") + e.what());
  }

  auto unpack = [&](const Vector& v) {
    return GeneratorSolution{unvec(v.head(n * n), n, n), unvec(v.tail(m * n), m, n)};
  };

  double fitness = generator_fitness(unpack(solution).G0, cfg.mu);
  if (fitness <= 1e-9) {
    // Pattern search over the affine solution set.
    const Matrix directions = null_space(sys.lhs);
    Vector coeffs = Vector::Zero(directions.cols());
    double step = 1.0;
    for (int it = 0; it < cfg.max_iterations && fitness <= 1e-6 && directions.cols() > 0; ++it) {
      bool improved = false;
      for (Eigen::Index k = 0; k < directions.cols() && !improved; ++k) {
        for (double sign : {1.0, -1.0}) {
          Vector trial = coeffs;
          trial(k) += sign * step;
          const double f = generator_fitness(unpack(solution + directions * trial).G0, cfg.mu);
          if (f > fitness) {
            coeffs = trial;
            fitness = f;
            improved = true;
            break;
          }
        }
      }
      if (!improved) {
        step *= 0.5;
        if (step < 1e-8) break;
      } else {
        step *= 2.0;
      }
    }
    solution += directions * coeffs;
    if (fitness <= 1e-9) {
      throw Error(ErrorKind::infeasible,
                  "synthesis: no anti-Hurwitz generator found in the solution set of the generator equation");
    }
  }

  GeneratorSolution out = unpack(solution);
  const double residual = (plant.A * out.G0 - out.G0 * plant.A + plant.B * out.Y0 - plant.A).norm();
  if (residual > 1e-8 * (1.0 + plant.A.norm()) || (out.G0 * plant.B).norm() > 1e-8 * plant.B.norm()) {
    throw Error(ErrorKind::verification,
                "synthesis: generator equation residual " + std::to_string(residual) + " too large");
  }
  return out;
}

LmiSolution solve_lmi_feasibility(const Matrix& A0, const Matrix& B, const Matrix& Gd,
                                  const SynthesisConfig& cfg) {
  require_square(A0, "solve_lmi_feasibility A0");
  require_square(Gd, "solve_lmi_feasibility Gd");
  if (B.rows() != A0.rows() || Gd.rows() != A0.rows()) {
    throw Error(ErrorKind::dimension, "solve_lmi_feasibility: inconsistent dimensions");
  }
  cfg.validate();
  const Eigen::Index n = A0.rows();
  const Eigen::Index m = B.cols();

  // Parameter vector p = [sym(X) coordinates; vec(Y)].
  const std::vector<Matrix> sym_basis = symmetric_basis(n);
  const auto n_sym = static_cast<Eigen::Index>(sym_basis.size());
  const Eigen::Index n_params = n_sym + m * n;
  auto x_of = [&](const Vector& p) {
    Matrix x = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n_sym; ++k) x += 0.5 * p(k) * sym_basis[static_cast<std::size_t>(k)];
    return x;
  };
  auto y_of = [&](const Vector& p) { return unvec(p.tail(m * n), m, n); };
  auto equality = [&](const Matrix& x, const Matrix& y) {
    const Matrix by = B * y;
    return Matrix(A0 * x + x * A0.transpose() + by + by.transpose() + Gd * x + x * Gd.transpose());
  };

  Matrix map(n_sym, n_params);
  for (Eigen::Index k = 0; k < n_params; ++k) {
    const Vector e = Vector::Unit(n_params, k);
    map.col(k) = upper_triangle(equality(x_of(e), y_of(e)));
  }
  const Matrix kernel = null_space(map, 1e-11);
  if (kernel.cols() == 0) {
    throw Error(ErrorKind::infeasible, "solve_lmi_feasibility: equality constraint admits only X = 0");
  }

  // z parametrizes the kernel; tr X(z) = 1 fixes the positive scaling.
  std::vector<Matrix> x_basis;
  std::vector<Matrix> s_basis;
  Vector trace_row(kernel.cols());
  for (Eigen::Index k = 0; k < kernel.cols(); ++k) {
    const Matrix x = x_of(kernel.col(k));
    x_basis.push_back(x);
    s_basis.push_back(Gd * x + x * Gd.transpose());
    trace_row(k) = x.trace();
  }
  if (trace_row.norm() < 1e-12) {
    throw Error(ErrorKind::infeasible, "solve_lmi_feasibility: every kernel element has tr X = 0");
  }
  const LmiObjective objective(x_basis, s_basis);
  auto project = [&](const Vector& g) { return Vector(g - trace_row * trace_row.dot(g) / trace_row.squaredNorm()); };

  Vector z = trace_row / trace_row.squaredNorm();
  // Start from the best of the minimum-norm point and the kernel directions.
  double t = objective.value(z);
  for (Eigen::Index k = 0; k < kernel.cols(); ++k) {
    if (std::abs(trace_row(k)) < 1e-12) continue;
    const Vector candidate = Vector::Unit(kernel.cols(), k) / trace_row(k);
    const double tc = objective.value(candidate);
    if (tc > t) {
      z = candidate;
      t = tc;
    }
  }

  LmiSolution out;
  out.history.push_back(t);
  double eps = 1e-2;
  double step = 1.0;
  int stalls = 0;
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    const Matrix grads = objective.active_subgradients(z, eps);
    Matrix projected(grads.rows(), grads.cols());
    for (Eigen::Index k = 0; k < grads.cols(); ++k) projected.col(k) = project(grads.col(k));
    const Vector direction = min_norm_hull_point(projected);
    if (direction.norm() < 1e-12) {
      // Stationary for this eps: tighten and retry, or stop at the optimum.
      if (eps < 1e-9) break;
      eps *= 0.1;
      continue;
    }
    bool accepted = false;
    double trial_step = std::min(step * 2.0, 1e6);
    for (int ls = 0; ls < 60; ++ls, trial_step *= 0.5) {
      const Vector candidate = z + trial_step * direction;
      const double tc = objective.value(candidate);
      if (tc > t) {
        z = candidate;
        t = tc;
        step = trial_step;
        accepted = true;
        break;
      }
    }
    if (accepted) {
      out.history.push_back(t);
      stalls = 0;
      const double prev = out.history[out.history.size() - 2];
      if (t > cfg.feasibility_tolerance && t - prev < 1e-12 * std::max(1.0, std::abs(t))) break;
    } else {
      if (eps < 1e-9) {
        if (++stalls > 3) break;
      }
      eps *= 0.1;
    }
  }
  out.iterations = it;
  out.margin = t;
  if (!(t > cfg.feasibility_tolerance)) {
    std::ostringstream msg;
    msg << "solve_lmi_feasibility: best margin " << t << " after " << it
        << " iterations does not exceed the tolerance " << cfg.feasibility_tolerance;
    throw Error(ErrorKind::infeasible, msg.str());
  }

  const Vector p = kernel * z;
  Matrix x = x_of(p);
  Matrix y = y_of(p);
  const double lambda = min_eig_sym(x);
  out.X = x / lambda;
  out.X = 0.5 * (out.X + out.X.transpose());
  out.Y = y / lambda;
  return out;
}

SynthesizedController synthesize(const LinearPlant& plant, const SynthesisConfig& cfg) {
  const GeneratorSolution gen = solve_generator_equation(plant, cfg);
  const Eigen::Index n = plant.state_dim();
  const Matrix eye = Matrix::Identity(n, n);

  SynthesizedController c;
  c.A = plant.A;
  c.B = plant.B;
  c.T = cfg.T;
  c.mu = cfg.mu;
  c.G0 = gen.G0;
  c.Y0 = gen.Y0;
  c.Gd = eye + cfg.mu * gen.G0;
  c.K0 = gen.Y0 * (gen.G0 - eye).inverse();
  c.A0 = plant.A + plant.B * c.K0;

  const LmiSolution lmi = solve_lmi_feasibility(c.A0, plant.B, c.Gd, cfg);
  c.X = lmi.X;
  c.Y = lmi.Y;
  c.K = lmi.Y * lmi.X.inverse();

  if (!check_strict_monotonicity(c.dilation())) {
    throw Error(ErrorKind::verification, "synthesis: dilation is not strictly monotone for the weighted norm");
  }
  const VerificationReport report = verify(c, plant);
  if (!report.all_passed()) {
    throw Error(ErrorKind::verification, "synthesis: invariant check failed: " + report.failures());
  }
  return c;
}

SynthesizedController assemble_controller(const LinearPlant& plant, const Matrix& K0,
                                          const Matrix& Gd, const Matrix& K, const Matrix& X,
                                          double T, double mu) {
  plant.validate();
  const Eigen::Index n = plant.state_dim();
  const Eigen::Index m = plant.input_dim();
  if (K0.rows() != m || K0.cols() != n || K.rows() != m || K.cols() != n || Gd.rows() != n ||
      Gd.cols() != n || X.rows() != n || X.cols() != n) {
    throw Error(ErrorKind::dimension, "assemble_controller: gain shapes do not match the plant");
  }
  if (!(T > 0.0)) throw Error(ErrorKind::config, "assemble_controller: T must be positive");
  if (!(mu < 0.0)) throw Error(ErrorKind::config, "assemble_controller: mu must be negative");
  const Matrix eye = Matrix::Identity(n, n);
  SynthesizedController c;
  c.A = plant.A;
  c.B = plant.B;
  c.T = T;
  c.mu = mu;
  c.Gd = Gd;
  c.G0 = (Gd - eye) / mu;
  c.K0 = K0;
  c.Y0 = K0 * (c.G0 - eye);
  c.A0 = plant.A + plant.B * K0;
  c.X = X;
  c.K = K;
  c.Y = K * X;
  return c;
}

bool VerificationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const VerificationCheck* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string VerificationReport::failures() const {
  std::string out;
  for (const auto& c : checks) {
    if (c.passed) continue;
    if (!out.empty()) out += ", ";
    out += c.name;
  }
  return out;
}

VerificationReport verify(const SynthesizedController& c, const LinearPlant& plant) {
  plant.validate();
  const Eigen::Index n = plant.state_dim();
  const Eigen::Index m = plant.input_dim();
  auto shape_ok = [](const Matrix& mat, Eigen::Index r, Eigen::Index cols) {
    return mat.rows() == r && mat.cols() == cols;
  };
  if (!shape_ok(c.G0, n, n) || !shape_ok(c.Gd, n, n) || !shape_ok(c.A0, n, n) || !shape_ok(c.X, n, n) ||
      !shape_ok(c.Y0, m, n) || !shape_ok(c.Y, m, n) || !shape_ok(c.K0, m, n) || !shape_ok(c.K, m, n)) {
    throw Error(ErrorKind::dimension, "verify: controller matrices do not match the plant dimensions");
  }
  for (const Matrix* mat : {&c.G0, &c.Gd, &c.A0, &c.X, &c.Y0, &c.Y, &c.K0, &c.K}) {
    require_finite(*mat, "verify");
  }

  VerificationReport report;
  auto residual = [&](std::string name, double value, double threshold) {
    report.checks.push_back({std::move(name), value, threshold, false, std::isfinite(value) && value <= threshold});
  };
  auto margin = [&](std::string name, double value, bool passed) {
    report.checks.push_back({std::move(name), value, 0.0, true, passed && value > 0.0});
  };

  const Matrix eye = Matrix::Identity(n, n);
  const Matrix& A = plant.A;
  const Matrix& B = plant.B;

  residual("generator_equation", (A * c.G0 - c.G0 * A + B * c.Y0 - A).norm(), 1e-8 * (1.0 + A.norm()));
  residual("generator_input", (c.G0 * B).norm(), 1e-8 * B.norm());
  residual("generator_definition", (c.Gd - eye - c.mu * c.G0).norm(), 1e-8 * (1.0 + c.G0.norm()));
  margin("anti_hurwitz", min_real_part(c.Gd), true);
  margin("g0_minus_identity_invertible", min_singular_value(c.G0 - eye), min_singular_value(c.G0 - eye) > 1e-10);
  residual("k0_definition", (c.K0 * (c.G0 - eye) - c.Y0).norm(), 1e-8 * (1.0 + c.Y0.norm()));
  residual("a0_definition", (c.A0 - A - B * c.K0).norm(), 1e-8 * (1.0 + A.norm()));
  residual("homogeneity", (c.A0 * c.Gd - (c.Gd + c.mu * eye) * c.A0).norm(), 1e-8);
  residual("input_homogeneity", (c.Gd * B - B).norm(), 1e-8);

  Matrix a0_power = eye;
  for (Eigen::Index k = 0; k < n; ++k) a0_power = a0_power * c.A0;
  residual("nilpotent", a0_power.norm(), 1e-8 * std::pow(std::max(1.0, c.A0.norm()), static_cast<double>(n)));

  // Equality uses the deployed gain: Y_eff = K X.
  const Matrix y_eff = c.K * c.X;
  const Matrix by = B * y_eff;
  const Matrix lmi = c.A0 * c.X + c.X * c.A0.transpose() + by + by.transpose() + c.Gd * c.X + c.X * c.Gd.transpose();
  residual("lmi_equality", lmi.norm(), 1e-8 * std::max(1.0, c.X.norm()));
  residual("x_symmetric", (c.X - c.X.transpose()).norm(), 1e-10 * std::max(1.0, c.X.norm()));
  margin("x_positive_definite", min_eig_sym(c.X), is_positive_definite(c.X));
  const Matrix monotone = c.Gd * c.X + c.X * c.Gd.transpose();
  margin("gd_x_positive_definite", min_eig_sym(monotone), is_positive_definite(monotone));
  residual("k_definition", (c.K * c.X - c.Y).norm(), 1e-8 * (1.0 + c.Y.norm()));

  if (c.T > 0.0 && is_positive_definite(c.X)) {
    const Dilation d = c.dilation();
    const Matrix& p = d.weight();
    const Matrix pg = p * c.Gd + c.Gd.transpose() * p;
    margin("dilation_monotone", min_eig_sym(pg), check_strict_monotonicity(d));
  } else {
    margin("dilation_monotone", -1.0, false);
  }
  return report;
}

}  // namespace homctl
