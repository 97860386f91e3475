#include "homctl/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "homctl/errors.hpp"

namespace homctl {

Matrix make_matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n_rows = static_cast<Eigen::Index>(rows.size());
  const auto n_cols = n_rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.begin()->size());
  Matrix m(n_rows, n_cols);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != n_cols) {
      throw Error(ErrorKind::dimension, "make_matrix: ragged rows");
    }
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  require_finite(m, "make_matrix");
  return m;
}

Vector make_vector(std::initializer_list<double> entries) {
  Vector v(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (double e : entries) v(i++) = e;
  require_finite(v, "make_vector");
  return v;
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::domain, std::string(what) + ": non-finite entry");
  }
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::dimension,
                std::string(what) + ": expected a square matrix, got " + std::to_string(m.rows()) +
                    "x" + std::to_string(m.cols()));
  }
}

Matrix expm(const Matrix& m) {
  require_square(m, "expm");
  require_finite(m, "expm");
  if (m.rows() == 0) return m;
  return m.exp();
}

Matrix zoh_integral(const Matrix& a, const Matrix& b, double h) {
  require_square(a, "zoh_integral");
  if (b.rows() != a.rows()) {
    throw Error(ErrorKind::dimension, "zoh_integral: B must have as many rows as A");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorKind::domain, "zoh_integral: step must be positive and finite");
  }
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  Matrix block = Matrix::Zero(n + m, n + m);
  block.topLeftCorner(n, n) = a * h;
  block.topRightCorner(n, m) = b * h;
  return expm(block).topRightCorner(n, m);
}

std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
  require_square(m, "eigenvalues");
  require_finite(m, "eigenvalues");
  if (m.rows() == 0) return {};
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::convergence, "eigenvalues: QR iteration did not converge");
  }
  const auto& values = solver.eigenvalues();
  return {values.data(), values.data() + values.size()};
}

double min_eig_sym(const Matrix& m) {
  require_square(m, "min_eig_sym");
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

std::optional<Matrix> chol_pd_check(const Matrix& m) {
  require_square(m, "chol_pd_check");
  if (!m.allFinite()) return std::nullopt;
  const Eigen::Index n = m.rows();
  const Matrix sym = 0.5 * (m + m.transpose());
  const double pivot_tol = 1e-12 * sym.norm();
  Matrix lower = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = sym(j, j) - lower.row(j).head(j).squaredNorm();
    if (!(pivot > pivot_tol)) return std::nullopt;
    lower(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      lower(i, j) = (sym(i, j) - lower.row(i).head(j).dot(lower.row(j).head(j))) / lower(j, j);
    }
  }
  return lower;
}

Vector solve_linear(const Matrix& a, const Vector& b) {
  require_square(a, "solve_linear");
  if (b.size() != a.rows()) throw Error(ErrorKind::dimension, "solve_linear: rhs size mismatch");
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw Error(ErrorKind::singular, "solve_linear: singular matrix");
  Vector x = lu.solve(b);
  if ((a * x - b).norm() > 1e-10 * std::max(b.norm(), 1.0) * std::max(a.norm(), 1.0)) {
    throw Error(ErrorKind::singular, "solve_linear: matrix is numerically singular");
  }
  return x;
}

Vector least_norm_solve(const Matrix& a, const Vector& b) {
  if (b.size() != a.rows()) {
    throw Error(ErrorKind::dimension, "least_norm_solve: rhs size mismatch");
  }
  if (a.cols() == 0) return Vector::Zero(0);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(1e-12);  // relative to the largest pivot
  cod.compute(a);
  Vector x = cod.solve(b);
  const double residual = (a * x - b).norm();
  if (residual > 1e-8 * b.norm() && residual > 1e-14) {
    throw Error(ErrorKind::singular,
                "least_norm_solve: inconsistent system, residual " + std::to_string(residual));
  }
  return x;
}

Matrix null_space(const Matrix& a, double rel_tol) {
  const Eigen::Index cols = a.cols();
  if (a.rows() == 0) return Matrix::Identity(cols, cols);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * smax) ++rank;
  }
  return svd.matrixV().rightCols(cols - rank);
}

int numerical_rank(const Matrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * sv(0)) ++rank;
  }
  return rank;
}

Matrix sqrtm_spd(const Matrix& m) {
  require_square(m, "sqrtm_spd");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()));
  if (solver.eigenvalues().minCoeff() <= 0.0) {
    throw Error(ErrorKind::domain, "sqrtm_spd: matrix is not positive definite");
  }
  return solver.eigenvectors() * solver.eigenvalues().cwiseSqrt().asDiagonal() *
         solver.eigenvectors().transpose();
}

}  // namespace homctl
