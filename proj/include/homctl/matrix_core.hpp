#pragma once

// Dense kernels shared by every module. Problem sizes are tiny (n <= 32), so
// everything is dynamic-size Eigen and nothing is cached.

#include <complex>
#include <initializer_list>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace homctl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Builds a matrix from nested row lists, e.g. `make_matrix({{0, 1}, {-1, 0}})`.
/// Throws on ragged rows or non-finite entries.
Matrix make_matrix(std::initializer_list<std::initializer_list<double>> rows);

/// Column vector from a list of entries.
Vector make_vector(std::initializer_list<double> entries);

void require_finite(const Matrix& m, const char* what);
void require_square(const Matrix& m, const char* what);

/// e^M by scaling and squaring with a degree-13 Pade approximant.
Matrix expm(const Matrix& m);

/// Gamma(h) = int_0^h e^{A s} ds * B, read off the top-right block of
/// exp(h * [[A, B], [0, 0]]). Valid for singular A.
Matrix zoh_integral(const Matrix& a, const Matrix& b, double h);

std::vector<std::complex<double>> eigenvalues(const Matrix& m);

/// Smallest eigenvalue of the symmetric part (M + M^T) / 2.
double min_eig_sym(const Matrix& m);

/// Lower Cholesky factor when M is positive definite, nullopt otherwise.
/// A pivot counts as positive only above 1e-12 * ||M||.
std::optional<Matrix> chol_pd_check(const Matrix& m);

inline bool is_positive_definite(const Matrix& m) { return chol_pd_check(m).has_value(); }

/// Solves A x = b for square nonsingular A.
Vector solve_linear(const Matrix& a, const Vector& b);

/// Minimum-norm solution of a possibly rank-deficient system. Throws
/// ErrorKind::singular when the residual exceeds 1e-8 * ||b||.
Vector least_norm_solve(const Matrix& a, const Vector& b);

/// Orthonormal basis (columns) of ker(A), rank decided relative to the
/// largest singular value.
Matrix null_space(const Matrix& a, double rel_tol = 1e-10);

int numerical_rank(const Matrix& a, double rel_tol = 1e-9);

/// Principal square root of a symmetric positive definite matrix.
Matrix sqrtm_spd(const Matrix& m);

}  // namespace homctl
