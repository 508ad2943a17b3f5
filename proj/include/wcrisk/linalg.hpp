#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace wcrisk {

using Vector = std::vector<double>;

/// Dense row-major real matrix. Small-dimension kernel: everything in the
/// library works on a handful of states, so no expression templates or
/// blocking are attempted.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix from_rows(const std::vector<Vector>& rows);
  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix column(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transpose() const;
  std::vector<Vector> to_rows() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator*(Matrix m, double s);
Matrix operator*(double s, Matrix m);
Matrix operator*(const Matrix& lhs, const Matrix& rhs);
Vector operator*(const Matrix& m, std::span<const double> v);

Vector add(std::span<const double> x, std::span<const double> y);
Vector subtract(std::span<const double> x, std::span<const double> y);
double dot(std::span<const double> x, std::span<const double> y);
double norm(std::span<const double> v);
double norm_sq(std::span<const double> v);

bool all_finite(const Matrix& m);
/// Throws invalid_input when `m` holds NaN/Inf.
void require_finite(const Matrix& m, const char* what);

double trace(const Matrix& m);
double frobenius_norm(const Matrix& m);
Matrix power(const Matrix& m, unsigned k);
Matrix hstack(const std::vector<Matrix>& blocks);
Matrix vstack(const std::vector<Matrix>& blocks);
Matrix kron(const Matrix& x, const Matrix& y);

struct SymmetricEigen {
  Vector values;  // ascending
  Matrix vectors; // columns are eigenvectors, same order as values
};

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Iterates until
/// the off-diagonal Frobenius mass is below 1e-12 of the total.
SymmetricEigen symmetric_eigen(const Matrix& m);

/// Largest singular value, from the largest eigenvalue of MᵀM (or MMᵀ,
/// whichever is smaller).
double spectral_norm(const Matrix& m);

/// Singular values in descending order via one-sided (Hestenes) Jacobi, which
/// keeps small singular values accurate for rank decisions.
Vector singular_values(const Matrix& m);

/// Solves m·x = rhs (square m) by LU with partial pivoting.
Vector solve(const Matrix& m, std::span<const double> rhs);

/// Symmetric square root S with S·S = m for symmetric PSD m. Slightly
/// negative eigenvalues (roundoff) are clamped to zero.
Matrix psd_sqrt(const Matrix& m);

enum class LyapunovMethod {
  automatic,   // vectorized up to n = 20, doubling above
  vectorized,  // (I − a⊗a) vec(P) = vec(q)
  doubling,    // P ← a P aᵀ + P, a ← a²
};

/// Solves a·P·aᵀ − P + q = 0 for contractive a (‖a‖ < 1), i.e.
/// P = Σ_k a^k q (aᵀ)^k. The result is symmetrized.
Matrix solve_discrete_lyapunov(const Matrix& a, const Matrix& q,
                               LyapunovMethod method = LyapunovMethod::automatic);

/// Rank of [e, a·e, …, a^{n−1}·e] with singular values counted above
/// 1e-10 of the largest one. (a, e) is reachable iff the result is n.
std::size_t reachability_rank(const Matrix& a, const Matrix& e);

}  // namespace wcrisk
