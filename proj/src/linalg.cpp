#include "wcrisk/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "wcrisk/error.hpp"

namespace wcrisk {

namespace {

constexpr double kJacobiTolerance = 1e-12;
constexpr int kMaxJacobiSweeps = 100;
constexpr std::size_t kVectorizedLyapunovMaxDim = 20;

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorKind::invalid_input, msg);
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    invalid(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
            std::to_string(b.cols()));
  }
}

double off_diagonal_sq(const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (i != j) s += m(i, j) * m(i, j);
    }
  }
  return s;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) invalid("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_) invalid("Matrix::from_rows: ragged rows");
    std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * m.cols_);
  }
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::column(std::span<const double> v) {
  Matrix m(v.size(), 1);
  std::copy(v.begin(), v.end(), m.data_.begin());
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

std::vector<Vector> Matrix::to_rows() const {
  std::vector<Vector> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    out[i].assign(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
  }
  return out;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
Matrix operator*(Matrix m, double s) { return m *= s; }
Matrix operator*(double s, Matrix m) { return m *= s; }

Matrix operator*(const Matrix& lhs, const Matrix& rhs) {
  if (lhs.cols() != rhs.rows()) {
    invalid("matrix product: inner dimensions " + std::to_string(lhs.cols()) + " and " +
            std::to_string(rhs.rows()) + " differ");
  }
  Matrix out(lhs.rows(), rhs.cols());
  for (std::size_t i = 0; i < lhs.rows(); ++i) {
    for (std::size_t k = 0; k < lhs.cols(); ++k) {
      const double a = lhs(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < rhs.cols(); ++j) out(i, j) += a * rhs(k, j);
    }
  }
  return out;
}

Vector operator*(const Matrix& m, std::span<const double> v) {
  if (m.cols() != v.size()) {
    invalid("matrix-vector product: " + std::to_string(m.cols()) + " columns vs vector of " +
            std::to_string(v.size()));
  }
  Vector out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

Vector add(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) invalid("add: length mismatch");
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return out;
}

Vector subtract(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) invalid("subtract: length mismatch");
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return out;
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) invalid("dot: length mismatch");
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

double norm_sq(std::span<const double> v) { return dot(v, v); }
double norm(std::span<const double> v) { return std::sqrt(norm_sq(v)); }

bool all_finite(const Matrix& m) {
  return std::all_of(m.data().begin(), m.data().end(), [](double x) { return std::isfinite(x); });
}

void require_finite(const Matrix& m, const char* what) {
  if (!all_finite(m)) invalid(std::string(what) + ": non-finite entry");
}

double trace(const Matrix& m) {
  if (!m.is_square()) invalid("trace: matrix is not square");
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, i);
  return s;
}

double frobenius_norm(const Matrix& m) {
  return std::sqrt(std::inner_product(m.data().begin(), m.data().end(), m.data().begin(), 0.0));
}

Matrix power(const Matrix& m, unsigned k) {
  if (!m.is_square()) invalid("power: matrix is not square");
  Matrix result = Matrix::identity(m.rows());
  Matrix base = m;
  while (k > 0) {
    if (k & 1U) result = result * base;
    k >>= 1U;
    if (k > 0) base = base * base;
  }
  return result;
}

Matrix hstack(const std::vector<Matrix>& blocks) {
  if (blocks.empty()) return {};
  const std::size_t rows = blocks.front().rows();
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) invalid("hstack: row count mismatch");
    cols += b.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, offset + j) = b(i, j);
    }
    offset += b.cols();
  }
  return out;
}

Matrix vstack(const std::vector<Matrix>& blocks) {
  if (blocks.empty()) return {};
  const std::size_t cols = blocks.front().cols();
  std::size_t rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != cols) invalid("vstack: column count mismatch");
    rows += b.rows();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.rows(); ++i) {
      for (std::size_t j = 0; j < cols; ++j) out(offset + i, j) = b(i, j);
    }
    offset += b.rows();
  }
  return out;
}

Matrix kron(const Matrix& x, const Matrix& y) {
  require_finite(x, "kron");
  require_finite(y, "kron");
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double s = x(i, j);
      for (std::size_t k = 0; k < y.rows(); ++k) {
        for (std::size_t l = 0; l < y.cols(); ++l) {
          out(i * y.rows() + k, j * y.cols() + l) = s * y(k, l);
        }
      }
    }
  }
  return out;
}

SymmetricEigen symmetric_eigen(const Matrix& m) {
  if (!m.is_square()) invalid("symmetric_eigen: matrix is not square");
  require_finite(m, "symmetric_eigen");
  const std::size_t n = m.rows();
  Matrix a = m;
  Matrix v = Matrix::identity(n);
  const double total = frobenius_norm(a);
  const double tol_sq = std::pow(kJacobiTolerance * total, 2);

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    if (off_diagonal_sq(a) <= tol_sq) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(1.0, theta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

double spectral_norm(const Matrix& m) {
  if (m.empty()) invalid("spectral_norm: dimension-zero matrix");
  require_finite(m, "spectral_norm");
  const Matrix mt = m.transpose();
  const Matrix gram = m.rows() < m.cols() ? m * mt : mt * m;
  const auto eig = symmetric_eigen(gram);
  return std::sqrt(std::max(0.0, eig.values.back()));
}

Vector singular_values(const Matrix& m) {
  if (m.empty()) invalid("singular_values: dimension-zero matrix");
  require_finite(m, "singular_values");
  Matrix u = m.rows() >= m.cols() ? m : m.transpose();
  const std::size_t rows = u.rows();
  const std::size_t n = u.cols();

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double up = u(i, p);
          const double uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
      }
    }
    if (!rotated) break;
  }

  Vector sv(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += u(i, j) * u(i, j);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

Vector solve(const Matrix& m, std::span<const double> rhs) {
  if (!m.is_square()) invalid("solve: matrix is not square");
  if (m.rows() != rhs.size()) invalid("solve: right-hand side length mismatch");
  const std::size_t n = m.rows();
  Matrix lu = m;
  Vector x(rhs.begin(), rhs.end());
  const double scale = std::max(frobenius_norm(m), 1.0);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu(i, k)) > std::abs(lu(pivot, k))) pivot = i;
    }
    if (std::abs(lu(pivot, k)) <= 1e-300 * scale) invalid("solve: singular matrix");
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(pivot, j));
      std::swap(x[k], x[pivot]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / lu(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) lu(i, j) -= f * lu(k, j);
      x[i] -= f * x[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double s = x[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= lu(k, j) * x[j];
    x[k] = s / lu(k, k);
  }
  return x;
}

Matrix psd_sqrt(const Matrix& m) {
  const auto eig = symmetric_eigen(m);
  const std::size_t n = m.rows();
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::sqrt(std::max(0.0, eig.values[k]));
    if (s == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        out(i, j) += s * eig.vectors(i, k) * eig.vectors(j, k);
      }
    }
  }
  return out;
}

Matrix solve_discrete_lyapunov(const Matrix& a, const Matrix& q, LyapunovMethod method) {
  if (!a.is_square() || !q.is_square() || a.rows() != q.rows()) {
    invalid("solve_discrete_lyapunov: a and q must be square of equal size");
  }
  if (a.empty()) invalid("solve_discrete_lyapunov: dimension-zero matrix");
  require_finite(a, "solve_discrete_lyapunov");
  require_finite(q, "solve_discrete_lyapunov");
  const double a_norm = spectral_norm(a);
  if (a_norm >= 1.0) {
    throw Error(ErrorKind::not_contractive,
                "solve_discrete_lyapunov: ||a|| = " + std::to_string(a_norm) + " >= 1");
  }
  const std::size_t n = a.rows();
  if (method == LyapunovMethod::automatic) {
    method = n <= kVectorizedLyapunovMaxDim ? LyapunovMethod::vectorized : LyapunovMethod::doubling;
  }

  Matrix p;
  if (method == LyapunovMethod::vectorized) {
    Matrix lhs = Matrix::identity(n * n) - kron(a, a);
    const Vector vec = solve(lhs, q.data());
    p = Matrix(n, n);
    std::copy(vec.begin(), vec.end(), p.data().begin());
  } else {
    p = q;
    Matrix ak = a;
    for (int iter = 0; iter < 64; ++iter) {
      const Matrix increment = ak * p * ak.transpose();
      p += increment;
      if (frobenius_norm(increment) <= 1e-17 * frobenius_norm(p)) break;
      ak = ak * ak;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (p(i, j) + p(j, i));
      p(i, j) = s;
      p(j, i) = s;
    }
  }
  return p;
}

std::size_t reachability_rank(const Matrix& a, const Matrix& e) {
  if (!a.is_square()) invalid("reachability_rank: a is not square");
  if (e.rows() != a.rows()) invalid("reachability_rank: e must have as many rows as a");
  require_finite(a, "reachability_rank");
  require_finite(e, "reachability_rank");
  if (e.empty()) return 0;
  const std::size_t n = a.rows();
  std::vector<Matrix> blocks;
  blocks.reserve(n);
  Matrix term = e;
  for (std::size_t k = 0; k < n; ++k) {
    blocks.push_back(term);
    term = a * term;
  }
  const Vector sv = singular_values(hstack(blocks));
  if (sv.front() == 0.0) return 0;
  const double threshold = 1e-10 * sv.front();
  return static_cast<std::size_t>(
      std::count_if(sv.begin(), sv.end(), [&](double s) { return s > threshold; }));
}

}  // namespace wcrisk
