#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "wcrisk/error.hpp"
#include "wcrisk/linalg.hpp"

using namespace wcrisk;
using namespace wcrisk::testing;

namespace {

// Largest singular value of a 2×2 from the eigenvalues of MᵀM in closed form.
double spectral_norm_2x2(const Matrix& m) {
  const double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
  const double g11 = a * a + c * c, g22 = b * b + d * d, g12 = a * b + c * d;
  const double half_tr = 0.5 * (g11 + g22);
  const double det = g11 * g22 - g12 * g12;
  return std::sqrt(half_tr + std::sqrt(half_tr * half_tr - det));
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected wcrisk::Error");
  return ErrorKind::io;
}

}  // namespace

TEST_CASE("spectral_norm examples") {
  CHECK(spectral_norm(Matrix::identity(2)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spectral_norm(Matrix(3, 2)) == 0.0);

  const Matrix acl = plant_a() + plant_b() * plant_k();
  const double oracle = spectral_norm_2x2(acl);
  CHECK(oracle > 0.0);
  CHECK(oracle < 1.0);
  CHECK(std::abs(spectral_norm(acl) - oracle) <= 1e-10 * oracle);
  CHECK(spectral_norm(acl) == doctest::Approx(kClosedLoopNorm).epsilon(1e-12));

  CHECK(kind_of([] { spectral_norm(Matrix{}); }) == ErrorKind::invalid_input);
  Matrix bad = Matrix::identity(2);
  bad(0, 1) = std::nan("");
  CHECK(kind_of([&] { spectral_norm(bad); }) == ErrorKind::invalid_input);
}

TEST_CASE("spectral_norm agrees with the closed form on random 2x2") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Matrix m = random_matrix(rng, 2, 2, 3.0);
    const double oracle = spectral_norm_2x2(m);
    CHECK(std::abs(spectral_norm(m) - oracle) <= 1e-10 * oracle);
  }
}

TEST_CASE("spectral_norm is sub-multiplicative") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + rng() % 5, k = 1 + rng() % 5, m = 1 + rng() % 5;
    const Matrix x = random_matrix(rng, n, k);
    const Matrix y = random_matrix(rng, k, m);
    CHECK(spectral_norm(x * y) <= spectral_norm(x) * spectral_norm(y) + 1e-9);
  }
}

TEST_CASE("singular values match the spectral norm and rank-deficient structure") {
  std::mt19937_64 rng(3);
  const Matrix g = random_matrix(rng, 5, 2);
  const Matrix low_rank = g * random_matrix(rng, 2, 4);
  const Vector sv = singular_values(low_rank);
  REQUIRE(sv.size() == 4);
  CHECK(sv[0] == doctest::Approx(spectral_norm(low_rank)).epsilon(1e-10));
  CHECK(sv[2] <= 1e-12 * sv[0]);
  CHECK(sv[3] <= 1e-12 * sv[0]);
}

TEST_CASE("solve_discrete_lyapunov examples") {
  const Matrix zero(2, 2);
  CHECK(max_abs_diff(solve_discrete_lyapunov(zero, Matrix::identity(2)), Matrix::identity(2)) < 1e-15);

  const Matrix half = Matrix{{0.5, 0.0}, {0.0, 0.5}};
  const Matrix p = solve_discrete_lyapunov(half, Matrix::identity(2));
  CHECK(p(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(p(1, 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(p(0, 1)) < 1e-15);

  const Matrix acl = plant_a() + plant_b() * plant_k();
  const Matrix q = plant_e() * plant_sigma_w() * plant_e().transpose();
  const Matrix pcl = solve_discrete_lyapunov(acl, q);
  CHECK(std::sqrt(trace(pcl) / kLevel) == doctest::Approx(2.94).epsilon(0.01 / 2.94));
  CHECK(std::sqrt(trace(pcl) / kLevel) == doctest::Approx(kUltimateRadius).epsilon(1e-12));
}

TEST_CASE("solve_discrete_lyapunov errors") {
  CHECK(kind_of([] { solve_discrete_lyapunov(Matrix::identity(2), Matrix::identity(3)); }) ==
        ErrorKind::invalid_input);
  CHECK(kind_of([] { solve_discrete_lyapunov(Matrix(2, 3), Matrix::identity(2)); }) ==
        ErrorKind::invalid_input);
  CHECK(kind_of([] { solve_discrete_lyapunov(Matrix::identity(2), Matrix::identity(2)); }) ==
        ErrorKind::not_contractive);
  CHECK(kind_of([] { solve_discrete_lyapunov(plant_a(), Matrix::identity(2)); }) ==
        ErrorKind::not_contractive);
}

TEST_CASE("solve_discrete_lyapunov residual, symmetry and PSD on random instances") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng() % 6;
    const Matrix a = random_contractive(rng, n, 0.05 + 0.9 * std::generate_canonical<double, 53>(rng));
    const Matrix q = random_psd(rng, n, 1 + rng() % n);
    for (auto method : {LyapunovMethod::vectorized, LyapunovMethod::doubling}) {
      const Matrix p = solve_discrete_lyapunov(a, q, method);
      const Matrix residual = a * p * a.transpose() - p + q;
      CHECK(spectral_norm(residual) <= 1e-8 * (1.0 + spectral_norm(q)));
      CHECK(max_abs_diff(p, p.transpose()) <= 1e-12);
      CHECK(symmetric_eigen(p).values.front() >= -1e-10);
    }
  }
}

TEST_CASE("vectorized and doubling Lyapunov solvers agree above the vectorized size limit") {
  std::mt19937_64 rng(99);
  const Matrix a = random_contractive(rng, 24, 0.8);
  const Matrix q = random_psd(rng, 24, 24);
  const Matrix p = solve_discrete_lyapunov(a, q);  // automatic → doubling
  const Matrix pv = solve_discrete_lyapunov(a, q, LyapunovMethod::vectorized);
  CHECK(max_abs_diff(p, pv) <= 1e-8 * (1.0 + frobenius_norm(pv)));
}

TEST_CASE("kron examples and trace identity") {
  const Matrix sigma = Matrix{{2.0, 0.5}, {0.5, 1.0}};
  const Matrix block = kron(Matrix::identity(2), sigma);
  REQUIRE(block.rows() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double expected = (i / 2 == j / 2) ? sigma(i % 2, j % 2) : 0.0;
      CHECK(block(i, j) == expected);
    }
  }
  CHECK(kron(Matrix{{2.0}}, Matrix{{1.0, 2.0}, {3.0, 4.0}}) == Matrix{{2.0, 4.0}, {6.0, 8.0}});

  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 1 + rng() % 4, m = 1 + rng() % 4;
    const Matrix x = random_matrix(rng, n, n);
    const Matrix y = random_matrix(rng, m, m);
    CHECK(trace(kron(x, y)) == doctest::Approx(trace(x) * trace(y)).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("Tr((I_t ⊗ Σ_w) H_tᵀ H_t) equals the term-by-term sum") {
  const Matrix a = plant_a();
  const Matrix e = plant_e();
  const Matrix sw = plant_sigma_w();
  const unsigned t = 3;
  const Matrix h = hstack({a * a * e, a * e, e});
  const double kron_form = trace(kron(Matrix::identity(t), sw) * h.transpose() * h);

  double direct = 0.0;
  Matrix ak = Matrix::identity(2);
  for (unsigned k = 0; k < t; ++k) {
    direct += trace(ak * e * sw * e.transpose() * ak.transpose());
    ak = ak * a;
  }
  CHECK(kron_form == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("reachability_rank examples") {
  CHECK(reachability_rank(Matrix::identity(2), Matrix::identity(2)) == 2);
  CHECK(reachability_rank(Matrix{{0.3, 1.0}, {-2.0, 0.1}}, Matrix(2, 2)) == 0);
  // det(E) = 1·(−0.5) − 2·0.5 = −1.5 ≠ 0.
  CHECK(reachability_rank(plant_a(), plant_e()) == 2);
  // Single input that only excites an invariant subspace.
  CHECK(reachability_rank(Matrix{{0.5, 0.0}, {0.0, 0.2}}, Matrix{{1.0}, {0.0}}) == 1);
  CHECK(reachability_rank(Matrix{{0.5, 1.0}, {0.0, 0.2}}, Matrix{{0.0}, {1.0}}) == 2);
  CHECK(kind_of([] { reachability_rank(Matrix::identity(2), Matrix(3, 1)); }) == ErrorKind::invalid_input);
}

TEST_CASE("rank threshold is scale invariant") {
  const Matrix a{{0.5, 1.0}, {0.0, 0.2}};
  const Matrix e{{0.0}, {1.0}};
  CHECK(reachability_rank(a, e * 1e-8) == 2);
  CHECK(reachability_rank(a, e * 1e8) == 2);
}

TEST_CASE("symmetric_eigen reconstructs the matrix") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 30; ++i) {
    const std::size_t n = 1 + rng() % 6;
    Matrix s = random_matrix(rng, n, n);
    s = s + s.transpose();
    const auto eig = symmetric_eigen(s);
    const Matrix rebuilt = eig.vectors * Matrix::diagonal(eig.values) * eig.vectors.transpose();
    CHECK(max_abs_diff(rebuilt, s) <= 1e-10 * (1.0 + frobenius_norm(s)));
    for (std::size_t k = 1; k < n; ++k) CHECK(eig.values[k - 1] <= eig.values[k]);
  }
}

TEST_CASE("psd_sqrt squares back") {
  std::mt19937_64 rng(23);
  const Matrix s = random_psd(rng, 4, 2);
  const Matrix r = psd_sqrt(s);
  CHECK(max_abs_diff(r * r, s) <= 1e-10 * (1.0 + frobenius_norm(s)));
}
