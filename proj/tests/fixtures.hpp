#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "wcrisk/linalg.hpp"
#include "wcrisk/risk.hpp"
#include "wcrisk/triggers.hpp"

namespace wcrisk::testing {

// Two-state reference plant used throughout the regression tests.
inline Matrix plant_a() { return Matrix{{1.2, 0.3}, {0.0, 0.5}}; }
inline Matrix plant_b() { return Matrix{{1.0}, {0.5}}; }
inline Matrix plant_e() { return Matrix{{1.0, 2.0}, {0.5, -0.5}}; }
inline Matrix plant_k() { return Matrix{{-0.7, -0.2}}; }
inline Matrix plant_sigma_w() { return Matrix{{0.5, 0.0}, {0.0, 0.25}}; }
inline Vector plant_x0() { return {2.0, 3.0}; }
inline constexpr double kLevel = 0.3;

inline ClosedLoopSystem reference_closed_loop(double level = kLevel) {
  return {plant_a(), plant_b(), plant_e(), plant_k(), MomentAmbiguitySet(plant_sigma_w(), level)};
}

// Values computed offline with numpy/scipy (scipy.linalg.solve_discrete_lyapunov,
// numpy.linalg.norm(·, 2)); independent of this library.
inline constexpr double kClosedLoopNorm = 0.6377444151158153;
inline constexpr double kUltimateRadius = 2.940055671782021;    // √(Tr(P)/ε)
inline constexpr double kInvarianceRadius = 6.547057779342543;  // √(Tr(Σ_wEᵀE)/ε)/(1−‖A+BK‖)
inline constexpr double kSigma1AtR6 = 1.3618700639740846;
inline constexpr double kSigma2AtR6 = 0.9914563720652825;
inline constexpr double kSigma3AtR10 = 1.5367791497318395;
inline constexpr double kSigma4AtR10 = 1.118792108560287;

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                            double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(rows, cols);
  for (auto& x : m.data()) x = dist(rng);
  return m;
}

// Random a with ‖a‖ = target (spectral norm computed through the library's
// singular values, then rescaled).
inline Matrix random_contractive(std::mt19937_64& rng, std::size_t n, double target) {
  Matrix a = random_matrix(rng, n, n);
  return a * (target / singular_values(a).front());
}

inline Matrix random_psd(std::mt19937_64& rng, std::size_t n, std::size_t rank) {
  const Matrix g = random_matrix(rng, n, rank);
  return g * g.transpose();
}

// Truncated Σ_{k<terms} a^k q (aᵀ)^k.
inline Matrix lyapunov_series(const Matrix& a, const Matrix& q, unsigned terms) {
  Matrix sum(q.rows(), q.cols());
  Matrix term = q;
  for (unsigned k = 0; k < terms; ++k) {
    sum += term;
    term = a * term * a.transpose();
  }
  return sum;
}

inline double max_abs_diff(const Matrix& x, const Matrix& y) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.data().size(); ++i) {
    m = std::max(m, std::abs(x.data()[i] - y.data()[i]));
  }
  return m;
}

}  // namespace wcrisk::testing
