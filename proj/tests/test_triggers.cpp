#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "wcrisk/certificates.hpp"
#include "wcrisk/error.hpp"
#include "wcrisk/triggers.hpp"

using namespace wcrisk;
using namespace wcrisk::testing;

namespace {

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

TEST_CASE("closed loop construction") {
  const auto cl = reference_closed_loop();
  CHECK(cl.closed_loop_norm() == doctest::Approx(kClosedLoopNorm).epsilon(1e-12));
  CHECK(cl.b_norm() == doctest::Approx(std::sqrt(1.25)).epsilon(1e-13));
  // BK is rank one: ‖BK‖ = ‖B‖‖K‖.
  CHECK(cl.bk_norm() == doctest::Approx(std::sqrt(1.25) * std::sqrt(0.53)).epsilon(1e-12));

  const MomentAmbiguitySet sw(plant_sigma_w(), kLevel);
  CHECK(kind_of([&] { ClosedLoopSystem(plant_a(), plant_b(), plant_e(), Matrix(1, 2), sw); }) ==
        ErrorKind::not_contractive);
  CHECK(kind_of([&] { ClosedLoopSystem(plant_a(), plant_b(), plant_e(), Matrix(2, 2), sw); }) ==
        ErrorKind::invalid_input);
  CHECK(kind_of([&] { ClosedLoopSystem(plant_a(), Matrix(3, 1), plant_e(), plant_k(), sw); }) ==
        ErrorKind::invalid_input);
}

TEST_CASE("sigma thresholds at the reference radii") {
  const auto cl = reference_closed_loop();
  CHECK(sigma1_max(cl, 6.0) == doctest::Approx(1.36).epsilon(0.01 / 1.36));
  CHECK(sigma2_max(cl, 6.0) == doctest::Approx(0.99).epsilon(0.01 / 0.99));
  CHECK(sigma1_max(cl, 6.0) == doctest::Approx(kSigma1AtR6).epsilon(1e-12));
  CHECK(sigma2_max(cl, 6.0) == doctest::Approx(kSigma2AtR6).epsilon(1e-12));
  CHECK(sigma3_max(cl, 10.0) == doctest::Approx(kSigma3AtR10).epsilon(1e-12));
  CHECK(sigma4_max(cl, 10.0) == doctest::Approx(kSigma4AtR10).epsilon(1e-12));
  CHECK(sigma4_max(cl, 10.0) == doctest::Approx(1.11).epsilon(0.01 / 1.11));
  for (int c = 1; c <= 4; ++c) {
    const double r = c <= 2 ? 6.0 : 10.0;
    const double direct = c == 1 ? sigma1_max(cl, r)
                          : c == 2 ? sigma2_max(cl, r)
                          : c == 3 ? sigma3_max(cl, r)
                                   : sigma4_max(cl, r);
    CHECK(sigma_max(cl, c, r) == direct);
  }
  CHECK(kind_of([&] { sigma_max(cl, 5, 6.0); }) == ErrorKind::invalid_input);
}

TEST_CASE("sigma thresholds vanish at the boundary radius and are infeasible below it") {
  const auto cl = reference_closed_loop();
  const double r_ub = std::sqrt(cl.autonomous().risk_trace());
  const double r_inv = std::sqrt(cl.autonomous().noise_risk()) / (1.0 - cl.closed_loop_norm());
  CHECK(sigma1_max(cl, r_ub) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(sigma2_max(cl, r_ub) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(sigma3_max(cl, r_inv) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(sigma4_max(cl, r_inv) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  CHECK(kind_of([&] { sigma1_max(cl, 1.0); }) == ErrorKind::infeasible_radius);
  CHECK(kind_of([&] { sigma2_max(cl, 1.0); }) == ErrorKind::infeasible_radius);
  CHECK(kind_of([&] { sigma3_max(cl, 6.0); }) == ErrorKind::infeasible_radius);
  CHECK(kind_of([&] { sigma4_max(cl, 6.0); }) == ErrorKind::infeasible_radius);
  CHECK(kind_of([&] { sigma1_max(cl, 0.0); }) == ErrorKind::invalid_input);
}

TEST_CASE("sigma thresholds are affine in r with the expected slopes") {
  const auto cl = reference_closed_loop();
  const double gap = 1.0 - cl.closed_loop_norm();
  const double dr = 0.75;
  CHECK(sigma1_max(cl, 6.0 + dr) - sigma1_max(cl, 6.0) == doctest::Approx(gap * dr / cl.bk_norm()).epsilon(1e-12));
  CHECK(sigma2_max(cl, 6.0 + dr) - sigma2_max(cl, 6.0) == doctest::Approx(gap * dr / cl.b_norm()).epsilon(1e-12));
  CHECK(sigma3_max(cl, 10.0 + dr) - sigma3_max(cl, 10.0) == doctest::Approx(gap * dr / cl.bk_norm()).epsilon(1e-12));
  CHECK(sigma4_max(cl, 10.0 + dr) - sigma4_max(cl, 10.0) == doctest::Approx(gap * dr / cl.b_norm()).epsilon(1e-12));

  // Channel ratio identities.
  CHECK(sigma1_max(cl, 6.0) / sigma2_max(cl, 6.0) == doctest::Approx(cl.b_norm() / cl.bk_norm()).epsilon(1e-12));
  CHECK(sigma3_max(cl, 10.0) / sigma4_max(cl, 10.0) == doctest::Approx(cl.b_norm() / cl.bk_norm()).epsilon(1e-12));
}

TEST_CASE("unit gain makes sigma1 and sigma2 coincide") {
  // B = I and K = −I, so ‖BK‖ = ‖B‖.
  const Matrix a{{0.2, 0.1}, {0.0, 0.3}};
  const ClosedLoopSystem cl(a, Matrix::identity(2), Matrix::identity(2), Matrix::identity(2) * -1.0,
                            MomentAmbiguitySet(Matrix::identity(2) * 0.01, 0.3));
  CHECK(cl.bk_norm() == doctest::Approx(cl.b_norm()));
  CHECK(sigma1_max(cl, 2.0) == doctest::Approx(sigma2_max(cl, 2.0)).epsilon(1e-12));
  CHECK(sigma3_max(cl, 2.0) == doctest::Approx(sigma4_max(cl, 2.0)).epsilon(1e-12));
}

TEST_CASE("noise-free closed loop") {
  const ClosedLoopSystem cl(plant_a(), plant_b(), plant_e(), plant_k(), MomentAmbiguitySet(Matrix(2, 2), kLevel));
  const double gap = 1.0 - cl.closed_loop_norm();
  CHECK(sigma3_max(cl, 10.0) == doctest::Approx(gap * 10.0 / cl.bk_norm()).epsilon(1e-13));
  CHECK(sigma4_max(cl, 1e-9) <= 1e-8);
  CHECK(sigma4_max(cl, 1e-9) >= 0.0);
}

TEST_CASE("sigma thresholds increase strictly in r and epsilon") {
  const auto cl = reference_closed_loop();
  double prev1 = -1.0, prev3 = -1.0;
  for (double r = 7.0; r < 20.0; r += 0.5) {
    const double s1 = sigma1_max(cl, r), s3 = sigma3_max(cl, r);
    CHECK(s1 > prev1);
    CHECK(s3 > prev3);
    prev1 = s1;
    prev3 = s3;
  }
  prev1 = prev3 = -1.0;
  for (double eps = 0.2; eps < 0.95; eps += 0.05) {
    const auto c = cl.with_level(eps);
    const double s1 = sigma1_max(c, 6.0), s3 = sigma3_max(c, 10.0);
    CHECK(s1 > prev1);
    CHECK(s3 > prev3);
    prev1 = s1;
    prev3 = s3;
  }
}

TEST_CASE("synthesized thresholds are admitted by the robust certificates") {
  std::mt19937_64 rng(41);
  int checked = 0;
  for (int i = 0; i < 300 && checked < 100; ++i) {
    const std::size_t n = 2 + rng() % 3;
    const Matrix acl = random_contractive(rng, n, 0.2 + 0.7 * std::generate_canonical<double, 53>(rng));
    const Matrix b = random_matrix(rng, n, 1 + rng() % 2);
    const Matrix k = random_matrix(rng, b.cols(), n, 0.3);
    const Matrix a = acl - b * k;
    const ClosedLoopSystem cl(a, b, random_matrix(rng, n, n, 0.3), k,
                              MomentAmbiguitySet(random_psd(rng, n, n) * 0.1, 0.3));
    const double r_inv = std::sqrt(cl.autonomous().noise_risk()) / (1.0 - cl.closed_loop_norm());
    const double r = r_inv * (1.0 + 2.0 * std::generate_canonical<double, 53>(rng));
    const double s1 = sigma1_max(cl, r), s2 = sigma2_max(cl, r);
    const double s3 = sigma3_max(cl, r), s4 = sigma4_max(cl, r);
    const double r2 = r * r;
    CHECK(robust_ultimate_bound_certificate(cl.with_state_error(s1), r).margin >= -1e-9 * r2);
    CHECK(robust_ultimate_bound_certificate(cl.with_input_error(s2), r).margin >= -1e-9 * r2);
    CHECK(robust_invariance_certificate(cl.with_state_error(s3), r).margin >= -1e-9 * r2);
    CHECK(robust_invariance_certificate(cl.with_input_error(s4), r).margin >= -1e-9 * r2);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("trigger kinds") {
  CHECK(parse_trigger_kind("state_error_abs") == TriggerKind::state_error_abs);
  CHECK(parse_trigger_kind("input_error_rel") == TriggerKind::input_error_rel);
  CHECK(to_string(TriggerKind::input_error_abs) == "input_error_abs");
  CHECK_THROWS_AS(parse_trigger_kind("bogus"), Error);
  CHECK(corollary_trigger_kind(1) == TriggerKind::state_error_abs);
  CHECK(corollary_trigger_kind(2) == TriggerKind::input_error_abs);
  CHECK(corollary_trigger_kind(3) == TriggerKind::state_error_abs);
  CHECK(corollary_trigger_kind(4) == TriggerKind::input_error_abs);
  CHECK(corollary_trigger_kind(4, true) == TriggerKind::input_error_rel);
}

TEST_CASE("should_trigger examples") {
  const Vector x{1.5, -2.0};
  for (double sigma : {0.0, 0.5, 3.0}) {
    CHECK_FALSE(should_trigger(TriggerPolicy(TriggerKind::state_error_abs, sigma), x, x));
    CHECK_FALSE(should_trigger(TriggerPolicy(TriggerKind::input_error_abs, sigma, plant_k()), x, x));
  }
  // ‖x̂ − x‖ = 1 exactly: no trigger at σ = 1.
  CHECK_FALSE(should_trigger(TriggerPolicy(TriggerKind::state_error_abs, 1.0), Vector{0.0, 0.0}, Vector{0.6, 0.8}));
  CHECK(should_trigger(TriggerPolicy(TriggerKind::state_error_abs, 0.99), Vector{0.0, 0.0}, Vector{0.6, 0.8}));

  // ‖K(1,0)‖ = 0.7 > σ·‖0‖.
  const TriggerPolicy rel(TriggerKind::input_error_rel, 5.0, plant_k());
  CHECK(rel.error_measure(Vector{0.0, 0.0}, Vector{1.0, 0.0}) == doctest::Approx(0.7));
  CHECK(should_trigger(rel, Vector{0.0, 0.0}, Vector{1.0, 0.0}));

  const TriggerPolicy srel(TriggerKind::state_error_rel, 0.5);
  CHECK(srel.threshold(Vector{3.0, 4.0}) == doctest::Approx(2.5));
  CHECK_FALSE(should_trigger(srel, Vector{3.0, 4.0}, Vector{3.0, 6.0}));
  CHECK(should_trigger(srel, Vector{3.0, 4.0}, Vector{3.0, 6.6}));

  CHECK_THROWS_AS(should_trigger(srel, Vector{1.0}, Vector{1.0, 2.0}), Error);
  CHECK_THROWS_AS(TriggerPolicy(TriggerKind::input_error_abs, 1.0), Error);
  CHECK_THROWS_AS(TriggerPolicy(TriggerKind::state_error_abs, -1.0), Error);
}
