/*
   Copyright 2026 The hyperwalk Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "hyperwalk/prufer.hpp"
#include "hyperwalk/transferwalk.hpp"
#include "oracles.hpp"

using namespace hyperwalk;
using cplx = std::complex<double>;

namespace {

std::vector<double> noise(std::uint64_t seed, std::size_t n, bool uniform = true) {
  return sample_noise(uniform ? NoiseDistribution::uniform() : NoiseDistribution::rademacher(),
                      RngStream(seed, 0), n);
}

}  // namespace

TEST(PruferStep, ZeroCouplingRotatesByZSquared) {
  const auto p = derive_params(0.6, 0.0, 1.0);
  PruferState s = start_prufer(p);
  s.phase = std::polar(1.0, 0.3);
  const auto t = prufer_step(s, 1.0, p);
  EXPECT_EQ(t.log_r, s.log_r);
  EXPECT_NEAR(std::abs(t.phase - s.phase * p.z() * p.z()), 0.0, 1e-15);
  EXPECT_EQ(t.k, 1u);
}

TEST(PruferStep, HandEvaluatedIncrement) {
  const auto p = derive_params(1e-300, 0.1, 1.0);
  PruferState s;
  s.log_r = 0.0;
  s.phase = 1.0;
  EXPECT_NEAR(prufer_step(s, 1.0, p).log_r, std::log(1.01), 1e-15);
}

TEST(PruferStep, MatchesExplicitAngleRecursion) {
  for (double l0 : {-1.2, 0.5, 1.0, std::numbers::sqrt2}) {
    const auto p = derive_params(l0, 0.02, std::numbers::sqrt3);
    const auto om = noise(1, 2000);
    PruferState s = start_prufer(p);
    oracle::AngleState a{s.log_r, 0.0};
    for (double w : om) {
      s = prufer_step(s, w, p);
      a = oracle::angle_step(a, w, p.sigma(), p.theta());
      ASSERT_NEAR(s.log_r, a.log_r, 1e-10);
      ASSERT_NEAR(std::abs(s.phase - std::polar(1.0, a.two_alpha)), 0.0, 1e-10);
    }
  }
}

TEST(PruferStep, PhaseStaysOnUnitCircle) {
  const auto p = derive_params(1.0, 0.05, 1.0);
  const auto traj = prufer_trajectory(p, noise(2, 100000, false));
  for (const auto& s : traj) ASSERT_NEAR(std::abs(s.phase), 1.0, 1e-12);
}

TEST(PruferStep, DenominatorBoundedBelowInSmallCouplingRegime) {
  for (double l0 : {-1.5, 0.3, 1.0, 1.8}) {
    const auto probe = derive_params(l0, 0.0, std::numbers::sqrt3);
    const double sigma = 0.1 / (probe.rho() * std::numbers::sqrt3);  // sigma rho c0 = 1/10
    const auto p = derive_params(l0, sigma, std::numbers::sqrt3);
    const auto traj = prufer_trajectory(p, noise(3, 20000));
    EXPECT_GE(traj.back().min_denominator, 0.8);
  }
}

TEST(PruferStep, NearlySingularDenominatorIsRejected) {
  // sigma omega rho = 20 and z^2 e^{2 i alpha} = e^{i phi} with sin phi = -1/20.
  const auto p = derive_params(std::sqrt(3.0), 20.0, 1.0);
  ASSERT_NEAR(p.rho(), 1.0, 1e-12);
  PruferState s;
  s.phase = std::polar(1.0, std::asin(-0.05)) / (p.z() * p.z());
  try {
    prufer_step(s, 1.0, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DenominatorNearZero);
  }
}

TEST(PruferStep, PreimageInvertsPhaseMap) {
  const auto p = derive_params(0.7, 0.03, 1.0);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi), w(-1.7, 1.7);
  for (int t = 0; t < 1000; ++t) {
    const cplx q = std::polar(1.0, ang(gen));
    const double omega = w(gen);
    const cplx back = prufer_phase_preimage(prufer_phase_map(q, omega, p), omega, p);
    ASSERT_NEAR(std::abs(back - q), 0.0, 1e-13);
  }
}

// Radius of the phase recursion is the reciprocal of the walk's height.
TEST(CrossModule, RadiusIsReciprocalHeight) {
  for (double l0 : {1.0, std::numbers::sqrt2}) {
    for (double sigma : {0.003, 0.05}) {
      const auto p = derive_params(l0, sigma, 1.0);
      NoiseSource src(NoiseDistribution::rademacher(), RngStream(5, 0));
      WalkState w = start_walk(p);
      PruferState s = start_prufer(p);
      ASSERT_NEAR(s.log_r + w.log_y, 0.0, 1e-15);
      for (int k = 0; k < 200000; ++k) {
        const double omega = src.next();
        w = advance_walk(w, omega, p);
        s = prufer_step(s, walk_to_prufer_drive(omega), p);
        ASSERT_NEAR(std::expm1(s.log_r + w.log_y), 0.0, 1e-8) << l0 << " " << sigma << " " << k;
      }
    }
  }
}

TEST(CuteTrick, Examples) {
  const auto id = verify_cutetrick(Mat2::identity());
  EXPECT_DOUBLE_EQ(id.lhs, 1.0);
  EXPECT_DOUBLE_EQ(id.rhs, 1.0);
  const auto diag = verify_cutetrick({2.0, 0.0, 0.0, 0.5});
  EXPECT_DOUBLE_EQ(diag.lhs, 0.25);
  EXPECT_DOUBLE_EQ(diag.rhs, 0.25);
  EXPECT_THROW(verify_cutetrick({2.0, 0.0, 0.0, 1.0}), Error);
}

TEST(CuteTrick, RandomUnimodular) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 10000; ++t) {
    const double a = u(gen), b = u(gen), c = u(gen);
    if (std::abs(a) < 0.1) continue;
    const Mat2 m{a, b, c, (1.0 + b * c) / a};
    const auto r = verify_cutetrick(m);
    ASSERT_NEAR(r.lhs, r.rhs, 1e-12 * (1.0 + std::abs(r.lhs)));
  }
}

TEST(Correction, HandValueAtQuarterTurn) {
  const auto p = derive_params(1e-300, 0.0, 1.0);
  EXPECT_NEAR(correction_F(1.0, std::polar(1.0, std::numbers::pi / 2), p), 0.25, 1e-15);
}

// On a free trajectory q_{j+1} = z^2 q_j the closed forms equal the plain sums
// -2 rho^2 sum_j cos(2 alpha_j + 2 theta) and -2 rho^2 sum_j cos(4 alpha_j + 4 theta).
TEST(Correction, TelescopesOnFreeTrajectories) {
  for (double l0 : {-1.4, -0.3, 0.8, 1.0, 1.7}) {
    const auto p = derive_params(l0, 0.0, 1.0);
    const cplx z2 = p.z() * p.z();
    std::vector<cplx> phases{std::polar(1.0, 0.4)};
    double f = 0.0, g = 0.0;
    const double c = -2.0 * p.rho() * p.rho();
    for (int k = 1; k <= 60; ++k) {
      const cplx q = phases.back();
      f += c * (z2 * q).real();
      g += c * (z2 * z2 * q * q).real();
      const auto cs = correction_sums(phases, p);
      ASSERT_NEAR(cs.F, f, 1e-12) << l0 << " " << k;
      ASSERT_NEAR(cs.G, g, 1e-10) << l0 << " " << k;
      phases.push_back(q * z2);
    }
  }
  EXPECT_THROW(correction_sums(std::span<const cplx>{}, derive_params(1.0, 0.0, 1.0)), Error);
}

TEST(Correction, BoundsAlongRandomTrajectories) {
  for (double l0 : {-1.0, 0.5, 1.0, 1.5}) {
    const auto p = derive_params(l0, 0.01, 1.0);
    const auto traj = prufer_trajectory(p, noise(7, 5000, false));
    const double rho = p.rho();
    const double fb = 4.0 * rho * rho * rho, gb = 2.0 * rho * rho / std::abs(p.sin_2theta());
    const cplx anchor = traj.front().phase;
    double prev_f = correction_F(anchor, anchor, p), prev_g = correction_G(anchor, anchor, p);
    for (const auto& s : traj) {
      const double f = correction_F(anchor, s.phase, p), g = correction_G(anchor, s.phase, p);
      ASSERT_LE(std::abs(f), fb * (1 + 1e-12));
      ASSERT_LE(std::abs(g), gb * (1 + 1e-12));
      ASSERT_LE(std::abs(f - prev_f), fb * (1 + 1e-12));
      ASSERT_LE(std::abs(g - prev_g), gb * (1 + 1e-12));
      prev_f = f;
      prev_g = g;
    }
  }
}

TEST(Drift, TwiceTheLyapunovExponent) {
  const auto p = derive_params(1.0, 0.1, 1.0);
  const auto dist = NoiseDistribution::rademacher();
  const std::size_t n = 100000, reps = 8;
  const auto gam = lyapunov_estimate(p, dist, n, reps, 9);
  const auto dr = prufer_drift_estimate(p, dist, n, reps, 9);
  const double joint = std::sqrt(dr.std_error * dr.std_error + 4.0 * gam.std_error * gam.std_error);
  EXPECT_LE(std::abs(dr.drift - 2.0 * gam.gamma_hat), 3.0 * joint + 10.0 / n);
  EXPECT_THROW(prufer_drift_estimate(p, dist, 0, 2, 1), Error);
}
