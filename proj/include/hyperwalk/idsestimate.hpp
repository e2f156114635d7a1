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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "hyperwalk/error.hpp"
#include "hyperwalk/model.hpp"
#include "hyperwalk/parallel.hpp"
#include "hyperwalk/spectrum.hpp"
#include "hyperwalk/stats.hpp"

namespace hyperwalk {

/// Monte Carlo estimate of mu[lambda0, lambda0 + lambda] = E N_n / n over a
/// grid of widths. All widths of one realization share its noise.
struct IdsEstimate {
  double lambda0 = 0.0;
  double sigma = 0.0;
  double c0 = 1.0;
  std::vector<double> lambda_grid;
  std::vector<double> mu_hat;
  std::vector<double> std_error;
  std::size_t n = 0;
  std::size_t reps = 0;
  // counts[r * grid + i]: eigenvalues of realization r in the i-th interval.
  std::vector<std::uint32_t> counts;
};

inline IdsEstimate estimate_ids(const ModelParams& p, const NoiseDistribution& dist,
                                std::span<const double> lambda_grid, std::size_t n, std::size_t reps,
                                std::uint64_t seed, unsigned threads = 1) {
  if (n < 1000) throw Error(ErrorKind::InvalidArgument, "estimate_ids needs n >= 1000");
  if (reps < 10) throw Error(ErrorKind::InvalidArgument, "estimate_ids needs reps >= 10");
  if (lambda_grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty lambda grid");
  for (double l : lambda_grid) {
    if (!(l > 0.0)) throw Error(ErrorKind::InvalidArgument, "interval widths must be > 0");
  }
  const std::size_t g = lambda_grid.size();
  IdsEstimate est;
  est.lambda0 = p.lambda0();
  est.sigma = p.sigma();
  est.c0 = p.c0();
  est.lambda_grid.assign(lambda_grid.begin(), lambda_grid.end());
  est.n = n;
  est.reps = reps;
  est.counts.resize(reps * g);
  parallel_for(reps, threads, [&](std::size_t r) {
    const auto h = FiniteHamiltonian::from_noise(p.sigma(), sample_noise(dist, RngStream(seed, r), n));
    const std::size_t base = count_below(h, p.lambda0());
    for (std::size_t i = 0; i < g; ++i) {
      const double hi = std::nextafter(p.lambda0() + lambda_grid[i], std::numeric_limits<double>::infinity());
      est.counts[r * g + i] = static_cast<std::uint32_t>(count_below(h, hi) - base);
    }
  });
  for (std::size_t i = 0; i < g; ++i) {
    RunningStats st;
    for (std::size_t r = 0; r < reps; ++r) {
      st.add(static_cast<double>(est.counts[r * g + i]) / static_cast<double>(n));
    }
    est.mu_hat.push_back(st.mean());
    est.std_error.push_back(st.stderr_mean());
  }
  return est;
}

/// 1 - 460 c0^3 sigma / gamma_margin.
inline double holder_exponent(const ModelParams& p, double gamma_margin) noexcept {
  return 1.0 - 460.0 * std::pow(p.c0(), 3) * p.sigma() / gamma_margin;
}

/// (2 / sigma^3) lambda^(1 - 460 c0^3 sigma / gamma_margin), valid for
/// lambda0 at distance > gamma_margin from {-2, 0, 2}.
inline double holder_bound(const ModelParams& p, double lambda, double gamma_margin) {
  const double l0 = std::abs(p.lambda0());
  if (!(gamma_margin > 0.0) || !(l0 > gamma_margin && l0 < 2.0 - gamma_margin)) {
    throw Error(ErrorKind::MarginViolated, "lambda0 outside (-2+g,-g) u (g,2-g)");
  }
  if (p.sigma() > 1.0) throw Error(ErrorKind::InvalidArgument, "holder_bound needs sigma <= 1");
  if (!(lambda > 0.0) || lambda > 1.0) throw Error(ErrorKind::InvalidArgument, "need 0 < lambda <= 1");
  if (p.sigma() == 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 / std::pow(p.sigma(), 3) * std::pow(lambda, holder_exponent(p, gamma_margin));
}

struct HolderFit {
  double exponent_hat = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  double regression_stderr = 0.0;
  double jackknife_stderr = 0.0;
  double bound_exponent = 1.0;
  std::vector<std::size_t> admitted;

  double exponent_stderr() const noexcept { return std::max(regression_stderr, jackknife_stderr); }
};

namespace detail {

inline LinearFit loglog_fit(std::span<const double> lambdas, std::span<const double> mus,
                            std::span<const std::size_t> idx) {
  std::vector<double> x, y;
  for (std::size_t i : idx) {
    x.push_back(std::log(lambdas[i]));
    y.push_back(std::log(mus[i]));
  }
  return least_squares(x, y);
}

}  // namespace detail

/// Slope of log mu_hat against log lambda over grid points with
/// mu_hat > 5 stderr. When per-realization counts are present the slope's
/// error is also estimated by leave-one-realization-out jackknife.
inline HolderFit fit_holder_exponent(const IdsEstimate& est, double gamma_margin = 0.5) {
  HolderFit fit;
  const std::size_t g = est.lambda_grid.size();
  for (std::size_t i = 0; i < g; ++i) {
    if (est.mu_hat[i] > 0.0 && est.mu_hat[i] > 5.0 * est.std_error[i]) fit.admitted.push_back(i);
  }
  if (fit.admitted.size() < 3) {
    throw Error(ErrorKind::InsufficientSignal, "fewer than 3 grid points with mu_hat > 5 stderr");
  }
  const LinearFit lf = detail::loglog_fit(est.lambda_grid, est.mu_hat, fit.admitted);
  fit.exponent_hat = lf.slope;
  fit.intercept = lf.intercept;
  fit.rms_residual = lf.rms_residual;
  fit.regression_stderr = lf.slope_stderr;
  fit.bound_exponent = 1.0 - 460.0 * std::pow(est.c0, 3) * est.sigma / gamma_margin;

  const std::size_t R = est.reps;
  if (est.counts.size() == R * g && R > 2) {
    std::vector<double> totals(g, 0.0);
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t i = 0; i < g; ++i) totals[i] += est.counts[r * g + i];
    }
    const double norm = static_cast<double>(est.n) * static_cast<double>(R - 1);
    RunningStats slopes;
    std::vector<double> mus(g);
    for (std::size_t r = 0; r < R; ++r) {
      bool usable = true;
      for (std::size_t i : fit.admitted) {
        mus[i] = (totals[i] - est.counts[r * g + i]) / norm;
        if (!(mus[i] > 0.0)) usable = false;
      }
      if (!usable) continue;
      slopes.add(detail::loglog_fit(est.lambda_grid, mus, fit.admitted).slope);
    }
    const double m = static_cast<double>(slopes.count());
    if (m > 1) fit.jackknife_stderr = std::sqrt((m - 1.0) * (m - 1.0) / m * slopes.variance());
  }
  return fit;
}

/// Global modulus of continuity of the IDS: for each width, the largest
/// fraction of pooled eigenvalues inside any window of that width, over
/// `reps` boxes of size n. Its log-log slope is an upper estimate of the
/// best Holder exponent over all energies.
struct IdsModulus {
  double sigma = 0.0;
  std::vector<double> widths;
  std::vector<double> sup_mass;
  std::size_t n = 0;
  std::size_t reps = 0;
  double exponent_hat = 0.0;
  double exponent_stderr = 0.0;
};

inline IdsModulus estimate_ids_modulus(double sigma, const NoiseDistribution& dist,
                                       std::span<const double> widths, std::size_t n, std::size_t reps,
                                       std::uint64_t seed, unsigned threads = 1) {
  if (widths.size() < 3) throw Error(ErrorKind::InsufficientSignal, "need at least 3 widths");
  if (reps == 0) throw Error(ErrorKind::InvalidArgument, "need reps >= 1");
  for (double w : widths) {
    if (!(w > 0.0)) throw Error(ErrorKind::InvalidArgument, "interval widths must be > 0");
  }
  std::vector<std::vector<double>> per_rep(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    per_rep[r] = dense_eigenvalues(
        FiniteHamiltonian::from_noise(sigma, sample_noise(dist, RngStream(seed, r), n)));
  });
  std::vector<double> all;
  all.reserve(n * reps);
  for (const auto& e : per_rep) all.insert(all.end(), e.begin(), e.end());
  std::sort(all.begin(), all.end());

  IdsModulus out;
  out.sigma = sigma;
  out.widths.assign(widths.begin(), widths.end());
  out.n = n;
  out.reps = reps;
  std::vector<double> lx, ly;
  for (double w : widths) {
    std::size_t lo = 0, best = 0;
    for (std::size_t k = 0; k < all.size(); ++k) {
      while (all[k] - all[lo] > w) ++lo;
      best = std::max(best, k - lo + 1);
    }
    out.sup_mass.push_back(static_cast<double>(best) / static_cast<double>(all.size()));
    lx.push_back(std::log(w));
    ly.push_back(std::log(out.sup_mass.back()));
  }
  const LinearFit f = least_squares(lx, ly);
  out.exponent_hat = f.slope;
  out.exponent_stderr = f.slope_stderr;
  return out;
}

/// 2 log 2 / arccosh(1 + sigma): no Holder exponent above this is possible
/// for Bernoulli noise.
inline double simon_taylor_cap(double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "simon_taylor_cap needs sigma > 0");
  return 2.0 * std::numbers::ln2 / std::acosh(1.0 + sigma);
}

}  // namespace hyperwalk
