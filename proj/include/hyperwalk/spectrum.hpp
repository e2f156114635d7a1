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

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hyperwalk/error.hpp"
#include "hyperwalk/model.hpp"

namespace hyperwalk {

/// H = Laplacian + diag on {1..n} with Dirichlet boundary: unit off-diagonal,
/// diagonal entries sigma * omega_i.
class FiniteHamiltonian {
 public:
  explicit FiniteHamiltonian(std::vector<double> diag) : diag_(std::move(diag)) {
    if (diag_.empty()) throw Error(ErrorKind::InvalidArgument, "Hamiltonian needs n >= 1");
  }

  static FiniteHamiltonian from_noise(double sigma, std::span<const double> omegas) {
    std::vector<double> d(omegas.begin(), omegas.end());
    for (auto& v : d) v *= sigma;
    return FiniteHamiltonian(std::move(d));
  }

  std::size_t n() const noexcept { return diag_.size(); }
  std::span<const double> diag() const noexcept { return diag_; }

 private:
  std::vector<double> diag_;
};

/// #{eigenvalues < E} by the inertia of H - E = L D L^T.
/// A zero pivot is replaced by a tiny positive value, which is the pivot's
/// limit as the shift approaches E from below, so the count stays strict.
inline std::size_t count_below(const FiniteHamiltonian& h, double E) noexcept {
  constexpr double tiny = 1e-300;
  std::size_t count = 0;
  double d = 1.0;
  bool first = true;
  for (double a : h.diag()) {
    d = first ? (a - E) : (a - E) - 1.0 / d;
    first = false;
    if (d == 0.0) d = tiny;
    if (d < 0.0) ++count;
  }
  return count;
}

/// #{eigenvalues in [lambda0, lambda0 + lambda]}.
inline std::size_t count_in_interval(const FiniteHamiltonian& h, double lambda0, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "interval width must be > 0");
  const double hi = std::nextafter(lambda0 + lambda, std::numeric_limits<double>::infinity());
  return count_below(h, hi) - count_below(h, lambda0);
}

inline constexpr std::size_t kDenseLimit = 2000;

/// All eigenvalues in ascending order from a stock symmetric tridiagonal
/// solver. Intended as a reference for small boxes only.
inline std::vector<double> dense_eigenvalues(const FiniteHamiltonian& h) {
  const std::size_t n = h.n();
  if (n > kDenseLimit) {
    throw Error(ErrorKind::SizeLimit, "dense eigensolver limited to n <= 2000");
  }
  Eigen::VectorXd diag(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) diag[static_cast<Eigen::Index>(i)] = h.diag()[i];
  Eigen::VectorXd sub = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n > 0 ? n - 1 : 0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidArgument, "tridiagonal eigensolver did not converge");
  }
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

}  // namespace hyperwalk
