/*
 Copyright 2026 The onebit Authors

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
#include <vector>

#include "onebit/numerics.hpp"
#include "onebit/quantized_moments.hpp"

namespace onebit {

struct EstimatedChannel {
  ComplexMatrix H_hat;                 // M x K
  RealVector per_ue_energy_closed_form;  // E[||h_hat_k||^2]
};

/// Bussgang LMMSE channel estimator
///   h_hat_k = sqrt(rho) C_k Pbar_k^T A_p C_rp^{-1} r_p.
///
/// The x-independent factor B_k = C_rp^{-1} A_p Pbar_k^* C_k (M tau x M) is
/// formed once, so h_hat_k = sqrt(rho) B_k^H r_p. Pbar_k = p_k (x) I_M is
/// never materialized: row u M + m of A_p Pbar_k^* C_k is A_{um} P_uk^* [C_k]_{m,:}.
class BlmmseEstimator {
 public:
  explicit BlmmseEstimator(const QuantizedMoments& moments) : rho_(moments.rho()) {
    const auto& sc = moments.scenario();
    const auto& p = moments.book().P();
    const auto m = static_cast<Eigen::Index>(sc.antennas());
    const auto tau = static_cast<Eigen::Index>(moments.tau());
    const RealVector& gain = moments.bussgang_gain();
    energies_.resize(static_cast<Eigen::Index>(sc.users()));
    factors_.reserve(sc.users());
    for (std::size_t k = 0; k < sc.users(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      ComplexMatrix d(m * tau, m);
      for (Eigen::Index u = 0; u < tau; ++u)
        d.middleRows(u * m, m) = (gain.segment(u * m, m).cast<cplx>().asDiagonal() * sc.covariance(k)) *
                                 std::conj(p(u, kk));
      ComplexMatrix b = moments.solve(d);
      energies_(kk) = rho_ * (d.adjoint() * b).trace().real();
      factors_.push_back(std::move(b));
    }
  }

  [[nodiscard]] std::size_t users() const noexcept { return factors_.size(); }
  [[nodiscard]] double rho() const noexcept { return rho_; }

  /// B_k = C_rp^{-1} A_p Pbar_k^* C_k.
  [[nodiscard]] const ComplexMatrix& factor(std::size_t k) const { return factors_.at(k); }

  /// E[||h_hat_k||^2] = rho tr(C_k Pbar_k^T A_p C_rp^{-1} A_p Pbar_k^* C_k).
  [[nodiscard]] const RealVector& energies() const noexcept { return energies_; }

  [[nodiscard]] EstimatedChannel estimate(const ComplexVector& r_p) const {
    if (factors_.empty() || r_p.size() != factors_.front().rows())
      throw DimensionError("BlmmseEstimator::estimate: r_p has wrong length");
    const auto m = factors_.front().cols();
    EstimatedChannel out{ComplexMatrix(m, static_cast<Eigen::Index>(users())), energies_};
    const double scale = std::sqrt(rho_);
    for (std::size_t k = 0; k < users(); ++k)
      out.H_hat.col(static_cast<Eigen::Index>(k)).noalias() = scale * (factors_[k].adjoint() * r_p);
    return out;
  }

 private:
  double rho_;
  std::vector<ComplexMatrix> factors_;
  RealVector energies_;
};

inline EstimatedChannel blmmse_estimate(const BlmmseEstimator& estimator, const ComplexVector& r_p) {
  return estimator.estimate(r_p);
}

inline RealVector estimate_energy(const QuantizedMoments& moments) { return BlmmseEstimator(moments).energies(); }

/// h_hat_k^H h_hat_k' / sqrt(E||h_hat_k||^2 E||h_hat_k'||^2) for one realization.
inline cplx estimate_pairwise_alignment(const ComplexMatrix& h_hat, std::size_t k, std::size_t k_prime,
                                        const RealVector& energies) {
  if (k == k_prime) throw ConfigError("estimate_pairwise_alignment: requires k != k'");
  const auto a = static_cast<Eigen::Index>(k);
  const auto b = static_cast<Eigen::Index>(k_prime);
  if (a >= h_hat.cols() || b >= h_hat.cols()) throw ConfigError("estimate_pairwise_alignment: UE index out of range");
  return h_hat.col(a).dot(h_hat.col(b)) / std::sqrt(energies(a) * energies(b));
}

}  // namespace onebit
