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
#include <numbers>
#include <sstream>
#include <utility>

#include "onebit/air_interface.hpp"
#include "onebit/channel_model.hpp"
#include "onebit/numerics.hpp"
#include "onebit/pilots.hpp"

namespace onebit {

/// The scalar map applied to quantized correlation coefficients. Swappable
/// only so that validation can run negative controls.
using ArcsineFn = double (*)(double);

namespace detail {

/// Correlation coefficients may overshoot +-1 by rounding; anything beyond
/// 1e-9 points to a covariance assembly bug.
inline double clamp_correlation(double v, const char* who) {
  if (!(std::fabs(v) <= 1.0 + 1e-9)) {
    std::ostringstream os;
    os << who << ": correlation coefficient " << v << " outside [-1, 1]";
    throw NumericalError(os.str());
  }
  return std::clamp(v, -1.0, 1.0);
}

inline void require_consistent(const ChannelScenario& sc, const PilotBook& book) {
  if (sc.users() != book.users()) throw DimensionError("scenario and pilot book disagree on the number of UEs");
}

}  // namespace detail

/// alpha_m = [rho sum_k C_{h_k} + I]_{m,m}.
inline RealVector pilot_alpha(const ChannelScenario& sc) {
  RealVector alpha = RealVector::Ones(static_cast<Eigen::Index>(sc.antennas()));
  for (std::size_t k = 0; k < sc.users(); ++k) alpha += sc.rho() * sc.covariance(k).diagonal().real();
  return alpha;
}

/// beta_m = [rho sum_k C_{h_k} |x_k|^2 + I]_{m,m}.
inline RealVector data_beta(const ChannelScenario& sc, const ComplexVector& x) {
  RealVector beta = RealVector::Ones(static_cast<Eigen::Index>(sc.antennas()));
  for (std::size_t k = 0; k < sc.users(); ++k)
    beta += sc.rho() * std::norm(x(static_cast<Eigen::Index>(k))) * sc.covariance(k).diagonal().real();
  return beta;
}

/// Diagonal of the pilot Bussgang gain A_p = sqrt(2/pi (rho K + 1)) diag(C_yp)^{-1/2},
/// with diag(C_yp) at index u M + m equal to 1 + rho sum_k [C_k]_{mm} |P_uk|^2.
inline RealVector bussgang_gain_pilot(const ChannelScenario& sc, const PilotBook& book) {
  detail::require_consistent(sc, book);
  const auto m = static_cast<Eigen::Index>(sc.antennas());
  const auto tau = static_cast<Eigen::Index>(book.tau());
  const double gain = std::sqrt(2.0 / std::numbers::pi * sc.quantized_power());
  RealVector a(m * tau);
  for (Eigen::Index u = 0; u < tau; ++u) {
    RealVector diag = RealVector::Ones(m);
    for (std::size_t k = 0; k < sc.users(); ++k)
      diag += sc.rho() * std::norm(book.P()(u, static_cast<Eigen::Index>(k))) * sc.covariance(k).diagonal().real();
    a.segment(u * m, m) = gain * diag.cwiseSqrt().cwiseInverse();
  }
  return a;
}

/// C_rp = E[r_p r_p^H] in closed form: rho K + 1 on the diagonal and
/// (rho K + 1)(Omega(Re zeta) - j Omega(Im zeta)) elsewhere, with
///   zeta_{m,n,u,v} = rho / sqrt(alpha_m alpha_n) [sum_k C_k^T P_uk P_vk^*]_{m,n}.
inline ComplexMatrix pilot_autocovariance(const ChannelScenario& sc, const PilotBook& book,
                                          ArcsineFn omega = &arcsine_map) {
  detail::require_consistent(sc, book);
  const auto m = static_cast<Eigen::Index>(sc.antennas());
  const auto tau = static_cast<Eigen::Index>(book.tau());
  const double power = sc.quantized_power();
  const RealVector inv_sqrt_alpha = pilot_alpha(sc).cwiseSqrt().cwiseInverse();
  const auto& p = book.P();

  ComplexMatrix c(m * tau, m * tau);
  ComplexMatrix s(m, m);
  for (Eigen::Index u = 0; u < tau; ++u) {
    for (Eigen::Index v = u; v < tau; ++v) {
      s.setZero();
      for (std::size_t k = 0; k < sc.users(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        s += (p(u, kk) * std::conj(p(v, kk))) * sc.covariance(k).transpose();
      }
      auto block = c.block(u * m, v * m, m, m);
      for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
          if (u == v && i >= j) continue;  // filled from the upper triangle below
          const cplx zeta = sc.rho() * inv_sqrt_alpha(i) * inv_sqrt_alpha(j) * s(i, j);
          const double re = omega(detail::clamp_correlation(zeta.real(), "pilot_autocovariance"));
          const double im = omega(detail::clamp_correlation(zeta.imag(), "pilot_autocovariance"));
          block(i, j) = power * cplx(re, -im);
        }
      }
      if (u == v) {
        for (Eigen::Index i = 0; i < m; ++i) {
          block(i, i) = power;
          for (Eigen::Index j = 0; j < i; ++j) block(i, j) = std::conj(block(j, i));
        }
      } else {
        c.block(v * m, u * m, m, m) = block.adjoint();
      }
    }
  }
  return c;
}

/// Per-x statistics of the data phase against the pilot phase.
struct DataCrossMoments {
  ComplexVector x;
  RealVector beta;      // length M
  ComplexMatrix C_rrp;  // M x M tau, E[r r_p^H | x]
};

/// C_rrp in closed form: (rho K + 1)(Omega(Re eta) + j Omega(Im eta)) with
///   eta_{m,n,u} = rho / sqrt(alpha_n beta_m) [sum_k C_k x_k P_uk]_{m,n}.
inline DataCrossMoments data_pilot_crosscovariance(const ChannelScenario& sc, const PilotBook& book,
                                                   const ComplexVector& x, ArcsineFn omega = &arcsine_map) {
  detail::require_consistent(sc, book);
  if (static_cast<std::size_t>(x.size()) != sc.users()) throw DimensionError("data_pilot_crosscovariance: x has wrong length");
  const auto m = static_cast<Eigen::Index>(sc.antennas());
  const auto tau = static_cast<Eigen::Index>(book.tau());
  const double power = sc.quantized_power();
  const RealVector inv_sqrt_alpha = pilot_alpha(sc).cwiseSqrt().cwiseInverse();

  DataCrossMoments out{x, data_beta(sc, x), ComplexMatrix(m, m * tau)};
  const RealVector inv_sqrt_beta = out.beta.cwiseSqrt().cwiseInverse();
  const auto& p = book.P();
  ComplexMatrix t(m, m);
  for (Eigen::Index u = 0; u < tau; ++u) {
    t.setZero();
    for (std::size_t k = 0; k < sc.users(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const cplx w = x(kk) * p(u, kk);
      if (w != cplx(0.0)) t += w * sc.covariance(k);
    }
    for (Eigen::Index n = 0; n < m; ++n) {
      for (Eigen::Index i = 0; i < m; ++i) {
        const cplx eta = sc.rho() * inv_sqrt_alpha(n) * inv_sqrt_beta(i) * t(i, n);
        const double re = omega(detail::clamp_correlation(eta.real(), "data_pilot_crosscovariance"));
        const double im = omega(detail::clamp_correlation(eta.imag(), "data_pilot_crosscovariance"));
        out.C_rrp(i, u * m + n) = power * cplx(re, im);
      }
    }
  }
  return out;
}

/// Closed-form second-order statistics of the quantized pilot observation
/// for one (scenario, pilot book) pair, with a cached factorization of C_rp.
class QuantizedMoments {
 public:
  QuantizedMoments(ChannelScenario scenario, PilotBook book, ArcsineFn omega = &arcsine_map)
      : scenario_(std::move(scenario)), book_(std::move(book)), omega_(omega) {
    detail::require_consistent(scenario_, book_);
    alpha_ = pilot_alpha(scenario_);
    gain_ = bussgang_gain_pilot(scenario_, book_);
    c_rp_ = onebit::pilot_autocovariance(scenario_, book_, omega_);
    llt_.compute(c_rp_);
    if (llt_.info() != Eigen::Success) {
      const auto n = c_rp_.rows();
      llt_.compute(c_rp_ + 1e-10 * scenario_.quantized_power() * ComplexMatrix::Identity(n, n));
      ridge_ = true;
      if (llt_.info() != Eigen::Success) throw NumericalError("QuantizedMoments: C_rp is not positive definite");
    }
  }

  [[nodiscard]] const ChannelScenario& scenario() const noexcept { return scenario_; }
  [[nodiscard]] const PilotBook& book() const noexcept { return book_; }
  [[nodiscard]] double rho() const noexcept { return scenario_.rho(); }
  [[nodiscard]] std::size_t antennas() const noexcept { return scenario_.antennas(); }
  [[nodiscard]] std::size_t users() const noexcept { return scenario_.users(); }
  [[nodiscard]] std::size_t tau() const noexcept { return book_.tau(); }
  [[nodiscard]] ArcsineFn omega() const noexcept { return omega_; }

  [[nodiscard]] const RealVector& alpha() const noexcept { return alpha_; }
  /// Diagonal of A_p, length M tau.
  [[nodiscard]] const RealVector& bussgang_gain() const noexcept { return gain_; }
  [[nodiscard]] const ComplexMatrix& pilot_autocovariance() const noexcept { return c_rp_; }
  /// True when C_rp needed the 1e-10 (rho K + 1) ridge to factorize.
  [[nodiscard]] bool ridge_applied() const noexcept { return ridge_; }

  /// C_rp^{-1} rhs through the cached Cholesky factor.
  [[nodiscard]] ComplexMatrix solve(const ComplexMatrix& rhs) const {
    if (rhs.rows() != c_rp_.rows()) throw DimensionError("QuantizedMoments::solve: size mismatch");
    return llt_.solve(rhs);
  }

  [[nodiscard]] DataCrossMoments cross(const ComplexVector& x) const {
    return data_pilot_crosscovariance(scenario_, book_, x, omega_);
  }

 private:
  ChannelScenario scenario_;
  PilotBook book_;
  ArcsineFn omega_;
  RealVector alpha_;
  RealVector gain_;
  ComplexMatrix c_rp_;
  Eigen::LLT<ComplexMatrix> llt_;
  bool ridge_ = false;
};

}  // namespace onebit
