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
#include <vector>

#include "onebit/numerics.hpp"
#include "onebit/rng.hpp"

namespace onebit {

/// One-ring spatial covariance of a uniform linear array.
///
/// Scatterers sit on a ring seen from the array under a uniform angular
/// window of half-width spread/2 around the UE azimuth, so
///   [C]_{m,n} = 1/(2D) int_{-D}^{D} exp(j 2 pi s (m - n) sin(phi + d)) dd
/// with s the element spacing in wavelengths. The integral is evaluated by
/// Gauss-Legendre quadrature; the result is Toeplitz with unit diagonal,
/// hence trace M.
inline ComplexMatrix one_ring_covariance(std::size_t antennas, double azimuth_deg, double spread_deg,
                                         double spacing_wavelengths = 0.5) {
  if (antennas == 0) throw ConfigError("one_ring_covariance: need at least one antenna");
  if (!(spread_deg > 0.0 && spread_deg < 180.0))
    throw ConfigError("one_ring_covariance: angular spread must lie in (0, 180) degrees");
  if (!(spacing_wavelengths > 0.0)) throw ConfigError("one_ring_covariance: spacing must be positive");

  constexpr double kDeg = std::numbers::pi / 180.0;
  const double half_width = 0.5 * spread_deg * kDeg;
  const double azimuth = azimuth_deg * kDeg;
  const auto rule = gauss_legendre(std::max<std::size_t>(64, 4 * antennas));

  std::vector<double> phase_rate(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    phase_rate[i] = 2.0 * std::numbers::pi * spacing_wavelengths * std::sin(azimuth + half_width * rule.nodes[i]);

  const auto m = static_cast<Eigen::Index>(antennas);
  std::vector<cplx> lag(antennas);
  lag[0] = 1.0;
  for (std::size_t d = 1; d < antennas; ++d) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      acc += 0.5 * rule.weights[i] * std::polar(1.0, phase_rate[i] * static_cast<double>(d));
    lag[d] = acc;
  }
  ComplexMatrix c(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index s = 0; s < m; ++s)
      c(r, s) = r >= s ? lag[static_cast<std::size_t>(r - s)] : std::conj(lag[static_cast<std::size_t>(s - r)]);
  const double trace = c.trace().real();
  return c * (static_cast<double>(antennas) / trace);
}

struct ScenarioParams {
  std::size_t antennas = 128;
  std::size_t users = 2;
  double rho = 1.0;  // linear SNR
  double azimuth0_deg = -45.0;
  double separation_deg = 30.0;
  double spread_deg = 30.0;
  double spacing_wavelengths = 0.5;
  bool iid = false;  // C_{h_k} = I_M for every UE
};

/// Statistical description of the uplink: per-UE covariances, their
/// principal square roots, and the SNR shared by pilot and data phases.
class ChannelScenario {
 public:
  ChannelScenario(double rho, std::vector<ComplexMatrix> covariances, bool iid = false)
      : rho_(rho), iid_(iid), covariances_(std::move(covariances)) {
    if (covariances_.empty()) throw ConfigError("ChannelScenario: need at least one UE");
    if (!(rho_ > 0.0) || !std::isfinite(rho_)) throw ConfigError("ChannelScenario: rho must be positive");
    antennas_ = static_cast<std::size_t>(covariances_.front().rows());
    if (antennas_ == 0) throw ConfigError("ChannelScenario: need at least one antenna");
    sqrt_covariances_.reserve(covariances_.size());
    for (std::size_t k = 0; k < covariances_.size(); ++k) {
      const auto& c = covariances_[k];
      if (c.rows() != static_cast<Eigen::Index>(antennas_) || c.cols() != c.rows())
        throw DimensionError("ChannelScenario: covariance sizes disagree");
      const double trace = c.trace().real();
      if (std::fabs(trace - static_cast<double>(antennas_)) > 1e-8 * static_cast<double>(antennas_)) {
        std::ostringstream os;
        os << "ChannelScenario: covariance of UE " << k << " has trace " << trace << ", expected "
           << antennas_;
        throw ConfigError(os.str());
      }
      sqrt_covariances_.push_back(hermitian_sqrt(c));
    }
  }

  [[nodiscard]] std::size_t antennas() const noexcept { return antennas_; }
  [[nodiscard]] std::size_t users() const noexcept { return covariances_.size(); }
  [[nodiscard]] double rho() const noexcept { return rho_; }
  [[nodiscard]] bool iid() const noexcept { return iid_; }
  /// rho K + 1, the per-entry power of every quantized sample.
  [[nodiscard]] double quantized_power() const noexcept {
    return rho_ * static_cast<double>(users()) + 1.0;
  }
  [[nodiscard]] const ComplexMatrix& covariance(std::size_t k) const { return covariances_.at(k); }
  [[nodiscard]] const ComplexMatrix& sqrt_covariance(std::size_t k) const { return sqrt_covariances_.at(k); }
  [[nodiscard]] const std::vector<ComplexMatrix>& covariances() const noexcept { return covariances_; }

  [[nodiscard]] ChannelScenario with_rho(double rho) const {
    ChannelScenario copy = *this;
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("ChannelScenario: rho must be positive");
    copy.rho_ = rho;
    return copy;
  }

 private:
  double rho_;
  bool iid_;
  std::size_t antennas_ = 0;
  std::vector<ComplexMatrix> covariances_;
  std::vector<ComplexMatrix> sqrt_covariances_;
};

/// UE k (zero-based) sits at azimuth0 + k * separation.
inline ChannelScenario build_scenario(const ScenarioParams& p) {
  if (p.users == 0 || p.antennas == 0) throw ConfigError("build_scenario: need M >= 1 and K >= 1");
  std::vector<ComplexMatrix> covs;
  covs.reserve(p.users);
  const auto m = static_cast<Eigen::Index>(p.antennas);
  for (std::size_t k = 0; k < p.users; ++k) {
    if (p.iid) {
      covs.push_back(ComplexMatrix::Identity(m, m));
    } else {
      covs.push_back(one_ring_covariance(p.antennas, p.azimuth0_deg + static_cast<double>(k) * p.separation_deg,
                                         p.spread_deg, p.spacing_wavelengths));
    }
  }
  return ChannelScenario(p.rho, std::move(covs), p.iid);
}

struct ChannelRealization {
  ComplexMatrix H;  // M x K, column k is h_k
};

/// h_k = C_{h_k}^{1/2} g_k with g_k ~ CN(0, I). UE k draws from substream k
/// of the given stream.
inline ChannelRealization sample_channel(const ChannelScenario& sc, const Rng& rng) {
  const auto m = static_cast<Eigen::Index>(sc.antennas());
  const auto users = static_cast<Eigen::Index>(sc.users());
  ChannelRealization out{ComplexMatrix(m, users)};
  ComplexVector g(m);
  for (Eigen::Index k = 0; k < users; ++k) {
    Rng ue = rng.substream(static_cast<std::uint64_t>(k));
    for (Eigen::Index i = 0; i < m; ++i) g(i) = ue.complex_gaussian();
    if (sc.iid())
      out.H.col(k) = g;
    else
      out.H.col(k).noalias() = sc.sqrt_covariance(static_cast<std::size_t>(k)) * g;
  }
  return out;
}

}  // namespace onebit
