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
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>

#include "onebit/numerics.hpp"

namespace onebit {

enum class PilotKind { zadoff_chu, dft, custom };

inline std::string to_string(PilotKind k) {
  switch (k) {
    case PilotKind::zadoff_chu: return "zadoff_chu";
    case PilotKind::dft: return "dft";
    case PilotKind::custom: return "custom";
  }
  return "unknown";
}

class PilotBook;
ComplexMatrix pilot_gram_phi(const PilotBook& book, double rho);

/// Pilot matrix P (tau x K) with unit-modulus entries and mutually
/// orthogonal columns. Phi(rho) is cached per SNR and shared between copies.
class PilotBook {
 public:
  PilotBook(ComplexMatrix p, PilotKind kind) : p_(std::move(p)), kind_(kind) {
    if (p_.cols() == 0 || p_.rows() < p_.cols())
      throw ConfigError("PilotBook: need tau >= K >= 1");
    for (Eigen::Index u = 0; u < p_.rows(); ++u)
      for (Eigen::Index k = 0; k < p_.cols(); ++k)
        if (std::fabs(std::abs(p_(u, k)) - 1.0) > 1e-12) throw ConfigError("PilotBook: entries must have unit modulus");
    const double tau = static_cast<double>(p_.rows());
    const ComplexMatrix gram = p_.adjoint() * p_;
    for (Eigen::Index a = 0; a < gram.rows(); ++a)
      for (Eigen::Index b = 0; b < gram.cols(); ++b)
        if (a != b && std::abs(gram(a, b)) > 1e-9 * tau) throw ConfigError("PilotBook: pilots are not orthogonal");
  }

  [[nodiscard]] const ComplexMatrix& P() const noexcept { return p_; }
  [[nodiscard]] std::size_t tau() const noexcept { return static_cast<std::size_t>(p_.rows()); }
  [[nodiscard]] std::size_t users() const noexcept { return static_cast<std::size_t>(p_.cols()); }
  [[nodiscard]] PilotKind kind() const noexcept { return kind_; }

  /// Cached pilot Gram matrix Phi for the given SNR.
  [[nodiscard]] const ComplexMatrix& phi(double rho) const {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->phi.find(rho);
    if (it == cache_->phi.end()) it = cache_->phi.emplace(rho, pilot_gram_phi(*this, rho)).first;
    return it->second;
  }

 private:
  struct Cache {
    std::mutex mutex;
    std::map<double, ComplexMatrix> phi;
  };
  ComplexMatrix p_;
  PilotKind kind_;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

inline bool is_prime(std::size_t n) {
  if (n < 2) return false;
  for (std::size_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

/// Cyclic shifts of one Zadoff-Chu root sequence
///   z[n] = exp(-j pi root n (n + 1) / tau),
/// UE k (zero-based) using the shift k * floor(tau / K). Distinct shifts of
/// an odd prime-length sequence are orthogonal.
inline PilotBook zadoff_chu_pilots(std::size_t tau, std::size_t users, std::size_t root = 1) {
  if (!is_prime(tau) || tau == 2) throw ConfigError("zadoff_chu_pilots: tau must be an odd prime");
  if (users == 0 || users > tau) throw ConfigError("zadoff_chu_pilots: need 1 <= K <= tau");
  if (root % tau == 0) throw ConfigError("zadoff_chu_pilots: root must be coprime with tau");
  std::vector<cplx> z(tau);
  for (std::size_t n = 0; n < tau; ++n) {
    // n(n+1) is even, so reduce modulo 2 tau before forming the phase.
    const std::size_t q = (root % tau) * ((n * (n + 1)) % (2 * tau)) % (2 * tau);
    z[n] = std::polar(1.0, -std::numbers::pi * static_cast<double>(q) / static_cast<double>(tau));
  }
  const std::size_t step = tau / users;
  ComplexMatrix p(static_cast<Eigen::Index>(tau), static_cast<Eigen::Index>(users));
  for (std::size_t k = 0; k < users; ++k)
    for (std::size_t n = 0; n < tau; ++n)
      p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)) = z[(n + k * step) % tau];
  return PilotBook(std::move(p), PilotKind::zadoff_chu);
}

/// First K columns of the tau-point DFT matrix; P P^H is circulant.
inline PilotBook dft_pilots(std::size_t tau, std::size_t users) {
  if (users == 0 || users > tau) throw ConfigError("dft_pilots: need 1 <= K <= tau");
  ComplexMatrix p(static_cast<Eigen::Index>(tau), static_cast<Eigen::Index>(users));
  for (std::size_t u = 0; u < tau; ++u)
    for (std::size_t k = 0; k < users; ++k)
      p(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(k)) =
          std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((u * k) % tau) / static_cast<double>(tau));
  return PilotBook(std::move(p), PilotKind::dft);
}

/// Phi (tau x tau): unit diagonal, and off the diagonal
///   Omega(rho sum_k Re[P_uk P_vk^*] / (rho K + 1)) - j Omega(rho sum_k Im[P_uk P_vk^*] / (rho K + 1)).
/// For i.i.d. channels C_rp = (rho K + 1) Phi (x) I_M.
inline ComplexMatrix pilot_gram_phi(const PilotBook& book, double rho) {
  if (!(rho > 0.0)) throw ConfigError("pilot_gram_phi: rho must be positive");
  const auto& p = book.P();
  const auto tau = p.rows();
  const double denom = rho * static_cast<double>(p.cols()) + 1.0;
  ComplexMatrix phi(tau, tau);
  for (Eigen::Index u = 0; u < tau; ++u) {
    phi(u, u) = 1.0;
    for (Eigen::Index v = u + 1; v < tau; ++v) {
      const cplx s = (p.row(u).array() * p.row(v).array().conjugate()).sum();
      const cplx c = rho * s / denom;
      phi(u, v) = cplx(arcsine_map(c.real()), -arcsine_map(c.imag()));
      phi(v, u) = std::conj(phi(u, v));
    }
  }
  return phi;
}

/// Normalized p_k^T Phi^{-1} p_{k'}^*: the limit of the estimated-channel
/// alignment under i.i.d. fading. Zero when P P^H is circulant.
inline cplx favorable_propagation_metric(const PilotBook& book, double rho, std::size_t k, std::size_t k_prime) {
  if (k == k_prime) throw ConfigError("favorable_propagation_metric: requires k != k'");
  if (k >= book.users() || k_prime >= book.users()) throw ConfigError("favorable_propagation_metric: UE index out of range");
  const ComplexMatrix& phi = book.phi(rho);
  Eigen::FullPivLU<ComplexMatrix> lu(phi);
  if (!lu.isInvertible()) throw NumericalError("favorable_propagation_metric: Phi is singular");
  const auto& p = book.P();
  const ComplexMatrix solved = lu.solve(ComplexMatrix(p.conjugate()));  // Phi^{-1} P^*
  auto form = [&](std::size_t a, std::size_t b) {
    return (p.col(static_cast<Eigen::Index>(a)).transpose() * solved.col(static_cast<Eigen::Index>(b)))(0, 0);
  };
  const cplx cross = form(k, k_prime);
  const double norm = std::sqrt(std::abs(form(k, k)) * std::abs(form(k_prime, k_prime)));
  return cross / norm;
}

}  // namespace onebit
