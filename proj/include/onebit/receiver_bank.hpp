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
#include <string>

#include "onebit/air_interface.hpp"
#include "onebit/numerics.hpp"
#include "onebit/symbol_statistics.hpp"

namespace onebit {

enum class CsiMode { estimated, perfect };

inline std::string to_string(CsiMode m) { return m == CsiMode::perfect ? "perfect" : "estimated"; }

inline CsiMode parse_csi_mode(const std::string& s) {
  if (s == "estimated") return CsiMode::estimated;
  if (s == "perfect") return CsiMode::perfect;
  throw ConfigError("unknown csi_mode '" + s + "'");
}

struct Receiver {
  ReceiverKind kind;
  ComplexMatrix V;  // M x K
  CsiMode csi = CsiMode::estimated;
};

/// MRC: V = H. ZF: V = H (H^H H)^{-1}. MMSE: V = (rho H H^H + I)^{-1} H,
/// evaluated as H (rho H^H H + I_K)^{-1}.
inline Receiver conventional_receiver(const ComplexMatrix& h, double rho, ReceiverKind kind,
                                      CsiMode csi = CsiMode::estimated) {
  const auto users = h.cols();
  switch (kind) {
    case ReceiverKind::mrc:
      return {kind, h, csi};
    case ReceiverKind::zf: {
      if (h.rows() < users) throw NumericalError("ZF receiver: fewer antennas than UEs");
      Eigen::JacobiSVD<ComplexMatrix> svd(h);
      const auto& s = svd.singularValues();
      if (s.size() == 0 || s(s.size() - 1) <= 1e-12 * s(0))
        throw NumericalError("ZF receiver: channel matrix is rank deficient");
      const ComplexMatrix gram = h.adjoint() * h;
      return {kind, h * gram.ldlt().solve(ComplexMatrix::Identity(users, users)), csi};
    }
    case ReceiverKind::mmse: {
      const ComplexMatrix a = rho * (h.adjoint() * h) + ComplexMatrix::Identity(users, users);
      // a is Hermitian positive definite; V = H a^{-1} = (a^{-1} H^H)^H.
      return {kind, a.llt().solve(h.adjoint()).adjoint(), csi};
    }
    case ReceiverKind::lmmd:
      break;
  }
  throw ConfigError("conventional_receiver: LMMD needs lmmd_receiver");
}

namespace detail {

/// zeta = sqrt(rho) H x and Phi(zeta) componentwise.
struct ConditionalTerms {
  ComplexVector zeta;
  ComplexVector phi;
};

inline ConditionalTerms conditional_terms(const ComplexMatrix& h, const ComplexVector& x, double rho) {
  if (h.cols() != x.size()) throw DimensionError("conditional statistics: H and x disagree");
  ConditionalTerms t{std::sqrt(rho) * (h * x), ComplexVector()};
  t.phi = t.zeta.unaryExpr([](const cplx& z) { return erf_map(z); });
  return t;
}

/// (exp(-Re^2 zeta) + exp(-Im^2 zeta)) / sqrt(pi): the extra diagonal term
/// of E[y r^H | x].
inline RealVector diagonal_kappa(const ComplexVector& zeta) {
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  return zeta.unaryExpr([inv_sqrt_pi](const cplx& z) {
                 return cplx(inv_sqrt_pi * (std::exp(-z.real() * z.real()) + std::exp(-z.imag() * z.imag())), 0.0);
               })
      .real();
}

}  // namespace detail

/// E[y r^H | x] = s (zeta Phi(zeta)^H + diag(kappa)), s = sqrt((rho K + 1)/2).
///
/// Entry (n, m) expands to the four real moments E[Re y_n sgn(Re y_m)] etc.;
/// on the diagonal the real part is Re[zeta_m conj(Phi(zeta_m))] + kappa_m.
inline ComplexMatrix conditional_yr_covariance(const ComplexMatrix& h_eff, const ComplexVector& x, double rho,
                                               std::size_t users) {
  const auto t = detail::conditional_terms(h_eff, x, rho);
  const double s = quantizer_scale(rho, users);
  ComplexMatrix c = s * (t.zeta * t.phi.adjoint());
  c.diagonal() += s * detail::diagonal_kappa(t.zeta).cast<cplx>();
  return c;
}

/// C_{y|x} = rho H x x^H H^H + I_M.
inline ComplexMatrix conditional_y_covariance(const ComplexMatrix& h_eff, const ComplexVector& x, double rho) {
  const ComplexVector w = std::sqrt(rho) * (h_eff * x);
  return w * w.adjoint() + ComplexMatrix::Identity(w.size(), w.size());
}

/// G(x) = C_{yr|x}^H C_{y|x}^{-1}, with
/// (I + rho w w^H)^{-1} = I - rho w w^H / (1 + rho ||w||^2), w = H x.
inline ComplexMatrix conditional_bussgang_gain(const ComplexMatrix& h_eff, const ComplexVector& x, double rho,
                                               std::size_t users) {
  const ComplexVector w = h_eff * x;
  const ComplexMatrix cyr = conditional_yr_covariance(h_eff, x, rho, users);
  const double denom = 1.0 + rho * w.squaredNorm();
  const ComplexVector cyr_h_w = cyr.adjoint() * w;
  return cyr.adjoint() - (rho / denom) * (cyr_h_w * w.adjoint());
}

/// E[r r^H | x]: rho K + 1 on the diagonal, ((rho K + 1)/2) Phi(zeta_n) conj(Phi(zeta_m)) elsewhere.
inline ComplexMatrix conditional_quantized_covariance(const ComplexMatrix& h_eff, const ComplexVector& x, double rho,
                                                      std::size_t users) {
  const auto t = detail::conditional_terms(h_eff, x, rho);
  const double power = rho * static_cast<double>(users) + 1.0;
  ComplexMatrix c = (0.5 * power) * (t.phi * t.phi.adjoint());
  c.diagonal().setConstant(cplx(power, 0.0));
  return c;
}

/// The pieces of the LMMD normal equation C_r V = RHS.
struct LmmdPrecomputation {
  ComplexMatrix C_r;       // E_x[C_{r|x}]
  ComplexMatrix C_r_pinv;
  ComplexMatrix rhs;       // (sqrt(rho) / L^K) sum_x G(x) H x e(x)^H
};

/// Builds C_r and the right-hand side over every x in S^K.
///
/// With w = H x and zeta = sqrt(rho) w the gain acts as
///   G(x) w = s (sqrt(rho) ||w||^2 Phi(zeta) + kappa .* w) / (1 + rho ||w||^2),
/// so each x costs O(M K). The sums over x become two GEMMs:
/// C_r = s^2 F F^H / L^K (diagonal reset to rho K + 1) with F = [Phi(zeta_x)],
/// and RHS = U E^H with U = [G(x) H x] and E the MRC table.
inline LmmdPrecomputation lmmd_precompute(const ComplexMatrix& h_eff, const ExpectationTable& table, double rho) {
  if (table.kind() != ReceiverKind::mrc) throw ConfigError("lmmd_receiver: needs the MRC expectation table");
  if (static_cast<std::size_t>(h_eff.cols()) != table.users())
    throw DimensionError("lmmd_receiver: channel and table disagree on K");
  const auto m = h_eff.rows();
  const auto count = static_cast<Eigen::Index>(table.size());
  const std::size_t users = table.users();
  const double s = quantizer_scale(rho, users);
  const double sqrt_rho = std::sqrt(rho);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);

  // Columns of X are the symbol vectors in table order.
  ComplexMatrix xs(static_cast<Eigen::Index>(users), count);
  for (Eigen::Index n = 0; n < count; ++n) xs.col(n) = table.symbol_vector(static_cast<std::size_t>(n));
  const ComplexMatrix w_all = h_eff * xs;  // M x L^K

  ComplexMatrix f(m, count);
  ComplexMatrix u(m, count);
  for (Eigen::Index n = 0; n < count; ++n) {
    const double w2 = w_all.col(n).squaredNorm();
    const double denom = 1.0 + rho * w2;
    for (Eigen::Index i = 0; i < m; ++i) {
      const cplx w = w_all(i, n);
      const cplx z = sqrt_rho * w;
      const cplx phi = erf_map(z);
      const double kappa = inv_sqrt_pi * (std::exp(-z.real() * z.real()) + std::exp(-z.imag() * z.imag()));
      f(i, n) = phi;
      u(i, n) = s * (sqrt_rho * w2 * phi + kappa * w) / denom;
    }
  }

  LmmdPrecomputation out;
  const double inv_count = 1.0 / static_cast<double>(count);
  out.C_r.noalias() = (s * s * inv_count) * (f * f.adjoint());
  out.C_r.diagonal().setConstant(cplx(rho * static_cast<double>(users) + 1.0, 0.0));
  out.rhs.noalias() = (sqrt_rho * inv_count) * (u * table.entries().conjugate());
  out.C_r_pinv = pseudo_inverse(out.C_r);
  return out;
}

/// V = C_r^+ RHS.
inline Receiver lmmd_receiver(const LmmdPrecomputation& pre, CsiMode csi = CsiMode::estimated) {
  return {ReceiverKind::lmmd, pre.C_r_pinv * pre.rhs, csi};
}

inline Receiver lmmd_receiver(const ComplexMatrix& h_eff, const ExpectationTable& table, double rho,
                              CsiMode csi = CsiMode::estimated) {
  return lmmd_receiver(lmmd_precompute(h_eff, table, rho), csi);
}

/// x_hat = V^H r.
inline ComplexVector combine(const Receiver& receiver, const ComplexVector& r) {
  if (receiver.V.rows() != r.size()) throw DimensionError("combine: V and r disagree");
  return receiver.V.adjoint() * r;
}

}  // namespace onebit
