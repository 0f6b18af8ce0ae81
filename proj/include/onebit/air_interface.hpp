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
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "onebit/channel_model.hpp"
#include "onebit/numerics.hpp"
#include "onebit/pilots.hpp"
#include "onebit/rng.hpp"

namespace onebit {

/// Ordered transmit alphabet with unit average power. The symbol index is
/// the contract every detector reports in.
class Constellation {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  Constellation(std::vector<cplx> symbols, std::string label)
      : symbols_(std::move(symbols)), label_(std::move(label)) {
    if (symbols_.empty()) throw ConfigError("Constellation: empty alphabet");
    double power = 0.0;
    for (const auto& s : symbols_) power += std::norm(s);
    power /= static_cast<double>(symbols_.size());
    if (std::fabs(power - 1.0) > 1e-12) throw ConfigError("Constellation: average power must be 1");
    for (std::size_t a = 0; a < symbols_.size(); ++a)
      for (std::size_t b = a + 1; b < symbols_.size(); ++b)
        if (std::abs(symbols_[a] - symbols_[b]) < 1e-12) throw ConfigError("Constellation: duplicate symbol");
    rotation_ = permutation([](cplx s) { return kJ * s; });
    negation_ = permutation([](cplx s) { return -s; });
  }

  [[nodiscard]] std::size_t size() const noexcept { return symbols_.size(); }
  [[nodiscard]] const cplx& operator[](std::size_t l) const { return symbols_[l]; }
  [[nodiscard]] const std::vector<cplx>& symbols() const noexcept { return symbols_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }

  /// Index of j * s_l for every l, or empty when the alphabet is not
  /// closed under 90-degree rotation.
  [[nodiscard]] const std::vector<std::size_t>& rotation_permutation() const noexcept { return rotation_; }
  /// Index of -s_l for every l, or empty when not closed under negation.
  [[nodiscard]] const std::vector<std::size_t>& negation_permutation() const noexcept { return negation_; }

  [[nodiscard]] std::size_t find(cplx s, double tol = 1e-9) const {
    for (std::size_t l = 0; l < symbols_.size(); ++l)
      if (std::abs(symbols_[l] - s) <= tol) return l;
    return npos;
  }

 private:
  template <typename Map>
  std::vector<std::size_t> permutation(Map f) const {
    std::vector<std::size_t> perm(symbols_.size());
    for (std::size_t l = 0; l < symbols_.size(); ++l) {
      perm[l] = find(f(symbols_[l]));
      if (perm[l] == npos) return {};
    }
    return perm;
  }

  std::vector<cplx> symbols_;
  std::string label_;
  std::vector<std::size_t> rotation_;
  std::vector<std::size_t> negation_;
};

/// 16-QAM scaled by 1/sqrt(10). Index l = 4 a + b with real part level a
/// and imaginary part level b over {-3, -1, 1, 3}; index 0 is (-3 - 3j)/sqrt(10).
inline Constellation qam16() {
  constexpr double levels[] = {-3.0, -1.0, 1.0, 3.0};
  const double scale = 1.0 / std::sqrt(10.0);
  std::vector<cplx> s;
  s.reserve(16);
  for (double re : levels)
    for (double im : levels) s.emplace_back(re * scale, im * scale);
  return Constellation(std::move(s), "qam16");
}

inline Constellation qpsk() {
  const double a = 1.0 / std::sqrt(2.0);
  return Constellation({{-a, -a}, {-a, a}, {a, -a}, {a, a}}, "qpsk");
}

/// Real antipodal alphabet; used for small-scale oracle checks.
inline Constellation bpsk() { return Constellation({{-1.0, 0.0}, {1.0, 0.0}}, "bpsk"); }

inline Constellation constellation_by_label(const std::string& label) {
  if (label == "qam16") return qam16();
  if (label == "qpsk") return qpsk();
  if (label == "bpsk") return bpsk();
  throw ConfigError("unknown constellation '" + label + "'");
}

/// sqrt((rho K + 1) / 2): the quantizer output level per real dimension.
inline double quantizer_scale(double rho, std::size_t users) {
  return std::sqrt((rho * static_cast<double>(users) + 1.0) / 2.0);
}

/// sgn with sgn(0) = +1.
inline double sign_of(double v) noexcept { return v >= 0.0 ? 1.0 : -1.0; }

/// Elementwise 1-bit quantizer sqrt((rho K + 1)/2) (sgn(Re X) + j sgn(Im X)).
template <typename Derived>
auto one_bit_quantize(const Eigen::MatrixBase<Derived>& x, double rho, std::size_t users) {
  const double scale = quantizer_scale(rho, users);
  return x.unaryExpr([scale](const cplx& v) { return cplx(scale * sign_of(v.real()), scale * sign_of(v.imag())); })
      .eval();
}

struct QuantizedObservation {
  ComplexVector y;  // unquantized
  ComplexVector r;  // quantized
};

/// Column-major vectorization: element u M + m is antenna m, pilot symbol u.
inline ComplexVector vectorize(const ComplexMatrix& y) {
  return Eigen::Map<const ComplexVector>(y.data(), y.size());
}

inline ComplexMatrix unvectorize(const ComplexVector& v, std::size_t antennas, std::size_t tau) {
  if (static_cast<std::size_t>(v.size()) != antennas * tau) throw DimensionError("unvectorize: size mismatch");
  return Eigen::Map<const ComplexMatrix>(v.data(), static_cast<Eigen::Index>(antennas), static_cast<Eigen::Index>(tau));
}

/// Pilot phase: Y_p = sqrt(rho) H P^H + Z_p, then r_p = Q(vec(Y_p)).
inline QuantizedObservation pilot_phase(const ChannelScenario& sc, const PilotBook& book, const ComplexMatrix& h,
                                        Rng& rng) {
  const auto m = static_cast<Eigen::Index>(sc.antennas());
  const auto tau = static_cast<Eigen::Index>(book.tau());
  if (h.rows() != m || h.cols() != static_cast<Eigen::Index>(sc.users()) ||
      book.users() != sc.users())
    throw DimensionError("pilot_phase: channel, scenario and pilots disagree");
  ComplexMatrix yp = std::sqrt(sc.rho()) * h * book.P().adjoint();
  for (Eigen::Index u = 0; u < tau; ++u)
    for (Eigen::Index i = 0; i < m; ++i) yp(i, u) += rng.complex_gaussian();
  QuantizedObservation out;
  out.y = vectorize(yp);
  out.r = one_bit_quantize(out.y, sc.rho(), sc.users());
  return out;
}

/// Data phase: y = sqrt(rho) H x + z, r = Q(y).
inline QuantizedObservation data_phase(const ChannelScenario& sc, const ComplexMatrix& h, const ComplexVector& x,
                                       Rng& rng) {
  if (h.cols() != x.size() || h.rows() != static_cast<Eigen::Index>(sc.antennas()))
    throw DimensionError("data_phase: channel and symbol vector disagree");
  QuantizedObservation out;
  out.y = std::sqrt(sc.rho()) * h * x;
  for (Eigen::Index i = 0; i < out.y.size(); ++i) out.y(i) += rng.complex_gaussian();
  out.r = one_bit_quantize(out.y, sc.rho(), sc.users());
  return out;
}

}  // namespace onebit
