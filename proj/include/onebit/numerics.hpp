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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "onebit/errors.hpp"
#include "onebit/rng.hpp"

namespace onebit {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kJ{0.0, 1.0};

/// Omega(x) = (2/pi) asin(x). Inputs up to 1e-12 beyond +-1 are clamped;
/// anything further out is a domain error. Exactly odd.
inline double arcsine_map(double x) {
  const double ax = std::fabs(x);
  if (!(ax <= 1.0 + 1e-12)) {
    std::ostringstream os;
    os << "arcsine_map: argument " << x << " outside [-1, 1]";
    throw DomainError(os.str());
  }
  return std::copysign(std::numbers::inv_pi * 2.0 * std::asin(std::min(ax, 1.0)), x);
}

/// Error function, exactly odd.
inline double erf_map(double x) {
  if (!std::isfinite(x)) throw DomainError("erf_map: non-finite argument");
  return std::copysign(std::erf(std::fabs(x)), x);
}

/// Componentwise complex error function: erf(a + jb) := erf(a) + j erf(b).
inline cplx erf_map(cplx z) { return {erf_map(z.real()), erf_map(z.imag())}; }

/// ||a - b||_F / ||b||_F (absolute when b vanishes).
template <typename DerivedA, typename DerivedB>
double relative_frobenius(const Eigen::MatrixBase<DerivedA>& a,
                          const Eigen::MatrixBase<DerivedB>& b) {
  const double denom = b.norm();
  const double diff = (a - b).norm();
  return denom > 0.0 ? diff / denom : diff;
}

template <typename Derived>
double hermitian_defect(const Eigen::MatrixBase<Derived>& c) {
  return relative_frobenius(c, c.adjoint());
}

struct HermitianFactorization {
  RealVector eigenvalues;     // descending
  ComplexMatrix eigenvectors; // columns match eigenvalues

  [[nodiscard]] ComplexMatrix reconstruct() const {
    return eigenvectors * eigenvalues.cast<cplx>().asDiagonal() * eigenvectors.adjoint();
  }
};

inline void require_square(const ComplexMatrix& c, const char* who) {
  if (c.rows() != c.cols()) {
    std::ostringstream os;
    os << who << ": expected a square matrix, got " << c.rows() << "x" << c.cols();
    throw DimensionError(os.str());
  }
}

inline HermitianFactorization hermitian_factorize(const ComplexMatrix& c) {
  require_square(c, "hermitian_factorize");
  if (hermitian_defect(c) > 1e-10) throw NumericalError("hermitian_factorize: matrix is not Hermitian");
  const ComplexMatrix sym = 0.5 * (c + c.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("hermitian_factorize: eigensolver failed");
  const auto n = c.rows();
  HermitianFactorization f{RealVector(n), ComplexMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    f.eigenvalues(i) = es.eigenvalues()(n - 1 - i);
    f.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return f;
}

/// Principal square root of a Hermitian PSD matrix. Eigenvalues in
/// [-1e-10 lambda_max, 0) are treated as zero.
inline ComplexMatrix hermitian_sqrt(const ComplexMatrix& c) {
  const auto f = hermitian_factorize(c);
  const auto n = c.rows();
  if (n == 0) return c;
  const double lmax = f.eigenvalues(0);
  const double lmin = f.eigenvalues(n - 1);
  if (lmin < -1e-10 * std::max(lmax, 0.0)) {
    std::ostringstream os;
    os << "hermitian_sqrt: matrix is indefinite, most negative eigenvalue " << lmin
       << " (largest " << lmax << ")";
    throw NumericalError(os.str());
  }
  RealVector root = f.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  ComplexMatrix s = f.eigenvectors * root.cast<cplx>().asDiagonal() * f.eigenvectors.adjoint();
  return 0.5 * (s + s.adjoint());
}

/// Moore-Penrose pseudo-inverse by truncated SVD; singular values below
/// rel_tol * sigma_max are dropped.
inline ComplexMatrix pseudo_inverse(const ComplexMatrix& a, double rel_tol = 1e-10) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigError("pseudo_inverse: rel_tol must lie in (0, 1)");
  if (a.size() == 0) return ComplexMatrix(a.cols(), a.rows());
  Eigen::BDCSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  const double cutoff = rel_tol * sv(0);
  RealVector inv = RealVector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.cast<cplx>().asDiagonal() * svd.matrixU().adjoint();
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline QuadratureRule gauss_legendre(std::size_t n) {
  if (n == 0) throw ConfigError("gauss_legendre: need at least one node");
  QuadratureRule q{std::vector<double>(n), std::vector<double>(n)};
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.weights[i] = w;
    q.weights[n - 1 - i] = w;
  }
  return q;
}

/// Monte Carlo estimate of E[sgn(a1^T z) sgn(a2^T z)] for z ~ N(0, variance I).
/// Test oracle for the arcsine law; the closed form is arcsine_map(cos angle).
inline double arcsine_law_oracle(std::span<const double> a1, std::span<const double> a2,
                                 double variance, std::size_t samples, std::uint64_t seed) {
  if (a1.size() != a2.size()) throw DimensionError("arcsine_law_oracle: vector sizes differ");
  if (!(variance > 0.0)) throw ConfigError("arcsine_law_oracle: variance must be positive");
  if (samples == 0) throw ConfigError("arcsine_law_oracle: need at least one sample");
  auto norm = [](std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
  };
  if (norm(a1) == 0.0 || norm(a2) == 0.0) throw DomainError("arcsine_law_oracle: zero-norm vector");
  Rng rng(seed);
  const double sd = std::sqrt(variance);
  std::vector<double> z(a1.size());
  long long acc = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    double t1 = 0.0, t2 = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double zi = sd * rng.gaussian();
      t1 += a1[i] * zi;
      t2 += a2[i] * zi;
    }
    acc += ((t1 >= 0.0) == (t2 >= 0.0)) ? 1 : -1;
  }
  return static_cast<double>(acc) / static_cast<double>(samples);
}

}  // namespace onebit
