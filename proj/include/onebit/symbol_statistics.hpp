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
#include <vector>

#include "onebit/air_interface.hpp"
#include "onebit/channel_estimator.hpp"
#include "onebit/numerics.hpp"
#include "onebit/parallel.hpp"
#include "onebit/quantized_moments.hpp"

namespace onebit {

enum class ReceiverKind { mrc, zf, mmse, lmmd };

inline std::string to_string(ReceiverKind k) {
  switch (k) {
    case ReceiverKind::mrc: return "mrc";
    case ReceiverKind::zf: return "zf";
    case ReceiverKind::mmse: return "mmse";
    case ReceiverKind::lmmd: return "lmmd";
  }
  return "unknown";
}

inline ReceiverKind parse_receiver_kind(const std::string& s) {
  if (s == "mrc" || s == "MRC") return ReceiverKind::mrc;
  if (s == "zf" || s == "ZF") return ReceiverKind::zf;
  if (s == "mmse" || s == "MMSE") return ReceiverKind::mmse;
  if (s == "lmmd" || s == "LMMD") return ReceiverKind::lmmd;
  throw ConfigError("unknown receiver kind '" + s + "'");
}

/// Receiver whose expectation table a detector should match against.
/// LMMD shapes its output around the MRC expectations.
inline ReceiverKind table_kind_for(ReceiverKind k) { return k == ReceiverKind::lmmd ? ReceiverKind::mrc : k; }

/// sqrt(rho) tr(B_k C_rrp) where B_k = C_rp^{-1} A_p Pbar_k^* C_k comes from
/// the estimator. The trace is contracted elementwise, never forming the
/// M tau x M tau product.
inline cplx expected_soft_symbol_mrc(const BlmmseEstimator& estimator, const DataCrossMoments& cross, std::size_t k) {
  const ComplexMatrix& b = estimator.factor(k);
  if (b.rows() != cross.C_rrp.cols() || b.cols() != cross.C_rrp.rows())
    throw DimensionError("expected_soft_symbol_mrc: estimator and cross moments disagree");
  return std::sqrt(estimator.rho()) * (b.transpose().cwiseProduct(cross.C_rrp)).sum();
}

/// E_k^MRC(x) = sqrt(rho) tr(C_rp^{-1} A_p Pbar_k^* C_k C_rrp(x)) through the
/// cached factorization of C_rp.
inline cplx expected_soft_symbol_mrc(const QuantizedMoments& moments, const DataCrossMoments& cross, std::size_t k) {
  if (k >= moments.users()) throw DimensionError("expected_soft_symbol_mrc: UE index out of range");
  const auto m = static_cast<Eigen::Index>(moments.antennas());
  const auto tau = static_cast<Eigen::Index>(moments.tau());
  if (cross.C_rrp.rows() != m || cross.C_rrp.cols() != m * tau)
    throw DimensionError("expected_soft_symbol_mrc: cross moments have wrong shape");
  const auto& p = moments.book().P();
  const auto& gain = moments.bussgang_gain();
  const auto kk = static_cast<Eigen::Index>(k);
  ComplexMatrix d(m * tau, m);
  for (Eigen::Index u = 0; u < tau; ++u)
    d.middleRows(u * m, m) =
        (gain.segment(u * m, m).cast<cplx>().asDiagonal() * moments.scenario().covariance(k)) * std::conj(p(u, kk));
  const ComplexMatrix b = moments.solve(d);
  return std::sqrt(moments.rho()) * (b.transpose().cwiseProduct(cross.C_rrp)).sum();
}

/// ZF: E^MRC / E||h_hat_k||^2.  MMSE: E^MRC / (1 + rho E||h_hat_k||^2).
/// MRC passes through unchanged.
inline cplx expected_soft_symbol_scaled(cplx mrc_value, const RealVector& energies, double rho, std::size_t k,
                                        ReceiverKind kind) {
  if (static_cast<Eigen::Index>(k) >= energies.size())
    throw DimensionError("expected_soft_symbol_scaled: UE index out of range");
  const double e = energies(static_cast<Eigen::Index>(k));
  switch (kind) {
    case ReceiverKind::mrc: return mrc_value;
    case ReceiverKind::zf: return mrc_value / e;
    case ReceiverKind::mmse: return mrc_value / (1.0 + rho * e);
    case ReceiverKind::lmmd: break;
  }
  throw ConfigError("expected_soft_symbol_scaled: LMMD has no scaled expectation");
}

/// Expected soft symbols for every transmit vector in S^K.
///
/// Symbol-index vectors are ordered lexicographically with l_1 most
/// significant, so entry n has l_1 = n / L^{K-1}. Row n of `entries` holds
/// (E_1, ..., E_K) for that vector; `averaged(k, l)` is the mean of column k
/// over the L^{K-1} rows with l_k = l.
class ExpectationTable {
 public:
  ExpectationTable(ReceiverKind kind, Constellation constellation, std::size_t users, ComplexMatrix entries)
      : kind_(kind), constellation_(std::move(constellation)), users_(users), entries_(std::move(entries)) {
    const std::size_t l = constellation_.size();
    count_ = 1;
    for (std::size_t k = 0; k < users_; ++k) count_ *= l;
    if (users_ == 0 || static_cast<std::size_t>(entries_.rows()) != count_ ||
        static_cast<std::size_t>(entries_.cols()) != users_)
      throw DimensionError("ExpectationTable: entries must be L^K x K");
    averaged_ = recompute_average();
  }

  [[nodiscard]] ReceiverKind kind() const noexcept { return kind_; }
  [[nodiscard]] const Constellation& constellation() const noexcept { return constellation_; }
  [[nodiscard]] std::size_t users() const noexcept { return users_; }
  [[nodiscard]] std::size_t size() const noexcept { return count_; }
  [[nodiscard]] std::size_t order() const noexcept { return constellation_.size(); }
  [[nodiscard]] const ComplexMatrix& entries() const noexcept { return entries_; }
  [[nodiscard]] const ComplexMatrix& averaged() const noexcept { return averaged_; }

  [[nodiscard]] std::size_t linear_index(const std::vector<std::size_t>& idx) const {
    if (idx.size() != users_) throw DimensionError("ExpectationTable: index vector has wrong length");
    std::size_t n = 0;
    for (auto l : idx) {
      if (l >= order()) throw DomainError("ExpectationTable: symbol index out of range");
      n = n * order() + l;
    }
    return n;
  }

  [[nodiscard]] std::vector<std::size_t> indices(std::size_t n) const {
    if (n >= count_) throw DomainError("ExpectationTable: entry index out of range");
    std::vector<std::size_t> idx(users_);
    for (std::size_t k = users_; k-- > 0;) {
      idx[k] = n % order();
      n /= order();
    }
    return idx;
  }

  /// l_k of entry n without building the whole index vector.
  [[nodiscard]] std::size_t symbol_of(std::size_t n, std::size_t k) const {
    std::size_t stride = 1;
    for (std::size_t j = k + 1; j < users_; ++j) stride *= order();
    return (n / stride) % order();
  }

  [[nodiscard]] ComplexVector symbol_vector(std::size_t n) const {
    ComplexVector x(static_cast<Eigen::Index>(users_));
    const auto idx = indices(n);
    for (std::size_t k = 0; k < users_; ++k) x(static_cast<Eigen::Index>(k)) = constellation_[idx[k]];
    return x;
  }

  /// Mean of entries(:, k) over every row with l_k = l, recomputed from the
  /// stored entries.
  [[nodiscard]] ComplexMatrix recompute_average() const {
    ComplexMatrix avg = ComplexMatrix::Zero(static_cast<Eigen::Index>(users_), static_cast<Eigen::Index>(order()));
    for (std::size_t n = 0; n < count_; ++n)
      for (std::size_t k = 0; k < users_; ++k)
        avg(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(symbol_of(n, k))) +=
            entries_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    return avg / static_cast<double>(count_ / order());
  }

 private:
  ReceiverKind kind_;
  Constellation constellation_;
  std::size_t users_;
  std::size_t count_ = 0;
  ComplexMatrix entries_;
  ComplexMatrix averaged_;
};

struct TableOptions {
  std::size_t budget = 4096;  // maximum L^K
  /// Fill whole orbits under x -> j x (or x -> -x when the alphabet is not
  /// closed under rotation) from one evaluation.
  bool use_symmetry = true;
};

inline std::size_t table_size(std::size_t order, std::size_t users, std::size_t budget) {
  std::size_t count = 1;
  for (std::size_t k = 0; k < users; ++k) {
    if (count > budget / order + 1) throw ConfigError("expectation table exceeds budget");
    count *= order;
  }
  if (count > budget)
    throw ConfigError("expectation table of " + std::to_string(count) + " entries exceeds the budget of " +
                      std::to_string(budget) + "; use N-JD or shard the table");
  return count;
}

inline ExpectationTable build_expectation_table(const QuantizedMoments& moments, const BlmmseEstimator& estimator,
                                                const Constellation& constellation, ReceiverKind kind,
                                                const TableOptions& opt = {}) {
  if (kind == ReceiverKind::lmmd) throw ConfigError("build_expectation_table: LMMD detects against the MRC table");
  const std::size_t users = moments.users();
  const std::size_t order = constellation.size();
  const std::size_t count = table_size(order, users, opt.budget);
  ComplexMatrix entries(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(users));

  // One constellation map g and the scalar factor c with E(g x) = c E(x).
  std::vector<std::size_t> perm;
  cplx factor{1.0, 0.0};
  std::size_t orbit = 1;
  if (opt.use_symmetry) {
    if (!constellation.rotation_permutation().empty()) {
      perm = constellation.rotation_permutation();
      factor = kJ;
      orbit = 4;
    } else if (!constellation.negation_permutation().empty()) {
      perm = constellation.negation_permutation();
      factor = -1.0;
      orbit = 2;
    }
  }

  auto map_index = [&](std::size_t n) {
    std::size_t out = 0;
    std::size_t stride = count / order;
    for (std::size_t k = 0; k < users; ++k) {
      out = out * order + perm[(n / stride) % order];
      stride /= order;
    }
    return out;
  };

  // Orbit representatives: the smallest linear index in each orbit.
  std::vector<std::size_t> reps;
  if (orbit == 1) {
    reps.resize(count);
    for (std::size_t n = 0; n < count; ++n) reps[n] = n;
  } else {
    for (std::size_t n = 0; n < count; ++n) {
      bool smallest = true;
      std::size_t g = n;
      for (std::size_t s = 1; s < orbit; ++s) {
        g = map_index(g);
        if (g < n) smallest = false;
      }
      if (smallest) reps.push_back(n);
    }
  }

  const ExpectationTable shape(kind, constellation, users, ComplexMatrix::Zero(static_cast<Eigen::Index>(count),
                                                                               static_cast<Eigen::Index>(users)));
  const RealVector& energies = estimator.energies();
  parallel_for(reps.size(), [&](std::size_t i) {
    const std::size_t n = reps[i];
    const DataCrossMoments cross = moments.cross(shape.symbol_vector(n));
    Eigen::RowVectorXcd value(static_cast<Eigen::Index>(users));
    for (std::size_t k = 0; k < users; ++k)
      value(static_cast<Eigen::Index>(k)) =
          expected_soft_symbol_scaled(expected_soft_symbol_mrc(estimator, cross, k), energies, moments.rho(), k, kind);
    std::size_t g = n;
    for (std::size_t s = 0; s < orbit; ++s) {
      entries.row(static_cast<Eigen::Index>(g)) = value;
      g = orbit > 1 ? map_index(g) : g;
      value *= factor;
    }
  });
  return ExpectationTable(kind, constellation, users, std::move(entries));
}

inline ExpectationTable build_expectation_table(const QuantizedMoments& moments, const Constellation& constellation,
                                                ReceiverKind kind, const TableOptions& opt = {}) {
  return build_expectation_table(moments, BlmmseEstimator(moments), constellation, kind, opt);
}

inline ExpectationTable build_expectation_table(const ChannelScenario& scenario, const PilotBook& book,
                                                const Constellation& constellation, ReceiverKind kind,
                                                const TableOptions& opt = {}) {
  return build_expectation_table(QuantizedMoments(scenario, book), constellation, kind, opt);
}

/// e(x) = E[H_hat^H r | x]: the stored MRC row for the index vector.
inline ComplexVector expectation_vector_e(const ExpectationTable& table, const std::vector<std::size_t>& idx) {
  if (table.kind() != ReceiverKind::mrc) throw ConfigError("expectation_vector_e: table must be built for MRC");
  std::size_t n = 0;
  try {
    n = table.linear_index(idx);
  } catch (const std::exception& e) {
    throw DomainError(std::string("expectation_vector_e: no entry for this index vector: ") + e.what());
  }
  return table.entries().row(static_cast<Eigen::Index>(n)).transpose();
}

}  // namespace onebit
