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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "onebit/air_interface.hpp"
#include "onebit/symbol_statistics.hpp"

namespace onebit {

enum class Strategy { e_sud, h_sud, genie, jd, n_jd, rml };

inline std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::e_sud: return "e-sud";
    case Strategy::h_sud: return "h-sud";
    case Strategy::genie: return "genie";
    case Strategy::jd: return "jd";
    case Strategy::n_jd: return "n-jd";
    case Strategy::rml: return "rml";
  }
  return "unknown";
}

inline Strategy parse_strategy(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return c == '_' ? '-' : std::tolower(c); });
  if (s == "e-sud" || s == "esud") return Strategy::e_sud;
  if (s == "h-sud" || s == "hsud") return Strategy::h_sud;
  if (s == "genie") return Strategy::genie;
  if (s == "jd") return Strategy::jd;
  if (s == "n-jd" || s == "njd") return Strategy::n_jd;
  if (s == "rml") return Strategy::rml;
  throw ConfigError("unknown detector '" + s + "'");
}

struct Decision {
  std::vector<std::size_t> indices;
  Strategy strategy;
  std::size_t search_size = 0;
};

/// argmin over all L^K entries of |x_hat_k - E_k|; returns that entry's l_k.
/// Strict comparison keeps the smallest entry index on ties.
inline std::size_t e_sud(cplx x_hat_k, const ExpectationTable& table, std::size_t k) {
  if (k >= table.users()) throw DimensionError("e_sud: UE index out of range");
  const auto col = table.entries().col(static_cast<Eigen::Index>(k));
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index n = 0; n < col.size(); ++n) {
    const double d = std::norm(x_hat_k - col(n));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(n);
    }
  }
  return table.symbol_of(best, k);
}

/// argmin over l of |x_hat_k - Ebar_{k,l}|.
inline std::size_t h_sud(cplx x_hat_k, const ExpectationTable& table, std::size_t k) {
  if (k >= table.users()) throw DimensionError("h_sud: UE index out of range");
  const auto row = table.averaged().row(static_cast<Eigen::Index>(k));
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index l = 0; l < row.size(); ++l) {
    const double d = std::norm(x_hat_k - row(l));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(l);
    }
  }
  return best;
}

/// argmin over the L entries whose interferer symbols equal the true ones.
/// `true_indices` is the full length-K index vector; its k-th slot is ignored.
inline std::size_t genie_detect(cplx x_hat_k, const ExpectationTable& table, std::size_t k,
                                std::vector<std::size_t> true_indices) {
  if (k >= table.users()) throw DimensionError("genie_detect: UE index out of range");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < table.order(); ++l) {
    true_indices.at(k) = l;
    const auto n = static_cast<Eigen::Index>(table.linear_index(true_indices));
    const double d = std::norm(x_hat_k - table.entries()(n, static_cast<Eigen::Index>(k)));
    if (d < best_d) {
      best_d = d;
      best = l;
    }
  }
  return best;
}

/// Per-UE single decisions packed into a Decision.
inline Decision single_ue_decision(const ComplexVector& x_hat, const ExpectationTable& table, Strategy strategy) {
  Decision d{std::vector<std::size_t>(table.users()), strategy, 0};
  for (std::size_t k = 0; k < table.users(); ++k) {
    const cplx v = x_hat(static_cast<Eigen::Index>(k));
    d.indices[k] = strategy == Strategy::e_sud ? e_sud(v, table, k) : h_sud(v, table, k);
  }
  d.search_size = strategy == Strategy::e_sud ? table.size() : table.order();
  return d;
}

inline Decision genie_decision(const ComplexVector& x_hat, const ExpectationTable& table,
                               const std::vector<std::size_t>& true_indices) {
  Decision d{std::vector<std::size_t>(table.users()), Strategy::genie, table.order()};
  for (std::size_t k = 0; k < table.users(); ++k)
    d.indices[k] = genie_detect(x_hat(static_cast<Eigen::Index>(k)), table, k, true_indices);
  return d;
}

/// argmin over all stacked expectation vectors of ||x_hat - E||.
inline Decision jd(const ComplexVector& x_hat, const ExpectationTable& table) {
  if (static_cast<std::size_t>(x_hat.size()) != table.users()) throw DimensionError("jd: x_hat has wrong length");
  const ComplexMatrix& e = table.entries();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index n = 0; n < e.rows(); ++n) {
    double d = 0.0;
    for (Eigen::Index k = 0; k < e.cols(); ++k) d += std::norm(x_hat(k) - e(n, k));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(n);
    }
  }
  return {table.indices(best), Strategy::jd, table.size()};
}

/// N-point joint detection: shortlist the N averaged references closest to
/// each x_hat_k, then search the N^K Cartesian product. Ties prefer the
/// smaller table index both in the shortlist and in the joint search.
inline Decision n_jd(const ComplexVector& x_hat, const ExpectationTable& table, std::size_t n_points) {
  const std::size_t order = table.order();
  const std::size_t users = table.users();
  if (n_points < 1 || n_points > order)
    throw ConfigError("n_jd: N must lie in [1, " + std::to_string(order) + "], got " + std::to_string(n_points));
  if (static_cast<std::size_t>(x_hat.size()) != users) throw DimensionError("n_jd: x_hat has wrong length");

  std::vector<std::vector<std::size_t>> shortlist(users);
  std::vector<std::size_t> ids(order);
  std::vector<double> dist(order);
  for (std::size_t k = 0; k < users; ++k) {
    const auto row = table.averaged().row(static_cast<Eigen::Index>(k));
    for (std::size_t l = 0; l < order; ++l) dist[l] = std::norm(x_hat(static_cast<Eigen::Index>(k)) - row(static_cast<Eigen::Index>(l)));
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_points), ids.end(),
                      [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
    shortlist[k].assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_points));
  }

  std::size_t combos = 1;
  for (std::size_t k = 0; k < users; ++k) combos *= n_points;
  const ComplexMatrix& e = table.entries();
  std::vector<std::size_t> pos(users, 0);
  std::vector<std::size_t> idx(users);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t rest = c;
    for (std::size_t k = users; k-- > 0;) {
      pos[k] = rest % n_points;
      rest /= n_points;
      idx[k] = shortlist[k][pos[k]];
    }
    const std::size_t n = table.linear_index(idx);
    double d = 0.0;
    for (std::size_t k = 0; k < users; ++k)
      d += std::norm(x_hat(static_cast<Eigen::Index>(k)) - e(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)));
    if (d < best_d || (d == best_d && n < best)) {
      best_d = d;
      best = n;
    }
  }
  return {table.indices(best), Strategy::n_jd, combos};
}

/// theta = 1.702 sqrt(4 rho / (rho K + 1)).
inline double rml_theta(double rho, std::size_t users) {
  return 1.702 * std::sqrt(4.0 * rho / (rho * static_cast<double>(users) + 1.0));
}

/// log(1 + exp(-t)) without overflow.
inline double softplus_neg(double t) { return std::max(-t, 0.0) + std::log1p(std::exp(-std::fabs(t))); }

/// sum_m log(1 + exp(-theta r~_m g~_m^T x~)) with the real stacking
/// r~ = [Re r; Im r] and G~^T x~ = [Re(H x); Im(H x)].
inline double rml_objective(const ComplexVector& signs, const ComplexVector& hx, double theta) {
  if (signs.size() != hx.size()) throw DimensionError("rml_objective: size mismatch");
  double acc = 0.0;
  for (Eigen::Index m = 0; m < hx.size(); ++m) {
    acc += softplus_neg(theta * signs(m).real() * hx(m).real());
    acc += softplus_neg(theta * signs(m).imag() * hx(m).imag());
  }
  return acc;
}

/// H x for every candidate x in lexicographic order, built once per channel.
struct RmlCandidates {
  std::size_t order = 0;
  std::size_t users = 0;
  ComplexMatrix hx;  // M x L^K
};

inline RmlCandidates rml_prepare(const ComplexMatrix& h_eff, const Constellation& constellation,
                                 std::size_t budget = 4096) {
  const std::size_t users = static_cast<std::size_t>(h_eff.cols());
  const std::size_t order = constellation.size();
  const std::size_t count = table_size(order, users, budget);
  ComplexMatrix xs(static_cast<Eigen::Index>(users), static_cast<Eigen::Index>(count));
  for (std::size_t n = 0; n < count; ++n) {
    std::size_t rest = n;
    for (std::size_t k = users; k-- > 0;) {
      xs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) = constellation[rest % order];
      rest /= order;
    }
  }
  return {order, users, h_eff * xs};
}

/// Unit-magnitude sign pattern of r; the quantizer scale is a positive
/// constant and would only rescale theta.
inline ComplexVector unit_signs(const ComplexVector& r) {
  return r.unaryExpr([](const cplx& v) { return cplx(sign_of(v.real()), sign_of(v.imag())); });
}

inline Decision rml_detect(const ComplexVector& r, const RmlCandidates& cand, double rho) {
  if (r.size() != cand.hx.rows()) throw DimensionError("rml_detect: r and channel disagree");
  const ComplexVector signs = unit_signs(r);
  const double theta = rml_theta(rho, cand.users);
  std::size_t best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (Eigen::Index n = 0; n < cand.hx.cols(); ++n) {
    double acc = 0.0;
    for (Eigen::Index m = 0; m < cand.hx.rows(); ++m) {
      acc += softplus_neg(theta * signs(m).real() * cand.hx(m, n).real());
      acc += softplus_neg(theta * signs(m).imag() * cand.hx(m, n).imag());
    }
    if (acc < best_v) {
      best_v = acc;
      best = static_cast<std::size_t>(n);
    }
  }
  Decision d{std::vector<std::size_t>(cand.users), Strategy::rml, static_cast<std::size_t>(cand.hx.cols())};
  for (std::size_t k = cand.users; k-- > 0;) {
    d.indices[k] = best % cand.order;
    best /= cand.order;
  }
  return d;
}

inline Decision rml_detect(const ComplexVector& r, const ComplexMatrix& h_eff, double rho,
                           const Constellation& constellation) {
  return rml_detect(r, rml_prepare(h_eff, constellation), rho);
}

}  // namespace onebit
