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
#include <string>
#include <vector>

#include <json.hpp>

#include "onebit/air_interface.hpp"
#include "onebit/channel_estimator.hpp"
#include "onebit/channel_model.hpp"
#include "onebit/pilots.hpp"
#include "onebit/quantized_moments.hpp"
#include "onebit/receiver_bank.hpp"
#include "onebit/rng.hpp"
#include "onebit/symbol_statistics.hpp"

namespace onebit {

/// Outcome of one oracle comparison. `worst_z` is the largest deviation in
/// standard-error units (or the largest raw deviation for non-statistical
/// checks); `fraction_within` is the share of compared quantities inside
/// the tolerance.
struct CheckResult {
  std::string name;
  bool passed = false;
  double worst_z = 0.0;
  double fraction_within = 0.0;
  double required_fraction = 1.0;
  double z_tolerance = 4.0;
  double max_abs_deviation = 0.0;
  double mean_standard_error = 0.0;
  std::size_t compared = 0;
  std::size_t samples = 0;
  std::string note;

  [[nodiscard]] nlohmann::json to_json() const {
    return {{"name", name},
            {"passed", passed},
            {"worst_z", worst_z},
            {"fraction_within", fraction_within},
            {"required_fraction", required_fraction},
            {"z_tolerance", z_tolerance},
            {"max_abs_deviation", max_abs_deviation},
            {"mean_standard_error", mean_standard_error},
            {"compared", compared},
            {"samples", samples},
            {"note", note}};
  }
};

/// Running elementwise mean and standard error of a complex matrix-valued
/// sample, with real and imaginary parts tracked separately.
class ComplexMomentAccumulator {
 public:
  ComplexMomentAccumulator(Eigen::Index rows, Eigen::Index cols)
      : sum_(ComplexMatrix::Zero(rows, cols)),
        sq_re_(RealMatrix::Zero(rows, cols)),
        sq_im_(RealMatrix::Zero(rows, cols)) {}

  void add(const ComplexMatrix& s) {
    sum_ += s;
    sq_re_.array() += s.real().array().square();
    sq_im_.array() += s.imag().array().square();
    ++n_;
  }

  /// Adds a * b^H without forming a temporary of unrelated shape.
  void add_outer(const ComplexVector& a, const ComplexVector& b) { add(a * b.adjoint()); }

  [[nodiscard]] std::size_t count() const noexcept { return n_; }
  [[nodiscard]] ComplexMatrix mean() const { return sum_ / static_cast<double>(n_); }

  [[nodiscard]] RealMatrix se_re() const { return se(sum_.real(), sq_re_); }
  [[nodiscard]] RealMatrix se_im() const { return se(sum_.imag(), sq_im_); }

 private:
  [[nodiscard]] RealMatrix se(const RealMatrix& sum, const RealMatrix& sq) const {
    const double n = static_cast<double>(n_);
    const RealMatrix mean = sum / n;
    const RealMatrix var = ((sq / n).array() - mean.array().square()).max(0.0).matrix() * (n / (n - 1.0));
    return (var / n).cwiseSqrt();
  }

  ComplexMatrix sum_;
  RealMatrix sq_re_;
  RealMatrix sq_im_;
  std::size_t n_ = 0;
};

/// Compares a closed form against an accumulated Monte Carlo mean. An
/// element counts as inside when both its real and imaginary deviations
/// are within z_tol standard errors (a zero standard error requires an
/// exact match up to 1e-12 absolute).
inline CheckResult compare_elementwise(const std::string& name, const ComplexMatrix& closed,
                                       const ComplexMomentAccumulator& mc, double z_tol, double required_fraction) {
  CheckResult r;
  r.name = name;
  r.z_tolerance = z_tol;
  r.required_fraction = required_fraction;
  r.samples = mc.count();
  const ComplexMatrix mean = mc.mean();
  const RealMatrix se_re = mc.se_re();
  const RealMatrix se_im = mc.se_im();
  std::size_t inside = 0;
  double se_sum = 0.0;
  auto z_of = [](double dev, double se) {
    if (se > 0.0) return std::fabs(dev) / se;
    return std::fabs(dev) <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
  };
  for (Eigen::Index i = 0; i < closed.rows(); ++i)
    for (Eigen::Index j = 0; j < closed.cols(); ++j) {
      const cplx d = closed(i, j) - mean(i, j);
      const double z = std::max(z_of(d.real(), se_re(i, j)), z_of(d.imag(), se_im(i, j)));
      r.worst_z = std::max(r.worst_z, z);
      r.max_abs_deviation = std::max(r.max_abs_deviation, std::abs(d));
      se_sum += 0.5 * (se_re(i, j) + se_im(i, j));
      if (z <= z_tol) ++inside;
      ++r.compared;
    }
  r.fraction_within = static_cast<double>(inside) / static_cast<double>(r.compared);
  r.mean_standard_error = se_sum / static_cast<double>(r.compared);
  r.passed = r.fraction_within >= required_fraction;
  return r;
}

// ---------------------------------------------------------------------------
// Individual oracle checks

/// Random direction pairs in `dim` dimensions: the sign-correlation estimate
/// from `samples` Gaussian draws must lie within 4/sqrt(samples) of
/// Omega(cos angle) for at least `required_pairs` of `pairs`.
inline CheckResult check_arcsine_law(std::size_t pairs, std::size_t dim, std::size_t samples, std::size_t required_pairs,
                                     std::uint64_t seed, ArcsineFn omega = &arcsine_map) {
  CheckResult r;
  r.name = "arcsine_law";
  r.samples = samples;
  r.z_tolerance = 4.0;
  r.required_fraction = static_cast<double>(required_pairs) / static_cast<double>(pairs);
  Rng rng(seed);
  const double tol = 4.0 / std::sqrt(static_cast<double>(samples));
  std::size_t inside = 0;
  std::vector<double> a1(dim), a2(dim);
  for (std::size_t p = 0; p < pairs; ++p) {
    double n1 = 0, n2 = 0, dot = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      a1[i] = rng.gaussian();
      a2[i] = rng.gaussian();
      n1 += a1[i] * a1[i];
      n2 += a2[i] * a2[i];
      dot += a1[i] * a2[i];
    }
    const double closed = omega(dot / std::sqrt(n1 * n2));
    const double mc = arcsine_law_oracle(a1, a2, 0.5, samples, rng.substream(p).seed());
    const double dev = std::fabs(closed - mc);
    r.max_abs_deviation = std::max(r.max_abs_deviation, dev);
    r.worst_z = std::max(r.worst_z, dev / (tol / 4.0));
    if (dev <= tol) ++inside;
    ++r.compared;
  }
  r.mean_standard_error = 1.0 / std::sqrt(static_cast<double>(samples));
  r.fraction_within = static_cast<double>(inside) / static_cast<double>(pairs);
  r.passed = inside >= required_pairs;
  r.note = "tolerance 4/sqrt(samples) = " + std::to_string(tol);
  return r;
}

/// Empirical E[r_p r_p^H] from the sampled pilot phase against the closed form.
inline CheckResult check_pilot_autocovariance(const ChannelScenario& sc, const PilotBook& book, std::size_t samples,
                                              std::uint64_t seed, double required_fraction,
                                              ArcsineFn omega = &arcsine_map) {
  const ComplexMatrix closed = pilot_autocovariance(sc, book, omega);
  ComplexMomentAccumulator acc(closed.rows(), closed.cols());
  const Rng master(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const Rng trial = master.substream(s);
    const ComplexMatrix h = sample_channel(sc, trial.substream(0)).H;
    Rng noise = trial.substream(1);
    const auto obs = pilot_phase(sc, book, h, noise);
    acc.add_outer(obs.r, obs.r);
  }
  auto r = compare_elementwise("pilot_autocovariance", closed, acc, 4.0, required_fraction);
  return r;
}

/// Empirical E[r r_p^H | x] against the closed form, one x at a time.
inline CheckResult check_data_pilot_crosscovariance(const ChannelScenario& sc, const PilotBook& book,
                                                    const std::vector<ComplexVector>& xs, std::size_t samples,
                                                    std::uint64_t seed, double required_fraction,
                                                    ArcsineFn omega = &arcsine_map) {
  CheckResult total;
  total.name = "data_pilot_crosscovariance";
  total.required_fraction = required_fraction;
  total.samples = samples;
  double inside = 0.0;
  double se_sum = 0.0;
  for (std::size_t xi = 0; xi < xs.size(); ++xi) {
    const ComplexMatrix closed = data_pilot_crosscovariance(sc, book, xs[xi], omega).C_rrp;
    ComplexMomentAccumulator acc(closed.rows(), closed.cols());
    const Rng master = Rng(seed).substream(xi);
    for (std::size_t s = 0; s < samples; ++s) {
      const Rng trial = master.substream(s);
      const ComplexMatrix h = sample_channel(sc, trial.substream(0)).H;
      Rng pn = trial.substream(1);
      Rng dn = trial.substream(2);
      const auto pilot = pilot_phase(sc, book, h, pn);
      const auto data = data_phase(sc, h, xs[xi], dn);
      acc.add_outer(data.r, pilot.r);
    }
    const auto part = compare_elementwise("x" + std::to_string(xi), closed, acc, 4.0, required_fraction);
    total.worst_z = std::max(total.worst_z, part.worst_z);
    total.max_abs_deviation = std::max(total.max_abs_deviation, part.max_abs_deviation);
    inside += part.fraction_within * static_cast<double>(part.compared);
    se_sum += part.mean_standard_error * static_cast<double>(part.compared);
    total.compared += part.compared;
  }
  total.fraction_within = inside / static_cast<double>(total.compared);
  total.mean_standard_error = se_sum / static_cast<double>(total.compared);
  total.passed = total.fraction_within >= required_fraction;
  return total;
}

/// Per-(k, x) comparison of a closed-form expected soft symbol with the
/// empirical mean of the corresponding combiner output.
struct SoftSymbolComparison {
  std::size_t x_index = 0;
  std::size_t k = 0;
  cplx closed;
  cplx empirical;
  double standard_error = 0.0;  // sample std / sqrt(N), complex
  [[nodiscard]] double z() const { return std::abs(closed - empirical) / standard_error; }
  [[nodiscard]] double relative_deviation() const { return std::abs(closed - empirical) / std::abs(empirical); }
};

/// Draws `samples` joint realizations (channel, pilot noise, data noise per
/// x); for each x and UE k returns the closed-form expectation for `kind`
/// next to the empirical mean of v_k^H r. One channel and pilot draw is
/// shared by all x within a realization.
inline std::vector<SoftSymbolComparison> compare_soft_symbols(const QuantizedMoments& moments,
                                                              const std::vector<ComplexVector>& xs, ReceiverKind kind,
                                                              std::size_t samples, std::uint64_t seed) {
  const auto& sc = moments.scenario();
  const BlmmseEstimator est(moments);
  const std::size_t users = sc.users();
  std::vector<SoftSymbolComparison> out;
  for (std::size_t xi = 0; xi < xs.size(); ++xi) {
    const auto cross = moments.cross(xs[xi]);
    for (std::size_t k = 0; k < users; ++k) {
      SoftSymbolComparison c;
      c.x_index = xi;
      c.k = k;
      c.closed = expected_soft_symbol_scaled(expected_soft_symbol_mrc(est, cross, k), est.energies(), sc.rho(), k, kind);
      out.push_back(c);
    }
  }
  std::vector<cplx> sum(out.size(), 0.0);
  std::vector<double> sq(out.size(), 0.0);
  const Rng master(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const Rng trial = master.substream(s);
    const ComplexMatrix h = sample_channel(sc, trial.substream(0)).H;
    Rng pn = trial.substream(1);
    Rng dn = trial.substream(2);
    const auto pilot = pilot_phase(sc, moments.book(), h, pn);
    const ComplexMatrix h_hat = est.estimate(pilot.r).H_hat;
    const Receiver rx = conventional_receiver(h_hat, sc.rho(), kind);
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
      const auto data = data_phase(sc, h, xs[xi], dn);
      const ComplexVector soft = combine(rx, data.r);
      for (std::size_t k = 0; k < users; ++k) {
        const std::size_t i = xi * users + k;
        sum[i] += soft(static_cast<Eigen::Index>(k));
        sq[i] += std::norm(soft(static_cast<Eigen::Index>(k)));
      }
    }
  }
  const double n = static_cast<double>(samples);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].empirical = sum[i] / n;
    const double var = std::max(0.0, sq[i] / n - std::norm(out[i].empirical)) * n / (n - 1.0);
    out[i].standard_error = std::sqrt(var / n);
  }
  return out;
}

inline CheckResult check_mrc_expectation(const QuantizedMoments& moments, const std::vector<ComplexVector>& xs,
                                         std::size_t samples, std::uint64_t seed) {
  CheckResult r;
  r.name = "mrc_expected_soft_symbol";
  r.samples = samples;
  const auto cmp = compare_soft_symbols(moments, xs, ReceiverKind::mrc, samples, seed);
  std::size_t inside = 0;
  double se_sum = 0.0;
  for (const auto& c : cmp) {
    r.worst_z = std::max(r.worst_z, c.z());
    r.max_abs_deviation = std::max(r.max_abs_deviation, std::abs(c.closed - c.empirical));
    se_sum += c.standard_error;
    if (c.z() <= r.z_tolerance) ++inside;
  }
  r.compared = cmp.size();
  r.mean_standard_error = se_sum / static_cast<double>(cmp.size());
  r.fraction_within = static_cast<double>(inside) / static_cast<double>(cmp.size());
  r.passed = inside == cmp.size();
  return r;
}

/// Noise-only Monte Carlo of E[y r^H | x] and E[r r^H | x] for a fixed
/// channel, against the closed forms.
inline std::pair<CheckResult, CheckResult> check_conditional_covariances(const ComplexMatrix& h, const ComplexVector& x,
                                                                         double rho, std::size_t samples,
                                                                         std::uint64_t seed) {
  const std::size_t users = static_cast<std::size_t>(h.cols());
  const ChannelScenario sc(rho, std::vector<ComplexMatrix>(users, ComplexMatrix::Identity(h.rows(), h.rows())), true);
  ComplexMomentAccumulator yr(h.rows(), h.rows());
  ComplexMomentAccumulator rr(h.rows(), h.rows());
  Rng noise(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const auto obs = data_phase(sc, h, x, noise);
    yr.add_outer(obs.y, obs.r);
    rr.add_outer(obs.r, obs.r);
  }
  return {compare_elementwise("conditional_yr_covariance", conditional_yr_covariance(h, x, rho, users), yr, 4.0, 1.0),
          compare_elementwise("conditional_quantized_covariance", conditional_quantized_covariance(h, x, rho, users), rr,
                              4.0, 1.0)};
}

/// Mean over `seeds` realizations of |h_hat_k^H h_hat_k'| / sqrt(E_k E_k')
/// for UEs 0 and 1.
inline double mean_alignment_magnitude(const QuantizedMoments& moments, std::size_t seeds, std::uint64_t seed) {
  const BlmmseEstimator est(moments);
  const auto& sc = moments.scenario();
  double acc = 0.0;
  const Rng master(seed);
  for (std::size_t s = 0; s < seeds; ++s) {
    const Rng trial = master.substream(s);
    const ComplexMatrix h = sample_channel(sc, trial.substream(0)).H;
    Rng pn = trial.substream(1);
    const auto pilot = pilot_phase(sc, moments.book(), h, pn);
    acc += std::abs(estimate_pairwise_alignment(est.estimate(pilot.r).H_hat, 0, 1, est.energies()));
  }
  return acc / static_cast<double>(seeds);
}

// ---------------------------------------------------------------------------
// Report

struct ValidationProfile {
  std::string name;
  std::size_t arcsine_pairs, arcsine_samples, arcsine_required;
  std::size_t moment_samples;
  std::size_t mrc_samples;
  std::size_t conditional_samples;
  std::size_t alignment_seeds;
};

inline ValidationProfile validation_profile(const std::string& name) {
  if (name == "desk") return {"desk", 30, 20000, 29, 20000, 20000, 100000, 100};
  if (name == "full") return {"full", 100, 100000, 97, 100000, 200000, 1000000, 200};
  throw ConfigError("unknown validation profile '" + name + "' (expected desk or full)");
}

/// A few distinct 16-QAM symbol vectors for K = 2.
inline std::vector<ComplexVector> sample_symbol_vectors(std::size_t count, std::size_t users, std::uint64_t seed) {
  const Constellation c = qam16();
  Rng rng(seed);
  std::vector<ComplexVector> xs;
  while (xs.size() < count) {
    ComplexVector x(static_cast<Eigen::Index>(users));
    for (std::size_t k = 0; k < users; ++k) x(static_cast<Eigen::Index>(k)) = c[rng.uniform_index(c.size())];
    bool fresh = true;
    for (const auto& y : xs) fresh = fresh && (y - x).norm() > 1e-12;
    if (fresh) xs.push_back(x);
  }
  return xs;
}

/// Runs every oracle suite and returns {"passed": bool, "checks": [...]}.
/// `omega` replaces the arcsine map inside the closed forms only, which is
/// how the negative control injects a corrupted law.
inline nlohmann::json validate(const std::string& profile_name, ArcsineFn omega = &arcsine_map,
                               std::uint64_t seed = 2024) {
  const ValidationProfile prof = validation_profile(profile_name);
  std::vector<CheckResult> checks;

  checks.push_back(check_arcsine_law(prof.arcsine_pairs, 4, prof.arcsine_samples, prof.arcsine_required, seed, omega));

  ScenarioParams small;
  small.antennas = 4;
  small.users = 2;
  small.rho = 1.0;
  const ChannelScenario sc_small = build_scenario(small);
  const PilotBook zc3 = zadoff_chu_pilots(3, 2);
  checks.push_back(check_pilot_autocovariance(sc_small, zc3, prof.moment_samples, seed + 1, 0.99, omega));
  checks.push_back(check_data_pilot_crosscovariance(sc_small, zc3, sample_symbol_vectors(2, 2, seed + 2),
                                                    prof.moment_samples, seed + 3, 0.99, omega));

  ScenarioParams mid = small;
  mid.antennas = 8;
  const QuantizedMoments moments_mid(build_scenario(mid), zadoff_chu_pilots(7, 2), omega);
  checks.push_back(check_mrc_expectation(moments_mid, sample_symbol_vectors(8, 2, seed + 4), prof.mrc_samples,
                                         seed + 5));

  {
    Rng rng(seed + 6);
    ComplexMatrix h(3, 2);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = rng.complex_gaussian();
    auto [yr, rr] = check_conditional_covariances(h, sample_symbol_vectors(1, 2, seed + 7).front(), 1.0,
                                                  prof.conditional_samples, seed + 8);
    checks.push_back(yr);
    checks.push_back(rr);
  }

  {
    CheckResult r;
    r.name = "estimate_alignment_trend";
    r.samples = prof.alignment_seeds;
    ScenarioParams iid;
    iid.iid = true;
    iid.users = 2;
    iid.rho = 1.0;
    const PilotBook dft = dft_pilots(7, 2);
    iid.antennas = 16;
    const double small_m = mean_alignment_magnitude(QuantizedMoments(build_scenario(iid), dft, omega),
                                                    prof.alignment_seeds, seed + 9);
    iid.antennas = 128;
    const double large_m = mean_alignment_magnitude(QuantizedMoments(build_scenario(iid), dft, omega),
                                                    prof.alignment_seeds, seed + 10);
    r.compared = 2;
    r.max_abs_deviation = large_m;
    r.passed = large_m < small_m;
    r.fraction_within = r.passed ? 1.0 : 0.0;
    r.note = "mean |alignment| M=16: " + std::to_string(small_m) + ", M=128: " + std::to_string(large_m);
    checks.push_back(r);
  }

  nlohmann::json report;
  report["profile"] = prof.name;
  report["seed"] = seed;
  bool all = true;
  for (const auto& c : checks) {
    report["checks"].push_back(c.to_json());
    all = all && c.passed;
  }
  report["passed"] = all;
  return report;
}

}  // namespace onebit
