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

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace onebit {

/// SplitMix64 finalizer. Used to turn (seed, key...) tuples into
/// well-separated engine seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded random stream with named substreams.
///
/// A substream is keyed by its parent's seed and an integer key only, so
/// drawing from one substream never perturbs another. Trials in the
/// simulation harness derive their stream from (master seed, grid index,
/// trial index), which makes results independent of the thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  static Rng derive(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t s = mix64(master);
    for (auto k : keys) s = mix64(s ^ mix64(k + 0x632be59bd9b4e019ULL));
    return Rng(s);
  }

  [[nodiscard]] Rng substream(std::uint64_t key) const { return derive(seed_, {key}); }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  double gaussian() { return normal_(engine_); }

  /// CN(0, 1): independent real and imaginary parts of variance 1/2.
  std::complex<double> complex_gaussian() {
    constexpr double kHalfStd = 0.70710678118654752440;
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {kHalfStd * re, kHalfStd * im};
  }

  std::size_t uniform_index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace onebit
