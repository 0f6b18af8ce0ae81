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

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "onebit/quantized_moments.hpp"
#include "onebit/symbol_statistics.hpp"

namespace onebit {

inline constexpr std::uint32_t kTableCacheVersion = 1;

/// Incremental 64-bit FNV-1a.
class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void value(const T& v) {
    bytes(&v, sizeof(T));
  }
  void matrix(const ComplexMatrix& m) {
    value(static_cast<std::int64_t>(m.rows()));
    value(static_cast<std::int64_t>(m.cols()));
    bytes(m.data(), sizeof(cplx) * static_cast<std::size_t>(m.size()));
  }
  [[nodiscard]] std::uint64_t digest() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t table_cache_key(const QuantizedMoments& moments, const Constellation& constellation,
                                     ReceiverKind kind) {
  Fnv1a h;
  h.value(kTableCacheVersion);
  const auto& sc = moments.scenario();
  h.value(static_cast<std::uint64_t>(sc.antennas()));
  h.value(static_cast<std::uint64_t>(sc.users()));
  h.value(static_cast<std::uint64_t>(moments.tau()));
  h.value(sc.rho());
  h.value(static_cast<std::uint8_t>(sc.iid()));
  for (const auto& c : sc.covariances()) h.matrix(c);
  h.matrix(moments.book().P());
  for (const auto& s : constellation.symbols()) h.value(s);
  h.value(static_cast<std::int32_t>(kind));
  return h.digest();
}

inline std::filesystem::path table_cache_path(const std::filesystem::path& dir, std::uint64_t key) {
  char name[40];
  std::snprintf(name, sizeof(name), "table_%016llx.bin", static_cast<unsigned long long>(key));
  return dir / name;
}

namespace detail {
inline constexpr char kTableMagic[8] = {'O', 'N', 'E', 'B', 'I', 'T', 'T', 'B'};
}

inline void save_table(const ExpectationTable& table, std::uint64_t key, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write table cache '" + path.string() + "'");
  out.write(detail::kTableMagic, sizeof(detail::kTableMagic));
  const std::uint32_t version = kTableCacheVersion;
  const auto order = static_cast<std::uint64_t>(table.order());
  const auto users = static_cast<std::uint64_t>(table.users());
  const auto kind = static_cast<std::int32_t>(table.kind());
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&key), sizeof(key));
  out.write(reinterpret_cast<const char*>(&order), sizeof(order));
  out.write(reinterpret_cast<const char*>(&users), sizeof(users));
  out.write(reinterpret_cast<const char*>(&kind), sizeof(kind));
  out.write(reinterpret_cast<const char*>(table.entries().data()),
            static_cast<std::streamsize>(sizeof(cplx) * static_cast<std::size_t>(table.entries().size())));
  if (!out) throw std::runtime_error("failed writing table cache '" + path.string() + "'");
}

/// Returns the cached table when the file exists and its header matches
/// (version, key, shape, kind); any mismatch counts as a miss.
inline std::optional<ExpectationTable> load_table(const std::filesystem::path& path, std::uint64_t key,
                                                  const Constellation& constellation, std::size_t users,
                                                  ReceiverKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[sizeof(detail::kTableMagic)];
  std::uint32_t version = 0;
  std::uint64_t stored_key = 0, order = 0, stored_users = 0;
  std::int32_t stored_kind = -1;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&stored_key), sizeof(stored_key));
  in.read(reinterpret_cast<char*>(&order), sizeof(order));
  in.read(reinterpret_cast<char*>(&stored_users), sizeof(stored_users));
  in.read(reinterpret_cast<char*>(&stored_kind), sizeof(stored_kind));
  if (!in || std::string(magic, sizeof(magic)) != std::string(detail::kTableMagic, sizeof(magic)) ||
      version != kTableCacheVersion || stored_key != key || order != constellation.size() ||
      stored_users != users || stored_kind != static_cast<std::int32_t>(kind))
    return std::nullopt;
  std::size_t count = 1;
  for (std::size_t k = 0; k < users; ++k) count *= constellation.size();
  ComplexMatrix entries(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(users));
  in.read(reinterpret_cast<char*>(entries.data()),
          static_cast<std::streamsize>(sizeof(cplx) * static_cast<std::size_t>(entries.size())));
  if (!in) return std::nullopt;
  return ExpectationTable(kind, constellation, users, std::move(entries));
}

/// Loads the table from `dir` or builds and stores it. An empty `dir`
/// disables caching. Tables built with a non-default arcsine map are never
/// cached.
inline ExpectationTable cached_expectation_table(const QuantizedMoments& moments, const BlmmseEstimator& estimator,
                                                 const Constellation& constellation, ReceiverKind kind,
                                                 const std::filesystem::path& dir, const TableOptions& opt = {}) {
  if (dir.empty() || moments.omega() != &arcsine_map)
    return build_expectation_table(moments, estimator, constellation, kind, opt);
  const std::uint64_t key = table_cache_key(moments, constellation, kind);
  const auto path = table_cache_path(dir, key);
  if (auto hit = load_table(path, key, constellation, moments.users(), kind)) return std::move(*hit);
  auto table = build_expectation_table(moments, estimator, constellation, kind, opt);
  std::filesystem::create_directories(dir);
  save_table(table, key, path);
  return table;
}

}  // namespace onebit
