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

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "onebit/air_interface.hpp"
#include "onebit/channel_estimator.hpp"
#include "onebit/channel_model.hpp"
#include "onebit/detector_bank.hpp"
#include "onebit/parallel.hpp"
#include "onebit/pilots.hpp"
#include "onebit/quantized_moments.hpp"
#include "onebit/receiver_bank.hpp"
#include "onebit/rng.hpp"
#include "onebit/symbol_statistics.hpp"
#include "onebit/table_cache.hpp"

namespace onebit {

enum class SymbolMode { enumerate_all, uniform_random };

inline SymbolMode parse_symbol_mode(const std::string& s) {
  if (s == "enumerate_all") return SymbolMode::enumerate_all;
  if (s == "uniform_random") return SymbolMode::uniform_random;
  throw ConfigError("unknown symbol_mode '" + s + "'");
}

inline std::string to_string(SymbolMode m) {
  return m == SymbolMode::enumerate_all ? "enumerate_all" : "uniform_random";
}

struct ExperimentConfig {
  // scenario
  std::size_t antennas = 32;
  std::size_t users = 2;
  std::size_t tau = 31;
  PilotKind pilot = PilotKind::zadoff_chu;
  std::size_t pilot_root = 1;
  std::string constellation = "qam16";
  bool iid = false;
  double azimuth0_deg = -45.0;
  double separation_deg = 30.0;
  double spread_deg = 30.0;
  double spacing_wavelengths = 0.5;
  // sweep
  std::vector<double> snr_grid_db{0.0};
  std::vector<std::size_t> antenna_sweep;  // empty: {antennas}
  std::vector<std::size_t> user_sweep;     // empty: {users}
  std::size_t antennas_per_user = 0;       // > 0 with user_sweep: M = K * ratio
  // run
  std::vector<ReceiverKind> receivers{ReceiverKind::mmse};
  std::vector<Strategy> detectors{Strategy::jd};
  std::vector<std::size_t> njd_points{3};
  std::size_t trials = 100;
  SymbolMode symbol_mode = SymbolMode::uniform_random;
  std::size_t symbols_per_trial = 16;
  std::uint64_t master_seed = 1;
  CsiMode csi = CsiMode::estimated;
  std::size_t table_budget = 4096;
  std::size_t threads = 0;  // 0: ONEBIT_THREADS or hardware concurrency
  bool per_ue = false;
  std::string cache_dir;
  std::string output;

  void validate() const {
    if (trials < 1) throw ConfigError("config: trials must be >= 1");
    if (snr_grid_db.empty()) throw ConfigError("config: snr_db grid is empty");
    if (receivers.empty() && detectors.empty()) throw ConfigError("config: nothing to run");
    if (symbol_mode == SymbolMode::uniform_random && symbols_per_trial < 1)
      throw ConfigError("config: symbols_per_trial must be >= 1");
    for (auto k : user_sweep.empty() ? std::vector<std::size_t>{users} : user_sweep)
      if (tau < k) throw ConfigError("config: tau must be >= K");
    if (njd_points.empty()) throw ConfigError("config: njd_n list is empty");
  }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    T out{};
    if constexpr (std::is_floating_point_v<T>) {
      out = static_cast<T>(std::stod(v, &used));
    } else {
      if (!v.empty() && v.front() == '-') throw std::invalid_argument("negative");
      out = static_cast<T>(std::stoull(v, &used));
    }
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: bad value '" + v + "' for " + key);
  }
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  for (const auto& p : split_list(v)) out.push_back(parse_number<T>(key, p));
  return out;
}

inline bool parse_bool(const std::string& key, std::string v) {
  boost::to_lower(v);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: bad boolean '" + v + "' for " + key);
}

inline PilotKind parse_pilot_kind(const std::string& s) {
  if (s == "zadoff_chu" || s == "zc") return PilotKind::zadoff_chu;
  if (s == "dft") return PilotKind::dft;
  throw ConfigError("config: unknown pilot kind '" + s + "'");
}

}  // namespace detail

/// Parses the INI experiment format (sections [scenario], [sweep], [run]).
/// Unknown sections or keys are rejected so typos do not silently fall back
/// to defaults.
inline ExperimentConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    for (const auto& [key, node] : body) {
      const std::string v = boost::trim_copy(node.data());
      const std::string name = section + "." + key;
      if (section == "scenario") {
        if (key == "antennas") c.antennas = detail::parse_number<std::size_t>(name, v);
        else if (key == "users") c.users = detail::parse_number<std::size_t>(name, v);
        else if (key == "tau") c.tau = detail::parse_number<std::size_t>(name, v);
        else if (key == "pilot") c.pilot = detail::parse_pilot_kind(v);
        else if (key == "pilot_root") c.pilot_root = detail::parse_number<std::size_t>(name, v);
        else if (key == "constellation") c.constellation = v;
        else if (key == "iid") c.iid = detail::parse_bool(name, v);
        else if (key == "azimuth0_deg") c.azimuth0_deg = detail::parse_number<double>(name, v);
        else if (key == "separation_deg") c.separation_deg = detail::parse_number<double>(name, v);
        else if (key == "spread_deg") c.spread_deg = detail::parse_number<double>(name, v);
        else if (key == "spacing") c.spacing_wavelengths = detail::parse_number<double>(name, v);
        else throw ConfigError("config: unknown key " + name);
      } else if (section == "sweep") {
        if (key == "snr_db") c.snr_grid_db = detail::parse_list<double>(name, v);
        else if (key == "antennas") c.antenna_sweep = detail::parse_list<std::size_t>(name, v);
        else if (key == "users") c.user_sweep = detail::parse_list<std::size_t>(name, v);
        else if (key == "antennas_per_user") c.antennas_per_user = detail::parse_number<std::size_t>(name, v);
        else throw ConfigError("config: unknown key " + name);
      } else if (section == "run") {
        if (key == "receivers") {
          c.receivers.clear();
          for (const auto& s : detail::split_list(v)) c.receivers.push_back(parse_receiver_kind(s));
        } else if (key == "detectors") {
          c.detectors.clear();
          for (const auto& s : detail::split_list(v)) c.detectors.push_back(parse_strategy(s));
        } else if (key == "njd_n") c.njd_points = detail::parse_list<std::size_t>(name, v);
        else if (key == "trials") c.trials = detail::parse_number<std::size_t>(name, v);
        else if (key == "symbol_mode") c.symbol_mode = parse_symbol_mode(v);
        else if (key == "symbols_per_trial") c.symbols_per_trial = detail::parse_number<std::size_t>(name, v);
        else if (key == "master_seed") c.master_seed = detail::parse_number<std::uint64_t>(name, v);
        else if (key == "csi_mode") c.csi = parse_csi_mode(v);
        else if (key == "table_budget") c.table_budget = detail::parse_number<std::size_t>(name, v);
        else if (key == "threads") c.threads = detail::parse_number<std::size_t>(name, v);
        else if (key == "per_ue") c.per_ue = detail::parse_bool(name, v);
        else if (key == "cache_dir") c.cache_dir = v;
        else if (key == "output") c.output = v;
        else throw ConfigError("config: unknown key " + name);
      } else {
        throw ConfigError("config: unknown section [" + section + "]");
      }
    }
  }
  c.validate();
  return c;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline PilotBook make_pilots(PilotKind kind, std::size_t tau, std::size_t users, std::size_t root) {
  return kind == PilotKind::dft ? dft_pilots(tau, users) : zadoff_chu_pilots(tau, users, root);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// One (M, K) point of the sweep.
struct GridShape {
  std::size_t antennas;
  std::size_t users;
};

inline std::vector<GridShape> grid_shapes(const ExperimentConfig& c) {
  std::vector<GridShape> out;
  const auto users = c.user_sweep.empty() ? std::vector<std::size_t>{c.users} : c.user_sweep;
  for (auto k : users) {
    if (!c.user_sweep.empty() && c.antennas_per_user > 0) {
      out.push_back({k * c.antennas_per_user, k});
      continue;
    }
    const auto ants = c.antenna_sweep.empty() ? std::vector<std::size_t>{c.antennas} : c.antenna_sweep;
    for (auto m : ants) out.push_back({m, k});
  }
  return out;
}

inline ScenarioParams scenario_params(const ExperimentConfig& c, const GridShape& g, double rho) {
  ScenarioParams p;
  p.antennas = g.antennas;
  p.users = g.users;
  p.rho = rho;
  p.azimuth0_deg = c.azimuth0_deg;
  p.separation_deg = c.separation_deg;
  p.spread_deg = c.spread_deg;
  p.spacing_wavelengths = c.spacing_wavelengths;
  p.iid = c.iid;
  return p;
}

/// One output row identity: a receiver paired with a detector (and N for N-JD).
struct RowKey {
  std::string receiver;  // "none" for RML, which works on r directly
  Strategy detector;
  std::size_t n_points = 0;
};

inline std::vector<RowKey> row_keys(const ExperimentConfig& c) {
  std::vector<RowKey> keys;
  for (auto r : c.receivers)
    for (auto d : c.detectors) {
      if (d == Strategy::rml) continue;
      if (d == Strategy::n_jd)
        for (auto n : c.njd_points) keys.push_back({to_string(r), d, n});
      else
        keys.push_back({to_string(r), d, 0});
    }
  for (auto d : c.detectors)
    if (d == Strategy::rml) keys.push_back({"none", d, 0});
  return keys;
}

/// Everything a trial needs that depends only on (scenario, pilots, rho).
/// Built once per grid point and shared read-only by all trials.
struct PointContext {
  ChannelScenario scenario;
  PilotBook book;
  Constellation constellation;
  std::shared_ptr<const QuantizedMoments> moments;
  std::shared_ptr<const BlmmseEstimator> estimator;
  std::map<ReceiverKind, ExpectationTable> tables;

  [[nodiscard]] const ExpectationTable& table(ReceiverKind k) const { return tables.at(table_kind_for(k)); }
};

inline PointContext make_point_context(const ExperimentConfig& c, const GridShape& g, double rho) {
  ChannelScenario sc = build_scenario(scenario_params(c, g, rho));
  PilotBook book = make_pilots(c.pilot, c.tau, g.users, c.pilot_root);
  auto moments = std::make_shared<const QuantizedMoments>(sc, book);
  auto estimator = std::make_shared<const BlmmseEstimator>(*moments);
  PointContext ctx{std::move(sc), std::move(book), constellation_by_label(c.constellation), moments, estimator, {}};
  TableOptions opt;
  opt.budget = c.table_budget;
  for (auto r : c.receivers) {
    const ReceiverKind tk = table_kind_for(r);
    if (!ctx.tables.count(tk))
      ctx.tables.emplace(tk, cached_expectation_table(*moments, *estimator, ctx.constellation, tk, c.cache_dir, opt));
  }
  return ctx;
}

struct RowCounts {
  std::size_t errors = 0;
  std::vector<std::size_t> per_ue_errors;
  double seconds = 0.0;
};

inline std::size_t vectors_per_trial(const ExperimentConfig& c, std::size_t order, std::size_t users) {
  if (c.symbol_mode == SymbolMode::uniform_random) return c.symbols_per_trial;
  return table_size(order, users, std::numeric_limits<std::size_t>::max());
}

/// One channel and pilot-noise draw, one BLMMSE estimate, then for every
/// tested symbol vector a fresh data-noise draw followed by combining and
/// detection with every configured (receiver, detector) pair. Returns error
/// counts per row key, in `keys` order.
///
/// The trial's random stream has four independent substreams: channel,
/// pilot noise, symbol choice and data noise.
inline std::vector<RowCounts> run_trial(const PointContext& ctx, const ExperimentConfig& c,
                                        const std::vector<RowKey>& keys, const Rng& trial_rng) {
  using clock = std::chrono::steady_clock;
  const auto& sc = ctx.scenario;
  const std::size_t users = sc.users();
  const double rho = sc.rho();

  const ComplexMatrix h = sample_channel(sc, trial_rng.substream(0)).H;
  Rng pilot_rng = trial_rng.substream(1);
  const QuantizedObservation pilot = pilot_phase(sc, ctx.book, h, pilot_rng);
  const ComplexMatrix h_hat = ctx.estimator->estimate(pilot.r).H_hat;
  const ComplexMatrix& h_eff = c.csi == CsiMode::perfect ? h : h_hat;

  std::map<ReceiverKind, Receiver> receivers;
  for (auto r : c.receivers) {
    if (r == ReceiverKind::lmmd)
      receivers.emplace(r, lmmd_receiver(h_eff, ctx.table(ReceiverKind::lmmd), rho, c.csi));
    else
      receivers.emplace(r, conventional_receiver(h_eff, rho, r, c.csi));
  }
  bool want_rml = false;
  for (const auto& k : keys) want_rml = want_rml || k.detector == Strategy::rml;
  RmlCandidates rml;
  if (want_rml) rml = rml_prepare(h_eff, ctx.constellation, c.table_budget);

  std::vector<RowCounts> counts(keys.size());
  for (auto& rc : counts) rc.per_ue_errors.assign(users, 0);

  const std::size_t order = ctx.constellation.size();
  const std::size_t total = table_size(order, users, std::numeric_limits<std::size_t>::max());
  const std::size_t vectors = vectors_per_trial(c, order, users);
  Rng symbol_rng = trial_rng.substream(2);
  Rng noise_rng = trial_rng.substream(3);

  std::vector<std::size_t> truth(users);
  ComplexVector x(static_cast<Eigen::Index>(users));
  std::map<ReceiverKind, ComplexVector> soft;
  for (std::size_t v = 0; v < vectors; ++v) {
    std::size_t n = c.symbol_mode == SymbolMode::enumerate_all ? v : symbol_rng.uniform_index(total);
    for (std::size_t k = users; k-- > 0;) {
      truth[k] = n % order;
      n /= order;
      x(static_cast<Eigen::Index>(k)) = ctx.constellation[truth[k]];
    }
    const QuantizedObservation obs = data_phase(sc, h, x, noise_rng);
    for (const auto& [kind, rx] : receivers) soft[kind] = combine(rx, obs.r);

    for (std::size_t i = 0; i < keys.size(); ++i) {
      const RowKey& key = keys[i];
      const auto t0 = clock::now();
      Decision d;
      if (key.detector == Strategy::rml) {
        d = rml_detect(obs.r, rml, rho);
      } else {
        const ReceiverKind kind = parse_receiver_kind(key.receiver);
        const ExpectationTable& table = ctx.table(kind);
        const ComplexVector& xh = soft.at(kind);
        switch (key.detector) {
          case Strategy::e_sud:
          case Strategy::h_sud: d = single_ue_decision(xh, table, key.detector); break;
          case Strategy::genie: d = genie_decision(xh, table, truth); break;
          case Strategy::jd: d = jd(xh, table); break;
          case Strategy::n_jd: d = n_jd(xh, table, key.n_points); break;
          case Strategy::rml: break;
        }
      }
      counts[i].seconds += std::chrono::duration<double>(clock::now() - t0).count();
      for (std::size_t k = 0; k < users; ++k)
        if (d.indices[k] != truth[k]) {
          ++counts[i].errors;
          ++counts[i].per_ue_errors[k];
        }
    }
  }
  return counts;
}

struct SerRow {
  double snr_db = 0.0;
  std::size_t M = 0;
  std::size_t K = 0;
  std::size_t tau = 0;
  std::string receiver;
  std::string detector;
  std::size_t N = 0;
  std::size_t trials = 0;
  std::size_t symbol_vectors_per_trial = 0;
  std::size_t errors = 0;
  std::size_t symbols_tested = 0;
  double ser = 0.0;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::vector<std::size_t> per_ue_errors;
};

struct SerTable {
  std::vector<SerRow> rows;
};

/// Runs every (M, K) shape x SNR point x (receiver, detector) row.
/// Trials run in parallel; each uses the stream derived from
/// (master seed, point index, trial index), and counts are reduced in trial
/// order, so the table does not depend on the thread count.
inline SerTable run_sweep(const ExperimentConfig& c, std::ostream* progress = nullptr) {
  c.validate();
  const auto keys = row_keys(c);
  const std::size_t threads = std::getenv("ONEBIT_THREADS") || c.threads == 0 ? thread_count() : c.threads;
  SerTable table;
  std::uint64_t point = 0;
  for (const auto& shape : grid_shapes(c)) {
    for (double snr_db : c.snr_grid_db) {
      const auto start = std::chrono::steady_clock::now();
      const PointContext ctx = make_point_context(c, shape, db_to_linear(snr_db));
      std::vector<std::vector<RowCounts>> per_trial(c.trials);
      parallel_for(
          c.trials,
          [&](std::size_t t) { per_trial[t] = run_trial(ctx, c, keys, Rng::derive(c.master_seed, {point, t})); },
          threads);
      const std::size_t vectors = vectors_per_trial(c, ctx.constellation.size(), shape.users);
      for (std::size_t i = 0; i < keys.size(); ++i) {
        SerRow row;
        row.snr_db = snr_db;
        row.M = shape.antennas;
        row.K = shape.users;
        row.tau = c.tau;
        row.receiver = keys[i].receiver;
        row.detector = to_string(keys[i].detector);
        row.N = keys[i].n_points;
        row.trials = c.trials;
        row.symbol_vectors_per_trial = vectors;
        row.per_ue_errors.assign(shape.users, 0);
        for (const auto& trial : per_trial) {
          row.errors += trial[i].errors;
          row.wall_time_s += trial[i].seconds;
          for (std::size_t k = 0; k < shape.users; ++k) row.per_ue_errors[k] += trial[i].per_ue_errors[k];
        }
        row.symbols_tested = c.trials * vectors * shape.users;
        row.ser = static_cast<double>(row.errors) / static_cast<double>(row.symbols_tested);
        row.seed = c.master_seed;
        table.rows.push_back(std::move(row));
      }
      if (progress) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        *progress << "M=" << shape.antennas << " K=" << shape.users << " snr_db=" << snr_db << " done in " << secs
                  << " s\n";
      }
      ++point;
    }
  }
  return table;
}

/// Minimum SER over the SNR grid for one (M, K, receiver, detector, N) series.
/// Returns NaN when the series is absent.
inline double min_ser_over_snr(const SerTable& t, std::size_t m, std::size_t k, const std::string& receiver,
                               const std::string& detector, std::size_t n_points = 0) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : t.rows)
    if (r.M == m && r.K == k && r.receiver == receiver && r.detector == detector && r.N == n_points)
      if (std::isnan(best) || r.ser < best) best = r.ser;
  return best;
}

inline const SerRow* find_row(const SerTable& t, double snr_db, std::size_t m, const std::string& receiver,
                              const std::string& detector, std::size_t n_points = 0) {
  for (const auto& r : t.rows)
    if (r.snr_db == snr_db && r.M == m && r.receiver == receiver && r.detector == detector && r.N == n_points)
      return &r;
  return nullptr;
}

// ---------------------------------------------------------------------------
// CSV

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"snr_db", "M",      "K",      "tau",   "receiver",
                                             "detector", "N",    "trials", "symbol_vectors_per_trial",
                                             "errors", "symbols_tested", "ser", "seed", "wall_time_s"};
  return cols;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline void write_csv(const SerTable& t, std::ostream& out, bool per_ue = false) {
  std::size_t max_users = 0;
  if (per_ue)
    for (const auto& r : t.rows) max_users = std::max(max_users, r.per_ue_errors.size());
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  for (std::size_t k = 0; k < max_users; ++k) out << ",errors_ue" << (k + 1);
  out << "\r\n";
  for (const auto& r : t.rows) {
    out << format_double(r.snr_db) << ',' << r.M << ',' << r.K << ',' << r.tau << ',' << csv_quote(r.receiver) << ','
        << csv_quote(r.detector) << ',' << r.N << ',' << r.trials << ',' << r.symbol_vectors_per_trial << ','
        << r.errors << ',' << r.symbols_tested << ',' << format_double(r.ser) << ',' << r.seed << ','
        << format_double(r.wall_time_s);
    for (std::size_t k = 0; k < max_users; ++k)
      out << ',' << (k < r.per_ue_errors.size() ? std::to_string(r.per_ue_errors[k]) : std::string());
    out << "\r\n";
  }
}

inline void emit_csv(const SerTable& t, const std::filesystem::path& path, bool per_ue = false) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_csv(t, out, per_ue);
  out.flush();
  if (!out) throw std::runtime_error("error writing '" + path.string() + "'");
}

/// Splits RFC-4180 text into records of fields.
inline std::vector<std::vector<std::string>> parse_csv_records(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  char ch;
  while (in.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (ch == '\r') {
      if (in.peek() == '\n') in.get(ch);
      record.push_back(std::move(field));
      records.push_back(std::move(record));
      field.clear();
      record.clear();
      any = false;
    } else if (ch == '\n') {
      record.push_back(std::move(field));
      records.push_back(std::move(record));
      field.clear();
      record.clear();
      any = false;
    } else {
      field += ch;
    }
  }
  if (quoted) throw std::runtime_error("csv: unterminated quoted field");
  if (any) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

inline SerTable read_csv(std::istream& in) {
  const auto records = parse_csv_records(in);
  if (records.empty()) throw std::runtime_error("csv: missing header");
  const auto& cols = csv_columns();
  if (records.front().size() < cols.size() ||
      !std::equal(cols.begin(), cols.end(), records.front().begin()))
    throw std::runtime_error("csv: unexpected header");
  SerTable t;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() < cols.size()) throw std::runtime_error("csv: short record on line " + std::to_string(i + 1));
    SerRow r;
    r.snr_db = std::stod(f[0]);
    r.M = std::stoull(f[1]);
    r.K = std::stoull(f[2]);
    r.tau = std::stoull(f[3]);
    r.receiver = f[4];
    r.detector = f[5];
    r.N = std::stoull(f[6]);
    r.trials = std::stoull(f[7]);
    r.symbol_vectors_per_trial = std::stoull(f[8]);
    r.errors = std::stoull(f[9]);
    r.symbols_tested = std::stoull(f[10]);
    r.ser = std::stod(f[11]);
    r.seed = std::stoull(f[12]);
    r.wall_time_s = std::stod(f[13]);
    for (std::size_t k = cols.size(); k < f.size(); ++k)
      if (!f[k].empty()) r.per_ue_errors.push_back(std::stoull(f[k]));
    t.rows.push_back(std::move(r));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Expectation table dump

/// Writes (l_1..l_K, k, re, im) with 1-based symbol and UE indices.
inline void write_table_csv(const ExpectationTable& table, std::ostream& out) {
  for (std::size_t k = 0; k < table.users(); ++k) out << "l_" << (k + 1) << ',';
  out << "k,re,im\r\n";
  for (std::size_t n = 0; n < table.size(); ++n) {
    const auto idx = table.indices(n);
    for (std::size_t k = 0; k < table.users(); ++k) {
      for (auto l : idx) out << (l + 1) << ',';
      const cplx e = table.entries()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
      out << (k + 1) << ',' << format_double(e.real()) << ',' << format_double(e.imag()) << "\r\n";
    }
  }
}

}  // namespace onebit
