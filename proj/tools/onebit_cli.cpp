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
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "onebit/sim_harness.hpp"
#include "onebit/validation.hpp"

namespace {

constexpr int kExitValidationFailed = 1;
constexpr int kExitError = 2;

int run_ser_sweep(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out) {
  onebit::ExperimentConfig cfg = onebit::load_config(config_path);
  if (seed) cfg.master_seed = *seed;
  if (!out.empty()) cfg.output = out;
  const onebit::SerTable table = onebit::run_sweep(cfg, &std::cerr);
  if (cfg.output.empty() || cfg.output == "-")
    onebit::write_csv(table, std::cout, cfg.per_ue);
  else
    onebit::emit_csv(table, cfg.output, cfg.per_ue);
  return 0;
}

int run_expected_values(const std::string& config_path, const std::string& receiver, const std::string& out) {
  const onebit::ExperimentConfig cfg = onebit::load_config(config_path);
  const auto kind = onebit::table_kind_for(onebit::parse_receiver_kind(receiver));
  const auto shape = onebit::grid_shapes(cfg).front();
  const double rho = onebit::db_to_linear(cfg.snr_grid_db.front());
  const onebit::QuantizedMoments moments(onebit::build_scenario(onebit::scenario_params(cfg, shape, rho)),
                                         onebit::make_pilots(cfg.pilot, cfg.tau, shape.users, cfg.pilot_root));
  const onebit::BlmmseEstimator estimator(moments);
  onebit::TableOptions opt;
  opt.budget = cfg.table_budget;
  const auto table = onebit::cached_expectation_table(moments, estimator, onebit::constellation_by_label(cfg.constellation),
                                                      kind, cfg.cache_dir, opt);
  if (out == "-") {
    onebit::write_table_csv(table, std::cout);
    return 0;
  }
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + out + "' for writing");
  onebit::write_table_csv(table, file);
  file.flush();
  if (!file) throw std::runtime_error("error writing '" + out + "'");
  return 0;
}

int run_validate(const std::string& profile, const std::string& out) {
  const nlohmann::json report = onebit::validate(profile);
  const std::string text = report.dump(2);
  if (out.empty() || out == "-") {
    std::cout << text << '\n';
  } else {
    std::ofstream file(out, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open '" + out + "' for writing");
    file << text << '\n';
    if (!file) throw std::runtime_error("error writing '" + out + "'");
  }
  return report.at("passed").get<bool>() ? 0 : kExitValidationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uplink detection with 1-bit ADCs: SER sweeps, expectation tables, oracle validation"};
  app.require_subcommand(1);

  std::string config_path, out, receiver, profile = "desk";
  std::uint64_t seed_value = 0;

  auto* sweep = app.add_subcommand("ser-sweep", "Run a Monte Carlo SER sweep and write CSV");
  sweep->add_option("--config", config_path, "Experiment INI file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = sweep->add_option("--seed", seed_value, "Override the master seed");
  sweep->add_option("--out", out, "Output CSV path ('-' for stdout); overrides run.output");

  auto* expected = app.add_subcommand("expected-values", "Dump the closed-form expectation table as CSV");
  expected->add_option("--config", config_path, "Experiment INI file")->required()->check(CLI::ExistingFile);
  expected->add_option("--receiver", receiver, "mrc, zf, mmse or lmmd")->required();
  expected->add_option("--out", out, "Output CSV path ('-' for stdout)")->required();

  auto* val = app.add_subcommand("validate", "Run the Monte Carlo oracle checks and print a JSON report");
  val->add_option("--profile", profile, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  val->add_option("--out", out, "Write the JSON report here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed())
      return run_ser_sweep(config_path, seed_opt->count() ? std::optional<std::uint64_t>(seed_value) : std::nullopt,
                           out);
    if (expected->parsed()) return run_expected_values(config_path, receiver, out);
    if (val->parsed()) return run_validate(profile, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
