// Copyright 2026 The collapse-sim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// collapse: simulate | verify | export.
// Errors are reported as one JSON line on stderr with a nonzero exit status.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "collapse/app.hpp"

namespace {

constexpr int kExitCriteriaFailed = 1;
constexpr int kExitError = 2;

int report_error(std::string_view code, const std::string& message) {
  collapse::Json j;
  j["error"] = std::string(code);
  j["message"] = message;
  std::cerr << j.dump() << '\n';
  return kExitError;
}

/// Registers one string flag per config key on `cmd`.
void add_config_flags(CLI::App* cmd, std::optional<std::string>& config_path,
                      std::map<std::string, std::string>& values) {
  cmd->add_option("--config", config_path, "key = value config file");
  for (const auto& key : collapse::io::option_keys())
    cmd->add_option("--" + key, values[key], "config key " + key);
}

collapse::io::RunConfig build_config(const std::optional<std::string>& path,
                                     const std::map<std::string, std::string>& values,
                                     const CLI::App* cmd) {
  collapse::io::RunConfig c = path ? collapse::io::load_config(*path) : collapse::io::RunConfig{};
  for (const auto& key : collapse::io::option_keys())
    if (cmd->count("--" + key) > 0) collapse::io::set_option(c, key, values.at(key));
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collapse-process simulator: GRW, Diosi and hybrid trajectories"};
  app.require_subcommand(1);

  std::optional<std::string> sim_config, ver_config;
  std::map<std::string, std::string> sim_values, ver_values;
  auto* simulate = app.add_subcommand("simulate", "run an ensemble or the master equation");
  add_config_flags(simulate, sim_config, sim_values);
  auto* verify = app.add_subcommand("verify", "run the acceptance criteria, write report.json");
  add_config_flags(verify, ver_config, ver_values);

  std::string archive_path, output_path;
  double time = 0.0;
  std::size_t stride = 1;
  auto* exporter = app.add_subcommand("export", "density CSV at one sample time of an archive");
  exporter->add_option("--archive", archive_path, "trajectories.cldn to read")->required();
  exporter->add_option("--time", time, "sample time")->required();
  exporter->add_option("--stride", stride, "grid decimation")->check(CLI::PositiveNumber);
  exporter->add_option("--output", output_path, "CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what());
  }

  const std::size_t workers = collapse::default_worker_count();
  try {
    if (*simulate) {
      auto c = build_config(sim_config, sim_values, simulate);
      if (c.model == collapse::io::Model::verify)
        throw collapse::Error(collapse::ErrorCode::config_violation,
                              "model verify is run with the verify subcommand");
      const auto out = collapse::app::run(c, workers);
      for (const auto& f : out.files) std::cout << f.string() << '\n';
      return 0;
    }
    if (*verify) {
      auto c = build_config(ver_config, ver_values, verify);
      c.model = collapse::io::Model::verify;
      const auto out = collapse::app::run(c, workers, &std::cout);
      for (const auto& f : out.files) std::cout << f.string() << '\n';
      return out.all_pass ? 0 : kExitCriteriaFailed;
    }
    if (output_path.empty()) {
      std::ifstream in(archive_path, std::ios::binary);
      collapse::require(static_cast<bool>(in), collapse::ErrorCode::io_failure,
                        "cannot open " + archive_path);
      collapse::io::export_density_csv(collapse::io::read_archive(in), time, std::cout, stride);
    } else {
      collapse::app::export_density(archive_path, time, output_path, stride);
    }
    return 0;
  } catch (const collapse::Error& e) {
    std::string msg = e.what();
    const std::string prefix = std::string(collapse::to_string(e.code())) + ": ";
    if (msg.starts_with(prefix)) msg.erase(0, prefix.size());
    return report_error(collapse::to_string(e.code()), msg);
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
}
