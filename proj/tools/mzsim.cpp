// Copyright 2026 The mzsim Authors
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

#include <CLI11.hpp>

#include <iostream>

#include "mzsim/commands.hpp"

namespace {

using mzsim::cli::CommandOptions;

void add_scan_options(CLI::App* cmd, CommandOptions& opt, std::string& positional) {
  cmd->add_option("config_name", positional, "bundled config name or scenario file");
  cmd->add_option("--config", opt.config, "bundled config name or scenario file");
  cmd->add_option("--out", opt.out, "output directory")->default_val(".");
  cmd->add_option("--seed", opt.seed, "RNG seed, overrides the config");
  cmd->add_option("--grid-step", opt.grid_step, "grid step with unit, e.g. \"10 nm\"");
  cmd->add_flag("--no-noise", opt.no_noise, "write exact probabilities instead of sampled counts");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mzsim;
  CLI::App app{"Entangled-photon Mach-Zehnder simulator"};
  app.require_subcommand(1);

  CommandOptions opt;
  std::string positional;
  auto* fringe = app.add_subcommand("fringe-scan", "dL2 fringe scan");
  auto* hom = app.add_subcommand("hom-scan", "HOM dip versus dL1");
  auto* envelope = app.add_subcommand("envelope-scan", "fringe amplitude envelope versus dL2");
  auto* ghz = app.add_subcommand("ghz-noon", "N-photon GHZ through the interferometer");
  for (auto* cmd : {fringe, hom, envelope, ghz}) add_scan_options(cmd, opt, positional);
  ghz->add_option("--n", opt.photons, "photon number")->default_val(2);

  cli::FitOptions fit_opt;
  std::string model = "sinusoid";
  auto* fit = app.add_subcommand("fit", "fit one column of a CSV");
  fit->add_option("--in", fit_opt.in, "input CSV")->required();
  fit->add_option("--column", fit_opt.column, "column to fit")->required();
  fit->add_option("--model", model, "sinusoid, gaussian or gaussian-dip")
      ->check(CLI::IsMember({"sinusoid", "gaussian", "gaussian-dip"}));
  fit->add_option("--out", fit_opt.out, "output directory")->default_val(".");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kParseFailure;
  }
  if (!positional.empty()) {
    if (!opt.config.empty() && opt.config != positional) {
      std::cerr << "error: config given both positionally and with --config\n";
      return cli::kParseFailure;
    }
    opt.config = positional;
  }

  try {
    if (fringe->parsed()) cli::fringe_scan(opt);
    if (hom->parsed()) cli::hom_scan(opt);
    if (envelope->parsed()) cli::envelope_scan(opt);
    if (ghz->parsed()) cli::ghz_noon(opt);
    if (fit->parsed()) {
      fit_opt.model = model == "sinusoid" ? FitModel::Sinusoid
                      : model == "gaussian" ? FitModel::GaussianEnvelope
                                            : FitModel::GaussianDip;
      cli::fit_csv(fit_opt);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return cli::kParseFailure;
  } catch (const cli::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return cli::kParseFailure;
  } catch (const cli::FitFailed& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return cli::kFitFailure;
  } catch (const Error& e) {
    std::cerr << (e.is_fit_failure() ? "fit error: " : "runtime error: ") << e.what() << '\n';
    return e.is_fit_failure() ? cli::kFitFailure : cli::kRuntimeFailure;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return cli::kRuntimeFailure;
  }
  return cli::kOk;
}
