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

// Command implementations behind the mzsim tool. Each command writes
// scan.csv and report.txt into the output directory.

#pragma once

#include <fmt/format.h>
#include <fmt/os.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mzsim/analysis.hpp"
#include "mzsim/config.hpp"
#include "mzsim/experiment.hpp"
#include "mzsim/presets.hpp"

namespace mzsim::cli {

enum ExitCode : int { kOk = 0, kParseFailure = 1, kRuntimeFailure = 2, kFitFailure = 3 };

struct CommandOptions {
  /// Bundled preset name or path to a scenario document; empty picks the command default.
  std::string config;
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  /// Grid step with unit, e.g. "10 nm".
  std::optional<std::string> grid_step;
  bool no_noise = false;
  int photons = 2;
};

struct FitOptions {
  std::filesystem::path in;
  std::string column;
  FitModel model = FitModel::Sinusoid;
  std::filesystem::path out = ".";
};

inline constexpr std::string_view kConvention =
    "BS amplitudes: transmitted sqrt(T), reflected i*sqrt(1-T); PBS: H transmitted (P4->P6), "
    "V reflected (P4->P5); HWP at 45 deg on P6; dL2 delay on P6, phase exp(+i 2 pi dL2/lambda) "
    "per photon; BS2 transmits P6->P7 and P5->P8; secondary splitters: P7->D1 transmitted, "
    "P7->D2 reflected, P8->D4 transmitted, P8->D3 reflected";

/// Raised when a fit in the report stage fails after outputs were written.
class FitFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for unreadable inputs; reported as a parse failure.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string num(double v) { return fmt::format("{:.10g}", v); }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ScenarioConfig load_config(const std::string& name_or_path, std::string_view fallback) {
  const std::string name = name_or_path.empty() ? std::string(fallback) : name_or_path;
  if (auto preset = find_preset(name)) return parse_scenario(*preset);
  if (!std::filesystem::exists(name))
    throw InputError("'" + name + "' is neither a bundled config nor a readable file");
  return parse_scenario(read_file(name));
}

inline GridSpec resolve_grid(const ScenarioConfig& cfg, const CommandOptions& opt, GridSpec fallback) {
  GridSpec g = cfg.grid_or(fallback);
  if (opt.grid_step) {
    std::string why;
    const auto step = parse_quantity(*opt.grid_step, Dimension::Length, &why);
    if (!step) throw ParseError(ParseErrc::UnitMismatch, 0, 0, "--grid-step", why);
    if (!(*step > 0.0)) throw ParseError(ParseErrc::RangeError, 0, 0, "--grid-step", "step must be positive");
    g.step_um = *step;
  }
  return g;
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(const std::vector<double>& values) { rows_.push_back(values); }

  void write(const std::filesystem::path& path) const {
    auto f = fmt::output_file(path.string());
    for (std::size_t i = 0; i < header_.size(); ++i) f.print("{}{}", i ? "," : "", header_[i]);
    f.print("\n");
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) f.print("{}{}", i ? "," : "", num(r[i]));
      f.print("\n");
    }
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

class Report {
 public:
  void line(std::string_view key, std::string_view value) { text_ += fmt::format("{}: {}\n", key, value); }
  void line(std::string_view key, double value) { line(key, num(value)); }
  void estimate(std::string_view key, const Estimate& e, double scale = 1.0) {
    line(key, fmt::format("{} +- {}", num(e.value * scale), num(e.error * scale)));
  }
  void section(std::string_view name) { text_ += fmt::format("\n[{}]\n", name); }
  void failure(std::string_view what, const std::string& why) {
    line("fit_failed", fmt::format("{} ({})", what, why));
    failures_.push_back(std::string(what));
  }
  const std::vector<std::string>& failures() const { return failures_; }

  void write(const std::filesystem::path& path) const {
    auto f = fmt::output_file(path.string());
    f.print("{}", text_);
  }

 private:
  std::string text_;
  std::vector<std::string> failures_;
};

inline void header(Report& rep, std::string_view command, const std::string& config, const Scenario& sc,
                   bool noise) {
  rep.line("command", command);
  rep.line("config", config);
  rep.line("seed", std::to_string(sc.seed));
  rep.line("noise", noise ? "poisson" : "off");
  rep.line("convention", kConvention);
  rep.line("lambda0_nm", sc.spectral.lambda0_um * 1e3);
  rep.line("spectral_model", sc.spectral.enabled ? "enabled" : "disabled");
  rep.line("xi_single_um", sc.spectral.xi_single_um);
  rep.line("xi_pump_um", sc.spectral.xi_pump_um);
  rep.line("delta_L1_um", sc.delta_L1_um);
  rep.line("werner_p", sc.werner_p);
  rep.line("v_floor", sc.v_floor);
  rep.line("coupling", sc.coupling_efficiency);
  rep.line("pair_rate_per_s", sc.pair_rate);
  rep.line("integration_time_s", sc.integration_time_s);
}

inline void report_fringe(Report& rep, std::string_view channel, const Series& data) {
  rep.section(fmt::format("fit {}", channel));
  try {
    const FitReport f = fit_fringe(data);
    rep.line("model", to_string(f.model));
    rep.estimate("period_nm", f.period, 1e3);
    rep.estimate("phase_rad", f.phase);
    rep.estimate("offset", f.offset);
    rep.estimate("amplitude", f.amplitude);
    rep.estimate("visibility", f.visibility);
    rep.line("residual_rms", f.residual_rms);
  } catch (const Error& e) {
    if (!e.is_fit_failure() && e.code() != Errc::Degenerate) throw;
    rep.failure(channel, e.what());
  }
}

inline void report_envelope(Report& rep, std::string_view channel, const Series& data, FitModel model) {
  rep.section(fmt::format("fit {}", channel));
  try {
    const FitReport f = fit_envelope(data, model);
    rep.line("model", to_string(f.model));
    rep.estimate("center_um", f.center);
    rep.estimate("sigma_um", f.sigma);
    rep.estimate("fwhm_um", f.fwhm);
    rep.estimate("offset", f.offset);
    rep.estimate("amplitude", f.amplitude);
    rep.estimate("visibility", f.visibility);
    rep.line("residual_rms", f.residual_rms);
  } catch (const Error& e) {
    if (!e.is_fit_failure() && e.code() != Errc::Degenerate) throw;
    rep.failure(channel, e.what());
  }
}

inline void finish(const Report& rep, const std::filesystem::path& out) {
  rep.write(out / "report.txt");
  if (!rep.failures().empty()) throw FitFailed("fit failed for " + rep.failures().front());
}

/// Channels written and fitted for a scenario.
inline std::vector<Channel> channels_for(const Scenario& sc) {
  switch (sc.source) {
    case SourceKind::SinglePhotonPol: return {Channel::P7, Channel::P8};
    case SourceKind::EntangledPair: return {Channel::D1D2, Channel::D3D4, Channel::D2D3};
    case SourceKind::Ghz:
      if (sc.photons == 1) return {Channel::P7, Channel::P8};
      if (sc.photons == 2) return {Channel::D1D2, Channel::D3D4, Channel::D2D3};
      return {Channel::D1D2, Channel::D3D4, Channel::N7, Channel::N8};
  }
  return {};
}

inline std::string column_name(Channel c) {
  return (c == Channel::P7 || c == Channel::P8) ? std::string(to_string(c)) : "p_" + std::string(to_string(c));
}

/// Writes scan.csv and returns, per channel, the series a fit should use.
inline std::vector<std::pair<Channel, Series>> write_scan(const ScanResult& r, const std::filesystem::path& path,
                                                          bool noise) {
  const auto channels = channels_for(r.scenario);
  const bool singles_only = channels.front() == Channel::P7;
  std::vector<std::string> header{"delta_L2_um", "P7", "P8"};
  if (!singles_only)
    for (Channel c : channels) header.push_back(column_name(c));
  if (!singles_only) header.push_back("p_lost");
  if (noise) {
    for (Channel c : channels) header.push_back("n_" + std::string(to_string(c)));
    for (Channel c : channels) header.push_back("err_" + std::string(to_string(c)));
  }
  Table table(header);
  std::vector<std::pair<Channel, Series>> series;
  for (Channel c : channels) {
    Series s;
    s.absolute_sigma = noise;
    series.push_back({c, s});
  }
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const ScanPoint& p = r.points[i];
    std::vector<double> row{p.delta_L2_um, p.P7, p.P8};
    if (!singles_only) {
      for (Channel c : channels) row.push_back(p.probability(c));
      row.push_back(p.detection.lost);
    }
    if (noise) {
      for (Channel c : channels) row.push_back(static_cast<double>(r.counts[i][static_cast<int>(c)]));
      for (Channel c : channels)
        row.push_back(std::sqrt(std::max<double>(static_cast<double>(r.counts[i][static_cast<int>(c)]), 1.0)));
    }
    table.row(row);
    for (auto& [c, s] : series) {
      s.x.push_back(p.delta_L2_um);
      if (noise) {
        const double n = static_cast<double>(r.counts[i][static_cast<int>(c)]);
        s.y.push_back(n);
        s.sigma.push_back(std::sqrt(std::max(n, 1.0)));
      } else {
        // Singles-only runs report path probabilities; detection scales them by coupling.
        s.y.push_back(singles_only ? (c == Channel::P7 ? p.P7 : p.P8) : p.probability(c));
        s.sigma.push_back(1.0);
      }
    }
  }
  table.write(path);
  return series;
}

inline Scenario prepare(const ScenarioConfig& cfg, const CommandOptions& opt) {
  Scenario sc = cfg.scenario;
  if (opt.seed) sc.seed = *opt.seed;
  return sc;
}

inline void ensure_out(const std::filesystem::path& out) { std::filesystem::create_directories(out); }

inline void fringe_like(std::string_view command, const std::string& config_label, Scenario sc,
                        const CommandOptions& opt, const GridSpec& grid, Report& rep) {
  sc.delta_L2_grid_um = make_grid(grid.start_um, grid.stop_um, grid.step_um);
  const ScanResult r = scan(sc, !opt.no_noise);
  ensure_out(opt.out);
  const auto series = write_scan(r, opt.out / "scan.csv", !opt.no_noise);
  header(rep, command, config_label, sc, !opt.no_noise);
  rep.line("points", std::to_string(r.points.size()));
  for (const auto& [c, s] : series) report_fringe(rep, to_string(c), s);
}

}  // namespace detail

inline constexpr GridSpec kFringeGrid{-2.0, 2.0, 0.010};
inline constexpr GridSpec kEnvelopeGrid{-400.0, 400.0, 5.0};
inline constexpr GridSpec kHomGrid{-400.0, 400.0, 5.0};
/// Samples per envelope window; each window spans two wavelengths.
inline constexpr int kWindowSamples = 32;

inline void fringe_scan(const CommandOptions& opt) {
  const auto cfg = detail::load_config(opt.config, "paper_dl1_0");
  const Scenario sc = detail::prepare(cfg, opt);
  detail::Report rep;
  detail::fringe_like("fringe-scan", opt.config.empty() ? "paper_dl1_0" : opt.config, sc, opt,
                      detail::resolve_grid(cfg, opt, kFringeGrid), rep);
  detail::finish(rep, opt.out);
}

inline void ghz_noon(const CommandOptions& opt) {
  const auto cfg = detail::load_config(opt.config, "paper_dl1_0");
  Scenario sc = detail::prepare(cfg, opt);
  sc.source = SourceKind::Ghz;
  sc.photons = opt.photons;
  if (opt.photons < 1 || opt.photons > sc.max_photons)
    throw Error(Errc::UnsupportedN, "photon number " + std::to_string(opt.photons) + " is not supported");
  detail::Report rep;
  detail::fringe_like("ghz-noon", opt.config.empty() ? "paper_dl1_0" : opt.config, sc, opt,
                      detail::resolve_grid(cfg, opt, kFringeGrid), rep);
  rep.section("pre-BS2 state at phi = pi/4");
  const FockState s = ghz_to_noon(opt.photons, std::numbers::pi / 4.0, sc.max_photons);
  for (const auto& [occ, amp] : s.terms()) {
    std::string label;
    for (const auto& [m, k] : occ) label += fmt::format("{}{}^{}", label.empty() ? "" : " ", to_string(m), k);
    rep.line(label, fmt::format("{}{}{}i", detail::num(amp.real()), amp.imag() < 0.0 ? "-" : "+",
                                detail::num(std::abs(amp.imag()))));
  }
  rep.line("expected_period_nm", sc.spectral.lambda0_um * 1e3 / opt.photons);
  detail::finish(rep, opt.out);
}

inline void hom_scan(const CommandOptions& opt) {
  const auto cfg = detail::load_config(opt.config, "paper_hom");
  const Scenario sc = detail::prepare(cfg, opt);
  if (sc.source != SourceKind::EntangledPair) throw Error(Errc::InvalidArgument, "hom-scan needs an entangled source");
  const GridSpec g = detail::resolve_grid(cfg, opt, kHomGrid);
  const auto grid = make_grid(g.start_um, g.stop_um, g.step_um);
  Scenario probe = sc;
  probe.delta_L2_grid_um = {0.0};
  probe.validate();
  const StateEnsemble source = prepare_source(sc);
  const double both = sc.coupling_efficiency * sc.coupling_efficiency;

  std::vector<std::string> header{"delta_L1_um", "p_coinc"};
  if (!opt.no_noise) header.insert(header.end(), {"n_coinc", "err_coinc"});
  detail::Table table(header);
  Series series;
  series.absolute_sigma = !opt.no_noise;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const StateEnsemble mixed = mix_at_bs1(source, sc.v_floor * temporal_overlap(sc.spectral, grid[i]));
    // One photon on P3 and one on P4: the P4 side holds a lone photon.
    double p = 0.0;
    for (const auto& m : mixed.members())
      if (m.state.photon_number() == 1) p += m.weight;
    p *= both;
    std::vector<double> row{grid[i], p};
    series.x.push_back(grid[i]);
    if (!opt.no_noise) {
      const auto n = static_cast<double>(
          sample_counts(p, sc.pair_rate, sc.integration_time_s, derive_seed(sc.seed, i, 0)));
      row.push_back(n);
      row.push_back(std::sqrt(std::max(n, 1.0)));
      series.y.push_back(n);
      series.sigma.push_back(std::sqrt(std::max(n, 1.0)));
    } else {
      series.y.push_back(p);
      series.sigma.push_back(1.0);
    }
    table.row(row);
  }
  detail::ensure_out(opt.out);
  table.write(opt.out / "scan.csv");

  detail::Report rep;
  detail::header(rep, "hom-scan", opt.config.empty() ? "paper_hom" : opt.config, sc, !opt.no_noise);
  rep.line("points", std::to_string(grid.size()));
  detail::report_envelope(rep, "coinc", series, FitModel::GaussianDip);
  rep.section("raw extrema");
  const auto [lo, hi] = std::minmax_element(series.y.begin(), series.y.end());
  try {
    rep.line("V_HOM_raw", hom_visibility(*hi, *lo));
  } catch (const Error& e) {
    rep.failure("V_HOM_raw", e.what());
  }
  detail::finish(rep, opt.out);
}

inline void envelope_scan(const CommandOptions& opt) {
  const auto cfg = detail::load_config(opt.config, "paper_envelope_single");
  Scenario sc = detail::prepare(cfg, opt);
  const GridSpec g = detail::resolve_grid(cfg, opt, kEnvelopeGrid);
  const auto centers = make_grid(g.start_um, g.stop_um, g.step_um);
  const double width = 2.0 * sc.spectral.lambda0_um;
  if (g.step_um <= width && centers.size() > 1)
    throw Error(Errc::InvalidArgument, "envelope grid step must exceed the window width of two wavelengths");
  const double dx = width / kWindowSamples;
  sc.delta_L2_grid_um.clear();
  for (double c : centers)
    for (int j = 0; j < kWindowSamples; ++j) sc.delta_L2_grid_um.push_back(c + (j - (kWindowSamples - 1) / 2.0) * dx);

  const ScanResult r = scan(sc, !opt.no_noise);
  detail::ensure_out(opt.out);
  const auto series = detail::write_scan(r, opt.out / "samples.csv", !opt.no_noise);
  // Fringe periods: lambda for singles, lambda/N for N-photon channels.
  const Channel fringe_channel = detail::channels_for(sc).front() == Channel::P7
                                     ? Channel::P7
                                     : (sc.source == SourceKind::EntangledPair ? Channel::D2D3 : Channel::D1D2);
  const int order = fringe_channel == Channel::P7 ? 1 : (sc.source == SourceKind::Ghz ? sc.photons : 2);
  const double period = sc.spectral.lambda0_um / order;
  const Series* data = nullptr;
  for (const auto& [c, s] : series)
    if (c == fringe_channel) data = &s;

  detail::Report rep;
  detail::header(rep, "envelope-scan", opt.config.empty() ? "paper_envelope_single" : opt.config, sc, !opt.no_noise);
  rep.line("points", std::to_string(centers.size()));
  rep.line("window_um", width);
  rep.line("window_samples", std::to_string(kWindowSamples));
  try {
    const AmplitudeProfile prof = envelope_amplitude_extraction(*data, centers, width * 1.0001, period);
    detail::Table table({"delta_L2_um", "amp_" + std::string(to_string(fringe_channel)),
                         "err_amp_" + std::string(to_string(fringe_channel))});
    for (std::size_t i = 0; i < prof.centers.size(); ++i)
      table.row({prof.centers[i], prof.amplitude[i].value, prof.amplitude[i].error});
    table.write(opt.out / "scan.csv");
    detail::report_envelope(rep, to_string(fringe_channel), prof.series(), FitModel::GaussianEnvelope);
  } catch (const Error& e) {
    if (!e.is_fit_failure()) throw;
    rep.failure(to_string(fringe_channel), e.what());
  }
  detail::finish(rep, opt.out);
}

namespace detail {

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::ptrdiff_t column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  }
};

inline Csv read_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  Csv csv;
  std::string line;
  int line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(std::string(mzsim::detail::trim(cell)));
    return out;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (mzsim::detail::trim(line).empty()) continue;
    auto cells = split(line);
    if (csv.header.empty()) {
      csv.header = std::move(cells);
      continue;
    }
    if (cells.size() != csv.header.size())
      throw ParseError(ParseErrc::SyntaxError, line_no, 1, "", "row width differs from the header");
    std::vector<double> row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double v = 0.0;
      const auto& c = cells[i];
      const auto [end, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || end != c.data() + c.size())
        throw ParseError(ParseErrc::SyntaxError, line_no, static_cast<int>(i) + 1, csv.header[i], "not a number");
      row.push_back(v);
    }
    csv.rows.push_back(std::move(row));
  }
  if (csv.header.empty()) throw ParseError(ParseErrc::SyntaxError, 1, 1, "", "empty CSV");
  return csv;
}

}  // namespace detail

/// Fits one column of a CSV against its first column. A matching err_ column
/// supplies the error bars.
inline void fit_csv(const FitOptions& opt) {
  const detail::Csv csv = detail::read_csv(opt.in);
  const auto col = csv.column(opt.column);
  if (col < 0) throw ParseError(ParseErrc::UnknownKey, 1, 1, opt.column, "no such column");
  std::string suffix = opt.column;
  for (std::string_view prefix : {"n_", "p_", "amp_"})
    if (suffix.starts_with(prefix)) {
      suffix = suffix.substr(prefix.size());
      break;
    }
  std::ptrdiff_t err = csv.column(opt.column.starts_with("amp_") ? "err_amp_" + suffix : "err_" + suffix);
  if (opt.column.starts_with("p_") || opt.column == "P7" || opt.column == "P8") err = -1;
  Series s;
  s.absolute_sigma = err >= 0;
  for (const auto& row : csv.rows) {
    s.x.push_back(row[0]);
    s.y.push_back(row[static_cast<std::size_t>(col)]);
    s.sigma.push_back(err >= 0 ? std::max(row[static_cast<std::size_t>(err)], 1e-300) : 1.0);
  }
  detail::Report rep;
  rep.line("command", "fit");
  rep.line("input", opt.in.string());
  rep.line("column", opt.column);
  rep.line("x_column", csv.header.front());
  rep.line("weights", err >= 0 ? csv.header[static_cast<std::size_t>(err)] : "uniform");
  if (opt.model == FitModel::Sinusoid) {
    detail::report_fringe(rep, opt.column, s);
  } else {
    detail::report_envelope(rep, opt.column, s, opt.model);
  }
  detail::ensure_out(opt.out);
  detail::finish(rep, opt.out);
}

}  // namespace mzsim::cli
