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

// Scenario documents: a strict INI dialect.
//
//   [source]     kind = entangled | single_photon | ghz, photons, werner_p,
//                polarizer_angle (angle)
//   [spectral]   lambda0, xi_single, xi_pump (length), bins, enabled
//   [delays]     delta_L1 (length)
//   [grid]       start, stop, step (length): the scanned delay
//   [detection]  coupling, v_floor
//   [rates]      pair_rate (rate), integration_time (time)
//   [run]        seed, max_photons
//
// Dimensional values need a unit: nm, um (or μm), mm; s, ms; /s, Hz; deg,
// rad. Comments start with '#' or ';'. Unknown sections or keys, repeated
// keys and missing units are errors.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mzsim/experiment.hpp"

namespace mzsim {

enum class ParseErrc { SyntaxError, UnknownKey, UnitMismatch, RangeError };

constexpr std::string_view to_string(ParseErrc e) {
  switch (e) {
    case ParseErrc::SyntaxError: return "SyntaxError";
    case ParseErrc::UnknownKey: return "UnknownKey";
    case ParseErrc::UnitMismatch: return "UnitMismatch";
    case ParseErrc::RangeError: return "RangeError";
  }
  return "?";
}

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrc kind, int line, int column, std::string key, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " at " + std::to_string(line) + ":" +
                           std::to_string(column) + (key.empty() ? "" : " (" + key + ")") + ": " + what),
        kind_(kind),
        line_(line),
        column_(column),
        key_(std::move(key)) {}

  ParseErrc kind() const noexcept { return kind_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& key() const noexcept { return key_; }

 private:
  ParseErrc kind_;
  int line_;
  int column_;
  std::string key_;
};

enum class Dimension { Length, Time, Rate, Angle };

/// Parses "<number> <unit>" into um, s, 1/s or rad.
inline std::optional<double> parse_quantity(std::string_view text, Dimension dim, std::string* why = nullptr) {
  auto fail = [&](std::string msg) -> std::optional<double> {
    if (why) *why = std::move(msg);
    return std::nullopt;
  };
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || !std::isfinite(value)) return fail("expected a number");
  std::string_view unit(end, static_cast<std::size_t>(text.data() + text.size() - end));
  while (!unit.empty() && unit.front() == ' ') unit.remove_prefix(1);
  if (unit.empty()) return fail("missing unit");

  static const std::map<std::string_view, std::pair<Dimension, double>> units = {
      {"nm", {Dimension::Length, 1e-3}}, {"um", {Dimension::Length, 1.0}},
      {"μm", {Dimension::Length, 1.0}},  {"mm", {Dimension::Length, 1e3}},
      {"s", {Dimension::Time, 1.0}},     {"ms", {Dimension::Time, 1e-3}},
      {"/s", {Dimension::Rate, 1.0}},    {"Hz", {Dimension::Rate, 1.0}},
      {"deg", {Dimension::Angle, std::numbers::pi / 180.0}}, {"rad", {Dimension::Angle, 1.0}},
  };
  const auto it = units.find(unit);
  if (it == units.end()) return fail("unknown unit '" + std::string(unit) + "'");
  if (it->second.first != dim) return fail("unit '" + std::string(unit) + "' has the wrong dimension");
  return value * it->second.second;
}

struct GridSpec {
  double start_um = 0.0;
  double stop_um = 0.0;
  double step_um = 0.0;
};

struct ScenarioConfig {
  Scenario scenario;
  /// Grid fields present in the document; missing ones use command defaults.
  std::optional<double> grid_start_um;
  std::optional<double> grid_stop_um;
  std::optional<double> grid_step_um;

  GridSpec grid_or(GridSpec fallback) const {
    if (grid_start_um) fallback.start_um = *grid_start_um;
    if (grid_stop_um) fallback.stop_um = *grid_stop_um;
    if (grid_step_um) fallback.step_um = *grid_step_um;
    return fallback;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

class ConfigReader {
 public:
  ConfigReader(std::string key, std::string_view value, int line, int column)
      : key_(std::move(key)), value_(value), line_(line), column_(column) {}

  [[noreturn]] void fail(ParseErrc kind, const std::string& what) const {
    throw ParseError(kind, line_, column_, key_, what);
  }

  double quantity(Dimension dim) const {
    std::string why;
    const auto v = parse_quantity(value_, dim, &why);
    if (!v) fail(why == "expected a number" ? ParseErrc::SyntaxError : ParseErrc::UnitMismatch, why);
    return *v;
  }

  double number() const {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(value_.data(), value_.data() + value_.size(), v);
    if (ec != std::errc() || !std::isfinite(v)) fail(ParseErrc::SyntaxError, "expected a number");
    if (end != value_.data() + value_.size()) fail(ParseErrc::UnitMismatch, "dimensionless value takes no unit");
    return v;
  }

  std::int64_t integer() const {
    std::int64_t v = 0;
    const auto [end, ec] = std::from_chars(value_.data(), value_.data() + value_.size(), v);
    if (ec != std::errc() || end != value_.data() + value_.size()) fail(ParseErrc::SyntaxError, "expected an integer");
    return v;
  }

  bool boolean() const {
    if (value_ == "true") return true;
    if (value_ == "false") return false;
    fail(ParseErrc::SyntaxError, "expected true or false");
  }

  double in_range(double v, double lo, double hi) const {
    if (!(v >= lo && v <= hi))
      fail(ParseErrc::RangeError, "value outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }

  double positive(double v) const {
    if (!(v > 0.0)) fail(ParseErrc::RangeError, "value must be positive");
    return v;
  }

  std::string_view text() const { return value_; }

 private:
  std::string key_;
  std::string_view value_;
  int line_;
  int column_;
};

}  // namespace detail

inline ScenarioConfig parse_scenario(std::string_view document) {
  ScenarioConfig cfg;
  Scenario& sc = cfg.scenario;
  std::string section;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  int line_no = 0;

  while (!document.empty()) {
    ++line_no;
    const auto nl = document.find('\n');
    std::string_view raw = document.substr(0, nl);
    document = nl == std::string_view::npos ? std::string_view{} : document.substr(nl + 1);

    // Strip comments.
    const auto hash = raw.find_first_of("#;");
    std::string_view line = detail::trim(raw.substr(0, hash));
    if (line.empty()) continue;
    const int indent = static_cast<int>(raw.find_first_not_of(" \t")) + 1;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(ParseErrc::SyntaxError, line_no, indent, "", "unterminated section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string> known = {"source", "spectral", "delays", "grid",
                                                   "detection", "rates", "run"};
      if (!known.contains(section)) throw ParseError(ParseErrc::UnknownKey, line_no, indent + 1, section, "unknown section");
      if (!seen_sections.insert(section).second)
        throw ParseError(ParseErrc::SyntaxError, line_no, indent, section, "section repeated");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(ParseErrc::SyntaxError, line_no, indent, "", "expected key = value");
    const std::string name(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (name.empty()) throw ParseError(ParseErrc::SyntaxError, line_no, indent, "", "empty key");
    if (section.empty()) throw ParseError(ParseErrc::SyntaxError, line_no, indent, name, "key outside any section");
    const std::string key = section + "." + name;
    const int value_column = static_cast<int>(value.data() - raw.data()) + 1;
    if (value.empty()) throw ParseError(ParseErrc::SyntaxError, line_no, value_column, key, "missing value");
    if (!seen_keys.insert(key).second) throw ParseError(ParseErrc::SyntaxError, line_no, indent, key, "key repeated");
    const detail::ConfigReader r(key, value, line_no, value_column);

    if (key == "source.kind") {
      if (value == "entangled") sc.source = SourceKind::EntangledPair;
      else if (value == "single_photon") sc.source = SourceKind::SinglePhotonPol;
      else if (value == "ghz") sc.source = SourceKind::Ghz;
      else r.fail(ParseErrc::RangeError, "expected entangled, single_photon or ghz");
    } else if (key == "source.photons") {
      sc.photons = static_cast<int>(r.in_range(static_cast<double>(r.integer()), 1, kDefaultMaxPhotons));
    } else if (key == "source.werner_p") {
      sc.werner_p = r.in_range(r.number(), 0.0, 1.0);
    } else if (key == "source.polarizer_angle") {
      sc.polarizer_angle_rad = r.quantity(Dimension::Angle);
    } else if (key == "spectral.lambda0") {
      sc.spectral.lambda0_um = r.positive(r.quantity(Dimension::Length));
    } else if (key == "spectral.xi_single") {
      sc.spectral.xi_single_um = r.positive(r.quantity(Dimension::Length));
    } else if (key == "spectral.xi_pump") {
      sc.spectral.xi_pump_um = r.positive(r.quantity(Dimension::Length));
    } else if (key == "spectral.bins") {
      sc.spectral.bin_count = static_cast<int>(r.in_range(static_cast<double>(r.integer()), 1, 1 << 20));
    } else if (key == "spectral.enabled") {
      sc.spectral.enabled = r.boolean();
    } else if (key == "delays.delta_L1") {
      sc.delta_L1_um = r.quantity(Dimension::Length);
    } else if (key == "grid.start") {
      cfg.grid_start_um = r.quantity(Dimension::Length);
    } else if (key == "grid.stop") {
      cfg.grid_stop_um = r.quantity(Dimension::Length);
    } else if (key == "grid.step") {
      cfg.grid_step_um = r.positive(r.quantity(Dimension::Length));
    } else if (key == "detection.coupling") {
      sc.coupling_efficiency = r.in_range(r.number(), 0.0, 1.0);
    } else if (key == "detection.v_floor") {
      sc.v_floor = r.in_range(r.number(), 0.0, 1.0);
    } else if (key == "rates.pair_rate") {
      sc.pair_rate = r.in_range(r.quantity(Dimension::Rate), 0.0, INFINITY);
    } else if (key == "rates.integration_time") {
      sc.integration_time_s = r.in_range(r.quantity(Dimension::Time), 0.0, INFINITY);
    } else if (key == "run.seed") {
      const auto s = r.integer();
      if (s < 0) r.fail(ParseErrc::RangeError, "seed must be non-negative");
      sc.seed = static_cast<std::uint64_t>(s);
    } else if (key == "run.max_photons") {
      sc.max_photons = static_cast<int>(r.in_range(static_cast<double>(r.integer()), 1, kDefaultMaxPhotons));
    } else {
      throw ParseError(ParseErrc::UnknownKey, line_no, indent, key, "unknown key");
    }
  }
  if (sc.source == SourceKind::Ghz && sc.photons > sc.max_photons)
    throw ParseError(ParseErrc::RangeError, line_no, 1, "source.photons", "exceeds run.max_photons");
  if (cfg.grid_start_um && cfg.grid_stop_um && *cfg.grid_stop_um < *cfg.grid_start_um)
    throw ParseError(ParseErrc::RangeError, line_no, 1, "grid.stop", "grid stop lies before start");
  return cfg;
}

}  // namespace mzsim
