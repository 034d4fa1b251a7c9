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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "mzsim/commands.hpp"
#include "oracles.hpp"

using namespace mzsim;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
const double kS = 1.0 / std::sqrt(2.0);

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) {
    if (pass) detail += (detail.empty() ? "" : "; ") + what;
  }
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / fmt::format("mzsim_accept_{}_{}", ::getpid(), name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// report.txt as section -> key -> leading number.
using ReportValues = std::map<std::string, std::map<std::string, double>>;

ReportValues read_report(const fs::path& p) {
  ReportValues out;
  std::istringstream in(slurp(p));
  std::string line, section;
  while (std::getline(in, line)) {
    if (line.starts_with('[')) {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto colon = line.find(": ");
    if (colon == std::string::npos) continue;
    try {
      out[section][line.substr(0, colon)] = std::stod(line.substr(colon + 2));
    } catch (const std::exception&) {
    }
  }
  return out;
}

Scenario preset(std::string_view name) { return parse_scenario(*find_preset(name)).scenario; }

std::vector<double> fringe_grid() { return make_grid(-2.0, 2.0, 0.010); }

Series channel_series(const ScanResult& r, Channel c) {
  std::vector<double> x, y;
  for (const auto& p : r.points) {
    x.push_back(p.delta_L2_um);
    y.push_back(p.probability(c));
  }
  return Series::unweighted(std::move(x), std::move(y));
}

Series count_series(const ScanResult& r, Channel c) {
  std::vector<double> x, n;
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    x.push_back(r.points[i].delta_L2_um);
    n.push_back(static_cast<double>(r.counts[i][static_cast<int>(c)]));
  }
  return Series::poisson(std::move(x), n);
}

bool within_rel(double value, double target, double rel) { return std::abs(value - target) <= rel * target; }

double wrap(double phi) { return std::remainder(phi, 2.0 * kPi); }

Outcome single_photon_fringes() {
  Outcome o;
  const fs::path out = scratch("ac1");
  cli::CommandOptions opt;
  opt.config = "paper_single_photon";
  opt.no_noise = true;
  opt.out = out;
  cli::fringe_scan(opt);
  const auto rep = read_report(out / "report.txt");
  for (const char* ch : {"P7", "P8"}) {
    const auto& f = rep.at(fmt::format("fit {}", ch));
    o.require(within_rel(f.at("period_nm"), 810.0, 0.005), fmt::format("{} period {} nm", ch, f.at("period_nm")));
    o.require(std::abs(f.at("visibility") - 1.0) <= 1e-6, fmt::format("{} V {}", ch, f.at("visibility")));
    o.note(fmt::format("{} period {:.4f} nm V {:.9f}", ch, f.at("period_nm"), f.at("visibility")));
  }
  Scenario sc = preset("paper_single_photon");
  sc.delta_L2_grid_um = fringe_grid();
  double worst = 0.0;
  for (const auto& p : scan(sc, false).points) worst = std::max(worst, std::abs(p.P7 + p.P8 - 1.0));
  o.require(worst <= 1e-9, fmt::format("max |P7+P8-1| = {:.3g}", worst));
  o.note(fmt::format("max |P7+P8-1| {:.2g}", worst));
  return o;
}

Outcome two_photon_fringes() {
  Outcome o;
  Scenario sc = preset("paper_dl1_0");
  sc.delta_L2_grid_um = fringe_grid();
  const ScanResult r = scan(sc, false);
  double worst = 0.0;
  for (const auto& p : r.points) worst = std::max(worst, std::abs(p.detection.D1D2 - p.detection.D3D4));
  o.require(worst <= 1e-9, fmt::format("max |D1D2-D3D4| = {:.3g}", worst));
  const FitReport a = fit_fringe(channel_series(r, Channel::D1D2));
  const FitReport b = fit_fringe(channel_series(r, Channel::D3D4));
  const FitReport c = fit_fringe(channel_series(r, Channel::D2D3));
  for (const auto* f : {&a, &b, &c})
    o.require(within_rel(f->period.value, 0.405, 0.005), fmt::format("period {} um", f->period.value));
  const double shift = std::abs(wrap(c.phase.value - a.phase.value));
  o.require(std::abs(shift - kPi) <= 1e-3, fmt::format("D2D3 phase offset {} rad", shift));
  o.note(fmt::format("period {:.4f} nm, D2D3 offset {:.6f} pi, max |D1D2-D3D4| {:.2g}", a.period.value * 1e3,
                     shift / kPi, worst));
  return o;
}

Outcome delay_independence() {
  Outcome o;
  const std::pair<const char*, std::pair<double, double>> cases[] = {
      {"paper_dl1_0", {0.98, 0.01}}, {"paper_dl1_200", {0.95, 0.03}}, {"paper_dl1_1000", {0.98, 0.03}}};
  std::vector<double> periods;
  for (const auto& [name, paper] : cases) {
    Scenario sc = preset(name);
    sc.delta_L2_grid_um = fringe_grid();
    const ScanResult r = scan(sc, true);
    const FitReport clean = fit_fringe(channel_series(r, Channel::D1D2));
    periods.push_back(clean.period.value);
    o.require(clean.visibility.value >= 0.99, fmt::format("{} noiseless V {}", name, clean.visibility.value));
    const FitReport noisy = fit_fringe(count_series(r, Channel::D1D2));
    const double sigma = std::hypot(noisy.visibility.error, paper.second);
    const double z = std::abs(noisy.visibility.value - paper.first) / sigma;
    o.require(z <= 3.0, fmt::format("{} noisy V {} +- {} is {:.2f} sigma from {}", name, noisy.visibility.value,
                                    noisy.visibility.error, z, paper.first));
    o.note(fmt::format("{}: period {:.4f} nm, V {:.4f}, noisy V {:.4f}+-{:.4f} ({:.1f} sigma)", name,
                       clean.period.value * 1e3, clean.visibility.value, noisy.visibility.value,
                       noisy.visibility.error, z));
  }
  const auto [lo, hi] = std::minmax_element(periods.begin(), periods.end());
  o.require((*hi - *lo) <= 1e-3 * *lo, fmt::format("period spread {} um", *hi - *lo));
  return o;
}

Outcome amplitude_ratio() {
  Outcome o;
  auto amplitude = [](double dl1) {
    Scenario sc = preset("paper_dl1_0");
    sc.v_floor = 1.0;
    sc.coupling_efficiency = 1.0;
    sc.delta_L1_um = dl1;
    sc.delta_L2_grid_um = fringe_grid();
    return fit_fringe(channel_series(scan(sc, false), Channel::D1D2)).amplitude.value;
  };
  const double near = amplitude(0.0);
  const double far = amplitude(10000.0);
  const double ratio = near / far;
  o.require(std::abs(ratio - 2.0) <= 1e-6, fmt::format("ratio {:.9f}", ratio));
  o.note(fmt::format("amplitude ratio {:.9f}", ratio));
  return o;
}

Outcome hom_dip() {
  Outcome o;
  const fs::path out = scratch("ac5");
  cli::CommandOptions opt;
  opt.config = "paper_hom";
  opt.no_noise = true;
  opt.out = out;
  cli::hom_scan(opt);
  const auto rep = read_report(out / "report.txt");
  const double v = rep.at("raw extrema").at("V_HOM_raw");
  const double fwhm = rep.at("fit coinc").at("fwhm_um");
  o.require(std::abs(v - 0.945) <= 0.001, fmt::format("V_HOM {}", v));
  o.require(within_rel(fwhm, 126.0, 0.02), fmt::format("FWHM {} um", fwhm));
  o.note(fmt::format("V_HOM {:.4f}, FWHM {:.2f} um", v, fwhm));
  return o;
}

Outcome envelopes() {
  Outcome o;
  auto run = [](const char* preset_name, const char* tag) {
    const fs::path out = scratch(tag);
    cli::CommandOptions opt;
    opt.config = preset_name;
    opt.out = out;
    cli::envelope_scan(opt);
    const auto rep = read_report(out / "report.txt");
    for (const auto& [section, values] : rep)
      if (section.starts_with("fit ")) return values.at("fwhm_um");
    return 0.0;
  };
  const double single = run("paper_envelope_single", "ac6a");
  const double pair = run("paper_envelope_pair", "ac6b");
  const double xi_single = preset("paper_envelope_single").spectral.xi_single_um;
  const double xi_pump = preset("paper_envelope_pair").spectral.xi_pump_um;
  o.require(within_rel(single, xi_single, 0.02), fmt::format("single FWHM {} um vs {}", single, xi_single));
  o.require(within_rel(pair, xi_pump, 0.02), fmt::format("pair FWHM {} um vs {}", pair, xi_pump));
  o.require(pair > single, "two-photon envelope not wider");
  o.note(fmt::format("single {:.2f} um, pair {:.2f} um", single, pair));
  return o;
}

Outcome ghz_noon() {
  Outcome o;
  double worst = 0.0;
  for (int n = 1; n <= 4; ++n) {
    for (double phi : {0.0, 0.3, 1.1, 2.2, 4.0}) {
      const FockState s = ghz_to_noon(n, phi);
      const Amplitude a = s.amplitude({{{Path::P5, Pol::V, 0}, n}});
      const Amplitude b = s.amplitude({{{Path::P6, Pol::V, 0}, n}});
      worst = std::max({worst, std::abs(a - kS), std::abs(b - kS * std::polar(1.0, n * phi)),
                        std::abs(norm(s) * norm(s) - std::norm(a) - std::norm(b))});
    }
    const fs::path out = scratch(fmt::format("ac7_{}", n));
    cli::CommandOptions opt;
    opt.photons = n;
    opt.no_noise = true;
    opt.out = out;
    cli::ghz_noon(opt);
    const auto rep = read_report(out / "report.txt");
    const std::string section = n == 1 ? "fit P7" : "fit D1D2";
    const double period = rep.at(section).at("period_nm");
    o.require(within_rel(period, 810.0 / n, 0.005), fmt::format("N={} period {} nm", n, period));
    o.note(fmt::format("N={} period {:.3f} nm", n, period));
  }
  o.require(worst <= 1e-9, fmt::format("term mismatch {:.3g}", worst));
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(500);
  std::normal_distribution<double> g;
  double worst = 0.0;
  int instances = 0;
  while (instances < 500) {
    const int d = 1 + static_cast<int>(rng() % 4);
    const int n = 1 + static_cast<int>(rng() % 4);
    const Eigen::MatrixXcd u = oracle::random_unitary(d, rng);
    std::vector<ModeLabel> modes;
    for (int k = 0; k < d; ++k) modes.push_back({static_cast<Path>(k), k % 2 ? Pol::V : Pol::H, k / 2});
    std::map<oracle::Counts, oracle::cplx> dense;
    std::vector<std::pair<Occupation, Amplitude>> terms;
    auto sparse = [&](const oracle::Counts& occ) {
      Occupation out;
      for (int k = 0; k < d; ++k)
        if (occ[k]) out.push_back({modes[k], occ[k]});
      return out;
    };
    for (const auto& occ : oracle::all_occupations(d, n)) {
      const Amplitude a(g(rng), g(rng));
      dense[occ] = a;
      terms.push_back({sparse(occ), a});
    }
    const FockState got = apply_mode_unitary(make_state(terms), u, modes);
    const auto want = oracle::evolve(u, dense);
    for (const auto& occ : oracle::all_occupations(d, n)) {
      const auto it = want.find(occ);
      worst = std::max(worst, std::abs(got.amplitude(sparse(occ)) - (it == want.end() ? 0.0 : it->second)));
    }
    ++instances;
  }
  o.require(worst <= 1e-9, fmt::format("max amplitude error {:.3g}", worst));
  o.note(fmt::format("{} instances, max error {:.2g}", instances, worst));

  // Post-BS2 three-term state of the two-photon GHZ input on P4.
  double three = 0.0;
  SpectralModel mono;
  mono.enabled = false;
  for (double phi : {0.0, 0.35, 1.2, 2.5, 5.0}) {
    const Circuit circuit = mz_circuit(phi * mono.lambda0_um / (2.0 * kPi));
    std::optional<FockState> s = detail::ghz_on_p4(2, kDefaultMaxPhotons);
    for (const auto& e : circuit.elements()) s = apply_element(*s, e, mono).state;
    const Amplitude e2 = std::polar(1.0, 2.0 * phi);
    const double k = 1.0 / std::sqrt(8.0);
    const Occupation two7{{{Path::P7, Pol::V, 0}, 2}};
    const Occupation two8{{{Path::P8, Pol::V, 0}, 2}};
    const Occupation one_each{{{Path::P7, Pol::V, 0}, 1}, {{Path::P8, Pol::V, 0}, 1}};
    const std::pair<Occupation, Amplitude> expected[] = {
        {two7, k * (1.0 - e2)},
        {two8, -k * (1.0 - e2)},
        {one_each, -k * std::sqrt(2.0) * Amplitude(0, 1) * (1.0 + e2)}};
    Amplitude overlap = 0.0;
    for (const auto& [occ, amp] : expected) overlap += std::conj(amp) * s->amplitude(occ);
    const Amplitude global = overlap / std::abs(overlap);
    three = std::max(three, std::abs(std::abs(overlap) - 1.0));
    for (const auto& [occ, amp] : expected) three = std::max(three, std::abs(s->amplitude(occ) - global * amp));
    three = std::max(three, std::abs(norm(*s) - 1.0));
  }
  o.require(three <= 1e-9, fmt::format("three-term mismatch {:.3g}", three));
  o.note(fmt::format("three-term max error {:.2g}", three));
  return o;
}

/// Two-sided normal quantile for tail probability p, by bisection on erfc.
double normal_quantile(double p) {
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::erfc(mid / std::sqrt(2.0)) > p ? lo : hi) = mid;
  }
  return lo;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MZSIM_EXE) + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

Outcome determinism() {
  Outcome o;
  const fs::path out = scratch("ac9");
  for (const char* tag : {"a", "b"})
    o.require(run_cli(fmt::format("fringe-scan paper_dl1_200 --seed 42 --out {}", (out / tag).string())) == 0,
              "fringe-scan failed");
  for (const char* tag : {"c", "d"})
    o.require(run_cli(fmt::format("hom-scan --seed 7 --out {}", (out / tag).string())) == 0, "hom-scan failed");
  o.require(slurp(out / "a" / "scan.csv") == slurp(out / "b" / "scan.csv"), "fringe CSVs differ");
  o.require(slurp(out / "c" / "scan.csv") == slurp(out / "d" / "scan.csv"), "HOM CSVs differ");
  o.require(!slurp(out / "a" / "scan.csv").empty(), "empty CSV");

  // Monte Carlo mean over many seeds against the noiseless expectation.
  constexpr int kSeeds = 1000;
  Scenario sc = preset("paper_dl1_0");
  sc.delta_L2_grid_um = make_grid(-0.5, 0.5, 0.010);
  ScanResult r = scan(sc, false);
  const auto channels = cli::detail::channels_for(sc);
  std::vector<double> sum(r.points.size() * channels.size(), 0.0);
  for (int seed = 1; seed <= kSeeds; ++seed) {
    attach_counts(r, static_cast<std::uint64_t>(seed));
    for (std::size_t i = 0; i < r.points.size(); ++i)
      for (std::size_t c = 0; c < channels.size(); ++c)
        sum[i * channels.size() + c] += static_cast<double>(r.counts[i][static_cast<int>(channels[c])]);
  }
  // 3 sigma family-wise over all tested (point, channel) pairs.
  const double z = normal_quantile(std::erfc(3.0 / std::sqrt(2.0)) / static_cast<double>(sum.size()));
  double worst = 0.0;
  double chi2 = 0.0;
  int tested = 0;
  for (std::size_t i = 0; i < r.points.size(); ++i)
    for (std::size_t c = 0; c < channels.size(); ++c) {
      const double mean = r.points[i].probability(channels[c]) * sc.pair_rate * sc.integration_time_s;
      if (mean == 0.0) {
        o.require(sum[i * channels.size() + c] == 0.0, "counts drawn for a zero-probability channel");
        continue;
      }
      const double dev = (sum[i * channels.size() + c] / kSeeds - mean) / std::sqrt(mean / kSeeds);
      worst = std::max(worst, std::abs(dev));
      chi2 += dev * dev;
      ++tested;
    }
  o.require(worst <= z, fmt::format("max deviation {:.2f} sigma exceeds {:.2f}", worst, z));
  const double chi2_z = (chi2 - tested) / std::sqrt(2.0 * tested);
  o.require(std::abs(chi2_z) <= 3.0, fmt::format("chi2 {:.1f} over {} points", chi2, tested));
  o.note(fmt::format("byte-identical reruns; MC mean of {} seeds: max {:.2f} sigma (limit {:.2f}), chi2/n {:.3f}",
                     kSeeds, worst, z, chi2 / tested));
  fs::remove_all(out);
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"AC1 single-photon fringes", single_photon_fringes},
      {"AC2 two-photon fringes at dL1=0", two_photon_fringes},
      {"AC3 dL1 independence", delay_independence},
      {"AC4 coincidence amplitude ratio", amplitude_ratio},
      {"AC5 HOM dip", hom_dip},
      {"AC6 interference envelopes", envelopes},
      {"AC7 GHZ to NOON", ghz_noon},
      {"AC8 oracle equivalence", oracle_equivalence},
      {"AC9 determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = fmt::format("exception: {}", e.what());
    }
    failed += !o.pass;
    fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
  }
  fmt::print("{}/{} criteria passed\n", std::size(criteria) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
