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

// End-to-end model of the apparatus: entangled-pair (or single-photon, or
// GHZ) preparation, mixing at the first beam splitter, the PBS/HWP
// Mach-Zehnder interferometer, four-detector coincidence logic and Poisson
// count sampling.
//
// Interferometer layout: the PBS sends H from P4 to P6 and V to P5, the
// half-wave plate at 45 degrees sits on P6, the dL2 delay sits on P6, and BS2
// maps P6 -> P7 and P5 -> P8 in transmission. With this layout the state
// before BS2 is (|N>_5 |0>_6 + exp(i N phi) |0>_5 |N>_6) / sqrt(2), the
// two-photon probabilities are P(2,0) = P(0,2) = (1 - cos 2 phi) / 4 and
// P(1,1) = (1 + cos 2 phi) / 2, and a single photon reaches P7 with
// probability (1 + sin phi) / 2, where phi = 2 pi dL2 / lambda.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mzsim/elements.hpp"
#include "mzsim/error.hpp"
#include "mzsim/fock.hpp"
#include "mzsim/spectral.hpp"

namespace mzsim {

enum class SourceKind { EntangledPair, SinglePhotonPol, Ghz };

struct Scenario {
  SourceKind source = SourceKind::EntangledPair;
  /// Photon number of the GHZ source.
  int photons = 2;
  /// Orientation of the polarizer that prepares the single-photon source.
  double polarizer_angle_rad = std::numbers::pi / 4.0;
  /// Weight of |Phi+> against white polarization noise.
  double werner_p = 1.0;
  double delta_L1_um = 0.0;
  std::vector<double> delta_L2_grid_um;
  SpectralModel spectral;
  /// Per-photon fiber-coupling efficiency.
  double coupling_efficiency = 1.0;
  /// Mode-mismatch cap on the wave-packet overlap at BS1.
  double v_floor = 1.0;
  double pair_rate = 20000.0;  // 1/s
  double integration_time_s = 1.0;
  std::uint64_t seed = 1;
  int max_photons = kDefaultMaxPhotons;

  void validate() const {
    spectral.validate();
    if (source == SourceKind::Ghz && (photons < 1 || photons > max_photons))
      throw Error(Errc::UnsupportedN, "GHZ photon number " + std::to_string(photons) +
                                          " outside [1, " + std::to_string(max_photons) + "]");
    auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!unit(werner_p)) throw Error(Errc::InvalidArgument, "werner_p must lie in [0, 1]");
    if (!unit(coupling_efficiency)) throw Error(Errc::InvalidArgument, "coupling efficiency must lie in [0, 1]");
    if (!unit(v_floor)) throw Error(Errc::InvalidArgument, "v_floor must lie in [0, 1]");
    if (!std::isfinite(delta_L1_um)) throw Error(Errc::InvalidArgument, "delta_L1 must be finite");
    if (!(pair_rate >= 0.0) || !(integration_time_s >= 0.0))
      throw Error(Errc::InvalidArgument, "rates and integration time must be non-negative");
    if (delta_L2_grid_um.empty()) throw Error(Errc::InvalidArgument, "the delta_L2 grid is empty");
    for (std::size_t i = 1; i < delta_L2_grid_um.size(); ++i)
      if (!(delta_L2_grid_um[i] > delta_L2_grid_um[i - 1]))
        throw Error(Errc::InvalidArgument, "the delta_L2 grid must be strictly increasing");
  }
};

/// Uniform grid start, start + step, ... up to stop (inclusive within rounding).
inline std::vector<double> make_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw Error(Errc::InvalidArgument, "invalid grid bounds");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = start + static_cast<double>(i) * step;
  return grid;
}

namespace detail {

inline FockState pair_state(Pol p1, Pol p2) {
  return make_state({{{{{Path::P1, p1, 0}, 1}, {{Path::P2, p2, 0}, 1}}, 1.0}});
}

inline FockState ghz_on_p4(int n, int max_photons) {
  const double s = 1.0 / std::sqrt(2.0);
  return make_state({{{{{Path::P4, Pol::H, 0}, n}}, s}, {{{{Path::P4, Pol::V, 0}, n}}, s}},
                    max_photons);
}

}  // namespace detail

/// |Phi+> = (|H>_1 |H>_2 + |V>_1 |V>_2) / sqrt(2).
inline FockState phi_plus() {
  const double s = 1.0 / std::sqrt(2.0);
  return make_state({{{{{Path::P1, Pol::H, 0}, 1}, {{Path::P2, Pol::H, 0}, 1}}, s},
                     {{{{Path::P1, Pol::V, 0}, 1}, {{Path::P2, Pol::V, 0}, 1}}, s}});
}

inline StateEnsemble prepare_source(const Scenario& scenario) {
  StateEnsemble out;
  switch (scenario.source) {
    case SourceKind::EntangledPair: {
      const double p = scenario.werner_p;
      if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::InvalidArgument, "werner_p must lie in [0, 1]");
      if (p > 0.0) out.add(p, phi_plus());
      if (p < 1.0)
        for (Pol a : {Pol::H, Pol::V})
          for (Pol b : {Pol::H, Pol::V}) out.add((1.0 - p) / 4.0, detail::pair_state(a, b));
      break;
    }
    case SourceKind::SinglePhotonPol: {
      const double a = scenario.polarizer_angle_rad;
      out.add(1.0, make_state({{{{{Path::P4, Pol::H, 0}, 1}}, std::cos(a)},
                               {{{{Path::P4, Pol::V, 0}, 1}}, std::sin(a)}}));
      break;
    }
    case SourceKind::Ghz: {
      const int n = scenario.photons;
      if (n < 1 || n > scenario.max_photons)
        throw Error(Errc::UnsupportedN, "GHZ photon number " + std::to_string(n) + " is not supported");
      out.add(1.0, detail::ghz_on_p4(n, scenario.max_photons));
      break;
    }
  }
  return out;
}

enum class CorrelationBasis { HV, Diagonal };

/// (P_same - P_diff) / (P_same + P_diff) for the photons on P1 and P2.
inline double polarization_correlation(const StateEnsemble& ensemble, CorrelationBasis basis) {
  double same = 0.0;
  double diff = 0.0;
  for (const auto& member : ensemble.members()) {
    FockState s = member.state;
    auto on = [](const Occupation& occ, Path p) {
      int n = 0;
      for (const auto& [m, k] : occ)
        if (m.path == p) n += k;
      return n;
    };
    if (s.photon_number() != 2)
      throw Error(Errc::WrongPhotonNumber, "polarization correlation needs a photon pair");
    for (const auto& [occ, amp] : s.terms())
      if (on(occ, Path::P1) != 1 || on(occ, Path::P2) != 1)
        throw Error(Errc::WrongPhotonNumber, "expected one photon on each of P1 and P2");
    if (basis == CorrelationBasis::Diagonal) {
      // +45 -> H and -45 -> V.
      s = hwp_apply(s, {Path::P1, degrees(22.5)});
      s = hwp_apply(s, {Path::P2, degrees(22.5)});
    }
    for (const auto& [occ, amp] : s.terms()) {
      Pol p1{}, p2{};
      for (const auto& [m, k] : occ) (m.path == Path::P1 ? p1 : p2) = m.pol;
      (p1 == p2 ? same : diff) += member.weight * std::norm(amp);
    }
  }
  if (same + diff == 0.0) throw Error(Errc::Degenerate, "empty ensemble");
  return (same - diff) / (same + diff);
}

inline constexpr BeamSplitter kBs1{Path::P1, Path::P2, Path::P3, Path::P4, 0.5};

/// Mixes the pair at BS1 given the wave-packet overlap v. The P1 photon is
/// split into the P2 photon's temporal slot (amplitude sqrt(v)) and an
/// orthogonal slot; the output is decomposed into pair-on-P4, pair-on-P3 and
/// one-photon-on-P4 members with weights (1+v)/4, (1+v)/4 and (1-v)/2 for a
/// polarization-symmetric pair. A lone photon's slot is irrelevant downstream,
/// so it is traced out and the photon is placed in slot 0.
inline StateEnsemble mix_at_bs1(const StateEnsemble& input, double overlap) {
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw Error(Errc::InvalidArgument, "overlap must lie in [0, 1]");
  Eigen::Matrix2cd slot_split;
  const double a = std::sqrt(overlap);
  const double b = std::sqrt(1.0 - overlap);
  slot_split << a, -b, b, a;

  StateEnsemble out;
  for (const auto& member : input.members()) {
    FockState s = member.state;
    if (s.photon_number() != 2) throw Error(Errc::WrongPhotonNumber, "BS1 mixing expects a photon pair");
    for (const auto& m : s.modes())
      if (m.path != Path::P1 && m.path != Path::P2)
        throw Error(Errc::InvalidArgument, "BS1 inputs must be on P1 and P2");
    for (Pol pol : {Pol::H, Pol::V}) {
      const ModeLabel slots[] = {{Path::P1, pol, 0}, {Path::P1, pol, 1}};
      s = apply_mode_unitary(s, slot_split, slots);
    }
    s = bs_apply(s, kBs1);

    std::vector<ModeLabel> p3_modes;
    Pattern empty_p3, empty_p4;
    for (Pol pol : {Pol::H, Pol::V})
      for (int bin : {0, 1}) {
        p3_modes.push_back({Path::P3, pol, bin});
        empty_p3[{Path::P3, pol, bin}] = 0;
        empty_p4[{Path::P4, pol, bin}] = 0;
      }
    if (auto pair4 = project(s, empty_p3); pair4.state) out.add(member.weight * pair4.probability, *pair4.state);
    if (auto pair3 = project(s, empty_p4); pair3.state) out.add(member.weight * pair3.probability, *pair3.state);
    for (const auto& heralded : p3_modes) {
      Pattern one_each = empty_p3;
      one_each[heralded] = 1;
      // The lone photon's slot is traced out: one member per slot.
      for (int bin : {0, 1}) {
        Pattern pattern = one_each;
        for (Pol pol : {Pol::H, Pol::V}) pattern[{Path::P4, pol, 1 - bin}] = 0;
        auto single = project(s, pattern);
        if (!single.state) continue;
        FockState lone = map_modes(*single.state, [](ModeLabel m) {
          m.bin = 0;
          return m;
        });
        out.add(member.weight * single.probability, lone);
      }
    }
  }
  return out.merged();
}

inline StateEnsemble mix_at_bs1(const StateEnsemble& input, double delta_L1_um, const SpectralModel& spectral) {
  return mix_at_bs1(input, temporal_overlap(spectral, delta_L1_um));
}

/// PBS, HWP(45) on P6, dL2 delay on P6, BS2.
inline Circuit mz_circuit(double delta_L2_um, bool include_bs2 = true) {
  Circuit c({Path::P4, Path::P5, Path::P6, Path::P7, Path::P8});
  c.add(PolarizingBeamSplitter{Path::P4, Path::P6, Path::P5, std::nullopt})
      .add(HalfWavePlate{Path::P6, degrees(45.0)})
      .add(PhaseDelay{Path::P6, delta_L2_um});
  if (include_bs2) c.add(BeamSplitter{Path::P6, Path::P5, Path::P7, Path::P8, 0.5});
  return c;
}

/// Probability mass over (photons on P7, photons on P8), keyed also by the
/// member photon number N.
struct PathPatterns {
  std::map<std::tuple<int, int, int>, double> mass;  // (N, n7, n8) -> mass
  /// Weight of members that never enter the interferometer (photons on P3).
  double bypass = 0.0;

  double total() const {
    double t = bypass;
    for (const auto& [k, v] : mass) t += v;
    return t;
  }
};

namespace detail {

inline bool all_on(const FockState& s, Path p) {
  for (const auto& m : s.modes())
    if (m.path != p) return false;
  return true;
}

inline std::map<std::pair<int, int>, double> output_pattern(const FockState& input,
                                                            double delta_L2_um,
                                                            const SpectralModel& spectral) {
  const Circuit circuit = mz_circuit(delta_L2_um);
  std::optional<FockState> s = input;
  for (const auto& e : circuit.elements()) s = apply_element(*s, e, spectral).state;
  return marginal(*s, [](const Occupation& occ) {
    int n7 = 0, n8 = 0;
    for (const auto& [m, k] : occ) {
      if (m.path == Path::P7) n7 += k;
      if (m.path == Path::P8) n8 += k;
    }
    return std::pair{n7, n8};
  });
}

}  // namespace detail

/// Runs every member whose photons are all on P4 through the interferometer.
inline PathPatterns run_mz(const StateEnsemble& ensemble, double delta_L2_um, const SpectralModel& spectral) {
  PathPatterns out;
  for (const auto& member : ensemble.members()) {
    if (!detail::all_on(member.state, Path::P4)) {
      out.bypass += member.weight;
      continue;
    }
    const int n = member.state.photon_number();
    for (const auto& [key, p] : detail::output_pattern(member.state, delta_L2_um, spectral))
      out.mass[{n, key.first, key.second}] += member.weight * p;
  }
  return out;
}

struct DetectionProbabilities {
  /// One-photon members detected on P7 / P8.
  double single_P7 = 0.0;
  double single_P8 = 0.0;
  /// Exclusive coincidences: all photons on P7 with both D1 and D2 firing,
  /// all on P8 with D3 and D4, and (for pairs) one photon in each of D2, D3.
  double D1D2 = 0.0;
  double D3D4 = 0.0;
  double D2D3 = 0.0;
  /// Every photon of an N >= 2 member detected behind P7 (P8).
  double all_P7 = 0.0;
  double all_P8 = 0.0;
  /// Everything else: same-detector events, other detector pairs, coupling loss, bypass.
  double lost = 0.0;

  double closure() const { return single_P7 + single_P8 + D1D2 + D3D4 + D2D3 + lost; }
};

/// Secondary 50:50 splitters: P7 -> D1 (transmitted) / D2, P8 -> D3 / D4
/// (transmitted). Each photon is detected with probability `coupling`.
/// N photons in one secondary input fire both detectors with probability
/// 1 - 2^(1-N); one photon in each of P7 and P8 hits D2 and D3 with 1/4.
inline DetectionProbabilities detector_coincidences(const PathPatterns& patterns, double coupling) {
  if (!(coupling >= 0.0 && coupling <= 1.0)) throw Error(Errc::InvalidArgument, "coupling must lie in [0, 1]");
  DetectionProbabilities d;
  d.lost = patterns.bypass;
  for (const auto& [key, mass] : patterns.mass) {
    const auto [n, n7, n8] = key;
    const double detected = std::pow(coupling, n) * mass;
    double reported = 0.0;
    if (n == 1) {
      (n7 == 1 ? d.single_P7 : d.single_P8) += detected;
      reported = detected;
    } else if (n8 == 0) {
      reported = detected * (1.0 - std::pow(2.0, 1 - n));
      d.D1D2 += reported;
      d.all_P7 += detected;
    } else if (n7 == 0) {
      reported = detected * (1.0 - std::pow(2.0, 1 - n));
      d.D3D4 += reported;
      d.all_P8 += detected;
    } else if (n == 2) {
      reported = detected * 0.25;
      d.D2D3 += reported;
    }
    d.lost += mass - reported;
  }
  return d;
}

/// Pre-BS2 state for an N-photon GHZ input at phase phi = 2 pi dL2 / lambda0.
inline FockState ghz_to_noon(int n, double phi, int max_photons = kDefaultMaxPhotons) {
  if (n < 1 || n > max_photons) throw Error(Errc::UnsupportedN, "GHZ photon number " + std::to_string(n));
  SpectralModel mono;
  mono.enabled = false;
  const double delta_L2 = phi * mono.lambda0_um / (2.0 * std::numbers::pi);
  const Circuit circuit = mz_circuit(delta_L2, false);
  std::optional<FockState> s = detail::ghz_on_p4(n, max_photons);
  for (const auto& e : circuit.elements()) s = apply_element(*s, e, mono).state;
  return *s;
}

// ---------------------------------------------------------------------------
// Count sampling

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t point, std::uint64_t channel) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(point), static_cast<std::uint32_t>(channel)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

/// Poisson draw with mean probability * rate * time.
inline std::int64_t sample_counts(double probability, double rate, double time, std::uint64_t seed) {
  if (!(probability >= 0.0 && probability <= 1.0 + 1e-12))
    throw Error(Errc::InvalidArgument, "probability outside [0, 1]");
  if (!(rate * time >= 0.0)) throw Error(Errc::InvalidArgument, "rate * time must be non-negative");
  const double mean = probability * rate * time;
  if (mean == 0.0) return 0;
  std::mt19937_64 rng(seed);
  return std::poisson_distribution<std::int64_t>(mean)(rng);
}

// ---------------------------------------------------------------------------
// Scans

enum class Channel { P7, P8, D1D2, D3D4, D2D3, N7, N8 };
inline constexpr std::array kChannels{Channel::P7,   Channel::P8,   Channel::D1D2, Channel::D3D4,
                                      Channel::D2D3, Channel::N7, Channel::N8};

constexpr std::string_view to_string(Channel c) {
  constexpr std::string_view names[] = {"P7", "P8", "D1D2", "D3D4", "D2D3", "N7", "N8"};
  return names[static_cast<int>(c)];
}

struct ScanPoint {
  double delta_L2_um = 0.0;
  /// Path probabilities of one-photon members, before detection.
  double P7 = 0.0;
  double P8 = 0.0;
  DetectionProbabilities detection;

  /// Detection probability per source event for a counting channel.
  double probability(Channel c) const {
    switch (c) {
      case Channel::P7: return detection.single_P7;
      case Channel::P8: return detection.single_P8;
      case Channel::D1D2: return detection.D1D2;
      case Channel::D3D4: return detection.D3D4;
      case Channel::D2D3: return detection.D2D3;
      case Channel::N7: return detection.all_P7;
      case Channel::N8: return detection.all_P8;
    }
    return 0.0;
  }
};

struct ScanResult {
  Scenario scenario;
  std::vector<ScanPoint> points;
  /// Sampled counts per point, indexed by Channel; empty until sampled.
  std::vector<std::array<std::int64_t, kChannels.size()>> counts;
  /// Ensemble weight that entered the detection model (sum of member weights).
  double total_weight = 0.0;
};

/// Source ensemble as it arrives at P4 (after BS1 for entangled pairs).
inline StateEnsemble ensemble_at_p4(const Scenario& scenario) {
  StateEnsemble ensemble = prepare_source(scenario);
  if (scenario.source == SourceKind::EntangledPair)
    ensemble = mix_at_bs1(ensemble, scenario.v_floor * temporal_overlap(scenario.spectral, scenario.delta_L1_um));
  return ensemble;
}

/// Fills `counts` with Poisson samples, one seed-derived stream per (point, channel).
inline void attach_counts(ScanResult& result, std::uint64_t seed) {
  const auto& sc = result.scenario;
  result.counts.assign(result.points.size(), {});
  for (std::size_t i = 0; i < result.points.size(); ++i)
    for (std::size_t c = 0; c < kChannels.size(); ++c)
      result.counts[i][c] = sample_counts(std::min(1.0, result.points[i].probability(kChannels[c])),
                                          sc.pair_rate, sc.integration_time_s, derive_seed(seed, i, c));
}

/// Evaluates the full chain at every dL2 grid point. The spectral envelopes
/// damp each member's fringe around its phase-averaged value: the one-photon
/// envelope for one-photon members and the two-photon envelope otherwise.
inline ScanResult scan(const Scenario& scenario, bool sample = true) {
  scenario.validate();
  const StateEnsemble ensemble = ensemble_at_p4(scenario);
  SpectralModel mono = scenario.spectral;
  mono.enabled = false;

  // Phase averages over one period of lambda0; exact for harmonics below K.
  const int harmonics = 2 * scenario.max_photons + 2;
  std::vector<std::map<std::pair<int, int>, double>> means(ensemble.size());
  for (std::size_t m = 0; m < ensemble.size(); ++m) {
    const auto& member = ensemble.members()[m];
    if (!detail::all_on(member.state, Path::P4)) continue;
    for (int k = 0; k < harmonics; ++k)
      for (const auto& [key, p] : detail::output_pattern(member.state, mono.lambda0_um * k / harmonics, mono))
        means[m][key] += p / harmonics;
  }

  ScanResult result;
  result.scenario = scenario;
  result.total_weight = ensemble.total_weight();
  for (double x : scenario.delta_L2_grid_um) {
    const double env1 = single_photon_envelope(scenario.spectral, x);
    const double env2 = two_photon_envelope(scenario.spectral, x);
    PathPatterns patterns;
    ScanPoint point;
    point.delta_L2_um = x;
    for (std::size_t m = 0; m < ensemble.size(); ++m) {
      const auto& member = ensemble.members()[m];
      if (!detail::all_on(member.state, Path::P4)) {
        patterns.bypass += member.weight;
        continue;
      }
      const int n = member.state.photon_number();
      const double env = n == 1 ? env1 : env2;
      auto exact = detail::output_pattern(member.state, x, mono);
      for (const auto& [key, mean] : means[m]) {
        const double p = member.weight * (mean + env * (exact[key] - mean));
        patterns.mass[{n, key.first, key.second}] += p;
        if (n == 1) (key.first == 1 ? point.P7 : point.P8) += p;
      }
    }
    point.detection = detector_coincidences(patterns, scenario.coupling_efficiency);
    result.points.push_back(point);
  }
  if (sample) attach_counts(result, scenario.seed);
  return result;
}

}  // namespace mzsim
