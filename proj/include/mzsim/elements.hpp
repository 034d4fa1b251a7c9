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

// Optical elements as mode transformations on Fock states.
//
// Beam-splitter convention (used everywhere in this library): symmetric,
// transmitted amplitude sqrt(T), reflected amplitude i sqrt(1 - T). A photon
// entering in_a leaves on out_a with sqrt(T) and on out_b with i sqrt(1 - T);
// a photon entering in_b leaves on out_b with sqrt(T) and on out_a with
// i sqrt(1 - T).

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mzsim/error.hpp"
#include "mzsim/fock.hpp"
#include "mzsim/spectral.hpp"

namespace mzsim {

struct BeamSplitter {
  Path in_a;
  Path in_b;
  Path out_a;
  Path out_b;
  double transmissivity = 0.5;
};

/// Ideal polarizing beam splitter: H transmits, V reflects. The optional
/// second input is routed mirror-wise (H to out_reflect, V to out_transmit),
/// so a second PBS can recombine two arms.
struct PolarizingBeamSplitter {
  Path in_a;
  Path out_transmit;
  Path out_reflect;
  std::optional<Path> in_b;
};

/// Jones matrix [[cos 2t, sin 2t], [sin 2t, -cos 2t]] in the (H, V) basis.
struct HalfWavePlate {
  Path path;
  double angle_rad;
};

/// Extra path length on `path` (positive = longer). Each photon in spectral
/// bin k acquires exp(i 2 pi delta_L / lambda_k).
struct PhaseDelay {
  Path path;
  double delta_L_um;
};

/// Projects every photon on `path` onto cos(a) H + sin(a) V.
struct Polarizer {
  Path path;
  double angle_rad;
};

using OpticalElement =
    std::variant<BeamSplitter, PolarizingBeamSplitter, HalfWavePlate, PhaseDelay, Polarizer>;

inline double degrees(double deg) { return deg * std::numbers::pi / 180.0; }

namespace detail {

/// Distinct (pol, bin) sub-modes occupied on the given paths.
inline std::set<std::pair<Pol, int>> submodes_on(const FockState& s, std::initializer_list<Path> paths) {
  std::set<std::pair<Pol, int>> out;
  for (const auto& m : s.modes())
    for (Path p : paths)
      if (m.path == p) out.emplace(m.pol, m.bin);
  return out;
}

inline std::set<int> bins_on(const FockState& s, Path path) {
  std::set<int> out;
  for (const auto& m : s.modes())
    if (m.path == path) out.insert(m.bin);
  return out;
}

/// Applies the same 2x2 matrix to the H/V pair of every occupied bin on `path`.
inline FockState apply_polarization_matrix(const FockState& s, Path path, const Eigen::Matrix2cd& jones) {
  FockState out = s;
  for (int bin : bins_on(s, path)) {
    const ModeLabel pair[] = {{path, Pol::H, bin}, {path, Pol::V, bin}};
    out = apply_mode_unitary(out, jones, pair);
  }
  return out;
}

}  // namespace detail

inline FockState bs_apply(const FockState& s, const BeamSplitter& bs) {
  if (!(bs.transmissivity >= 0.0 && bs.transmissivity <= 1.0))
    throw Error(Errc::InvalidArgument, "transmissivity must lie in [0, 1]");
  if (bs.in_a == bs.in_b || bs.out_a == bs.out_b)
    throw Error(Errc::DuplicateMode, "beam splitter ports must be distinct");
  FockState routed = map_modes(s, [&](ModeLabel m) {
    if (m.path == bs.in_a) {
      m.path = bs.out_a;
    } else if (m.path == bs.in_b) {
      m.path = bs.out_b;
    }
    return m;
  });
  const double t = std::sqrt(bs.transmissivity);
  const double r = std::sqrt(1.0 - bs.transmissivity);
  Eigen::Matrix2cd u;
  u << t, Amplitude(0, r), Amplitude(0, r), t;
  for (const auto& [pol, bin] : detail::submodes_on(routed, {bs.out_a, bs.out_b})) {
    const ModeLabel pair[] = {{bs.out_a, pol, bin}, {bs.out_b, pol, bin}};
    routed = apply_mode_unitary(routed, u, pair);
  }
  return routed;
}

inline FockState pbs_apply(const FockState& s, const PolarizingBeamSplitter& pbs) {
  if (pbs.out_transmit == pbs.out_reflect || (pbs.in_b && *pbs.in_b == pbs.in_a))
    throw Error(Errc::DuplicateMode, "polarizing beam splitter ports must be distinct");
  return map_modes(s, [&](ModeLabel m) {
    if (m.path == pbs.in_a) {
      m.path = m.pol == Pol::H ? pbs.out_transmit : pbs.out_reflect;
    } else if (pbs.in_b && m.path == *pbs.in_b) {
      m.path = m.pol == Pol::H ? pbs.out_reflect : pbs.out_transmit;
    }
    return m;
  });
}

inline FockState hwp_apply(const FockState& s, const HalfWavePlate& hwp) {
  const double c = std::cos(2.0 * hwp.angle_rad);
  const double sn = std::sin(2.0 * hwp.angle_rad);
  Eigen::Matrix2cd jones;
  jones << c, sn, sn, -c;
  return detail::apply_polarization_matrix(s, hwp.path, jones);
}

inline FockState phase_delay_apply(const FockState& s, const PhaseDelay& delay,
                                   const SpectralModel& spectral) {
  if (!std::isfinite(delay.delta_L_um)) throw Error(Errc::InvalidArgument, "delay must be finite");
  return apply_phases(s, [&](const ModeLabel& m) {
    if (m.path != delay.path) return Amplitude{1.0};
    const double lambda = spectral.enabled ? spectral.bin_wavelength(m.bin) : spectral.lambda0_um;
    return std::polar(1.0, 2.0 * std::numbers::pi * delay.delta_L_um / lambda);
  });
}

/// Non-unitary: returns the pass probability and the renormalized survivor.
inline Projection polarizer_apply(const FockState& s, const Polarizer& pol) {
  const double c = std::cos(pol.angle_rad);
  const double sn = std::sin(pol.angle_rad);
  // Rotate so the H slot holds the transmitted axis and V the blocked one.
  Eigen::Matrix2cd to_axis;
  to_axis << c, sn, -sn, c;
  const FockState rotated = detail::apply_polarization_matrix(s, pol.path, to_axis);
  Pattern blocked;
  for (int bin : detail::bins_on(rotated, pol.path)) blocked[{pol.path, Pol::V, bin}] = 0;
  Projection kept = project(rotated, blocked);
  if (!kept.state) return kept;
  kept.probability /= norm(s) * norm(s);
  kept.state = detail::apply_polarization_matrix(*kept.state, pol.path, to_axis.adjoint());
  return kept;
}

/// Applies one element. Unitary elements pass with probability one.
inline Projection apply_element(const FockState& s, const OpticalElement& element,
                                const SpectralModel& spectral) {
  return std::visit(
      [&](const auto& e) -> Projection {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, BeamSplitter>) {
          return {1.0, bs_apply(s, e)};
        } else if constexpr (std::is_same_v<T, PolarizingBeamSplitter>) {
          return {1.0, pbs_apply(s, e)};
        } else if constexpr (std::is_same_v<T, HalfWavePlate>) {
          return {1.0, hwp_apply(s, e)};
        } else if constexpr (std::is_same_v<T, PhaseDelay>) {
          return {1.0, phase_delay_apply(s, e, spectral)};
        } else {
          return polarizer_apply(s, e);
        }
      },
      element);
}

inline std::vector<Path> referenced_paths(const OpticalElement& element) {
  return std::visit(
      [](const auto& e) -> std::vector<Path> {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, BeamSplitter>) {
          return {e.in_a, e.in_b, e.out_a, e.out_b};
        } else if constexpr (std::is_same_v<T, PolarizingBeamSplitter>) {
          std::vector<Path> p{e.in_a, e.out_transmit, e.out_reflect};
          if (e.in_b) p.push_back(*e.in_b);
          return p;
        } else {
          return {e.path};
        }
      },
      element);
}

/// Ordered element list over a registry of paths.
class Circuit {
 public:
  explicit Circuit(std::set<Path> registry) : registry_(std::move(registry)) {}

  Circuit& add(OpticalElement element) {
    for (Path p : referenced_paths(element))
      if (!registry_.contains(p))
        throw Error(Errc::UnregisteredPath, std::string(to_string(p)) + " is not in the circuit registry");
    elements_.push_back(std::move(element));
    return *this;
  }

  const std::vector<OpticalElement>& elements() const noexcept { return elements_; }
  const std::set<Path>& registry() const noexcept { return registry_; }

 private:
  std::set<Path> registry_;
  std::vector<OpticalElement> elements_;
};

/// Runs every member through the circuit. Polarizers rescale member weights;
/// members that are fully blocked are dropped.
inline StateEnsemble apply_circuit(const Circuit& circuit, const StateEnsemble& input,
                                   const SpectralModel& spectral) {
  StateEnsemble out;
  for (const auto& member : input.members()) {
    double weight = member.weight;
    std::optional<FockState> state = member.state;
    for (const auto& element : circuit.elements()) {
      Projection step = apply_element(*state, element, spectral);
      weight *= step.probability;
      state = std::move(step.state);
      if (!state) break;
    }
    if (state && weight > 0.0) out.add(weight, normalize(*state));
  }
  if (input.size() > 0 && out.size() == 0)
    throw Error(Errc::ZeroNorm, "no ensemble member passes the circuit");
  return out;
}

}  // namespace mzsim
