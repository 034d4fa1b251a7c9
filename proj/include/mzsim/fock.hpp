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

// Sparse Fock-space states over labeled bosonic modes.
//
// A state is a map from occupation vectors to complex amplitudes. Occupation
// vectors list only occupied modes, sorted by ModeLabel, so two states over
// the same modes always compare term-by-term.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mzsim/error.hpp"

namespace mzsim {

using Amplitude = std::complex<double>;

inline constexpr double kPruneTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-10;
inline constexpr double kNormTolerance = 1e-12;
inline constexpr int kDefaultMaxPhotons = 6;

/// Spatial paths of the apparatus. D1..D4 are the outputs of the secondary
/// splitters on P7 and P8.
enum class Path : std::uint8_t { P1, P2, P3, P4, P5, P6, P7, P8, D1, D2, D3, D4 };

enum class Pol : std::uint8_t { H, V };

constexpr std::string_view to_string(Path p) {
  constexpr std::string_view names[] = {"P1", "P2", "P3", "P4", "P5", "P6",
                                        "P7", "P8", "D1", "D2", "D3", "D4"};
  return names[static_cast<int>(p)];
}

constexpr std::string_view to_string(Pol p) { return p == Pol::H ? "H" : "V"; }

/// One bosonic mode: path, polarization and spectral bin. Without a spectral
/// model the bin index is a temporal slot (t1 = 0, t2 = 1).
struct ModeLabel {
  Path path = Path::P1;
  Pol pol = Pol::H;
  int bin = 0;

  friend auto operator<=>(const ModeLabel&, const ModeLabel&) = default;
};

inline std::string to_string(const ModeLabel& m) {
  return std::string(to_string(m.path)) + "." + std::string(to_string(m.pol)) + "." +
         std::to_string(m.bin);
}

/// Sparse occupation vector: (mode, count) pairs sorted by mode, counts > 0.
using Occupation = std::vector<std::pair<ModeLabel, int>>;

/// Sorts, merges repeated modes and drops empty entries.
inline Occupation canonical(Occupation occ) {
  std::sort(occ.begin(), occ.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Occupation out;
  for (const auto& [mode, n] : occ) {
    if (n < 0) throw Error(Errc::InvalidArgument, "negative photon count on " + to_string(mode));
    if (n == 0) continue;
    if (!out.empty() && out.back().first == mode) {
      out.back().second += n;
    } else {
      out.emplace_back(mode, n);
    }
  }
  return out;
}

inline int total_photons(const Occupation& occ) {
  int n = 0;
  for (const auto& entry : occ) n += entry.second;
  return n;
}

inline int count_in(const Occupation& occ, const ModeLabel& mode) {
  auto it = std::lower_bound(occ.begin(), occ.end(), mode,
                             [](const auto& e, const ModeLabel& m) { return e.first < m; });
  return (it != occ.end() && it->first == mode) ? it->second : 0;
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }

class FockState;
FockState make_state(const std::vector<std::pair<Occupation, Amplitude>>& terms,
                     int max_photons = kDefaultMaxPhotons);

/// Fixed-photon-number pure state. Immutable; every operation returns a new state.
class FockState {
 public:
  using Terms = std::map<Occupation, Amplitude>;

  /// The vacuum.
  FockState() : terms_{{Occupation{}, Amplitude{1.0}}}, photons_(0) {}

  const Terms& terms() const noexcept { return terms_; }
  int photon_number() const noexcept { return photons_; }
  std::size_t size() const noexcept { return terms_.size(); }

  Amplitude amplitude(const Occupation& occ) const {
    auto it = terms_.find(canonical(occ));
    return it == terms_.end() ? Amplitude{} : it->second;
  }

  std::set<ModeLabel> modes() const {
    std::set<ModeLabel> out;
    for (const auto& [occ, amp] : terms_)
      for (const auto& entry : occ) out.insert(entry.first);
    return out;
  }

  /// Builds a state from canonical terms, pruning negligible amplitudes.
  /// Callers guarantee a common photon number.
  static FockState from_canonical(Terms terms, int photons) {
    std::erase_if(terms, [](const auto& t) { return std::abs(t.second) < kPruneTolerance; });
    if (terms.empty()) throw Error(Errc::EmptyState, "no amplitude above the pruning tolerance");
    FockState s;
    s.terms_ = std::move(terms);
    s.photons_ = photons;
    return s;
  }

 private:
  Terms terms_;
  int photons_;
};

inline FockState make_state(const std::vector<std::pair<Occupation, Amplitude>>& terms,
                            int max_photons) {
  if (terms.empty()) throw Error(Errc::EmptyState, "no terms given");
  FockState::Terms merged;
  int photons = -1;
  for (const auto& [occ, amp] : terms) {
    Occupation c = canonical(occ);
    const int n = total_photons(c);
    if (photons >= 0 && n != photons)
      throw Error(Errc::MixedPhotonNumber,
                  "terms carry " + std::to_string(photons) + " and " + std::to_string(n) + " photons");
    photons = n;
    merged[std::move(c)] += amp;
  }
  if (photons > max_photons)
    throw Error(Errc::PhotonLimitExceeded, std::to_string(photons) + " photons exceed the limit of " +
                                               std::to_string(max_photons));
  return FockState::from_canonical(std::move(merged), photons);
}

/// |1> in a single mode.
inline FockState single_photon(const ModeLabel& mode) { return make_state({{{{mode, 1}}, 1.0}}); }

inline double norm(const FockState& s) {
  double sum = 0.0;
  for (const auto& [occ, amp] : s.terms()) sum += std::norm(amp);
  return std::sqrt(sum);
}

inline FockState scale(const FockState& s, Amplitude factor) {
  FockState::Terms out;
  for (const auto& [occ, amp] : s.terms()) out.emplace(occ, amp * factor);
  return FockState::from_canonical(std::move(out), s.photon_number());
}

inline FockState normalize(const FockState& s) {
  const double n = norm(s);
  if (n < kNormTolerance) throw Error(Errc::ZeroNorm, "cannot normalize a state of norm " + std::to_string(n));
  return scale(s, 1.0 / n);
}

/// <a|b>
inline Amplitude inner_product(const FockState& a, const FockState& b) {
  Amplitude sum{};
  for (const auto& [occ, amp] : a.terms()) {
    auto it = b.terms().find(occ);
    if (it != b.terms().end()) sum += std::conj(amp) * it->second;
  }
  return sum;
}

/// Product state of two states on disjoint modes.
inline FockState tensor(const FockState& a, const FockState& b, int max_photons = kDefaultMaxPhotons) {
  const auto ma = a.modes();
  for (const auto& m : b.modes())
    if (ma.contains(m)) throw Error(Errc::OverlappingModes, "both operands occupy " + to_string(m));
  const int photons = a.photon_number() + b.photon_number();
  if (photons > max_photons)
    throw Error(Errc::PhotonLimitExceeded, std::to_string(photons) + " photons exceed the limit");
  FockState::Terms out;
  for (const auto& [oa, xa] : a.terms())
    for (const auto& [ob, xb] : b.terms()) {
      Occupation occ = oa;
      occ.insert(occ.end(), ob.begin(), ob.end());
      out.emplace(canonical(std::move(occ)), xa * xb);
    }
  return FockState::from_canonical(std::move(out), photons);
}

/// Relabels modes. The map must stay injective on the modes of every term.
template <typename ModeMap>
FockState map_modes(const FockState& s, ModeMap&& fn) {
  FockState::Terms out;
  for (const auto& [occ, amp] : s.terms()) {
    Occupation mapped;
    mapped.reserve(occ.size());
    for (const auto& [mode, n] : occ) mapped.emplace_back(fn(mode), n);
    std::sort(mapped.begin(), mapped.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < mapped.size(); ++i)
      if (mapped[i].first == mapped[i - 1].first)
        throw Error(Errc::OverlappingModes, "two modes routed onto " + to_string(mapped[i].first));
    out[std::move(mapped)] += amp;
  }
  return FockState::from_canonical(std::move(out), s.photon_number());
}

/// Multiplies each term by prod_m phase(m)^n_m.
template <typename PhaseFn>
FockState apply_phases(const FockState& s, PhaseFn&& phase) {
  FockState::Terms out;
  for (const auto& [occ, amp] : s.terms()) {
    Amplitude factor{1.0};
    for (const auto& [mode, n] : occ) factor *= std::pow(phase(mode), n);
    out.emplace(occ, amp * factor);
  }
  return FockState::from_canonical(std::move(out), s.photon_number());
}

/// Applies a linear-optical transformation on `modes`: each creation operator
/// a_j^dagger on modes[j] becomes sum_k u(k, j) a_k^dagger. Amplitudes are
/// re-expanded with the sqrt(n!) normalization of Fock states.
inline FockState apply_mode_unitary(const FockState& s, const Eigen::MatrixXcd& u,
                                    std::span<const ModeLabel> modes) {
  const auto d = static_cast<Eigen::Index>(modes.size());
  if (u.rows() != d || u.cols() != d)
    throw Error(Errc::InvalidArgument, "matrix size does not match the mode list");
  std::map<ModeLabel, int> index;
  for (int j = 0; j < d; ++j)
    if (!index.emplace(modes[j], j).second) throw Error(Errc::DuplicateMode, to_string(modes[j]));
  const double deviation =
      (u.adjoint() * u - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
  if (deviation > kUnitaryTolerance)
    throw Error(Errc::NonUnitary, "|u^dagger u - 1| = " + std::to_string(deviation));

  using Monomial = std::vector<int>;
  using Polynomial = std::map<Monomial, Amplitude>;
  // Expansion of prod_j (sum_k u_kj a_k^dagger)^{n_j} / sqrt(n_j!), as Fock amplitudes.
  std::map<std::vector<int>, Polynomial> cache;
  auto expand = [&](const std::vector<int>& in) -> const Polynomial& {
    if (auto it = cache.find(in); it != cache.end()) return it->second;
    Polynomial poly{{Monomial(d, 0), Amplitude{1.0}}};
    double in_norm = 1.0;
    for (int j = 0; j < d; ++j) {
      in_norm *= factorial(in[j]);
      for (int p = 0; p < in[j]; ++p) {
        Polynomial next;
        for (const auto& [mono, c] : poly)
          for (int k = 0; k < d; ++k) {
            if (u(k, j) == Amplitude{}) continue;
            Monomial m = mono;
            ++m[k];
            next[std::move(m)] += c * u(k, j);
          }
        poly = std::move(next);
      }
    }
    for (auto& [mono, c] : poly) {
      double out_norm = 1.0;
      for (int n : mono) out_norm *= factorial(n);
      c *= std::sqrt(out_norm / in_norm);
    }
    return cache.emplace(in, std::move(poly)).first->second;
  };

  FockState::Terms out;
  for (const auto& [occ, amp] : s.terms()) {
    std::vector<int> in(d, 0);
    Occupation rest;
    for (const auto& [mode, n] : occ) {
      if (auto it = index.find(mode); it != index.end()) {
        in[it->second] = n;
      } else {
        rest.emplace_back(mode, n);
      }
    }
    for (const auto& [mono, c] : expand(in)) {
      Occupation target = rest;
      for (int k = 0; k < d; ++k)
        if (mono[k] > 0) target.emplace_back(modes[k], mono[k]);
      out[canonical(std::move(target))] += amp * c;
    }
  }
  return FockState::from_canonical(std::move(out), s.photon_number());
}

inline FockState apply_mode_unitary(const FockState& s, const Eigen::MatrixXcd& u,
                                    std::initializer_list<ModeLabel> modes) {
  return apply_mode_unitary(s, u, std::span<const ModeLabel>(modes.begin(), modes.size()));
}

/// Partial occupation constraint: listed modes must hold exactly the given count.
using Pattern = std::map<ModeLabel, int>;

struct Projection {
  /// Squared-amplitude mass of the matching terms (not divided by the input norm).
  double probability = 0.0;
  /// Renormalized state on the unconstrained modes; empty when nothing matched.
  std::optional<FockState> state;
};

inline Projection project(const FockState& s, const Pattern& pattern) {
  int constrained = 0;
  for (const auto& [mode, n] : pattern) {
    if (n < 0) throw Error(Errc::InvalidArgument, "negative count in pattern");
    constrained += n;
  }
  FockState::Terms remainder;
  double mass = 0.0;
  for (const auto& [occ, amp] : s.terms()) {
    bool match = true;
    for (const auto& [mode, n] : pattern)
      if (count_in(occ, mode) != n) {
        match = false;
        break;
      }
    if (!match) continue;
    mass += std::norm(amp);
    Occupation rest;
    for (const auto& entry : occ)
      if (!pattern.contains(entry.first)) rest.push_back(entry);
    remainder.emplace(std::move(rest), amp);
  }
  if (mass == 0.0) return {};
  const double scale_by = 1.0 / std::sqrt(mass);
  for (auto& [occ, amp] : remainder) amp *= scale_by;
  return {mass, FockState::from_canonical(std::move(remainder), s.photon_number() - constrained)};
}

/// Probability mass grouped by a caller-supplied key of each occupation vector.
template <typename KeyFn>
auto marginal(const FockState& s, KeyFn&& key) {
  std::map<decltype(key(std::declval<const Occupation&>())), double> out;
  for (const auto& [occ, amp] : s.terms()) out[key(occ)] += std::norm(amp);
  return out;
}

/// Weighted mixture of normalized pure states. The weight deficit below one
/// accounts for events removed by post-selection.
class StateEnsemble {
 public:
  struct Member {
    double weight;
    FockState state;
  };

  StateEnsemble() = default;
  explicit StateEnsemble(FockState pure) { add(1.0, std::move(pure)); }

  void add(double weight, FockState state) {
    if (!(weight >= 0.0)) throw Error(Errc::InvalidArgument, "negative ensemble weight");
    if (std::abs(norm(state) - 1.0) > 1e-9)
      throw Error(Errc::InvalidArgument, "ensemble members must be normalized");
    if (total_weight() + weight > 1.0 + 1e-9)
      throw Error(Errc::InvalidArgument, "ensemble weights exceed one");
    members_.push_back({weight, std::move(state)});
  }

  const std::vector<Member>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }

  double total_weight() const {
    double w = 0.0;
    for (const auto& m : members_) w += m.weight;
    return w;
  }

  /// Merges members equal up to a global phase.
  StateEnsemble merged() const {
    StateEnsemble out;
    for (const auto& m : members_) {
      auto same = std::find_if(out.members_.begin(), out.members_.end(), [&](const Member& o) {
        return o.state.photon_number() == m.state.photon_number() &&
               std::abs(std::abs(inner_product(o.state, m.state)) - 1.0) < 1e-9;
      });
      if (same != out.members_.end()) {
        same->weight += m.weight;
      } else {
        out.members_.push_back(m);
      }
    }
    return out;
  }

 private:
  std::vector<Member> members_;
};

}  // namespace mzsim
