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

// Gaussian wave-packet model of the down-converted photon pairs.
//
// Lengths are path lengths in micrometres, angular frequencies are in rad/fs.
// An envelope exp(-dL^2 / (2 sigma_L^2)) has FWHM equal to the coherence
// length; the matching power spectrum has standard deviation c / sigma_L.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "mzsim/error.hpp"

namespace mzsim {

inline constexpr double kSpeedOfLight = 0.299792458;  // um / fs
inline const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::log(2.0));

struct SpectralModel {
  double lambda0_um = 0.810;
  /// Single-photon coherence length; sets the phase-matching factor.
  double xi_single_um = 126.0;
  /// Pump coherence length; sets the sum-frequency factor.
  double xi_pump_um = 300.0;
  int bin_count = 257;
  /// Angular-frequency span of the joint-spectrum grid. Zero selects +-5 sigma
  /// of the single-photon marginal.
  double span = 0.0;
  /// Disabled: monochromatic photons at lambda0, distinguishable only by
  /// discrete temporal slots.
  bool enabled = true;

  void validate() const {
    if (!(lambda0_um > 0.0)) throw Error(Errc::NonPositiveLength, "lambda0 must be positive");
    if (!(xi_single_um > 0.0) || !(xi_pump_um > 0.0))
      throw Error(Errc::NonPositiveLength, "coherence lengths must be positive");
    if (bin_count < 1) throw Error(Errc::InvalidArgument, "bin_count must be at least 1");
    if (span < 0.0) throw Error(Errc::InvalidArgument, "span must be non-negative");
  }

  double center_frequency() const { return 2.0 * std::numbers::pi * kSpeedOfLight / lambda0_um; }

  /// Resolved full span of the frequency grid.
  double grid_span() const;

  /// Detuning of bin k from the center frequency.
  double bin_detuning(int k) const {
    if (k < 0 || k >= bin_count)
      throw Error(Errc::InvalidArgument, "spectral bin " + std::to_string(k) + " outside the grid");
    if (bin_count == 1) return 0.0;
    return grid_span() * (static_cast<double>(k) / (bin_count - 1) - 0.5);
  }

  double bin_wavelength(int k) const {
    if (!enabled) return lambda0_um;
    return 2.0 * std::numbers::pi * kSpeedOfLight / (center_frequency() + bin_detuning(k));
  }
};

/// Spectral standard deviation whose Gaussian interference envelope has FWHM `xi_um`.
inline double bandwidth_from_coherence_length(double xi_um) {
  if (!(xi_um > 0.0)) throw Error(Errc::NonPositiveLength, "coherence length must be positive");
  return kSpeedOfLight * kFwhmPerSigma / xi_um;
}

/// Envelope FWHM in path length for a spectral standard deviation; inverse of the above.
inline double envelope_fwhm(double sigma_omega) {
  if (!(sigma_omega > 0.0)) throw Error(Errc::InvalidArgument, "bandwidth must be positive");
  return kSpeedOfLight * kFwhmPerSigma / sigma_omega;
}

inline double SpectralModel::grid_span() const {
  if (span > 0.0) return span;
  const double s_single = bandwidth_from_coherence_length(xi_single_um);
  const double s_pump = bandwidth_from_coherence_length(xi_pump_um);
  return 10.0 * std::sqrt(s_single * s_single + 0.25 * s_pump * s_pump);
}

namespace detail {

/// Normalized cosine transform of a Gaussian power spectrum, by trapezoidal
/// quadrature over +-8 sigma. Beyond the grid's Nyquist delay the true value is
/// below exp(-1000) and zero is returned.
inline double gaussian_overlap(double sigma_omega, double delta_L_um, int bins) {
  const int n = std::max(bins, 9);
  const double half = 8.0 * sigma_omega;
  const double h = 2.0 * half / (n - 1);
  if (h * std::abs(delta_L_um) / kSpeedOfLight >= std::numbers::pi) return 0.0;
  double num = 0.0;
  double den = 0.0;
  for (int k = 0; k < n; ++k) {
    const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
    const double omega = -half + k * h;
    const double power = std::exp(-0.5 * omega * omega / (sigma_omega * sigma_omega));
    num += w * power * std::cos(omega * delta_L_um / kSpeedOfLight);
    den += w * power;
  }
  return std::clamp(num / den, 0.0, 1.0);
}

}  // namespace detail

/// Wave-packet overlap v(dL1) of the two photons at the first beam splitter;
/// v(0) = 1. With the spectral model disabled the photons share a temporal
/// slot only at zero delay.
inline double temporal_overlap(const SpectralModel& model, double delta_L1_um) {
  if (!std::isfinite(delta_L1_um)) throw Error(Errc::InvalidArgument, "delay must be finite");
  if (!model.enabled) return delta_L1_um == 0.0 ? 1.0 : 0.0;
  return detail::gaussian_overlap(bandwidth_from_coherence_length(model.xi_single_um), delta_L1_um,
                                  model.bin_count);
}

/// Fringe-amplitude envelope of one-photon interference versus dL2.
inline double single_photon_envelope(const SpectralModel& model, double delta_L2_um) {
  if (!model.enabled) return 1.0;
  return detail::gaussian_overlap(bandwidth_from_coherence_length(model.xi_single_um), delta_L2_um,
                                  model.bin_count);
}

/// Fringe-amplitude envelope of the two-photon (lambda/2) fringes versus dL2.
/// Both photons carry the pump phase, so the sum-frequency width sets it.
inline double two_photon_envelope(const SpectralModel& model, double delta_L2_um) {
  if (!model.enabled) return 1.0;
  return detail::gaussian_overlap(bandwidth_from_coherence_length(model.xi_pump_um), delta_L2_um,
                                  model.bin_count);
}

/// Normalized P3/P4 coincidence rate C(dL1) / C_plateau.
inline double hom_coincidence(const SpectralModel& model, double delta_L1_um, double v_floor) {
  if (!(v_floor >= 0.0 && v_floor <= 1.0))
    throw Error(Errc::InvalidArgument, "v_floor must lie in [0, 1]");
  return 1.0 - v_floor * temporal_overlap(model, delta_L1_um);
}

/// f(w1, w2) on a square grid of detunings shared by both photons.
struct JointSpectralAmplitude {
  std::vector<double> detuning;
  Eigen::MatrixXcd values;  // values(i, j) = f(detuning[i], detuning[j])
};

/// f = alpha(d1 + d2) * phi((d1 - d2) / 2) with Gaussian factors. |alpha|^2 has
/// the pump bandwidth in the sum detuning and |phi|^2 the single-photon
/// bandwidth in the per-photon detuning (d1 - d2) / 2. Unit discrete L2 norm.
inline JointSpectralAmplitude build_jsa(const SpectralModel& model) {
  model.validate();
  if (!model.enabled) throw Error(Errc::InvalidArgument, "joint spectrum needs an enabled spectral model");
  const int n = model.bin_count;
  const double s_pump = bandwidth_from_coherence_length(model.xi_pump_um);
  const double s_single = bandwidth_from_coherence_length(model.xi_single_um);
  const double step = n > 1 ? model.grid_span() / (n - 1) : 0.0;
  // The sum detuning moves in steps of `step`, the per-photon detuning in step / 2.
  if (n < 8 || 6.0 * s_pump < 8.0 * step || 6.0 * s_single < 8.0 * 0.5 * step)
    throw Error(Errc::GridTooCoarse, "fewer than 8 bins across +-3 sigma of a spectral factor");

  JointSpectralAmplitude jsa;
  jsa.detuning.resize(n);
  for (int k = 0; k < n; ++k) jsa.detuning[k] = model.bin_detuning(k);
  jsa.values.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double sum = jsa.detuning[i] + jsa.detuning[j];
      const double diff = 0.5 * (jsa.detuning[i] - jsa.detuning[j]);
      jsa.values(i, j) = std::exp(-sum * sum / (4.0 * s_pump * s_pump) -
                                  diff * diff / (4.0 * s_single * s_single));
    }
  jsa.values /= jsa.values.norm();
  return jsa;
}

/// Pearson correlation of the two photon frequencies under |f|^2.
inline double jsa_frequency_correlation(const JointSpectralAmplitude& jsa) {
  const auto n = static_cast<int>(jsa.detuning.size());
  double m1 = 0, m2 = 0, m11 = 0, m22 = 0, m12 = 0, total = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double p = std::norm(jsa.values(i, j));
      const double a = jsa.detuning[i];
      const double b = jsa.detuning[j];
      total += p;
      m1 += p * a;
      m2 += p * b;
      m11 += p * a * a;
      m22 += p * b * b;
      m12 += p * a * b;
    }
  m1 /= total, m2 /= total, m11 /= total, m22 /= total, m12 /= total;
  return (m12 - m1 * m2) / std::sqrt((m11 - m1 * m1) * (m22 - m2 * m2));
}

/// One-photon fringe envelope from the marginal spectrum of photon 1.
inline double jsa_single_photon_envelope(const JointSpectralAmplitude& jsa, double delta_L_um) {
  std::complex<double> acc{};
  double total = 0.0;
  const auto n = static_cast<int>(jsa.detuning.size());
  for (int i = 0; i < n; ++i) {
    const double marginal = jsa.values.row(i).squaredNorm();
    total += marginal;
    acc += marginal * std::polar(1.0, jsa.detuning[i] * delta_L_um / kSpeedOfLight);
  }
  return std::abs(acc) / total;
}

/// Two-photon fringe envelope: both photons delayed together, phase (d1 + d2) dL / c.
inline double jsa_two_photon_envelope(const JointSpectralAmplitude& jsa, double delta_L_um) {
  std::complex<double> acc{};
  double total = 0.0;
  const auto n = static_cast<int>(jsa.detuning.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double p = std::norm(jsa.values(i, j));
      total += p;
      acc += p * std::polar(1.0, (jsa.detuning[i] + jsa.detuning[j]) * delta_L_um / kSpeedOfLight);
    }
  return std::abs(acc) / total;
}

}  // namespace mzsim
