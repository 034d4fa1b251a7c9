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

// Fringe and envelope fitting: weighted Levenberg-Marquardt with analytic
// Jacobians, sinusoid and Gaussian models, and the two visibility formulas.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mzsim/error.hpp"
#include "mzsim/spectral.hpp"

namespace mzsim {

/// (C_max - C_min) / (C_max + C_min).
inline double visibility(double c_max, double c_min) {
  if (!(c_min >= 0.0) || !(c_max >= c_min)) throw Error(Errc::InvalidArgument, "need c_max >= c_min >= 0");
  if (c_max == 0.0) throw Error(Errc::Degenerate, "both extrema are zero");
  return (c_max - c_min) / (c_max + c_min);
}

/// (C_plat - C_dip) / C_plat.
inline double hom_visibility(double c_plat, double c_dip) {
  if (!(c_plat > 0.0)) throw Error(Errc::Degenerate, "plateau rate must be positive");
  if (!(c_dip >= 0.0) || !(c_dip <= c_plat)) throw Error(Errc::InvalidArgument, "need 0 <= c_dip <= c_plat");
  return (c_plat - c_dip) / c_plat;
}

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

enum class FitModel { Sinusoid, GaussianEnvelope, GaussianDip };

constexpr std::string_view to_string(FitModel m) {
  switch (m) {
    case FitModel::Sinusoid: return "sinusoid";
    case FitModel::GaussianEnvelope: return "gaussian";
    case FitModel::GaussianDip: return "gaussian-dip";
  }
  return "?";
}

/// Fit results. Lengths are in the units of the fitted abscissa.
struct FitReport {
  FitModel model = FitModel::Sinusoid;
  Estimate offset;
  Estimate amplitude;
  // Sinusoid: offset + amplitude * cos(2 pi x / period + phase).
  Estimate period;
  Estimate phase;
  // Gaussian: offset +- amplitude * exp(-(x - center)^2 / (2 sigma^2)).
  Estimate center;
  Estimate sigma;
  Estimate fwhm;
  /// amplitude / offset for fringes and dips, amplitude / (offset + amplitude)
  /// for envelopes, clamped to [0, 1].
  Estimate visibility;
  double residual_rms = 0.0;
  double chi2 = 0.0;
  int iterations = 0;
};

/// Samples with one-sigma errors. Poisson data uses sqrt(max(n, 1)).
struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma;
  /// False when sigma only carries relative weights; parameter errors are then
  /// rescaled by the reduced chi-square.
  bool absolute_sigma = true;

  static Series poisson(std::vector<double> x, const std::vector<double>& counts) {
    Series s{std::move(x), counts, {}};
    s.sigma.reserve(counts.size());
    for (double n : counts) s.sigma.push_back(std::sqrt(std::max(n, 1.0)));
    return s;
  }

  static Series unweighted(std::vector<double> x, std::vector<double> y) {
    std::vector<double> sigma(y.size(), 1.0);
    return {std::move(x), std::move(y), std::move(sigma), false};
  }

  void validate(std::size_t min_points) const {
    if (x.size() != y.size() || x.size() != sigma.size())
      throw Error(Errc::InvalidArgument, "x, y and sigma differ in length");
    if (x.size() < min_points)
      throw Error(Errc::InsufficientData, std::to_string(x.size()) + " points, need at least " +
                                              std::to_string(min_points));
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error(Errc::InvalidArgument, "non-finite sample");
      if (!(sigma[i] > 0.0)) throw Error(Errc::InvalidArgument, "error bars must be positive");
    }
  }
};

namespace detail {

inline constexpr int kMaxIterations = 200;
inline constexpr double kParameterTolerance = 1e-10;

struct LmResult {
  Eigen::VectorXd p;
  Eigen::MatrixXd covariance;
  double chi2 = 0.0;
  int iterations = 0;
};

/// Minimizes sum(((y - f(x; p)) / sigma)^2). `eval(p, x, grad)` returns f and
/// writes df/dp into grad.
template <typename Eval>
LmResult levenberg_marquardt(Eval&& eval, const Series& data, Eigen::VectorXd p) {
  const auto n = static_cast<Eigen::Index>(data.x.size());
  const auto m = p.size();
  Eigen::VectorXd grad(m);

  auto linearize = [&](const Eigen::VectorXd& at, Eigen::MatrixXd& jac, Eigen::VectorXd& r) {
    jac.resize(n, m);
    r.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = 1.0 / data.sigma[i];
      r(i) = (data.y[i] - eval(at, data.x[i], grad)) * w;
      jac.row(i) = grad.transpose() * w;
    }
  };
  auto chi2_at = [&](const Eigen::VectorXd& at) {
    double c = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = (data.y[i] - eval(at, data.x[i], grad)) / data.sigma[i];
      c += r * r;
    }
    return c;
  };

  Eigen::MatrixXd jac;
  Eigen::VectorXd r;
  linearize(p, jac, r);
  double chi2 = r.squaredNorm();
  double lambda = 1e-3;
  bool converged = false;
  int it = 0;
  for (; it < kMaxIterations && !converged; ++it) {
    const Eigen::MatrixXd a = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    while (true) {
      Eigen::MatrixXd damped = a;
      for (Eigen::Index k = 0; k < m; ++k) damped(k, k) += lambda * std::max(a(k, k), 1e-300);
      const Eigen::VectorXd step = damped.ldlt().solve(g);
      const Eigen::VectorXd trial = p + step;
      const double trial_chi2 = step.allFinite() ? chi2_at(trial) : INFINITY;
      if (trial_chi2 < chi2) {
        bool small = true;
        for (Eigen::Index k = 0; k < m; ++k)
          if (std::abs(step(k)) > kParameterTolerance * std::max(std::abs(trial(k)), 1e-300)) small = false;
        p = trial;
        chi2 = trial_chi2;
        lambda = std::max(lambda / 10.0, 1e-12);
        converged = small;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e16) {
        // No downhill step exists at floating-point resolution.
        converged = true;
        break;
      }
    }
    linearize(p, jac, r);
  }
  if (!converged)
    throw Error(Errc::NoConvergence, "no convergence after " + std::to_string(kMaxIterations) + " iterations");

  const Eigen::MatrixXd a = jac.transpose() * jac;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw Error(Errc::Degenerate, "singular normal matrix at the fit optimum");
  Eigen::MatrixXd cov = lu.inverse();
  if (!data.absolute_sigma && n > m) cov *= chi2 / static_cast<double>(n - m);
  return {p, cov, chi2, it};
}

inline double wrap_phase(double phi) {
  phi = std::remainder(phi, 2.0 * std::numbers::pi);
  return phi <= -std::numbers::pi ? phi + 2.0 * std::numbers::pi : phi;
}

inline double residual_rms(const Series& data, auto&& model) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    const double r = data.y[i] - model(data.x[i]);
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(data.x.size()));
}

struct LinearSinusoid {
  Eigen::Vector3d coef;  // offset, cos, sin
  Eigen::Matrix3d covariance;
};

/// Weighted linear fit of offset + c cos(kx) + s sin(kx) at fixed k.
inline LinearSinusoid linear_sinusoid(const Series& data, double k) {
  const auto n = static_cast<Eigen::Index>(data.x.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = 1.0 / data.sigma[i];
    a(i, 0) = w;
    a(i, 1) = std::cos(k * data.x[i]) * w;
    a(i, 2) = std::sin(k * data.x[i]) * w;
    b(i) = data.y[i] * w;
  }
  const Eigen::Matrix3d normal = a.transpose() * a;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
  if (!lu.isInvertible()) throw Error(Errc::Degenerate, "samples do not resolve a sinusoid");
  const Eigen::Vector3d coef = lu.solve(a.transpose() * b);
  Eigen::Matrix3d cov = lu.inverse();
  if (!data.absolute_sigma && n > 3) cov *= (a * coef - b).squaredNorm() / static_cast<double>(n - 3);
  return {coef, cov};
}

/// Wavenumber of the strongest component of the mean-subtracted signal.
inline double periodogram_peak(const Series& data) {
  const auto [lo, hi] = std::minmax_element(data.x.begin(), data.x.end());
  const double span = *hi - *lo;
  double min_dx = INFINITY;
  std::vector<double> xs = data.x;
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] > xs[i - 1]) min_dx = std::min(min_dx, xs[i] - xs[i - 1]);
  if (!(span > 0.0) || !std::isfinite(min_dx)) throw Error(Errc::InsufficientData, "samples span no range");
  double mean = 0.0;
  for (double y : data.y) mean += y;
  mean /= static_cast<double>(data.y.size());

  const double k_min = 2.0 * std::numbers::pi / span;
  const double k_max = std::numbers::pi / min_dx;
  const double dk = k_min / 10.0;
  double best_k = k_min;
  double best_power = -1.0;
  for (double k = k_min; k <= k_max; k += dk) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < data.x.size(); ++i)
      acc += (data.y[i] - mean) * std::polar(1.0, -k * data.x[i]);
    if (std::norm(acc) > best_power) {
      best_power = std::norm(acc);
      best_k = k;
    }
  }
  return best_k;
}

inline Estimate ratio(double a, double b, double var_a, double var_b, double cov_ab) {
  const double v = a / b;
  const double var = (var_a / (b * b)) + (a * a * var_b / std::pow(b, 4)) - 2.0 * a * cov_ab / std::pow(b, 3);
  return {std::clamp(v, 0.0, 1.0), std::sqrt(std::max(var, 0.0))};
}

}  // namespace detail

/// Weighted sinusoid fit. The period is initialized from the periodogram peak.
inline FitReport fit_fringe(const Series& data) {
  data.validate(8);
  double x_mean = 0.0;
  for (double x : data.x) x_mean += x;
  x_mean /= static_cast<double>(data.x.size());
  Series centered = data;
  for (double& x : centered.x) x -= x_mean;

  const double k0 = detail::periodogram_peak(centered);
  const auto lin = detail::linear_sinusoid(centered, k0);
  Eigen::Vector4d p0(lin.coef(0), std::hypot(lin.coef(1), lin.coef(2)), k0, std::atan2(-lin.coef(2), lin.coef(1)));

  auto eval = [](const Eigen::VectorXd& p, double x, Eigen::VectorXd& g) {
    const double arg = p(2) * x + p(3);
    const double c = std::cos(arg);
    const double s = std::sin(arg);
    g(0) = 1.0;
    g(1) = c;
    g(2) = -p(1) * s * x;
    g(3) = -p(1) * s;
    return p(0) + p(1) * c;
  };
  auto fit = detail::levenberg_marquardt(eval, centered, p0);
  Eigen::VectorXd p = fit.p;
  if (p(1) < 0.0) {
    p(1) = -p(1);
    p(3) += std::numbers::pi;
  }
  if (p(2) < 0.0) {
    // cos is even: flip the wavenumber and phase together.
    p(2) = -p(2);
    p(3) = -p(3);
  }
  const Eigen::MatrixXd& cov = fit.covariance;

  FitReport rep;
  rep.model = FitModel::Sinusoid;
  rep.offset = {p(0), std::sqrt(cov(0, 0))};
  rep.amplitude = {p(1), std::sqrt(cov(1, 1))};
  const double k = p(2);
  rep.period = {2.0 * std::numbers::pi / k, 2.0 * std::numbers::pi / (k * k) * std::sqrt(cov(2, 2))};
  const double phase_var = cov(3, 3) + x_mean * x_mean * cov(2, 2) - 2.0 * x_mean * cov(2, 3);
  rep.phase = {detail::wrap_phase(p(3) - k * x_mean), std::sqrt(std::max(phase_var, 0.0))};
  rep.visibility = detail::ratio(p(1), p(0), cov(1, 1), cov(0, 0), cov(0, 1));
  rep.chi2 = fit.chi2;
  rep.iterations = fit.iterations;
  rep.residual_rms = detail::residual_rms(
      centered, [&](double x) { return p(0) + p(1) * std::cos(k * x + p(3)); });

  const auto [lo, hi] = std::minmax_element(data.x.begin(), data.x.end());
  if (*hi - *lo < 1.5 * rep.period.value)
    throw Error(Errc::InsufficientData, "samples span fewer than 1.5 fitted periods");
  return rep;
}

/// Gaussian peak (GaussianEnvelope) or dip (GaussianDip) on a constant offset.
inline FitReport fit_envelope(const Series& data, FitModel model = FitModel::GaussianEnvelope) {
  if (model == FitModel::Sinusoid) throw Error(Errc::InvalidArgument, "fit_envelope needs a Gaussian model");
  data.validate(5);
  const double sign = model == FitModel::GaussianDip ? -1.0 : 1.0;

  std::vector<std::size_t> order(data.x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return data.x[a] < data.x[b]; });
  const auto [min_it, max_it] = std::minmax_element(data.y.begin(), data.y.end());
  const double depth = *max_it - *min_it;
  const double base = sign > 0 ? *min_it : *max_it;
  const std::size_t extreme = static_cast<std::size_t>((sign > 0 ? max_it : min_it) - data.y.begin());
  double left = data.x[extreme];
  double right = left;
  for (std::size_t i : order)
    if (sign * (data.y[i] - base) > depth / 2.0) {
      left = std::min(left, data.x[i]);
      right = std::max(right, data.x[i]);
    }
  const double span = data.x[order.back()] - data.x[order.front()];
  const double sigma0 = std::max((right - left) / kFwhmPerSigma, span / (4.0 * static_cast<double>(data.x.size())));
  Eigen::Vector4d p0(base, depth, data.x[extreme], sigma0);

  auto eval = [sign](const Eigen::VectorXd& p, double x, Eigen::VectorXd& g) {
    const double u = (x - p(2)) / p(3);
    const double e = std::exp(-0.5 * u * u);
    g(0) = 1.0;
    g(1) = sign * e;
    g(2) = sign * p(1) * e * u / p(3);
    g(3) = sign * p(1) * e * u * u / p(3);
    return p(0) + sign * p(1) * e;
  };
  auto fit = detail::levenberg_marquardt(eval, data, p0);
  const Eigen::VectorXd& p = fit.p;
  const Eigen::MatrixXd& cov = fit.covariance;

  FitReport rep;
  rep.model = model;
  rep.offset = {p(0), std::sqrt(cov(0, 0))};
  rep.amplitude = {p(1), std::sqrt(cov(1, 1))};
  rep.center = {p(2), std::sqrt(cov(2, 2))};
  rep.sigma = {std::abs(p(3)), std::sqrt(cov(3, 3))};
  rep.fwhm = {kFwhmPerSigma * rep.sigma.value, kFwhmPerSigma * rep.sigma.error};
  if (model == FitModel::GaussianDip) {
    rep.visibility = detail::ratio(p(1), p(0), cov(1, 1), cov(0, 0), cov(0, 1));
  } else {
    // a / (o + a)
    const double tot = p(0) + p(1);
    const double var_tot = cov(0, 0) + cov(1, 1) + 2.0 * cov(0, 1);
    rep.visibility = detail::ratio(p(1), tot, cov(1, 1), var_tot, cov(1, 1) + cov(0, 1));
  }
  rep.chi2 = fit.chi2;
  rep.iterations = fit.iterations;
  rep.residual_rms = detail::residual_rms(data, [&](double x) {
    const double u = (x - p(2)) / p(3);
    return p(0) + sign * p(1) * std::exp(-0.5 * u * u);
  });
  if (span < 2.0 * rep.fwhm.value)
    throw Error(Errc::InsufficientData, "samples span less than twice the fitted FWHM");
  return rep;
}

struct AmplitudeProfile {
  std::vector<double> centers;
  std::vector<Estimate> amplitude;
  /// Whether the amplitude errors derive from absolute error bars.
  bool absolute_sigma = true;

  /// Amplitudes weighted by their errors, or uniformly for relative-weight input.
  Series series() const {
    Series s;
    s.absolute_sigma = absolute_sigma;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      s.x.push_back(centers[i]);
      s.y.push_back(amplitude[i].value);
      s.sigma.push_back(absolute_sigma ? std::max(amplitude[i].error, 1e-12) : 1.0);
    }
    return s;
  }
};

/// Local fringe amplitude in windows of `width` around each center. With a
/// known period the fit is linear in offset and quadratures; otherwise each
/// window gets a full sinusoid fit.
inline AmplitudeProfile envelope_amplitude_extraction(const Series& data, std::span<const double> centers,
                                                      double width, std::optional<double> period = std::nullopt) {
  if (data.x.size() != data.y.size() || data.x.size() != data.sigma.size())
    throw Error(Errc::InvalidArgument, "x, y and sigma differ in length");
  if (!(width > 0.0)) throw Error(Errc::WindowTooSmall, "window width must be positive");
  if (period && !(*period > 0.0)) throw Error(Errc::InvalidArgument, "period must be positive");
  AmplitudeProfile out;
  out.absolute_sigma = data.absolute_sigma;
  for (double c : centers) {
    Series window;
    window.absolute_sigma = data.absolute_sigma;
    for (std::size_t i = 0; i < data.x.size(); ++i)
      if (std::abs(data.x[i] - c) <= width / 2.0) {
        window.x.push_back(data.x[i] - c);
        window.y.push_back(data.y[i]);
        window.sigma.push_back(data.sigma[i]);
      }
    if (window.x.size() < 8)
      throw Error(Errc::WindowTooSmall, "window at " + std::to_string(c) + " holds " +
                                            std::to_string(window.x.size()) + " samples, need 8");
    Estimate amp;
    if (period) {
      const auto lin = detail::linear_sinusoid(window, 2.0 * std::numbers::pi / *period);
      const double a = std::hypot(lin.coef(1), lin.coef(2));
      if (a > 0.0) {
        const double gc = lin.coef(1) / a;
        const double gs = lin.coef(2) / a;
        const double var = gc * gc * lin.covariance(1, 1) + gs * gs * lin.covariance(2, 2) +
                           2.0 * gc * gs * lin.covariance(1, 2);
        amp = {a, std::sqrt(std::max(var, 0.0))};
      } else {
        amp = {0.0, std::sqrt(std::max(lin.covariance(1, 1), lin.covariance(2, 2)))};
      }
    } else {
      const auto rep = fit_fringe(window);
      amp = rep.amplitude;
    }
    out.centers.push_back(c);
    out.amplitude.push_back(amp);
  }
  return out;
}

}  // namespace mzsim
