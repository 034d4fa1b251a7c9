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

// Independent reference computations used by the tests. Nothing here calls
// into the library's transformation code.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Counts = std::vector<int>;

inline double fact(int n) { return n <= 1 ? 1.0 : n * fact(n - 1); }

/// Permanent by summing over all permutations.
inline cplx permanent(const Eigen::MatrixXcd& m) {
  const int n = static_cast<int>(m.rows());
  if (n == 0) return 1.0;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  cplx total = 0.0;
  do {
    cplx p = 1.0;
    for (int i = 0; i < n; ++i) p *= m(i, perm[i]);
    total += p;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

/// <out| U |in> for a_j^dagger -> sum_k u(k, j) a_k^dagger.
inline cplx transition(const Eigen::MatrixXcd& u, const Counts& in, const Counts& out) {
  std::vector<int> rows, cols;
  double norm = 1.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (int r = 0; r < out[k]; ++r) rows.push_back(static_cast<int>(k));
    norm *= fact(out[k]);
  }
  for (std::size_t j = 0; j < in.size(); ++j) {
    for (int r = 0; r < in[j]; ++r) cols.push_back(static_cast<int>(j));
    norm *= fact(in[j]);
  }
  if (rows.size() != cols.size()) return 0.0;
  Eigen::MatrixXcd sub(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) sub(a, b) = u(rows[a], cols[b]);
  return permanent(sub) / std::sqrt(norm);
}

/// Every occupation vector of n photons over d modes.
inline std::vector<Counts> all_occupations(int d, int n) {
  std::vector<Counts> out;
  Counts c(d, 0);
  std::function<void(int, int)> rec = [&](int mode, int left) {
    if (mode == d - 1) {
      c[mode] = left;
      out.push_back(c);
      return;
    }
    for (int k = left; k >= 0; --k) {
      c[mode] = k;
      rec(mode + 1, left - k);
    }
  };
  if (d > 0) rec(0, n);
  return out;
}

/// Dense evolution of a state given on occupation vectors.
inline std::map<Counts, cplx> evolve(const Eigen::MatrixXcd& u, const std::map<Counts, cplx>& in) {
  std::map<Counts, cplx> out;
  if (in.empty()) return out;
  const int d = static_cast<int>(u.rows());
  const int n = std::accumulate(in.begin()->first.begin(), in.begin()->first.end(), 0);
  for (const auto& occ : all_occupations(d, n)) {
    cplx a = 0.0;
    for (const auto& [src, amp] : in) a += amp * transition(u, src, occ);
    if (std::abs(a) > 1e-14) out[occ] = a;
  }
  return out;
}

/// Polynomial in two creation operators: (power of a, power of b) -> coefficient.
using Poly2 = std::map<std::pair<int, int>, cplx>;

inline Poly2 multiply(const Poly2& x, const Poly2& y) {
  Poly2 out;
  for (const auto& [ex, cx] : x)
    for (const auto& [ey, cy] : y) out[{ex.first + ey.first, ex.second + ey.second}] += cx * cy;
  return out;
}

/// Amplitudes on |p, q> of the state the polynomial creates from vacuum.
inline std::map<std::pair<int, int>, cplx> to_kets(const Poly2& p) {
  std::map<std::pair<int, int>, cplx> out;
  for (const auto& [e, c] : p) out[e] = c * std::sqrt(fact(e.first) * fact(e.second));
  return out;
}

/// Haar-ish random unitary from the QR decomposition of a complex Gaussian matrix.
template <typename Rng>
Eigen::MatrixXcd random_unitary(int d, Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd z(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) z(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i) q.col(i) *= std::polar(1.0, std::arg(r(i, i)));
  return q;
}

/// Interference envelope |integral S(w) exp(i w dL / c) dw| / integral S for a
/// Gaussian power spectrum of width sigma, by composite Simpson over +-12 sigma.
inline double gaussian_envelope(double sigma, double dL_um, int intervals = 20000) {
  constexpr double c = 0.299792458;
  const double a = -12.0 * sigma;
  const double h = 24.0 * sigma / intervals;
  cplx num = 0.0;
  double den = 0.0;
  for (int k = 0; k <= intervals; ++k) {
    const double w = a + k * h;
    const double wt = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double s = std::exp(-0.5 * w * w / (sigma * sigma));
    num += wt * s * std::polar(1.0, w * dL_um / c);
    den += wt * s;
  }
  return std::abs(num) / den;
}

/// Full width at half maximum of an even, decreasing function on [0, hi], by bisection.
inline double fwhm_by_bisection(const std::function<double(double)>& f, double hi) {
  double lo = 0.0;
  const double half = 0.5 * f(0.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > half ? lo : hi) = mid;
  }
  return lo + hi;
}

}  // namespace oracle
