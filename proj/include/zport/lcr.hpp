#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "zport/detail/linalg.hpp"
#include "zport/errors.hpp"
#include "zport/network.hpp"

namespace zport {

/// Equivalent circuit of the sensor seen by the impedance analyzer:
/// a series resistor feeding a lossless parallel inductor-capacitor tank.
struct LcrModel {
  double r_ohm;
  double l_h;
  double c_f;
};

inline void validate(const LcrModel& m) {
  if (!is_finite(m.r_ohm) || m.r_ohm < 0.0)
    throw std::invalid_argument("series resistance must be finite and >= 0");
  if (!is_finite(m.l_h) || !(m.l_h > 0.0))
    throw std::invalid_argument("inductance must be finite and > 0");
  if (!is_finite(m.c_f) || !(m.c_f > 0.0))
    throw std::invalid_argument("capacitance must be finite and > 0");
}

/// Measured complex impedance against frequency.
class ImpedanceSweep {
 public:
  ImpedanceSweep(FrequencyGrid grid, std::vector<Complex> z)
      : grid_(std::move(grid)), z_(std::move(z)) {
    if (z_.size() != grid_.size())
      throw std::invalid_argument("impedance count must match grid length");
    for (const Complex& v : z_)
      if (!is_finite(v)) throw std::invalid_argument("impedance samples must be finite");
  }

  const FrequencyGrid& grid() const noexcept { return grid_; }
  const std::vector<Complex>& z() const noexcept { return z_; }
  std::size_t size() const noexcept { return z_.size(); }

 private:
  FrequencyGrid grid_;
  std::vector<Complex> z_;
};

/// Parallel-resonance frequency of the tank, 1 / (2 pi sqrt(LC)).
inline double lcr_resonance(const LcrModel& m) {
  validate(m);
  return 1.0 / (kTwoPi * std::sqrt(m.l_h * m.c_f));
}

namespace detail {

// Non-throwing evaluation used inside the fitter; the pole maps to an
// infinite reactance, which step control rejects on its own.
inline Complex lcr_eval(double r, double l, double c, double w) {
  const double denom = 1.0 - w * w * l * c;
  return {r, w * l / denom};
}

}  // namespace detail

/// Z(w) = r + j w L / (1 - w^2 L C). Throws PoleSingularity when `f_hz`
/// falls within relative 1e-12 of the tank's parallel resonance.
inline Complex lcr_impedance(const LcrModel& m, double f_hz) {
  validate(m);
  if (!(f_hz > 0.0) || !is_finite(f_hz))
    throw std::invalid_argument("frequency must be finite and > 0");
  const double f_pole = lcr_resonance(m);
  if (std::abs(f_hz - f_pole) <= 1e-12 * f_pole) throw PoleSingularity(f_hz);
  return detail::lcr_eval(m.r_ohm, m.l_h, m.c_f, omega(f_hz));
}

struct LcrFitResult {
  LcrModel model;
  /// sqrt of the mean squared relative residual |Z_fit - Z_meas| / |Z_meas|.
  double rms_rel_residual;
  /// False when the 200-iteration budget ran out; the best iterate is
  /// still returned.
  bool converged;
  int iterations;
};

/// Fits (r, l, c) to a sweep by Levenberg-Marquardt on relative residuals.
/// Positivity is enforced through log-parameterization.
inline LcrFitResult fit_lcr(const ImpedanceSweep& sweep) {
  const std::size_t n = sweep.size();
  if (n < 10) throw std::invalid_argument("fit needs at least 10 sweep points");
  if (sweep.grid().back() < 2.0 * sweep.grid().front())
    throw std::invalid_argument("sweep must span at least a factor 2 in frequency");

  std::vector<double> w(n), mag(n);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = omega(sweep.grid()[k]);
    mag[k] = std::abs(sweep.z()[k]);
  }
  const double mag_max = *std::max_element(mag.begin(), mag.end());
  const double mag_min = *std::min_element(mag.begin(), mag.end());
  if (mag_max - mag_min <= 0.01 * mag_max) throw DegenerateSweep();

  // Initial guess: the series resistor sets the low floor of |Z|, the tank
  // pole sits at the |Z| maximum, and the low-frequency reactance is the
  // inductor's. An edge argmax means the pole was not bracketed, so it is
  // nudged outside the sweep.
  const std::size_t peak = static_cast<std::size_t>(
      std::max_element(mag.begin(), mag.end()) - mag.begin());
  double f0 = sweep.grid()[peak];
  if (peak == n - 1)
    f0 *= 1.25;
  else if (peak == 0)
    f0 /= 1.25;
  double l0 = sweep.z().front().imag() / w.front();
  if (!(l0 > 0.0) || !is_finite(l0)) l0 = 1e-3;
  const double r0 = std::max(mag_min, 1e-12);
  const double c0 = 1.0 / (omega(f0) * omega(f0) * l0);

  double p[3] = {std::log(r0), std::log(l0), std::log(c0)};

  const auto ssr_at = [&](const double* q) {
    const double r = std::exp(q[0]), l = std::exp(q[1]), c = std::exp(q[2]);
    double ssr = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const Complex d = detail::lcr_eval(r, l, c, w[k]) - sweep.z()[k];
      const double weight = 1.0 / std::max(mag[k], 1e-300);
      ssr += std::norm(d) * weight * weight;
    }
    return ssr;
  };

  double ssr = ssr_at(p);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  for (iter = 1; iter <= 200; ++iter) {
    const double r = std::exp(p[0]), l = std::exp(p[1]), c = std::exp(p[2]);
    // Normal equations of the 2n-by-3 Jacobian in log parameters.
    std::vector<double> jtj(9, 0.0), g(3, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double denom = 1.0 - w[k] * w[k] * l * c;
      const double weight = 1.0 / std::max(mag[k], 1e-300);
      const Complex resid = (detail::lcr_eval(r, l, c, w[k]) - sweep.z()[k]) * weight;
      const double d2 = denom * denom;
      const Complex cols[3] = {
          Complex(r, 0.0) * weight,                                // d/d log r
          Complex(0.0, l * w[k] / d2) * weight,                    // d/d log l
          Complex(0.0, c * w[k] * w[k] * w[k] * l * l / d2) * weight  // d/d log c
      };
      for (int a = 0; a < 3; ++a) {
        g[a] += cols[a].real() * resid.real() + cols[a].imag() * resid.imag();
        for (int b = a; b < 3; ++b)
          jtj[a * 3 + b] += cols[a].real() * cols[b].real() + cols[a].imag() * cols[b].imag();
      }
    }
    jtj[3] = jtj[1];
    jtj[6] = jtj[2];
    jtj[7] = jtj[5];

    std::vector<double> a(jtj);
    for (int d = 0; d < 3; ++d) a[d * 3 + d] += lambda * jtj[d * 3 + d];
    std::vector<double> step = {-g[0], -g[1], -g[2]};
    if (!detail::solve_linear(a, step, 3)) {
      lambda *= 10.0;
      if (lambda > 1e15) break;
      continue;
    }
    double trial[3] = {p[0] + step[0], p[1] + step[1], p[2] + step[2]};
    const double trial_ssr = ssr_at(trial);
    if (std::isfinite(trial_ssr) && trial_ssr < ssr) {
      p[0] = trial[0];
      p[1] = trial[1];
      p[2] = trial[2];
      ssr = trial_ssr;
      lambda = std::max(lambda / 10.0, 1e-15);
      const double change =
          std::max({std::abs(step[0]), std::abs(step[1]), std::abs(step[2])});
      if (change < 1e-9) {
        converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e15) break;
    }
  }

  LcrFitResult out;
  out.model = {std::exp(p[0]), std::exp(p[1]), std::exp(p[2])};
  out.rms_rel_residual = std::sqrt(ssr / static_cast<double>(n));
  out.converged = converged;
  out.iterations = iter;
  return out;
}

}  // namespace zport
