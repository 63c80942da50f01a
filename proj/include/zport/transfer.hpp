#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "zport/detail/format.hpp"
#include "zport/detail/linalg.hpp"
#include "zport/errors.hpp"
#include "zport/network.hpp"

namespace zport {

enum class TfKind { OpenCircuit, ShortCircuitTransadmittance, Combined, FittedSum };

inline const char* to_string(TfKind k) {
  switch (k) {
    case TfKind::OpenCircuit: return "open_circuit";
    case TfKind::ShortCircuitTransadmittance: return "short_circuit_transadmittance";
    case TfKind::Combined: return "combined";
    case TfKind::FittedSum: return "fitted_sum";
  }
  return "open_circuit";
}

/// Complex frequency response sampled on a grid. Open-circuit responses are
/// V/V; the short-circuit transadmittance is A/V.
class TransferFunction {
 public:
  TransferFunction(FrequencyGrid grid, std::vector<Complex> h, TfKind label)
      : grid_(std::move(grid)), h_(std::move(h)), label_(label) {
    if (h_.size() != grid_.size())
      throw std::invalid_argument("sample count must match grid length");
    for (const Complex& v : h_)
      if (!is_finite(v)) throw std::invalid_argument("samples must be finite");
  }

  const FrequencyGrid& grid() const noexcept { return grid_; }
  const std::vector<Complex>& h() const noexcept { return h_; }
  TfKind label() const noexcept { return label_; }
  std::size_t size() const noexcept { return h_.size(); }

 private:
  FrequencyGrid grid_;
  std::vector<Complex> h_;
  TfKind label_;
};

/// H_oc = Z21 / Z11, the coil voltage per excitation volt with the coil
/// left open.
inline TransferFunction h_open_circuit(const TwoPortNetwork& net) {
  if (net.kind() != ParamKind::Z)
    throw std::invalid_argument("h_open_circuit expects a Z-parameter network");
  std::vector<Complex> h;
  h.reserve(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    const Matrix2c& m = net.at(i);
    if (std::abs(m.m11) < 1e-15) throw DivisionByZero(net.grid()[i]);
    h.push_back(m.m21 / m.m11);
  }
  return TransferFunction(net.grid(), std::move(h), TfKind::OpenCircuit);
}

/// H_sc = -Z21 / (Z11 Z22 - Z12 Z21), the coil current per excitation volt
/// with the coil shorted. Unit A/V.
inline TransferFunction h_short_circuit(const TwoPortNetwork& net) {
  if (net.kind() != ParamKind::Z)
    throw std::invalid_argument("h_short_circuit expects a Z-parameter network");
  std::vector<Complex> h;
  h.reserve(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    const Matrix2c& m = net.at(i);
    if (detail::nearly_singular(m)) throw SingularDeterminant(net.grid()[i]);
    h.push_back(-m.m21 / m.det());
  }
  return TransferFunction(net.grid(), std::move(h), TfKind::ShortCircuitTransadmittance);
}

/// Loaded coil voltage per grid point: u_coil = H_oc u_res + H_sc i_coil.
/// The H_sc term is the loaded correction; with i_coil = 0 this reduces to
/// the open-circuit response alone.
inline std::vector<Complex> combine_output(const TransferFunction& h_oc,
                                           const TransferFunction& h_sc, const Complex& u_res,
                                           const Complex& i_coil) {
  if (!(h_oc.grid() == h_sc.grid())) throw GridMismatch();
  std::vector<Complex> out;
  out.reserve(h_oc.size());
  for (std::size_t i = 0; i < h_oc.size(); ++i)
    out.push_back(h_oc.h()[i] * u_res + h_sc.h()[i] * i_coil);
  return out;
}

/// A magnitude peak located on the grid. `q` is measured from the half-power
/// width and is absent when a -3 dB crossing falls outside the grid; such
/// peaks are excluded from fitting.
struct PeakEstimate {
  std::size_t index = 0;
  double f_r_hz = 0.0;
  std::optional<double> q;
  double peak_mag = 0.0;
  double bandwidth_hz = 0.0;  // meaningful only when q is present
};

/// Scans |h| for local maxima at least `prominence_db` above the median
/// magnitude, ordered by frequency. Equal-height plateau samples resolve to
/// the lower frequency index.
inline std::vector<PeakEstimate> detect_resonances(const TransferFunction& h,
                                                   double prominence_db = 6.0) {
  const std::size_t n = h.size();
  if (n < 5) throw std::invalid_argument("resonance detection needs at least 5 grid points");

  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(h.h()[i]);

  std::vector<double> sorted(mag);
  std::sort(sorted.begin(), sorted.end());
  const double median =
      n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  std::vector<PeakEstimate> peaks;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(mag[i] > mag[i - 1] && mag[i] >= mag[i + 1])) continue;
    if (median > 0.0) {
      if (20.0 * std::log10(mag[i] / median) < prominence_db) continue;
    } else if (!(mag[i] > 0.0)) {
      continue;
    }

    PeakEstimate peak;
    peak.index = i;
    peak.f_r_hz = h.grid()[i];
    peak.peak_mag = mag[i];

    const double level = mag[i] / std::sqrt(2.0);
    std::optional<double> f_lo, f_hi;
    for (std::size_t j = i; j > 0;) {
      --j;
      if (mag[j] <= level) {
        f_lo = h.grid()[j] + (level - mag[j]) * (h.grid()[j + 1] - h.grid()[j]) /
                                 (mag[j + 1] - mag[j]);
        break;
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (mag[j] <= level) {
        f_hi = h.grid()[j - 1] + (mag[j - 1] - level) * (h.grid()[j] - h.grid()[j - 1]) /
                                     (mag[j - 1] - mag[j]);
        break;
      }
    }
    if (f_lo && f_hi && *f_hi > *f_lo) {
      peak.bandwidth_hz = *f_hi - *f_lo;
      peak.q = peak.f_r_hz / peak.bandwidth_hz;
    }
    peaks.push_back(peak);
  }
  return peaks;
}

/// One fitted resonance term of the multi-mode superposition:
/// H_r(s) = (b1 s + b0) / (s^2 + (w_r / q) s + w_r^2), w_r = 2 pi f_r.
struct ResonanceMode {
  double f_r_hz = 0.0;
  double q = 0.0;
  double b1 = 0.0;
  double b0 = 0.0;
  double band_lo_hz = 0.0;
  double band_hi_hz = 0.0;
  /// RMS relative error of the full fitted sum against the data on this
  /// mode's fit band.
  double rms_rel_error = 0.0;
};

inline Complex evaluate_mode(const ResonanceMode& mode, double f_hz) {
  const Complex s(0.0, omega(f_hz));
  const double w_r = omega(mode.f_r_hz);
  return (mode.b1 * s + mode.b0) / (s * s + (w_r / mode.q) * s + w_r * w_r);
}

/// Literal superposition of the fitted terms; the empty sum is zero.
inline Complex evaluate_fitted(const std::vector<ResonanceMode>& modes, double f_hz) {
  Complex sum(0.0, 0.0);
  for (const ResonanceMode& m : modes) sum += evaluate_mode(m, f_hz);
  return sum;
}

namespace detail {

inline constexpr double kMaxFitCondition = 1e12;

// Second-order rational section in the frequency-normalized variable
// s' = s / w_scale: H = (beta1 s' + beta0) / (s'^2 + alpha1 s' + alpha0).
struct ScaledSection {
  double alpha1, alpha0, beta1, beta0;
};

inline Complex eval_scaled(const ScaledSection& m, double x) {
  const Complex s(0.0, x);
  return (m.beta1 * s + m.beta0) / (s * s + m.alpha1 * s + m.alpha0);
}

// Levy linearization: multiply through by the denominator and solve the
// resulting linear least-squares system through its normal equations.
inline ScaledSection levy_fit(const std::vector<double>& x, const std::vector<Complex>& h,
                              std::size_t mode_index) {
  std::vector<double> jtj(16, 0.0);
  std::vector<double> rhs(4, 0.0);
  auto accumulate = [&](const double row[4], double target) {
    for (int a = 0; a < 4; ++a) {
      rhs[a] += row[a] * target;
      for (int b = a; b < 4; ++b) jtj[a * 4 + b] += row[a] * row[b];
    }
  };
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double u = h[k].real();
    const double v = h[k].imag();
    const double re_row[4] = {v * x[k], -u, 0.0, 1.0};
    const double im_row[4] = {-u * x[k], -v, x[k], 0.0};
    const double x2 = x[k] * x[k];
    accumulate(re_row, -x2 * u);
    accumulate(im_row, -x2 * v);
  }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < a; ++b) jtj[a * 4 + b] = jtj[b * 4 + a];

  if (symmetric_condition(jtj, 4) > kMaxFitCondition)
    throw IllConditionedFit(mode_index, "normal-equation condition number exceeds 1e12");
  std::vector<double> a(jtj);
  std::vector<double> sol(rhs);
  if (!solve_linear(a, sol, 4))
    throw IllConditionedFit(mode_index, "normal equations are singular");
  return {sol[0], sol[1], sol[2], sol[3]};
}

inline double relative_ssr(const ScaledSection& m, const std::vector<double>& x,
                           const std::vector<Complex>& h) {
  double ssr = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double w = 1.0 / std::max(std::abs(h[k]), 1e-300);
    ssr += std::norm((eval_scaled(m, x[k]) - h[k]) * w);
  }
  return ssr;
}

// One Gauss-Newton step on relative residuals; keeps the Levy estimate when
// the step does not improve.
inline ScaledSection gauss_newton_pass(ScaledSection m, const std::vector<double>& x,
                                       const std::vector<Complex>& h) {
  std::vector<double> jtj(16, 0.0);
  std::vector<double> g(4, 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const Complex s(0.0, x[k]);
    const Complex den = s * s + m.alpha1 * s + m.alpha0;
    const Complex val = (m.beta1 * s + m.beta0) / den;
    const double w = 1.0 / std::max(std::abs(h[k]), 1e-300);
    const Complex resid = (val - h[k]) * w;
    const Complex cols[4] = {-val * s / den * w, -val / den * w, s / den * w,
                             Complex(1.0, 0.0) / den * w};
    for (int a = 0; a < 4; ++a) {
      g[a] += cols[a].real() * resid.real() + cols[a].imag() * resid.imag();
      for (int b = a; b < 4; ++b)
        jtj[a * 4 + b] += cols[a].real() * cols[b].real() + cols[a].imag() * cols[b].imag();
    }
  }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < a; ++b) jtj[a * 4 + b] = jtj[b * 4 + a];
  std::vector<double> step = {-g[0], -g[1], -g[2], -g[3]};
  if (!solve_linear(jtj, step, 4)) return m;
  const ScaledSection trial{m.alpha1 + step[0], m.alpha0 + step[1], m.beta1 + step[2],
                            m.beta0 + step[3]};
  if (relative_ssr(trial, x, h) < relative_ssr(m, x, h)) return trial;
  return m;
}

inline ResonanceMode to_mode(const ScaledSection& s, double w_scale, double band_lo,
                             double band_hi, std::size_t mode_index) {
  if (!(s.alpha0 > 0.0) || !(s.alpha1 > 0.0))
    throw IllConditionedFit(mode_index, "fit produced an unstable mode (q <= 0)");
  ResonanceMode mode;
  mode.f_r_hz = std::sqrt(s.alpha0) * w_scale / kTwoPi;
  mode.q = std::sqrt(s.alpha0) / s.alpha1;
  mode.b1 = s.beta1 * w_scale;
  mode.b0 = s.beta0 * w_scale * w_scale;
  mode.band_lo_hz = band_lo;
  mode.band_hi_hz = band_hi;
  return mode;
}

}  // namespace detail

/// Fits the superposition of second-order sections to the sampled response,
/// one band per detected peak. Peaks without a q estimate are skipped.
///
/// Each band covers 3x the measured 3 dB width on both sides, truncated at
/// the midpoint to neighboring peaks. Bands are fitted independently (Levy
/// linearization plus one Gauss-Newton refinement on relative residuals),
/// then refitted once against the data with the other modes' first-pass
/// estimates subtracted, which removes the bias their tails leak into the
/// band.
inline std::vector<ResonanceMode> fit_resonance_sum(const TransferFunction& h,
                                                    const std::vector<PeakEstimate>& peaks) {
  struct Band {
    std::size_t peak_index;   // index into `peaks`
    std::size_t first, last;  // inclusive sample range
    double lo_hz, hi_hz;
    double w_scale;
  };

  std::vector<Band> bands;
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    if (!peaks[k].q) continue;
    const PeakEstimate& p = peaks[k];
    double lo = p.f_r_hz - 3.0 * p.bandwidth_hz;
    double hi = p.f_r_hz + 3.0 * p.bandwidth_hz;
    if (k > 0) lo = std::max(lo, 0.5 * (peaks[k - 1].f_r_hz + p.f_r_hz));
    if (k + 1 < peaks.size()) hi = std::min(hi, 0.5 * (p.f_r_hz + peaks[k + 1].f_r_hz));
    lo = std::max(lo, h.grid().front());
    hi = std::min(hi, h.grid().back());

    const auto& f = h.grid().points();
    const auto begin = std::lower_bound(f.begin(), f.end(), lo);
    const auto end = std::upper_bound(f.begin(), f.end(), hi);
    if (end - begin < 8)
      throw IllConditionedFit(k, "fit band holds fewer than 8 samples");
    bands.push_back({k, static_cast<std::size_t>(begin - f.begin()),
                     static_cast<std::size_t>(end - f.begin()) - 1, lo, hi,
                     omega(p.f_r_hz)});
  }
  if (bands.empty()) return {};

  auto band_inputs = [&](const Band& band, std::vector<double>& x, std::vector<Complex>& hb) {
    x.clear();
    hb.clear();
    for (std::size_t i = band.first; i <= band.last; ++i) {
      x.push_back(omega(h.grid()[i]) / band.w_scale);
      hb.push_back(h.h()[i]);
    }
  };

  // Pass 1: each band on the raw data.
  std::vector<ResonanceMode> first_pass;
  std::vector<double> x;
  std::vector<Complex> hb;
  for (const Band& band : bands) {
    band_inputs(band, x, hb);
    detail::ScaledSection s = detail::levy_fit(x, hb, band.peak_index);
    s = detail::gauss_newton_pass(s, x, hb);
    first_pass.push_back(detail::to_mode(s, band.w_scale, band.lo_hz, band.hi_hz,
                                         band.peak_index));
  }

  // Pass 2: refit each band with the other modes subtracted.
  std::vector<ResonanceMode> modes;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    band_inputs(bands[b], x, hb);
    for (std::size_t other = 0; other < first_pass.size(); ++other) {
      if (other == b) continue;
      for (std::size_t k = 0; k < x.size(); ++k)
        hb[k] -= evaluate_mode(first_pass[other], x[k] * bands[b].w_scale / kTwoPi);
    }
    detail::ScaledSection s = detail::levy_fit(x, hb, bands[b].peak_index);
    s = detail::gauss_newton_pass(s, x, hb);
    modes.push_back(detail::to_mode(s, bands[b].w_scale, bands[b].lo_hz, bands[b].hi_hz,
                                    bands[b].peak_index));
  }

  for (std::size_t b = 0; b < bands.size(); ++b) {
    double ssr = 0.0;
    std::size_t count = 0;
    for (std::size_t i = bands[b].first; i <= bands[b].last; ++i) {
      const Complex model = evaluate_fitted(modes, h.grid()[i]);
      const double w = 1.0 / std::max(std::abs(h.h()[i]), 1e-300);
      ssr += std::norm((model - h.h()[i]) * w);
      ++count;
    }
    modes[b].rms_rel_error = std::sqrt(ssr / static_cast<double>(count));
  }
  return modes;
}

/// Complex gains at the carrier and both sidebands of an AM excitation.
struct AmResponse {
  double f_c_hz = 0.0;
  double f_m_hz = 0.0;
  Complex carrier;
  Complex lower;
  Complex upper;
};

/// Evaluates the fitted mode sum at f_c - f_m, f_c, f_c + f_m.
inline AmResponse am_response(const std::vector<ResonanceMode>& modes, double f_c_hz,
                              double f_m_hz) {
  if (!(f_m_hz > 0.0) || !(f_c_hz - f_m_hz > 0.0))
    throw std::invalid_argument("carrier must exceed the modulation frequency, both > 0");
  AmResponse out;
  out.f_c_hz = f_c_hz;
  out.f_m_hz = f_m_hz;
  out.lower = evaluate_fitted(modes, f_c_hz - f_m_hz);
  out.carrier = evaluate_fitted(modes, f_c_hz);
  out.upper = evaluate_fitted(modes, f_c_hz + f_m_hz);
  return out;
}

namespace detail {

inline Complex interpolate(const TransferFunction& h, double f_hz) {
  const auto& f = h.grid().points();
  if (f_hz < f.front() || f_hz > f.back()) throw OutOfGrid(f_hz);
  const auto upper = std::lower_bound(f.begin(), f.end(), f_hz);
  if (upper == f.begin()) return h.h().front();
  const std::size_t hi = static_cast<std::size_t>(upper - f.begin());
  if (hi == f.size()) return h.h().back();
  const std::size_t lo = hi - 1;
  const double t = (f_hz - f[lo]) / (f[hi] - f[lo]);
  return h.h()[lo] + t * (h.h()[hi] - h.h()[lo]);
}

}  // namespace detail

/// Evaluates the sampled response at f_c - f_m, f_c, f_c + f_m by linear
/// interpolation on the grid.
inline AmResponse am_response(const TransferFunction& h, double f_c_hz, double f_m_hz) {
  if (!(f_m_hz > 0.0) || !(f_c_hz - f_m_hz > 0.0))
    throw std::invalid_argument("carrier must exceed the modulation frequency, both > 0");
  AmResponse out;
  out.f_c_hz = f_c_hz;
  out.f_m_hz = f_m_hz;
  out.lower = detail::interpolate(h, f_c_hz - f_m_hz);
  out.carrier = detail::interpolate(h, f_c_hz);
  out.upper = detail::interpolate(h, f_c_hz + f_m_hz);
  return out;
}

/// Plot-ready CSV of the response: magnitude in dB and phase in degrees
/// alongside the raw complex samples.
inline std::string export_tf_csv(const TransferFunction& h) {
  std::string out = "freq_hz,h_re,h_im,h_mag_db,h_phase_deg\n";
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Complex& v = h.h()[i];
    out += detail::format_double(h.grid()[i]);
    out += ',';
    out += detail::format_double(v.real());
    out += ',';
    out += detail::format_double(v.imag());
    out += ',';
    out += detail::format_double(20.0 * std::log10(std::abs(v)));
    out += ',';
    out += detail::format_double(std::arg(v) * 180.0 / kPi);
    out += '\n';
  }
  return out;
}

}  // namespace zport
