#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "zport/errors.hpp"

namespace zport {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Default VNA reference impedance in ohms.
inline constexpr double kDefaultReferenceOhm = 50.0;

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const Complex& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// Angular frequency for a grid point.
inline double omega(double f_hz) { return kTwoPi * f_hz; }

/// Strictly increasing, strictly positive frequency axis in Hz.
class FrequencyGrid {
 public:
  explicit FrequencyGrid(std::vector<double> points_hz) : points_(std::move(points_hz)) {
    if (points_.empty()) throw std::invalid_argument("frequency grid must not be empty");
    double prev = 0.0;
    for (double f : points_) {
      if (!is_finite(f) || f <= 0.0)
        throw std::invalid_argument("frequency grid points must be finite and > 0");
      if (f <= prev) throw std::invalid_argument("frequency grid must be strictly increasing");
      prev = f;
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  const std::vector<double>& points() const noexcept { return points_; }

  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  friend bool operator==(const FrequencyGrid& a, const FrequencyGrid& b) {
    return a.points_ == b.points_;
  }

 private:
  std::vector<double> points_;
};

/// One 2x2 complex parameter matrix. For Z-parameter data the entries map to
/// m11 composite-cantilever impedance, m12 reverse transfer impedance,
/// m21 forward transfer impedance and m22 coil impedance.
struct Matrix2c {
  Complex m11, m12, m21, m22;

  Complex det() const { return m11 * m22 - m12 * m21; }

  /// Squared Frobenius norm; the scale used for singularity thresholds.
  double norm2() const {
    return std::norm(m11) + std::norm(m12) + std::norm(m21) + std::norm(m22);
  }

  bool finite() const {
    return is_finite(m11) && is_finite(m12) && is_finite(m21) && is_finite(m22);
  }

  friend bool operator==(const Matrix2c& a, const Matrix2c& b) = default;
};

enum class ParamKind { S, Z };

inline const char* to_string(ParamKind k) { return k == ParamKind::S ? "S" : "Z"; }

/// Per-frequency 2x2 parameter matrices tagged S (unitless) or Z (ohms),
/// with the real reference impedance the S data was measured against.
class TwoPortNetwork {
 public:
  TwoPortNetwork(ParamKind kind, FrequencyGrid grid, std::vector<Matrix2c> matrices,
                 double z_ref_ohm = kDefaultReferenceOhm)
      : kind_(kind), grid_(std::move(grid)), matrices_(std::move(matrices)), z_ref_(z_ref_ohm) {
    if (matrices_.size() != grid_.size())
      throw std::invalid_argument("matrix count must match grid length");
    if (!(z_ref_ > 0.0) || !is_finite(z_ref_))
      throw std::invalid_argument("reference impedance must be finite and > 0");
    for (const Matrix2c& m : matrices_)
      if (!m.finite()) throw std::invalid_argument("network entries must be finite");
  }

  ParamKind kind() const noexcept { return kind_; }
  const FrequencyGrid& grid() const noexcept { return grid_; }
  const std::vector<Matrix2c>& matrices() const noexcept { return matrices_; }
  double z_ref() const noexcept { return z_ref_; }

  std::size_t size() const noexcept { return matrices_.size(); }
  const Matrix2c& at(std::size_t i) const { return matrices_[i]; }

 private:
  ParamKind kind_;
  FrequencyGrid grid_;
  std::vector<Matrix2c> matrices_;
  double z_ref_;
};

/// Port voltages and currents of the two-port at one frequency.
struct PortSignals {
  Complex u_res;   // excitation voltage, V
  Complex u_coil;  // coil voltage, V
  Complex i_res;   // cantilever current, A
  Complex i_coil;  // coil current, A
};

namespace detail {

// |det| <= 1e-12 relative to the squared matrix norm counts as singular,
// which keeps headroom on near-unity reflections in double precision.
inline constexpr double kSingularRel = 1e-12;

inline bool nearly_singular(const Matrix2c& m) {
  return std::abs(m.det()) <= kSingularRel * m.norm2();
}

inline Matrix2c inverse(const Matrix2c& m) {
  const Complex d = m.det();
  return {m.m22 / d, -m.m12 / d, -m.m21 / d, m.m11 / d};
}

inline Matrix2c multiply(const Matrix2c& a, const Matrix2c& b) {
  return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
          a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
}

}  // namespace detail

/// Converts an S-parameter network to Z parameters against its recorded
/// reference impedance: Z = z_ref (I + S)(I - S)^-1.
inline TwoPortNetwork s_to_z(const TwoPortNetwork& net) {
  if (net.kind() != ParamKind::S)
    throw std::invalid_argument("s_to_z expects an S-parameter network");
  const double z0 = net.z_ref();
  std::vector<Matrix2c> out;
  out.reserve(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    const Matrix2c& s = net.at(i);
    const Matrix2c i_minus_s{1.0 - s.m11, -s.m12, -s.m21, 1.0 - s.m22};
    if (detail::nearly_singular(i_minus_s)) throw SingularConversion(net.grid()[i]);
    const Matrix2c i_plus_s{1.0 + s.m11, s.m12, s.m21, 1.0 + s.m22};
    Matrix2c z = detail::multiply(i_plus_s, detail::inverse(i_minus_s));
    z.m11 *= z0;
    z.m12 *= z0;
    z.m21 *= z0;
    z.m22 *= z0;
    out.push_back(z);
  }
  return TwoPortNetwork(ParamKind::Z, net.grid(), std::move(out), z0);
}

/// Converts a Z-parameter network to S parameters against `z_ref_ohm`:
/// S = (Z - z_ref I)(Z + z_ref I)^-1.
inline TwoPortNetwork z_to_s(const TwoPortNetwork& net, double z_ref_ohm) {
  if (net.kind() != ParamKind::Z)
    throw std::invalid_argument("z_to_s expects a Z-parameter network");
  if (!(z_ref_ohm > 0.0) || !is_finite(z_ref_ohm))
    throw std::invalid_argument("reference impedance must be finite and > 0");
  std::vector<Matrix2c> out;
  out.reserve(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    const Matrix2c& z = net.at(i);
    const Matrix2c z_plus{z.m11 + z_ref_ohm, z.m12, z.m21, z.m22 + z_ref_ohm};
    if (detail::nearly_singular(z_plus)) throw SingularConversion(net.grid()[i]);
    const Matrix2c z_minus{z.m11 - z_ref_ohm, z.m12, z.m21, z.m22 - z_ref_ohm};
    out.push_back(detail::multiply(z_minus, detail::inverse(z_plus)));
  }
  return TwoPortNetwork(ParamKind::S, net.grid(), std::move(out), z_ref_ohm);
}

/// Port voltages produced by the impedance matrix for given port currents.
inline PortSignals solve_ports(const Matrix2c& z, const Complex& i_res, const Complex& i_coil) {
  PortSignals s;
  s.i_res = i_res;
  s.i_coil = i_coil;
  s.u_res = z.m11 * i_res + z.m12 * i_coil;
  s.u_coil = z.m21 * i_res + z.m22 * i_coil;
  return s;
}

}  // namespace zport
