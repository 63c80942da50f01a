#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "zport/network.hpp"

namespace zport {

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K
inline constexpr double kDefaultTemperatureK = 300.0;

/// Flat (white) input noise densities of an op-amp.
struct OpAmpNoiseSpec {
  std::string name;
  double e_n_v_rthz;  // voltage noise, V/sqrt(Hz)
  double i_n_a_rthz;  // current noise, A/sqrt(Hz)
};

inline void validate(const OpAmpNoiseSpec& a) {
  if (!is_finite(a.e_n_v_rthz) || !(a.e_n_v_rthz > 0.0))
    throw std::invalid_argument("op-amp voltage noise must be finite and > 0");
  if (!is_finite(a.i_n_a_rthz) || !(a.i_n_a_rthz > 0.0))
    throw std::invalid_argument("op-amp current noise must be finite and > 0");
}

/// Non-inverting readout: R2 from output to the inverting input, R1 from
/// there to ground.
struct ReadoutCircuit {
  double r1_ohm;
  double r2_ohm;
  double temperature_k = kDefaultTemperatureK;
};

inline void validate(const ReadoutCircuit& c) {
  if (!is_finite(c.r1_ohm) || !(c.r1_ohm > 0.0))
    throw std::invalid_argument("R1 must be finite and > 0");
  if (!is_finite(c.r2_ohm) || c.r2_ohm < 0.0)
    throw std::invalid_argument("R2 must be finite and >= 0");
  if (!is_finite(c.temperature_k) || !(c.temperature_k > 0.0))
    throw std::invalid_argument("temperature must be finite and > 0");
}

/// Output-referred equivalent impedance of the sensor at the evaluation
/// frequency. When only a magnitude is known the real part is taken as
/// zero, which makes the thermal term a lower bound.
struct SensorOutputImpedance {
  Complex z;
  bool magnitude_only = false;

  static SensorOutputImpedance from_magnitude(double mag_ohm) {
    if (!is_finite(mag_ohm) || mag_ohm < 0.0)
      throw std::invalid_argument("impedance magnitude must be finite and >= 0");
    return {Complex(0.0, mag_ohm), true};
  }
};

/// Signal and noise gain of the non-inverting stage, Av = 1 + R2/R1.
inline double gain(const ReadoutCircuit& c) {
  validate(c);
  return 1.0 + c.r2_ohm / c.r1_ohm;
}

/// Per-source noise PSDs of one referral side, all in V^2/Hz.
struct NoiseSide {
  double thermal;
  double current;
  double voltage;
  double total;      // thermal + current + voltage, exact sum
  double asd_total;  // V/sqrt(Hz)

  double asd_thermal() const { return std::sqrt(thermal); }
  double asd_current() const { return std::sqrt(current); }
  double asd_voltage() const { return std::sqrt(voltage); }
};

struct NoiseBudget {
  double f_hz;
  double av;
  bool thermal_lower_bound;
  NoiseSide output;
  NoiseSide input;
};

/// Output-referred noise of the non-inverting readout:
///   thermal = 4 k T Av (R2 + Re{Z_sen} Av)
///   current = i_n^2 (R2^2 + |Z_sen|^2 Av^2)
///   voltage = e_n^2 Av^2
/// Input-referred values divide the PSDs by Av^2 (ASDs by Av).
///
/// The thermal term differs from a textbook derivation of the same stage;
/// it is kept in this exact form so budgets line up with the model this
/// library implements, and validation anchors on the current and voltage
/// terms plus the quadrature total.
inline NoiseBudget noise_psd(const ReadoutCircuit& c, const OpAmpNoiseSpec& a,
                             const SensorOutputImpedance& z_sen, double f_hz) {
  validate(c);
  validate(a);
  if (!is_finite(z_sen.z)) throw std::invalid_argument("sensor impedance must be finite");
  if (!is_finite(f_hz) || f_hz < 0.0)
    throw std::invalid_argument("frequency must be finite and >= 0");

  const double av = gain(c);
  const double z_mag = std::abs(z_sen.z);

  NoiseBudget budget;
  budget.f_hz = f_hz;
  budget.av = av;
  budget.thermal_lower_bound = z_sen.magnitude_only;

  NoiseSide& out = budget.output;
  out.thermal = 4.0 * kBoltzmann * c.temperature_k * av * (c.r2_ohm + z_sen.z.real() * av);
  out.current = a.i_n_a_rthz * a.i_n_a_rthz *
                (c.r2_ohm * c.r2_ohm + z_mag * z_mag * av * av);
  out.voltage = a.e_n_v_rthz * a.e_n_v_rthz * av * av;
  out.total = out.thermal + out.current + out.voltage;
  out.asd_total = std::sqrt(out.total);

  const double av2 = av * av;
  NoiseSide& in = budget.input;
  in.thermal = out.thermal / av2;
  in.current = out.current / av2;
  in.voltage = out.voltage / av2;
  in.total = out.total / av2;
  in.asd_total = out.asd_total / av;
  return budget;
}

/// Root-sum-square of amplitude spectral densities.
inline double quadrature_total(std::span<const double> contributions_asd) {
  double sum = 0.0;
  for (double a : contributions_asd) {
    if (!is_finite(a) || a < 0.0)
      throw std::invalid_argument("ASD contributions must be finite and >= 0");
    sum += a * a;
  }
  return std::sqrt(sum);
}

inline double quadrature_total(std::initializer_list<double> contributions_asd) {
  return quadrature_total(std::span<const double>(contributions_asd.begin(),
                                                  contributions_asd.size()));
}

/// R_opamp = e_n / i_n, the source impedance at which the op-amp's voltage
/// and current noise contributions are equal.
inline double opamp_figure(const OpAmpNoiseSpec& a) {
  validate(a);
  return a.e_n_v_rthz / a.i_n_a_rthz;
}

enum class NoiseDominance { VoltageDominated, CurrentDominated, ThermalDominated };

inline const char* to_string(NoiseDominance d) {
  switch (d) {
    case NoiseDominance::VoltageDominated: return "voltage";
    case NoiseDominance::CurrentDominated: return "current";
    case NoiseDominance::ThermalDominated: return "thermal";
  }
  return "voltage";
}

struct DominanceReport {
  NoiseDominance dominant;
  double thermal_fraction;  // share of the total output-referred PSD
  double current_fraction;
  double voltage_fraction;
};

/// Ranks the three output-referred PSD terms. Ties resolve in the order
/// thermal, current, voltage.
inline DominanceReport dominance_report(const NoiseBudget& budget) {
  const NoiseSide& out = budget.output;
  DominanceReport report;
  report.thermal_fraction = out.total > 0.0 ? out.thermal / out.total : 0.0;
  report.current_fraction = out.total > 0.0 ? out.current / out.total : 0.0;
  report.voltage_fraction = out.total > 0.0 ? out.voltage / out.total : 0.0;
  report.dominant = NoiseDominance::ThermalDominated;
  double best = out.thermal;
  if (out.current > best) {
    best = out.current;
    report.dominant = NoiseDominance::CurrentDominated;
  }
  if (out.voltage > best) report.dominant = NoiseDominance::VoltageDominated;
  return report;
}

inline DominanceReport dominance_report(const OpAmpNoiseSpec& a,
                                        const SensorOutputImpedance& z_sen,
                                        const ReadoutCircuit& c, double f_hz = 0.0) {
  return dominance_report(noise_psd(c, a, z_sen, f_hz));
}

/// A named op-amp slot; presets without values must be filled in by the
/// caller before use.
struct OpAmpPresetEntry {
  std::string name;
  std::optional<OpAmpNoiseSpec> spec;
};

/// LT1363 carries its datasheet densities. ADA4898 and ADA4625-1 are named
/// slots that require user-supplied values.
inline const std::vector<OpAmpPresetEntry>& builtin_opamp_presets() {
  static const std::vector<OpAmpPresetEntry> presets = {
      {"LT1363", OpAmpNoiseSpec{"LT1363", 9e-9, 1e-12}},
      {"ADA4898", std::nullopt},
      {"ADA4625-1", std::nullopt},
  };
  return presets;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

inline const OpAmpPresetEntry* find_opamp_preset(std::string_view name) {
  for (const OpAmpPresetEntry& p : builtin_opamp_presets())
    if (iequals(p.name, name)) return &p;
  return nullptr;
}

}  // namespace zport
