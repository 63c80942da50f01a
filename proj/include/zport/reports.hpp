#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "zport/lcr.hpp"
#include "zport/network.hpp"
#include "zport/noise.hpp"
#include "zport/transfer.hpp"

namespace zport {

/// Reports preserve insertion order so emitted documents are byte-stable.
using Json = nlohmann::ordered_json;

/// JSON mirror of the Z-sweep CSV: one record per grid point.
inline Json z_sweep_json(const TwoPortNetwork& net) {
  if (net.kind() != ParamKind::Z)
    throw std::invalid_argument("z_sweep_json expects a Z-parameter network");
  Json rows = Json::array();
  for (std::size_t i = 0; i < net.size(); ++i) {
    const Matrix2c& m = net.at(i);
    Json row;
    row["freq_hz"] = net.grid()[i];
    const struct {
      const char* key;
      const Complex& v;
    } entries[] = {{"z11", m.m11}, {"z12", m.m12}, {"z21", m.m21}, {"z22", m.m22}};
    for (const auto& e : entries) row[e.key] = Json{{"re", e.v.real()}, {"im", e.v.imag()}};
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Detected/fitted mode table. Modes that could not be fitted (no usable
/// half-power width) carry null for q and the fit fields.
inline Json resonance_report_json(const std::vector<PeakEstimate>& peaks,
                                  const std::vector<ResonanceMode>& modes) {
  Json list = Json::array();
  std::size_t next_mode = 0;
  for (const PeakEstimate& peak : peaks) {
    Json entry;
    if (peak.q && next_mode < modes.size()) {
      const ResonanceMode& m = modes[next_mode++];
      entry["f_r_hz"] = m.f_r_hz;
      entry["q"] = m.q;
      entry["b1"] = m.b1;
      entry["b0"] = m.b0;
      entry["band_lo_hz"] = m.band_lo_hz;
      entry["band_hi_hz"] = m.band_hi_hz;
      entry["rms_rel_error"] = m.rms_rel_error;
    } else {
      entry["f_r_hz"] = peak.f_r_hz;
      entry["q"] = nullptr;
      entry["b1"] = nullptr;
      entry["b0"] = nullptr;
      entry["band_lo_hz"] = nullptr;
      entry["band_hi_hz"] = nullptr;
      entry["rms_rel_error"] = nullptr;
    }
    list.push_back(std::move(entry));
  }
  return list;
}

inline Json complex_json(const Complex& v) {
  return Json{{"re", v.real()}, {"im", v.imag()}};
}

inline Json am_response_json(const AmResponse& am, std::string_view source) {
  Json out;
  out["f_c_hz"] = am.f_c_hz;
  out["f_m_hz"] = am.f_m_hz;
  out["source"] = std::string(source);
  out["lower"] = complex_json(am.lower);
  out["carrier"] = complex_json(am.carrier);
  out["upper"] = complex_json(am.upper);
  return out;
}

inline Json lcr_fit_report_json(const LcrFitResult& fit) {
  Json out;
  out["r_ohm"] = fit.model.r_ohm;
  out["l_h"] = fit.model.l_h;
  out["c_f"] = fit.model.c_f;
  out["f0_hz"] = lcr_resonance(fit.model);
  out["rms_rel_residual"] = fit.rms_rel_residual;
  out["converged"] = fit.converged;
  return out;
}

namespace detail {

inline Json noise_side_json(double f_hz, const char* referral, const NoiseSide& side) {
  Json out;
  out["f_hz"] = f_hz;
  out["referral"] = referral;
  out["psd"] = Json{{"thermal", side.thermal},
                    {"current", side.current},
                    {"voltage", side.voltage},
                    {"total", side.total}};
  out["asd"] = Json{{"thermal", side.asd_thermal()},
                    {"current", side.asd_current()},
                    {"voltage", side.asd_voltage()},
                    {"total", side.asd_total}};
  return out;
}

}  // namespace detail

/// Both referrals of the budget, output first.
inline Json noise_budget_json(const NoiseBudget& budget) {
  Json out = Json::array();
  out.push_back(detail::noise_side_json(budget.f_hz, "out", budget.output));
  out.push_back(detail::noise_side_json(budget.f_hz, "in", budget.input));
  return out;
}

inline Json dominance_json(const DominanceReport& report) {
  Json out;
  out["dominant"] = to_string(report.dominant);
  out["fractions"] = Json{{"thermal", report.thermal_fraction},
                          {"current", report.current_fraction},
                          {"voltage", report.voltage_fraction}};
  return out;
}

/// Op-amp preset file: an array of {name, e_n_v_rthz, i_n_a_rthz} records.
/// Rejects unknown keys and non-positive densities.
inline std::vector<OpAmpNoiseSpec> load_opamp_presets_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(std::string("preset file: ") + e.what());
  }
  if (!doc.is_array()) throw Error("preset file: expected a top-level array");
  std::vector<OpAmpNoiseSpec> specs;
  for (const Json& rec : doc) {
    if (!rec.is_object()) throw Error("preset file: each record must be an object");
    for (const auto& item : rec.items()) {
      if (item.key() != "name" && item.key() != "e_n_v_rthz" && item.key() != "i_n_a_rthz")
        throw Error("preset file: unknown key '" + item.key() + "'");
    }
    if (!rec.contains("name") || !rec["name"].is_string())
      throw Error("preset file: record is missing a string 'name'");
    if (!rec.contains("e_n_v_rthz") || !rec["e_n_v_rthz"].is_number() ||
        !rec.contains("i_n_a_rthz") || !rec["i_n_a_rthz"].is_number())
      throw Error("preset file: record needs numeric e_n_v_rthz and i_n_a_rthz");
    OpAmpNoiseSpec spec{rec["name"].get<std::string>(), rec["e_n_v_rthz"].get<double>(),
                        rec["i_n_a_rthz"].get<double>()};
    try {
      validate(spec);
    } catch (const std::invalid_argument& e) {
      throw Error("preset file: record '" + spec.name + "': " + e.what());
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

}  // namespace zport
