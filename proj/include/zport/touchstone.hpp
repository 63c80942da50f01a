#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zport/detail/format.hpp"
#include "zport/errors.hpp"
#include "zport/network.hpp"

namespace zport {

enum class FreqUnit { Hz, kHz, MHz, GHz };
enum class NumberFormat { RI, MA, DB };

inline double unit_scale(FreqUnit u) {
  switch (u) {
    case FreqUnit::Hz: return 1.0;
    case FreqUnit::kHz: return 1e3;
    case FreqUnit::MHz: return 1e6;
    case FreqUnit::GHz: return 1e9;
  }
  return 1.0;
}

inline const char* to_string(FreqUnit u) {
  switch (u) {
    case FreqUnit::Hz: return "HZ";
    case FreqUnit::kHz: return "KHZ";
    case FreqUnit::MHz: return "MHZ";
    case FreqUnit::GHz: return "GHZ";
  }
  return "HZ";
}

inline const char* to_string(NumberFormat f) {
  switch (f) {
    case NumberFormat::RI: return "RI";
    case NumberFormat::MA: return "MA";
    case NumberFormat::DB: return "DB";
  }
  return "MA";
}

/// Touchstone v1 option-line settings. Field defaults are the v1 defaults
/// that apply when the option line omits them.
struct TouchstoneOptions {
  FreqUnit freq_unit = FreqUnit::GHz;
  ParamKind param = ParamKind::S;
  NumberFormat format = NumberFormat::MA;
  double z_ref = kDefaultReferenceOhm;
};

/// Z-format v1 files are ambiguous about normalization. By default the data
/// is read as raw ohms; `z_normalized` reads it as z_ref-normalized instead.
struct TouchstoneParsePolicy {
  bool z_normalized = false;
};

struct TouchstoneData {
  TouchstoneOptions options;
  TwoPortNetwork network;
};

namespace detail {

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::string_view strip_comment(std::string_view line) {
  auto bang = line.find('!');
  return bang == std::string_view::npos ? line : line.substr(0, bang);
}

inline Complex decode_pair(NumberFormat fmt, double a, double b) {
  switch (fmt) {
    case NumberFormat::RI:
      return {a, b};
    case NumberFormat::DB:
      a = std::pow(10.0, a / 20.0);
      [[fallthrough]];
    case NumberFormat::MA: {
      const double theta = b * kPi / 180.0;
      return {a * std::cos(theta), a * std::sin(theta)};
    }
  }
  return {a, b};
}

inline void encode_pair(NumberFormat fmt, const Complex& v, std::string& out) {
  switch (fmt) {
    case NumberFormat::RI:
      out += format_sig17(v.real());
      out += ' ';
      out += format_sig17(v.imag());
      return;
    case NumberFormat::MA:
    case NumberFormat::DB: {
      double mag = std::abs(v);
      const double deg = std::arg(v) * 180.0 / kPi;
      if (fmt == NumberFormat::DB) mag = 20.0 * std::log10(mag);
      out += format_sig17(mag);
      out += ' ';
      out += format_sig17(deg);
      return;
    }
  }
}

inline TouchstoneOptions parse_option_line(std::vector<std::string_view> fields,
                                           std::size_t line_no) {
  TouchstoneOptions opts;
  fields.front().remove_prefix(1);  // drop '#', which may be glued to a token
  if (fields.front().empty()) fields.erase(fields.begin());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string tok = upper(fields[i]);
    if (tok == "HZ") {
      opts.freq_unit = FreqUnit::Hz;
    } else if (tok == "KHZ") {
      opts.freq_unit = FreqUnit::kHz;
    } else if (tok == "MHZ") {
      opts.freq_unit = FreqUnit::MHz;
    } else if (tok == "GHZ") {
      opts.freq_unit = FreqUnit::GHz;
    } else if (tok == "S") {
      opts.param = ParamKind::S;
    } else if (tok == "Z") {
      opts.param = ParamKind::Z;
    } else if (tok == "Y" || tok == "G" || tok == "H") {
      throw SyntaxError(line_no, "parameter type '" + std::string(fields[i]) +
                                     "' is not supported (only S and Z)");
    } else if (tok == "RI") {
      opts.format = NumberFormat::RI;
    } else if (tok == "MA") {
      opts.format = NumberFormat::MA;
    } else if (tok == "DB") {
      opts.format = NumberFormat::DB;
    } else if (tok == "R") {
      if (i + 1 >= fields.size())
        throw SyntaxError(line_no, "option 'R' is missing its impedance value");
      double r = 0.0;
      if (!parse_double(fields[i + 1], r) || !(r > 0.0))
        throw SyntaxError(line_no, "invalid reference impedance '" +
                                       std::string(fields[i + 1]) + "'");
      opts.z_ref = r;
      ++i;
    } else {
      throw SyntaxError(line_no, "unrecognized option token '" + std::string(fields[i]) + "'");
    }
  }
  return opts;
}

}  // namespace detail

/// Parses a Touchstone v1 two-port file. Data rows carry nine columns:
/// frequency followed by the four complex pairs in 11, 21, 12, 22 order.
/// Comment ('!') and blank lines are accepted anywhere; the option line
/// may appear once before the data. Line endings may be LF or CRLF.
inline TouchstoneData parse_touchstone(std::string_view text,
                                       const TouchstoneParsePolicy& policy = {}) {
  TouchstoneOptions opts;
  bool saw_options = false;
  bool saw_data = false;
  std::vector<double> freqs;
  std::vector<Matrix2c> mats;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                           : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    line = detail::strip_comment(line);

    auto fields = detail::split_fields(line);
    if (fields.empty()) continue;

    if (fields.front().front() == '[')
      throw SyntaxError(line_no, "Touchstone v2 keyword '" + std::string(fields.front()) +
                                     "' is not supported; this reader handles v1 only");

    if (fields.front().front() == '#') {
      if (saw_data) throw SyntaxError(line_no, "option line after data rows");
      if (saw_options) throw SyntaxError(line_no, "duplicate option line");
      opts = detail::parse_option_line(std::move(fields), line_no);
      saw_options = true;
      continue;
    }

    std::vector<double> values(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!detail::parse_double(fields[i], values[i]))
        throw SyntaxError(line_no, "malformed number '" + std::string(fields[i]) + "'");
    }
    if (values.size() != 9) throw UnsupportedPortCount(line_no, values.size());

    const double f_hz = values[0] * unit_scale(opts.freq_unit);
    if (!(f_hz > 0.0) || !is_finite(f_hz))
      throw SyntaxError(line_no, "frequency must be finite and > 0");
    if (!freqs.empty() && f_hz <= freqs.back()) throw NonMonotonicFrequency(line_no);

    Matrix2c m;
    m.m11 = detail::decode_pair(opts.format, values[1], values[2]);
    m.m21 = detail::decode_pair(opts.format, values[3], values[4]);
    m.m12 = detail::decode_pair(opts.format, values[5], values[6]);
    m.m22 = detail::decode_pair(opts.format, values[7], values[8]);
    if (opts.param == ParamKind::Z && policy.z_normalized) {
      m.m11 *= opts.z_ref;
      m.m12 *= opts.z_ref;
      m.m21 *= opts.z_ref;
      m.m22 *= opts.z_ref;
    }
    if (!m.finite()) throw SyntaxError(line_no, "non-finite parameter value");
    freqs.push_back(f_hz);
    mats.push_back(m);
    saw_data = true;
  }
  if (!saw_data) throw SyntaxError(line_no, "file contains no data rows");

  TwoPortNetwork net(opts.param, FrequencyGrid(std::move(freqs)), std::move(mats), opts.z_ref);
  return {opts, std::move(net)};
}

/// Writes the network as Touchstone v1 with an explicit option line.
/// Z-parameter data is written as raw ohms (normalization off).
inline std::string write_touchstone(const TwoPortNetwork& net, const TouchstoneOptions& opts) {
  if (opts.param != net.kind())
    throw std::invalid_argument("option parameter kind must match the network kind");
  if (!(opts.z_ref > 0.0)) throw std::invalid_argument("reference impedance must be > 0");

  std::string out;
  out += "# ";
  out += to_string(opts.freq_unit);
  out += ' ';
  out += to_string(net.kind());
  out += ' ';
  out += to_string(opts.format);
  out += " R ";
  out += detail::format_double(opts.z_ref);
  out += '\n';

  const double scale = unit_scale(opts.freq_unit);
  for (std::size_t i = 0; i < net.size(); ++i) {
    out += detail::format_sig17(net.grid()[i] / scale);
    const Matrix2c& m = net.at(i);
    for (const Complex& v : {m.m11, m.m21, m.m12, m.m22}) {
      out += ' ';
      detail::encode_pair(opts.format, v, out);
    }
    out += '\n';
  }
  return out;
}

}  // namespace zport
