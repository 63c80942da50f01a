#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "zport/detail/format.hpp"
#include "zport/errors.hpp"
#include "zport/lcr.hpp"
#include "zport/network.hpp"

namespace zport {

inline constexpr std::string_view kZSweepCsvHeader =
    "freq_hz,z11_re,z11_im,z12_re,z12_im,z21_re,z21_im,z22_re,z22_im";
inline constexpr std::string_view kImpedanceCsvHeader = "freq_hz,z_re,z_im";

/// Z-parameter sweep as CSV. Values use the shortest decimal notation that
/// round-trips the underlying doubles.
inline std::string export_z_csv(const TwoPortNetwork& net) {
  if (net.kind() != ParamKind::Z)
    throw std::invalid_argument("export_z_csv expects a Z-parameter network");
  std::string out(kZSweepCsvHeader);
  out += '\n';
  for (std::size_t i = 0; i < net.size(); ++i) {
    const Matrix2c& m = net.at(i);
    out += detail::format_double(net.grid()[i]);
    for (const Complex& v : {m.m11, m.m12, m.m21, m.m22}) {
      out += ',';
      out += detail::format_double(v.real());
      out += ',';
      out += detail::format_double(v.imag());
    }
    out += '\n';
  }
  return out;
}

namespace detail {

inline std::vector<std::string_view> split_csv_row(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

struct CsvTable {
  std::vector<double> freqs;
  std::vector<std::vector<double>> rows;  // numeric columns after freq_hz
};

inline CsvTable parse_numeric_csv(std::string_view text, std::string_view header,
                                  std::size_t columns_after_freq) {
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool saw_header = false;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != header)
        throw SyntaxError(line_no, "expected header '" + std::string(header) + "'");
      saw_header = true;
      continue;
    }
    const auto cells = split_csv_row(line);
    if (cells.size() != columns_after_freq + 1)
      throw SyntaxError(line_no, "expected " + std::to_string(columns_after_freq + 1) +
                                     " columns, found " + std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!parse_double(cells[i], row[i]))
        throw SyntaxError(line_no, "malformed number '" + std::string(cells[i]) + "'");
    }
    if (!table.freqs.empty() && row[0] <= table.freqs.back())
      throw NonMonotonicFrequency(line_no);
    table.freqs.push_back(row[0]);
    row.erase(row.begin());
    table.rows.push_back(std::move(row));
  }
  if (!saw_header) throw SyntaxError(1, "empty file");
  if (table.freqs.empty()) throw SyntaxError(line_no, "file contains no data rows");
  return table;
}

}  // namespace detail

/// Reads a Z-sweep CSV produced by export_z_csv. The CSV carries no
/// reference impedance, so `z_ref_ohm` is recorded as given.
inline TwoPortNetwork parse_z_csv(std::string_view text,
                                  double z_ref_ohm = kDefaultReferenceOhm) {
  auto table = detail::parse_numeric_csv(text, kZSweepCsvHeader, 8);
  std::vector<Matrix2c> mats;
  mats.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    mats.push_back(Matrix2c{{row[0], row[1]}, {row[2], row[3]}, {row[4], row[5]},
                            {row[6], row[7]}});
  }
  return TwoPortNetwork(ParamKind::Z, FrequencyGrid(std::move(table.freqs)), std::move(mats),
                        z_ref_ohm);
}

/// Scalar impedance sweep as CSV, the shape an impedance analyzer exports.
inline std::string export_impedance_csv(const ImpedanceSweep& sweep) {
  std::string out(kImpedanceCsvHeader);
  out += '\n';
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    out += detail::format_double(sweep.grid()[i]);
    out += ',';
    out += detail::format_double(sweep.z()[i].real());
    out += ',';
    out += detail::format_double(sweep.z()[i].imag());
    out += '\n';
  }
  return out;
}

/// Reads either a scalar impedance CSV (freq_hz,z_re,z_im) or a full Z-sweep
/// CSV, in which case Z11, the cantilever impedance, is taken.
inline ImpedanceSweep parse_impedance_csv(std::string_view text) {
  std::string_view first_line = text.substr(0, text.find('\n'));
  if (!first_line.empty() && first_line.back() == '\r') first_line.remove_suffix(1);
  if (first_line == kZSweepCsvHeader) {
    TwoPortNetwork net = parse_z_csv(text);
    std::vector<Complex> z;
    z.reserve(net.size());
    for (const Matrix2c& m : net.matrices()) z.push_back(m.m11);
    return ImpedanceSweep(net.grid(), std::move(z));
  }
  auto table = detail::parse_numeric_csv(text, kImpedanceCsvHeader, 2);
  std::vector<Complex> z;
  z.reserve(table.rows.size());
  for (const auto& row : table.rows) z.emplace_back(row[0], row[1]);
  return ImpedanceSweep(FrequencyGrid(std::move(table.freqs)), std::move(z));
}

}  // namespace zport
