#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zport {

/// Base class for all domain errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string freq_text(double f_hz) {
  return std::to_string(f_hz) + " Hz";
}

}  // namespace detail

/// (I - S) or (Z + z_ref*I) is numerically singular at one grid point,
/// e.g. a total-reflection point.
class SingularConversion : public Error {
 public:
  explicit SingularConversion(double frequency_hz)
      : Error("singular parameter conversion at " + detail::freq_text(frequency_hz)),
        frequency_hz_(frequency_hz) {}
  double frequency_hz() const noexcept { return frequency_hz_; }

 private:
  double frequency_hz_;
};

/// Malformed input text. Line numbers are 1-based.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NonMonotonicFrequency : public Error {
 public:
  explicit NonMonotonicFrequency(std::size_t line)
      : Error("line " + std::to_string(line) + ": frequency not strictly increasing"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnsupportedPortCount : public Error {
 public:
  UnsupportedPortCount(std::size_t line, std::size_t columns)
      : Error("line " + std::to_string(line) + ": " + std::to_string(columns) +
              " columns do not describe a 2-port record (expected 9)"),
        line_(line),
        columns_(columns) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t columns() const noexcept { return columns_; }

 private:
  std::size_t line_;
  std::size_t columns_;
};

class DivisionByZero : public Error {
 public:
  explicit DivisionByZero(double frequency_hz)
      : Error("vanishing Z11 at " + detail::freq_text(frequency_hz)),
        frequency_hz_(frequency_hz) {}
  double frequency_hz() const noexcept { return frequency_hz_; }

 private:
  double frequency_hz_;
};

class SingularDeterminant : public Error {
 public:
  explicit SingularDeterminant(double frequency_hz)
      : Error("singular Z determinant at " + detail::freq_text(frequency_hz)),
        frequency_hz_(frequency_hz) {}
  double frequency_hz() const noexcept { return frequency_hz_; }

 private:
  double frequency_hz_;
};

class GridMismatch : public Error {
 public:
  GridMismatch() : Error("frequency grids do not match") {}
};

class IllConditionedFit : public Error {
 public:
  IllConditionedFit(std::size_t mode_index, const std::string& reason)
      : Error("mode " + std::to_string(mode_index) + ": " + reason),
        mode_index_(mode_index) {}
  std::size_t mode_index() const noexcept { return mode_index_; }

 private:
  std::size_t mode_index_;
};

class PoleSingularity : public Error {
 public:
  explicit PoleSingularity(double frequency_hz)
      : Error("evaluation at the parallel-resonance pole, " + detail::freq_text(frequency_hz)),
        frequency_hz_(frequency_hz) {}
  double frequency_hz() const noexcept { return frequency_hz_; }

 private:
  double frequency_hz_;
};

class DegenerateSweep : public Error {
 public:
  DegenerateSweep() : Error("impedance sweep has no usable variation") {}
};

class OutOfGrid : public Error {
 public:
  explicit OutOfGrid(double frequency_hz)
      : Error(detail::freq_text(frequency_hz) + " lies outside the sampled grid"),
        frequency_hz_(frequency_hz) {}
  double frequency_hz() const noexcept { return frequency_hz_; }

 private:
  double frequency_hz_;
};

}  // namespace zport
