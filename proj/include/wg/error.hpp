#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace wg {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Malformed input text (mesh or field files).
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// A mesh or input that violates a structural invariant. Carries the offending cell when known.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what, std::size_t cell = npos)
      : std::runtime_error(cell == npos ? what : "cell " + std::to_string(cell) + ": " + what),
        cell_(cell) {}
  std::size_t cell() const { return cell_; }

private:
  std::size_t cell_;
};

/// Degenerate geometry detected while building local quantities (quadrature, mass matrices).
class GeometryError : public std::runtime_error {
public:
  explicit GeometryError(const std::string& what, std::size_t cell = npos)
      : std::runtime_error(cell == npos ? what : "cell " + std::to_string(cell) + ": " + what),
        cell_(cell) {}
  std::size_t cell() const { return cell_; }

private:
  std::size_t cell_;
};

class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what + " (relative residual " + std::to_string(residual) + " after " +
                           std::to_string(iterations) + " iterations)"),
        residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

private:
  double residual_;
  int iterations_;
};

} // namespace wg
