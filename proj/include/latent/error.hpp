#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace latent {

/// Base class for every error the toolkit raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed SLMX payload; carries the byte offset where decoding stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Non-finite values, failed normalization and similar numeric breakdowns.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A landmark region whose soft weight vanished.
class DegenerateLandmarkError : public NumericError {
 public:
  explicit DegenerateLandmarkError(std::string region)
      : NumericError("degenerate landmark region '" + region + "': total soft weight below 1e-9"),
        region_(std::move(region)) {}
  const std::string& region() const noexcept { return region_; }

 private:
  std::string region_;
};

/// An intersection stage removed every remaining direction.
class EmptyIntersectionError : public Error {
 public:
  EmptyIntersectionError(std::string stage, double stage_epsilon, double activate_epsilon)
      : Error("empty intersection at stage '" + stage + "' (stage eps=" + std::to_string(stage_epsilon) +
              ", activate eps=" + std::to_string(activate_epsilon) + ")"),
        stage_(std::move(stage)),
        stage_epsilon_(stage_epsilon),
        activate_epsilon_(activate_epsilon) {}
  const std::string& stage() const noexcept { return stage_; }
  double stage_epsilon() const noexcept { return stage_epsilon_; }
  double activate_epsilon() const noexcept { return activate_epsilon_; }

 private:
  std::string stage_;
  double stage_epsilon_;
  double activate_epsilon_;
};

/// Text parse failure with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column, std::string token)
      : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column) +
              (token.empty() ? std::string() : " near '" + token + "'")),
        line_(line),
        column_(column),
        token_(std::move(token)) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& token() const noexcept { return token_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string token_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace latent
