#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace webcurv {

enum class ErrorCode {
  NearZeroDivisor,
  ZeroOrderJet,
  OrderMismatch,
  BasePointMismatch,
  SyntaxError,
  DomainError,
  SingularMatrix,
  RankDeficient,
  BadNormalization,
  InsufficientJetOrder,
  SingularLeadingBlock,
  SlopeCollision,
  VanishingFx,
  VanishingGradient,
  NotNormalized,
  UnsupportedWebSize,
  InvalidArgument,
  InputError,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code is
/// stable and is what reports print as a skip reason.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

/// Parse failure. `position` is the 1-based character offset where the
/// parser gave up (one past the end for truncated input).
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& expected,
              const std::string& message)
      : Error(ErrorCode::SyntaxError, message),
        position_(position),
        expected_(expected) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

/// Elimination failure; `step` is the 0-based column being eliminated.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(std::size_t step, double best_pivot,
                      const std::string& message)
      : Error(ErrorCode::SingularMatrix, message),
        step_(step),
        best_pivot_(best_pivot) {}

  std::size_t step() const noexcept { return step_; }
  double best_pivot() const noexcept { return best_pivot_; }

 private:
  std::size_t step_;
  double best_pivot_;
};

}  // namespace webcurv
