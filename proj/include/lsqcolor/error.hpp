#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lsqcolor {

/// Failure categories raised by the library. The CLI maps them onto exit codes.
enum class ErrorKind {
  DimensionMismatch,
  RankDeficient,
  NotPositiveDefinite,
  NotHermitian,
  NotPSD,
  InvalidBasis,
  InvalidArgument,
  GridTooCoarse,
  GridMismatch,
  SpectralZero,
  EmbeddingFailed,
  PerturbationTooLarge,
  ParseError,
};

constexpr std::string_view kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::InvalidBasis: return "InvalidBasis";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::SpectralZero: return "SpectralZero";
    case ErrorKind::EmbeddingFailed: return "EmbeddingFailed";
    case ErrorKind::PerturbationTooLarge: return "PerturbationTooLarge";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return kind_name(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace lsqcolor
