#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mane {

enum class ErrorCode {
  InvalidArgument,
  NonConvex,
  BelowCritical,
  QuadratureFailure,
  Unbounded,
  WrongModel,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonConvex: return "NonConvex";
    case ErrorCode::BelowCritical: return "BelowCritical";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::WrongModel: return "WrongModel";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace mane
