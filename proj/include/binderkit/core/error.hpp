// Error type shared by every binderkit module.

#ifndef BINDERKIT_CORE_ERROR_HPP_
#define BINDERKIT_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <utility>

namespace binderkit {

enum class ErrorKind {
  Parse,
  EmptyStructure,
  FrameUnavailable,
  DegenerateFrame,
  GraphTooSmall,
  Dimension,
  Contract,
  Unalignable,
  Io,
  Model,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::EmptyStructure: return "empty-structure";
    case ErrorKind::FrameUnavailable: return "frame-unavailable";
    case ErrorKind::DegenerateFrame: return "degenerate-frame";
    case ErrorKind::GraphTooSmall: return "graph-too-small";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Unalignable: return "unalignable";
    case ErrorKind::Io: return "io";
    case ErrorKind::Model: return "model";
  }
  return "unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond)
    fail(ErrorKind::Contract, msg);
}

} // namespace binderkit

#endif
