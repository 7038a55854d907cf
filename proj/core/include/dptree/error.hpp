#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dptree {

/// Failure categories reported by every module. The CLI maps them to exit
/// codes and prints the category name next to the message.
enum class ErrorKind {
  InvalidArgument,
  // tree_model
  CycleDetected,
  Disconnected,
  SelfLoop,
  DuplicateEdge,
  NotALeaf,
  IsLeaf,
  IsolatedVertex,
  TooLarge,
  // fractal_gen
  OverlappingBranches,
  TooManyPoints,
  EmptyRadiusList,
  // config_count
  UnknownKernel,
  TupleSpaceTooLarge,
  OutputTooLarge,
  // scaling_lab
  DegenerateInterval,
  AllZeroValues,
  NotACover,
  NoEmbeddingsFound,
  BinTooSmall,
  LadderOutOfRange,
  ResolutionFloor,
  // spectral_check
  DimensionTooHigh,
  GridTooCoarse,
  // cli_io
  ConfigInvalid,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }
  /// Same error with "<context>: " in front of the message.
  Error with_context(std::string_view context) const {
    return Error(kind_, std::string(context) + ": " + message_);
  }

 private:
  ErrorKind kind_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace dptree
