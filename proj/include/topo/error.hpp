#pragma once

#include <stdexcept>
#include <string>

namespace topo {

enum class ErrorKind {
  Io,
  Parse,
  MalformedTile,
  MissingGeoreference,
  Bounds,
  OutOfExtent,
  EmptyInput,
  Shape,
  InternalInvariant,
  NoChannel,
  NoRidge,
  Parameter,
  Configuration,
  Split,
  Class,
  Convergence,
  Format,
  Sampling,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` lets callers and tests
/// distinguish the failure categories without a class per error.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace topo
