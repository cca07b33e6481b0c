#include "topo/error.hpp"

namespace topo {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::MalformedTile: return "malformed tile";
    case ErrorKind::MissingGeoreference: return "missing georeference";
    case ErrorKind::Bounds: return "bounds error";
    case ErrorKind::OutOfExtent: return "out of extent";
    case ErrorKind::EmptyInput: return "empty input";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::InternalInvariant: return "internal invariant violated";
    case ErrorKind::NoChannel: return "no channel";
    case ErrorKind::NoRidge: return "no ridge";
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::Configuration: return "configuration error";
    case ErrorKind::Split: return "split error";
    case ErrorKind::Class: return "class error";
    case ErrorKind::Convergence: return "convergence error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Sampling: return "sampling error";
  }
  return "error";
}

}  // namespace topo
