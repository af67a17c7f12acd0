#include "moc/error.hpp"

namespace moc {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NumericOverflow: return "NumericOverflow";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::InvalidCoefficient: return "InvalidCoefficient";
    case ErrorKind::InvalidMargin: return "InvalidMargin";
    case ErrorKind::DegenerateEmbedding: return "DegenerateEmbedding";
    case ErrorKind::InvalidStep: return "InvalidStep";
    case ErrorKind::Diverged: return "DivergedError";
    case ErrorKind::MissingReference: return "MissingReference";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::UsageError: return "UsageError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace moc
