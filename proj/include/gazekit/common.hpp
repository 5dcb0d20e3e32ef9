#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace gazekit {

enum class ErrorCode {
  InvalidInput,
  BehindCamera,
  DegenerateFace,
  DegenerateIris,
  DegenerateEye,
  DegenerateQuad,
  ShapeMismatch,
  TrainingDiverged,
  SchemaViolation,
  IntegrityError,
  IoError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::BehindCamera: return "behind-camera";
    case ErrorCode::DegenerateFace: return "degenerate-face";
    case ErrorCode::DegenerateIris: return "degenerate-iris";
    case ErrorCode::DegenerateEye: return "degenerate-eye";
    case ErrorCode::DegenerateQuad: return "degenerate-quad";
    case ErrorCode::ShapeMismatch: return "shape-mismatch";
    case ErrorCode::TrainingDiverged: return "training-diverged";
    case ErrorCode::SchemaViolation: return "schema-violation";
    case ErrorCode::IntegrityError: return "integrity-error";
    case ErrorCode::IoError: return "io-error";
  }
  return "unknown";
}

// Single RNG type everywhere so seeded runs replay bit-for-bit.
using Rng = std::mt19937_64;

template <class T>
bool is_finite(T x) {
  return std::isfinite(static_cast<double>(x));
}

}  // namespace gazekit
