#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <string>

namespace topt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SpMatrix = Eigen::SparseMatrix<double>;

// Error categories carried across the C API boundary as status codes.
enum class ErrorCode {
  invalid_argument,
  io,
  diverged,
  degenerate,
  runtime
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

  static Error invalid(const std::string& m) { return {ErrorCode::invalid_argument, m}; }
  static Error io(const std::string& m) { return {ErrorCode::io, m}; }
  static Error diverged(const std::string& m) { return {ErrorCode::diverged, m}; }
  static Error degenerate(const std::string& m) { return {ErrorCode::degenerate, m}; }
  static Error runtime(const std::string& m) { return {ErrorCode::runtime, m}; }

private:
  ErrorCode code_;
};

// Stable lowercase names, used as status strings in sweep CSVs.
inline const char* error_code_name(ErrorCode code) {
  switch (code) {
  case ErrorCode::invalid_argument: return "invalid_argument";
  case ErrorCode::io: return "io";
  case ErrorCode::diverged: return "diverged";
  case ErrorCode::degenerate: return "degenerate";
  case ErrorCode::runtime: return "runtime";
  }
  return "runtime";
}

} // namespace topt
