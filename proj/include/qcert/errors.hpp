#pragma once
// Error taxonomy shared across the toolkit. ValidationError covers bad
// inputs, files, and domain violations (CLI exit code 2); SolverError and
// its CertificateError refinement cover optimization failures (exit 3).

#include <stdexcept>
#include <string>

namespace qcert {

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

struct CertificateError : SolverError {
  explicit CertificateError(const std::string& what) : SolverError(what) {}
};

}  // namespace qcert
