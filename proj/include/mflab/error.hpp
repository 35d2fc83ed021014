#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mflab {

using cplx = std::complex<double>;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

enum class ErrorCode {
  InvalidArgument,
  Leakage,       // eigenfunctions reach the grid boundary
  Resolution,    // grid does not resolve the interaction length scale
  Unstable,      // minimization problem unbounded below
  Dimension,     // Fock-space dimension guard
  Config,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mflab
