#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pathsim {

using Index = std::size_t;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense work (exact oracle, dense_exp, interference) refuses larger dimensions.
inline constexpr Index kDefaultOracleCap = 1024;

enum class ErrorCode {
  InvalidParameter,
  DimensionMismatch,
  OracleCapExceeded,
  ShapeMismatch,
  InvalidWeights,
  IndexMapInconsistent,
  NonUnitPhase,
  DeadRow,
  DeadColumn,
  NotNormalized,
  ZeroVector,
  NormViolation,
  HistoryCapExceeded,
  NegativeMassOverflow,
  SchemaError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Hoelder conjugate pair with 1/p + 1/q = 1.
class NormPair {
 public:
  NormPair() : NormPair(2.0) {}
  explicit NormPair(double p);

  static NormPair from_q(double q);
  static NormPair stochastic() { return NormPair(kInf); }

  double p() const { return p_; }
  double q() const { return q_; }
  double inv_p() const { return inv_p_; }
  double inv_q() const { return 1.0 - inv_p_; }
  NormPair swapped() const { return from_q(p_); }

  bool operator==(const NormPair& o) const { return p_ == o.p_; }

 private:
  double p_;
  double q_;
  double inv_p_;
};

// l_r norm of a vector of magnitudes, r in [1, inf].
double lp_norm(const RealVector& x, double r);

}  // namespace pathsim
