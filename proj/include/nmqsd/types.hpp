#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <stdexcept>
#include <string>

namespace nmqsd {

using Real = double;
using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr Complex I{0.0, 1.0};

// Error hierarchy; everything numerical or structural that a caller may
// want to catch by name derives from Error.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct TruncationError : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct DimensionTooLarge : Error {
  using Error::Error;
};
struct ZeroNormError : Error {
  using Error::Error;
};
struct DistributionalKernel : Error {
  using Error::Error;
};
struct NotPositiveSemidefinite : Error {
  using Error::Error;
};
struct FDiverged : Error {
  using Error::Error;
};
struct CoefficientDiverged : Error {
  using Error::Error;
};
struct HistoryMissing : Error {
  using Error::Error;
};
struct NumericalBlowup : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace nmqsd
