#pragma once

/**
 * @file types.hpp
 * @brief Shared numeric types and error hierarchy.
 */

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace consensus {

using Matrix  = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector  = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// An iterative numeric routine failed to reach its accuracy target.
class NumericError : public std::runtime_error {
  public:
    NumericError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_;
};

/// Linear solve rejected a matrix that is singular to working tolerance.
class SingularMatrixError : public std::runtime_error {
  public:
    SingularMatrixError(const std::string& what, double condition)
        : std::runtime_error(what), condition_(condition) {}
    double condition() const { return condition_; }

  private:
    double condition_;
};

/// Operands do not conform (or would overflow the supported sizes).
class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The requested synthesis/analysis has no solution for the given inputs.
class InfeasibleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The operation does not apply to the given structure (e.g. rank-deficient B).
class NotApplicableError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A simulated state left the finite range.
class DivergenceError : public std::runtime_error {
  public:
    DivergenceError(const std::string& what, double time)
        : std::runtime_error(what), time_(time) {}
    double time() const { return time_; }

  private:
    double time_;
};

/// Configuration parsing/validation failure with the offending field.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(field) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

}  // namespace consensus
