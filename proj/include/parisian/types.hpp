#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace parisian {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a linear solve meets a zero pivot or a singular resolvent.
class SingularMatrixError : public std::runtime_error {
public:
    explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an assembled generator has a negative off-diagonal rate.
class NegativeRateError : public std::runtime_error {
public:
    NegativeRateError(const std::string& what, int row, int col, double rate)
        : std::runtime_error(what), row_(row), col_(col), rate_(rate) {}

    int row() const { return row_; }
    int col() const { return col_; }
    double rate() const { return rate_; }

private:
    int row_;
    int col_;
    double rate_;
};

/// Raised by iterative procedures that exhaust their budget.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace parisian
