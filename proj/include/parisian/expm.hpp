#pragma once

#include "parisian/tridiag.hpp"
#include "parisian/types.hpp"

#include <Eigen/LU>

#include <optional>

namespace parisian {

/// Default backward-Euler substep count: max(64, ⌈8·t·‖A‖∞⌉).
int default_expm_steps(double t, double norm_inf);

/// exp(tA) ≈ (I − tA/k)^{−k}, prepared once and applied many times.
///
/// For a tridiagonal A each application runs k tridiagonal solves. For a
/// dense A the operator itself is formed by binary powering of the one-step
/// resolvent, so applications are plain matrix products.
class BackwardEulerExp {
public:
    BackwardEulerExp(const TriDiag& a, double t, int k = 0);
    BackwardEulerExp(const Matrix& a, double t, int k = 0);

    Vector apply(const Vector& b) const;
    Matrix apply(const Matrix& b) const;

    int steps() const { return steps_; }
    Eigen::Index size() const { return n_; }

private:
    Eigen::Index n_ = 0;
    int steps_ = 0;
    bool identity_ = false;
    std::optional<TridiagFactor> tri_;
    Matrix dense_;
};

Vector expm_action(const TriDiag& a, const Vector& b, double t, int k = 0);
Vector expm_action(const Matrix& a, const Vector& b, double t, int k = 0);

}  // namespace parisian
