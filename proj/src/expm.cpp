#include "parisian/expm.hpp"

#include <algorithm>
#include <cmath>

namespace parisian {

int default_expm_steps(double t, double norm_inf) {
    const double want = std::ceil(8.0 * t * norm_inf);
    if (!(want < 1e9)) return 1000000000;
    return std::max(64, static_cast<int>(want));
}

BackwardEulerExp::BackwardEulerExp(const TriDiag& a, double t, int k) : n_(a.size()) {
    a.validate();
    if (t < 0.0) throw std::invalid_argument("expm_action: t must be nonnegative");
    if (k < 0) throw std::invalid_argument("expm_action: k must be positive");
    steps_ = k == 0 ? default_expm_steps(t, a.norm_inf()) : k;
    if (t == 0.0 || n_ == 0) {
        identity_ = true;
        return;
    }
    TriDiag step = a;
    const double h = t / steps_;
    for (auto& v : step.sub) v *= -h;
    for (auto& v : step.super) v *= -h;
    for (auto& v : step.main) v = 1.0 - h * v;
    tri_.emplace(step);
}

BackwardEulerExp::BackwardEulerExp(const Matrix& a, double t, int k) : n_(a.rows()) {
    if (a.rows() != a.cols()) throw std::invalid_argument("expm_action: matrix must be square");
    if (t < 0.0) throw std::invalid_argument("expm_action: t must be nonnegative");
    if (k < 0) throw std::invalid_argument("expm_action: k must be positive");
    const double norm = n_ == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
    steps_ = k == 0 ? default_expm_steps(t, norm) : k;
    if (t == 0.0 || n_ == 0) {
        identity_ = true;
        return;
    }
    const double h = t / steps_;
    const Matrix step = Matrix::Identity(n_, n_) - h * a;
    Eigen::FullPivLU<Matrix> lu(step);
    if (!lu.isInvertible()) throw SingularMatrixError("expm_action: singular substep matrix");
    // Track E = R − I rather than R so the powering keeps its relative accuracy
    // when R is close to the identity.
    Matrix base = lu.solve(h * a);  // (I − hA)^{-1} hA = R − I
    Matrix acc = Matrix::Zero(n_, n_);
    bool acc_set = false;
    unsigned long long p = static_cast<unsigned long long>(steps_);
    while (p > 0) {
        if (p & 1ULL) {
            if (!acc_set) {
                acc = base;
                acc_set = true;
            } else {
                acc = acc + base + acc * base;
            }
        }
        p >>= 1ULL;
        if (p > 0) base = 2.0 * base + base * base;
    }
    dense_ = acc;
    dense_.diagonal().array() += 1.0;
}

Vector BackwardEulerExp::apply(const Vector& b) const {
    if (b.size() != n_) throw std::invalid_argument("expm_action: size mismatch");
    if (identity_) return b;
    if (tri_) {
        Vector x = b;
        for (int j = 0; j < steps_; ++j) tri_->solve_in_place(x);
        return x;
    }
    return dense_ * b;
}

Matrix BackwardEulerExp::apply(const Matrix& b) const {
    if (b.rows() != n_) throw std::invalid_argument("expm_action: size mismatch");
    if (identity_) return b;
    if (tri_) {
        Matrix out(b.rows(), b.cols());
        for (Eigen::Index c = 0; c < b.cols(); ++c) out.col(c) = apply(Vector(b.col(c)));
        return out;
    }
    return dense_ * b;
}

Vector expm_action(const TriDiag& a, const Vector& b, double t, int k) {
    return BackwardEulerExp(a, t, k).apply(b);
}

Vector expm_action(const Matrix& a, const Vector& b, double t, int k) {
    if (a.rows() != b.size()) throw std::invalid_argument("expm_action: size mismatch");
    // A single action is cheaper as k dense solves than forming the operator,
    // unless k is large relative to n.
    const double norm = a.rows() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
    const int steps = k == 0 ? default_expm_steps(t, norm) : k;
    if (t == 0.0 || a.rows() == 0) return b;
    if (static_cast<double>(steps) <= 4.0 * std::log2(static_cast<double>(steps) + 1.0) * a.rows()) {
        const double h = t / steps;
        Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(a.rows(), a.cols()) - h * a);
        Vector x = b;
        for (int j = 0; j < steps; ++j) x = lu.solve(x);
        if (!x.allFinite()) throw SingularMatrixError("expm_action: singular substep matrix");
        return x;
    }
    return BackwardEulerExp(a, t, steps).apply(b);
}

}  // namespace parisian
