#include "parisian/tridiag.hpp"

#include <cmath>
#include <string>

namespace parisian {

void TriDiag::validate() const {
    const std::size_t n = main.size();
    const std::size_t off = n > 0 ? n - 1 : 0;
    if (sub.size() != off || super.size() != off) {
        throw std::invalid_argument("tridiagonal: diagonal lengths must be n-1, n, n-1");
    }
}

Vector TriDiag::apply(const Vector& x) const {
    const std::size_t n = size();
    if (static_cast<std::size_t>(x.size()) != n) throw std::invalid_argument("tridiagonal apply: size mismatch");
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = main[i] * x[i];
        if (i > 0) v += sub[i - 1] * x[i - 1];
        if (i + 1 < n) v += super[i] * x[i + 1];
        y[i] = v;
    }
    return y;
}

Matrix TriDiag::to_dense() const {
    const std::size_t n = size();
    Matrix m = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = main[i];
        if (i > 0) m(i, i - 1) = sub[i - 1];
        if (i + 1 < n) m(i, i + 1) = super[i];
    }
    return m;
}

double TriDiag::norm_inf() const {
    const std::size_t n = size();
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = std::abs(main[i]);
        if (i > 0) row += std::abs(sub[i - 1]);
        if (i + 1 < n) row += std::abs(super[i]);
        best = std::max(best, row);
    }
    return best;
}

TriDiag TriDiag::identity(std::size_t n) {
    TriDiag t(n);
    std::fill(t.main.begin(), t.main.end(), 1.0);
    return t;
}

TridiagFactor::TridiagFactor(const TriDiag& a) : sub_(a.sub), diag_(a.size()), upper_(a.super.size()) {
    a.validate();
    const std::size_t n = a.size();
    const double scale = std::max(a.norm_inf(), 1e-300);
    for (std::size_t i = 0; i < n; ++i) {
        double pivot = a.main[i];
        if (i > 0) pivot -= a.sub[i - 1] * upper_[i - 1];
        if (!(std::abs(pivot) > 1e-14 * scale)) {
            throw SingularMatrixError("tridiagonal solve: zero pivot at row " + std::to_string(i));
        }
        diag_[i] = pivot;
        if (i + 1 < n) upper_[i] = a.super[i] / pivot;
    }
}

void TridiagFactor::solve_in_place(Vector& x) const {
    const std::size_t n = diag_.size();
    if (static_cast<std::size_t>(x.size()) != n) throw std::invalid_argument("tridiagonal solve: size mismatch");
    if (n == 0) return;
    x[0] /= diag_[0];
    for (std::size_t i = 1; i < n; ++i) x[i] = (x[i] - sub_[i - 1] * x[i - 1]) / diag_[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= upper_[i] * x[i + 1];
}

Vector TridiagFactor::solve(const Vector& b) const {
    Vector x = b;
    solve_in_place(x);
    return x;
}

Vector solve_tridiag(const TriDiag& a, const Vector& b) { return TridiagFactor(a).solve(b); }

}  // namespace parisian
