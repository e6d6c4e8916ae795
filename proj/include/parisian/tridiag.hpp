#pragma once

#include "parisian/types.hpp"

#include <cstddef>
#include <vector>

namespace parisian {

/// Tridiagonal matrix stored by diagonals: sub (n−1), main (n), super (n−1).
struct TriDiag {
    std::vector<double> sub;
    std::vector<double> main;
    std::vector<double> super;

    TriDiag() = default;
    explicit TriDiag(std::size_t n) : sub(n > 0 ? n - 1 : 0), main(n), super(n > 0 ? n - 1 : 0) {}

    std::size_t size() const { return main.size(); }
    void validate() const;

    Vector apply(const Vector& x) const;
    Matrix to_dense() const;
    double norm_inf() const;

    static TriDiag identity(std::size_t n);
};

/// Thomas factorization kept for repeated solves with the same matrix.
class TridiagFactor {
public:
    explicit TridiagFactor(const TriDiag& a);

    Vector solve(const Vector& b) const;
    void solve_in_place(Vector& x) const;
    std::size_t size() const { return diag_.size(); }

private:
    std::vector<double> sub_;
    std::vector<double> diag_;    // pivots
    std::vector<double> upper_;   // super / pivot
};

/// Solves A x = b; throws SingularMatrixError on a (numerically) zero pivot.
Vector solve_tridiag(const TriDiag& a, const Vector& b);

}  // namespace parisian
