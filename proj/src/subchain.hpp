#pragma once

// Block views of a spatial generator restricted to a contiguous index range,
// shared by the down-in and down-out pricers.

#include "parisian/expm.hpp"
#include "parisian/generator.hpp"
#include "parisian/tridiag.hpp"

#include <Eigen/LU>

#include <optional>
#include <vector>

namespace parisian::detail {

/// Rows/columns [begin, end) of a generator, kept tridiagonal when possible.
class SubChain {
public:
    SubChain(const GeneratorMatrix& g, int begin, int end);

    int size() const { return end_ - begin_; }
    int begin() const { return begin_; }
    bool tridiagonal() const { return tri_.has_value(); }
    const TriDiag& tri() const { return *tri_; }
    const Matrix& dense() const { return dense_; }
    Matrix to_dense() const;

    /// Couplings G(i, j) for i in this block and j in [cbegin, cend).
    Matrix coupling(int cbegin, int cend) const;

private:
    const GeneratorMatrix* g_;
    int begin_;
    int end_;
    std::optional<TriDiag> tri_;
    Matrix dense_;
};

/// Factorization of (shift·I − Ḡ) for one block.
class Resolvent {
public:
    Resolvent(const SubChain& block, double shift);

    Vector solve(const Vector& b) const;
    Matrix solve(const Matrix& b) const;

private:
    std::optional<TridiagFactor> tri_;
    std::optional<Eigen::PartialPivLU<Matrix>> lu_;
};

/// exp(tḠ) on one block via backward-Euler substeps.
BackwardEulerExp block_exp(const SubChain& block, double t, int k);

/// Column indices j in [cbegin, cend) with some nonzero G(i, j), i in the block.
std::vector<int> coupled_columns(const SubChain& block, int cbegin, int cend);

/// Columns of m selected by absolute indices (offset subtracted).
Matrix select_columns(const Matrix& m, const std::vector<int>& cols, int offset);
Vector select_entries(const Vector& v, const std::vector<int>& idx);

}  // namespace parisian::detail
