#pragma once

#include "parisian/grid.hpp"
#include "parisian/models.hpp"
#include "parisian/tridiag.hpp"
#include "parisian/types.hpp"

#include <optional>
#include <string>

namespace parisian {

/// How assembly reacts to a negative off-diagonal rate.
enum class RatePolicy {
    Strict,  ///< throw NegativeRateError
    Clamp,   ///< zero the offending rate and rebalance the diagonal
    Upwind,  ///< rebuild the offending row with a one-sided drift difference
};

RatePolicy parse_rate_policy(const std::string& name);
std::string to_string(RatePolicy p);

struct GeneratorOptions {
    RatePolicy policy = RatePolicy::Strict;
};

/// Spatial generator: nearest-neighbour rates and the diagonal live in a
/// tridiagonal core, rates to non-adjacent states in an optional dense block.
class GeneratorMatrix {
public:
    GeneratorMatrix() = default;
    GeneratorMatrix(TriDiag core, std::optional<Matrix> far, double t);
    /// Splits a dense rate matrix into the tridiagonal core and the jump block.
    /// The jump block is kept whenever `keep_jump_block` is set or some
    /// entry lies off the tridiagonal band.
    static GeneratorMatrix from_dense(const Matrix& g, double t = 0.0, bool keep_jump_block = false);

    int size() const { return static_cast<int>(core_.size()); }
    double time() const { return time_; }
    bool is_birth_death() const { return !far_.has_value(); }

    const TriDiag& core() const { return core_; }
    const std::optional<Matrix>& far() const { return far_; }

    double rate(int i, int j) const;
    double diagonal(int i) const { return core_.main[static_cast<std::size_t>(i)]; }
    Matrix to_dense() const;
    Vector apply(const Vector& x) const;
    double norm_inf() const;

    /// Rows whose negative entries were repaired during assembly.
    int repaired_rows() const { return repaired_rows_; }
    void set_repaired_rows(int k) { repaired_rows_ = k; }

    /// Throws std::logic_error unless off-diagonals are ≥ 0, every row sums to
    /// zero (relative tolerance `tol`) and the listed absorbing rows are zero.
    void check_valid(double tol = 1e-12) const;

    /// Writes `i,j,rate` rows for every nonzero entry.
    void write_csv(const std::string& path) const;

private:
    TriDiag core_;
    std::optional<Matrix> far_;
    double time_ = 0.0;
    int repaired_rows_ = 0;
};

/// Assembles the spatial generator at time t; rows y₀ and yₙ are absorbing.
GeneratorMatrix build_generator(const ModelSpec& model, const SpatialGrid& grid, double t,
                                const GeneratorOptions& opts = {});

}  // namespace parisian
