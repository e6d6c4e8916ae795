#pragma once

#include "parisian/downin.hpp"
#include "parisian/generator.hpp"
#include "parisian/grid.hpp"
#include "parisian/lcp.hpp"
#include "parisian/types.hpp"

#include <vector>

namespace parisian {

/// Joint (excursion duration, spatial state) lattice of the down-out problem.
///
/// Durations are d_i = iδ_d for i = 0..m with D⁺ = mδ_d the first grid
/// duration strictly above D. The d = 0 block holds every spatial state; the
/// blocks i ≥ 1 hold only the states below L. Joint index of (i, x) is x for
/// i = 0 and n + (i−1)·n_below + x otherwise.
class AugmentedStateSpace {
public:
    AugmentedStateSpace() = default;
    AugmentedStateSpace(int spatial_size, int below_count, double window, double dd);

    int spatial_size() const { return n_; }
    int below_count() const { return nb_; }
    /// Index m of D⁺ on the duration grid.
    int top() const { return m_; }
    /// n_d = D⁺/δ_d + 1 duration levels.
    int levels() const { return m_ + 1; }
    int size() const { return n_ + nb_ * m_; }
    double window() const { return window_; }
    double dd() const { return dd_; }
    double d_plus() const { return m_ * dd_; }
    double duration(int level) const { return level * dd_; }

    /// Joint index of (level, x); throws for x ≥ L at level > 0.
    int index(int level, int x) const;
    int level_of(int k) const { return k < n_ ? 0 : 1 + (k - n_) / nb_; }
    int state_of(int k) const { return k < n_ ? k : (k - n_) % nb_; }
    /// Offset of the first entry of a level ≥ 1.
    int level_offset(int level) const { return n_ + (level - 1) * nb_; }
    /// d ≤ D, i.e. the level is exercisable.
    bool exercisable(int level) const { return level < m_; }

    /// f̃(d, x) = f(x)·1{d ≤ D}.
    Vector extend_payoff(const Vector& f) const;
    /// Values at d = 0.
    Vector spatial_slice(const Vector& joint) const { return joint.head(n_); }

private:
    int n_ = 0;
    int nb_ = 0;
    int m_ = 0;
    double window_ = 0.0;
    double dd_ = 0.0;
};

/// Generator of (D, Y). Holds the spatial generator and applies the block
/// structure on the fly; rows at D⁺ are zero.
class AugmentedGenerator {
public:
    AugmentedGenerator(GeneratorMatrix spatial, AugmentedStateSpace space);

    const AugmentedStateSpace& space() const { return space_; }
    const GeneratorMatrix& spatial() const { return g_; }
    int size() const { return space_.size(); }

    /// G̃x without assembling the matrix.
    Vector apply(const Vector& x) const;
    /// Assembled row-major matrix.
    SparseMatrix to_sparse() const;
    /// diag·I − scale·G̃ as a sparse matrix.
    SparseMatrix shifted(double diag, double scale) const;
    Matrix to_dense() const;

private:
    GeneratorMatrix g_;
    AugmentedStateSpace space_;
};

/// Builds G̃ for the barrier carried by `grid`.
AugmentedGenerator build_augmented_generator(const GeneratorMatrix& g, const SpatialGrid& grid, double D, double dd);

enum class DownOutSolver {
    /// Eliminate the levels d ≥ δ_d assuming continuation there, solve the
    /// reduced LCP on d = 0, then verify the full complementarity conditions.
    /// Falls back to Full when verification fails.
    Reduced,
    /// Solve the whole augmented LCP directly.
    Full,
};

std::string to_string(DownOutSolver s);
DownOutSolver parse_downout_solver(const std::string& name);

struct DownOutOptions {
    DownOutSolver solver = DownOutSolver::Reduced;
    /// LCP method on the reduced d = 0 system when it is dense.
    LcpMethod dense_lcp = LcpMethod::PolicyIteration;
    /// Method for the full augmented system: policy iteration factors it with
    /// sparse LU, PSOR only needs matrix rows.
    LcpMethod full_lcp = LcpMethod::PolicyIteration;
    PsorOptions psor{};
    /// Tolerance of the verification step of the reduced solver.
    double verify_tol = 1e-9;
    /// Keep every slice of the finite-maturity surface.
    bool keep_surface = false;
};

struct DownOutStats {
    long lcp_iterations = 0;
    int reduced_solves = 0;
    int full_solves = 0;
    double max_residual = 0.0;
};

struct PerpetualDownOutResult {
    AugmentedStateSpace space;
    Vector values;  ///< C_po over the joint states
    DownOutStats stats;

    /// Values at d = 0 over the spatial grid.
    Vector price() const { return space.spatial_slice(values); }
};

/// min((rĨ − G̃)C, C − f̃) = 0.
PerpetualDownOutResult price_perpetual_downout(const GeneratorMatrix& g, const SpatialGrid& grid, const Vector& f,
                                               double D, double dd, double r, const DownOutOptions& opts = {});

struct FiniteDownOutResult {
    AugmentedStateSpace space;
    TimeGrid time;
    /// surface[s] = C_fo(sδ_t) over the joint states. Only slice 0 unless
    /// keep_surface was requested, in which case s = 0..steps (last is zero).
    std::vector<Vector> surface;
    DownOutStats stats;

    Vector price() const { return space.spatial_slice(surface.front()); }
};

/// Backward recursion min(((1 + rδ_t)Ĩ − δ_t G̃_t)C(t) − C(t+δ_t), C(t) − f̃) = 0
/// from C(T⁺) = 0.
FiniteDownOutResult price_finite_downout(const GeneratorFn& generator, bool homogeneous, const SpatialGrid& grid,
                                         const TimeGrid& time, const Vector& f, double D, double dd, double r,
                                         const DownOutOptions& opts = {});

FiniteDownOutResult price_finite_downout(const GeneratorMatrix& g, const SpatialGrid& grid, const TimeGrid& time,
                                         const Vector& f, double D, double dd, double r,
                                         const DownOutOptions& opts = {});

}  // namespace parisian
