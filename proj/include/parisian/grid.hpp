#pragma once

#include "parisian/models.hpp"
#include "parisian/types.hpp"

#include <vector>

namespace parisian {

/// Ordered CTMC states y₀ < … < yₙ with the barrier L on-grid.
///
/// Cells are I_y = [y − δ⁻y/2, y + δ⁺y/2), with the first cell extended to −∞
/// and the last to +∞, so the cells partition the real line.
class SpatialGrid {
public:
    SpatialGrid() = default;
    /// `barrier` need not be a node; L⁺ is the first node ≥ barrier.
    SpatialGrid(std::vector<double> states, double barrier);

    int size() const { return static_cast<int>(states_.size()); }
    int last() const { return size() - 1; }
    double operator[](int i) const { return states_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& states() const { return states_; }

    double barrier() const { return barrier_; }
    /// Index of L⁺ = min{y ≥ L}; equals the number of states below L.
    int l_plus() const { return l_plus_; }
    /// Index of L⁻ = max{y < L}, or −1 when no state lies below L.
    int l_minus() const { return l_plus_ - 1; }
    int below_count() const { return l_plus_; }
    int above_count() const { return size() - l_plus_; }
    bool below(int i) const { return i < l_plus_; }

    double delta_plus(int i) const;
    double delta_minus(int i) const;
    double delta(int i) const { return 0.5 * (delta_plus(i) + delta_minus(i)); }
    Interval cell(int i) const;
    /// δ_x = max δ⁺x over the states below L.
    double grid_size() const;

    /// Left node of the cell bracketing x: largest i with yᵢ ≤ x, clamped to
    /// [0, size − 2] so that (i, i + 1) is always a valid pair.
    int locate(double x) const;
    /// Linear interpolation of nodal values at x (constant outside the grid).
    double interpolate(const Vector& values, double x) const;

private:
    std::vector<double> states_;
    double barrier_ = 0.0;
    int l_plus_ = 0;
};

/// Splits the n intervals among the three piecewise-uniform segments.
/// Outer counts are proportional to segment lengths (rounded down) and the
/// remainder goes to the middle segment.
enum class SplitPolicy { Proportional };

struct SegmentCounts {
    int n1 = 0;
    int n2 = 0;
    int n3 = 0;
};

SegmentCounts split_segments(double y_min, double y_max, double lo, double hi, int n, SplitPolicy policy);

/// Piecewise-uniform grid with n + 1 states: uniform step on [y_min, L], then
/// L + h₂, …, K − h₂ with h₂ = (K − L)/n₂, then a uniform segment from K + h₂ to
/// y_max. L is a node and K sits midway between K − h₂ and K + h₂. When K < L
/// the construction is mirrored.
SpatialGrid build_grid(double y_min, double y_max, double L, double K, int n,
                       SplitPolicy policy = SplitPolicy::Proportional);

/// Default state range: [S₀/5, 4S₀] mapped to the model coordinate.
struct StateRange {
    double lo = 0.0;
    double hi = 0.0;
};
StateRange default_state_range(const ModelSpec& model, double spot);

/// Uniform time slices 𝕋 = {iδ_t}; T⁺ = min{s ∈ 𝕋 : s > T} = steps·δ_t.
struct TimeGrid {
    double dt = 0.0;
    double horizon = 0.0;
    int steps = 0;

    TimeGrid() = default;
    TimeGrid(double dt, double horizon);

    double time(int i) const { return i * dt; }
    double t_plus() const { return steps * dt; }
    /// Whether slice i lies inside the exercise window [0, T].
    bool exercisable(int i) const { return time(i) <= horizon + 1e-12 * dt; }
};

}  // namespace parisian
