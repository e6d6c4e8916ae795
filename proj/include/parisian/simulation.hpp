#pragma once

#include "parisian/generator.hpp"
#include "parisian/types.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace parisian {

struct PathEvent {
    double time = 0.0;
    int state = 0;
};

/// One trajectory of a time-homogeneous chain: the start state followed by
/// the jump epochs. The path is cut at `horizon` or at absorption.
struct ChainPath {
    int start = 0;
    double horizon = 0.0;
    std::vector<PathEvent> events;

    int state_at(double t) const;

    /// First time the path sits at an index ≥ l_plus (τ_L⁺) or < l_plus (τ_L⁻).
    std::optional<PathEvent> first_up_crossing(int l_plus) const;
    std::optional<PathEvent> first_down_crossing(int l_plus) const;

    /// τ⁻_{L,D}: first time the current stay below L has lasted D. Returns the
    /// time and the state occupied then. Uses the exact excursion clock
    /// t − g⁻_{L,t}.
    std::optional<PathEvent> parisian_time(int l_plus, double D) const;
};

/// Random engine for path `index` of a run seeded with `seed`. Paths are
/// reproducible individually, whatever order they are generated in.
std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t index);

/// Exact event simulation: exponential holding times with rate −G(x,x), next
/// state drawn with probability G(x,y)/(−G(x,x)).
ChainPath simulate_path(const GeneratorMatrix& g, int x0, double horizon, std::mt19937_64& rng);

/// Empirical E[e^{−rτ} 1{Y_τ = y}] for y over the grid, with standard errors.
struct KernelEstimate {
    long paths = 0;
    Vector mean;
    Vector std_error;
    /// Fraction of paths on which the event happened before the horizon.
    double hit_fraction = 0.0;
    /// Set when x0 is absorbing and every path is identical.
    bool degenerate = false;
};

/// Parisian kernel row h_p(r, x0; ·) where τ = τ⁻_{L,D}. Paths are cut at
/// `horizon`, which biases the estimate by at most e^{−r·horizon}.
KernelEstimate simulate_paths(const GeneratorMatrix& g, int l_plus, int x0, double D, double r, double horizon,
                              std::uint64_t seed, long n_paths);

/// Up-crossing kernel row E[e^{−rτ} 1{τ < D, Y_τ = y}] with τ = τ_L⁺.
KernelEstimate simulate_up_crossing(const GeneratorMatrix& g, int l_plus, int x0, double D, double r,
                                    std::uint64_t seed, long n_paths);

}  // namespace parisian
