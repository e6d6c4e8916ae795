#pragma once

// Small helpers shared by the unit tests. Everything here is deliberately
// independent of the library's own numerics so it can serve as an oracle.

#include "parisian/contract.hpp"
#include "parisian/generator.hpp"
#include "parisian/grid.hpp"
#include "parisian/models.hpp"
#include "parisian/types.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace testutil {

// Composite Simpson rule with `panels` (even) subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

// States 0..n−1 on the integers with the barrier at node `below`.
inline parisian::SpatialGrid integer_grid(int n, int below) {
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = i;
    return parisian::SpatialGrid(s, static_cast<double>(below));
}

// Birth–death generator with the given up and down rates in every interior
// row; both end rows conservative (reflecting) unless `absorbing_ends`.
inline parisian::Matrix birth_death(int n, double up, double down, bool absorbing_ends = false) {
    parisian::Matrix g = parisian::Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (absorbing_ends && (i == 0 || i == n - 1)) continue;
        if (i + 1 < n) g(i, i + 1) = up;
        if (i > 0) g(i, i - 1) = down;
        g(i, i) = -g.row(i).sum();
    }
    return g;
}

// Table parameters of the Black–Scholes perpetual cases.
struct BsSetup {
    parisian::ModelSpec model = parisian::bs_model(0.1, 0.05, 0.3);
    parisian::SpatialGrid grid;
    parisian::GeneratorMatrix g;
    parisian::Vector f;

    explicit BsSetup(int n, double lo = 18.0, double hi = 360.0, double barrier = 90.0, double strike = 95.0) {
        grid = parisian::build_grid(lo, hi, barrier, strike, n);
        g = parisian::build_generator(model, grid, 0.0);
        f.resize(grid.size());
        for (int i = 0; i < grid.size(); ++i) f[i] = std::max(grid[i] - strike, 0.0);
    }
};

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace testutil
