#pragma once

#include <functional>

namespace parisian {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
};

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_subdivisions = 2000;
};

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of f over [a, b].
///
/// Either end may be infinite; semi-infinite and infinite ranges are mapped
/// onto finite ones with t/(1-t) style substitutions. Throws ConvergenceError
/// when the subdivision budget runs out before the tolerance is met.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

}  // namespace parisian
