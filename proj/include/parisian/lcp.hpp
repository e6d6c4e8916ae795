#pragma once

#include "parisian/tridiag.hpp"
#include "parisian/types.hpp"

#include <Eigen/SparseCore>

#include <string>

namespace parisian {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// LCP(A, q): find z ≥ 0 with w = Az + q ≥ 0 and zᵀw = 0.
struct LcpProblem {
    Matrix A;
    Vector q;

    Eigen::Index dimension() const { return q.size(); }
    void validate() const;
};

enum class LcpStatus { Solved, RayTermination, MaxIterations };

enum class LcpMethod { Lemke, Psor, PolicyIteration };

std::string to_string(LcpStatus s);
std::string to_string(LcpMethod m);
LcpMethod parse_lcp_method(const std::string& name);

struct LcpSolution {
    Vector z;
    Vector w;
    double residual = 0.0;  ///< max_i |min(z_i, w_i)|
    int iterations = 0;     ///< pivots (Lemke), sweeps (PSOR) or policy updates
    LcpStatus status = LcpStatus::MaxIterations;

    bool solved() const { return status == LcpStatus::Solved; }
};

/// Complementarity residual max_i |min(z_i, w_i)|.
double complementarity_residual(const Vector& z, const Vector& w);

/// Lemke's complementary pivoting with covering vector e = 1 and a
/// lexicographic ratio test. `max_pivots` = 0 picks 50·(n+1).
/// Set PARISIAN_LCP_TRACE=1 to log the pivot sequence on stderr.
LcpSolution lemke_solve(const LcpProblem& p, int max_pivots = 0);

struct PsorOptions {
    double relaxation = 1.2;
    double tol = 1e-10;
    int max_iter = 200000;
};

/// Projected SOR. Stops once a sweep changes no entry by more than tol and the
/// complementarity residual is below tol·(1 + ‖q‖∞).
LcpSolution psor_solve(const LcpProblem& p, const PsorOptions& opts = {}, const Vector* start = nullptr);
LcpSolution psor_solve(const SparseMatrix& a, const Vector& q, const PsorOptions& opts = {},
                       const Vector* start = nullptr);

/// Howard's policy iteration on min(Az + q, z) = 0. Finite termination for
/// nonsingular M-matrices; each step solves the active-row subsystem.
LcpSolution policy_iteration_solve(const LcpProblem& p, int max_iter = 500, const Vector* start = nullptr);
LcpSolution policy_iteration_solve(const SparseMatrix& a, const Vector& q, int max_iter = 500,
                                   const Vector* start = nullptr);
LcpSolution policy_iteration_solve(const TriDiag& a, const Vector& q, int max_iter = 500,
                                   const Vector* start = nullptr);

/// Dispatches a dense problem to the named method with default settings.
LcpSolution solve_lcp(const LcpProblem& p, LcpMethod method);

/// Throws std::runtime_error unless the solution is Solved.
void require_solved(const LcpSolution& s, const std::string& context);

}  // namespace parisian
