#pragma once

#include "parisian/contract.hpp"
#include "parisian/generator.hpp"
#include "parisian/grid.hpp"
#include "parisian/lcp.hpp"
#include "parisian/types.hpp"

#include <functional>
#include <vector>

namespace parisian {

struct DownInOptions {
    /// LCP method for generators with a jump block; birth–death chains use
    /// policy iteration on the tridiagonal system.
    LcpMethod dense_lcp = LcpMethod::Lemke;
    /// Backward-Euler substeps for exp(DḠ); 0 picks an automatic count.
    int expm_steps = 0;
    /// Restrict the barrier kernels to the columns actually reachable in one
    /// move. For birth–death chains this is the single-column reduction.
    bool fast_path = true;
    /// Discount the vanilla slices by e^{−rδ_t} per ζ tick. Off by default:
    /// the vanilla recursion then carries no discounting and only the time to
    /// activation is discounted, which is the formulation the benchmark tables
    /// were produced with.
    bool discount_vanilla = false;
};

/// Substep count used when DownInOptions::expm_steps is 0.
int auto_expm_steps(bool tridiagonal, double t, double norm_inf);

// ---------------------------------------------------------------- perpetual

/// Vanilla perpetual American value: min((rI − G)c, c − f) = 0.
Vector vanilla_american_perpetual(const GeneratorMatrix& g, const Vector& f, double r,
                                  LcpMethod dense_method = LcpMethod::Lemke, LcpSolution* info = nullptr);

/// Parisian-transform kernels of the perpetual down-in problem, all n × n.
struct PerpetualKernels {
    Matrix V_p;
    Matrix U1_plus;
    Matrix U2_plus;
    Matrix U_minus;
    Matrix H_p;
};

/// Dense construction of H_p(r) = E[e^{−rτ⁻_{L,D}} 1{Y_τ = y}] for small chains.
PerpetualKernels parisian_transform(const GeneratorMatrix& g, const SpatialGrid& grid, double D, double r,
                                    int expm_steps = 0);

struct PerpetualDownInResult {
    Vector c_p;    ///< vanilla American values
    Vector price;  ///< C_pi over the grid
    LcpSolution lcp;
};

/// C_pi = H_p(r) c_p, computed from block solves without forming H_p.
PerpetualDownInResult price_perpetual_downin(const GeneratorMatrix& g, const SpatialGrid& grid, const Vector& f,
                                             double D, double r, const DownInOptions& opts = {});

// ----------------------------------------------------------------- finite

/// One backward step of the vanilla value under the (ζ, Y) chain:
/// min((I − δ_t G)c − c_next, c − f) = 0.
Vector bermudan_slice(const GeneratorMatrix& g, const Vector& c_next, const Vector& f, double dt,
                      LcpMethod dense_method = LcpMethod::Lemke, LcpSolution* info = nullptr,
                      const Vector* start = nullptr);

/// Barrier kernels at one slice as full n × n matrices.
struct SliceKernels {
    Matrix H1_plus;
    Matrix H2_plus;
    Matrix H_plus;
    Matrix H_minus;
};

SliceKernels kernel_h(const GeneratorMatrix& g, const SpatialGrid& grid, double D, double dt, int expm_steps = 0);

/// v(D, t) from discounted vanilla slices cbar[k] = e^{−r(t+kδ_t)} c_f(t+kδ_t),
/// k = 0, 1, …; zero above L.
Vector kernel_v(const GeneratorMatrix& g, const SpatialGrid& grid, const std::vector<Vector>& cbar, double D,
                double dt, int expm_steps = 0);

/// u⁺(D, t) from future discounted prices future[k−1] = C̃_fi(t + kδ_t), k ≥ 1.
Vector kernel_u_plus(const GeneratorMatrix& g, const SpatialGrid& grid, const std::vector<Vector>& future,
                     double D, double dt, int expm_steps = 0);

/// u⁻(t) from u⁻(t+δ_t), H⁻(t+δ_t) and C̃_fi(t+δ_t).
Vector kernel_u_minus(const GeneratorMatrix& g, const SpatialGrid& grid, const Matrix& H_minus_next,
                      const Vector& u_minus_next, const Vector& C_next, double dt);

/// Generator at time t; called once when the model is time-homogeneous.
using GeneratorFn = std::function<GeneratorMatrix(double t)>;

struct FiniteDownInResult {
    TimeGrid time;
    std::vector<Vector> discounted;  ///< C̃_fi(sδ_t) for s = 0..steps (last is zero)
    std::vector<Vector> vanilla;     ///< c_f(sδ_t)
    bool fast_path = false;
    long lcp_iterations = 0;

    /// Undiscounted price surface at slice s.
    Vector price(int s, double r) const;
};

FiniteDownInResult price_finite_downin(const GeneratorFn& generator, bool homogeneous, const SpatialGrid& grid,
                                       const TimeGrid& time, const Vector& f, double D, double r,
                                       const DownInOptions& opts = {});

FiniteDownInResult price_finite_downin(const GeneratorMatrix& g, const SpatialGrid& grid, const TimeGrid& time,
                                       const Vector& f, double D, double r, const DownInOptions& opts = {});

}  // namespace parisian
