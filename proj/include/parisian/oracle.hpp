#pragma once

// Reference engines for tests. They solve the same CTMC problems as the
// pricers by unrelated means: value iteration on uniformized chains, global
// matrix exponentials, and enumeration of embedded jump chains.

#include "parisian/lcp.hpp"
#include "parisian/types.hpp"

#include <vector>

namespace parisian {

/// Discrete-time chain observed at the epochs of a Poisson clock of rate Λ.
struct UniformizedChain {
    double rate = 0.0;  ///< Λ
    Matrix P;           ///< I + G/Λ

    /// E[e^{−rH}] for an Exp(Λ) holding time H.
    double discount(double r) const { return rate > 0.0 ? rate / (rate + r) : 0.0; }
};

/// Λ = max|G(x,x)| (or `rate` if larger). Throws if P is not stochastic.
UniformizedChain uniformize(const Matrix& G, double rate = 0.0);

/// Poisson-weighted Σ_k e^{−Λt}(Λt)^k/k! P^k b, summed until the tail is
/// below `tail`. Equals e^{tG}b.
Vector uniformized_action(const UniformizedChain& c, const Vector& b, double t, double tail = 1e-15);

/// Fixed point of v = max(f, Λ/(Λ+r)·P v), iterated until the sup-norm error
/// bound falls below tol.
Vector value_iterate_american(const UniformizedChain& chain, const Vector& f, double r, double tol = 1e-10,
                              long max_iter = 50'000'000);

enum class LatticeFlavor { DownIn, DownOut };

/// Inputs of the joint-lattice oracle: a dense spatial generator, the
/// number of states below L (they come first), the payoff and the clocks.
struct LatticeProblem {
    Matrix G;
    int below = 0;
    Vector f;
    double r = 0.0;
    double dt = 0.0;
    int steps = 0;    ///< slices 0..steps−1; slice `steps` is T⁺
    double D = 0.0;
    double dd = 0.0;  ///< duration step, down-out only
    /// Down-in: discount the vanilla recursion by e^{−rδ_t} per tick.
    bool discount_vanilla = false;
    double tol = 1e-12;
};

/// Down-out: backward induction over (slice, duration level, state) with
/// uniformized value iteration inside each slice. Returns the d = 0 values at
/// slice 0.
Vector dp_downout_lattice(const LatticeProblem& p);

/// Down-in: vanilla values c_f by value iteration on each slice, then the
/// Parisian activation value on the joint (slice, state) chain from global
/// matrix exponentials of its below-L block. Returns C̃_fi at slice 0.
Vector dp_downin_lattice(const LatticeProblem& p);

/// Vanilla slices c_f(s) for s = 0..steps (last is zero) by value iteration.
std::vector<Vector> dp_vanilla_slices(const LatticeProblem& p);

/// Dispatches on the flavour.
Vector dp_parisian_lattice(const LatticeProblem& p, LatticeFlavor flavor);

/// Distribution of the first state entered in `target` for a chain with
/// generator Q started at `start`, obtained by pushing probability mass
/// through the embedded jump chain step by step until less than `cutoff`
/// remains in flight. Mass absorbed outside the target is dropped.
Vector first_entrance_enumeration(const Matrix& Q, int start, const std::vector<char>& target,
                                  double cutoff = 1e-12);

/// Solves LCP(A, q) by trying every complementary basis. Returns the first
/// basis whose solution is feasible to `tol`; exponential in n, so n ≤ 12.
LcpSolution brute_force_lcp(const LcpProblem& p, double tol = 1e-12);

/// Dense generator of the (ζ, Y) chain on slices 0..steps−1; the tick out of
/// the last slice leaves the state space (T⁺ is a cemetery). Index s·n + y.
Matrix joint_time_generator(const Matrix& G, double dt, int steps);

}  // namespace parisian
