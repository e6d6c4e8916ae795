#pragma once

// Randomised cross-checks of the pricing pipeline against the reference
// engines in oracle.hpp and simulation.hpp. Shared by the test suite, the
// acceptance binary and `parisian verify`.

#include "parisian/lcp.hpp"
#include "parisian/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace parisian {

struct SuiteReport {
    std::string name;
    int cases = 0;
    int failures = 0;
    double max_error = 0.0;  ///< largest deviation seen, in the suite's own metric
    double seconds = 0.0;
    std::vector<std::string> notes;  ///< one line per failed case

    bool passed() const { return cases > 0 && failures == 0; }
};

void print_report(const SuiteReport& r, std::ostream& out);

// ------------------------------------------------------- random instances

/// Random P-matrix: alternately a nonsymmetric positive definite matrix and a
/// strictly row-diagonally-dominant matrix with positive diagonal.
Matrix random_p_matrix(int n, std::mt19937_64& rng);

/// Random conservative generator: nearest-neighbour rates in [0.5, 3] and,
/// when `jumps` is set, rates in [0, 0.4] to every other state.
Matrix random_generator(int n, bool jumps, std::mt19937_64& rng);

// ------------------------------------------------------------- suites

/// Lemke against enumeration of complementary bases on P-matrix LCPs with
/// n ≤ max_n: identical active set and values within tol.
SuiteReport verify_lemke(std::uint64_t seed, int cases = 200, int max_n = 8, double tol = 1e-9);

/// Vanilla perpetual American value against value iteration on the
/// uniformized chain, n ≤ max_n.
SuiteReport verify_vanilla(std::uint64_t seed, int cases = 50, int max_n = 40, double tol = 1e-6);

struct KernelCheckOptions {
    int states = 15;
    int below = 7;
    bool jumps = false;  ///< birth–death chain unless set
    double window = 0.4;
    double r = 0.05;
    long paths = 1'000'000;
    double horizon = 400.0;  ///< simulated time cap; bias below e^{−r·horizon}
    double sigmas = 3.0;
    /// Start states to check; empty means the bottom state, both states next
    /// to the barrier and the top state. Every checked entry is a separate
    /// 3σ comparison, so checking all rows would make chance failures likely.
    std::vector<int> rows;
};

/// Rows of the perpetual Parisian kernel H_p against simulated paths. An entry
/// passes when it is within `sigmas` standard errors, where the standard
/// error is floored at 1/paths so entries too small to be hit compare as zero.
SuiteReport verify_parisian_kernel(std::uint64_t seed, const KernelCheckOptions& opts = {});

struct LatticeCheckOptions {
    int cases = 20;
    int max_states = 12;
    int max_levels = 4;  ///< duration levels including D⁺
    int max_slices = 6;
    double tol = 1e-5;
    /// Substeps of the down-in kernel exponentials.
    int expm_steps = 1 << 16;
};

/// Finite-maturity down-in and down-out prices against backward induction on
/// the joint lattice, on random chains with and without jumps.
SuiteReport verify_lattice(std::uint64_t seed, const LatticeCheckOptions& opts = {});

/// Runs a named suite: "lcp" (Lemke and vanilla), "kernels" or "dp".
std::vector<SuiteReport> run_verify_suite(const std::string& suite, std::uint64_t seed, long paths = 1'000'000);

}  // namespace parisian
