#include "parisian/downout.hpp"

#include "subchain.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace parisian {

using detail::Resolvent;
using detail::SubChain;

// ------------------------------------------------------------ state space

AugmentedStateSpace::AugmentedStateSpace(int spatial_size, int below_count, double window, double dd)
    : n_(spatial_size), nb_(below_count), window_(window), dd_(dd) {
    if (!(dd > 0.0)) throw std::invalid_argument("augmented space: duration step must be positive");
    if (!(window > 0.0)) throw std::invalid_argument("augmented space: window must be positive");
    if (below_count < 0 || below_count > spatial_size)
        throw std::invalid_argument("augmented space: bad below-barrier count");
    // D⁺ = min{iδ_d : iδ_d > D}; the slack keeps D = kδ_d on the grid despite
    // rounding in D/δ_d.
    m_ = static_cast<int>(std::floor(window / dd + 1e-9)) + 1;
}

int AugmentedStateSpace::index(int level, int x) const {
    if (level < 0 || level > m_) throw std::out_of_range("augmented space: level out of range");
    if (level == 0) {
        if (x < 0 || x >= n_) throw std::out_of_range("augmented space: state out of range");
        return x;
    }
    if (x < 0 || x >= nb_) throw std::out_of_range("augmented space: only states below L carry a positive duration");
    return level_offset(level) + x;
}

Vector AugmentedStateSpace::extend_payoff(const Vector& f) const {
    if (f.size() != n_) throw std::invalid_argument("augmented space: payoff has wrong length");
    Vector out = Vector::Zero(size());
    out.head(n_) = f;
    for (int level = 1; level < m_; ++level) out.segment(level_offset(level), nb_) = f.head(nb_);
    return out;
}

// -------------------------------------------------------------- generator

AugmentedGenerator::AugmentedGenerator(GeneratorMatrix spatial, AugmentedStateSpace space)
    : g_(std::move(spatial)), space_(space) {
    if (g_.size() != space_.spatial_size()) throw std::invalid_argument("augmented generator: size mismatch");
}

namespace {

// Calls emit(col, rate) for every nonzero off-diagonal of spatial row x.
template <class Emit>
void for_each_offdiag(const GeneratorMatrix& g, int x, Emit&& emit) {
    if (g.is_birth_death()) {
        if (x > 0) emit(x - 1, g.rate(x, x - 1));
        if (x + 1 < g.size()) emit(x + 1, g.rate(x, x + 1));
        return;
    }
    for (int y = 0; y < g.size(); ++y)
        if (y != x) {
            const double v = g.rate(x, y);
            if (v != 0.0) emit(y, v);
        }
}

}  // namespace

Vector AugmentedGenerator::apply(const Vector& v) const {
    const auto& sp = space_;
    if (v.size() != sp.size()) throw std::invalid_argument("augmented generator: vector has wrong length");
    const int n = sp.spatial_size(), nb = sp.below_count(), m = sp.top();
    const double adv = 1.0 / sp.dd();
    Vector out = Vector::Zero(sp.size());

    // d = 0 block: spatial dynamics plus the duration advance below L.
    out.head(n) = g_.apply(v.head(n));
    if (nb > 0 && m >= 1) {
        const Vector next = v.segment(sp.level_offset(1), nb);
        out.head(nb) += adv * (next - v.head(nb));
    }
    // Levels 1..m−1: moves below L keep the level, moves above reset to d = 0.
    for (int level = 1; level < m; ++level) {
        const int off = sp.level_offset(level);
        Vector joint(n);
        joint.head(nb) = v.segment(off, nb);
        joint.tail(n - nb) = v.segment(nb, n - nb);
        const Vector gv = g_.apply(joint);
        const Vector next = v.segment(sp.level_offset(level + 1), nb);
        out.segment(off, nb) = gv.head(nb) + adv * (next - v.segment(off, nb));
    }
    return out;
}

SparseMatrix AugmentedGenerator::shifted(double diag, double scale) const {
    const auto& sp = space_;
    const int n = sp.spatial_size(), nb = sp.below_count(), m = sp.top();
    const double adv = 1.0 / sp.dd();
    std::vector<Eigen::Triplet<double>> trip;
    const std::size_t row_nnz = g_.is_birth_death() ? 4 : static_cast<std::size_t>(n) + 1;
    trip.reserve(static_cast<std::size_t>(sp.size()) * row_nnz);

    auto spatial_row = [&](int row, int x, int level) {
        double d = g_.diagonal(x);
        if (x < nb && level < m) {
            d -= adv;
            trip.emplace_back(row, sp.index(level + 1, x), -scale * adv);
        }
        trip.emplace_back(row, row, diag - scale * d);
        for_each_offdiag(g_, x, [&](int y, double rate) {
            const int col = (y < nb) ? sp.index(level, y) : y;
            trip.emplace_back(row, col, -scale * rate);
        });
    };
    for (int x = 0; x < n; ++x) spatial_row(x, x, 0);
    for (int level = 1; level < m; ++level)
        for (int x = 0; x < nb; ++x) spatial_row(sp.index(level, x), x, level);
    // Absorbing rows at D⁺.
    for (int x = 0; x < nb; ++x) {
        const int row = sp.index(m, x);
        trip.emplace_back(row, row, diag);
    }
    SparseMatrix a(sp.size(), sp.size());
    a.setFromTriplets(trip.begin(), trip.end());
    a.prune(0.0);
    a.makeCompressed();
    return a;
}

SparseMatrix AugmentedGenerator::to_sparse() const { return shifted(0.0, -1.0); }

Matrix AugmentedGenerator::to_dense() const { return Matrix(to_sparse()); }

AugmentedGenerator build_augmented_generator(const GeneratorMatrix& g, const SpatialGrid& grid, double D, double dd) {
    if (g.size() != grid.size()) throw std::invalid_argument("augmented generator: grid and generator differ in size");
    return AugmentedGenerator(g, AugmentedStateSpace(grid.size(), grid.below_count(), D, dd));
}

std::string to_string(DownOutSolver s) { return s == DownOutSolver::Reduced ? "reduced" : "full"; }

DownOutSolver parse_downout_solver(const std::string& name) {
    if (name == "reduced") return DownOutSolver::Reduced;
    if (name == "full") return DownOutSolver::Full;
    throw std::invalid_argument("unknown down-out solver '" + name + "'");
}

// ----------------------------------------------------------------- solvers

namespace {

// Everything needed to solve min(c0·C − s·G̃C − b, C − f̃) = 0 for varying b.
//
// With continuation assumed on levels 1..m−1, level i satisfies
//   C_i = α_i + Γ_i C_0[A],
// where A lists the states above L reachable from below in one move. Γ only
// depends on the generator, so it is computed once per generator.
struct Reduction {
    int n = 0;
    int nb = 0;
    int m = 0;
    double c0 = 0.0;
    double s = 0.0;
    double adv = 0.0;
    std::vector<int> cols;         // A, absolute spatial indices
    std::optional<Resolvent> res;  // ((c0/s + 1/δ_d)I − G_bb)⁻¹
    std::vector<Matrix> gamma;     // gamma[i] for levels i = 1..m (gamma[m] = 0)
    bool sparse = false;
    SparseMatrix m_sparse;  // reduced matrix on d = 0
    Matrix m_dense;

    Reduction(const GeneratorMatrix& g, const AugmentedStateSpace& sp, double c0_, double s_)
        : n(sp.spatial_size()), nb(sp.below_count()), m(sp.top()), c0(c0_), s(s_), adv(1.0 / sp.dd()) {
        const SubChain below(g, 0, nb);
        res.emplace(below, c0 / s + adv);
        cols = detail::coupled_columns(below, nb, n);
        const Matrix g_ba = detail::select_columns(below.coupling(nb, n), cols, nb);
        const auto na = static_cast<Eigen::Index>(cols.size());
        gamma.assign(static_cast<std::size_t>(m) + 1, Matrix());
        gamma[static_cast<std::size_t>(m)] = Matrix::Zero(nb, na);
        for (int i = m - 1; i >= 1; --i) {
            const Matrix rhs = adv * gamma[static_cast<std::size_t>(i) + 1] + g_ba;
            gamma[static_cast<std::size_t>(i)] = res->solve(rhs);
        }
        const Matrix& g1 = gamma[1];

        // M = c0·I − s·G on d = 0, with the level-1 coupling of the rows below
        // L folded into the columns A.
        sparse = g.is_birth_death();
        if (sparse) {
            std::vector<Eigen::Triplet<double>> trip;
            for (int x = 0; x < n; ++x) {
                double d = g.diagonal(x);
                if (x < nb) d -= adv;
                trip.emplace_back(x, x, c0 - s * d);
                for_each_offdiag(g, x, [&](int y, double rate) { trip.emplace_back(x, y, -s * rate); });
                if (x < nb)
                    for (Eigen::Index j = 0; j < na; ++j)
                        trip.emplace_back(x, cols[static_cast<std::size_t>(j)], -s * adv * g1(x, j));
            }
            m_sparse.resize(n, n);
            m_sparse.setFromTriplets(trip.begin(), trip.end());
            m_sparse.prune(0.0);
            m_sparse.makeCompressed();
        } else {
            m_dense = -s * g.to_dense();
            m_dense.diagonal().array() += c0;
            for (int x = 0; x < nb; ++x) m_dense(x, x) += s * adv;
            for (Eigen::Index j = 0; j < na; ++j)
                m_dense.col(cols[static_cast<std::size_t>(j)]).head(nb) -= s * adv * g1.col(j);
        }
    }
};

LcpSolution solve_sparse_lcp(const SparseMatrix& a, const Vector& q, LcpMethod method, const PsorOptions& psor,
                             const Vector* start) {
    switch (method) {
        case LcpMethod::PolicyIteration: return policy_iteration_solve(a, q, 500, start);
        case LcpMethod::Psor: return psor_solve(a, q, psor, start);
        case LcpMethod::Lemke: return lemke_solve(LcpProblem{Matrix(a), q});
    }
    throw std::invalid_argument("unknown LCP method");
}

LcpSolution solve_dense_lcp(const Matrix& a, const Vector& q, LcpMethod method, const PsorOptions& psor,
                            const Vector* start) {
    LcpProblem p{a, q};
    switch (method) {
        case LcpMethod::PolicyIteration: return policy_iteration_solve(p, 500, start);
        case LcpMethod::Psor: return psor_solve(p, psor, start);
        case LcpMethod::Lemke: return lemke_solve(p);
    }
    throw std::invalid_argument("unknown LCP method");
}

class Solver {
public:
    Solver(const AugmentedGenerator& gen, double c0, double s, const DownOutOptions& opts, DownOutStats& stats)
        : gen_(gen), sp_(gen.space()), c0_(c0), s_(s), opts_(opts), stats_(stats) {
        if (opts.solver == DownOutSolver::Reduced && sp_.below_count() > 0) red_.emplace(gen.spatial(), sp_, c0, s);
    }

    // Solves min(c0·C − s·G̃C − b, C − f̃) = 0; `guess` is a previous solution.
    Vector solve(const Vector& b, const Vector& ftilde, const Vector* guess) {
        if (red_) {
            std::optional<Vector> c = solve_reduced(b, ftilde, guess);
            if (c) {
                ++stats_.reduced_solves;
                return *c;
            }
        }
        ++stats_.full_solves;
        return solve_full(b, ftilde, guess);
    }

private:
    Vector level(const Vector& v, int i) const { return v.segment(sp_.level_offset(i), sp_.below_count()); }

    std::optional<Vector> solve_reduced(const Vector& b, const Vector& ftilde, const Vector* guess) {
        const Reduction& r = *red_;
        const int n = r.n, nb = r.nb, m = r.m;
        const std::size_t um = static_cast<std::size_t>(m);
        // Absorbing level: its rows decouple as min(c0·C − b, C) = 0.
        std::vector<Vector> alpha(um + 1);
        alpha[um] = (level(b, m) / c0_).cwiseMax(0.0);
        for (int i = m - 1; i >= 1; --i) {
            const std::size_t ui = static_cast<std::size_t>(i);
            alpha[ui] = r.res->solve(Vector(level(b, i) / s_ + r.adv * alpha[ui + 1]));
        }
        Vector rhs = b.head(n);
        rhs.head(nb) += s_ * r.adv * alpha[1];

        const Vector f0 = ftilde.head(n);
        Vector start;
        if (guess) start = (guess->head(n) - f0).cwiseMax(0.0);
        LcpSolution sol;
        if (r.sparse) {
            const Vector q = r.m_sparse * f0 - rhs;
            sol = solve_sparse_lcp(r.m_sparse, q, opts_.dense_lcp, opts_.psor, guess ? &start : nullptr);
        } else {
            const Vector q = r.m_dense * f0 - rhs;
            sol = solve_dense_lcp(r.m_dense, q, opts_.dense_lcp, opts_.psor, guess ? &start : nullptr);
        }
        require_solved(sol, "down-out reduced slice");
        stats_.lcp_iterations += sol.iterations;

        Vector c(sp_.size());
        c.head(n) = sol.z + f0;
        const Vector c_a = detail::select_entries(c.head(n), r.cols);
        const double tol = opts_.verify_tol * (1.0 + ftilde.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff());
        for (int i = 1; i <= m; ++i) {
            const std::size_t ui = static_cast<std::size_t>(i);
            const Vector ci = alpha[ui] + r.gamma[ui] * c_a;
            const Vector fi = level(ftilde, i);
            if ((ci - fi).minCoeff() < -tol) return std::nullopt;
            c.segment(sp_.level_offset(i), nb) = ci;
        }
        record_residual(c, b, ftilde);
        return c;
    }

    Vector solve_full(const Vector& b, const Vector& ftilde, const Vector* guess) {
        if (!full_) full_ = gen_.shifted(c0_, s_);
        const Vector q = *full_ * ftilde - b;
        Vector start;
        if (guess) start = (*guess - ftilde).cwiseMax(0.0);
        const LcpSolution sol = solve_sparse_lcp(*full_, q, opts_.full_lcp, opts_.psor, guess ? &start : nullptr);
        require_solved(sol, "down-out slice");
        stats_.lcp_iterations += sol.iterations;
        Vector c = sol.z + ftilde;
        record_residual(c, b, ftilde);
        return c;
    }

    void record_residual(const Vector& c, const Vector& b, const Vector& ftilde) {
        const Vector w = c0_ * c - s_ * gen_.apply(c) - b;
        stats_.max_residual = std::max(stats_.max_residual, complementarity_residual(c - ftilde, w));
    }

    const AugmentedGenerator& gen_;
    const AugmentedStateSpace& sp_;
    double c0_;
    double s_;
    const DownOutOptions& opts_;
    DownOutStats& stats_;
    std::optional<Reduction> red_;
    std::optional<SparseMatrix> full_;
};

}  // namespace

PerpetualDownOutResult price_perpetual_downout(const GeneratorMatrix& g, const SpatialGrid& grid, const Vector& f,
                                               double D, double dd, double r, const DownOutOptions& opts) {
    if (!(r > 0.0)) throw std::invalid_argument("perpetual down-out: r must be positive");
    const AugmentedGenerator gen = build_augmented_generator(g, grid, D, dd);
    PerpetualDownOutResult out;
    out.space = gen.space();
    const Vector ftilde = out.space.extend_payoff(f);
    Solver solver(gen, r, 1.0, opts, out.stats);
    out.values = solver.solve(Vector::Zero(out.space.size()), ftilde, nullptr);
    return out;
}

FiniteDownOutResult price_finite_downout(const GeneratorFn& generator, bool homogeneous, const SpatialGrid& grid,
                                         const TimeGrid& time, const Vector& f, double D, double dd, double r,
                                         const DownOutOptions& opts) {
    if (time.steps < 1) throw std::invalid_argument("finite down-out: empty time grid");
    FiniteDownOutResult out;
    out.time = time;
    const double c0 = 1.0 + r * time.dt;

    std::optional<AugmentedGenerator> gen;
    std::optional<Solver> solver;
    auto prepare = [&](double t) {
        solver.reset();
        gen.emplace(build_augmented_generator(generator(t), grid, D, dd));
        solver.emplace(*gen, c0, time.dt, opts, out.stats);
    };
    prepare(time.time(time.steps - 1));
    out.space = gen->space();
    const Vector ftilde = out.space.extend_payoff(f);
    const Vector zero = Vector::Zero(out.space.size());

    std::vector<Vector> surface;
    if (opts.keep_surface) surface.assign(static_cast<std::size_t>(time.steps) + 1, zero);
    Vector next = zero;
    for (int s = time.steps - 1; s >= 0; --s) {
        if (!homogeneous && s != time.steps - 1) prepare(time.time(s));
        const Vector& payoff = time.exercisable(s) ? ftilde : zero;
        Vector cur = solver->solve(next, payoff, s == time.steps - 1 ? nullptr : &next);
        if (opts.keep_surface) surface[static_cast<std::size_t>(s)] = cur;
        next = std::move(cur);
    }
    if (opts.keep_surface)
        out.surface = std::move(surface);
    else
        out.surface.push_back(std::move(next));
    return out;
}

FiniteDownOutResult price_finite_downout(const GeneratorMatrix& g, const SpatialGrid& grid, const TimeGrid& time,
                                         const Vector& f, double D, double dd, double r, const DownOutOptions& opts) {
    return price_finite_downout([&g](double) { return g; }, true, grid, time, f, D, dd, r, opts);
}

}  // namespace parisian
