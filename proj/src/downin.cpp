#include "parisian/downin.hpp"

#include "parisian/expm.hpp"
#include "subchain.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace parisian {

using detail::Resolvent;
using detail::SubChain;

int auto_expm_steps(bool tridiagonal, double t, double norm_inf) {
    // Tridiagonal substeps cost O(n) each; dense operators are formed by
    // repeated squaring, so a very fine step is almost free there.
    return std::max(default_expm_steps(t, norm_inf), tridiagonal ? 4096 : 1 << 16);
}

namespace {

int resolve_steps(int requested, const SubChain& block, double t) {
    if (requested > 0) return requested;
    const double norm = block.tridiagonal() ? block.tri().norm_inf()
                                            : (block.size() ? block.dense().cwiseAbs().rowwise().sum().maxCoeff() : 0.0);
    return auto_expm_steps(block.tridiagonal(), t, norm);
}

double poisson_pmf(int i, double a) {
    if (a == 0.0) return i == 0 ? 1.0 : 0.0;
    return std::exp(-a + i * std::log(a) - std::lgamma(i + 1.0));
}

TriDiag shifted_tridiag(const TriDiag& g, double diag_scale, double g_scale) {
    // diag_scale·I − g_scale·G
    TriDiag a = g;
    for (auto& v : a.sub) v *= -g_scale;
    for (auto& v : a.super) v *= -g_scale;
    for (auto& v : a.main) v = diag_scale - g_scale * v;
    return a;
}

Matrix shifted_dense(const GeneratorMatrix& g, double diag_scale, double g_scale) {
    Matrix a = -g_scale * g.to_dense();
    a.diagonal().array() += diag_scale;
    return a;
}

// Solves min(A(z + f) − e, z) = 0 for the value c = z + f.
Vector solve_value_lcp(const GeneratorMatrix& g, double diag_scale, double g_scale, const Vector& f,
                       const Vector& extra, LcpMethod dense_method, LcpSolution* info, const Vector* start) {
    std::optional<Vector> z0;
    if (start) z0 = (*start - f).cwiseMax(0.0);
    LcpSolution sol;
    if (g.is_birth_death()) {
        const TriDiag a = shifted_tridiag(g.core(), diag_scale, g_scale);
        const Vector q = a.apply(f) - extra;
        sol = policy_iteration_solve(a, q, 500, z0 ? &*z0 : nullptr);
    } else {
        LcpProblem p{shifted_dense(g, diag_scale, g_scale), Vector()};
        p.q = p.A * f - extra;
        switch (dense_method) {
            case LcpMethod::Lemke: sol = lemke_solve(p); break;
            case LcpMethod::Psor: sol = psor_solve(p, PsorOptions{}, z0 ? &*z0 : nullptr); break;
            case LcpMethod::PolicyIteration: sol = policy_iteration_solve(p, 500, z0 ? &*z0 : nullptr); break;
        }
    }
    require_solved(sol, "vanilla American LCP");
    Vector c = f + sol.z;
    if (info) *info = std::move(sol);
    return c;
}

std::vector<int> all_indices(int begin, int end) {
    std::vector<int> v;
    for (int i = begin; i < end; ++i) v.push_back(i);
    return v;
}

Matrix rows_of(const Matrix& m, const std::vector<int>& rows, int offset) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i] - offset);
    return out;
}

Vector entries_of(const Vector& v, const std::vector<int>& idx, int offset) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[idx[i] - offset];
    return out;
}

void check_barrier(const SpatialGrid& grid) {
    if (grid.l_plus() <= 0 && grid.size() > 0) return;
    if (grid.l_plus() > grid.size()) throw std::invalid_argument("barrier outside the grid");
}

}  // namespace

// ---------------------------------------------------------------- perpetual

Vector vanilla_american_perpetual(const GeneratorMatrix& g, const Vector& f, double r, LcpMethod dense_method,
                                  LcpSolution* info) {
    if (!(r > 0.0)) throw std::invalid_argument("perpetual American: r must be positive");
    if (f.size() != g.size()) throw std::invalid_argument("perpetual American: payoff length mismatch");
    return solve_value_lcp(g, r, 1.0, f, Vector::Zero(f.size()), dense_method, info, nullptr);
}

PerpetualKernels parisian_transform(const GeneratorMatrix& g, const SpatialGrid& grid, double D, double r,
                                    int expm_steps) {
    if (grid.size() != g.size()) throw std::invalid_argument("parisian_transform: grid/generator mismatch");
    if (!(r >= 0.0) || !(D >= 0.0)) throw std::invalid_argument("parisian_transform: need r ≥ 0 and D ≥ 0");
    const int n = g.size();
    const Matrix G = g.to_dense();
    Matrix lm = Matrix::Zero(n, n), lp = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) (grid.below(i) ? lm : lp)(i, i) = 1.0;
    const Matrix I = Matrix::Identity(n, n);
    const int k = expm_steps > 0 ? expm_steps : auto_expm_steps(false, D, G.cwiseAbs().rowwise().sum().maxCoeff());
    const BackwardEulerExp expo(Matrix(lm * G), D, k);

    auto inverse = [](const Matrix& a, const char* what) {
        Eigen::FullPivLU<Matrix> lu(a);
        if (!lu.isInvertible()) throw SingularMatrixError(std::string("parisian_transform: singular ") + what);
        return Matrix(lu.inverse());
    };

    PerpetualKernels out;
    out.V_p = expo.apply(lm);
    out.U1_plus = inverse(r * lm - lm * G + lp, "U1 resolvent") * lp;
    out.U2_plus = std::exp(-r * D) * expo.apply(Matrix(lm * out.U1_plus));
    out.U_minus = inverse(r * lp - lp * G + lm, "U- resolvent") * lm;
    const Matrix Up = lm * (out.U1_plus - out.U2_plus) + lp * out.U_minus;
    out.H_p = std::exp(-r * D) * inverse(I - Up, "I - U_p") * lm * out.V_p;
    return out;
}

PerpetualDownInResult price_perpetual_downin(const GeneratorMatrix& g, const SpatialGrid& grid, const Vector& f,
                                             double D, double r, const DownInOptions& opts) {
    if (grid.size() != g.size() || f.size() != g.size())
        throw std::invalid_argument("perpetual down-in: size mismatch");
    if (!(D > 0.0)) throw std::invalid_argument("perpetual down-in: D must be positive");
    check_barrier(grid);
    PerpetualDownInResult res;
    res.c_p = vanilla_american_perpetual(g, f, r, opts.dense_lcp, &res.lcp);

    const int n = g.size(), nb = grid.l_plus();
    res.price = Vector::Zero(n);
    if (nb == 0) return res;

    const SubChain below(g, 0, nb), above(g, nb, n);
    const BackwardEulerExp expo = detail::block_exp(below, D, resolve_steps(opts.expm_steps, below, D));
    const double disc = std::exp(-r * D);
    const Vector s_b = disc * expo.apply(Vector(res.c_p.head(nb)));
    if (nb == n) {
        res.price.head(nb) = s_b;
        return res;
    }

    const std::vector<int> cols_a = opts.fast_path ? detail::coupled_columns(below, nb, n) : all_indices(nb, n);
    const std::vector<int> cols_b = opts.fast_path ? detail::coupled_columns(above, 0, nb) : all_indices(0, nb);

    const Resolvent rb(below, r), ra(above, r);
    const Matrix u1 = rb.solve(detail::select_columns(below.coupling(nb, n), cols_a, nb));
    const Matrix u_plus = u1 - disc * expo.apply(u1);                                         // nb × |A|
    const Matrix u_minus = ra.solve(detail::select_columns(above.coupling(0, nb), cols_b, 0));  // na × |B'|

    const int m = static_cast<int>(cols_b.size());
    Vector x_sel = Vector::Zero(m);
    if (m > 0 && !cols_a.empty()) {
        const Matrix sys = Matrix::Identity(m, m) - rows_of(u_plus, cols_b, 0) * rows_of(u_minus, cols_a, nb);
        Eigen::PartialPivLU<Matrix> lu(sys);
        x_sel = lu.solve(entries_of(s_b, cols_b, 0));
        if (!x_sel.allFinite()) throw SingularMatrixError("perpetual down-in: singular I - U_p");
    } else {
        x_sel = entries_of(s_b, cols_b, 0);
    }
    const Vector x_a = m > 0 ? Vector(u_minus * x_sel) : Vector(Vector::Zero(n - nb));
    const Vector x_b = cols_a.empty() ? s_b : Vector(u_plus * entries_of(x_a, cols_a, nb) + s_b);
    res.price.head(nb) = x_b;
    res.price.tail(n - nb) = x_a;
    return res;
}

// ----------------------------------------------------------------- finite

Vector bermudan_slice(const GeneratorMatrix& g, const Vector& c_next, const Vector& f, double dt,
                      LcpMethod dense_method, LcpSolution* info, const Vector* start) {
    if (!(dt > 0.0)) throw std::invalid_argument("bermudan slice: dt must be positive");
    if (c_next.size() != g.size() || f.size() != g.size()) throw std::invalid_argument("bermudan slice: size mismatch");
    return solve_value_lcp(g, 1.0, dt, f, c_next, dense_method, info, start);
}

SliceKernels kernel_h(const GeneratorMatrix& g, const SpatialGrid& grid, double D, double dt, int expm_steps) {
    if (grid.size() != g.size()) throw std::invalid_argument("kernel_h: grid/generator mismatch");
    const int n = g.size();
    const Matrix G = g.to_dense();
    Matrix lm = Matrix::Zero(n, n), lp = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) (grid.below(i) ? lm : lp)(i, i) = 1.0;
    const Matrix I = Matrix::Identity(n, n);
    const Matrix expo_arg = lm * (G - I / dt);
    const int k = expm_steps > 0 ? expm_steps
                                 : auto_expm_steps(false, D, expo_arg.cwiseAbs().rowwise().sum().maxCoeff());
    SliceKernels out;
    out.H1_plus = Eigen::FullPivLU<Matrix>(lm * (I / dt - G) + lp).solve(lp);
    out.H2_plus = BackwardEulerExp(expo_arg, D, k).apply(Matrix(lm * out.H1_plus));
    out.H_plus = out.H1_plus - out.H2_plus;
    out.H_minus = Eigen::FullPivLU<Matrix>(lp * (I / dt - G) + lm).solve(lm);
    return out;
}

Vector kernel_v(const GeneratorMatrix& g, const SpatialGrid& grid, const std::vector<Vector>& cbar, double D,
                double dt, int expm_steps) {
    const int n = g.size(), nb = grid.l_plus();
    Vector v = Vector::Zero(n);
    if (nb == 0) return v;
    const SubChain below(g, 0, nb);
    const double a = D / dt;
    Vector acc = Vector::Zero(nb);
    for (std::size_t k = 0; k < cbar.size(); ++k) {
        const double w = poisson_pmf(static_cast<int>(k), a);
        if (w < 1e-16) continue;
        acc += w * cbar[k].head(nb);
    }
    v.head(nb) = detail::block_exp(below, D, resolve_steps(expm_steps, below, D)).apply(acc);
    return v;
}

namespace {

// Σ_{k=1}^{j} R^k w_k − e^{DḠ} Σ_{p=0}^{j} R^p z_p with z_p = Σ_{k≥max(p,1)} π_{k−p} w_k,
// R = (I − δ_t Ḡ)^{−1} and π the Poisson(D/δ_t) weights. `w[k−1]` holds w_k.
Vector u_plus_series(const std::vector<Vector>& w, const Resolvent& rb, const BackwardEulerExp& expo, double D,
                     double dt, Eigen::Index nb) {
    const int j = static_cast<int>(w.size());
    Vector zero = Vector::Zero(nb);
    if (j == 0) return zero;
    const double a = D / dt;
    std::vector<double> pi(static_cast<std::size_t>(j) + 1);
    for (int i = 0; i <= j; ++i) pi[static_cast<std::size_t>(i)] = poisson_pmf(i, a);
    auto step = [&](const Vector& x) { return Vector(rb.solve(x) / dt); };

    Vector s1 = zero;
    for (int k = j; k >= 1; --k) s1 = step(s1 + w[static_cast<std::size_t>(k - 1)]);

    auto z = [&](int p) {
        Vector acc = zero;
        for (int k = std::max(p, 1); k <= j; ++k) {
            const double wt = pi[static_cast<std::size_t>(k - p)];
            if (wt < 1e-16) continue;
            acc += wt * w[static_cast<std::size_t>(k - 1)];
        }
        return acc;
    };
    Vector s2 = z(j);
    for (int p = j - 1; p >= 0; --p) s2 = z(p) + step(s2);
    return s1 - expo.apply(s2);
}

}  // namespace

Vector kernel_u_plus(const GeneratorMatrix& g, const SpatialGrid& grid, const std::vector<Vector>& future,
                     double D, double dt, int expm_steps) {
    const int n = g.size(), nb = grid.l_plus();
    Vector u = Vector::Zero(n);
    if (nb == 0 || nb == n) return u;
    const SubChain below(g, 0, nb);
    const Resolvent rb(below, 1.0 / dt);
    const Matrix h1 = rb.solve(below.coupling(nb, n));
    std::vector<Vector> w;
    for (const Vector& c : future) w.push_back(h1 * c.tail(n - nb));
    BackwardEulerExp expo = detail::block_exp(below, D, resolve_steps(expm_steps, below, D));
    const Vector raw = u_plus_series(w, rb, expo, D, dt, nb);
    u.head(nb) = raw;
    return u;
}

Vector kernel_u_minus(const GeneratorMatrix& g, const SpatialGrid& grid, const Matrix& H_minus_next,
                      const Vector& u_minus_next, const Vector& C_next, double dt) {
    const int n = g.size(), nb = grid.l_plus();
    Vector u = Vector::Zero(n);
    if (nb == n) return u;
    const SubChain above(g, nb, n);
    const Resolvent ra(above, 1.0 / dt);
    const Vector hc = H_minus_next * C_next;
    u.tail(n - nb) = ra.solve(Vector(u_minus_next.tail(n - nb) + hc.tail(n - nb))) / dt;
    return u;
}

Vector FiniteDownInResult::price(int s, double r) const {
    return std::exp(r * time.time(s)) * discounted.at(static_cast<std::size_t>(s));
}

namespace {

// Everything about one generator snapshot that the slice recursion needs.
// Note: the e^{DM} factor is e^{−D/δ_t}·exp(DḠ); the scalar part is exact.
struct SliceOperators {
    SliceOperators(const GeneratorMatrix& gen, const SpatialGrid& grid, double D, double dt,
                   const DownInOptions& opts)
        : g(gen), n(gen.size()), nb(grid.l_plus()) {
        const SubChain below(g, 0, nb), above(g, nb, n);
        rb.emplace(below, 1.0 / dt);
        ra.emplace(above, 1.0 / dt);
        expo.emplace(detail::block_exp(below, D, resolve_steps(opts.expm_steps, below, D)));
        const double decay = std::exp(-D / dt);
        cols_a = opts.fast_path ? detail::coupled_columns(below, nb, n) : all_indices(nb, n);
        cols_b = opts.fast_path ? detail::coupled_columns(above, 0, nb) : all_indices(0, nb);
        h1 = rb->solve(detail::select_columns(below.coupling(nb, n), cols_a, nb));
        h_plus = h1 - decay * expo->apply(h1);
        h_minus = ra->solve(detail::select_columns(above.coupling(0, nb), cols_b, 0));
        const int m = static_cast<int>(cols_b.size());
        if (m > 0 && !cols_a.empty()) {
            const Matrix sys = Matrix::Identity(m, m) - rows_of(h_plus, cols_b, 0) * rows_of(h_minus, cols_a, nb);
            lu.emplace(sys);
        }
        birth_death = g.is_birth_death() && cols_a.size() <= 1 && cols_b.size() <= 1;
    }

    GeneratorMatrix g;
    int n, nb;
    std::optional<Resolvent> rb, ra;
    std::optional<BackwardEulerExp> expo;
    std::vector<int> cols_a, cols_b;
    Matrix h1, h_plus, h_minus;
    std::optional<Eigen::PartialPivLU<Matrix>> lu;
    bool birth_death = false;
};

}  // namespace

FiniteDownInResult price_finite_downin(const GeneratorFn& generator, bool homogeneous, const SpatialGrid& grid,
                                       const TimeGrid& time, const Vector& f, double D, double r,
                                       const DownInOptions& opts) {
    if (!(D > 0.0)) throw std::invalid_argument("finite down-in: D must be positive");
    const int n = grid.size(), nb = grid.l_plus(), na = n - nb;
    if (f.size() != n) throw std::invalid_argument("finite down-in: payoff length mismatch");
    const int steps = time.steps;
    const double dt = time.dt;

    FiniteDownInResult res;
    res.time = time;
    res.discounted.assign(static_cast<std::size_t>(steps) + 1, Vector::Zero(n));
    res.vanilla.assign(static_cast<std::size_t>(steps) + 1, Vector::Zero(n));

    std::optional<SliceOperators> ops;
    std::optional<SliceOperators> ops_next;  // operators at t + δ_t, for u⁻
    std::vector<Vector> cbar(static_cast<std::size_t>(steps) + 1, Vector::Zero(nb));
    std::vector<Vector> w_cache(static_cast<std::size_t>(steps) + 1);  // H̄₁⁺ C̃_A(s), homogeneous case
    Vector u_minus_a = Vector::Zero(na);

    for (int s = steps - 1; s >= 0; --s) {
        const double t = time.time(s);
        if (!ops || !homogeneous) {
            if (ops) ops_next.emplace(*ops);
            ops.emplace(generator(t), grid, D, dt, opts);
            if (ops->g.size() != n) throw std::invalid_argument("finite down-in: generator/grid mismatch");
        }
        const SliceOperators& op = *ops;
        const SliceOperators& op_next = (homogeneous || !ops_next) ? op : *ops_next;
        res.fast_path = op.birth_death && opts.fast_path;

        LcpSolution info;
        const auto su = static_cast<std::size_t>(s);
        const double carry = opts.discount_vanilla ? std::exp(-r * dt) : 1.0;
        res.vanilla[su] = bermudan_slice(op.g, Vector(carry * res.vanilla[su + 1]), f, dt, opts.dense_lcp, &info,
                                         &res.vanilla[su + 1]);
        res.lcp_iterations += info.iterations;
        cbar[su] = std::exp(-r * t) * res.vanilla[su].head(nb);

        Vector r_b = Vector::Zero(nb);
        if (nb > 0) {
            // v(D, t)
            const double a = D / dt;
            Vector acc = Vector::Zero(nb);
            for (int k = 0; s + k < steps; ++k) {
                const double wt = poisson_pmf(k, a);
                if (wt < 1e-16 && k > a) break;
                if (wt < 1e-16) continue;
                acc += wt * cbar[su + static_cast<std::size_t>(k)];
            }
            r_b = op.expo->apply(acc);

            // u⁺(D, t)
            if (!op.cols_a.empty()) {
                std::vector<Vector> w;
                for (int k = 1; s + k < steps; ++k) {
                    const auto sk = su + static_cast<std::size_t>(k);
                    if (homogeneous && w_cache[sk].size() == nb) {
                        w.push_back(w_cache[sk]);
                    } else {
                        Vector wk = op.h1 * entries_of(res.discounted[sk], op.cols_a, 0);
                        if (homogeneous) w_cache[sk] = wk;
                        w.push_back(std::move(wk));
                    }
                }
                r_b += u_plus_series(w, *op.rb, *op.expo, D, dt, nb);
            }
        }

        // u⁻(t)
        Vector r_a = Vector::Zero(na);
        if (na > 0) {
            Vector rhs = u_minus_a;
            if (!op_next.cols_b.empty())
                rhs += op_next.h_minus * entries_of(res.discounted[su + 1], op_next.cols_b, 0);
            u_minus_a = op.ra->solve(rhs) / dt;
            r_a = u_minus_a;
        }

        // Slice system.
        Vector& out = res.discounted[su];
        const int m = static_cast<int>(op.cols_b.size());
        Vector x_sel = entries_of(r_b, op.cols_b, 0);
        if (op.lu) {
            x_sel += rows_of(op.h_plus, op.cols_b, 0) * entries_of(r_a, op.cols_a, nb);
            x_sel = op.lu->solve(x_sel).eval();
        }
        Vector c_a = r_a;
        if (m > 0 && na > 0) c_a += op.h_minus * x_sel;
        Vector c_b = r_b;
        if (!op.cols_a.empty() && nb > 0) c_b += op.h_plus * entries_of(c_a, op.cols_a, nb);
        out.head(nb) = c_b;
        out.tail(na) = c_a;
        if (!out.allFinite()) throw SingularMatrixError("finite down-in: non-finite slice values");
    }
    return res;
}

FiniteDownInResult price_finite_downin(const GeneratorMatrix& g, const SpatialGrid& grid, const TimeGrid& time,
                                       const Vector& f, double D, double r, const DownInOptions& opts) {
    return price_finite_downin([&g](double) { return g; }, true, grid, time, f, D, r, opts);
}

}  // namespace parisian
