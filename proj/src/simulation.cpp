#include "parisian/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace parisian {

int ChainPath::state_at(double t) const {
    int s = start;
    for (const auto& e : events) {
        if (e.time > t) break;
        s = e.state;
    }
    return s;
}

std::optional<PathEvent> ChainPath::first_up_crossing(int l_plus) const {
    if (start >= l_plus) return PathEvent{0.0, start};
    for (const auto& e : events)
        if (e.state >= l_plus) return e;
    return std::nullopt;
}

std::optional<PathEvent> ChainPath::first_down_crossing(int l_plus) const {
    if (start < l_plus) return PathEvent{0.0, start};
    for (const auto& e : events)
        if (e.state < l_plus) return e;
    return std::nullopt;
}

std::optional<PathEvent> ChainPath::parisian_time(int l_plus, double D) const {
    // Walk the piecewise-constant path keeping g, the start of the current
    // stay below L.
    int state = start;
    bool below = state < l_plus;
    double g = 0.0;
    auto check = [&](double until) -> std::optional<PathEvent> {
        if (below && g + D <= until && g + D <= horizon) return PathEvent{g + D, state};
        return std::nullopt;
    };
    for (const auto& e : events) {
        if (auto hit = check(e.time)) return hit;
        const bool now_below = e.state < l_plus;
        if (now_below && !below) g = e.time;
        below = now_below;
        state = e.state;
    }
    return check(horizon);
}

std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 of (seed, index) as the engine seed; cheap enough per path.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return std::mt19937_64(z ^ (z >> 31));
}

namespace {

// Off-diagonal rates of row x as (state, cumulative rate) for sampling.
struct RowTable {
    std::vector<int> target;
    std::vector<double> cumulative;
    double total = 0.0;
};

std::vector<RowTable> build_tables(const GeneratorMatrix& g) {
    const int n = g.size();
    std::vector<RowTable> rows(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x) {
        RowTable& t = rows[static_cast<std::size_t>(x)];
        for (int y = 0; y < n; ++y) {
            if (y == x) continue;
            const double v = g.rate(x, y);
            if (v < 0.0) throw std::invalid_argument("simulation: negative rate");
            if (v == 0.0) continue;
            t.total += v;
            t.target.push_back(y);
            t.cumulative.push_back(t.total);
        }
    }
    return rows;
}

// Simulates until the horizon, absorption, or until `done(path, t)` reports
// that the jump about to be recorded at time t can no longer matter.
template <class Done>
ChainPath simulate_with(const std::vector<RowTable>& rows, int x0, double horizon, std::mt19937_64& rng,
                        Done&& done) {
    ChainPath p;
    p.start = x0;
    p.horizon = horizon;
    std::exponential_distribution<double> hold(1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double t = 0.0;
    int x = x0;
    for (;;) {
        const RowTable& row = rows[static_cast<std::size_t>(x)];
        if (row.total <= 0.0) break;
        t += hold(rng) / row.total;
        if (t > horizon || done(p, t)) break;
        const double u = unif(rng) * row.total;
        auto it = std::upper_bound(row.cumulative.begin(), row.cumulative.end(), u);
        if (it == row.cumulative.end()) --it;
        x = row.target[static_cast<std::size_t>(it - row.cumulative.begin())];
        p.events.push_back({t, x});
    }
    return p;
}

constexpr auto never = [](const ChainPath&, double) { return false; };

template <class Event, class Done>
KernelEstimate estimate(const GeneratorMatrix& g, int x0, double r, double horizon, std::uint64_t seed,
                        long n_paths, Event&& event, Done&& done) {
    if (x0 < 0 || x0 >= g.size()) throw std::out_of_range("simulation: start state out of range");
    if (n_paths <= 0) throw std::invalid_argument("simulation: need at least one path");
    if (r < 0.0) throw std::invalid_argument("simulation: r must be nonnegative");
    const auto rows = build_tables(g);
    const int n = g.size();
    Vector sum = Vector::Zero(n), sum_sq = Vector::Zero(n);
    long hits = 0;
    KernelEstimate out;
    out.degenerate = rows[static_cast<std::size_t>(x0)].total <= 0.0;
    const long runs = out.degenerate ? 1 : n_paths;
    for (long i = 0; i < runs; ++i) {
        auto rng = path_engine(seed, static_cast<std::uint64_t>(i));
        const ChainPath path = simulate_with(rows, x0, horizon, rng, done);
        if (auto e = event(path)) {
            const double w = std::exp(-r * e->time);
            sum[e->state] += w;
            sum_sq[e->state] += w * w;
            ++hits;
        }
    }
    const auto m = static_cast<double>(runs);
    out.paths = out.degenerate ? n_paths : runs;
    out.mean = sum / m;
    out.std_error = Vector::Zero(n);
    if (runs > 1)
        for (int y = 0; y < n; ++y) {
            const double var = std::max(0.0, (sum_sq[y] / m - out.mean[y] * out.mean[y]) * m / (m - 1.0));
            out.std_error[y] = std::sqrt(var / m);
        }
    out.hit_fraction = static_cast<double>(hits) / m;
    return out;
}

}  // namespace

ChainPath simulate_path(const GeneratorMatrix& g, int x0, double horizon, std::mt19937_64& rng) {
    if (x0 < 0 || x0 >= g.size()) throw std::out_of_range("simulation: start state out of range");
    return simulate_with(build_tables(g), x0, horizon, rng, never);
}

KernelEstimate simulate_paths(const GeneratorMatrix& g, int l_plus, int x0, double D, double r, double horizon,
                              std::uint64_t seed, long n_paths) {
    if (D < 0.0) throw std::invalid_argument("simulation: window must be nonnegative");
    // Once the current stay below L has lasted D the event is fixed.
    auto done = [&](const ChainPath& p, double t) {
        const int x = p.events.empty() ? p.start : p.events.back().state;
        if (x >= l_plus) return false;
        double g = 0.0;
        for (auto it = p.events.rbegin(); it != p.events.rend(); ++it) {
            const auto prev = std::next(it);
            const int before = prev == p.events.rend() ? p.start : prev->state;
            if (before >= l_plus) {
                g = it->time;
                break;
            }
        }
        return g + D <= t;
    };
    return estimate(
        g, x0, r, horizon, seed, n_paths, [&](const ChainPath& p) { return p.parisian_time(l_plus, D); }, done);
}

KernelEstimate simulate_up_crossing(const GeneratorMatrix& g, int l_plus, int x0, double D, double r,
                                    std::uint64_t seed, long n_paths) {
    return estimate(
        g, x0, r, D, seed, n_paths,
        [&](const ChainPath& p) -> std::optional<PathEvent> {
            auto e = p.first_up_crossing(l_plus);
            if (e && e->time < D) return e;
            return std::nullopt;
        },
        [&](const ChainPath& p, double) { return !p.events.empty() && p.events.back().state >= l_plus; });
}

}  // namespace parisian
