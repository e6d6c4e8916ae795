#include "parisian/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace parisian {

SpatialGrid::SpatialGrid(std::vector<double> states, double barrier)
    : states_(std::move(states)), barrier_(barrier) {
    if (states_.size() < 2) throw std::invalid_argument("grid: need at least two states");
    for (std::size_t i = 1; i < states_.size(); ++i)
        if (!(states_[i] > states_[i - 1])) throw std::invalid_argument("grid: states must be strictly increasing");
    l_plus_ = static_cast<int>(std::lower_bound(states_.begin(), states_.end(), barrier_) - states_.begin());
}

double SpatialGrid::delta_plus(int i) const {
    if (i < last()) return states_[i + 1] - states_[i];
    return states_[i] - states_[i - 1];
}

double SpatialGrid::delta_minus(int i) const {
    if (i > 0) return states_[i] - states_[i - 1];
    return states_[1] - states_[0];
}

Interval SpatialGrid::cell(int i) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Interval c;
    c.lo = i == 0 ? -inf : 0.5 * (states_[i - 1] + states_[i]);
    c.hi = i == last() ? inf : 0.5 * (states_[i] + states_[i + 1]);
    return c;
}

double SpatialGrid::grid_size() const {
    double h = 0.0;
    for (int i = 0; i < std::min(l_plus_, last()); ++i) h = std::max(h, delta_plus(i));
    return h;
}

int SpatialGrid::locate(double x) const {
    const auto it = std::upper_bound(states_.begin(), states_.end(), x);
    const int i = static_cast<int>(it - states_.begin()) - 1;
    return std::clamp(i, 0, last() - 1);
}

double SpatialGrid::interpolate(const Vector& values, double x) const {
    if (values.size() != size()) throw std::invalid_argument("grid: value vector has wrong length");
    if (x <= states_.front()) return values[0];
    if (x >= states_.back()) return values[last()];
    const int i = locate(x);
    const double w = (x - states_[i]) / (states_[i + 1] - states_[i]);
    return (1.0 - w) * values[i] + w * values[i + 1];
}

SegmentCounts split_segments(double y_min, double y_max, double lo, double hi, int n, SplitPolicy policy) {
    const double total = y_max - y_min;
    (void)policy;
    SegmentCounts c;
    c.n1 = std::max(1, static_cast<int>(std::floor(n * (lo - y_min) / total)));
    c.n3 = std::max(1, static_cast<int>(std::floor(n * (y_max - hi) / total)));
    c.n2 = n - c.n1 - c.n3;
    return c;
}

namespace {

std::vector<double> pu_nodes(double y0, double yn, double L, double K, int n, SplitPolicy policy) {
    const SegmentCounts c = split_segments(y0, yn, L, K, n, policy);
    if (c.n2 < 1) throw std::invalid_argument("grid: n too small to place the barrier and strike segments");
    const double h1 = (L - y0) / c.n1;
    const double h2 = (K - L) / c.n2;
    const double h3 = (yn - K - h2) / c.n3;
    if (!(h3 > 0.0))
        throw std::invalid_argument("grid: strike too close to the upper end for the requested split");
    std::vector<double> y;
    y.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i < c.n1; ++i) y.push_back(y0 + i * h1);
    y.push_back(L);
    for (int i = 0; i + 2 <= c.n2; ++i) y.push_back(L + (1 + i) * h2);
    for (int i = 0; i < c.n3; ++i) y.push_back(K + h2 + i * h3);
    y.push_back(yn);
    return y;
}

}  // namespace

SpatialGrid build_grid(double y_min, double y_max, double L, double K, int n, SplitPolicy policy) {
    if (n < 8) throw std::invalid_argument("grid: n must be at least 8");
    if (!(y_min < std::min(L, K)) || !(std::max(L, K) < y_max))
        throw std::invalid_argument("grid: barrier and strike must lie strictly inside the range");
    if (L == K) throw std::invalid_argument("grid: strike cannot coincide with the barrier");
    if (L < K) return SpatialGrid(pu_nodes(y_min, y_max, L, K, n, policy), L);
    std::vector<double> mirrored = pu_nodes(-y_max, -y_min, -L, -K, n, policy);
    std::vector<double> y(mirrored.rbegin(), mirrored.rend());
    for (double& v : y) v = -v;
    return SpatialGrid(std::move(y), L);
}

StateRange default_state_range(const ModelSpec& model, double spot) {
    if (!(spot > 0.0)) throw std::invalid_argument("grid: spot must be positive");
    return {model.to_state(spot / 5.0), model.to_state(4.0 * spot)};
}

TimeGrid::TimeGrid(double step, double T) : dt(step), horizon(T) {
    if (!(dt > 0.0)) throw std::invalid_argument("time grid: step must be positive");
    if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("time grid: horizon must be finite and nonnegative");
    steps = static_cast<int>(std::floor(T / dt + 1e-9)) + 1;
}

}  // namespace parisian
