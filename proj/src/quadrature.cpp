#include "parisian/quadrature.hpp"

#include "parisian/types.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace parisian {

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment kronrod(const std::function<double(double)>& f, double a, double b, int& evals) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod_sum = fc * kWgk[7];
    double gauss_sum = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        kronrod_sum += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) gauss_sum += kWg[j / 2] * (f1 + f2);
    }
    evals += 15;
    const double value = kronrod_sum * half;
    const double error = std::abs((kronrod_sum - gauss_sum) * half);
    return {a, b, value, error};
}

QuadratureResult integrate_finite(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& opts) {
    QuadratureResult out;
    if (a == b) return out;
    std::priority_queue<Segment> heap;
    Segment first = kronrod(f, a, b, out.evaluations);
    double total = first.value;
    double total_err = first.error;
    heap.push(first);
    int subdivisions = 0;
    while (total_err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
        if (subdivisions >= opts.max_subdivisions) {
            throw ConvergenceError("adaptive quadrature did not converge");
        }
        Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval collapsed to machine resolution; accept what we have
            heap.push(worst);
            break;
        }
        Segment left = kronrod(f, worst.a, mid, out.evaluations);
        Segment right = kronrod(f, mid, worst.b, out.evaluations);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++subdivisions;
    }
    // re-sum to shed the drift of the running updates
    double value = 0.0;
    double error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    out.value = value;
    out.error = error;
    return out;
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts) {
    if (std::isnan(a) || std::isnan(b)) throw std::invalid_argument("integrate: NaN bound");
    if (a > b) {
        QuadratureResult r = integrate(f, b, a, opts);
        r.value = -r.value;
        return r;
    }
    const bool lo_inf = std::isinf(a);
    const bool hi_inf = std::isinf(b);
    if (!lo_inf && !hi_inf) return integrate_finite(f, a, b, opts);
    if (lo_inf && hi_inf) {
        QuadratureResult left = integrate(f, a, 0.0, opts);
        QuadratureResult right = integrate(f, 0.0, b, opts);
        return {left.value + right.value, left.error + right.error,
                left.evaluations + right.evaluations};
    }
    if (hi_inf) {
        // z = a + u/(1-u), u in [0,1)
        auto g = [&](double u) {
            if (u >= 1.0) return 0.0;
            const double one_minus = 1.0 - u;
            const double z = a + u / one_minus;
            const double v = f(z);
            return v == 0.0 ? 0.0 : v / (one_minus * one_minus);
        };
        return integrate_finite(g, 0.0, 1.0, opts);
    }
    // z = b - u/(1-u)
    auto g = [&](double u) {
        if (u >= 1.0) return 0.0;
        const double one_minus = 1.0 - u;
        const double z = b - u / one_minus;
        const double v = f(z);
        return v == 0.0 ? 0.0 : v / (one_minus * one_minus);
    };
    return integrate_finite(g, 0.0, 1.0, opts);
}

}  // namespace parisian
