#include "parisian/models.hpp"

#include "parisian/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace parisian {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tail antiderivatives of the unit-rate exponential density η e^{−ηu}, u ≥ 0.
double tail_mass(double eta, double u) { return std::isinf(u) ? 0.0 : std::exp(-eta * u); }
double tail_first(double eta, double u) {
    return std::isinf(u) ? 0.0 : std::exp(-eta * u) * (u + 1.0 / eta);
}
double tail_second(double eta, double u) {
    return std::isinf(u) ? 0.0 : std::exp(-eta * u) * (u * u + 2.0 * u / eta + 2.0 / (eta * eta));
}

Interval clip(Interval i, double lo, double hi) { return {std::max(i.lo, lo), std::min(i.hi, hi)}; }

}  // namespace

double ModelSpec::to_state(double price) const {
    return coordinate == Coordinate::Log ? std::log(price) : price;
}

double ModelSpec::to_price(double state) const {
    return coordinate == Coordinate::Log ? std::exp(state) : state;
}

void KouParams::validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("kou: sigma must be positive");
    if (!(lambda > 0.0)) throw std::invalid_argument("kou: lambda must be positive");
    if (!(eta_plus > 1.0)) throw std::invalid_argument("kou: eta_plus must exceed 1");
    if (!(eta_minus > 0.0)) throw std::invalid_argument("kou: eta_minus must be positive");
    if (!(p_plus > 0.0) || !(p_minus > 0.0)) throw std::invalid_argument("kou: probabilities must be positive");
    if (std::abs(p_plus + p_minus - 1.0) > 1e-12) throw std::invalid_argument("kou: p_plus + p_minus must equal 1");
    if (r_f < 0.0 || dividend < 0.0) throw std::invalid_argument("kou: rates must be nonnegative");
}

void VGParams::validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("vg: sigma must be positive");
    if (!(nu > 0.0)) throw std::invalid_argument("vg: nu must be positive");
    if (!(1.0 - theta * nu - 0.5 * sigma * sigma * nu > 0.0)) {
        throw std::invalid_argument("vg: 1 - theta*nu - sigma^2*nu/2 must be positive");
    }
    if (r_f < 0.0 || dividend < 0.0) throw std::invalid_argument("vg: rates must be nonnegative");
}

KouJumpMeasure::KouJumpMeasure(const KouParams& p)
    : lambda_(p.lambda), eta_plus_(p.eta_plus), eta_minus_(p.eta_minus),
      p_plus_(p.p_plus), p_minus_(p.p_minus) {
    p.validate();
}

double KouJumpMeasure::density(double z) const {
    if (z >= 0.0) return lambda_ * p_plus_ * eta_plus_ * std::exp(-eta_plus_ * z);
    return lambda_ * p_minus_ * eta_minus_ * std::exp(eta_minus_ * z);
}

double KouJumpMeasure::interval_mass(double, double, Interval jumps) const {
    double mass = 0.0;
    const Interval up = clip(jumps, 0.0, kInf);
    if (up.lo < up.hi) {
        mass += lambda_ * p_plus_ * (tail_mass(eta_plus_, up.lo) - tail_mass(eta_plus_, up.hi));
    }
    const Interval down = clip(jumps, -kInf, 0.0);
    if (down.lo < down.hi) {
        mass += lambda_ * p_minus_ * (tail_mass(eta_minus_, -down.hi) - tail_mass(eta_minus_, -down.lo));
    }
    return mass;
}

double KouJumpMeasure::small_jump_second_moment(double, double, Interval jumps) const {
    double m = 0.0;
    const Interval up = clip(jumps, 0.0, kInf);
    if (up.lo < up.hi) {
        m += lambda_ * p_plus_ * (tail_second(eta_plus_, up.lo) - tail_second(eta_plus_, up.hi));
    }
    const Interval down = clip(jumps, -kInf, 0.0);
    if (down.lo < down.hi) {
        m += lambda_ * p_minus_ * (tail_second(eta_minus_, -down.hi) - tail_second(eta_minus_, -down.lo));
    }
    return m;
}

double KouJumpMeasure::truncated_first_moment(double, double, Interval jumps) const {
    double m = 0.0;
    const Interval up = clip(jumps, 0.0, 1.0);
    if (up.lo < up.hi) {
        m += lambda_ * p_plus_ * (tail_first(eta_plus_, up.lo) - tail_first(eta_plus_, up.hi));
    }
    const Interval down = clip(jumps, -1.0, 0.0);
    if (down.lo < down.hi) {
        m -= lambda_ * p_minus_ * (tail_first(eta_minus_, -down.hi) - tail_first(eta_minus_, -down.lo));
    }
    return m;
}

DensityJumpMeasure::DensityJumpMeasure(Density density, double total_activity, bool state_independent)
    : density_(std::move(density)), total_activity_(total_activity), state_independent_(state_independent) {
    if (!density_) throw std::invalid_argument("jump density must be callable");
}

double DensityJumpMeasure::integrate_weighted(double t, double x, double lo, double hi, int power) const {
    if (!(lo < hi)) return 0.0;
    auto integrand = [&](double z) {
        const double k = density_(t, x, z);
        if (k == 0.0) return 0.0;
        switch (power) {
            case 0: return k;
            case 1: return z * k;
            default: return z * z * k;
        }
    };
    return integrate(integrand, lo, hi).value;
}

double DensityJumpMeasure::interval_mass(double t, double x, Interval jumps) const {
    if (std::isinf(total_activity_) && jumps.lo <= 0.0 && 0.0 <= jumps.hi) return kInf;
    return integrate_weighted(t, x, jumps.lo, std::min(jumps.hi, 0.0), 0) +
           integrate_weighted(t, x, std::max(jumps.lo, 0.0), jumps.hi, 0);
}

double DensityJumpMeasure::small_jump_second_moment(double t, double x, Interval jumps) const {
    return integrate_weighted(t, x, jumps.lo, std::min(jumps.hi, 0.0), 2) +
           integrate_weighted(t, x, std::max(jumps.lo, 0.0), jumps.hi, 2);
}

double DensityJumpMeasure::truncated_first_moment(double t, double x, Interval jumps) const {
    const Interval c = clip(jumps, -1.0, 1.0);
    return integrate_weighted(t, x, c.lo, std::min(c.hi, 0.0), 1) +
           integrate_weighted(t, x, std::max(c.lo, 0.0), c.hi, 1);
}

ModelSpec bs_model(double r_f, double d, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("bs: sigma must be positive");
    ModelSpec m;
    m.name = "bs";
    m.coordinate = Coordinate::Price;
    m.time_homogeneous = true;
    const double growth = r_f - d;
    const double var = sigma * sigma;
    m.drift = [growth](double, double x) { return growth * x; };
    m.diffusion_sq = [var](double, double x) { return var * x * x; };
    return m;
}

double kou_zeta(const KouParams& p) {
    return p.p_plus * p.eta_plus / (p.eta_plus - 1.0) + p.p_minus * p.eta_minus / (p.eta_minus + 1.0) - 1.0;
}

ModelSpec kou_model(const KouParams& p) {
    p.validate();
    auto jumps = std::make_shared<KouJumpMeasure>(p);
    const double raw = p.r_f - p.dividend - p.lambda * kou_zeta(p) - 0.5 * p.sigma * p.sigma;
    const double compensator = jumps->truncated_first_moment(0.0, 0.0, Interval{-1.0, 1.0});
    const double mu = raw + compensator;
    const double var = p.sigma * p.sigma;
    ModelSpec m;
    m.name = "kou";
    m.coordinate = Coordinate::Log;
    m.time_homogeneous = true;
    m.drift = [mu](double, double) { return mu; };
    m.diffusion_sq = [var](double, double) { return var; };
    m.jumps = std::move(jumps);
    return m;
}

double vg_omega(const VGParams& p) {
    return std::log(1.0 - p.theta * p.nu - 0.5 * p.sigma * p.sigma * p.nu) / p.nu;
}

double vg_levy_density(const VGParams& p, double z) {
    if (z == 0.0) return std::numeric_limits<double>::infinity();
    const double s2 = p.sigma * p.sigma;
    const double root = std::sqrt(p.theta * p.theta + 2.0 * s2 / p.nu);
    return std::exp(p.theta * z / s2 - std::abs(z) * root / s2) / (p.nu * std::abs(z));
}

ModelSpec vg_model(const VGParams& p) {
    p.validate();
    const VGParams q = p;
    auto jumps = std::make_shared<DensityJumpMeasure>(
        [q](double, double, double z) { return vg_levy_density(q, z); }, kInf, true);
    // ∫_{|z|≤1} z k(z) dz in closed form: (1/ν)[(1−e^{−c₊})/c₊ − (1−e^{−c₋})/c₋]
    const double s2 = p.sigma * p.sigma;
    const double root = std::sqrt(p.theta * p.theta + 2.0 * s2 / p.nu);
    const double c_up = (root - p.theta) / s2;
    const double c_down = (root + p.theta) / s2;
    const double compensator =
        ((1.0 - std::exp(-c_up)) / c_up - (1.0 - std::exp(-c_down)) / c_down) / p.nu;
    const double mu = p.r_f - p.dividend + vg_omega(p) + compensator;
    ModelSpec m;
    m.name = "vg";
    m.coordinate = Coordinate::Log;
    m.time_homogeneous = true;
    m.drift = [mu](double, double) { return mu; };
    m.diffusion_sq = [](double, double) { return 0.0; };
    m.jumps = std::move(jumps);
    return m;
}

}  // namespace parisian
