#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>

namespace parisian {

/// Whether model states are prices S or log-prices ln S.
enum class Coordinate { Price, Log };

/// Half-open interval [lo, hi) of jump sizes; either end may be infinite.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains_zero() const { return lo <= 0.0 && 0.0 < hi; }
};

/// Jump measure ν(t, x, dz) queried only through integrals over intervals.
class JumpMeasure {
public:
    virtual ~JumpMeasure() = default;

    /// ∫_I ν(t, x, dz). Returns +inf for intervals around 0 when the activity is infinite.
    virtual double interval_mass(double t, double x, Interval jumps) const = 0;
    /// ∫_I z² ν(t, x, dz); finite for bounded I even under infinite activity.
    virtual double small_jump_second_moment(double t, double x, Interval jumps) const = 0;
    /// ∫_I z 1{|z| ≤ 1} ν(t, x, dz).
    virtual double truncated_first_moment(double t, double x, Interval jumps) const = 0;
    /// ν(t, x, ℝ); +inf for infinite-activity measures.
    virtual double total_activity() const = 0;
    /// True when ν does not depend on the current state (Lévy measures in log space).
    virtual bool state_independent() const { return false; }
};

/// Coefficient bundle of a 1D Markov model in the generator form
///   μ g' + ½σ² g'' + ∫ (g(x+z) − g(x) − z g'(x) 1{|z|≤1}) ν(dz).
///
/// `drift` is the drift in that truncated-compensated convention, which is
/// what the CTMC rate formulas consume.
struct ModelSpec {
    std::string name;
    Coordinate coordinate = Coordinate::Price;
    bool time_homogeneous = true;
    std::function<double(double t, double x)> drift;
    std::function<double(double t, double x)> diffusion_sq;
    std::shared_ptr<const JumpMeasure> jumps;

    bool has_jumps() const { return static_cast<bool>(jumps); }
    double to_state(double price) const;
    double to_price(double state) const;
};

struct KouParams {
    double sigma = 0.3;
    double lambda = 3.0;
    double eta_plus = 10.0;
    double eta_minus = 10.0;
    double p_plus = 0.5;
    double p_minus = 0.5;
    double r_f = 0.05;
    double dividend = 0.0;

    void validate() const;
};

struct VGParams {
    double sigma = 0.1213;
    double nu = 0.1686;
    double theta = -0.1436;
    double r_f = 0.05;
    double dividend = 0.0;

    void validate() const;
};

/// Closed-form double-exponential jump measure in log space.
class KouJumpMeasure final : public JumpMeasure {
public:
    explicit KouJumpMeasure(const KouParams& p);

    double interval_mass(double t, double x, Interval jumps) const override;
    double small_jump_second_moment(double t, double x, Interval jumps) const override;
    double truncated_first_moment(double t, double x, Interval jumps) const override;
    double total_activity() const override { return lambda_; }
    bool state_independent() const override { return true; }

    double density(double z) const;

private:
    double lambda_;
    double eta_plus_;
    double eta_minus_;
    double p_plus_;
    double p_minus_;
};

/// Jump measure given by a density k(t, x, z), integrated by adaptive
/// Gauss–Kronrod quadrature with the domain split at z = 0.
class DensityJumpMeasure final : public JumpMeasure {
public:
    using Density = std::function<double(double t, double x, double z)>;

    DensityJumpMeasure(Density density, double total_activity, bool state_independent);

    double interval_mass(double t, double x, Interval jumps) const override;
    double small_jump_second_moment(double t, double x, Interval jumps) const override;
    double truncated_first_moment(double t, double x, Interval jumps) const override;
    double total_activity() const override { return total_activity_; }
    bool state_independent() const override { return state_independent_; }

    double density(double t, double x, double z) const { return density_(t, x, z); }

private:
    double integrate_weighted(double t, double x, double lo, double hi, int power) const;

    Density density_;
    double total_activity_;
    bool state_independent_;
};

/// Black–Scholes in price space: μ = (r_f − d)x, σ²(x) = σ²x².
ModelSpec bs_model(double r_f, double d, double sigma);

/// Kou double-exponential jump diffusion in log space.
ModelSpec kou_model(const KouParams& p);

/// Variance Gamma pure-jump model in log space.
ModelSpec vg_model(const VGParams& p);

/// ζ = E[V] − 1 of the Kou jump size.
double kou_zeta(const KouParams& p);

/// Martingale correction ω = ln(1 − θν − σ²ν/2)/ν.
double vg_omega(const VGParams& p);

/// VG Lévy density in log space.
double vg_levy_density(const VGParams& p, double z);

}  // namespace parisian
