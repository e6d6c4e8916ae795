#pragma once

#include "parisian/contract.hpp"
#include "parisian/downin.hpp"
#include "parisian/downout.hpp"
#include "parisian/generator.hpp"
#include "parisian/models.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace parisian {

enum class ModelKind { BlackScholes, Kou, VarianceGamma };

std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& name);

/// Model parameters for the three supported families. Only the block of the
/// selected family is read; `r_f` and `dividend` are shared.
struct ModelParams {
    ModelKind kind = ModelKind::BlackScholes;
    double r_f = 0.05;
    double dividend = 0.0;
    double sigma = 0.3;  ///< Black–Scholes volatility
    KouParams kou{};
    VGParams vg{};

    ModelSpec build() const;
};

/// Everything needed for one price.
struct PricingConfig {
    ModelParams model{};
    double spot = 90.0;
    double strike = 95.0;
    double barrier = 90.0;
    double window = 1.0 / 12.0;
    double maturity = std::numeric_limits<double>::infinity();
    double rate = 0.05;
    Flavor flavor = Flavor::DownIn;

    int n = 129;
    double dt = 1.0 / 60.0;
    double dd = 1.0 / 120.0;
    /// Grid endpoints in price units; unset means [S₀/5, 4S₀].
    std::optional<double> range_lo;
    std::optional<double> range_hi;
    RatePolicy rate_policy = RatePolicy::Strict;

    DownInOptions downin{};
    DownOutOptions downout{};

    bool perpetual() const { return !(maturity < std::numeric_limits<double>::infinity()); }
    ContractSpec contract() const;
    void validate() const;
};

/// Price at the spot plus whatever surface the pricer produced.
struct PriceResult {
    double price = 0.0;
    double seconds = 0.0;
    SpatialGrid grid;
    ModelSpec model;
    int repaired_rows = 0;
    long lcp_iterations = 0;
    double max_residual = 0.0;

    /// Surface rows for CSV output: (t, d, state index, state, price).
    /// Perpetual prices use t = 0; down-in rows use d = 0.
    struct Row {
        double t;
        double d;
        int index;
        double state;
        double value;
    };
    std::vector<Row> surface;
};

/// Builds grid and generator, runs the matching pricer and reads the price at
/// the spot by linear interpolation. `full_surface` keeps every slice.
PriceResult price_option(const PricingConfig& cfg, bool full_surface = false);

/// Writes the surface as CSV: t,state,price for down-in and t,d,state,price
/// for down-out.
void write_surface_csv(const PriceResult& r, Flavor flavor, const std::string& path);

/// Pairwise Richardson extrapolation p* = (n₂^q p₂ − n₁^q p₁)/(n₂^q − n₁^q) of
/// consecutive entries; result i combines entries i and i+1.
std::vector<double> richardson(const std::vector<std::pair<int, double>>& prices, int order = 2);

struct StudyConfig {
    std::string name;
    PricingConfig base{};
    std::vector<int> grids;
    std::optional<double> benchmark;
    std::string benchmark_note;
    int order = 2;
    int jobs = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct StudyRow {
    int n = 0;
    std::optional<double> price;
    std::optional<double> abs_error;
    std::optional<double> rel_error;
    double seconds = 0.0;
    /// Richardson value from this grid and the previous one.
    std::optional<double> extrapolated;
    std::optional<double> extrapolated_abs_error;
    std::optional<double> extrapolated_rel_error;
    std::string error;  ///< pricing failure message, empty on success
};

/// Prices every grid (up to `jobs` concurrently, results kept in grid order)
/// and fills errors and extrapolations. A failing grid is recorded in its row
/// and the study carries on.
std::vector<StudyRow> run_study(const StudyConfig& cfg);

/// CSV with header n,price,abs_err,rel_err,time_s,extrapolated,extra_abs_err,extra_rel_err.
void write_study_csv(const std::vector<StudyRow>& rows, std::ostream& out, bool include_timing = true);
void write_study_csv(const std::vector<StudyRow>& rows, const std::string& path, bool include_timing = true);

/// log–log (n, |error|) series of a study, for plotting.
void write_plot_data(const std::vector<StudyRow>& rows, std::ostream& out);

// ------------------------------------------------------- benchmark tables

/// Pass/fail thresholds of one table cell; unset limits are not checked.
struct Tolerance {
    std::optional<double> raw_rel;         ///< on the finest grid
    std::optional<double> extrapolated_rel;  ///< on the finest pair
    std::optional<double> seconds;         ///< per-price wall clock on the finest grid
    std::optional<double> total_seconds;   ///< wall clock of the whole study
    /// Alternative criterion when extrapolated_rel fails: extrapolated error at
    /// most half the raw error on every pair, with raw errors decreasing.
    bool halving_fallback = false;
};

struct BenchmarkCase {
    std::string table;   ///< bs, kou or vg
    std::string option;  ///< e.g. "perpetual down-in"
    StudyConfig study;
    std::vector<double> paper_ctmc;  ///< the paper's CTMC column, aligned with the grids
    std::optional<Tolerance> tolerance;  ///< acceptance thresholds, when any
};

/// The four option types of one table with the paper's parameters and grids.
std::vector<BenchmarkCase> paper_cases(const std::string& table);

struct CellVerdict {
    bool checked = false;
    bool passed = true;
    std::string detail;
};

CellVerdict judge(const BenchmarkCase& c, const std::vector<StudyRow>& rows);

/// Runs all cases of a table, prints a side-by-side report and returns true
/// when every checked cell passes.
bool reproduce_table(const std::string& table, std::ostream& out, int jobs = 1,
                     const std::string& csv_dir = "");

}  // namespace parisian
