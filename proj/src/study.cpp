#include "parisian/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace parisian {

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::BlackScholes: return "bs";
        case ModelKind::Kou: return "kou";
        case ModelKind::VarianceGamma: return "vg";
    }
    return "?";
}

ModelKind parse_model_kind(const std::string& name) {
    if (name == "bs" || name == "black-scholes") return ModelKind::BlackScholes;
    if (name == "kou") return ModelKind::Kou;
    if (name == "vg" || name == "variance-gamma") return ModelKind::VarianceGamma;
    throw std::invalid_argument("unknown model '" + name + "' (expected bs, kou or vg)");
}

ModelSpec ModelParams::build() const {
    switch (kind) {
        case ModelKind::BlackScholes: return bs_model(r_f, dividend, sigma);
        case ModelKind::Kou: {
            KouParams p = kou;
            p.r_f = r_f;
            p.dividend = dividend;
            return kou_model(p);
        }
        case ModelKind::VarianceGamma: {
            VGParams p = vg;
            p.r_f = r_f;
            p.dividend = dividend;
            return vg_model(p);
        }
    }
    throw std::logic_error("unreachable model kind");
}

ContractSpec PricingConfig::contract() const {
    return call_contract(strike, barrier, window, maturity, rate, flavor);
}

void PricingConfig::validate() const {
    contract().validate();
    if (!(spot > 0.0)) throw std::invalid_argument("spot must be positive");
    if (n < 4) throw std::invalid_argument("n must be at least 4");
    if (!perpetual() && !(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (flavor == Flavor::DownOut && !(dd > 0.0)) throw std::invalid_argument("dd must be positive");
    if (range_lo && range_hi && !(*range_lo < *range_hi))
        throw std::invalid_argument("range_lo must be below range_hi");
    if (range_lo && (*range_lo > std::min(barrier, strike)))
        throw std::invalid_argument("range_lo must lie below barrier and strike");
    if (range_hi && (*range_hi < std::max(barrier, strike)))
        throw std::invalid_argument("range_hi must lie above barrier and strike");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void append_spatial(std::vector<PriceResult::Row>& out, const SpatialGrid& grid, const ModelSpec& model,
                    const Vector& v, double t) {
    for (int x = 0; x < grid.size(); ++x) out.push_back({t, 0.0, x, model.to_price(grid[x]), v[x]});
}

void append_joint(std::vector<PriceResult::Row>& out, const SpatialGrid& grid, const ModelSpec& model,
                  const AugmentedStateSpace& space, const Vector& v, double t) {
    for (int k = 0; k < space.size(); ++k) {
        const int x = space.state_of(k);
        out.push_back({t, space.duration(space.level_of(k)), x, model.to_price(grid[x]), v[k]});
    }
}

}  // namespace

PriceResult price_option(const PricingConfig& cfg, bool full_surface) {
    cfg.validate();
    const auto t0 = Clock::now();
    PriceResult out;
    out.model = cfg.model.build();
    const ModelSpec& model = out.model;
    const ContractSpec contract = cfg.contract();

    if (model.coordinate == Coordinate::Log && cfg.range_lo && !(*cfg.range_lo > 0.0))
        throw std::invalid_argument("range_lo must be positive for a log-price model");
    const StateRange def = default_state_range(model, cfg.spot);
    const double lo = cfg.range_lo ? model.to_state(*cfg.range_lo) : def.lo;
    const double hi = cfg.range_hi ? model.to_state(*cfg.range_hi) : def.hi;
    out.grid = build_grid(lo, hi, barrier_state(contract, model), model.to_state(cfg.strike), cfg.n);
    const SpatialGrid& grid = out.grid;
    const Vector f = payoff_vector(contract, model, grid);
    const double x0 = model.to_state(cfg.spot);

    GeneratorOptions gopts;
    gopts.policy = cfg.rate_policy;
    const GeneratorMatrix g0 = build_generator(model, grid, 0.0, gopts);
    out.repaired_rows = g0.repaired_rows();
    GeneratorFn gen = [&](double t) { return t == 0.0 ? g0 : build_generator(model, grid, t, gopts); };
    const bool homogeneous = model.time_homogeneous;

    if (cfg.flavor == Flavor::DownIn) {
        if (cfg.perpetual()) {
            if (!homogeneous) throw std::invalid_argument("perpetual pricing needs a time-homogeneous model");
            auto res = price_perpetual_downin(g0, grid, f, cfg.window, cfg.rate, cfg.downin);
            out.price = grid.interpolate(res.price, x0);
            out.lcp_iterations = res.lcp.iterations;
            out.max_residual = res.lcp.residual;
            append_spatial(out.surface, grid, model, res.price, 0.0);
        } else {
            const TimeGrid time(cfg.dt, cfg.maturity);
            auto res = price_finite_downin(gen, homogeneous, grid, time, f, cfg.window, cfg.rate, cfg.downin);
            out.price = grid.interpolate(res.price(0, cfg.rate), x0);
            out.lcp_iterations = res.lcp_iterations;
            const int last = full_surface ? time.steps : 0;
            for (int s = 0; s <= last; ++s) append_spatial(out.surface, grid, model, res.price(s, cfg.rate), time.time(s));
        }
    } else {
        DownOutOptions opts = cfg.downout;
        if (cfg.perpetual()) {
            if (!homogeneous) throw std::invalid_argument("perpetual pricing needs a time-homogeneous model");
            auto res = price_perpetual_downout(g0, grid, f, cfg.window, cfg.dd, cfg.rate, opts);
            out.price = grid.interpolate(res.price(), x0);
            out.lcp_iterations = res.stats.lcp_iterations;
            out.max_residual = res.stats.max_residual;
            append_joint(out.surface, grid, model, res.space, res.values, 0.0);
        } else {
            opts.keep_surface = opts.keep_surface || full_surface;
            const TimeGrid time(cfg.dt, cfg.maturity);
            auto res = price_finite_downout(gen, homogeneous, grid, time, f, cfg.window, cfg.dd, cfg.rate, opts);
            out.price = grid.interpolate(res.price(), x0);
            out.lcp_iterations = res.stats.lcp_iterations;
            out.max_residual = res.stats.max_residual;
            for (std::size_t s = 0; s < res.surface.size(); ++s)
                append_joint(out.surface, grid, model, res.space, res.surface[s], time.time(static_cast<int>(s)));
        }
    }
    out.seconds = seconds_since(t0);
    return out;
}

void write_surface_csv(const PriceResult& r, Flavor flavor, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << std::setprecision(12);
    if (flavor == Flavor::DownIn) {
        os << "t,state,price\n";
        for (const auto& row : r.surface) os << row.t << ',' << row.state << ',' << row.value << '\n';
    } else {
        os << "t,d,state,price\n";
        for (const auto& row : r.surface)
            os << row.t << ',' << row.d << ',' << row.state << ',' << row.value << '\n';
    }
}

std::vector<double> richardson(const std::vector<std::pair<int, double>>& prices, int order) {
    if (prices.size() < 2) throw std::invalid_argument("richardson: need at least two grids");
    if (order < 1) throw std::invalid_argument("richardson: order must be positive");
    std::vector<double> out;
    out.reserve(prices.size() - 1);
    for (std::size_t i = 0; i + 1 < prices.size(); ++i) {
        const auto [n1, p1] = prices[i];
        const auto [n2, p2] = prices[i + 1];
        if (n1 == n2) throw std::invalid_argument("richardson: equal grid sizes");
        const double w1 = std::pow(static_cast<double>(n1), order);
        const double w2 = std::pow(static_cast<double>(n2), order);
        out.push_back((w2 * p2 - w1 * p1) / (w2 - w1));
    }
    return out;
}

void StudyConfig::validate() const {
    if (grids.empty()) throw std::invalid_argument("study needs at least one grid");
    for (std::size_t i = 1; i < grids.size(); ++i)
        if (grids[i] <= grids[i - 1]) throw std::invalid_argument("grid list must be strictly increasing");
    if (order < 1) throw std::invalid_argument("extrapolation order must be positive");
    if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
    PricingConfig probe = base;
    probe.n = grids.front();
    probe.validate();
}

std::vector<StudyRow> run_study(const StudyConfig& cfg) {
    cfg.validate();
    const std::size_t k = cfg.grids.size();
    std::vector<StudyRow> rows(k);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < k; i = next++) {
            StudyRow& row = rows[i];
            row.n = cfg.grids[i];
            PricingConfig pc = cfg.base;
            pc.n = row.n;
            const auto t0 = Clock::now();
            try {
                row.price = price_option(pc).price;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            row.seconds = seconds_since(t0);
        }
    };
    const int threads = std::min<int>(cfg.jobs, static_cast<int>(k));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    auto fill_errors = [&](double value, std::optional<double>& abs_err, std::optional<double>& rel_err) {
        if (!cfg.benchmark) return;
        abs_err = std::abs(value - *cfg.benchmark);
        rel_err = *abs_err / std::abs(*cfg.benchmark);
    };
    for (std::size_t i = 0; i < k; ++i) {
        StudyRow& row = rows[i];
        if (row.price) fill_errors(*row.price, row.abs_error, row.rel_error);
        if (i == 0 || !row.price || !rows[i - 1].price) continue;
        row.extrapolated = richardson({{rows[i - 1].n, *rows[i - 1].price}, {row.n, *row.price}}, cfg.order)[0];
        fill_errors(*row.extrapolated, row.extrapolated_abs_error, row.extrapolated_rel_error);
    }
    return rows;
}

namespace {

std::string opt(const std::optional<double>& v, int digits = 10) {
    if (!v) return "";
    std::ostringstream os;
    os << std::setprecision(digits) << *v;
    return os.str();
}

}  // namespace

void write_study_csv(const std::vector<StudyRow>& rows, std::ostream& out, bool include_timing) {
    out << "n,price,abs_err,rel_err";
    if (include_timing) out << ",time_s";
    out << ",extrapolated,extra_abs_err,extra_rel_err,error\n";
    for (const auto& r : rows) {
        out << r.n << ',' << opt(r.price) << ',' << opt(r.abs_error) << ',' << opt(r.rel_error);
        if (include_timing) out << ',' << opt(r.seconds, 4);
        out << ',' << opt(r.extrapolated) << ',' << opt(r.extrapolated_abs_error) << ','
            << opt(r.extrapolated_rel_error) << ',';
        if (!r.error.empty()) {
            std::string e = r.error;
            std::replace(e.begin(), e.end(), '"', '\'');
            out << '"' << e << '"';
        }
        out << '\n';
    }
}

void write_study_csv(const std::vector<StudyRow>& rows, const std::string& path, bool include_timing) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    write_study_csv(rows, os, include_timing);
}

void write_plot_data(const std::vector<StudyRow>& rows, std::ostream& out) {
    out << "n,log_n,abs_err,log_abs_err,extra_abs_err,log_extra_abs_err\n" << std::setprecision(10);
    for (const auto& r : rows) {
        if (!r.abs_error) continue;
        out << r.n << ',' << std::log(static_cast<double>(r.n)) << ',' << *r.abs_error << ','
            << std::log(std::max(*r.abs_error, 1e-300)) << ',';
        if (r.extrapolated_abs_error)
            out << *r.extrapolated_abs_error << ',' << std::log(std::max(*r.extrapolated_abs_error, 1e-300));
        else
            out << ',';
        out << '\n';
    }
}

// ------------------------------------------------------- benchmark tables

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CaseSpec {
    const char* option;
    Flavor flavor;
    bool perpetual;
    std::vector<int> grids;
    double benchmark;
    std::vector<double> paper;
};

PricingConfig table_base(const std::string& table, const CaseSpec& c) {
    PricingConfig p;
    p.flavor = c.flavor;
    p.maturity = c.perpetual ? kInf : 1.0;
    p.dt = 1.0 / 60.0;
    p.dd = 1.0 / 120.0;
    p.spot = 90.0;
    p.strike = 95.0;
    p.barrier = 90.0;
    p.window = 1.0 / 12.0;
    if (table == "bs") {
        p.model.kind = ModelKind::BlackScholes;
        p.model.sigma = 0.3;
        if (c.perpetual) {
            p.model.r_f = 0.1;
            p.model.dividend = 0.05;
            // A wide price-space range: the default upper end truncates the
            // continuation region of the perpetual call noticeably.
            p.range_lo = 0.0;
            p.range_hi = 7.0 * p.spot;
        } else if (c.flavor == Flavor::DownIn) {
            p.model.r_f = 0.05;
            p.model.dividend = 0.0;
        } else {
            p.model.r_f = 0.06;
            p.model.dividend = 0.1;
            p.model.sigma = 0.4;
            p.spot = 105.0;
            p.strike = 100.0;
            p.barrier = 95.0;
            p.window = 1.0 / 15.0;
            p.dd = 1.0 / 150.0;
        }
    } else if (table == "kou") {
        p.model.kind = ModelKind::Kou;
        p.model.r_f = 0.05;
        if (c.perpetual) {
            p.range_lo = p.spot / 10.0;
            p.range_hi = 16.0 * p.spot;
        }
    } else if (table == "vg") {
        p.model.kind = ModelKind::VarianceGamma;
        p.model.r_f = 0.05;
        // Central differencing of the VG drift produces negative rates on
        // every grid of the table; the one-sided scheme keeps them valid.
        p.rate_policy = RatePolicy::Upwind;
    } else {
        throw std::invalid_argument("unknown table '" + table + "' (expected bs, kou or vg)");
    }
    p.rate = p.model.r_f;
    return p;
}

std::vector<CaseSpec> table_specs(const std::string& table) {
    using F = Flavor;
    if (table == "bs")
        return {
            {"perpetual down-in", F::DownIn, true, {129, 161, 193, 225, 257}, 26.3239,
             {25.9747, 26.0946, 26.1658, 26.2087, 26.2346}},
            {"perpetual down-out", F::DownOut, true, {661, 793, 925, 1057, 1189}, 10.3882,
             {10.4574, 10.4341, 10.4217, 10.4137, 10.4083}},
            {"finite-maturity down-in", F::DownIn, false, {177, 193, 209, 225, 241}, 3.3483,
             {3.3169, 3.3230, 3.3275, 3.3309, 3.3333}},
            {"finite-maturity down-out", F::DownOut, false, {265, 397, 529, 661, 793}, 13.5126,
             {13.6015, 13.5501, 13.5332, 13.5256, 13.5216}},
        };
    if (table == "kou")
        return {
            {"perpetual down-in", F::DownIn, true, {97, 129, 161, 193, 225}, 65.0695,
             {64.7315, 64.8809, 64.9492, 64.9862, 65.0085}},
            {"perpetual down-out", F::DownOut, true, {397, 529, 661, 793, 925}, 15.3456,
             {15.6182, 15.4965, 15.4415, 15.4119, 15.3941}},
            {"finite-maturity down-in", F::DownIn, false, {161, 177, 193, 209, 225}, 4.7907,
             {4.7502, 4.7583, 4.7642, 4.7685, 4.7716}},
            {"finite-maturity down-out", F::DownOut, false, {529, 595, 661, 727, 793}, 9.0537,
             {9.1261, 9.1118, 9.1013, 9.0934, 9.0873}},
        };
    if (table == "vg")
        return {
            {"perpetual down-in", F::DownIn, true, {353, 385, 417, 449, 481}, 52.4163,
             {52.5464, 52.5314, 52.5183, 52.5070, 52.4972}},
            {"perpetual down-out", F::DownOut, true, {1849, 1915, 1981, 2047, 2113}, 20.7958,
             {20.7064, 20.7114, 20.7160, 20.7203, 20.7244}},
            {"finite-maturity down-in", F::DownIn, false, {353, 385, 417, 449, 481}, 1.1137,
             {1.0847, 1.0877, 1.0901, 1.0921, 1.0938}},
            {"finite-maturity down-out", F::DownOut, false, {1123, 1189, 1255, 1321, 1387}, 3.5011,
             {3.8158, 3.7957, 3.7777, 3.7614, 3.7467}},
        };
    throw std::invalid_argument("unknown table '" + table + "' (expected bs, kou or vg)");
}

std::optional<Tolerance> acceptance(const std::string& table, const CaseSpec& c) {
    const std::string opt = c.option;
    Tolerance t;
    if (table == "bs" && opt == "perpetual down-in") {
        t.raw_rel = 0.006;
        t.extrapolated_rel = 0.0015;
        t.seconds = 2.0;
    } else if (table == "bs" && opt == "perpetual down-out") {
        t.raw_rel = 0.004;
        t.extrapolated_rel = 0.001;
        t.seconds = 30.0;
    } else if (table == "bs" && opt == "finite-maturity down-in") {
        t.raw_rel = 0.01;
        t.extrapolated_rel = 0.003;
        t.seconds = 120.0;
    } else if (table == "bs" && opt == "finite-maturity down-out") {
        t.raw_rel = 0.002;
        t.extrapolated_rel = 0.0005;
        t.seconds = 300.0;
    } else if (table == "kou" && opt == "perpetual down-in") {
        t.raw_rel = 0.003;
        t.seconds = 10.0;
    } else if (table == "vg" && opt == "finite-maturity down-out") {
        t.extrapolated_rel = 0.01;
        t.halving_fallback = true;
        t.total_seconds = 900.0;
    } else {
        return std::nullopt;
    }
    return t;
}

std::string pct(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << 100.0 * v << '%';
    return os.str();
}

}  // namespace

std::vector<BenchmarkCase> paper_cases(const std::string& table) {
    std::vector<BenchmarkCase> out;
    for (const CaseSpec& c : table_specs(table)) {
        BenchmarkCase bc;
        bc.table = table;
        bc.option = c.option;
        bc.study.name = table + " " + c.option;
        bc.study.base = table_base(table, c);
        bc.study.grids = c.grids;
        bc.study.benchmark = c.benchmark;
        bc.study.benchmark_note = "published benchmark";
        bc.paper_ctmc = c.paper;
        bc.tolerance = acceptance(table, c);
        out.push_back(std::move(bc));
    }
    return out;
}

CellVerdict judge(const BenchmarkCase& c, const std::vector<StudyRow>& rows) {
    CellVerdict v;
    if (!c.tolerance) return v;
    v.checked = true;
    const Tolerance& t = *c.tolerance;
    std::ostringstream why;
    auto fail = [&](const std::string& msg) {
        v.passed = false;
        why << msg << "; ";
    };
    for (const auto& r : rows)
        if (!r.error.empty()) fail("n=" + std::to_string(r.n) + " failed: " + r.error);
    if (rows.empty() || !rows.back().price) {
        fail("no price on the finest grid");
        v.detail = why.str();
        return v;
    }
    const StudyRow& last = rows.back();
    if (t.raw_rel) {
        why << "raw " << pct(*last.rel_error) << " (limit " << pct(*t.raw_rel) << "); ";
        if (!(*last.rel_error <= *t.raw_rel)) fail("raw error above limit");
    }
    if (t.extrapolated_rel) {
        if (!last.extrapolated_rel_error) {
            fail("no extrapolated value");
        } else {
            why << "extrapolated " << pct(*last.extrapolated_rel_error) << " (limit " << pct(*t.extrapolated_rel)
                << "); ";
            if (!(*last.extrapolated_rel_error <= *t.extrapolated_rel)) {
                bool ok = t.halving_fallback;
                for (std::size_t i = 1; ok && i < rows.size(); ++i) {
                    const StudyRow& r = rows[i];
                    ok = r.extrapolated_abs_error && r.abs_error && rows[i - 1].abs_error &&
                         *r.extrapolated_abs_error <= 0.5 * *r.abs_error && *r.abs_error < *rows[i - 1].abs_error;
                }
                if (ok)
                    why << "fallback criterion met; ";
                else
                    fail("extrapolated error above limit");
            }
        }
    }
    if (t.seconds) {
        why << "time " << std::setprecision(3) << last.seconds << " s (limit " << *t.seconds << " s); ";
        if (!(last.seconds < *t.seconds)) fail("finest grid too slow");
    }
    if (t.total_seconds) {
        double total = 0.0;
        for (const auto& r : rows) total += r.seconds;
        why << "study time " << std::setprecision(4) << total << " s (limit " << *t.total_seconds << " s); ";
        if (!(total < *t.total_seconds)) fail("study too slow");
    }
    v.detail = why.str();
    return v;
}

bool reproduce_table(const std::string& table, std::ostream& out, int jobs, const std::string& csv_dir) {
    const auto cases = paper_cases(table);
    bool all_pass = true;
    out << "Table: " << table << '\n';
    for (const auto& c : cases) {
        StudyConfig cfg = c.study;
        cfg.jobs = jobs;
        const auto rows = run_study(cfg);
        out << '\n' << c.option << "\n";
        out << std::left << std::setw(6) << "grid" << std::setw(11) << "benchmark" << std::setw(11) << "paper"
            << std::setw(11) << "computed" << std::setw(10) << "rel.err" << std::setw(9) << "time/s" << std::setw(11)
            << "extra." << "rel.err\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            std::ostringstream line;
            line << std::fixed << std::left << std::setw(6) << r.n << std::setw(11) << std::setprecision(4)
                 << *cfg.benchmark << std::setw(11) << (i < c.paper_ctmc.size() ? c.paper_ctmc[i] : NAN);
            if (r.price)
                line << std::setw(11) << *r.price << std::setw(10) << pct(*r.rel_error);
            else
                line << std::setw(21) << "error";
            line << std::setw(9) << std::setprecision(2) << r.seconds;
            if (r.extrapolated)
                line << std::setw(11) << std::setprecision(4) << *r.extrapolated << pct(*r.extrapolated_rel_error);
            out << line.str() << '\n';
            if (!r.error.empty()) out << "  error: " << r.error << '\n';
        }
        const CellVerdict v = judge(c, rows);
        if (v.checked) {
            out << (v.passed ? "PASS" : "FAIL") << "  " << v.detail << '\n';
            all_pass = all_pass && v.passed;
        }
        if (!csv_dir.empty()) {
            std::filesystem::create_directories(csv_dir);
            std::string file = c.option;
            std::replace(file.begin(), file.end(), ' ', '_');
            write_study_csv(rows, csv_dir + "/" + table + "_" + file + ".csv");
        }
    }
    return all_pass;
}

}  // namespace parisian
