// Command-line front end: single prices, convergence studies, benchmark
// tables and the oracle suites.

#include "parisian/config.hpp"
#include "parisian/study.hpp"
#include "parisian/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

using namespace parisian;

namespace {

// Flags shared by `price` and `study`. Each one is stored as a string and
// applied through the same key table as config files, so a flag overrides
// the file value of the same name.
struct CommonFlags {
    std::string config_path;
    std::string preset;
    std::map<std::string, std::string> values;
    bool clamp_rates = false;

    void add(CLI::App* app) {
        app->add_option("--config", config_path, "key = value or JSON config file");
        app->add_option("--preset", preset,
                        "start from a benchmark case: <bs|kou|vg>-<pdi|pdo|fdi|fdo>, e.g. bs-pdi");
        const std::pair<const char*, const char*> flags[] = {
            {"model", "bs, kou or vg"},
            {"flavor", "down-in or down-out"},
            {"maturity", "maturity in years, or inf for perpetual"},
            {"n", "grid size"},
            {"dt", "time step"},
            {"dd", "duration step (down-out)"},
            {"spot", "initial price"},
            {"strike", "strike"},
            {"barrier", "barrier"},
            {"window", "Parisian window D"},
            {"rate", "discount rate"},
            {"r_f", "model risk-free rate"},
            {"dividend", "dividend yield"},
            {"sigma", "volatility"},
            {"range_lo", "lower grid end (price units)"},
            {"range_hi", "upper grid end (price units)"},
            {"rate_policy", "strict, clamp or upwind"},
            {"solver", "down-out solver: reduced or full"},
            {"dense_lcp", "lemke, psor or policy"},
            {"expm_steps", "kernel exponential substeps (0 = automatic)"},
        };
        for (const auto& [key, help] : flags) {
            std::string name = std::string("--") + key;
            std::replace(name.begin(), name.end(), '_', '-');
            app->add_option_function<std::string>(
                name, [this, k = std::string(key)](const std::string& v) { values[k] = v; }, help);
        }
        app->add_flag("--clamp-rates", clamp_rates, "zero negative rates instead of failing");
    }

    StudyConfig resolve() const {
        StudyConfig s;
        if (!preset.empty()) s = preset_case(preset);
        if (!config_path.empty()) apply_config(read_config_file(config_path), s);
        ConfigMap extra(values.begin(), values.end());
        if (clamp_rates) extra["rate_policy"] = "clamp";
        apply_config(extra, s);
        return s;
    }

    static StudyConfig preset_case(const std::string& name) {
        const auto dash = name.find('-');
        if (dash == std::string::npos) throw std::invalid_argument("preset must look like bs-pdi");
        const std::string table = name.substr(0, dash);
        const std::string code = name.substr(dash + 1);
        const std::map<std::string, int> index = {{"pdi", 0}, {"pdo", 1}, {"fdi", 2}, {"fdo", 3}};
        const auto it = index.find(code);
        if (it == index.end()) throw std::invalid_argument("preset option must be pdi, pdo, fdi or fdo");
        auto cases = paper_cases(table);
        StudyConfig s = cases.at(static_cast<std::size_t>(it->second)).study;
        s.base.n = s.grids.back();
        return s;
    }
};

int run_price(const CommonFlags& flags, const std::string& dump_generator, const std::string& surface_path) {
    const StudyConfig s = flags.resolve();
    const PricingConfig& cfg = s.base;
    const PriceResult r = price_option(cfg, !surface_path.empty());
    std::cout << "model,flavor,maturity,n,spot,price,time_s,repaired_rows\n"
              << to_string(cfg.model.kind) << ',' << to_string(cfg.flavor) << ','
              << (cfg.perpetual() ? std::string("inf") : std::to_string(cfg.maturity)) << ',' << cfg.n << ','
              << cfg.spot << ',' << std::setprecision(10) << r.price << ',' << std::setprecision(4) << r.seconds << ','
              << r.repaired_rows << '\n';
    if (!dump_generator.empty()) {
        GeneratorOptions go;
        go.policy = cfg.rate_policy;
        build_generator(r.model, r.grid, 0.0, go).write_csv(dump_generator);
    }
    if (!surface_path.empty()) write_surface_csv(r, cfg.flavor, surface_path);
    return 0;
}

int run_study_verb(const CommonFlags& flags, const std::string& grids, std::optional<double> benchmark, int order,
                   int jobs, const std::string& out_path, const std::string& plot_path, bool no_timing) {
    StudyConfig s = flags.resolve();
    if (!grids.empty()) apply_config({{"grids", grids}}, s);
    if (benchmark) s.benchmark = benchmark;
    if (order > 0) s.order = order;
    s.jobs = jobs;
    if (s.grids.empty()) throw std::invalid_argument("study needs --grids or a preset");
    const auto rows = run_study(s);
    if (out_path.empty()) {
        write_study_csv(rows, std::cout, !no_timing);
    } else {
        write_study_csv(rows, out_path, !no_timing);
    }
    if (!plot_path.empty()) {
        std::ofstream os(plot_path);
        if (!os) throw std::runtime_error("cannot open " + plot_path);
        write_plot_data(rows, os);
    }
    for (const auto& r : rows)
        if (!r.error.empty()) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"American Parisian option pricing by CTMC approximation"};
    app.require_subcommand(1);

    CommonFlags price_flags;
    std::string dump_generator, surface_path;
    auto* price = app.add_subcommand("price", "price one contract");
    price_flags.add(price);
    price->add_option("--dump-generator", dump_generator, "write the spatial generator as i,j,rate CSV");
    price->add_option("--full-surface", surface_path, "write every price slice as CSV");

    CommonFlags study_flags;
    std::string grids, out_path, plot_path;
    std::optional<double> benchmark;
    int order = 0, jobs = 1;
    bool no_timing = false;
    auto* study = app.add_subcommand("study", "convergence study over grid sizes");
    study_flags.add(study);
    study->add_option("--grids", grids, "comma-separated grid sizes");
    study->add_option("--benchmark", benchmark, "reference price");
    study->add_option("--order", order, "Richardson order (default 2)");
    study->add_option("--jobs", jobs, "grids priced concurrently")->check(CLI::PositiveNumber);
    study->add_option("--out", out_path, "CSV output path (default stdout)");
    study->add_option("--plot", plot_path, "write log-log error series as CSV");
    study->add_flag("--no-timing", no_timing, "omit the wall-clock column");

    std::string table;
    std::string csv_dir;
    int table_jobs = 1;
    auto* repro = app.add_subcommand("reproduce-table", "rerun a benchmark table and check tolerances");
    repro->add_option("table", table, "bs, kou or vg")->required()->check(CLI::IsMember({"bs", "kou", "vg"}));
    repro->add_option("--jobs", table_jobs, "grids priced concurrently")->check(CLI::PositiveNumber);
    repro->add_option("--csv-dir", csv_dir, "also write one CSV per option type here");

    std::string suite;
    std::uint64_t seed = 20240601;
    long paths = 1'000'000;
    auto* verify = app.add_subcommand("verify", "run an oracle suite");
    verify->add_option("--suite", suite, "lcp, kernels or dp")->required()->check(
        CLI::IsMember({"lcp", "kernels", "dp"}));
    verify->add_option("--seed", seed, "random seed");
    verify->add_option("--paths", paths, "simulated paths per kernel row");

    auto* keys = app.add_subcommand("config-keys", "list the keys accepted in config files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*price) return run_price(price_flags, dump_generator, surface_path);
        if (*study)
            return run_study_verb(study_flags, grids, benchmark, order, jobs, out_path, plot_path, no_timing);
        if (*repro) return reproduce_table(table, std::cout, table_jobs, csv_dir) ? 0 : 1;
        if (*verify) {
            bool ok = true;
            for (const auto& r : run_verify_suite(suite, seed, paths)) {
                print_report(r, std::cout);
                ok = ok && r.passed();
            }
            return ok ? 0 : 1;
        }
        if (*keys) {
            std::cout << config_keys_help();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
