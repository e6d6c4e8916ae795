#include "parisian/config.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace parisian {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void flatten(const nlohmann::json& j, const std::string& prefix, ConfigMap& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array()) {
        std::string joined;
        for (const auto& e : j) {
            if (!joined.empty()) joined += ',';
            joined += e.is_string() ? e.get<std::string>() : e.dump();
        }
        out[prefix] = joined;
    } else if (j.is_string()) {
        out[prefix] = j.get<std::string>();
    } else if (j.is_null()) {
        out[prefix] = "";
    } else {
        out[prefix] = j.dump();
    }
}

double to_double(const std::string& key, const std::string& v) {
    if (v == "inf" || v == "infinity" || v == "perpetual") return std::numeric_limits<double>::infinity();
    // Accept simple fractions such as 1/12.
    const auto slash = v.find('/');
    try {
        if (slash != std::string::npos)
            return std::stod(v.substr(0, slash)) / std::stod(v.substr(slash + 1));
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not a number: '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != static_cast<int>(d)) throw std::invalid_argument("config key '" + key + "': not an integer: " + v);
    return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config key '" + key + "': not a boolean: " + v);
}

struct Key {
    const char* name;
    const char* help;
    std::function<void(StudyConfig&, const std::string& key, const std::string& v)> set;
};

template <class F>
Key num(const char* name, const char* help, F field) {
    return {name, help, [field](StudyConfig& s, const std::string& k, const std::string& v) {
                field(s) = to_double(k, v);
            }};
}

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        {"name", "study name", [](StudyConfig& s, const std::string&, const std::string& v) { s.name = v; }},
        {"model", "bs, kou or vg",
         [](StudyConfig& s, const std::string&, const std::string& v) { s.base.model.kind = parse_model_kind(v); }},
        num("r_f", "risk-free rate of the model", [](StudyConfig& s) -> double& { return s.base.model.r_f; }),
        num("dividend", "dividend yield", [](StudyConfig& s) -> double& { return s.base.model.dividend; }),
        num("sigma", "volatility (bs, and the diffusion part of kou)",
            [](StudyConfig& s) -> double& { return s.base.model.sigma; }),
        num("kou.lambda", "jump intensity", [](StudyConfig& s) -> double& { return s.base.model.kou.lambda; }),
        num("kou.eta_plus", "upward jump rate", [](StudyConfig& s) -> double& { return s.base.model.kou.eta_plus; }),
        num("kou.eta_minus", "downward jump rate",
            [](StudyConfig& s) -> double& { return s.base.model.kou.eta_minus; }),
        num("kou.p_plus", "upward jump probability",
            [](StudyConfig& s) -> double& { return s.base.model.kou.p_plus; }),
        num("kou.p_minus", "downward jump probability",
            [](StudyConfig& s) -> double& { return s.base.model.kou.p_minus; }),
        num("vg.sigma", "VG volatility", [](StudyConfig& s) -> double& { return s.base.model.vg.sigma; }),
        num("vg.nu", "VG variance rate", [](StudyConfig& s) -> double& { return s.base.model.vg.nu; }),
        num("vg.theta", "VG drift of the subordinated Brownian motion",
            [](StudyConfig& s) -> double& { return s.base.model.vg.theta; }),
        num("spot", "initial price S0", [](StudyConfig& s) -> double& { return s.base.spot; }),
        num("strike", "strike K", [](StudyConfig& s) -> double& { return s.base.strike; }),
        num("barrier", "barrier L", [](StudyConfig& s) -> double& { return s.base.barrier; }),
        num("window", "Parisian window D", [](StudyConfig& s) -> double& { return s.base.window; }),
        num("maturity", "maturity T, or inf for perpetual", [](StudyConfig& s) -> double& { return s.base.maturity; }),
        num("rate", "discount rate r", [](StudyConfig& s) -> double& { return s.base.rate; }),
        {"flavor", "down-in or down-out",
         [](StudyConfig& s, const std::string&, const std::string& v) { s.base.flavor = parse_flavor(v); }},
        {"n", "grid size for a single price",
         [](StudyConfig& s, const std::string& k, const std::string& v) { s.base.n = to_int(k, v); }},
        num("dt", "time step", [](StudyConfig& s) -> double& { return s.base.dt; }),
        num("dd", "duration step (down-out)", [](StudyConfig& s) -> double& { return s.base.dd; }),
        {"range_lo", "lower grid end in price units",
         [](StudyConfig& s, const std::string& k, const std::string& v) { s.base.range_lo = to_double(k, v); }},
        {"range_hi", "upper grid end in price units",
         [](StudyConfig& s, const std::string& k, const std::string& v) { s.base.range_hi = to_double(k, v); }},
        {"rate_policy", "strict, clamp or upwind",
         [](StudyConfig& s, const std::string&, const std::string& v) { s.base.rate_policy = parse_rate_policy(v); }},
        {"solver", "down-out solver: reduced or full",
         [](StudyConfig& s, const std::string&, const std::string& v) {
             s.base.downout.solver = parse_downout_solver(v);
         }},
        {"dense_lcp", "lemke, psor or policy",
         [](StudyConfig& s, const std::string&, const std::string& v) {
             s.base.downin.dense_lcp = parse_lcp_method(v);
             s.base.downout.dense_lcp = parse_lcp_method(v);
         }},
        {"full_lcp", "down-out full system method: policy or psor",
         [](StudyConfig& s, const std::string&, const std::string& v) {
             s.base.downout.full_lcp = parse_lcp_method(v);
         }},
        {"expm_steps", "substeps of the kernel exponentials, 0 = automatic",
         [](StudyConfig& s, const std::string& k, const std::string& v) { s.base.downin.expm_steps = to_int(k, v); }},
        {"fast_path", "restrict kernels to reachable columns",
         [](StudyConfig& s, const std::string& k, const std::string& v) { s.base.downin.fast_path = to_bool(k, v); }},
        {"discount_vanilla", "discount the vanilla slices per tick",
         [](StudyConfig& s, const std::string& k, const std::string& v) {
             s.base.downin.discount_vanilla = to_bool(k, v);
         }},
        {"grids", "comma-separated grid sizes of a study",
         [](StudyConfig& s, const std::string& k, const std::string& v) {
             s.grids.clear();
             std::stringstream ss(v);
             std::string item;
             while (std::getline(ss, item, ','))
                 if (!trim(item).empty()) s.grids.push_back(to_int(k, trim(item)));
         }},
        {"benchmark", "reference price for the error columns",
         [](StudyConfig& s, const std::string& k, const std::string& v) {
             if (v.empty())
                 s.benchmark.reset();
             else
                 s.benchmark = to_double(k, v);
         }},
        {"benchmark_note", "where the benchmark comes from",
         [](StudyConfig& s, const std::string&, const std::string& v) { s.benchmark_note = v; }},
        {"order", "Richardson order",
         [](StudyConfig& s, const std::string& k, const std::string& v) { s.order = to_int(k, v); }},
        {"jobs", "concurrent grids",
         [](StudyConfig& s, const std::string& k, const std::string& v) { s.jobs = to_int(k, v); }},
        {"seed", "seed recorded with the study",
         [](StudyConfig& s, const std::string& k, const std::string& v) {
             s.seed = static_cast<std::uint64_t>(to_double(k, v));
         }},
    };
    return table;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap out;
    const std::string body = trim(text);
    if (!body.empty() && body.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
        }
        flatten(j, "", out);
        return out;
    }
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

ConfigMap read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void apply_config(const ConfigMap& cfg, StudyConfig& study) {
    for (const auto& [k, v] : cfg) {
        bool found = false;
        for (const Key& key : keys()) {
            if (k != key.name) continue;
            key.set(study, k, v);
            found = true;
            break;
        }
        if (!found) throw std::invalid_argument("unknown config key '" + k + "'");
    }
}

std::string config_keys_help() {
    std::ostringstream os;
    for (const Key& k : keys()) os << "  " << k.name << ": " << k.help << '\n';
    return os.str();
}

}  // namespace parisian
