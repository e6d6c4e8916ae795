#include "parisian/contract.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace parisian {

std::string to_string(Flavor f) { return f == Flavor::DownIn ? "down-in" : "down-out"; }

Flavor parse_flavor(const std::string& name) {
    if (name == "down-in" || name == "in") return Flavor::DownIn;
    if (name == "down-out" || name == "out") return Flavor::DownOut;
    throw std::invalid_argument("unknown flavor '" + name + "'");
}

void ContractSpec::validate() const {
    if (!payoff) throw std::invalid_argument("contract: payoff missing");
    if (!(barrier > 0.0)) throw std::invalid_argument("contract: barrier must be positive");
    if (!(window > 0.0)) throw std::invalid_argument("contract: window D must be positive");
    if (!(maturity > 0.0)) throw std::invalid_argument("contract: maturity must be positive");
    if (!(rate >= 0.0)) throw std::invalid_argument("contract: rate must be nonnegative");
    if (perpetual() && !(rate > 0.0)) throw std::invalid_argument("contract: perpetual contracts need r > 0");
}

std::function<double(double)> call_payoff(double strike) {
    return [strike](double s) { return std::max(s - strike, 0.0); };
}

ContractSpec call_contract(double strike, double barrier, double window, double maturity, double rate,
                           Flavor flavor) {
    ContractSpec c;
    c.payoff = call_payoff(strike);
    c.barrier = barrier;
    c.window = window;
    c.maturity = maturity;
    c.rate = rate;
    c.flavor = flavor;
    c.validate();
    return c;
}

Vector payoff_vector(const ContractSpec& c, const ModelSpec& model, const SpatialGrid& grid) {
    Vector f(grid.size());
    for (int i = 0; i < grid.size(); ++i) f[i] = c.payoff(model.to_price(grid[i]));
    return f;
}

double barrier_state(const ContractSpec& c, const ModelSpec& model) { return model.to_state(c.barrier); }

}  // namespace parisian
