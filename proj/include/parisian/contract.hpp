#pragma once

#include "parisian/grid.hpp"
#include "parisian/models.hpp"
#include "parisian/types.hpp"

#include <functional>
#include <limits>
#include <string>

namespace parisian {

enum class Flavor { DownIn, DownOut };

std::string to_string(Flavor f);
Flavor parse_flavor(const std::string& name);

/// American Parisian contract. Barrier and payoff are quoted in price units;
/// pricers map them to the model coordinate.
struct ContractSpec {
    std::function<double(double price)> payoff;
    double barrier = 0.0;  ///< L
    double window = 0.0;   ///< D
    double maturity = std::numeric_limits<double>::infinity();  ///< T, +inf for perpetual
    double rate = 0.0;     ///< r
    Flavor flavor = Flavor::DownIn;

    bool perpetual() const { return !(maturity < std::numeric_limits<double>::infinity()); }
    void validate() const;
};

/// Call payoff max(S − K, 0).
std::function<double(double)> call_payoff(double strike);

ContractSpec call_contract(double strike, double barrier, double window, double maturity, double rate,
                           Flavor flavor);

/// Payoff evaluated on the grid, f(price(yᵢ)).
Vector payoff_vector(const ContractSpec& c, const ModelSpec& model, const SpatialGrid& grid);

/// Barrier in the model coordinate.
double barrier_state(const ContractSpec& c, const ModelSpec& model);

}  // namespace parisian
