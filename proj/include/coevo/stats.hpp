#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace coevo {

/// rows = runs, columns = methods.
using MetricTable = std::vector<std::vector<double>>;

struct FriedmanResult {
    std::vector<double> mean_ranks;  // rank 1 = best
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t runs = 0;
    std::size_t methods = 0;

    nlohmann::json to_json() const;
};

/// Within-row ranks with ties averaged. Larger values rank better when `higher_is_better`.
std::vector<double> row_ranks(std::span<const double> row, bool higher_is_better);

/// Two-way analysis by ranks with the chi-square approximation (k - 1 degrees of freedom).
FriedmanResult friedman_test(const MetricTable& table, bool higher_is_better);

/// Two-sided p-values of each method against `control` from the rank z-statistic; the control is omitted.
std::vector<double> friedman_control_pvalues(const FriedmanResult& r, std::size_t control);

struct HommelResult {
    std::vector<double> adjusted;
    std::vector<bool> rejected;
    double alpha = 0.05;

    nlohmann::json to_json() const;
};

/// Hommel's adjusted p-values (same order as input) and rejections at `alpha`.
HommelResult hommel_apv(std::span<const double> p_values, double alpha = 0.05);

}  // namespace coevo
