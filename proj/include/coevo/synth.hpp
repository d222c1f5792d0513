#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/date.hpp"
#include "coevo/ohlcv.hpp"

namespace coevo {

/// Random-walk market whose next-day direction is a noisy linear rule on a few catalog features.
struct SynthSpec {
    Date start{2016, 9, 1};
    Date end{2021, 6, 1};  // exclusive; bars on weekdays only
    std::vector<std::string> relevant{"VR_10", "AR_20", "UO_10_20_30", "Ulcer_14", "WR_10"};
    /// Empty means all ones. The default rule is contrarian so the simulated regime stays stationary.
    std::vector<double> weights{-1.0, -1.0, -1.0, 1.0, -1.0};
    /// Probability that a label is replaced by a fair coin flip.
    double noise = 0.3;
    /// Standard deviation of daily log returns.
    double volatility = 0.01;
    double initial_price = 100.0;

    void validate() const;
    nlohmann::json to_json() const;
    static SynthSpec from_json(const nlohmann::json& j);
};

struct SynthResult {
    OhlcvSeries series;
    std::vector<std::size_t> relevant;  // 0-based catalog indices
    std::vector<double> weights;
    std::vector<double> means;          // standardization used by the planted rule
    std::vector<double> sds;
    double up_fraction = 0.0;

    nlohmann::json manifest(const SynthSpec& spec, std::uint64_t seed) const;
};

/// Throws ValidationError for an infeasible spec, including a planted rule whose labels are
/// almost all one class.
SynthResult synth_generate(const SynthSpec& spec, std::uint64_t seed);

}  // namespace coevo
