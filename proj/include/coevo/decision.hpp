#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/pareto.hpp"

namespace coevo {

/// Objective ranking O = [O_cv, O_C, O_pr] and intensity I on the 1..9 scale.
struct PreferenceSpec {
    std::array<int, kObjectives> ranks{1, 1, 1};
    double intensity = 9.0;

    void validate() const;
    nlohmann::json to_json() const;

    /// "O1".."O5" with I = 9.
    static PreferenceSpec preset(const std::string& name);
    static std::vector<std::string> preset_names();
    /// Parses "cv=1,c=2,pr=3".
    static std::array<int, kObjectives> parse_ranks(const std::string& text);
};

using PreferenceWeights = std::array<double, kObjectives>;

/// Row geometric means of the multiplicative preference matrix, normalized to sum 1.
PreferenceWeights preference_weights(const PreferenceSpec& spec);

struct TournamentResult {
    std::vector<std::array<int, kObjectives>> wins;
    std::vector<std::array<double, kObjectives>> phi;
    std::vector<double> global_rank;
    std::size_t selected = 0;
    bool singleton = false;

    nlohmann::json to_json() const;
};

/// Multi-criteria tournament over the given members (in order).
/// Ties in global rank go to lower e_cv, then lower c, then the lexicographically smaller genome.
TournamentResult mtd_select(std::span<const ArchiveEntry> members, const PreferenceWeights& weights);
TournamentResult mtd_select(const ParetoArchive& archive, const PreferenceWeights& weights);

}  // namespace coevo
