#include "coevo/decision.hpp"

#include <cmath>

#include "coevo/error.hpp"
#include "coevo/text.hpp"

namespace coevo {

void PreferenceSpec::validate() const {
    for (int r : ranks) {
        if (r < 1 || r > static_cast<int>(kObjectives)) throw ValidationError("objective ranks must be within [1, 3]");
    }
    if (!(intensity >= 1.0 && intensity <= 9.0)) throw ValidationError("intensity must be within [1, 9]");
}

nlohmann::json PreferenceSpec::to_json() const {
    return {{"ranks", {{"cv", ranks[0]}, {"c", ranks[1]}, {"pr", ranks[2]}}}, {"intensity", intensity}};
}

std::vector<std::string> PreferenceSpec::preset_names() { return {"O1", "O2", "O3", "O4", "O5"}; }

PreferenceSpec PreferenceSpec::preset(const std::string& name) {
    const std::string n = text::lower(name);
    if (n == "o1") return {{1, 1, 1}, 9.0};
    if (n == "o2") return {{1, 2, 3}, 9.0};
    if (n == "o3") return {{1, 2, 1}, 9.0};
    if (n == "o4") return {{2, 3, 1}, 9.0};
    if (n == "o5") return {{1, 3, 3}, 9.0};
    throw ValidationError("unknown preference preset '" + name + "' (expected O1..O5)");
}

std::array<int, kObjectives> PreferenceSpec::parse_ranks(const std::string& text) {
    std::array<int, kObjectives> out{0, 0, 0};
    for (auto part : text::split(text, ',')) {
        const auto kv = text::split(text::trim(part), '=');
        if (kv.size() != 2) throw ParseError("expected key=value in ranking '" + text + "'");
        const std::string key = text::lower(text::trim(kv[0]));
        double v = 0;
        if (!text::parse_double(text::trim(kv[1]), v) || v != std::floor(v)) {
            throw ParseError("rank for '" + key + "' must be an integer");
        }
        std::size_t idx = 0;
        if (key == "cv" || key == "e_cv") {
            idx = 0;
        } else if (key == "c") {
            idx = 1;
        } else if (key == "pr" || key == "e_pr") {
            idx = 2;
        } else {
            throw ParseError("unknown objective '" + key + "' (expected cv, c, pr)");
        }
        out[idx] = static_cast<int>(v);
    }
    for (int r : out) {
        if (r == 0) throw ParseError("ranking must give cv, c and pr");
    }
    return out;
}

PreferenceWeights preference_weights(const PreferenceSpec& spec) {
    spec.validate();
    constexpr double n = kObjectives;
    PreferenceWeights theta{};
    double total = 0.0;
    for (std::size_t i = 0; i < kObjectives; ++i) {
        double log_sum = 0.0;
        for (std::size_t j = 0; j < kObjectives; ++j) {
            const double exponent = (spec.ranks[j] - spec.ranks[i]) / (n - 1.0);
            log_sum += exponent * std::log(spec.intensity);
        }
        theta[i] = std::exp(log_sum / n);
        total += theta[i];
    }
    for (auto& t : theta) t /= total;
    return theta;
}

nlohmann::json TournamentResult::to_json() const {
    return {{"wins", wins}, {"phi", phi}, {"global_rank", global_rank}, {"selected", selected}, {"singleton", singleton}};
}

TournamentResult mtd_select(std::span<const ArchiveEntry> members, const PreferenceWeights& weights) {
    if (members.empty()) throw ValidationError("cannot select from an empty archive");
    for (double w : weights) {
        if (!(w >= 0)) throw ValidationError("preference weights must be non-negative");
    }
    const std::size_t n = members.size();
    TournamentResult r;
    r.wins.assign(n, {0, 0, 0});
    r.phi.assign(n, {0.0, 0.0, 0.0});
    r.global_rank.assign(n, 0.0);
    if (n == 1) {
        r.singleton = true;
        r.selected = 0;
        return r;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double product = 1.0;
        for (std::size_t p = 0; p < kObjectives; ++p) {
            int w = 0;
            for (std::size_t k = 0; k < n; ++k) {
                if (k != i && members[k].objectives[p] > members[i].objectives[p]) ++w;
            }
            r.wins[i][p] = w;
            r.phi[i][p] = static_cast<double>(w) / static_cast<double>(n - 1);
            product *= std::pow(r.phi[i][p], weights[p]);
        }
        r.global_rank[i] = std::pow(product, 1.0 / kObjectives);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
        const auto& a = members[i];
        const auto& b = members[best];
        if (r.global_rank[i] != r.global_rank[best]) {
            if (r.global_rank[i] > r.global_rank[best]) best = i;
        } else if (a.objectives.e_cv != b.objectives.e_cv) {
            if (a.objectives.e_cv < b.objectives.e_cv) best = i;
        } else if (a.objectives.c != b.objectives.c) {
            if (a.objectives.c < b.objectives.c) best = i;
        } else if (a.genome < b.genome) {
            best = i;
        }
    }
    r.selected = best;
    return r;
}

TournamentResult mtd_select(const ParetoArchive& archive, const PreferenceWeights& weights) {
    const auto members = archive.sorted();
    return mtd_select(members, weights);
}

}  // namespace coevo
