#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/moea.hpp"

namespace coevo {

using WeightVector = std::array<double, kObjectives>;

/// Simplex-lattice weights with the smallest H giving at least `count` points, thinned to exactly
/// `count` by greedy farthest-point selection seeded with the simplex corners.
std::vector<WeightVector> simplex_lattice_weights(std::size_t count);
/// All C(H+2, 2) lattice points for divisions H.
std::vector<WeightVector> simplex_lattice(int divisions);

/// max_k w_k |f_k - z_k| with zero weights replaced by 1e-6.
double tchebycheff(const ObjectiveVector& f, const WeightVector& w, const ObjectiveVector& ideal);

struct EagdConfig {
    std::size_t population = 50;
    double crossover_rate = 1.0;
    /// Negative means 1/n.
    double mutation_rate = -1.0;
    int learning_generations = 8;
    double neighborhood_fraction = 0.10;
    std::size_t max_evaluations = 15000;
    std::uint64_t seed = 1;
    int stall_generations = 50;

    std::size_t neighborhood_size() const;
    void validate() const;
    nlohmann::json to_json() const;
    static EagdConfig from_json(const nlohmann::json& j);
};

/// Decomposition population guided by an unbounded external dominance archive. Subproblems whose
/// offspring recently entered the archive receive more offspring. Returns the external archive.
SearchResult eagd_run(const SearchProblem& problem, const EagdConfig& cfg, const GenerationCallback& on_generation = {});

}  // namespace coevo
