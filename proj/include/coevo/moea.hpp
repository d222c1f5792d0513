#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/genome.hpp"
#include "coevo/objectives.hpp"
#include "coevo/pareto.hpp"
#include "coevo/rng.hpp"

namespace coevo {

struct Individual {
    Genome genome;
    ObjectiveVector objectives;
    int rank = 0;
    double crowding = 0.0;
};

/// Fronts as index lists into `points`; front 0 is the non-dominated subset.
std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const ObjectiveVector> points);

/// Crowding distance of each member of `front` (same order). Extremes get +infinity; constant objectives are skipped.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> points, std::span<const std::size_t> front);

/// Sets rank and crowding for every member.
void assign_rank_and_crowding(std::vector<Individual>& pop);

/// Lower rank wins, then larger crowding; remaining ties are broken by a coin flip.
const Individual& crowding_tournament(const Individual& a, const Individual& b, Rng& rng);

std::pair<Genome, Genome> uniform_crossover(const Genome& p1, const Genome& p2, Rng& rng);
/// Uniform child, then every position where the parents agree flips with probability p_flip.
Genome nongeometric_crossover(const Genome& p1, const Genome& p2, Rng& rng, double p_flip);
void bitflip_mutation(Genome& g, double rate, Rng& rng);

/// Hamming distance between equal-length genomes.
std::size_t hamming(const Genome& a, const Genome& b);

/// What the engines search over.
struct SearchProblem {
    std::size_t genome_length = 0;
    /// Called on every new genome; may be empty.
    std::function<void(Genome&, Rng&)> repair;
    CachedEvaluator* evaluator = nullptr;

    /// Full co-evolution genome with feature-prefix repair.
    static SearchProblem coevolution(const SearchSpaceConfig& space, CachedEvaluator& evaluator);
    void validate() const;
};

struct GenerationStats {
    int generation = 0;
    std::size_t evaluations = 0;  // cumulative cache misses in this run
    std::size_t cache_hits = 0;   // cumulative
    ObjectiveVector best;         // per-objective minimum over the population
    ObjectiveVector mean;
    std::size_t front_size = 0;
    double hypervolume = 0.0;     // of the current non-dominated set, reference (1, 1, 1)

    static std::string csv_header();
    std::string csv_row() const;
};

using GenerationCallback = std::function<void(const GenerationStats&, std::span<const Individual>)>;

struct SearchResult {
    ParetoArchive archive;
    std::vector<Individual> population;
    std::vector<GenerationStats> generations;
    std::size_t evaluations = 0;
    std::size_t cache_hits = 0;
};

struct Nsga2Config {
    std::size_t population = 50;
    double crossover_rate = 0.9;
    double nongeometric_rate = 0.8;
    /// Negative means 1/n.
    double flip_probability = -1.0;
    /// Negative means 1/n.
    double mutation_rate = -1.0;
    std::size_t max_evaluations = 15000;
    std::uint64_t seed = 1;
    /// Stop after this many consecutive generations without a new evaluation.
    int stall_generations = 50;

    void validate() const;
    nlohmann::json to_json() const;
    static Nsga2Config from_json(const nlohmann::json& j);
};

SearchResult nsga2_run(const SearchProblem& problem, const Nsga2Config& cfg, const GenerationCallback& on_generation = {});

/// Uniform random genomes until the evaluation budget is spent; returns their non-dominated set.
SearchResult random_search(const SearchProblem& problem, std::size_t max_evaluations, std::uint64_t seed,
                           std::size_t batch = 50);

/// Keeps candidates in order while the number of distinct uncached genomes stays within `remaining`.
std::vector<Genome> within_budget(std::span<const Genome> candidates, const CachedEvaluator& evaluator,
                                  std::size_t remaining);

/// Statistics over a population; hypervolume uses the reference (1, 1, 1).
GenerationStats population_stats(std::span<const Individual> pop, int generation, std::size_t evaluations,
                                 std::size_t cache_hits);

}  // namespace coevo
