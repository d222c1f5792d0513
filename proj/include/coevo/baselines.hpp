#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/moea.hpp"
#include "coevo/objectives.hpp"

namespace coevo {

enum class RuleOfThumb { Kolmogorov, Hush, Wang, Ripley, FletcherGoss, Huang };

std::string to_string(RuleOfThumb r);
RuleOfThumb rule_from_string(const std::string& s);
std::vector<RuleOfThumb> all_rules();

/// n_f inputs, m output classes, N training samples (Huang only).
struct RuleInputs {
    double n_features = 0;
    double outputs = 2;
    double samples = 0;
};

/// Hidden sizes (s1, s2), rounded to nearest with halves away from zero; s2 = 0 except Hush and Huang.
std::pair<int, int> rule_of_thumb(RuleOfThumb rule, const RuleInputs& in);

/// Rule sizes as a topology (both layers clamped to s_max) with the given activation.
Topology rule_topology(RuleOfThumb rule, const RuleInputs& in, const SearchSpaceConfig& space,
                       Activation activation = Activation::Tanh);

/// Architecture for a topology-only genome (topology bits only) over `dimension` fixed inputs.
Architecture topology_architecture(const Genome& g, std::size_t dimension, const SearchSpaceConfig& space);

/// Fitness for topology-only search on already-reduced splits; every column is an input.
FitnessFunction topology_fitness(const DatasetSplits& reduced, const SearchSpaceConfig& space, const EvalConfig& eval);

/// Search problem whose genomes are the n_layers * n_bits topology bits.
SearchProblem topology_problem(const SearchSpaceConfig& space, CachedEvaluator& evaluator);

/// NSGA-II over topology bits with the reduced inputs frozen.
SearchResult topology_only_search(const DatasetSplits& reduced, const SearchSpaceConfig& space, const Nsga2Config& cfg,
                                  const EvalConfig& eval);

struct ScalarizedGeneration {
    int generation = 0;
    std::size_t evaluations = 0;
    double best = 0.0;
    double mean = 0.0;
};

struct ScalarizedResult {
    Genome best;
    double best_value = 0.0;
    Evaluation best_evaluation;
    std::vector<ScalarizedGeneration> trace;
    std::size_t evaluations = 0;
};

/// Elitist single-objective GA on the scalarized objective with the same operators and budget as NSGA-II.
ScalarizedResult scalarized_search(const SearchProblem& problem, const ScalarizedConfig& scal, const Nsga2Config& ga);

}  // namespace coevo
