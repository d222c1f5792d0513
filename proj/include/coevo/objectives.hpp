#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <mutex>
#include <ostream>
#include <span>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/genome.hpp"
#include "coevo/market_data.hpp"
#include "coevo/neural.hpp"

namespace coevo {

inline constexpr std::size_t kObjectives = 3;

/// (E_cv, C, E_pr), all minimized.
struct ObjectiveVector {
    double e_cv = 1.0;
    double c = 1.0;
    double e_pr = 1.0;

    double operator[](std::size_t i) const { return i == 0 ? e_cv : (i == 1 ? c : e_pr); }
    double& operator[](std::size_t i) { return i == 0 ? e_cv : (i == 1 ? c : e_pr); }
    std::array<double, kObjectives> as_array() const { return {e_cv, c, e_pr}; }
    bool operator==(const ObjectiveVector&) const = default;

    nlohmann::json to_json() const;
    static ObjectiveVector from_json(const nlohmann::json& j);
};

struct EvalConfig {
    int cycles = 3;
    ScgConfig scg;
    std::uint64_t seed = 1;
    /// Worker threads for batch evaluation; 0 means hardware concurrency.
    unsigned threads = 1;

    void validate() const;
    nlohmann::json to_json() const;
    static EvalConfig from_json(const nlohmann::json& j);
};

/// Metrics from one training cycle.
struct CycleMetrics {
    double balanced_error_test = 1.0;
    double balanced_error_pr = 1.0;
    double accuracy_test = 0.0;
    double accuracy_pr = 0.0;
    double mcc_test = 0.0;
    double mcc_pr = 0.0;
    bool failed = false;

    nlohmann::json to_json() const;
};

struct Evaluation {
    ObjectiveVector objectives;
    std::vector<CycleMetrics> cycles;
    double wall_seconds = 0.0;

    /// Arithmetic mean over cycles; `failed` set if any cycle failed.
    CycleMetrics mean() const;
};

/// Seed for training cycle `cycle` of the genome identified by `genome_key`.
std::uint64_t cycle_seed(std::uint64_t run_seed, std::uint64_t genome_key, int cycle);

/// Trains `cycles` networks on d_train and scores them on d_test and d_pr. Never reads d_hold.
Evaluation evaluate_architecture(const Architecture& a, const DatasetSplits& splits, const SearchSpaceConfig& space,
                                 const EvalConfig& cfg, std::uint64_t genome_key);

/// Decode + evaluate a full-length genome.
ObjectiveVector evaluate(const Genome& g, const DatasetSplits& splits, const SearchSpaceConfig& space,
                         const EvalConfig& cfg);

using Decoder = std::function<Architecture(const Genome&)>;
using FitnessFunction = std::function<Evaluation(const Genome&)>;

/// Fitness over `splits`; `decoder` defaults to the full-genome decode. `splits` must outlive the result.
FitnessFunction architecture_fitness(const DatasetSplits& splits, SearchSpaceConfig space, EvalConfig cfg,
                                     Decoder decoder = {});

/// Memoizing, thread-parallel wrapper around a fitness function.
/// evaluations() counts cache misses only; hits are counted separately.
class CachedEvaluator {
public:
    explicit CachedEvaluator(FitnessFunction fn, unsigned threads = 1);

    Evaluation evaluate(const Genome& g);
    /// Results in input order. Distinct uncached genomes are evaluated in parallel.
    std::vector<Evaluation> evaluate_batch(std::span<const Genome> genomes);

    bool cached(const Genome& g) const;
    std::size_t evaluations() const;
    std::size_t cache_hits() const;

    /// JSON-lines log of every new evaluation. Wall time is included only when requested.
    void set_trace(std::ostream* out, bool include_wall_time = false);

private:
    FitnessFunction fn_;
    unsigned threads_;
    mutable std::mutex mutex_;
    std::unordered_map<Genome, Evaluation, GenomeHash> cache_;
    std::size_t evaluations_ = 0;
    std::size_t hits_ = 0;
    std::ostream* trace_ = nullptr;
    bool trace_wall_ = false;
};

struct ScalarizedConfig {
    double theta_e = 0.5;
    double theta_c = 0.5;
    double eps1 = 0.05;
    double eps2 = 0.05;
    double eps3 = 0.5;

    void validate() const;
    nlohmann::json to_json() const;
    static ScalarizedConfig from_json(const nlohmann::json& j);

    static ScalarizedConfig efficacy_over_complexity() { return {0.75, 0.25}; }
    static ScalarizedConfig balanced() { return {0.5, 0.5}; }
    static ScalarizedConfig complexity_over_efficacy() { return {0.25, 0.75}; }
};

/// 5 * [max(0, eps1 - mcc_test) + max(0, eps2 - mcc_pr) + max(0, e_pr - eps3)].
double penalty(double mcc_test, double mcc_pr, double e_pr, const ScalarizedConfig& cfg);

/// theta_E * E_test + theta_C * C + P, with E = 1 - accuracy averaged over cycles.
double scalarized_objective(const Evaluation& e, const ScalarizedConfig& cfg);
double scalarized_objective(const Genome& g, const DatasetSplits& splits, const ScalarizedConfig& cfg,
                            const SearchSpaceConfig& space, const EvalConfig& eval);

}  // namespace coevo
