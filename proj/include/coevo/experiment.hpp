#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/baselines.hpp"
#include "coevo/decision.hpp"
#include "coevo/eagd.hpp"
#include "coevo/market_data.hpp"
#include "coevo/moea.hpp"
#include "coevo/reduction.hpp"

namespace coevo {

enum class Algorithm { Nsga2, Eagd, Scalarized, TopologyOnly, Random };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct BaselineConfig {
    ReductionMethod reduction = ReductionMethod::Mrmr;
    std::size_t mrmr_features = 17;
    double pca_variance = 0.9999;
    Activation activation = Activation::Tanh;

    nlohmann::json to_json() const;
    static BaselineConfig from_json(const nlohmann::json& j);
};

struct RunConfig {
    std::string data;
    SplitSpec splits = SplitSpec::standard();
    SearchSpaceConfig space;
    Algorithm algorithm = Algorithm::Nsga2;
    Nsga2Config nsga2;
    EagdConfig eagd;
    ScalarizedConfig scalarized;
    BaselineConfig baseline;
    EvalConfig eval;
    int final_scg_iterations = 1000;
    int holdout_cycles = 1;
    std::size_t runs = 5;
    std::size_t max_evaluations = 2000;
    std::uint64_t seed = 1;
    std::vector<std::string> presets = PreferenceSpec::preset_names();

    RunConfig();
    void validate() const;
    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path);

    /// FNV-1a of the canonical JSON, as 16 hex digits.
    std::string hash() const;
    /// Seed of run k (0-based).
    std::uint64_t run_seed(std::size_t k) const { return seed + k; }
    /// Final-quality training settings.
    ScgConfig final_scg() const;
};

/// Builds patterns, splits by date and standardizes on d_train.
struct PreparedData {
    DatasetSplits splits;
    Standardizer standardizer;
    SplitCounts counts;
};
PreparedData prepare_data(const OhlcvSeries& series, const SplitSpec& spec);

/// Column subset or PCA projection of every split.
DatasetSplits reduce_splits(const DatasetSplits& splits, const ReductionResult& reduction);
ReductionResult fit_reduction(const DatasetSplits& splits, const BaselineConfig& cfg);

/// Architecture for an archive genome: full decode, or topology bits over the reduced inputs.
Architecture architecture_for(const Genome& g, const SearchSpaceConfig& space, std::size_t reduced_dimension = 0);

struct SeedOutcome {
    std::uint64_t seed = 0;
    SearchResult result;
    std::optional<ScalarizedResult> scalarized;
};

struct SearchOutcome {
    Algorithm algorithm = Algorithm::Nsga2;
    std::vector<SeedOutcome> seeds;
    ParetoArchive merged;
    std::optional<ReductionResult> reduction;
};

/// Runs cfg.runs independent seeds of `algorithm` and merges their archives.
/// Topology-only runs use cfg.baseline to reduce inputs first.
SearchOutcome run_search(const DatasetSplits& splits, const RunConfig& cfg, Algorithm algorithm,
                         std::ostream* trace = nullptr, bool trace_wall_time = false);

/// Search for one seed; `reduced` must be given for topology-only.
SeedOutcome run_seed(const DatasetSplits& splits, const RunConfig& cfg, Algorithm algorithm, std::uint64_t seed,
                     const DatasetSplits* reduced = nullptr, std::ostream* trace = nullptr, bool trace_wall = false);

struct HoldoutMetrics {
    double accuracy = 0.0;
    double mcc = 0.0;
    double balanced_error = 1.0;
    std::size_t patterns = 0;

    nlohmann::json to_json() const;
};

/// Retrains on d_train with the final-quality budget and scores d_hold. Reads the hold-out split.
HoldoutMetrics holdout_evaluate(const Architecture& a, const DatasetSplits& splits, const RunConfig& cfg,
                                std::uint64_t seed);

struct RuleBaselineRow {
    RuleOfThumb rule;
    Architecture architecture;
    double complexity = 0.0;
    CycleMetrics metrics;  // d_test / d_pr
};

/// Every rule of thumb over the given (possibly reduced) inputs, trained with the final budget.
std::vector<RuleBaselineRow> run_rule_baselines(const DatasetSplits& reduced, const RunConfig& cfg, std::uint64_t seed);

struct SelectionRecord {
    std::string name;
    PreferenceSpec preference;
    PreferenceWeights weights{};
    TournamentResult tournament;
    std::vector<ArchiveEntry> members;  // order used by the tournament
    ArchiveEntry selected;

    nlohmann::json to_json(const SearchSpaceConfig& space, std::size_t reduced_dimension) const;
};

SelectionRecord select_from_archive(const ParetoArchive& archive, const std::string& name, const PreferenceSpec& pref);

/// Layout under a workspace directory.
struct Workspace {
    std::filesystem::path root;

    std::filesystem::path data_dir() const { return root / "data"; }
    std::filesystem::path run_dir(const std::string& hash, Algorithm a) const {
        return root / "runs" / hash / to_string(a);
    }
    std::filesystem::path index_file(Algorithm a) const { return root / "index" / (to_string(a) + ".json"); }
    std::filesystem::path baseline_dir(const std::string& hash) const { return root / "baselines" / hash; }
};

/// "# config_hash=<hash> seed=<seed>".
std::string provenance_comment(const std::string& hash, std::uint64_t seed);

/// Writes seed-k/{archive.jsonl, generations.csv}, merged/archive.jsonl, reduction.json and the index entry.
std::filesystem::path write_search_outputs(const Workspace& ws, const RunConfig& cfg, const SearchOutcome& outcome);

struct StoredRun {
    std::filesystem::path dir;
    Algorithm algorithm = Algorithm::Nsga2;
    std::string config_hash;
    RunConfig config;
    ParetoArchive merged;
    std::vector<ParetoArchive> per_seed;
    std::optional<ReductionResult> reduction;
};

/// Loads the latest search of `algorithm`; throws UsageError naming the search subcommand when missing.
StoredRun load_search(const Workspace& ws, Algorithm algorithm);

/// Writes JSON with a trailing newline; keys sorted (nlohmann default).
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace coevo
