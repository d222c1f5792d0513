#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/date.hpp"
#include "coevo/error.hpp"
#include "coevo/indicators.hpp"
#include "coevo/linalg.hpp"
#include "coevo/ohlcv.hpp"

namespace coevo {

/// Labeled patterns: one row of features per trading day plus the next-day movement.
struct PatternSet {
    RowMatrix features;
    std::vector<std::uint8_t> labels;  // 1 = close rises next day
    std::vector<Date> dates;
    std::vector<std::string> feature_names;

    std::size_t size() const { return labels.size(); }
    std::size_t feature_count() const { return static_cast<std::size_t>(features.cols()); }
    bool empty() const { return labels.empty(); }

    /// Copy restricted to the given columns, in the given order.
    PatternSet select_columns(std::span<const std::size_t> columns) const;
    /// Copy restricted to the given rows.
    PatternSet select_rows(std::span<const std::size_t> rows) const;

    /// Throws ValidationError if shapes disagree or a label is not 0/1.
    void validate() const;
};

/// Four half-open date windows; pre-period < train < test < hold.
struct SplitSpec {
    DateRange pr;
    DateRange train;
    DateRange test;
    DateRange hold;

    /// 2017-01-01 / 2019-01-01 / 2020-08-01 / 2021-01-01 / 2021-06-01.
    static SplitSpec standard();

    void validate() const;
    nlohmann::json to_json() const;
    static SplitSpec from_json(const nlohmann::json& j);
};

/// Thrown when the hold-out window is read while sealed.
class HoldoutAccessError : public Error {
public:
    using Error::Error;
};

/// The four date-defined splits. The hold-out split is read through holdout(), which
/// counts reads and throws once the splits are sealed.
class DatasetSplits {
public:
    DatasetSplits() = default;
    DatasetSplits(PatternSet pr, PatternSet train, PatternSet test, PatternSet hold);
    DatasetSplits(const DatasetSplits& other);
    DatasetSplits& operator=(const DatasetSplits& other);

    PatternSet d_pr;
    PatternSet d_train;
    PatternSet d_test;

    const PatternSet& holdout() const;
    std::size_t holdout_reads() const { return holdout_reads_.load(); }

    /// After sealing, holdout() throws HoldoutAccessError.
    void seal_holdout() { sealed_ = true; }
    void unseal_holdout() { sealed_ = false; }
    bool holdout_sealed() const { return sealed_; }

    /// Mutable access for column-wise transforms (standardization, projection). Not a read.
    PatternSet& holdout_storage() { return d_hold_; }
    const PatternSet& holdout_storage() const { return d_hold_; }

    std::size_t feature_count() const { return d_train.feature_count(); }

    /// Same transform applied to every split.
    template <typename F>
    DatasetSplits transformed(F&& f) const {
        DatasetSplits out(f(d_pr), f(d_train), f(d_test), f(d_hold_));
        out.sealed_ = sealed_;
        return out;
    }

private:
    PatternSet d_hold_;
    mutable std::atomic<std::size_t> holdout_reads_{0};
    bool sealed_ = false;
};

struct SplitCounts {
    std::size_t pr = 0, train = 0, test = 0, hold = 0, dropped = 0;
};

/// One pattern per day t in [warmup, n-2]; label(t) = 1 iff close(t+1) > close(t).
PatternSet build_patterns(const OhlcvSeries& series, const FeatureCatalog& catalog,
                          std::size_t warmup = kWarmupBars);

/// Assigns each pattern to the window containing its date; patterns outside all windows are dropped.
DatasetSplits split_by_dates(const PatternSet& patterns, const SplitSpec& spec, SplitCounts* counts = nullptr);

/// Per-column z-scoring with the sample (n-1) standard deviation.
class Standardizer {
public:
    static Standardizer fit(const PatternSet& train);

    bool fitted() const { return fitted_; }
    PatternSet apply(const PatternSet& patterns) const;
    DatasetSplits apply(const DatasetSplits& splits) const;

    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& sd() const { return sd_; }
    /// Columns with zero variance on the fit split; passed through unchanged.
    const std::vector<bool>& constant() const { return constant_; }

    nlohmann::json to_json() const;
    static Standardizer from_json(const nlohmann::json& j);

private:
    std::vector<double> mean_, sd_;
    std::vector<bool> constant_;
    bool fitted_ = false;
};

/// Writes pr.csv, train.csv, test.csv, hold.csv (date, features..., label) and manifest.json.
void save_splits(const std::filesystem::path& dir, const DatasetSplits& splits, const SplitSpec& spec,
                 const Standardizer& standardizer, const nlohmann::json& extra = {});

struct LoadedSplits {
    DatasetSplits splits;
    SplitSpec spec;
    Standardizer standardizer;
    nlohmann::json manifest;
};

LoadedSplits load_splits(const std::filesystem::path& dir);

void write_pattern_csv(const std::filesystem::path& path, const PatternSet& patterns);
PatternSet read_pattern_csv(const std::filesystem::path& path);

}  // namespace coevo
