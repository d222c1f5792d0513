#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/linalg.hpp"
#include "coevo/market_data.hpp"

namespace coevo {

enum class ReductionMethod { Pca, Mrmr, Cfs };

std::string to_string(ReductionMethod m);
ReductionMethod reduction_method_from_string(const std::string& s);

/// Principal components of the training columns.
struct PcaModel {
    Vector mean;                     // per input column
    RowMatrix loadings;              // inputs x components, columns by descending eigenvalue
    std::vector<double> eigenvalues; // all eigenvalues, descending
    std::string warning;             // set when fewer components than requested were available

    std::size_t components() const { return static_cast<std::size_t>(loadings.cols()); }
    double explained_ratio() const;

    RowMatrix transform(const RowMatrix& x) const;
    RowMatrix inverse_transform(const RowMatrix& scores) const;
    PatternSet apply(const PatternSet& p) const;
    DatasetSplits apply(const DatasetSplits& s) const;

    nlohmann::json to_json() const;
    static PcaModel from_json(const nlohmann::json& j);
};

/// Keeps the smallest number of components whose cumulative variance reaches `variance_target`,
/// or exactly `count` components when count > 0. Components with near-zero variance are never kept.
PcaModel pca_fit(const PatternSet& train, double variance_target, std::size_t count = 0);

struct ReductionResult {
    ReductionMethod method = ReductionMethod::Mrmr;
    std::vector<std::size_t> features;  // subset methods; selection order
    std::optional<PcaModel> pca;
    std::vector<double> trace;          // scores per step, or cumulative explained variance

    /// Number of inputs the reduced data has.
    std::size_t dimension() const { return pca ? pca->components() : features.size(); }
    nlohmann::json to_json() const;
    static ReductionResult from_json(const nlohmann::json& j);
};

ReductionResult pca_reduce(const PatternSet& train, double variance_target, std::size_t count = 0);

inline constexpr int kDiscretizationBins = 10;

/// Equal-frequency bin codes in [0, bins); equal values always share a bin.
std::vector<int> equal_frequency_bins(std::span<const double> values, int bins = kDiscretizationBins);

/// Mutual information (nats) between two discrete codes.
double mutual_information(std::span<const int> a, std::span<const int> b);
double entropy(std::span<const int> a);
/// 2 I(a;b) / (H(a) + H(b)); 0 when both entropies vanish.
double symmetrical_uncertainty(std::span<const int> a, std::span<const int> b);

/// Greedy relevance-minus-mean-redundancy forward selection of k features.
ReductionResult mrmr_select(const PatternSet& train, std::size_t k);

/// Best-first forward search on the correlation-based merit, stopping after 5 non-improving expansions.
ReductionResult cfs_select(const PatternSet& train, int max_stale = 5);

}  // namespace coevo
