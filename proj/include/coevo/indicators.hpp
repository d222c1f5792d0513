#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/linalg.hpp"
#include "coevo/ohlcv.hpp"

namespace coevo {

/// Bars discarded at the start of every series before features are considered valid.
inline constexpr std::size_t kWarmupBars = 40;

enum class IndicatorKind {
    Open,
    High,
    Low,
    Close,
    MovingAverage,
    ExponentialMovingAverage,
    RelativeStrengthIndex,
    StochasticK,
    StochasticD,
    Macd,
    WilliamsR,
    PsychologicalLine,
    PriceOscillator,
    DirectionalUp,
    DirectionalDown,
    Bias,
    VolumeRatio,
    ARatio,
    BRatio,
    LowestLow,
    HighestHigh,
    MedianPrice,
    AverageTrueRange,
    RelativeDifference,
    Momentum,
    RateOfChange,
    UltimateOscillator,
    UlcerIndex,
};

/// One catalog column: an indicator family plus its period parameters (trading days).
struct IndicatorId {
    IndicatorKind kind = IndicatorKind::Close;
    std::array<int, 3> params{0, 0, 0};
    int param_count = 0;

    static IndicatorId plain(IndicatorKind k) { return {k, {0, 0, 0}, 0}; }
    static IndicatorId period(IndicatorKind k, int tau) { return {k, {tau, 0, 0}, 1}; }
    static IndicatorId pair(IndicatorKind k, int x, int y) { return {k, {x, y, 0}, 2}; }
    static IndicatorId triple(IndicatorKind k, int x, int y, int z) { return {k, {x, y, z}, 3}; }

    /// Short label such as "MA_5", "OSCP_5_10" or "+DIS_20".
    std::string name() const;
    std::string family() const;

    bool operator==(const IndicatorId&) const = default;
};

/// Ordered list of feature definitions; index order defines genome bit order.
class FeatureCatalog {
public:
    explicit FeatureCatalog(std::vector<IndicatorId> entries);

    /// The 68-column catalog:
    ///   0-3 O,H,L,C | 4-7 MA | 8-11 EMA | 12-15 RSI | 16-17 K | 18-19 D | 20 MACD
    ///   21-24 WR | 25-28 PSY | 29-34 OSCP | 35-38 +DIS | 39-42 -DIS | 43-46 BIAS
    ///   47 VR | 48 AR | 49 BR | 50 LL | 51 HH | 52 MP | 53 ATR | 54-57 RDP
    ///   58-61 MTM | 62-65 ROC | 66 UO | 67 Ulcer
    static const FeatureCatalog& standard();

    std::size_t size() const { return entries_.size(); }
    const IndicatorId& operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<IndicatorId>& entries() const { return entries_; }
    std::vector<std::string> names() const;

    /// Index of the entry with the given name; throws ValidationError if absent.
    std::size_t index_of(const std::string& name) const;

    /// [{"index": 1, "name": ..., "family": ..., "params": [...]}, ...] with 1-based indices.
    nlohmann::json to_json() const;

private:
    std::vector<IndicatorId> entries_;
};

/// Whole-series evaluation: element t uses bars 0..t only; NaN where the lookback is not yet filled.
std::vector<double> indicator_series(const OhlcvSeries& series, const IndicatorId& id);

/// Value of one feature on day t (t >= warmup). Computed on the prefix ending at t.
double compute_feature(const OhlcvSeries& series, const IndicatorId& id, std::size_t t,
                       std::size_t warmup = kWarmupBars);

/// Rows are days warmup..n-1, columns follow the catalog order.
RowMatrix compute_matrix(const OhlcvSeries& series, const FeatureCatalog& catalog,
                         std::size_t warmup = kWarmupBars);

}  // namespace coevo
