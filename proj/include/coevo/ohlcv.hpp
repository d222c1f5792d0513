#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "coevo/date.hpp"

namespace coevo {

struct OhlcvBar {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;

    bool operator==(const OhlcvBar&) const = default;
};

/// Daily bars with strictly increasing dates. Construction validates every bar.
class OhlcvSeries {
public:
    OhlcvSeries() = default;
    /// Sorts by date, then validates; throws ValidationError naming the offending date.
    explicit OhlcvSeries(std::vector<OhlcvBar> bars);

    std::size_t size() const { return bars_.size(); }
    bool empty() const { return bars_.empty(); }
    const OhlcvBar& operator[](std::size_t i) const { return bars_[i]; }
    const std::vector<OhlcvBar>& bars() const { return bars_; }

    /// First `count` bars.
    OhlcvSeries prefix(std::size_t count) const;

    /// Multiplies every price by `factor` (volume untouched).
    OhlcvSeries rescaled(double factor) const;

private:
    std::vector<OhlcvBar> bars_;
};

/// Throws ValidationError if the bar breaks the price invariants.
void validate_bar(const OhlcvBar& bar);

/// Reads Date,Open,High,Low,Close,Volume (header case-insensitive, any column order).
OhlcvSeries load_ohlcv_csv(const std::filesystem::path& path);
OhlcvSeries parse_ohlcv_csv(std::istream& in);

void write_ohlcv_csv(const std::filesystem::path& path, const OhlcvSeries& series);

}  // namespace coevo
