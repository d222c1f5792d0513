#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "coevo/date.hpp"
#include "coevo/market_data.hpp"
#include "coevo/ohlcv.hpp"
#include "coevo/rng.hpp"

namespace fixture {

/// Weekday bars of a log-normal random walk with consistent high/low.
inline coevo::OhlcvSeries random_series(std::uint64_t seed, std::size_t n, coevo::Date start = {2015, 1, 5}) {
    coevo::Rng rng(seed);
    std::vector<coevo::OhlcvBar> bars;
    double close = 100.0;
    coevo::Date d = start;
    while (bars.size() < n) {
        if (d.is_weekday()) {
            coevo::OhlcvBar b;
            b.date = d;
            b.open = close * std::exp(0.005 * rng.normal());
            close = close * std::exp(0.01 * rng.normal());
            b.close = close;
            b.high = std::max(b.open, b.close) * (1.0 + 0.01 * rng.uniform());
            b.low = std::min(b.open, b.close) * (1.0 - 0.01 * rng.uniform());
            b.volume = std::round(1000.0 + 1000.0 * rng.uniform());
            bars.push_back(b);
        }
        d = d.next_day();
    }
    return coevo::OhlcvSeries(std::move(bars));
}

/// Bars with the given closes; open = previous close, high/low bracket both.
inline coevo::OhlcvSeries series_from_closes(const std::vector<double>& closes, coevo::Date start = {2015, 1, 5}) {
    std::vector<coevo::OhlcvBar> bars;
    coevo::Date d = start;
    for (std::size_t i = 0; i < closes.size(); d = d.next_day()) {
        if (!d.is_weekday()) continue;
        coevo::OhlcvBar b;
        b.date = d;
        b.close = closes[i];
        b.open = i == 0 ? closes[i] : closes[i - 1];
        b.high = std::max(b.open, b.close) * 1.01;
        b.low = std::min(b.open, b.close) * 0.99;
        b.volume = 1000.0;
        bars.push_back(b);
        ++i;
    }
    return coevo::OhlcvSeries(std::move(bars));
}

/// n patterns with `features` standard-normal columns; label = [x0 + x1 > 0], flipped with probability noise.
inline coevo::PatternSet linear_patterns(std::uint64_t seed, std::size_t n, std::size_t features, double noise = 0.0) {
    coevo::Rng rng(seed);
    coevo::PatternSet p;
    p.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(features));
    coevo::Date d{2019, 1, 1};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < features; ++j) p.features(Eigen::Index(i), Eigen::Index(j)) = rng.normal();
        bool up = p.features(Eigen::Index(i), 0) + p.features(Eigen::Index(i), 1 % Eigen::Index(features)) > 0;
        if (rng.bernoulli(noise)) up = !up;
        p.labels.push_back(up ? 1 : 0);
        p.dates.push_back(d);
        d = d.next_day();
    }
    for (std::size_t j = 0; j < features; ++j) p.feature_names.push_back("f" + std::to_string(j));
    return p;
}

inline coevo::DatasetSplits linear_splits(std::uint64_t seed, std::size_t features, double noise = 0.1,
                                          std::size_t n = 200) {
    return coevo::DatasetSplits(linear_patterns(seed * 4 + 0, n, features, noise),
                                linear_patterns(seed * 4 + 1, n, features, noise),
                                linear_patterns(seed * 4 + 2, n / 2, features, noise),
                                linear_patterns(seed * 4 + 3, n / 2, features, noise));
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("coevo-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace fixture
