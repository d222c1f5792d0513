#include "coevo/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coevo/error.hpp"

namespace coevo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Columns {
    std::vector<double> open, high, low, close, volume;

    explicit Columns(const OhlcvSeries& s) {
        const auto n = s.size();
        open.resize(n);
        high.resize(n);
        low.resize(n);
        close.resize(n);
        volume.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            open[i] = s[i].open;
            high[i] = s[i].high;
            low[i] = s[i].low;
            close[i] = s[i].close;
            volume[i] = s[i].volume;
        }
    }
    std::size_t size() const { return close.size(); }
};

double window_mean(const std::vector<double>& x, std::size_t t, std::size_t tau) {
    double sum = 0.0;
    for (std::size_t j = t + 1 - tau; j <= t; ++j) sum += x[j];
    return sum / static_cast<double>(tau);
}

double window_max(const std::vector<double>& x, std::size_t first, std::size_t last) {
    double m = x[first];
    for (std::size_t j = first + 1; j <= last; ++j) m = std::max(m, x[j]);
    return m;
}

double window_min(const std::vector<double>& x, std::size_t first, std::size_t last) {
    double m = x[first];
    for (std::size_t j = first + 1; j <= last; ++j) m = std::min(m, x[j]);
    return m;
}

double true_range(const Columns& c, std::size_t j) {
    const double prev = c.close[j - 1];
    return std::max({c.high[j] - c.low[j], std::abs(c.high[j] - prev), std::abs(c.low[j] - prev)});
}

std::vector<double> moving_average(const Columns& c, std::size_t tau) {
    std::vector<double> out(c.size(), kNaN);
    for (std::size_t t = tau - 1; t < c.size(); ++t) out[t] = window_mean(c.close, t, tau);
    return out;
}

std::vector<double> ema(const Columns& c, std::size_t tau) {
    std::vector<double> out(c.size(), kNaN);
    if (c.size() == 0) return out;
    const double alpha = 2.0 / (static_cast<double>(tau) + 1.0);
    out[0] = c.close[0];
    for (std::size_t t = 1; t < c.size(); ++t) out[t] = alpha * c.close[t] + (1.0 - alpha) * out[t - 1];
    return out;
}

std::vector<double> rsi(const Columns& c, std::size_t tau) {
    std::vector<double> out(c.size(), kNaN);
    for (std::size_t t = tau; t < c.size(); ++t) {
        double up_sum = 0.0, down_sum = 0.0;
        int up_days = 0, down_days = 0;
        for (std::size_t j = t + 1 - tau; j <= t; ++j) {
            const double d = c.close[j] - c.close[j - 1];
            if (d > 0) {
                up_sum += d;
                ++up_days;
            } else if (d < 0) {
                down_sum -= d;
                ++down_days;
            }
        }
        const double up_avg = up_days > 0 ? up_sum / up_days : 0.0;
        const double down_avg = down_days > 0 ? down_sum / down_days : 0.0;
        if (up_avg + down_avg == 0.0) {
            out[t] = 50.0;
        } else {
            out[t] = 100.0 * up_avg / (up_avg + down_avg);
        }
    }
    return out;
}

// Raw %K on the inclusive window [t-tau+1, t].
double raw_stochastic(const Columns& c, std::size_t t, std::size_t tau) {
    const double hh = window_max(c.high, t + 1 - tau, t);
    const double ll = window_min(c.low, t + 1 - tau, t);
    if (hh == ll) return 50.0;
    return 100.0 * (c.close[t] - ll) / (hh - ll);
}

std::pair<std::vector<double>, std::vector<double>> stochastic_kd(const Columns& c, std::size_t tau) {
    std::vector<double> k(c.size(), kNaN), d(c.size(), kNaN);
    double k_prev = 50.0, d_prev = 50.0;
    for (std::size_t t = tau - 1; t < c.size(); ++t) {
        k_prev = (2.0 / 3.0) * k_prev + (1.0 / 3.0) * raw_stochastic(c, t, tau);
        d_prev = (2.0 / 3.0) * d_prev + (1.0 / 3.0) * k_prev;
        k[t] = k_prev;
        d[t] = d_prev;
    }
    return {k, d};
}

std::vector<double> macd(const Columns& c, std::size_t tau) {
    std::vector<double> out(c.size(), kNaN);
    if (c.size() == 0) return out;
    const auto fast = ema(c, 12);
    const auto slow = ema(c, 26);
    const double alpha = 2.0 / (static_cast<double>(tau) + 1.0);
    out[0] = fast[0] - slow[0];
    for (std::size_t t = 1; t < c.size(); ++t) {
        out[t] = (1.0 - alpha) * out[t - 1] + alpha * (fast[t] - slow[t]);
    }
    return out;
}

std::vector<double> williams_r(const Columns& c, std::size_t tau) {
    std::vector<double> out(c.size(), kNaN);
    for (std::size_t t = tau - 1; t < c.size(); ++t) {
        const double hh = window_max(c.high, t + 1 - tau, t);
        const double ll = window_min(c.low, t + 1 - tau, t);
        out[t] = hh == ll ? 50.0 : 100.0 * (hh - c.close[t]) / (hh - ll);
    }
    return out;
}

std::vector<double> psychological_line(const Columns& c, std::size_t tau) {
    std::vector<double> out(c.size(), kNaN);
    for (std::size_t t = tau; t < c.size(); ++t) {
        int up = 0;
        for (std::size_t j = t + 1 - tau; j <= t; ++j) up += c.close[j] > c.close[j - 1] ? 1 : 0;
        out[t] = 100.0 * up / static_cast<double>(tau);
    }
    return out;
}

std::vector<double> price_oscillator(const Columns& c, std::size_t x, std::size_t y) {
    std::vector<double> out(c.size(), kNaN);
    for (std::size_t t = std::max(x, y) - 1; t < c.size(); ++t) {
        const double ma_x = window_mean(c.close, t, x);
        const double ma_y = window_mean(c.close, t, y);
        if (!(ma_x > 0.0)) throw ValidationError("price oscillator requires positive prices");
        out[t] = (ma_x - ma_y) / ma_x;
    }
    return out;
}

std::vector<double> directional(const Columns& c, std::size_t tau, bool up) {
    const auto& px = up ? c.high : c.low;
    std::vector<double> out(c.size(), kNaN);
    for (std::size_t t = tau; t < c.size(); ++t) {
        double dm = 0.0, trs = 0.0;
        for (std::size_t j = t + 1 - tau; j <= t; ++j) {
            dm += (px[j] - px[j - 1]) / static_cast<double>(tau);
            trs += true_range(c, j);
        }
        trs /= static_cast<double>(tau);
        out[t] = trs == 0.0 ? 0.0 : 100.0 * dm / trs;
    }
    return out;
}

std::vector<double> bias(const Columns& c, std::size_t tau) {
    std::vector<double> out(c.size(), kNaN);
    for (std::size_t t = tau - 1; t < c.size(); ++t) {
        const double ma = window_mean(c.close, t, tau);
        out[t] = 100.0 * (c.close[t] - ma) / ma;
    }
    return out;
}

std::vector<double> volume_ratio(const Columns& c, std::size_t tau) {
    std::vector<double> out(c.size(), kNaN);
    for (std::size_t t = tau; t < c.size(); ++t) {
        double uv = 0.0, dv = 0.0;
        for (std::size_t j = t + 1 - tau; j <= t; ++j) {
            if (c.close[j] > c.close[j - 1]) uv += c.volume[j];
            else if (c.close[j] < c.close[j - 1]) dv += c.volume[j];
        }
        out[t] = uv + dv == 0.0 ? 0.5 : uv / (uv + dv);
    }
    return out;
}

double guarded_ratio(double num, double den) { return den == 0.0 ? 1.0 : num / den; }

std::vector<double> a_ratio(const Columns& c, std::size_t tau) {
    std::vector<double> out(c.size(), kNaN);
    for (std::size_t t = tau - 1; t < c.size(); ++t) {
        double num = 0.0, den = 0.0;
        for (std::size_t j = t + 1 - tau; j <= t; ++j) {
            num += c.high[j] - c.open[j];
            den += c.open[j] - c.low[j];
        }
        out[t] = guarded_ratio(num, den);
    }
    return out;
}

std::vector<double> b_ratio(const Columns& c, std::size_t tau) {
    std::vector<double> out(c.size(), kNaN);
    for (std::size_t t = tau; t < c.size(); ++t) {
        double num = 0.0, den = 0.0;
        for (std::size_t j = t + 1 - tau; j <= t; ++j) {
            num += c.high[j] - c.close[j - 1];
            den += c.close[j - 1] - c.low[j];
        }
        out[t] = guarded_ratio(num, den);
    }
    return out;
}

// Extremes and median over the previous tau days, excluding day t.
std::vector<double> trailing_extreme(const Columns& c, std::size_t tau, IndicatorKind kind) {
    std::vector<double> out(c.size(), kNaN);
    std::vector<double> buf;
    for (std::size_t t = tau; t < c.size(); ++t) {
        switch (kind) {
            case IndicatorKind::LowestLow: out[t] = window_min(c.low, t - tau, t - 1); break;
            case IndicatorKind::HighestHigh: out[t] = window_max(c.high, t - tau, t - 1); break;
            default: {
                buf.assign(c.close.begin() + static_cast<std::ptrdiff_t>(t - tau),
                           c.close.begin() + static_cast<std::ptrdiff_t>(t));
                std::sort(buf.begin(), buf.end());
                const auto m = buf.size() / 2;
                out[t] = buf.size() % 2 == 1 ? buf[m] : 0.5 * (buf[m - 1] + buf[m]);
            }
        }
    }
    return out;
}

std::vector<double> average_true_range(const Columns& c, std::size_t tau) {
    std::vector<double> out(c.size(), kNaN);
    if (c.size() <= tau) return out;
    double seed = 0.0;
    for (std::size_t j = 1; j <= tau; ++j) seed += true_range(c, j);
    out[tau] = seed / static_cast<double>(tau);
    for (std::size_t t = tau + 1; t < c.size(); ++t) {
        out[t] = (out[t - 1] * static_cast<double>(tau - 1) + true_range(c, t)) / static_cast<double>(tau);
    }
    return out;
}

std::vector<double> lagged(const Columns& c, std::size_t tau, IndicatorKind kind) {
    std::vector<double> out(c.size(), kNaN);
    for (std::size_t t = tau; t < c.size(); ++t) {
        const double now = c.close[t];
        const double then = c.close[t - tau];
        switch (kind) {
            case IndicatorKind::RelativeDifference: out[t] = 100.0 * (now - then) / then; break;
            case IndicatorKind::Momentum: out[t] = now - then; break;
            default: out[t] = 100.0 * now / then; break;
        }
    }
    return out;
}

std::vector<double> ultimate_oscillator(const Columns& c, std::size_t x, std::size_t y, std::size_t z) {
    std::vector<double> out(c.size(), kNaN);
    auto average = [&](std::size_t t, std::size_t len) {
        double bp = 0.0, tr = 0.0;
        for (std::size_t j = t + 1 - len; j <= t; ++j) {
            const double true_low = std::min(c.low[j], c.close[j - 1]);
            const double true_high = std::max(c.high[j], c.close[j - 1]);
            bp += c.close[j] - true_low;
            tr += true_high - true_low;
        }
        return tr == 0.0 ? 0.5 : bp / tr;
    };
    for (std::size_t t = std::max({x, y, z}); t < c.size(); ++t) {
        out[t] = 100.0 / 7.0 * (4.0 * average(t, x) + 2.0 * average(t, y) + average(t, z));
    }
    return out;
}

std::vector<double> ulcer_index(const Columns& c, std::size_t tau) {
    std::vector<double> out(c.size(), kNaN);
    for (std::size_t t = 2 * (tau - 1); t < c.size(); ++t) {
        double sum_sq = 0.0;
        for (std::size_t i = t + 1 - tau; i <= t; ++i) {
            const double peak = window_max(c.close, i + 1 - tau, i);
            const double dd = 100.0 * (c.close[i] - peak) / peak;
            sum_sq += dd * dd;
        }
        out[t] = std::sqrt(sum_sq / static_cast<double>(tau));
    }
    return out;
}

std::vector<double> raw_prices(const Columns& c, IndicatorKind kind) {
    switch (kind) {
        case IndicatorKind::Open: return c.open;
        case IndicatorKind::High: return c.high;
        case IndicatorKind::Low: return c.low;
        default: return c.close;
    }
}

std::size_t param(const IndicatorId& id, int i) { return static_cast<std::size_t>(id.params[static_cast<std::size_t>(i)]); }

}  // namespace

std::string IndicatorId::family() const {
    switch (kind) {
        case IndicatorKind::Open: return "O";
        case IndicatorKind::High: return "H";
        case IndicatorKind::Low: return "L";
        case IndicatorKind::Close: return "C";
        case IndicatorKind::MovingAverage: return "MA";
        case IndicatorKind::ExponentialMovingAverage: return "EMA";
        case IndicatorKind::RelativeStrengthIndex: return "RSI";
        case IndicatorKind::StochasticK: return "K";
        case IndicatorKind::StochasticD: return "D";
        case IndicatorKind::Macd: return "MACD";
        case IndicatorKind::WilliamsR: return "WR";
        case IndicatorKind::PsychologicalLine: return "PSY";
        case IndicatorKind::PriceOscillator: return "OSCP";
        case IndicatorKind::DirectionalUp: return "+DIS";
        case IndicatorKind::DirectionalDown: return "-DIS";
        case IndicatorKind::Bias: return "BIAS";
        case IndicatorKind::VolumeRatio: return "VR";
        case IndicatorKind::ARatio: return "AR";
        case IndicatorKind::BRatio: return "BR";
        case IndicatorKind::LowestLow: return "LL";
        case IndicatorKind::HighestHigh: return "HH";
        case IndicatorKind::MedianPrice: return "MP";
        case IndicatorKind::AverageTrueRange: return "ATR";
        case IndicatorKind::RelativeDifference: return "RDP";
        case IndicatorKind::Momentum: return "MTM";
        case IndicatorKind::RateOfChange: return "ROC";
        case IndicatorKind::UltimateOscillator: return "UO";
        case IndicatorKind::UlcerIndex: return "Ulcer";
    }
    return "?";
}

std::string IndicatorId::name() const {
    std::string out = family();
    for (int i = 0; i < param_count; ++i) out += "_" + std::to_string(params[static_cast<std::size_t>(i)]);
    return out;
}

FeatureCatalog::FeatureCatalog(std::vector<IndicatorId> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw ValidationError("feature catalog must not be empty");
}

const FeatureCatalog& FeatureCatalog::standard() {
    static const FeatureCatalog catalog = [] {
        using K = IndicatorKind;
        std::vector<IndicatorId> e;
        for (auto k : {K::Open, K::High, K::Low, K::Close}) e.push_back(IndicatorId::plain(k));
        const int taus[] = {5, 10, 15, 20};
        for (int t : taus) e.push_back(IndicatorId::period(K::MovingAverage, t));
        for (int t : taus) e.push_back(IndicatorId::period(K::ExponentialMovingAverage, t));
        for (int t : taus) e.push_back(IndicatorId::period(K::RelativeStrengthIndex, t));
        for (int t : {5, 9}) e.push_back(IndicatorId::period(K::StochasticK, t));
        for (int t : {5, 9}) e.push_back(IndicatorId::period(K::StochasticD, t));
        e.push_back(IndicatorId::period(K::Macd, 9));
        for (int t : taus) e.push_back(IndicatorId::period(K::WilliamsR, t));
        for (int t : taus) e.push_back(IndicatorId::period(K::PsychologicalLine, t));
        for (int x : {5, 10, 15}) {
            for (int y : {10, 15, 20}) {
                if (x < y) e.push_back(IndicatorId::pair(K::PriceOscillator, x, y));
            }
        }
        for (int t : taus) e.push_back(IndicatorId::period(K::DirectionalUp, t));
        for (int t : taus) e.push_back(IndicatorId::period(K::DirectionalDown, t));
        for (int t : taus) e.push_back(IndicatorId::period(K::Bias, t));
        e.push_back(IndicatorId::period(K::VolumeRatio, 10));
        e.push_back(IndicatorId::period(K::ARatio, 20));
        e.push_back(IndicatorId::period(K::BRatio, 20));
        e.push_back(IndicatorId::period(K::LowestLow, 10));
        e.push_back(IndicatorId::period(K::HighestHigh, 10));
        e.push_back(IndicatorId::period(K::MedianPrice, 10));
        e.push_back(IndicatorId::period(K::AverageTrueRange, 10));
        for (int t : taus) e.push_back(IndicatorId::period(K::RelativeDifference, t));
        for (int t : taus) e.push_back(IndicatorId::period(K::Momentum, t));
        for (int t : taus) e.push_back(IndicatorId::period(K::RateOfChange, t));
        e.push_back(IndicatorId::triple(K::UltimateOscillator, 10, 20, 30));
        e.push_back(IndicatorId::period(K::UlcerIndex, 14));
        return FeatureCatalog(std::move(e));
    }();
    return catalog;
}

std::vector<std::string> FeatureCatalog::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.name());
    return out;
}

std::size_t FeatureCatalog::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].name() == name) return i;
    }
    throw ValidationError("unknown feature '" + name + "'");
}

nlohmann::json FeatureCatalog::to_json() const {
    auto out = nlohmann::json::array();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        auto params = nlohmann::json::array();
        for (int p = 0; p < e.param_count; ++p) params.push_back(e.params[static_cast<std::size_t>(p)]);
        out.push_back({{"index", i + 1}, {"name", e.name()}, {"family", e.family()}, {"params", params}});
    }
    return out;
}

std::vector<double> indicator_series(const OhlcvSeries& series, const IndicatorId& id) {
    const Columns c(series);
    using K = IndicatorKind;
    switch (id.kind) {
        case K::Open:
        case K::High:
        case K::Low:
        case K::Close: return raw_prices(c, id.kind);
        case K::MovingAverage: return moving_average(c, param(id, 0));
        case K::ExponentialMovingAverage: return ema(c, param(id, 0));
        case K::RelativeStrengthIndex: return rsi(c, param(id, 0));
        case K::StochasticK: return stochastic_kd(c, param(id, 0)).first;
        case K::StochasticD: return stochastic_kd(c, param(id, 0)).second;
        case K::Macd: return macd(c, param(id, 0));
        case K::WilliamsR: return williams_r(c, param(id, 0));
        case K::PsychologicalLine: return psychological_line(c, param(id, 0));
        case K::PriceOscillator: return price_oscillator(c, param(id, 0), param(id, 1));
        case K::DirectionalUp: return directional(c, param(id, 0), true);
        case K::DirectionalDown: return directional(c, param(id, 0), false);
        case K::Bias: return bias(c, param(id, 0));
        case K::VolumeRatio: return volume_ratio(c, param(id, 0));
        case K::ARatio: return a_ratio(c, param(id, 0));
        case K::BRatio: return b_ratio(c, param(id, 0));
        case K::LowestLow:
        case K::HighestHigh:
        case K::MedianPrice: return trailing_extreme(c, param(id, 0), id.kind);
        case K::AverageTrueRange: return average_true_range(c, param(id, 0));
        case K::RelativeDifference:
        case K::Momentum:
        case K::RateOfChange: return lagged(c, param(id, 0), id.kind);
        case K::UltimateOscillator: return ultimate_oscillator(c, param(id, 0), param(id, 1), param(id, 2));
        case K::UlcerIndex: return ulcer_index(c, param(id, 0));
    }
    throw ValidationError("unsupported indicator " + id.name());
}

double compute_feature(const OhlcvSeries& series, const IndicatorId& id, std::size_t t, std::size_t warmup) {
    if (t < warmup) {
        throw ValidationError("day index " + std::to_string(t) + " lies inside the " + std::to_string(warmup) +
                              "-bar warm-up");
    }
    if (t >= series.size()) throw ValidationError("day index " + std::to_string(t) + " beyond series end");
    const double v = indicator_series(series.prefix(t + 1), id)[t];
    if (!std::isfinite(v)) throw ValidationError(id.name() + " is undefined at day " + std::to_string(t));
    return v;
}

RowMatrix compute_matrix(const OhlcvSeries& series, const FeatureCatalog& catalog, std::size_t warmup) {
    if (series.size() <= warmup) {
        throw ValidationError("series of " + std::to_string(series.size()) + " bars is shorter than the " +
                              std::to_string(warmup + 1) + "-bar minimum");
    }
    const std::size_t rows = series.size() - warmup;
    RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(catalog.size()));
    for (std::size_t j = 0; j < catalog.size(); ++j) {
        const auto col = indicator_series(series, catalog[j]);
        for (std::size_t r = 0; r < rows; ++r) {
            const double v = col[warmup + r];
            if (!std::isfinite(v)) {
                throw ValidationError(catalog[j].name() + " is undefined at day " + std::to_string(warmup + r));
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return m;
}

}  // namespace coevo
