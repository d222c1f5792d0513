#include "coevo/synth.hpp"

#include <algorithm>
#include <cmath>

#include "coevo/error.hpp"
#include "coevo/indicators.hpp"
#include "coevo/rng.hpp"

namespace coevo {

void SynthSpec::validate() const {
    if (!(start < end)) throw ValidationError("synthetic date range is empty");
    if (relevant.empty()) throw ValidationError("planted rule needs at least one relevant feature");
    if (!weights.empty() && weights.size() != relevant.size()) {
        throw ValidationError("planted weights must match the relevant features");
    }
    if (!weights.empty() && std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) {
        throw ValidationError("planted weights are all zero; the signal is unreachable");
    }
    if (!(noise >= 0 && noise <= 1)) throw ValidationError("noise must be within [0, 1]");
    if (!(volatility > 0 && volatility < 0.5)) throw ValidationError("volatility must be within (0, 0.5)");
    if (!(initial_price > 0)) throw ValidationError("initial price must be positive");
}

nlohmann::json SynthSpec::to_json() const {
    return {{"start", start.iso()}, {"end", end.iso()},     {"relevant", relevant},
            {"weights", weights},   {"noise", noise},       {"volatility", volatility},
            {"initial_price", initial_price}};
}

SynthSpec SynthSpec::from_json(const nlohmann::json& j) {
    SynthSpec s;
    if (j.contains("start")) s.start = Date::parse(j["start"].get<std::string>());
    if (j.contains("end")) s.end = Date::parse(j["end"].get<std::string>());
    s.relevant = j.value("relevant", s.relevant);
    s.weights = j.value("weights", s.weights);
    s.noise = j.value("noise", s.noise);
    s.volatility = j.value("volatility", s.volatility);
    s.initial_price = j.value("initial_price", s.initial_price);
    s.validate();
    return s;
}

nlohmann::json SynthResult::manifest(const SynthSpec& spec, std::uint64_t seed) const {
    const auto& cat = FeatureCatalog::standard();
    std::vector<std::string> names;
    for (auto i : relevant) names.push_back(cat.entries()[i].name());
    return {{"spec", spec.to_json()}, {"seed", seed},   {"relevant_indices", relevant},
            {"relevant_names", names}, {"weights", weights}, {"means", means},
            {"sds", sds},               {"up_fraction", up_fraction}, {"bars", series.size()}};
}

namespace {

std::vector<Date> weekdays(Date start, Date end) {
    std::vector<Date> out;
    for (Date d = start; d < end; d = d.next_day()) {
        if (d.is_weekday()) out.push_back(d);
    }
    return out;
}

// Exogenous parts of a bar given the previous close and the new close.
OhlcvBar make_bar(Date date, double prev_close, double close, Rng& rng) {
    OhlcvBar b;
    b.date = date;
    b.close = close;
    b.open = prev_close * std::exp(0.004 * rng.normal());
    const double top = std::max(b.open, b.close);
    const double bottom = std::min(b.open, b.close);
    b.high = top * std::exp(std::abs(0.006 * rng.normal()));
    b.low = bottom * std::exp(-std::abs(0.006 * rng.normal()));
    b.volume = std::round(1e6 * std::exp(0.4 * rng.normal()));
    return b;
}

// Log return whose sign matches `up`, by rejection.
double signed_return(bool up, double sd, Rng& rng) {
    for (;;) {
        const double r = sd * rng.normal();
        if (r != 0.0 && (r > 0) == up) return r;
    }
}

struct Planted {
    std::vector<IndicatorId> ids;
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> sds;
};

// Simulates the series; with `planted` null every label is a coin flip.
std::vector<OhlcvBar> simulate(const SynthSpec& spec, const std::vector<Date>& dates, const Planted* planted,
                               Rng& rng, std::vector<std::vector<double>>* feature_log, std::size_t* ups) {
    std::vector<OhlcvBar> bars;
    bars.reserve(dates.size());
    bars.push_back(make_bar(dates[0], spec.initial_price, spec.initial_price, rng));
    std::size_t up_count = 0;
    for (std::size_t t = 0; t + 1 < dates.size(); ++t) {
        bool up = rng.bernoulli(0.5);
        const bool scored = t >= kWarmupBars;
        if (scored && (planted || feature_log)) {
            const OhlcvSeries prefix(bars);
            double score = 0.0;
            std::vector<double> values;
            const auto& ids = planted ? planted->ids : std::vector<IndicatorId>{};
            for (std::size_t i = 0; i < ids.size(); ++i) {
                const double v = indicator_series(prefix, ids[i]).back();
                values.push_back(v);
                score += planted->weights[i] * (v - planted->means[i]) / planted->sds[i];
            }
            if (feature_log) feature_log->push_back(values);
            if (planted) {
                up = score > 0;
                if (rng.bernoulli(spec.noise)) up = rng.bernoulli(0.5);
            }
        }
        if (scored) up_count += up;
        const double prev = bars.back().close;
        const double close = prev * std::exp(signed_return(up, spec.volatility, rng));
        bars.push_back(make_bar(dates[t + 1], prev, close, rng));
    }
    if (ups) *ups = up_count;
    return bars;
}

}  // namespace

SynthResult synth_generate(const SynthSpec& spec, std::uint64_t seed) {
    spec.validate();
    const auto dates = weekdays(spec.start, spec.end);
    if (dates.size() < kWarmupBars + 10) {
        throw ValidationError("synthetic range has " + std::to_string(dates.size()) + " trading days; need at least " +
                              std::to_string(kWarmupBars + 10));
    }
    const auto& cat = FeatureCatalog::standard();
    Planted planted;
    SynthResult res;
    for (std::size_t i = 0; i < spec.relevant.size(); ++i) {
        const auto idx = cat.index_of(spec.relevant[i]);
        if (std::find(res.relevant.begin(), res.relevant.end(), idx) != res.relevant.end()) {
            throw ValidationError("relevant feature '" + spec.relevant[i] + "' listed twice");
        }
        res.relevant.push_back(idx);
        planted.ids.push_back(cat.entries()[idx]);
        planted.weights.push_back(spec.weights.empty() ? 1.0 : spec.weights[i]);
    }

    // Pilot run with coin-flip labels fixes the standardization of the planted rule.
    {
        Planted probe = planted;
        probe.means.assign(probe.ids.size(), 0.0);
        probe.sds.assign(probe.ids.size(), 1.0);
        probe.weights.assign(probe.ids.size(), 0.0);
        SynthSpec coin = spec;
        coin.noise = 1.0;
        Rng pilot_rng(hash_combine(seed, 0x70696c6f74ULL));
        std::vector<std::vector<double>> log;
        simulate(coin, dates, &probe, pilot_rng, &log, nullptr);
        planted.means.assign(planted.ids.size(), 0.0);
        planted.sds.assign(planted.ids.size(), 0.0);
        const double n = static_cast<double>(log.size());
        for (const auto& row : log) {
            for (std::size_t i = 0; i < row.size(); ++i) planted.means[i] += row[i] / n;
        }
        for (const auto& row : log) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                planted.sds[i] += (row[i] - planted.means[i]) * (row[i] - planted.means[i]) / (n - 1);
            }
        }
        for (std::size_t i = 0; i < planted.sds.size(); ++i) {
            planted.sds[i] = std::sqrt(planted.sds[i]);
            if (!(planted.sds[i] > 0)) {
                throw ValidationError("planted feature '" + spec.relevant[i] + "' is constant; the signal is unreachable");
            }
        }
    }

    Rng rng(seed);
    std::size_t ups = 0;
    auto bars = simulate(spec, dates, &planted, rng, nullptr, &ups);
    const double scored = static_cast<double>(dates.size() - 1 - kWarmupBars);
    res.up_fraction = static_cast<double>(ups) / scored;
    if (res.up_fraction < 0.1 || res.up_fraction > 0.9) {
        throw ValidationError("planted rule yields " + std::to_string(res.up_fraction) +
                              " up days; the signal strength is unreachable with a balanced label");
    }
    res.series = OhlcvSeries(std::move(bars));
    res.weights = planted.weights;
    res.means = planted.means;
    res.sds = planted.sds;
    return res;
}

}  // namespace coevo
