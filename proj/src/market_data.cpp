#include "coevo/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "coevo/error.hpp"
#include "coevo/text.hpp"

namespace coevo {

// ---------------------------------------------------------------------------
// OHLCV

void validate_bar(const OhlcvBar& b) {
    const auto where = " on " + b.date.iso();
    for (double v : {b.open, b.high, b.low, b.close, b.volume}) {
        if (!std::isfinite(v)) throw ValidationError("non-finite value" + where);
    }
    if (b.high < b.low) throw ValidationError("high below low" + where);
    if (b.low > std::min(b.open, b.close)) throw ValidationError("low above open/close" + where);
    if (b.high < std::max(b.open, b.close)) throw ValidationError("high below open/close" + where);
    if (b.volume < 0) throw ValidationError("negative volume" + where);
}

OhlcvSeries::OhlcvSeries(std::vector<OhlcvBar> bars) : bars_(std::move(bars)) {
    std::stable_sort(bars_.begin(), bars_.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
    for (std::size_t i = 0; i < bars_.size(); ++i) {
        validate_bar(bars_[i]);
        if (i > 0 && bars_[i].date == bars_[i - 1].date) {
            throw ValidationError("duplicate date " + bars_[i].date.iso());
        }
    }
}

OhlcvSeries OhlcvSeries::prefix(std::size_t count) const {
    OhlcvSeries out;
    out.bars_.assign(bars_.begin(), bars_.begin() + static_cast<std::ptrdiff_t>(std::min(count, bars_.size())));
    return out;
}

OhlcvSeries OhlcvSeries::rescaled(double factor) const {
    OhlcvSeries out = *this;
    for (auto& b : out.bars_) {
        b.open *= factor;
        b.high *= factor;
        b.low *= factor;
        b.close *= factor;
    }
    return out;
}

OhlcvSeries parse_ohlcv_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty OHLCV file");
    ++line_no;
    const auto header = text::split(text::trim(line), ',');
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[text::lower(text::trim(header[i]))] = i;
    const char* required[] = {"date", "open", "high", "low", "close", "volume"};
    for (const char* name : required) {
        if (!col.contains(name)) {
            throw ParseError("line 1: header must name Date,Open,High,Low,Close,Volume (missing '" +
                             std::string(name) + "')");
        }
    }
    std::vector<OhlcvBar> bars;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        const auto fields = text::split(trimmed, ',');
        const auto where = "line " + std::to_string(line_no);
        if (fields.size() != header.size()) {
            throw ParseError(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                             std::to_string(fields.size()));
        }
        OhlcvBar bar;
        try {
            bar.date = Date::parse(text::trim(fields[col["date"]]));
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
        auto num = [&](const char* name, double& out) {
            if (!text::parse_double(fields[col[name]], out)) {
                throw ParseError(where + ": malformed " + std::string(name) + " value '" +
                                 std::string(fields[col[name]]) + "'");
            }
        };
        num("open", bar.open);
        num("high", bar.high);
        num("low", bar.low);
        num("close", bar.close);
        num("volume", bar.volume);
        bars.push_back(bar);
    }
    if (bars.empty()) throw ParseError("OHLCV file contains no data rows");
    return OhlcvSeries(std::move(bars));
}

OhlcvSeries load_ohlcv_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    return parse_ohlcv_csv(in);
}

void write_ohlcv_csv(const std::filesystem::path& path, const OhlcvSeries& series) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "Date,Open,High,Low,Close,Volume\n";
    for (const auto& b : series.bars()) {
        out << b.date.iso() << ',' << text::format_double(b.open) << ',' << text::format_double(b.high) << ','
            << text::format_double(b.low) << ',' << text::format_double(b.close) << ','
            << text::format_double(b.volume) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Patterns

PatternSet PatternSet::select_columns(std::span<const std::size_t> columns) const {
    PatternSet out;
    out.features.resize(features.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] >= feature_count()) throw ValidationError("column index out of range");
        out.features.col(static_cast<Eigen::Index>(j)) = features.col(static_cast<Eigen::Index>(columns[j]));
        if (!feature_names.empty()) out.feature_names.push_back(feature_names[columns[j]]);
    }
    out.labels = labels;
    out.dates = dates;
    return out;
}

PatternSet PatternSet::select_rows(std::span<const std::size_t> rows) const {
    PatternSet out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
        out.labels.push_back(labels[rows[i]]);
        out.dates.push_back(dates[rows[i]]);
    }
    out.feature_names = feature_names;
    return out;
}

void PatternSet::validate() const {
    if (static_cast<std::size_t>(features.rows()) != labels.size() || labels.size() != dates.size()) {
        throw ValidationError("pattern set row counts disagree");
    }
    if (!feature_names.empty() && feature_names.size() != feature_count()) {
        throw ValidationError("pattern set feature names disagree with column count");
    }
    for (auto y : labels) {
        if (y > 1) throw ValidationError("pattern label outside {0,1}");
    }
}

PatternSet build_patterns(const OhlcvSeries& series, const FeatureCatalog& catalog, std::size_t warmup) {
    if (series.size() < warmup + 2) {
        throw ValidationError("series of " + std::to_string(series.size()) + " bars is too short: at least " +
                              std::to_string(warmup + 2) + " bars are required (" + std::to_string(warmup) +
                              "-bar warm-up plus one labeled day)");
    }
    const RowMatrix all = compute_matrix(series, catalog, warmup);
    const auto n = static_cast<Eigen::Index>(series.size() - warmup - 1);
    PatternSet out;
    out.features = all.topRows(n);
    out.feature_names = catalog.names();
    for (std::size_t t = warmup; t + 1 < series.size(); ++t) {
        out.labels.push_back(series[t + 1].close - series[t].close > 0 ? 1 : 0);
        out.dates.push_back(series[t].date);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Splits

SplitSpec SplitSpec::standard() {
    return {{Date(2017, 1, 1), Date(2019, 1, 1)},
            {Date(2019, 1, 1), Date(2020, 8, 1)},
            {Date(2020, 8, 1), Date(2021, 1, 1)},
            {Date(2021, 1, 1), Date(2021, 6, 1)}};
}

void SplitSpec::validate() const {
    const std::pair<const char*, const DateRange*> windows[] = {
        {"pr", &pr}, {"train", &train}, {"test", &test}, {"hold", &hold}};
    for (const auto& [name, w] : windows) {
        if (w->empty()) throw ValidationError(std::string(name) + " window " + w->describe() + " is empty");
    }
    for (std::size_t i = 1; i < 4; ++i) {
        if (windows[i].second->begin < windows[i - 1].second->end) {
            throw ValidationError(std::string(windows[i].first) + " window must start at or after the end of " +
                                  windows[i - 1].first);
        }
    }
}

nlohmann::json SplitSpec::to_json() const {
    auto range = [](const DateRange& r) { return nlohmann::json{{"begin", r.begin.iso()}, {"end", r.end.iso()}}; };
    return {{"pr", range(pr)}, {"train", range(train)}, {"test", range(test)}, {"hold", range(hold)}};
}

SplitSpec SplitSpec::from_json(const nlohmann::json& j) {
    auto range = [&](const char* key) {
        const auto& r = j.at(key);
        return DateRange{Date::parse(r.at("begin").get<std::string>()), Date::parse(r.at("end").get<std::string>())};
    };
    SplitSpec s{range("pr"), range("train"), range("test"), range("hold")};
    s.validate();
    return s;
}

DatasetSplits::DatasetSplits(PatternSet pr, PatternSet train, PatternSet test, PatternSet hold)
    : d_pr(std::move(pr)), d_train(std::move(train)), d_test(std::move(test)), d_hold_(std::move(hold)) {}

DatasetSplits::DatasetSplits(const DatasetSplits& o)
    : d_pr(o.d_pr), d_train(o.d_train), d_test(o.d_test), d_hold_(o.d_hold_), sealed_(o.sealed_) {}

DatasetSplits& DatasetSplits::operator=(const DatasetSplits& o) {
    if (this != &o) {
        d_pr = o.d_pr;
        d_train = o.d_train;
        d_test = o.d_test;
        d_hold_ = o.d_hold_;
        sealed_ = o.sealed_;
        holdout_reads_ = 0;
    }
    return *this;
}

const PatternSet& DatasetSplits::holdout() const {
    if (sealed_) throw HoldoutAccessError("hold-out split read while sealed");
    ++holdout_reads_;
    return d_hold_;
}

DatasetSplits split_by_dates(const PatternSet& patterns, const SplitSpec& spec, SplitCounts* counts) {
    spec.validate();
    patterns.validate();
    std::vector<std::size_t> idx[4];
    const DateRange* windows[] = {&spec.pr, &spec.train, &spec.test, &spec.hold};
    SplitCounts c;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        bool placed = false;
        for (std::size_t w = 0; w < 4; ++w) {
            if (windows[w]->contains(patterns.dates[i])) {
                idx[w].push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) ++c.dropped;
    }
    const char* names[] = {"pr", "train", "test", "hold"};
    for (std::size_t w = 0; w < 4; ++w) {
        if (idx[w].empty()) {
            throw ValidationError(std::string(names[w]) + " window " + windows[w]->describe() +
                                  " contains no patterns");
        }
    }
    c.pr = idx[0].size();
    c.train = idx[1].size();
    c.test = idx[2].size();
    c.hold = idx[3].size();
    if (counts) *counts = c;
    return DatasetSplits(patterns.select_rows(idx[0]), patterns.select_rows(idx[1]), patterns.select_rows(idx[2]),
                         patterns.select_rows(idx[3]));
}

// ---------------------------------------------------------------------------
// Standardizer

Standardizer Standardizer::fit(const PatternSet& train) {
    if (train.size() < 2) throw ValidationError("standardizer needs at least two training patterns");
    Standardizer s;
    const auto n = static_cast<double>(train.size());
    for (Eigen::Index j = 0; j < train.features.cols(); ++j) {
        const auto col = train.features.col(j);
        double mean = 0.0;
        for (Eigen::Index i = 0; i < col.size(); ++i) mean += col(i);
        mean /= n;
        double ss = 0.0;
        for (Eigen::Index i = 0; i < col.size(); ++i) ss += (col(i) - mean) * (col(i) - mean);
        const double sd = std::sqrt(ss / (n - 1.0));
        const bool flat = !(sd > 0.0) || sd <= 1e-12 * std::max(1.0, std::abs(mean));
        s.mean_.push_back(mean);
        s.sd_.push_back(sd);
        s.constant_.push_back(flat);
    }
    s.fitted_ = true;
    return s;
}

PatternSet Standardizer::apply(const PatternSet& p) const {
    if (!fitted_) throw UsageError("standardizer applied before fit");
    if (p.feature_count() != mean_.size()) throw ValidationError("standardizer column count mismatch");
    PatternSet out = p;
    for (Eigen::Index j = 0; j < out.features.cols(); ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (constant_[k]) continue;
        out.features.col(j) = (out.features.col(j).array() - mean_[k]) / sd_[k];
    }
    return out;
}

DatasetSplits Standardizer::apply(const DatasetSplits& splits) const {
    return splits.transformed([this](const PatternSet& p) { return apply(p); });
}

nlohmann::json Standardizer::to_json() const {
    return {{"fitted", fitted_}, {"mean", mean_}, {"sd", sd_}, {"constant", constant_}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
    Standardizer s;
    s.fitted_ = j.at("fitted").get<bool>();
    s.mean_ = j.at("mean").get<std::vector<double>>();
    s.sd_ = j.at("sd").get<std::vector<double>>();
    s.constant_ = j.at("constant").get<std::vector<bool>>();
    return s;
}

// ---------------------------------------------------------------------------
// Serialization

void write_pattern_csv(const std::filesystem::path& path, const PatternSet& p) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "date";
    for (std::size_t j = 0; j < p.feature_count(); ++j) {
        out << ',' << (p.feature_names.empty() ? "x" + std::to_string(j + 1) : p.feature_names[j]);
    }
    out << ",label\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        out << p.dates[i].iso();
        for (Eigen::Index j = 0; j < p.features.cols(); ++j) {
            out << ',' << text::format_double(p.features(static_cast<Eigen::Index>(i), j));
        }
        out << ',' << static_cast<int>(p.labels[i]) << '\n';
    }
}

PatternSet read_pattern_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
    const auto header = text::split(text::trim(line), ',');
    if (header.size() < 3 || header.front() != "date" || header.back() != "label") {
        throw ParseError(path.string() + ": line 1: expected date,<features...>,label");
    }
    PatternSet p;
    for (std::size_t j = 1; j + 1 < header.size(); ++j) p.feature_names.emplace_back(header[j]);
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        const auto fields = text::split(trimmed, ',');
        const auto where = path.string() + ": line " + std::to_string(line_no);
        if (fields.size() != header.size()) throw ParseError(where + ": wrong field count");
        p.dates.push_back(Date::parse(fields.front()));
        for (std::size_t j = 1; j + 1 < fields.size(); ++j) {
            double v = 0.0;
            if (!text::parse_double(fields[j], v)) throw ParseError(where + ": malformed number");
            values.push_back(v);
        }
        double y = 0.0;
        if (!text::parse_double(fields.back(), y) || (y != 0.0 && y != 1.0)) {
            throw ParseError(where + ": label must be 0 or 1");
        }
        p.labels.push_back(static_cast<std::uint8_t>(y));
    }
    const auto cols = static_cast<Eigen::Index>(p.feature_names.size());
    p.features = Eigen::Map<RowMatrix>(values.data(), static_cast<Eigen::Index>(p.labels.size()), cols);
    return p;
}

void save_splits(const std::filesystem::path& dir, const DatasetSplits& splits, const SplitSpec& spec,
                 const Standardizer& standardizer, const nlohmann::json& extra) {
    std::filesystem::create_directories(dir);
    write_pattern_csv(dir / "pr.csv", splits.d_pr);
    write_pattern_csv(dir / "train.csv", splits.d_train);
    write_pattern_csv(dir / "test.csv", splits.d_test);
    write_pattern_csv(dir / "hold.csv", splits.holdout_storage());
    nlohmann::json manifest = extra.is_object() ? extra : nlohmann::json::object();
    manifest["split_spec"] = spec.to_json();
    manifest["standardizer"] = standardizer.to_json();
    manifest["counts"] = {{"pr", splits.d_pr.size()},
                          {"train", splits.d_train.size()},
                          {"test", splits.d_test.size()},
                          {"hold", splits.holdout_storage().size()}};
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
}

LoadedSplits load_splits(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw ValidationError("no dataset at " + dir.string() + " (run the ingest subcommand first)");
    LoadedSplits out;
    out.manifest = nlohmann::json::parse(in);
    out.spec = SplitSpec::from_json(out.manifest.at("split_spec"));
    out.standardizer = Standardizer::from_json(out.manifest.at("standardizer"));
    out.splits = DatasetSplits(read_pattern_csv(dir / "pr.csv"), read_pattern_csv(dir / "train.csv"),
                               read_pattern_csv(dir / "test.csv"), read_pattern_csv(dir / "hold.csv"));
    return out;
}

}  // namespace coevo
