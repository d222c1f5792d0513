#include "coevo/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>

#include "coevo/error.hpp"

namespace coevo {

std::string to_string(ReductionMethod m) {
    switch (m) {
        case ReductionMethod::Pca: return "pca";
        case ReductionMethod::Mrmr: return "mrmr";
        case ReductionMethod::Cfs: return "cfs";
    }
    return "?";
}

ReductionMethod reduction_method_from_string(const std::string& s) {
    if (s == "pca" || s == "PCA") return ReductionMethod::Pca;
    if (s == "mrmr" || s == "mRmR") return ReductionMethod::Mrmr;
    if (s == "cfs" || s == "CFS") return ReductionMethod::Cfs;
    throw ValidationError("unknown reduction method '" + s + "' (expected pca, mrmr, cfs)");
}

double PcaModel::explained_ratio() const {
    const double total = std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
    if (total <= 0) return 0.0;
    double kept = 0.0;
    for (std::size_t i = 0; i < components(); ++i) kept += eigenvalues[i];
    return kept / total;
}

RowMatrix PcaModel::transform(const RowMatrix& x) const {
    if (x.cols() != mean.size()) throw ValidationError("PCA input column count mismatch");
    RowMatrix centered = x.rowwise() - mean.transpose();
    return centered * loadings;
}

RowMatrix PcaModel::inverse_transform(const RowMatrix& scores) const {
    RowMatrix x = scores * loadings.transpose();
    x.rowwise() += mean.transpose();
    return x;
}

PatternSet PcaModel::apply(const PatternSet& p) const {
    PatternSet out;
    out.features = transform(p.features);
    out.labels = p.labels;
    out.dates = p.dates;
    for (std::size_t i = 0; i < components(); ++i) out.feature_names.push_back("PC" + std::to_string(i + 1));
    return out;
}

DatasetSplits PcaModel::apply(const DatasetSplits& s) const {
    return s.transformed([this](const PatternSet& p) { return apply(p); });
}

nlohmann::json PcaModel::to_json() const {
    std::vector<double> m(mean.data(), mean.data() + mean.size());
    std::vector<double> l(loadings.data(), loadings.data() + loadings.size());
    return {{"mean", m}, {"rows", loadings.rows()}, {"cols", loadings.cols()}, {"loadings", l},
            {"eigenvalues", eigenvalues}, {"warning", warning}};
}

PcaModel PcaModel::from_json(const nlohmann::json& j) {
    PcaModel p;
    const auto m = j.at("mean").get<std::vector<double>>();
    p.mean = Eigen::Map<const Vector>(m.data(), static_cast<Eigen::Index>(m.size()));
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto l = j.at("loadings").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(l.size()) != rows * cols) throw ParseError("PCA loadings have the wrong size");
    p.loadings = Eigen::Map<const RowMatrix>(l.data(), rows, cols);
    p.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    p.warning = j.value("warning", std::string{});
    return p;
}

PcaModel pca_fit(const PatternSet& train, double variance_target, std::size_t count) {
    if (train.size() < 2) throw ValidationError("PCA needs at least two patterns");
    if (count == 0 && !(variance_target > 0 && variance_target <= 1)) {
        throw ValidationError("variance target must be within (0, 1]");
    }
    const auto& x = train.features;
    const auto d = x.cols();
    PcaModel model;
    model.mean = x.colwise().mean().transpose();
    const RowMatrix centered = x.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("PCA eigen decomposition failed");

    // Eigen returns ascending eigenvalues.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::reverse(order.begin(), order.end());
    const double top = std::max(0.0, solver.eigenvalues()(order.front()));
    const double tol = std::max(top, 1.0) * 1e-12 * static_cast<double>(d);
    double total = 0.0;
    for (auto i : order) {
        const double ev = std::max(0.0, solver.eigenvalues()(i));
        model.eigenvalues.push_back(ev);
        total += ev;
    }
    std::size_t rank = 0;
    while (rank < model.eigenvalues.size() && model.eigenvalues[rank] > tol) ++rank;

    std::size_t keep = 0;
    if (count > 0) {
        keep = std::min(count, rank);
        if (keep < count) {
            model.warning = "requested " + std::to_string(count) + " components but the data has rank " +
                            std::to_string(rank);
        }
    } else {
        double cum = 0.0;
        while (keep < rank) {
            cum += model.eigenvalues[keep++];
            if (total <= 0 || cum / total >= variance_target - 1e-15) break;
        }
    }
    model.loadings.resize(d, static_cast<Eigen::Index>(keep));
    for (std::size_t k = 0; k < keep; ++k) {
        Eigen::VectorXd v = solver.eigenvectors().col(order[k]);
        // Sign convention: largest-magnitude loading positive.
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        model.loadings.col(static_cast<Eigen::Index>(k)) = v;
    }
    return model;
}

ReductionResult pca_reduce(const PatternSet& train, double variance_target, std::size_t count) {
    ReductionResult r;
    r.method = ReductionMethod::Pca;
    r.pca = pca_fit(train, variance_target, count);
    const double total = std::accumulate(r.pca->eigenvalues.begin(), r.pca->eigenvalues.end(), 0.0);
    double cum = 0.0;
    for (std::size_t i = 0; i < r.pca->components(); ++i) {
        cum += r.pca->eigenvalues[i];
        r.trace.push_back(total > 0 ? cum / total : 0.0);
    }
    return r;
}

nlohmann::json ReductionResult::to_json() const {
    nlohmann::json j = {{"method", to_string(method)}, {"features", features}, {"trace", trace}};
    if (pca) j["pca"] = pca->to_json();
    return j;
}

ReductionResult ReductionResult::from_json(const nlohmann::json& j) {
    ReductionResult r;
    r.method = reduction_method_from_string(j.at("method").get<std::string>());
    r.features = j.value("features", std::vector<std::size_t>{});
    r.trace = j.value("trace", std::vector<double>{});
    if (j.contains("pca")) r.pca = PcaModel::from_json(j["pca"]);
    return r;
}

std::vector<int> equal_frequency_bins(std::span<const double> values, int bins) {
    if (bins < 1) throw ValidationError("bin count must be positive");
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<int> codes(n, 0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const int code = static_cast<int>((i * static_cast<std::size_t>(bins)) / n);
        for (std::size_t k = i; k < j; ++k) codes[order[k]] = code;
        i = j;
    }
    return codes;
}

double entropy(std::span<const int> a) {
    std::map<int, std::size_t> counts;
    for (int v : a) ++counts[v];
    const double n = static_cast<double>(a.size());
    double h = 0.0;
    for (const auto& [v, c] : counts) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return h;
}

double mutual_information(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw ValidationError("mutual information needs equal-length sequences");
    if (a.empty()) return 0.0;
    std::map<std::pair<int, int>, std::size_t> joint;
    std::map<int, std::size_t> ca, cb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++joint[{a[i], b[i]}];
        ++ca[a[i]];
        ++cb[b[i]];
    }
    const double n = static_cast<double>(a.size());
    double mi = 0.0;
    for (const auto& [k, c] : joint) {
        const double pxy = static_cast<double>(c) / n;
        const double px = static_cast<double>(ca[k.first]) / n;
        const double py = static_cast<double>(cb[k.second]) / n;
        mi += pxy * std::log(pxy / (px * py));
    }
    return std::max(0.0, mi);
}

double symmetrical_uncertainty(std::span<const int> a, std::span<const int> b) {
    const double h = entropy(a) + entropy(b);
    if (h <= 0) return 0.0;
    return 2.0 * mutual_information(a, b) / h;
}

namespace {

struct Discretized {
    std::vector<std::vector<int>> columns;
    std::vector<int> labels;
};

Discretized discretize(const PatternSet& train) {
    if (train.empty()) throw ValidationError("feature selection needs a non-empty training set");
    Discretized d;
    std::vector<double> col(train.size());
    for (Eigen::Index j = 0; j < train.features.cols(); ++j) {
        for (std::size_t i = 0; i < train.size(); ++i) col[i] = train.features(static_cast<Eigen::Index>(i), j);
        d.columns.push_back(equal_frequency_bins(col));
    }
    d.labels.assign(train.labels.begin(), train.labels.end());
    return d;
}

}  // namespace

ReductionResult mrmr_select(const PatternSet& train, std::size_t k) {
    const std::size_t nf = train.feature_count();
    if (k == 0) throw ValidationError("subset size must be positive");
    if (k > nf) throw ValidationError("subset size " + std::to_string(k) + " exceeds " + std::to_string(nf) + " features");
    const auto d = discretize(train);
    std::vector<double> relevance(nf);
    for (std::size_t j = 0; j < nf; ++j) relevance[j] = mutual_information(d.columns[j], d.labels);

    ReductionResult r;
    r.method = ReductionMethod::Mrmr;
    std::vector<bool> chosen(nf, false);
    std::vector<double> redundancy(nf, 0.0);  // running sum of MI with chosen features
    for (std::size_t step = 0; step < k; ++step) {
        std::size_t best = nf;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < nf; ++j) {
            if (chosen[j]) continue;
            const double score = step == 0 ? relevance[j] : relevance[j] - redundancy[j] / static_cast<double>(step);
            if (score > best_score) {
                best_score = score;
                best = j;
            }
        }
        chosen[best] = true;
        r.features.push_back(best);
        r.trace.push_back(best_score);
        for (std::size_t j = 0; j < nf; ++j) {
            if (!chosen[j]) redundancy[j] += mutual_information(d.columns[j], d.columns[best]);
        }
    }
    return r;
}

ReductionResult cfs_select(const PatternSet& train, int max_stale) {
    const std::size_t nf = train.feature_count();
    if (nf == 0) throw ValidationError("feature selection needs at least one feature");
    if (max_stale < 1) throw ValidationError("stale-expansion limit must be positive");
    const auto d = discretize(train);
    std::vector<double> rcf(nf);
    for (std::size_t j = 0; j < nf; ++j) rcf[j] = symmetrical_uncertainty(d.columns[j], d.labels);
    std::vector<std::vector<double>> rff(nf, std::vector<double>(nf, 1.0));
    for (std::size_t a = 0; a < nf; ++a) {
        for (std::size_t b = a + 1; b < nf; ++b) {
            rff[a][b] = rff[b][a] = symmetrical_uncertainty(d.columns[a], d.columns[b]);
        }
    }

    struct Node {
        std::vector<std::size_t> subset;  // ascending
        double sum_cf = 0.0;
        double sum_ff = 0.0;  // over unordered pairs
        double merit = 0.0;
    };
    auto merit = [](double k, double sum_cf, double sum_ff) {
        if (k == 0) return 0.0;
        const double denom = std::sqrt(k + 2.0 * sum_ff);
        return denom > 0 ? sum_cf / denom : 0.0;
    };
    // Best-first: highest merit, then smaller subset, then lexicographic.
    auto better = [](const Node& a, const Node& b) {
        if (a.merit != b.merit) return a.merit > b.merit;
        if (a.subset.size() != b.subset.size()) return a.subset.size() < b.subset.size();
        return a.subset < b.subset;
    };
    auto cmp = [&](const Node& a, const Node& b) { return better(a, b); };
    std::set<Node, decltype(cmp)> open(cmp);
    std::set<std::vector<std::size_t>> visited;

    open.insert(Node{});
    visited.insert({});
    Node best;
    int stale = 0;
    ReductionResult r;
    r.method = ReductionMethod::Cfs;
    while (!open.empty() && stale < max_stale) {
        const Node node = *open.begin();
        open.erase(open.begin());
        bool improved = false;
        for (std::size_t j = 0; j < nf; ++j) {
            if (std::binary_search(node.subset.begin(), node.subset.end(), j)) continue;
            Node child;
            child.subset = node.subset;
            child.subset.insert(std::upper_bound(child.subset.begin(), child.subset.end(), j), j);
            if (!visited.insert(child.subset).second) continue;
            child.sum_cf = node.sum_cf + rcf[j];
            child.sum_ff = node.sum_ff;
            for (auto s : node.subset) child.sum_ff += rff[s][j];
            child.merit = merit(static_cast<double>(child.subset.size()), child.sum_cf, child.sum_ff);
            if (best.subset.empty() || child.merit > best.merit + 1e-12) {
                best = child;
                improved = true;
            }
            open.insert(std::move(child));
        }
        stale = improved ? 0 : stale + 1;
        r.trace.push_back(best.merit);
    }
    r.features = best.subset;
    return r;
}

}  // namespace coevo
