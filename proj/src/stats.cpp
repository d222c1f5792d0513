#include "coevo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "coevo/error.hpp"

namespace coevo {

nlohmann::json FriedmanResult::to_json() const {
    return {{"mean_ranks", mean_ranks}, {"statistic", statistic}, {"p_value", p_value}, {"runs", runs},
            {"methods", methods}};
}

nlohmann::json HommelResult::to_json() const {
    std::vector<int> rej(rejected.begin(), rejected.end());
    return {{"adjusted", adjusted}, {"rejected", rej}, {"alpha", alpha}};
}

std::vector<double> row_ranks(std::span<const double> row, bool higher_is_better) {
    const std::size_t k = row.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return higher_is_better ? row[a] > row[b] : row[a] < row[b];
    });
    std::vector<double> ranks(k);
    std::size_t i = 0;
    while (i < k) {
        std::size_t j = i;
        while (j < k && row[order[j]] == row[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
        i = j;
    }
    return ranks;
}

FriedmanResult friedman_test(const MetricTable& table, bool higher_is_better) {
    if (table.size() < 2) throw ValidationError("Friedman test needs at least two runs");
    const std::size_t k = table.front().size();
    if (k < 2) throw ValidationError("Friedman test needs at least two methods");
    FriedmanResult r;
    r.runs = table.size();
    r.methods = k;
    r.mean_ranks.assign(k, 0.0);
    for (const auto& row : table) {
        if (row.size() != k) throw ValidationError("metric table rows differ in length");
        for (double v : row) {
            if (!std::isfinite(v)) throw ValidationError("metric table contains a non-finite value");
        }
        const auto ranks = row_ranks(row, higher_is_better);
        for (std::size_t j = 0; j < k; ++j) r.mean_ranks[j] += ranks[j];
    }
    const double n = static_cast<double>(r.runs), kk = static_cast<double>(k);
    double ss = 0.0;
    for (auto& m : r.mean_ranks) {
        m /= n;
        ss += (m - (kk + 1) / 2) * (m - (kk + 1) / 2);
    }
    r.statistic = 12.0 * n / (kk * (kk + 1)) * ss;
    r.p_value = boost::math::gamma_q((kk - 1) / 2, r.statistic / 2);
    return r;
}

std::vector<double> friedman_control_pvalues(const FriedmanResult& r, std::size_t control) {
    if (control >= r.methods) throw ValidationError("control index outside the table");
    const double k = static_cast<double>(r.methods), n = static_cast<double>(r.runs);
    const double se = std::sqrt(k * (k + 1) / (6 * n));
    std::vector<double> out;
    for (std::size_t j = 0; j < r.methods; ++j) {
        if (j == control) continue;
        const double z = (r.mean_ranks[j] - r.mean_ranks[control]) / se;
        out.push_back(std::erfc(std::abs(z) / std::sqrt(2.0)));
    }
    return out;
}

HommelResult hommel_apv(std::span<const double> p_values, double alpha) {
    for (double p : p_values) {
        if (!(p >= 0 && p <= 1)) throw ValidationError("p-values must be within [0, 1]");
    }
    HommelResult res;
    res.alpha = alpha;
    const std::size_t n = p_values.size();
    if (n == 0) return res;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = p_values[order[i]];

    const double dn = static_cast<double>(n);
    double init = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) init = std::min(init, dn * p[i] / static_cast<double>(i + 1));
    std::vector<double> q(n, init), pa(n, init);
    for (std::size_t m = n - 1; m >= 2; --m) {
        const double dm = static_cast<double>(m);
        // 0-based: i1 = [0, n-m], i2 = [n-m+1, n-1]
        double q1 = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t + 1 < m; ++t) {
            q1 = std::min(q1, dm * p[n - m + 1 + t] / static_cast<double>(t + 2));
        }
        for (std::size_t i = 0; i <= n - m; ++i) q[i] = std::min(dm * p[i], q1);
        for (std::size_t i = n - m + 1; i < n; ++i) q[i] = q[n - m];
        for (std::size_t i = 0; i < n; ++i) pa[i] = std::max(pa[i], q[i]);
    }
    res.adjusted.assign(n, 0.0);
    res.rejected.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::max(pa[i], p[i]);
        res.adjusted[order[i]] = v;
        res.rejected[order[i]] = v <= alpha;
    }
    return res;
}

}  // namespace coevo
