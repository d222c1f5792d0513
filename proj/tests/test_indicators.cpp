#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "coevo/indicators.hpp"
#include "fixtures.hpp"

using namespace coevo;

namespace {

const IndicatorId& entry(const std::string& name) {
    const auto& cat = FeatureCatalog::standard();
    return cat[cat.index_of(name)];
}

double at(const OhlcvSeries& s, const std::string& name, std::size_t t) { return indicator_series(s, entry(name))[t]; }

// Direct per-day evaluation of the table formulas on the bars up to t.
struct Naive {
    const OhlcvSeries& s;

    double c(std::size_t j) const { return s[j].close; }
    double h(std::size_t j) const { return s[j].high; }
    double l(std::size_t j) const { return s[j].low; }
    double o(std::size_t j) const { return s[j].open; }

    double ma(std::size_t t, int tau) const {
        double sum = 0;
        for (int k = 0; k < tau; ++k) sum += c(t - k);
        return sum / tau;
    }
    double wr(std::size_t t, int tau) const {
        double hh = -1e300, ll = 1e300;
        for (int k = 0; k < tau; ++k) {
            hh = std::max(hh, h(t - k));
            ll = std::min(ll, l(t - k));
        }
        return 100 * (hh - c(t)) / (hh - ll);
    }
    double psy(std::size_t t, int tau) const {
        int up = 0;
        for (int k = 0; k < tau; ++k) up += c(t - k) > c(t - k - 1);
        return 100.0 * up / tau;
    }
    double rsi(std::size_t t, int tau) const {
        double upc = 0, dpc = 0;
        int ud = 0, dd = 0;
        for (int k = 0; k < tau; ++k) {
            const double d = c(t - k) - c(t - k - 1);
            if (d > 0) upc += d, ++ud;
            if (d < 0) dpc -= d, ++dd;
        }
        const double u = ud ? upc / ud : 0, w = dd ? dpc / dd : 0;
        return u + w == 0 ? 50 : 100 * u / (u + w);
    }
    double tr(std::size_t j) const {
        return std::max({h(j) - l(j), std::abs(h(j) - c(j - 1)), std::abs(l(j) - c(j - 1))});
    }
    double dis(std::size_t t, int tau, bool up) const {
        double dm = 0, trs = 0;
        for (int k = 0; k < tau; ++k) {
            const std::size_t j = t - k;
            dm += up ? h(j) - h(j - 1) : l(j) - l(j - 1);
            trs += tr(j);
        }
        return 100 * dm / trs;
    }
    double vr(std::size_t t, int tau) const {
        double uv = 0, dv = 0;
        for (int k = 0; k < tau; ++k) {
            const std::size_t j = t - k;
            if (c(j) > c(j - 1)) uv += s[j].volume;
            if (c(j) < c(j - 1)) dv += s[j].volume;
        }
        return uv / (uv + dv);
    }
    double ar(std::size_t t, int tau) const {
        double a = 0, b = 0;
        for (int k = 0; k < tau; ++k) a += h(t - k) - o(t - k), b += o(t - k) - l(t - k);
        return a / b;
    }
    double br(std::size_t t, int tau) const {
        double a = 0, b = 0;
        for (int k = 0; k < tau; ++k) a += h(t - k) - c(t - k - 1), b += c(t - k - 1) - l(t - k);
        return a / b;
    }
    double hh_prev(std::size_t t, int tau) const {
        double m = -1e300;
        for (int k = 1; k <= tau; ++k) m = std::max(m, h(t - k));
        return m;
    }
    double ll_prev(std::size_t t, int tau) const {
        double m = 1e300;
        for (int k = 1; k <= tau; ++k) m = std::min(m, l(t - k));
        return m;
    }
    double mp_prev(std::size_t t, int tau) const {
        std::vector<double> v;
        for (int k = 1; k <= tau; ++k) v.push_back(c(t - k));
        std::sort(v.begin(), v.end());
        return v.size() % 2 ? v[v.size() / 2] : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2;
    }
    double uo_avg(std::size_t t, int len) const {
        double bp = 0, range = 0;
        for (int k = 0; k < len; ++k) {
            const std::size_t j = t - k;
            const double lo = std::min(l(j), c(j - 1)), hi = std::max(h(j), c(j - 1));
            bp += c(j) - lo;
            range += hi - lo;
        }
        return bp / range;
    }
    double ulcer(std::size_t t, int tau) const {
        double ss = 0;
        for (int k = 0; k < tau; ++k) {
            const std::size_t i = t - k;
            double peak = -1e300;
            for (int q = 0; q < tau; ++q) peak = std::max(peak, c(i - q));
            const double r = 100 * (c(i) - peak) / peak;
            ss += r * r;
        }
        return std::sqrt(ss / tau);
    }
};

}  // namespace

TEST_CASE("catalog has 68 uniquely named entries in the documented order") {
    const auto& cat = FeatureCatalog::standard();
    REQUIRE(cat.size() == 68);
    const auto names = cat.names();
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == 68);
    CHECK(names[0] == "O");
    CHECK(names[3] == "C");
    CHECK(names[20] == "MACD_9");
    CHECK(names[22] == "WR_10");
    CHECK(names[29] == "OSCP_5_10");
    CHECK(names[34] == "OSCP_15_20");
    CHECK(names[47] == "VR_10");
    CHECK(names[48] == "AR_20");
    CHECK(names[66] == "UO_10_20_30");
    CHECK(names[67] == "Ulcer_14");
    CHECK_THROWS_AS(cat.index_of("RSI_7"), ValidationError);
    const auto j = cat.to_json();
    CHECK(j.size() == 68);
    CHECK(j[0]["index"] == 1);
    CHECK(j[47]["name"] == "VR_10");
}

TEST_CASE("constant closes") {
    const auto s = fixture::series_from_closes(std::vector<double>(60, 100.0));
    const std::size_t t = 50;
    CHECK(at(s, "MA_5", t) == doctest::Approx(100));
    CHECK(at(s, "MTM_5", t) == 0);
    CHECK(at(s, "ROC_5", t) == doctest::Approx(100));
    CHECK(at(s, "RDP_5", t) == 0);
    CHECK(at(s, "PSY_10", t) == 0);
    CHECK(at(s, "RSI_5", t) == 50);
}

TEST_CASE("five consecutive up days") {
    std::vector<double> closes(60, 100.0);
    for (std::size_t i = 55; i < 60; ++i) closes[i] = closes[i - 1] + 1.0;
    const auto s = fixture::series_from_closes(closes);
    CHECK(at(s, "PSY_5", 59) == 100);
    CHECK(at(s, "RSI_5", 59) == 100);
}

TEST_CASE("EMA follows the printed recursion from its first close") {
    const auto s = fixture::series_from_closes({1, 2, 3, 4, 5, 6});
    const auto e = indicator_series(s, entry("EMA_5"));
    CHECK(e[0] == 1.0);
    CHECK(e[1] == doctest::Approx(4.0 / 3.0));
    CHECK(e[2] == doctest::Approx(17.0 / 9.0));
    CHECK(e[1] == doctest::Approx(1.3333).epsilon(1e-4));
    CHECK(e[2] == doctest::Approx(1.8889).epsilon(1e-4));
}

TEST_CASE("windowed families match direct evaluation") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto s = fixture::random_series(seed, 90);
        const Naive n{s};
        for (std::size_t t = 40; t < s.size(); t += 7) {
            CAPTURE(t);
            for (int tau : {5, 10, 15, 20}) {
                const auto T = std::to_string(tau);
                CHECK(at(s, "MA_" + T, t) == doctest::Approx(n.ma(t, tau)));
                CHECK(at(s, "WR_" + T, t) == doctest::Approx(n.wr(t, tau)));
                CHECK(at(s, "PSY_" + T, t) == doctest::Approx(n.psy(t, tau)));
                CHECK(at(s, "RSI_" + T, t) == doctest::Approx(n.rsi(t, tau)));
                CHECK(at(s, "+DIS_" + T, t) == doctest::Approx(n.dis(t, tau, true)));
                CHECK(at(s, "-DIS_" + T, t) == doctest::Approx(n.dis(t, tau, false)));
                CHECK(at(s, "BIAS_" + T, t) == doctest::Approx(100 * (n.c(t) - n.ma(t, tau)) / n.ma(t, tau)));
                CHECK(at(s, "RDP_" + T, t) == doctest::Approx(100 * (n.c(t) - n.c(t - tau)) / n.c(t - tau)));
                CHECK(at(s, "MTM_" + T, t) == doctest::Approx(n.c(t) - n.c(t - tau)));
                CHECK(at(s, "ROC_" + T, t) == doctest::Approx(100 * n.c(t) / n.c(t - tau)));
            }
            for (auto [x, y] : {std::pair{5, 10}, {5, 15}, {5, 20}, {10, 15}, {10, 20}, {15, 20}}) {
                const auto name = "OSCP_" + std::to_string(x) + "_" + std::to_string(y);
                CHECK(at(s, name, t) == doctest::Approx((n.ma(t, x) - n.ma(t, y)) / n.ma(t, x)));
            }
            CHECK(at(s, "VR_10", t) == doctest::Approx(n.vr(t, 10)));
            CHECK(at(s, "AR_20", t) == doctest::Approx(n.ar(t, 20)));
            CHECK(at(s, "BR_20", t) == doctest::Approx(n.br(t, 20)));
            CHECK(at(s, "HH_10", t) == doctest::Approx(n.hh_prev(t, 10)));
            CHECK(at(s, "LL_10", t) == doctest::Approx(n.ll_prev(t, 10)));
            CHECK(at(s, "MP_10", t) == doctest::Approx(n.mp_prev(t, 10)));
            CHECK(at(s, "UO_10_20_30", t) ==
                  doctest::Approx(100.0 / 7 * (4 * n.uo_avg(t, 10) + 2 * n.uo_avg(t, 20) + n.uo_avg(t, 30))));
            CHECK(at(s, "Ulcer_14", t) == doctest::Approx(n.ulcer(t, 14)));
            CHECK(at(s, "O", t) == n.o(t));
            CHECK(at(s, "L", t) == n.l(t));
        }
    }
}

TEST_CASE("recursive families follow their seeds") {
    const auto s = fixture::random_series(9, 80);
    const Naive n{s};
    // ATR seeded with the mean of the first ten true ranges.
    double atr = 0;
    for (std::size_t j = 1; j <= 10; ++j) atr += n.tr(j) / 10;
    for (std::size_t t = 11; t < s.size(); ++t) atr = (atr * 9 + n.tr(t)) / 10;
    CHECK(at(s, "ATR_10", s.size() - 1) == doctest::Approx(atr));

    // K and D start from 50 at the first full window.
    double k = 50, d = 50;
    for (std::size_t t = 4; t < s.size(); ++t) {
        double hh = -1e300, ll = 1e300;
        for (int q = 0; q < 5; ++q) hh = std::max(hh, n.h(t - q)), ll = std::min(ll, n.l(t - q));
        k = 2.0 / 3 * k + 1.0 / 3 * 100 * (n.c(t) - ll) / (hh - ll);
        d = 2.0 / 3 * d + 1.0 / 3 * k;
    }
    CHECK(at(s, "K_5", s.size() - 1) == doctest::Approx(k));
    CHECK(at(s, "D_5", s.size() - 1) == doctest::Approx(d));

    // MACD smooths EMA_12 - EMA_26 from the first day.
    double e12 = n.c(0), e26 = n.c(0), macd = 0;
    for (std::size_t t = 1; t < s.size(); ++t) {
        e12 = 2.0 / 13 * n.c(t) + 11.0 / 13 * e12;
        e26 = 2.0 / 27 * n.c(t) + 25.0 / 27 * e26;
        macd = 0.8 * macd + 0.2 * (e12 - e26);
    }
    CHECK(at(s, "MACD_9", s.size() - 1) == doctest::Approx(macd));
}

TEST_CASE("bounded families stay in range") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto s = fixture::random_series(seed, 150);
        const auto m = compute_matrix(s, FeatureCatalog::standard());
        const auto& cat = FeatureCatalog::standard();
        for (std::size_t j = 0; j < cat.size(); ++j) {
            const auto fam = cat[j].family();
            const bool percent = fam == "RSI" || fam == "PSY" || fam == "WR" || fam == "K" || fam == "D";
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                const double v = m(i, Eigen::Index(j));
                REQUIRE(std::isfinite(v));
                if (percent) CHECK((v >= 0 && v <= 100));
                if (fam == "VR") CHECK((v >= 0 && v <= 1));
            }
        }
    }
}

TEST_CASE("price rescaling scales levels and leaves ratios alone") {
    const auto s = fixture::random_series(4, 120);
    const auto r = s.rescaled(3.7);
    const auto& cat = FeatureCatalog::standard();
    const std::set<std::string> linear{"MA", "EMA", "MTM", "HH", "LL", "MP", "ATR", "O", "H", "L", "C", "MACD"};
    const std::set<std::string> invariant{"RSI", "PSY", "WR", "ROC", "RDP", "BIAS", "OSCP", "K", "D"};
    for (std::size_t j = 0; j < cat.size(); ++j) {
        const auto a = indicator_series(s, cat[j]);
        const auto b = indicator_series(r, cat[j]);
        const auto fam = cat[j].family();
        for (std::size_t t = 40; t < s.size(); ++t) {
            if (linear.count(fam)) CHECK(b[t] == doctest::Approx(3.7 * a[t]));
            if (invariant.count(fam)) CHECK(b[t] == doctest::Approx(a[t]));
        }
    }
}

TEST_CASE("appending bars never changes earlier values") {
    const auto s = fixture::random_series(12, 140);
    const auto& cat = FeatureCatalog::standard();
    const auto short_s = s.prefix(100);
    for (std::size_t j = 0; j < cat.size(); ++j) {
        const auto a = indicator_series(short_s, cat[j]);
        const auto b = indicator_series(s, cat[j]);
        for (std::size_t t = 40; t < 100; ++t) CHECK(a[t] == b[t]);
    }
}

TEST_CASE("feature matrix shape and per-day agreement") {
    const auto s = fixture::random_series(13, 100);
    const auto m = compute_matrix(s, FeatureCatalog::standard());
    CHECK(m.rows() == 60);
    CHECK(m.cols() == 68);
    const auto& cat = FeatureCatalog::standard();
    for (std::size_t j = 0; j < cat.size(); j += 5) {
        CHECK(m(10, Eigen::Index(j)) == doctest::Approx(compute_feature(s, cat[j], 50)));
    }
    CHECK_THROWS_AS(compute_feature(s, cat[4], 39), ValidationError);
    CHECK_THROWS_AS(compute_feature(s, cat[4], 100), ValidationError);
}
