#include <doctest.h>

#include <fstream>

#include "coevo/pareto.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace coevo;

namespace {

Genome genome_of(std::size_t i) {
    Genome g(16);
    for (std::size_t b = 0; b < 16; ++b) g.bits[b] = (i >> b) & 1;
    return g;
}

const std::vector<ObjectiveVector> kWorkedFront{
    {0.43, 0.27, 0.46}, {0.42, 0.30, 0.48}, {0.41, 0.36, 0.47}, {0.45, 0.65, 0.45}};

}  // namespace

TEST_CASE("dominance") {
    CHECK(dominates({0.1, 0.1, 0.1}, {0.2, 0.2, 0.2}));
    CHECK_FALSE(dominates({0.1, 0.3, 0.1}, {0.2, 0.2, 0.2}));
    CHECK_FALSE(dominates({0.2, 0.2, 0.2}, {0.2, 0.2, 0.2}));
    CHECK(dominates({0.2, 0.2, 0.1}, {0.2, 0.2, 0.2}));
    for (const auto& a : kWorkedFront) {
        for (const auto& b : kWorkedFront) CHECK_FALSE(dominates(a, b));
    }
    Rng rng(1);
    for (int i = 0; i < 2000; ++i) {
        const auto p = oracle::random_points(rng, 2, 4);
        CHECK(dominates(p[0], p[1]) == oracle::dominates(p[0], p[1]));
    }
}

TEST_CASE("archive insertion keeps a non-dominated, duplicate-free set") {
    ParetoArchive ar;
    CHECK(ar.insert(genome_of(1), {0.5, 0.5, 0.5}));
    CHECK_FALSE(ar.insert(genome_of(1), {0.1, 0.1, 0.1}));  // same genome
    CHECK_FALSE(ar.insert(genome_of(2), {0.6, 0.6, 0.6}));  // dominated
    CHECK(ar.insert(genome_of(3), {0.4, 0.6, 0.5}));        // incomparable
    CHECK(ar.insert(genome_of(4), {0.5, 0.5, 0.5}));        // equal objectives, new genome
    CHECK(ar.size() == 3);
    CHECK(ar.insert(genome_of(5), {0.1, 0.1, 0.1}));        // evicts everything
    CHECK(ar.size() == 1);

    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        ParetoArchive a;
        const auto pts = oracle::random_points(rng, 60, 8);
        for (std::size_t i = 0; i < pts.size(); ++i) a.insert(genome_of(i), pts[i]);
        std::vector<ObjectiveVector> expect;
        for (auto i : oracle::nondominated_indices(pts)) expect.push_back(pts[i]);
        auto got = a.objectives();
        auto key = [](const ObjectiveVector& v) { return v.as_array(); };
        std::sort(got.begin(), got.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
        std::sort(expect.begin(), expect.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
        CHECK(got == expect);
    }
}

TEST_CASE("sorted order is lexicographic on objectives then genome") {
    ParetoArchive ar;
    ar.insert(genome_of(9), {0.3, 0.1, 0.5});
    ar.insert(genome_of(2), {0.2, 0.4, 0.5});
    ar.insert(genome_of(1), {0.3, 0.1, 0.5});
    const auto s = ar.sorted();
    REQUIRE(s.size() == 3);
    CHECK(s[0].genome == genome_of(2));
    CHECK(s[1].genome == std::min(genome_of(1), genome_of(9)));
}

TEST_CASE("merging archives") {
    ParetoArchive a, b;
    a.insert(genome_of(1), {0.1, 0.1, 0.1});
    b.insert(genome_of(2), {0.2, 0.2, 0.2});
    const std::vector<ParetoArchive> both{a, b};
    const auto m = merge_archives(both);
    REQUIRE(m.size() == 1);
    CHECK(m.entries()[0].genome == genome_of(1));

    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<ParetoArchive> parts(4);
        std::size_t id = 0;
        for (auto& p : parts) {
            for (const auto& v : oracle::random_points(rng, 25, 10)) p.insert(genome_of(id++ % 40), v);
        }
        const auto merged = merge_archives(parts);
        const auto filtered = nondominated_filter(merged.entries());
        CHECK(filtered.size() == merged.size());
    }
}

TEST_CASE("hypervolume worked values") {
    const std::vector<ObjectiveVector> one{{0.5, 0.5, 0.5}};
    CHECK(hypervolume(one, {1, 1, 1}) == doctest::Approx(0.125));
    const std::vector<ObjectiveVector> two{{0.2, 0.8, 0.5}, {0.8, 0.2, 0.5}};
    CHECK(hypervolume(two, {1, 1, 1}) == doctest::Approx(0.14));
    CHECK(hypervolume(std::vector<ObjectiveVector>{}, {1, 1, 1}) == 0.0);
    const std::vector<ObjectiveVector> outside{{0.5, 1.2, 0.5}};
    CHECK_THROWS_AS(hypervolume(outside, {1, 1, 1}), ValidationError);
}

TEST_CASE("hypervolume equals inclusion-exclusion") {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(10);
        auto pts = oracle::random_points(rng, n, 12);
        const ObjectiveVector ref{1.0, 1.0, 1.0};
        CHECK(hypervolume(pts, ref) == doctest::Approx(oracle::hypervolume(pts, ref)));
    }
}

TEST_CASE("archive JSON lines round trip") {
    fixture::TempDir dir("archive");
    ParetoArchive ar;
    ar.insert(genome_of(3), {0.25, 0.125, 0.5});
    ar.insert(genome_of(4), {0.125, 0.25, 0.5});
    const auto path = dir.path() / "a.jsonl";
    write_archive_jsonl(path, ar, nullptr, "# config_hash=abc seed=1");
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    CHECK(first == "# config_hash=abc seed=1");
    const auto back = read_archive_jsonl(path);
    CHECK(back.sorted() == ar.sorted());
}
