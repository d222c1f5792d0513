#include <doctest.h>

#include <fstream>

#include "coevo/experiment.hpp"
#include "coevo/synth.hpp"
#include "fixtures.hpp"

using namespace coevo;

namespace {

RunConfig tiny_config() {
    RunConfig cfg;
    cfg.runs = 2;
    cfg.max_evaluations = 20;
    cfg.nsga2.population = 10;
    cfg.eval.cycles = 1;
    cfg.eval.scg.max_iterations = 5;
    cfg.final_scg_iterations = 10;
    return cfg;
}

const PreparedData& prepared() {
    static const PreparedData data = [] {
        return prepare_data(synth_generate(SynthSpec{}, 1).series, SplitSpec::standard());
    }();
    return data;
}

}  // namespace

TEST_CASE("config hash is canonical") {
    const RunConfig a;
    CHECK(a.hash().size() == 16);
    CHECK(RunConfig::from_json(a.to_json()).hash() == a.hash());
    RunConfig b;
    b.seed = 2;
    CHECK(b.hash() != a.hash());
    CHECK(a.run_seed(0) == 1);
    CHECK(a.run_seed(4) == 5);
    for (auto alg : {Algorithm::Nsga2, Algorithm::Eagd, Algorithm::Scalarized, Algorithm::TopologyOnly,
                     Algorithm::Random}) {
        CHECK(algorithm_from_string(to_string(alg)) == alg);
    }
    RunConfig bad;
    bad.runs = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = RunConfig{};
    bad.baseline.mrmr_features = 69;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("prepared data is standardized on the training split") {
    const auto& d = prepared();
    CHECK(d.splits.feature_count() == 68);
    const auto& x = d.splits.d_train.features;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double mean = x.col(j).mean();
        CHECK(std::abs(mean) < 1e-9);
    }
}

TEST_CASE("search never reads the hold-out and round-trips through a workspace") {
    auto splits = prepared().splits;
    splits.seal_holdout();
    const auto cfg = tiny_config();
    const auto outcome = run_search(splits, cfg, Algorithm::Nsga2);
    CHECK(splits.holdout_reads() == 0);
    REQUIRE(outcome.seeds.size() == 2);
    CHECK(outcome.seeds[0].seed == 1);
    CHECK(outcome.seeds[1].seed == 2);
    CHECK_FALSE(outcome.merged.empty());
    for (const auto& s : outcome.seeds) CHECK(s.result.evaluations <= 20);

    const auto again = run_search(splits, cfg, Algorithm::Nsga2);
    CHECK(again.merged.sorted() == outcome.merged.sorted());

    fixture::TempDir tmp("workspace");
    const Workspace ws{tmp.path()};
    CHECK_THROWS_WITH_AS(load_search(ws, Algorithm::Nsga2), doctest::Contains("search"), UsageError);

    const auto dir = write_search_outputs(ws, cfg, outcome);
    CHECK(std::filesystem::exists(dir / "seed-1" / "archive.jsonl"));
    CHECK(std::filesystem::exists(dir / "seed-2" / "generations.csv"));
    std::ifstream in(dir / "merged" / "archive.jsonl");
    std::string header;
    std::getline(in, header);
    CHECK(header == provenance_comment(cfg.hash(), cfg.seed));

    const auto stored = load_search(ws, Algorithm::Nsga2);
    CHECK(stored.config_hash == cfg.hash());
    CHECK(stored.merged.sorted() == outcome.merged.sorted());
    REQUIRE(stored.per_seed.size() == 2);
    CHECK(stored.per_seed[1].sorted() == outcome.seeds[1].result.archive.sorted());
}

TEST_CASE("selection and hold-out evaluation") {
    auto splits = prepared().splits;
    const auto cfg = tiny_config();
    splits.seal_holdout();
    const auto outcome = run_search(splits, cfg, Algorithm::Random);
    const auto rec = select_from_archive(outcome.merged, "O2", PreferenceSpec::preset("O2"));
    CHECK(rec.selected == rec.members[rec.tournament.selected]);
    CHECK(rec.members == outcome.merged.sorted());

    const auto arch = architecture_for(rec.selected.genome, cfg.space);
    CHECK_THROWS_AS(holdout_evaluate(arch, splits, cfg, 1), HoldoutAccessError);
    splits.unseal_holdout();
    const auto m1 = holdout_evaluate(arch, splits, cfg, 1);
    const auto m2 = holdout_evaluate(arch, splits, cfg, 1);
    CHECK(splits.holdout_reads() == 2);
    CHECK(m1.balanced_error == m2.balanced_error);
    CHECK(m1.patterns == splits.holdout_storage().size());
    CHECK((m1.balanced_error >= 0.0 && m1.balanced_error <= 1.0));
}

TEST_CASE("reductions and rule baselines") {
    const auto& splits = prepared().splits;
    auto cfg = tiny_config();
    cfg.baseline.mrmr_features = 4;
    const auto red = fit_reduction(splits, cfg.baseline);
    CHECK(red.dimension() == 4);
    const auto reduced = reduce_splits(splits, red);
    CHECK(reduced.feature_count() == 4);
    CHECK(reduced.d_test.size() == splits.d_test.size());

    const auto rows = run_rule_baselines(reduced, cfg, 3);
    CHECK(rows.size() == 6);
    for (const auto& r : rows) {
        CHECK(r.architecture.features.size() == 4);
        CHECK(r.complexity == doctest::Approx(complexity(r.architecture, cfg.space)));
    }

    Genome topo(16);
    topo.bits[6] = 1;
    const auto a = architecture_for(topo, cfg.space, 4);
    CHECK(a.features.size() == 4);
    CHECK(a.topology.active_count() == 1);
}
