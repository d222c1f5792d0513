#include <doctest.h>

#include "coevo/experiment.hpp"
#include "coevo/indicators.hpp"
#include "coevo/metrics.hpp"
#include "coevo/synth.hpp"

using namespace coevo;

namespace {

SynthSpec short_spec() {
    SynthSpec s;
    s.end = Date(2018, 9, 1);
    return s;
}

}  // namespace

TEST_CASE("synthetic series are deterministic per seed") {
    const auto spec = short_spec();
    const auto a = synth_generate(spec, 3);
    const auto b = synth_generate(spec, 3);
    const auto c = synth_generate(spec, 4);
    CHECK(a.series.bars() == b.series.bars());
    CHECK(a.manifest(spec, 3) == b.manifest(spec, 3));
    CHECK(a.series.bars() != c.series.bars());
    for (const auto& bar : a.series.bars()) {
        CHECK(bar.date.is_weekday());
        CHECK(bar.low <= std::min(bar.open, bar.close));
        CHECK(bar.high >= std::max(bar.open, bar.close));
        CHECK(bar.low > 0);
    }
}

TEST_CASE("manifest records the planted features") {
    const auto spec = short_spec();
    const auto r = synth_generate(spec, 1);
    const auto& cat = FeatureCatalog::standard();
    REQUIRE(r.relevant.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(r.relevant[i] == cat.index_of(spec.relevant[i]));
    const auto m = r.manifest(spec, 1);
    CHECK(m["relevant_indices"].get<std::vector<std::size_t>>() == r.relevant);
    CHECK(m["seed"] == 1);
    CHECK(SynthSpec::from_json(spec.to_json()).to_json() == spec.to_json());
}

TEST_CASE("full noise gives balanced directions") {
    auto spec = short_spec();
    spec.noise = 1.0;
    const auto r = synth_generate(spec, 2);
    CHECK(std::abs(r.up_fraction - 0.5) < 0.06);
}

TEST_CASE("infeasible specs are rejected") {
    auto bad = short_spec();
    bad.weights = {1.0};
    CHECK_THROWS_AS(synth_generate(bad, 1), ValidationError);
    bad = short_spec();
    bad.weights.assign(5, 0.0);
    CHECK_THROWS_AS(synth_generate(bad, 1), ValidationError);
    bad = short_spec();
    bad.relevant = {"VR_10", "VR_10"};
    bad.weights.clear();
    CHECK_THROWS_AS(synth_generate(bad, 1), ValidationError);
    bad = short_spec();
    bad.relevant = {"NOT_A_FEATURE"};
    bad.weights.clear();
    CHECK_THROWS(synth_generate(bad, 1));
    bad = short_spec();
    bad.noise = 1.5;
    CHECK_THROWS_AS(synth_generate(bad, 1), ValidationError);
    bad = short_spec();
    bad.end = Date(2016, 10, 1);
    CHECK_THROWS_AS(synth_generate(bad, 1), ValidationError);
    bad = short_spec();
    bad.end = bad.start;
    CHECK_THROWS_AS(synth_generate(bad, 1), ValidationError);
}

TEST_CASE("a noiseless planted rule is learnable by the mother architecture") {
    SynthSpec spec;
    spec.noise = 0.0;
    const auto data = prepare_data(synth_generate(spec, 1).series, SplitSpec::standard());
    Architecture mother;
    for (std::size_t j = 0; j < 68; ++j) mother.features.push_back(j);
    mother.topology = Topology{{HiddenLayer{127, Activation::Tanh}, HiddenLayer{127, Activation::Tanh}}};
    ScgConfig scg;
    scg.max_iterations = 300;
    scg.seed = 1;
    const auto model = scg_train(mother.topology, mother.features, data.splits.d_train, scg);
    const auto c = confusion(predict(model, data.splits.d_test), data.splits.d_test.labels);
    MESSAGE("mother test accuracy ", accuracy(c));
    CHECK(accuracy(c) > 0.9);
}
