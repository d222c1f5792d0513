#include "coevo/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coevo/error.hpp"

namespace coevo {

std::string to_string(RuleOfThumb r) {
    switch (r) {
        case RuleOfThumb::Kolmogorov: return "kolmogorov";
        case RuleOfThumb::Hush: return "hush";
        case RuleOfThumb::Wang: return "wang";
        case RuleOfThumb::Ripley: return "ripley";
        case RuleOfThumb::FletcherGoss: return "fletcher-goss";
        case RuleOfThumb::Huang: return "huang";
    }
    return "?";
}

RuleOfThumb rule_from_string(const std::string& s) {
    for (auto r : all_rules()) {
        if (to_string(r) == s) return r;
    }
    throw ValidationError("unknown rule of thumb '" + s + "'");
}

std::vector<RuleOfThumb> all_rules() {
    return {RuleOfThumb::Kolmogorov, RuleOfThumb::Hush,         RuleOfThumb::Wang,
            RuleOfThumb::Ripley,     RuleOfThumb::FletcherGoss, RuleOfThumb::Huang};
}

std::pair<int, int> rule_of_thumb(RuleOfThumb rule, const RuleInputs& in) {
    if (!(in.n_features > 0) || !(in.outputs > 0)) throw ValidationError("rule inputs must be positive");
    const double nf = in.n_features, m = in.outputs;
    auto r = [](double v) { return static_cast<int>(std::round(v)); };
    switch (rule) {
        case RuleOfThumb::Kolmogorov: return {r(2 * nf + 1), 0};
        case RuleOfThumb::Hush: return {r(4 * nf), r(2 * m)};
        case RuleOfThumb::Wang: return {r(2 * nf / 3), 0};
        case RuleOfThumb::Ripley: return {r((nf + m) / 2), 0};
        case RuleOfThumb::FletcherGoss: return {r(2 * std::sqrt(nf) + m), 0};
        case RuleOfThumb::Huang: {
            if (!(in.samples > 0)) throw ValidationError("Huang's rule needs a positive sample count");
            const double n = in.samples;
            return {r(std::sqrt((m + 2) * n) + 2 * std::sqrt(n / (m + 2))), r(m * std::sqrt(n / (m + 2)))};
        }
    }
    throw ValidationError("unknown rule");
}

Topology rule_topology(RuleOfThumb rule, const RuleInputs& in, const SearchSpaceConfig& space, Activation activation) {
    const auto [s1, s2] = rule_of_thumb(rule, in);
    Topology t;
    t.layers.push_back({std::min(s1, space.s_max()), activation});
    if (space.n_layers > 1) t.layers.push_back({std::min(s2, space.s_max()), activation});
    return t;
}

Architecture topology_architecture(const Genome& g, std::size_t dimension, const SearchSpaceConfig& space) {
    if (dimension == 0) throw EmptyFeatureSetError("topology-only search needs at least one input");
    Architecture a;
    a.features.resize(dimension);
    std::iota(a.features.begin(), a.features.end(), 0);
    a.topology = decode_topology(g.bits, space);
    return a;
}

FitnessFunction topology_fitness(const DatasetSplits& reduced, const SearchSpaceConfig& space, const EvalConfig& eval) {
    const std::size_t d = reduced.feature_count();
    return architecture_fitness(reduced, space, eval,
                                [d, space](const Genome& g) { return topology_architecture(g, d, space); });
}

SearchProblem topology_problem(const SearchSpaceConfig& space, CachedEvaluator& evaluator) {
    SearchProblem p;
    p.genome_length = space.topology_bits();
    p.evaluator = &evaluator;
    return p;
}

SearchResult topology_only_search(const DatasetSplits& reduced, const SearchSpaceConfig& space, const Nsga2Config& cfg,
                                  const EvalConfig& eval) {
    CachedEvaluator evaluator(topology_fitness(reduced, space, eval), eval.threads);
    return nsga2_run(topology_problem(space, evaluator), cfg);
}

ScalarizedResult scalarized_search(const SearchProblem& problem, const ScalarizedConfig& scal, const Nsga2Config& ga) {
    problem.validate();
    scal.validate();
    ga.validate();
    const double n = static_cast<double>(problem.genome_length);
    const double p_flip = ga.flip_probability < 0 ? 1.0 / n : ga.flip_probability;
    const double p_mut = ga.mutation_rate < 0 ? 1.0 / n : ga.mutation_rate;
    auto& ev = *problem.evaluator;
    const std::size_t start = ev.evaluations();
    auto used = [&] { return ev.evaluations() - start; };
    auto remaining = [&] { return ga.max_evaluations > used() ? ga.max_evaluations - used() : 0; };
    Rng rng(ga.seed);

    struct Member {
        Genome genome;
        Evaluation eval;
        double value;
    };
    auto assess = [&](std::vector<Genome> genomes) {
        genomes = within_budget(genomes, ev, remaining());
        const auto evals = ev.evaluate_batch(genomes);
        std::vector<Member> out;
        for (std::size_t i = 0; i < genomes.size(); ++i) {
            out.push_back({genomes[i], evals[i], scalarized_objective(evals[i], scal)});
        }
        return out;
    };
    auto finish = [&](Genome g) {
        if (problem.repair) problem.repair(g, rng);
        return g;
    };

    std::vector<Genome> initial;
    for (std::size_t i = 0; i < ga.population; ++i) {
        Genome g(problem.genome_length);
        for (auto& b : g.bits) b = static_cast<std::uint8_t>(rng.next() >> 63);
        initial.push_back(finish(std::move(g)));
    }
    auto pop = assess(std::move(initial));
    ScalarizedResult res;
    if (pop.empty()) return res;

    auto by_value = [](const Member& a, const Member& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.genome < b.genome;
    };
    int generation = 0;
    auto record = [&] {
        const auto& best = *std::min_element(pop.begin(), pop.end(), by_value);
        if (res.best.size() == 0 || by_value(best, Member{res.best, {}, res.best_value})) {
            res.best = best.genome;
            res.best_value = best.value;
            res.best_evaluation = best.eval;
        }
        double mean = 0;
        for (const auto& m : pop) mean += m.value;
        res.trace.push_back({generation, used(), res.best_value, mean / static_cast<double>(pop.size())});
    };
    record();

    auto tournament = [&]() -> const Member& {
        const auto& a = pop[rng.below(pop.size())];
        const auto& b = pop[rng.below(pop.size())];
        if (a.value != b.value) return a.value < b.value ? a : b;
        return rng.bernoulli(0.5) ? a : b;
    };
    int stall = 0;
    while (remaining() > 0 && stall < ga.stall_generations) {
        std::vector<Genome> kids;
        while (kids.size() < ga.population) {
            const auto& a = tournament();
            const auto& b = tournament();
            Genome c1, c2;
            if (rng.bernoulli(ga.crossover_rate)) {
                if (rng.bernoulli(ga.nongeometric_rate)) {
                    c1 = nongeometric_crossover(a.genome, b.genome, rng, p_flip);
                    c2 = nongeometric_crossover(b.genome, a.genome, rng, p_flip);
                } else {
                    std::tie(c1, c2) = uniform_crossover(a.genome, b.genome, rng);
                }
            } else {
                c1 = a.genome;
                c2 = b.genome;
            }
            bitflip_mutation(c1, p_mut, rng);
            bitflip_mutation(c2, p_mut, rng);
            kids.push_back(finish(std::move(c1)));
            kids.push_back(finish(std::move(c2)));
        }
        const std::size_t before = used();
        auto children = assess(std::move(kids));
        stall = used() == before ? stall + 1 : 0;
        pop.insert(pop.end(), children.begin(), children.end());
        std::stable_sort(pop.begin(), pop.end(), by_value);
        pop.resize(std::min(pop.size(), ga.population));
        ++generation;
        record();
    }
    res.evaluations = used();
    return res;
}

}  // namespace coevo
