#include "coevo/eagd.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "coevo/error.hpp"

namespace coevo {

std::vector<WeightVector> simplex_lattice(int divisions) {
    if (divisions < 1) throw ValidationError("lattice needs at least one division");
    std::vector<WeightVector> out;
    const double h = divisions;
    for (int i = divisions; i >= 0; --i) {
        for (int j = divisions - i; j >= 0; --j) {
            const int k = divisions - i - j;
            out.push_back({i / h, j / h, k / h});
        }
    }
    return out;
}

std::vector<WeightVector> simplex_lattice_weights(std::size_t count) {
    if (count < kObjectives) throw ValidationError("need at least 3 weight vectors");
    int h = 1;
    while (static_cast<std::size_t>((h + 1) * (h + 2) / 2) < count) ++h;
    auto lattice = simplex_lattice(h);
    if (lattice.size() == count) return lattice;

    auto dist = [](const WeightVector& a, const WeightVector& b) {
        double s = 0;
        for (std::size_t m = 0; m < kObjectives; ++m) s += (a[m] - b[m]) * (a[m] - b[m]);
        return std::sqrt(s);
    };
    std::vector<bool> taken(lattice.size(), false);
    std::vector<double> nearest(lattice.size(), std::numeric_limits<double>::infinity());
    std::vector<std::size_t> chosen;
    auto take = [&](std::size_t i) {
        taken[i] = true;
        chosen.push_back(i);
        for (std::size_t j = 0; j < lattice.size(); ++j) nearest[j] = std::min(nearest[j], dist(lattice[i], lattice[j]));
    };
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        if (*std::max_element(lattice[i].begin(), lattice[i].end()) == 1.0) take(i);
    }
    while (chosen.size() < count) {
        std::size_t best = lattice.size();
        for (std::size_t j = 0; j < lattice.size(); ++j) {
            if (!taken[j] && (best == lattice.size() || nearest[j] > nearest[best])) best = j;
        }
        take(best);
    }
    std::sort(chosen.begin(), chosen.end());
    std::vector<WeightVector> out;
    for (auto i : chosen) out.push_back(lattice[i]);
    return out;
}

double tchebycheff(const ObjectiveVector& f, const WeightVector& w, const ObjectiveVector& ideal) {
    double v = 0.0;
    for (std::size_t m = 0; m < kObjectives; ++m) {
        const double wm = w[m] == 0.0 ? 1e-6 : w[m];
        v = std::max(v, wm * std::abs(f[m] - ideal[m]));
    }
    return v;
}

std::size_t EagdConfig::neighborhood_size() const {
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(neighborhood_fraction * population - 1e-9)));
}

void EagdConfig::validate() const {
    if (population < kObjectives) throw ValidationError("EAGD population must be at least 3");
    if (crossover_rate < 0 || crossover_rate > 1) throw ValidationError("crossover rate must be within [0, 1]");
    if (mutation_rate > 1) throw ValidationError("mutation rate must be at most 1");
    if (learning_generations < 1) throw ValidationError("learning generations must be positive");
    if (neighborhood_fraction <= 0 || neighborhood_fraction > 1) {
        throw ValidationError("neighborhood fraction must be within (0, 1]");
    }
    if (stall_generations < 1) throw ValidationError("stall limit must be positive");
}

nlohmann::json EagdConfig::to_json() const {
    return {{"population", population},
            {"crossover_rate", crossover_rate},
            {"mutation_rate", mutation_rate},
            {"learning_generations", learning_generations},
            {"neighborhood_fraction", neighborhood_fraction},
            {"max_evaluations", max_evaluations},
            {"seed", seed},
            {"stall_generations", stall_generations}};
}

EagdConfig EagdConfig::from_json(const nlohmann::json& j) {
    EagdConfig c;
    c.population = j.value("population", c.population);
    c.crossover_rate = j.value("crossover_rate", c.crossover_rate);
    c.mutation_rate = j.value("mutation_rate", c.mutation_rate);
    c.learning_generations = j.value("learning_generations", c.learning_generations);
    c.neighborhood_fraction = j.value("neighborhood_fraction", c.neighborhood_fraction);
    c.max_evaluations = j.value("max_evaluations", c.max_evaluations);
    c.seed = j.value("seed", c.seed);
    c.stall_generations = j.value("stall_generations", c.stall_generations);
    c.validate();
    return c;
}

namespace {

constexpr double kSuccessFloor = 0.002;

struct Offspring {
    Genome genome;
    std::size_t subproblem;
};

}  // namespace

SearchResult eagd_run(const SearchProblem& problem, const EagdConfig& cfg, const GenerationCallback& on_generation) {
    problem.validate();
    cfg.validate();
    const std::size_t np = cfg.population;
    const std::size_t t = std::min(cfg.neighborhood_size(), np);
    const double p_mut = cfg.mutation_rate < 0 ? 1.0 / static_cast<double>(problem.genome_length) : cfg.mutation_rate;
    auto& ev = *problem.evaluator;
    const std::size_t start_evals = ev.evaluations();
    const std::size_t start_hits = ev.cache_hits();
    auto used = [&] { return ev.evaluations() - start_evals; };
    auto remaining = [&] { return cfg.max_evaluations > used() ? cfg.max_evaluations - used() : 0; };

    const auto weights = simplex_lattice_weights(np);
    std::vector<std::vector<std::size_t>> neighbors(np);
    for (std::size_t i = 0; i < np; ++i) {
        std::vector<std::pair<double, std::size_t>> d;
        for (std::size_t j = 0; j < np; ++j) {
            double s = 0;
            for (std::size_t m = 0; m < kObjectives; ++m) s += (weights[i][m] - weights[j][m]) * (weights[i][m] - weights[j][m]);
            d.emplace_back(s, j);
        }
        std::sort(d.begin(), d.end());
        for (std::size_t k = 0; k < t; ++k) neighbors[i].push_back(d[k].second);
    }

    Rng rng(cfg.seed);
    auto finish = [&](Genome g) {
        if (problem.repair) problem.repair(g, rng);
        return g;
    };

    std::vector<Genome> initial;
    for (std::size_t i = 0; i < np; ++i) {
        Genome g(problem.genome_length);
        for (auto& b : g.bits) b = static_cast<std::uint8_t>(rng.next() >> 63);
        initial.push_back(finish(std::move(g)));
    }
    initial = within_budget(initial, ev, remaining());
    SearchResult res;
    if (initial.size() < np) {
        // Budget smaller than the population: report what was evaluated.
        const auto evals = ev.evaluate_batch(initial);
        for (std::size_t i = 0; i < initial.size(); ++i) {
            res.archive.insert(initial[i], evals[i].objectives);
            res.population.push_back({initial[i], evals[i].objectives, 0, 0.0});
        }
        res.generations.push_back(population_stats(res.population, 0, used(), ev.cache_hits() - start_hits));
        res.evaluations = used();
        res.cache_hits = ev.cache_hits() - start_hits;
        return res;
    }

    std::vector<Individual> pop;
    {
        const auto evals = ev.evaluate_batch(initial);
        for (std::size_t i = 0; i < np; ++i) pop.push_back({initial[i], evals[i].objectives, 0, 0.0});
    }
    ObjectiveVector ideal{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity()};
    for (const auto& ind : pop) {
        for (std::size_t m = 0; m < kObjectives; ++m) ideal[m] = std::min(ideal[m], ind.objectives[m]);
        res.archive.insert(ind.genome, ind.objectives);
    }

    int generation = 0;
    auto record = [&] {
        auto stats = population_stats(pop, generation, used(), ev.cache_hits() - start_hits);
        stats.front_size = res.archive.size();
        stats.hypervolume = hypervolume(res.archive, ObjectiveVector{1, 1, 1});
        res.generations.push_back(stats);
        if (on_generation) on_generation(stats, pop);
    };
    record();

    // Per generation: offspring entering the archive and offspring produced, per subproblem.
    std::deque<std::pair<std::vector<double>, std::vector<double>>> history;
    int stall = 0;
    while (remaining() > 0 && stall < cfg.stall_generations) {
        std::vector<std::size_t> selected;
        if (generation < cfg.learning_generations) {
            selected.resize(np);
            std::iota(selected.begin(), selected.end(), 0);
        } else {
            std::vector<double> prob(np, 0.0);
            for (std::size_t i = 0; i < np; ++i) {
                double s = 0, n = 0;
                for (const auto& [succ, tried] : history) {
                    s += succ[i];
                    n += tried[i];
                }
                prob[i] = (n > 0 ? s / n : 0.0) + kSuccessFloor;
            }
            const double total = std::accumulate(prob.begin(), prob.end(), 0.0);
            for (std::size_t k = 0; k < np; ++k) {
                double r = rng.uniform() * total;
                std::size_t i = 0;
                while (i + 1 < np && r >= prob[i]) r -= prob[i++];
                selected.push_back(i);
            }
        }

        std::vector<Offspring> kids;
        for (auto i : selected) {
            const auto& nb = neighbors[i];
            const std::size_t a = nb[rng.below(nb.size())];
            std::size_t b = nb[rng.below(nb.size())];
            if (b == a && nb.size() > 1) {
                while (b == a) b = nb[rng.below(nb.size())];
            }
            Genome child = pop[a].genome;
            if (rng.bernoulli(cfg.crossover_rate)) child = uniform_crossover(pop[a].genome, pop[b].genome, rng).first;
            bitflip_mutation(child, p_mut, rng);
            kids.push_back({finish(std::move(child)), i});
        }
        std::vector<Genome> genomes;
        for (const auto& k : kids) genomes.push_back(k.genome);
        genomes = within_budget(genomes, ev, remaining());
        kids.resize(genomes.size());
        const std::size_t before = used();
        const auto evals = ev.evaluate_batch(genomes);
        stall = used() == before ? stall + 1 : 0;

        std::vector<double> succ(np, 0.0), tried(np, 0.0);
        for (std::size_t k = 0; k < kids.size(); ++k) {
            const auto& f = evals[k].objectives;
            for (std::size_t m = 0; m < kObjectives; ++m) ideal[m] = std::min(ideal[m], f[m]);
            for (auto j : neighbors[kids[k].subproblem]) {
                if (tchebycheff(f, weights[j], ideal) <= tchebycheff(pop[j].objectives, weights[j], ideal)) {
                    pop[j] = {kids[k].genome, f, 0, 0.0};
                }
            }
            tried[kids[k].subproblem] += 1;
            if (res.archive.insert(kids[k].genome, f)) succ[kids[k].subproblem] += 1;
        }
        history.emplace_back(std::move(succ), std::move(tried));
        if (history.size() > static_cast<std::size_t>(cfg.learning_generations)) history.pop_front();
        ++generation;
        record();
    }

    res.population = std::move(pop);
    res.evaluations = used();
    res.cache_hits = ev.cache_hits() - start_hits;
    return res;
}

}  // namespace coevo
