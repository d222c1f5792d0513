#include "coevo/moea.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "coevo/error.hpp"
#include "coevo/text.hpp"

namespace coevo {

std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const ObjectiveVector> points) {
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(points[p], points[q])) {
                dominated[p].push_back(q);
            } else if (dominates(points[q], points[p])) {
                ++count[p];
            }
        }
        if (count[p] == 0) current.push_back(p);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto p : current) {
            for (auto q : dominated[p]) {
                if (--count[q] == 0) next.push_back(q);
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> points, std::span<const std::size_t> front) {
    const std::size_t n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        return dist;
    }
    std::vector<std::size_t> order(n);
    for (std::size_t m = 0; m < kObjectives; ++m) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return points[front[a]][m] < points[front[b]][m]; });
        const double lo = points[front[order.front()]][m];
        const double hi = points[front[order.back()]][m];
        if (hi <= lo) continue;  // a constant objective has no extremes
        dist[order.front()] = std::numeric_limits<double>::infinity();
        dist[order.back()] = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k + 1 < n; ++k) {
            dist[order[k]] += (points[front[order[k + 1]]][m] - points[front[order[k - 1]]][m]) / (hi - lo);
        }
    }
    return dist;
}

void assign_rank_and_crowding(std::vector<Individual>& pop) {
    std::vector<ObjectiveVector> pts;
    pts.reserve(pop.size());
    for (const auto& i : pop) pts.push_back(i.objectives);
    const auto fronts = fast_nondominated_sort(pts);
    for (std::size_t r = 0; r < fronts.size(); ++r) {
        const auto cd = crowding_distance(pts, fronts[r]);
        for (std::size_t k = 0; k < fronts[r].size(); ++k) {
            pop[fronts[r][k]].rank = static_cast<int>(r);
            pop[fronts[r][k]].crowding = cd[k];
        }
    }
}

const Individual& crowding_tournament(const Individual& a, const Individual& b, Rng& rng) {
    if (a.rank != b.rank) return a.rank < b.rank ? a : b;
    if (a.crowding != b.crowding) return a.crowding > b.crowding ? a : b;
    return rng.bernoulli(0.5) ? a : b;
}

namespace {

void require_same_length(const Genome& a, const Genome& b) {
    if (a.size() != b.size()) throw ValidationError("parents differ in length");
}

}  // namespace

std::pair<Genome, Genome> uniform_crossover(const Genome& p1, const Genome& p2, Rng& rng) {
    require_same_length(p1, p2);
    Genome c1 = p1, c2 = p2;
    for (std::size_t i = 0; i < p1.size(); ++i) {
        if (rng.bernoulli(0.5)) std::swap(c1.bits[i], c2.bits[i]);
    }
    return {std::move(c1), std::move(c2)};
}

Genome nongeometric_crossover(const Genome& p1, const Genome& p2, Rng& rng, double p_flip) {
    require_same_length(p1, p2);
    Genome c(p1.size());
    for (std::size_t i = 0; i < p1.size(); ++i) {
        c.bits[i] = rng.bernoulli(0.5) ? p1.bits[i] : p2.bits[i];
        if (p1.bits[i] == p2.bits[i] && rng.bernoulli(p_flip)) c.bits[i] ^= 1;
    }
    return c;
}

void bitflip_mutation(Genome& g, double rate, Rng& rng) {
    for (auto& b : g.bits) {
        if (rng.bernoulli(rate)) b ^= 1;
    }
}

std::size_t hamming(const Genome& a, const Genome& b) {
    require_same_length(a, b);
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a.bits[i] != b.bits[i];
    return d;
}

SearchProblem SearchProblem::coevolution(const SearchSpaceConfig& space, CachedEvaluator& evaluator) {
    SearchProblem p;
    p.genome_length = space.length();
    p.repair = [space](Genome& g, Rng& rng) { coevo::repair(g, space, rng); };
    p.evaluator = &evaluator;
    return p;
}

void SearchProblem::validate() const {
    if (genome_length == 0) throw ValidationError("genome length must be positive");
    if (!evaluator) throw UsageError("search problem has no evaluator");
}

std::string GenerationStats::csv_header() {
    return "generation,evaluations,cache_hits,best_e_cv,best_c,best_e_pr,mean_e_cv,mean_c,mean_e_pr,front_size,"
           "hypervolume";
}

std::string GenerationStats::csv_row() const {
    std::ostringstream os;
    os << generation << ',' << evaluations << ',' << cache_hits;
    for (std::size_t m = 0; m < kObjectives; ++m) os << ',' << text::format_double(best[m]);
    for (std::size_t m = 0; m < kObjectives; ++m) os << ',' << text::format_double(mean[m]);
    os << ',' << front_size << ',' << text::format_double(hypervolume);
    return os.str();
}

GenerationStats population_stats(std::span<const Individual> pop, int generation, std::size_t evaluations,
                                 std::size_t cache_hits) {
    GenerationStats s;
    s.generation = generation;
    s.evaluations = evaluations;
    s.cache_hits = cache_hits;
    if (pop.empty()) return s;
    s.mean = {0, 0, 0};
    ParetoArchive front;
    for (const auto& ind : pop) {
        for (std::size_t m = 0; m < kObjectives; ++m) {
            s.best[m] = std::min(s.best[m], ind.objectives[m]);
            s.mean[m] += ind.objectives[m];
        }
        front.insert(ind.genome, ind.objectives);
    }
    for (std::size_t m = 0; m < kObjectives; ++m) s.mean[m] /= static_cast<double>(pop.size());
    s.front_size = front.size();
    s.hypervolume = hypervolume(front, ObjectiveVector{1, 1, 1});
    return s;
}

void Nsga2Config::validate() const {
    if (population < 2 || population % 2 != 0) throw ValidationError("population size must be even and at least 2");
    auto prob = [](double p, const char* what) {
        if (p < 0 || p > 1) throw ValidationError(std::string(what) + " must be within [0, 1]");
    };
    prob(crossover_rate, "crossover rate");
    prob(nongeometric_rate, "non-geometric crossover probability");
    if (flip_probability > 1) throw ValidationError("flip probability must be at most 1");
    if (mutation_rate > 1) throw ValidationError("mutation rate must be at most 1");
    if (stall_generations < 1) throw ValidationError("stall limit must be positive");
}

nlohmann::json Nsga2Config::to_json() const {
    return {{"population", population},
            {"crossover_rate", crossover_rate},
            {"nongeometric_rate", nongeometric_rate},
            {"flip_probability", flip_probability},
            {"mutation_rate", mutation_rate},
            {"max_evaluations", max_evaluations},
            {"seed", seed},
            {"stall_generations", stall_generations}};
}

Nsga2Config Nsga2Config::from_json(const nlohmann::json& j) {
    Nsga2Config c;
    c.population = j.value("population", c.population);
    c.crossover_rate = j.value("crossover_rate", c.crossover_rate);
    c.nongeometric_rate = j.value("nongeometric_rate", c.nongeometric_rate);
    c.flip_probability = j.value("flip_probability", c.flip_probability);
    c.mutation_rate = j.value("mutation_rate", c.mutation_rate);
    c.max_evaluations = j.value("max_evaluations", c.max_evaluations);
    c.seed = j.value("seed", c.seed);
    c.stall_generations = j.value("stall_generations", c.stall_generations);
    c.validate();
    return c;
}

std::vector<Genome> within_budget(std::span<const Genome> candidates, const CachedEvaluator& evaluator,
                                  std::size_t remaining) {
    std::vector<Genome> out;
    std::unordered_set<Genome, GenomeHash> fresh;
    for (const auto& g : candidates) {
        if (!evaluator.cached(g) && !fresh.count(g)) {
            if (fresh.size() >= remaining) break;
            fresh.insert(g);
        }
        out.push_back(g);
    }
    return out;
}

namespace {

std::vector<Individual> evaluate_all(const SearchProblem& problem, const std::vector<Genome>& genomes) {
    const auto evals = problem.evaluator->evaluate_batch(genomes);
    std::vector<Individual> out;
    out.reserve(genomes.size());
    for (std::size_t i = 0; i < genomes.size(); ++i) out.push_back({genomes[i], evals[i].objectives, 0, 0.0});
    return out;
}

ParetoArchive rank_zero(std::span<const Individual> pop) {
    ParetoArchive a;
    for (const auto& ind : pop) {
        if (ind.rank == 0) a.insert(ind.genome, ind.objectives);
    }
    return a;
}

// Environmental selection: whole fronts, then the last front by descending crowding.
std::vector<Individual> survivors(std::vector<Individual> merged, std::size_t n) {
    std::vector<ObjectiveVector> pts;
    for (const auto& i : merged) pts.push_back(i.objectives);
    const auto fronts = fast_nondominated_sort(pts);
    std::vector<Individual> next;
    for (const auto& front : fronts) {
        if (next.size() >= n) break;
        const auto cd = crowding_distance(pts, front);
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), 0);
        if (next.size() + front.size() > n) {
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cd[a] > cd[b]; });
        }
        for (auto k : order) {
            if (next.size() >= n) break;
            next.push_back(merged[front[k]]);
        }
    }
    assign_rank_and_crowding(next);
    return next;
}

}  // namespace

SearchResult nsga2_run(const SearchProblem& problem, const Nsga2Config& cfg, const GenerationCallback& on_generation) {
    problem.validate();
    cfg.validate();
    const double n = static_cast<double>(problem.genome_length);
    const double p_flip = cfg.flip_probability < 0 ? 1.0 / n : cfg.flip_probability;
    const double p_mut = cfg.mutation_rate < 0 ? 1.0 / n : cfg.mutation_rate;
    auto& ev = *problem.evaluator;
    const std::size_t start_evals = ev.evaluations();
    const std::size_t start_hits = ev.cache_hits();
    auto used = [&] { return ev.evaluations() - start_evals; };
    auto remaining = [&] { return cfg.max_evaluations > used() ? cfg.max_evaluations - used() : 0; };

    Rng rng(cfg.seed);
    auto fresh = [&](Genome g) {
        if (problem.repair) problem.repair(g, rng);
        return g;
    };

    std::vector<Genome> initial;
    for (std::size_t i = 0; i < cfg.population; ++i) {
        Genome g(problem.genome_length);
        for (auto& b : g.bits) b = static_cast<std::uint8_t>(rng.next() >> 63);
        initial.push_back(fresh(std::move(g)));
    }
    initial = within_budget(initial, ev, remaining());

    SearchResult res;
    std::vector<Individual> pop = evaluate_all(problem, initial);
    assign_rank_and_crowding(pop);
    int generation = 0;
    auto record = [&] {
        auto stats = population_stats(pop, generation, used(), ev.cache_hits() - start_hits);
        res.generations.push_back(stats);
        if (on_generation) on_generation(stats, pop);
    };
    record();

    int stall = 0;
    while (!pop.empty() && remaining() > 0 && stall < cfg.stall_generations) {
        std::vector<Genome> offspring;
        while (offspring.size() < cfg.population) {
            const auto& a = crowding_tournament(pop[rng.below(pop.size())], pop[rng.below(pop.size())], rng);
            const auto& b = crowding_tournament(pop[rng.below(pop.size())], pop[rng.below(pop.size())], rng);
            Genome c1, c2;
            if (rng.bernoulli(cfg.crossover_rate)) {
                if (rng.bernoulli(cfg.nongeometric_rate)) {
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
            offspring.push_back(fresh(std::move(c1)));
            offspring.push_back(fresh(std::move(c2)));
        }
        offspring = within_budget(offspring, ev, remaining());
        const std::size_t before = used();
        auto children = evaluate_all(problem, offspring);
        stall = used() == before ? stall + 1 : 0;

        std::vector<Individual> merged = std::move(pop);
        merged.insert(merged.end(), std::make_move_iterator(children.begin()), std::make_move_iterator(children.end()));
        pop = survivors(std::move(merged), cfg.population);
        ++generation;
        record();
    }

    res.archive = rank_zero(pop);
    res.population = std::move(pop);
    res.evaluations = used();
    res.cache_hits = ev.cache_hits() - start_hits;
    return res;
}

SearchResult random_search(const SearchProblem& problem, std::size_t max_evaluations, std::uint64_t seed,
                           std::size_t batch) {
    problem.validate();
    if (batch == 0) throw ValidationError("batch size must be positive");
    auto& ev = *problem.evaluator;
    const std::size_t start_evals = ev.evaluations();
    const std::size_t start_hits = ev.cache_hits();
    auto used = [&] { return ev.evaluations() - start_evals; };
    Rng rng(seed);
    SearchResult res;
    int generation = 0;
    int stall = 0;
    while (used() < max_evaluations && stall < 50) {
        std::vector<Genome> genomes;
        for (std::size_t i = 0; i < batch; ++i) {
            Genome g(problem.genome_length);
            for (auto& b : g.bits) b = static_cast<std::uint8_t>(rng.next() >> 63);
            if (problem.repair) problem.repair(g, rng);
            genomes.push_back(std::move(g));
        }
        genomes = within_budget(genomes, ev, max_evaluations - used());
        const std::size_t before = used();
        auto pop = evaluate_all(problem, genomes);
        stall = used() == before ? stall + 1 : 0;
        for (const auto& ind : pop) res.archive.insert(ind.genome, ind.objectives);
        std::vector<Individual> front;
        for (const auto& e : res.archive.entries()) front.push_back({e.genome, e.objectives, 0, 0.0});
        res.generations.push_back(population_stats(front, generation++, used(), ev.cache_hits() - start_hits));
    }
    res.evaluations = used();
    res.cache_hits = ev.cache_hits() - start_hits;
    for (const auto& e : res.archive.entries()) res.population.push_back({e.genome, e.objectives, 0, 0.0});
    return res;
}

}  // namespace coevo
