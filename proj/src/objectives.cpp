#include "coevo/objectives.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <thread>

#include "coevo/error.hpp"
#include "coevo/metrics.hpp"

namespace coevo {

nlohmann::json ObjectiveVector::to_json() const { return {{"e_cv", e_cv}, {"c", c}, {"e_pr", e_pr}}; }

ObjectiveVector ObjectiveVector::from_json(const nlohmann::json& j) {
    return {j.at("e_cv").get<double>(), j.at("c").get<double>(), j.at("e_pr").get<double>()};
}

void EvalConfig::validate() const {
    if (cycles < 1) throw ValidationError("cycles must be at least 1");
    scg.validate();
}

nlohmann::json EvalConfig::to_json() const {
    return {{"cycles", cycles}, {"scg", scg.to_json()}, {"seed", seed}};
}

EvalConfig EvalConfig::from_json(const nlohmann::json& j) {
    EvalConfig c;
    c.cycles = j.value("cycles", c.cycles);
    if (j.contains("scg")) c.scg = ScgConfig::from_json(j["scg"]);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.validate();
    return c;
}

nlohmann::json CycleMetrics::to_json() const {
    return {{"balanced_error_test", balanced_error_test},
            {"balanced_error_pr", balanced_error_pr},
            {"accuracy_test", accuracy_test},
            {"accuracy_pr", accuracy_pr},
            {"mcc_test", mcc_test},
            {"mcc_pr", mcc_pr},
            {"failed", failed}};
}

CycleMetrics Evaluation::mean() const {
    CycleMetrics m{0, 0, 0, 0, 0, 0, false};
    if (cycles.empty()) return CycleMetrics{};
    for (const auto& c : cycles) {
        m.balanced_error_test += c.balanced_error_test;
        m.balanced_error_pr += c.balanced_error_pr;
        m.accuracy_test += c.accuracy_test;
        m.accuracy_pr += c.accuracy_pr;
        m.mcc_test += c.mcc_test;
        m.mcc_pr += c.mcc_pr;
        m.failed = m.failed || c.failed;
    }
    const double n = static_cast<double>(cycles.size());
    m.balanced_error_test /= n;
    m.balanced_error_pr /= n;
    m.accuracy_test /= n;
    m.accuracy_pr /= n;
    m.mcc_test /= n;
    m.mcc_pr /= n;
    return m;
}

std::uint64_t cycle_seed(std::uint64_t run_seed, std::uint64_t genome_key, int cycle) {
    return hash_combine(hash_combine(run_seed, genome_key), static_cast<std::uint64_t>(cycle));
}

Evaluation evaluate_architecture(const Architecture& a, const DatasetSplits& splits, const SearchSpaceConfig& space,
                                 const EvalConfig& cfg, std::uint64_t genome_key) {
    cfg.validate();
    if (a.features.empty()) throw EmptyFeatureSetError("architecture selects no features");
    const auto start = std::chrono::steady_clock::now();
    const PatternSet train = splits.d_train.select_columns(a.features);
    const PatternSet test = splits.d_test.select_columns(a.features);
    const PatternSet pr = splits.d_pr.select_columns(a.features);

    Evaluation ev;
    ev.objectives.c = complexity(a, space);
    for (int k = 0; k < cfg.cycles; ++k) {
        ScgConfig scg = cfg.scg;
        scg.seed = cycle_seed(cfg.seed, genome_key, k);
        CycleMetrics m;
        try {
            const TrainedModel model = scg_train(a.topology, a.features, train, scg);
            const auto c_test = confusion(predict(model, test), test.labels);
            const auto c_pr = confusion(predict(model, pr), pr.labels);
            m.balanced_error_test = balanced_error(c_test);
            m.balanced_error_pr = balanced_error(c_pr);
            m.accuracy_test = accuracy(c_test);
            m.accuracy_pr = accuracy(c_pr);
            m.mcc_test = mcc(c_test);
            m.mcc_pr = mcc(c_pr);
        } catch (const TrainingError&) {
            m = CycleMetrics{};
            m.failed = true;
        }
        ev.cycles.push_back(m);
    }
    const auto mean = ev.mean();
    ev.objectives.e_cv = mean.balanced_error_test;
    ev.objectives.e_pr = mean.balanced_error_pr;
    ev.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return ev;
}

ObjectiveVector evaluate(const Genome& g, const DatasetSplits& splits, const SearchSpaceConfig& space,
                         const EvalConfig& cfg) {
    return evaluate_architecture(decode(g, space), splits, space, cfg, GenomeHash{}(g)).objectives;
}

FitnessFunction architecture_fitness(const DatasetSplits& splits, SearchSpaceConfig space, EvalConfig cfg,
                                     Decoder decoder) {
    cfg.validate();
    space.validate();
    if (!decoder) decoder = [space](const Genome& g) { return decode(g, space); };
    return [&splits, space, cfg, decoder](const Genome& g) {
        return evaluate_architecture(decoder(g), splits, space, cfg, GenomeHash{}(g));
    };
}

CachedEvaluator::CachedEvaluator(FitnessFunction fn, unsigned threads) : fn_(std::move(fn)), threads_(threads) {
    if (!fn_) throw UsageError("evaluator needs a fitness function");
    if (threads_ == 0) threads_ = std::max(1u, std::thread::hardware_concurrency());
}

Evaluation CachedEvaluator::evaluate(const Genome& g) {
    return evaluate_batch(std::span<const Genome>(&g, 1)).front();
}

std::vector<Evaluation> CachedEvaluator::evaluate_batch(std::span<const Genome> genomes) {
    std::vector<const Genome*> pending;
    {
        std::lock_guard lock(mutex_);
        std::unordered_map<Genome, bool, GenomeHash> seen;
        for (const auto& g : genomes) {
            if (cache_.count(g) || seen.count(g)) continue;
            seen.emplace(g, true);
            pending.push_back(&g);
        }
    }

    std::vector<Evaluation> fresh(pending.size());
    const unsigned workers = std::min<unsigned>(threads_, static_cast<unsigned>(pending.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < pending.size(); ++i) fresh[i] = fn_(*pending[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < pending.size(); i = next++) {
                    try {
                        fresh[i] = fn_(*pending[i]);
                    } catch (...) {
                        std::lock_guard el(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    std::vector<Evaluation> out;
    out.reserve(genomes.size());
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < pending.size(); ++i) {
        if (trace_) {
            nlohmann::json line = {{"genome", pending[i]->to_string()}};
            line.update(fresh[i].objectives.to_json());
            nlohmann::json cycles = nlohmann::json::array();
            for (const auto& c : fresh[i].cycles) cycles.push_back(c.to_json());
            line["cycles"] = cycles;
            if (trace_wall_) line["wall_seconds"] = fresh[i].wall_seconds;
            *trace_ << line.dump() << '\n';
        }
        cache_.emplace(*pending[i], std::move(fresh[i]));
    }
    evaluations_ += pending.size();
    hits_ += genomes.size() - pending.size();
    for (const auto& g : genomes) out.push_back(cache_.at(g));
    return out;
}

bool CachedEvaluator::cached(const Genome& g) const {
    std::lock_guard lock(mutex_);
    return cache_.count(g) > 0;
}

std::size_t CachedEvaluator::evaluations() const {
    std::lock_guard lock(mutex_);
    return evaluations_;
}

std::size_t CachedEvaluator::cache_hits() const {
    std::lock_guard lock(mutex_);
    return hits_;
}

void CachedEvaluator::set_trace(std::ostream* out, bool include_wall_time) {
    std::lock_guard lock(mutex_);
    trace_ = out;
    trace_wall_ = include_wall_time;
}

void ScalarizedConfig::validate() const {
    if (theta_e < 0 || theta_c < 0) throw ValidationError("scalarized weights must be non-negative");
    if (eps1 < -1 || eps1 > 1 || eps2 < -1 || eps2 > 1) throw ValidationError("MCC thresholds must be within [-1, 1]");
    if (eps3 < 0 || eps3 > 1) throw ValidationError("error threshold must be within [0, 1]");
}

nlohmann::json ScalarizedConfig::to_json() const {
    return {{"theta_e", theta_e}, {"theta_c", theta_c}, {"eps1", eps1}, {"eps2", eps2}, {"eps3", eps3}};
}

ScalarizedConfig ScalarizedConfig::from_json(const nlohmann::json& j) {
    ScalarizedConfig c;
    c.theta_e = j.value("theta_e", c.theta_e);
    c.theta_c = j.value("theta_c", c.theta_c);
    c.eps1 = j.value("eps1", c.eps1);
    c.eps2 = j.value("eps2", c.eps2);
    c.eps3 = j.value("eps3", c.eps3);
    c.validate();
    return c;
}

double penalty(double mcc_test, double mcc_pr, double e_pr, const ScalarizedConfig& cfg) {
    return 5.0 * (std::max(0.0, cfg.eps1 - mcc_test) + std::max(0.0, cfg.eps2 - mcc_pr) +
                  std::max(0.0, e_pr - cfg.eps3));
}

double scalarized_objective(const Evaluation& e, const ScalarizedConfig& cfg) {
    const auto m = e.mean();
    const double e_test = 1.0 - m.accuracy_test;
    const double e_pr = 1.0 - m.accuracy_pr;
    return cfg.theta_e * e_test + cfg.theta_c * e.objectives.c + penalty(m.mcc_test, m.mcc_pr, e_pr, cfg);
}

double scalarized_objective(const Genome& g, const DatasetSplits& splits, const ScalarizedConfig& cfg,
                            const SearchSpaceConfig& space, const EvalConfig& eval) {
    cfg.validate();
    return scalarized_objective(evaluate_architecture(decode(g, space), splits, space, eval, GenomeHash{}(g)), cfg);
}

}  // namespace coevo
