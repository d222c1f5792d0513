#include "coevo/experiment.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "coevo/error.hpp"
#include "coevo/metrics.hpp"
#include "coevo/text.hpp"

namespace coevo {

namespace fs = std::filesystem;

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Nsga2: return "nsga2";
        case Algorithm::Eagd: return "eagd";
        case Algorithm::Scalarized: return "scalarized";
        case Algorithm::TopologyOnly: return "topology-only";
        case Algorithm::Random: return "random";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
    for (auto a : {Algorithm::Nsga2, Algorithm::Eagd, Algorithm::Scalarized, Algorithm::TopologyOnly, Algorithm::Random}) {
        if (to_string(a) == s) return a;
    }
    throw ValidationError("unknown algorithm '" + s + "' (expected nsga2, eagd, scalarized, topology-only, random)");
}

nlohmann::json BaselineConfig::to_json() const {
    return {{"reduction", to_string(reduction)},
            {"mrmr_features", mrmr_features},
            {"pca_variance", pca_variance},
            {"activation", to_string(activation)}};
}

BaselineConfig BaselineConfig::from_json(const nlohmann::json& j) {
    BaselineConfig c;
    if (j.contains("reduction")) c.reduction = reduction_method_from_string(j["reduction"].get<std::string>());
    c.mrmr_features = j.value("mrmr_features", c.mrmr_features);
    c.pca_variance = j.value("pca_variance", c.pca_variance);
    if (j.contains("activation")) c.activation = activation_from_string(j["activation"].get<std::string>());
    return c;
}

RunConfig::RunConfig() { eval.cycles = 2; }

void RunConfig::validate() const {
    splits.validate();
    space.validate();
    nsga2.validate();
    eagd.validate();
    scalarized.validate();
    eval.validate();
    if (final_scg_iterations < 0) throw ValidationError("final SCG iteration cap must be non-negative");
    if (holdout_cycles < 1) throw ValidationError("hold-out cycles must be at least 1");
    if (runs < 1) throw ValidationError("runs must be at least 1");
    for (const auto& p : presets) PreferenceSpec::preset(p);
    if (baseline.mrmr_features < 1 || baseline.mrmr_features > static_cast<std::size_t>(space.n_features)) {
        throw ValidationError("mRmR subset size must be within [1, n_f]");
    }
}

nlohmann::json RunConfig::to_json() const {
    return {{"data", data},
            {"splits", splits.to_json()},
            {"search_space", space.to_json()},
            {"algorithm", to_string(algorithm)},
            {"nsga2", nsga2.to_json()},
            {"eagd", eagd.to_json()},
            {"scalarized", scalarized.to_json()},
            {"baseline", baseline.to_json()},
            {"eval", eval.to_json()},
            {"final_scg_iterations", final_scg_iterations},
            {"holdout_cycles", holdout_cycles},
            {"runs", runs},
            {"fe", max_evaluations},
            {"seed", seed},
            {"presets", presets}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        c.data = j.value("data", c.data);
        if (j.contains("splits")) c.splits = SplitSpec::from_json(j["splits"]);
        if (j.contains("search_space")) c.space = SearchSpaceConfig::from_json(j["search_space"]);
        if (j.contains("algorithm")) c.algorithm = algorithm_from_string(j["algorithm"].get<std::string>());
        if (j.contains("nsga2")) c.nsga2 = Nsga2Config::from_json(j["nsga2"]);
        if (j.contains("eagd")) c.eagd = EagdConfig::from_json(j["eagd"]);
        if (j.contains("scalarized")) c.scalarized = ScalarizedConfig::from_json(j["scalarized"]);
        if (j.contains("baseline")) c.baseline = BaselineConfig::from_json(j["baseline"]);
        if (j.contains("eval")) c.eval = EvalConfig::from_json(j["eval"]);
        c.final_scg_iterations = j.value("final_scg_iterations", c.final_scg_iterations);
        c.holdout_cycles = j.value("holdout_cycles", c.holdout_cycles);
        c.runs = j.value("runs", c.runs);
        c.max_evaluations = j.value("fe", c.max_evaluations);
        c.seed = j.value("seed", c.seed);
        c.presets = j.value("presets", c.presets);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("invalid config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig RunConfig::load(const fs::path& path) { return from_json(read_json(path)); }

std::string RunConfig::hash() const { return text::hex64(fnv1a(to_json().dump())); }

ScgConfig RunConfig::final_scg() const {
    ScgConfig s = eval.scg;
    s.max_iterations = final_scg_iterations;
    return s;
}

PreparedData prepare_data(const OhlcvSeries& series, const SplitSpec& spec) {
    spec.validate();
    PreparedData out;
    const auto patterns = build_patterns(series, FeatureCatalog::standard());
    const auto raw = split_by_dates(patterns, spec, &out.counts);
    out.standardizer = Standardizer::fit(raw.d_train);
    out.splits = out.standardizer.apply(raw);
    return out;
}

ReductionResult fit_reduction(const DatasetSplits& splits, const BaselineConfig& cfg) {
    switch (cfg.reduction) {
        case ReductionMethod::Pca: return pca_reduce(splits.d_train, cfg.pca_variance);
        case ReductionMethod::Mrmr: return mrmr_select(splits.d_train, cfg.mrmr_features);
        case ReductionMethod::Cfs: return cfs_select(splits.d_train);
    }
    throw ValidationError("unknown reduction");
}

DatasetSplits reduce_splits(const DatasetSplits& splits, const ReductionResult& reduction) {
    if (reduction.pca) return reduction.pca->apply(splits);
    std::vector<std::size_t> cols = reduction.features;
    std::sort(cols.begin(), cols.end());
    return splits.transformed([&](const PatternSet& p) { return p.select_columns(cols); });
}

Architecture architecture_for(const Genome& g, const SearchSpaceConfig& space, std::size_t reduced_dimension) {
    if (reduced_dimension > 0) return topology_architecture(g, reduced_dimension, space);
    return decode(g, space);
}

SeedOutcome run_seed(const DatasetSplits& splits, const RunConfig& cfg, Algorithm algorithm, std::uint64_t seed,
                     const DatasetSplits* reduced, std::ostream* trace, bool trace_wall) {
    EvalConfig eval = cfg.eval;
    eval.seed = seed;
    SeedOutcome out;
    out.seed = seed;

    const bool topo = algorithm == Algorithm::TopologyOnly;
    if (topo && !reduced) throw UsageError("topology-only search needs reduced splits");
    CachedEvaluator evaluator(topo ? topology_fitness(*reduced, cfg.space, eval)
                                   : architecture_fitness(splits, cfg.space, eval),
                              eval.threads);
    evaluator.set_trace(trace, trace_wall);
    const SearchProblem problem =
        topo ? topology_problem(cfg.space, evaluator) : SearchProblem::coevolution(cfg.space, evaluator);

    Nsga2Config nsga2 = cfg.nsga2;
    nsga2.seed = seed;
    nsga2.max_evaluations = cfg.max_evaluations;
    switch (algorithm) {
        case Algorithm::Nsga2:
        case Algorithm::TopologyOnly: out.result = nsga2_run(problem, nsga2); break;
        case Algorithm::Eagd: {
            EagdConfig e = cfg.eagd;
            e.seed = seed;
            e.max_evaluations = cfg.max_evaluations;
            out.result = eagd_run(problem, e);
            break;
        }
        case Algorithm::Random: out.result = random_search(problem, cfg.max_evaluations, seed); break;
        case Algorithm::Scalarized: {
            auto s = scalarized_search(problem, cfg.scalarized, nsga2);
            out.result.evaluations = s.evaluations;
            if (s.best.size() > 0) out.result.archive.insert(s.best, s.best_evaluation.objectives);
            for (const auto& t : s.trace) {
                GenerationStats g;
                g.generation = t.generation;
                g.evaluations = t.evaluations;
                out.result.generations.push_back(g);
            }
            out.scalarized = std::move(s);
            break;
        }
    }
    return out;
}

SearchOutcome run_search(const DatasetSplits& splits, const RunConfig& cfg, Algorithm algorithm, std::ostream* trace,
                         bool trace_wall_time) {
    cfg.validate();
    SearchOutcome out;
    out.algorithm = algorithm;
    std::optional<DatasetSplits> reduced;
    if (algorithm == Algorithm::TopologyOnly) {
        out.reduction = fit_reduction(splits, cfg.baseline);
        reduced = reduce_splits(splits, *out.reduction);
    }
    std::vector<ParetoArchive> archives;
    for (std::size_t k = 0; k < cfg.runs; ++k) {
        out.seeds.push_back(
            run_seed(splits, cfg, algorithm, cfg.run_seed(k), reduced ? &*reduced : nullptr, trace, trace_wall_time));
        archives.push_back(out.seeds.back().result.archive);
    }
    out.merged = merge_archives(archives);
    return out;
}

nlohmann::json HoldoutMetrics::to_json() const {
    return {{"accuracy", accuracy}, {"mcc", mcc}, {"balanced_error", balanced_error}, {"patterns", patterns}};
}

HoldoutMetrics holdout_evaluate(const Architecture& a, const DatasetSplits& splits, const RunConfig& cfg,
                                std::uint64_t seed) {
    const PatternSet& hold_all = splits.holdout();
    const PatternSet train = splits.d_train.select_columns(a.features);
    const PatternSet hold = hold_all.select_columns(a.features);
    const std::uint64_t key = fnv1a(a.to_json().dump());
    HoldoutMetrics m;
    m.balanced_error = 0.0;
    m.patterns = hold.size();
    for (int k = 0; k < cfg.holdout_cycles; ++k) {
        ScgConfig scg = cfg.final_scg();
        scg.seed = cycle_seed(seed, key, k);
        const auto model = scg_train(a.topology, a.features, train, scg);
        const auto c = confusion(predict(model, hold), hold.labels);
        m.accuracy += accuracy(c);
        m.mcc += mcc(c);
        m.balanced_error += balanced_error(c);
    }
    const double n = cfg.holdout_cycles;
    m.accuracy /= n;
    m.mcc /= n;
    m.balanced_error /= n;
    return m;
}

std::vector<RuleBaselineRow> run_rule_baselines(const DatasetSplits& reduced, const RunConfig& cfg, std::uint64_t seed) {
    std::vector<RuleBaselineRow> rows;
    const std::size_t d = reduced.feature_count();
    const RuleInputs in{static_cast<double>(d), 2.0, static_cast<double>(reduced.d_train.size())};
    for (auto rule : all_rules()) {
        RuleBaselineRow row;
        row.rule = rule;
        row.architecture.features.resize(d);
        std::iota(row.architecture.features.begin(), row.architecture.features.end(), 0);
        row.architecture.topology = rule_topology(rule, in, cfg.space, cfg.baseline.activation);
        row.complexity = complexity(row.architecture, cfg.space);
        EvalConfig eval = cfg.eval;
        eval.seed = seed;
        eval.scg.max_iterations = cfg.final_scg_iterations;
        const auto ev = evaluate_architecture(row.architecture, reduced, cfg.space, eval,
                                              fnv1a(row.architecture.to_json().dump()));
        row.metrics = ev.mean();
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json SelectionRecord::to_json(const SearchSpaceConfig& space, std::size_t reduced_dimension) const {
    nlohmann::json members_json = nlohmann::json::array();
    for (const auto& m : members) {
        nlohmann::json e = {{"genome", m.genome.to_string()}};
        e.update(m.objectives.to_json());
        members_json.push_back(e);
    }
    const auto arch = architecture_for(selected.genome, space, reduced_dimension);
    nlohmann::json sel = {{"genome", selected.genome.to_string()},
                          {"objectives", selected.objectives.to_json()},
                          {"architecture", arch.to_json()},
                          {"summary", arch.summary()}};
    if (reduced_dimension == 0) {
        const auto& cat = FeatureCatalog::standard();
        std::vector<std::string> names;
        for (auto f : arch.features) names.push_back(cat.entries()[f].name());
        sel["feature_names"] = names;
    }
    return {{"name", name},
            {"preference", preference.to_json()},
            {"weights", weights},
            {"tournament", tournament.to_json()},
            {"members", members_json},
            {"selected", sel}};
}

SelectionRecord select_from_archive(const ParetoArchive& archive, const std::string& name, const PreferenceSpec& pref) {
    SelectionRecord r;
    r.name = name;
    r.preference = pref;
    r.weights = preference_weights(pref);
    r.members = archive.sorted();
    r.tournament = mtd_select(r.members, r.weights);
    r.selected = r.members[r.tournament.selected];
    return r;
}

std::string provenance_comment(const std::string& hash, std::uint64_t seed) {
    return "# config_hash=" + hash + " seed=" + std::to_string(seed);
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

fs::path write_search_outputs(const Workspace& ws, const RunConfig& cfg, const SearchOutcome& outcome) {
    const std::string hash = cfg.hash();
    const fs::path dir = ws.run_dir(hash, outcome.algorithm);
    fs::create_directories(dir);
    const std::size_t reduced_dim = outcome.reduction ? outcome.reduction->dimension() : 0;
    const SearchSpaceConfig* space = reduced_dim ? nullptr : &cfg.space;
    nlohmann::json seeds = nlohmann::json::array();
    for (std::size_t k = 0; k < outcome.seeds.size(); ++k) {
        const auto& s = outcome.seeds[k];
        const fs::path sd = dir / ("seed-" + std::to_string(k + 1));
        fs::create_directories(sd);
        write_archive_jsonl(sd / "archive.jsonl", s.result.archive, space, provenance_comment(hash, s.seed));
        std::ofstream gen(sd / "generations.csv");
        gen << provenance_comment(hash, s.seed) << '\n' << GenerationStats::csv_header() << '\n';
        for (const auto& g : s.result.generations) gen << g.csv_row() << '\n';
        if (s.scalarized) {
            std::ofstream tr(sd / "scalarized.csv");
            tr << provenance_comment(hash, s.seed) << '\n' << "generation,evaluations,best,mean\n";
            for (const auto& t : s.scalarized->trace) {
                tr << t.generation << ',' << t.evaluations << ',' << text::format_double(t.best) << ','
                   << text::format_double(t.mean) << '\n';
            }
        }
        seeds.push_back({{"seed", s.seed},
                         {"evaluations", s.result.evaluations},
                         {"cache_hits", s.result.cache_hits},
                         {"archive_size", s.result.archive.size()}});
    }
    fs::create_directories(dir / "merged");
    write_archive_jsonl(dir / "merged" / "archive.jsonl", outcome.merged, space, provenance_comment(hash, cfg.seed));
    if (outcome.reduction) write_json(dir / "reduction.json", outcome.reduction->to_json());
    write_json(dir / "run.json", {{"config_hash", hash},
                                  {"config", cfg.to_json()},
                                  {"algorithm", to_string(outcome.algorithm)},
                                  {"seeds", seeds},
                                  {"merged_size", outcome.merged.size()},
                                  {"merged_hypervolume", hypervolume(outcome.merged, ObjectiveVector{1, 1, 1})}});
    write_json(ws.index_file(outcome.algorithm),
               {{"config_hash", hash}, {"run_dir", fs::relative(dir, ws.root).generic_string()}});
    return dir;
}

StoredRun load_search(const Workspace& ws, Algorithm algorithm) {
    const fs::path index = ws.index_file(algorithm);
    if (!fs::exists(index)) {
        throw UsageError("no " + to_string(algorithm) + " search found in " + ws.root.string() +
                         "; run the search subcommand with --algo " + to_string(algorithm) + " first");
    }
    const auto idx = read_json(index);
    StoredRun r;
    r.algorithm = algorithm;
    r.dir = ws.root / idx.at("run_dir").get<std::string>();
    r.config_hash = idx.at("config_hash").get<std::string>();
    const auto run = read_json(r.dir / "run.json");
    r.config = RunConfig::from_json(run.at("config"));
    r.merged = read_archive_jsonl(r.dir / "merged" / "archive.jsonl");
    for (std::size_t k = 1; fs::exists(r.dir / ("seed-" + std::to_string(k))); ++k) {
        r.per_seed.push_back(read_archive_jsonl(r.dir / ("seed-" + std::to_string(k)) / "archive.jsonl"));
    }
    if (fs::exists(r.dir / "reduction.json")) r.reduction = ReductionResult::from_json(read_json(r.dir / "reduction.json"));
    return r;
}

}  // namespace coevo
