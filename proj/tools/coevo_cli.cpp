#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coevo/error.hpp"
#include "coevo/experiment.hpp"
#include "coevo/stats.hpp"
#include "coevo/synth.hpp"
#include "coevo/text.hpp"

namespace fs = std::filesystem;
using namespace coevo;

namespace {

struct Common {
    std::string workspace = "coevo-work";
    std::string config;
};

struct Overrides {
    std::optional<std::size_t> fe, runs;
    std::optional<std::uint64_t> seed;
    std::optional<int> cycles, scg_iterations, final_iterations;
    std::optional<unsigned> threads;
    std::optional<std::string> reduction;
    std::optional<std::size_t> mrmr_k;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--fe", o.fe, "Function-evaluation budget per run");
    cmd->add_option("--runs", o.runs, "Independent runs (seeds seed..seed+runs-1)");
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--cycles", o.cycles, "Training cycles per evaluation");
    cmd->add_option("--scg-iterations", o.scg_iterations, "SCG iteration cap during search");
    cmd->add_option("--final-iterations", o.final_iterations, "SCG iteration cap for final models");
    cmd->add_option("--threads", o.threads, "Evaluation threads (0 = all cores)");
    cmd->add_option("--reduction", o.reduction, "Input reduction for baselines: none, pca, mrmr, cfs");
    cmd->add_option("--mrmr-k", o.mrmr_k, "mRmR subset size");
}

RunConfig load_config(const Common& c, const Overrides& o) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : RunConfig::load(c.config);
    if (o.fe) cfg.max_evaluations = *o.fe;
    if (o.runs) cfg.runs = *o.runs;
    if (o.seed) cfg.seed = *o.seed;
    if (o.cycles) cfg.eval.cycles = *o.cycles;
    if (o.scg_iterations) cfg.eval.scg.max_iterations = *o.scg_iterations;
    if (o.final_iterations) cfg.final_scg_iterations = *o.final_iterations;
    if (o.threads) cfg.eval.threads = *o.threads;
    if (o.reduction && *o.reduction != "none") cfg.baseline.reduction = reduction_method_from_string(*o.reduction);
    if (o.mrmr_k) cfg.baseline.mrmr_features = *o.mrmr_k;
    cfg.validate();
    return cfg;
}

DatasetSplits load_sealed(const Workspace& ws) {
    if (!fs::exists(ws.data_dir() / "manifest.json")) {
        throw UsageError("no prepared data in " + ws.root.string() + "; run the ingest subcommand first");
    }
    auto loaded = load_splits(ws.data_dir());
    loaded.splits.seal_holdout();
    return loaded.splits;
}

DatasetSplits load_unsealed(const Workspace& ws) {
    auto s = load_sealed(ws);
    s.unseal_holdout();
    return s;
}

PreferenceSpec preference_from(const std::string& preset, const std::string& rank, double intensity, std::string& name) {
    if (!rank.empty()) {
        PreferenceSpec p{PreferenceSpec::parse_ranks(rank), intensity};
        p.validate();
        if (name.empty()) name = "custom";
        return p;
    }
    name = preset;
    return PreferenceSpec::preset(preset);
}

int cmd_synth(const std::string& output, const std::string& manifest, std::uint64_t seed, SynthSpec spec) {
    spec.validate();
    const auto res = synth_generate(spec, seed);
    if (fs::path(output).has_parent_path()) fs::create_directories(fs::path(output).parent_path());
    write_ohlcv_csv(output, res.series);
    const std::string mpath = manifest.empty() ? output + ".manifest.json" : manifest;
    write_json(mpath, res.manifest(spec, seed));
    std::cout << "wrote " << res.series.size() << " bars to " << output << " (up fraction "
              << text::format_double(res.up_fraction) << ")\n";
    return 0;
}

int cmd_ingest(const Workspace& ws, RunConfig cfg, const std::string& data) {
    if (!data.empty()) cfg.data = data;
    if (cfg.data.empty()) throw UsageError("ingest needs --data or a config with a data path");
    const auto series = load_ohlcv_csv(cfg.data);
    const auto prepared = prepare_data(series, cfg.splits);
    const auto& c = prepared.counts;
    save_splits(ws.data_dir(), prepared.splits, cfg.splits, prepared.standardizer,
                {{"source", fs::path(cfg.data).filename().string()}, {"bars", series.size()}});
    std::cout << "patterns: pr=" << c.pr << " train=" << c.train << " test=" << c.test << " hold=" << c.hold
              << " dropped=" << c.dropped << '\n';
    return 0;
}

int cmd_search(const Workspace& ws, const RunConfig& cfg, const std::string& algo, const std::string& trace_path,
               bool trace_wall) {
    const Algorithm a = algorithm_from_string(algo);
    const auto splits = load_sealed(ws);
    std::ofstream trace;
    if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw Error("cannot write " + trace_path);
    }
    const auto outcome = run_search(splits, cfg, a, trace_path.empty() ? nullptr : &trace, trace_wall);
    if (splits.holdout_reads() != 0) throw Error("search read the hold-out split");
    const auto dir = write_search_outputs(ws, cfg, outcome);
    std::cout << to_string(a) << ": " << outcome.seeds.size() << " runs, merged archive " << outcome.merged.size()
              << " members, hypervolume " << text::format_double(hypervolume(outcome.merged, ObjectiveVector{1, 1, 1}))
              << "\noutputs in " << dir.string() << '\n';
    return 0;
}

int cmd_select(const Workspace& ws, const std::string& algo, std::vector<std::string> presets, const std::string& rank,
               double intensity, std::string name) {
    const auto run = load_search(ws, algorithm_from_string(algo));
    if (run.merged.empty()) throw Error("merged archive is empty");
    if (presets.empty() && rank.empty()) presets = run.config.presets;
    const std::size_t dim = run.reduction ? run.reduction->dimension() : 0;
    auto emit = [&](const PreferenceSpec& pref, const std::string& label) {
        const auto rec = select_from_archive(run.merged, label, pref);
        auto j = rec.to_json(run.config.space, dim);
        j["config_hash"] = run.config_hash;
        j["seed"] = run.config.seed;
        write_json(run.dir / "selected" / (label + ".json"), j);
        std::cout << label << ": " << architecture_for(rec.selected.genome, run.config.space, dim).summary()
                  << " e_cv=" << text::format_double(rec.selected.objectives.e_cv)
                  << " c=" << text::format_double(rec.selected.objectives.c)
                  << " e_pr=" << text::format_double(rec.selected.objectives.e_pr) << '\n';
    };
    if (!rank.empty()) {
        std::string label = name;
        const auto pref = preference_from("", rank, intensity, label);
        emit(pref, label);
    } else {
        for (const auto& p : presets) emit(PreferenceSpec::preset(p), p);
    }
    return 0;
}

int cmd_baseline(const Workspace& ws, const RunConfig& cfg, const std::string& reduction) {
    const auto splits = load_sealed(ws);
    std::optional<ReductionResult> red;
    DatasetSplits reduced = splits;
    std::string label = "none";
    if (!reduction.empty() && reduction != "none") {
        red = fit_reduction(splits, cfg.baseline);
        reduced = reduce_splits(splits, *red);
        label = to_string(red->method);
    }
    const auto rows = run_rule_baselines(reduced, cfg, cfg.seed);
    const auto dir = ws.baseline_dir(cfg.hash()) / label;
    fs::create_directories(dir);
    if (red) write_json(dir / "reduction.json", red->to_json());
    std::ofstream csv(dir / "rules.csv");
    csv << provenance_comment(cfg.hash(), cfg.seed) << '\n'
        << "rule,inputs,s1,s2,complexity,accuracy_test,mcc_test,balanced_error_test,accuracy_pr,mcc_pr,"
           "balanced_error_pr\n";
    for (const auto& r : rows) {
        const auto& l = r.architecture.topology.layers;
        csv << to_string(r.rule) << ',' << r.architecture.features.size() << ',' << l[0].size << ','
            << (l.size() > 1 ? l[1].size : 0) << ',' << text::format_double(r.complexity) << ','
            << text::format_double(r.metrics.accuracy_test) << ',' << text::format_double(r.metrics.mcc_test) << ','
            << text::format_double(r.metrics.balanced_error_test) << ',' << text::format_double(r.metrics.accuracy_pr)
            << ',' << text::format_double(r.metrics.mcc_pr) << ','
            << text::format_double(r.metrics.balanced_error_pr) << '\n';
        std::cout << to_string(r.rule) << ": " << r.architecture.summary()
                  << " balanced_error_test=" << text::format_double(r.metrics.balanced_error_test) << '\n';
    }
    write_json(ws.root / "index" / ("baseline-" + label + ".json"),
               {{"config_hash", cfg.hash()}, {"dir", fs::relative(dir, ws.root).generic_string()}});
    return 0;
}

// Stored search config with the final-training cap overridden when given on the command line.
RunConfig effective(const RunConfig& stored, const Overrides& o) {
    RunConfig c = stored;
    if (o.final_iterations) c.final_scg_iterations = *o.final_iterations;
    return c;
}

int cmd_holdout(const Workspace& ws, const RunConfig& cfg, const Overrides& ov, const std::string& algo,
                const std::string& preset, const std::string& baseline, const std::string& rule) {
    const auto splits = load_unsealed(ws);
    nlohmann::json out;
    std::string file;
    HoldoutMetrics m;
    if (!baseline.empty()) {
        const std::string label = baseline;
        DatasetSplits reduced = splits;
        if (label != "none") {
            const auto idx = ws.root / "index" / ("baseline-" + label + ".json");
            if (!fs::exists(idx)) {
                throw UsageError("no " + label + " baseline found; run the baseline subcommand with --reduction " + label +
                                 " first");
            }
            const auto dir = ws.root / read_json(idx).at("dir").get<std::string>();
            reduced = reduce_splits(splits, ReductionResult::from_json(read_json(dir / "reduction.json")));
        }
        const std::size_t d = reduced.feature_count();
        const RuleInputs in{static_cast<double>(d), 2.0, static_cast<double>(reduced.d_train.size())};
        Architecture a;
        a.features.resize(d);
        std::iota(a.features.begin(), a.features.end(), 0);
        a.topology = rule_topology(rule_from_string(rule), in, cfg.space, cfg.baseline.activation);
        m = holdout_evaluate(a, reduced, cfg, cfg.seed);
        out = {{"baseline", label}, {"rule", rule}, {"architecture", a.to_json()}};
        file = "baseline-" + label + "-" + rule + ".json";
    } else {
        const auto run = load_search(ws, algorithm_from_string(algo));
        const auto sel_path = run.dir / "selected" / (preset + ".json");
        if (!fs::exists(sel_path)) {
            throw UsageError("no selection '" + preset + "' for " + algo + "; run the select subcommand first");
        }
        const auto sel = read_json(sel_path);
        const auto a = Architecture::from_json(sel.at("selected").at("architecture"));
        DatasetSplits reduced = run.reduction ? reduce_splits(splits, *run.reduction) : splits;
        m = holdout_evaluate(a, reduced, effective(run.config, ov), run.config.seed);
        out = {{"algorithm", algo}, {"preset", preset}, {"architecture", a.to_json()}};
        file = algo + "-" + preset + ".json";
    }
    out["holdout"] = m.to_json();
    out["config_hash"] = cfg.hash();
    out["seed"] = cfg.seed;
    write_json(ws.root / "holdout" / file, out);
    std::cout << "hold-out: accuracy=" << text::format_double(m.accuracy) << " mcc=" << text::format_double(m.mcc)
              << " balanced_error=" << text::format_double(m.balanced_error) << " (" << m.patterns << " patterns)\n";
    return 0;
}

MetricTable read_table(const std::string& path, std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    MetricTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty() || line[0] == '#') continue;
        const auto cells = text::split(line, ',');
        if (header.empty()) {
            for (auto c : cells) header.emplace_back(text::trim(c));
            continue;
        }
        std::vector<double> row;
        for (auto c : cells) {
            double v = 0;
            if (!text::parse_double(c, v)) throw ParseError(path + ": line " + std::to_string(line_no) + ": not a number");
            row.push_back(v);
        }
        t.push_back(std::move(row));
    }
    return t;
}

int cmd_stats(const Workspace& ws, const RunConfig& cfg, const Overrides& ov, const std::string& table_path,
              std::vector<std::string> algos, const std::string& preset, bool higher_better, std::size_t control,
              double alpha) {
    MetricTable table;
    std::vector<std::string> header;
    if (!table_path.empty()) {
        table = read_table(table_path, header);
    } else {
        if (algos.size() < 2) throw UsageError("stats needs --table or at least two --algos");
        const auto splits = load_unsealed(ws);
        std::vector<std::vector<double>> cols;
        std::size_t n = 0;
        for (const auto& algo : algos) {
            const auto run = load_search(ws, algorithm_from_string(algo));
            DatasetSplits reduced = run.reduction ? reduce_splits(splits, *run.reduction) : splits;
            const std::size_t dim = run.reduction ? run.reduction->dimension() : 0;
            std::vector<double> col;
            for (std::size_t k = 0; k < run.per_seed.size(); ++k) {
                const auto rec = select_from_archive(run.per_seed[k], preset, PreferenceSpec::preset(preset));
                const auto a = architecture_for(rec.selected.genome, run.config.space, dim);
                col.push_back(
                    holdout_evaluate(a, reduced, effective(run.config, ov), run.config.run_seed(k)).balanced_error);
            }
            n = n == 0 ? col.size() : std::min(n, col.size());
            cols.push_back(std::move(col));
            header.push_back(algo);
        }
        for (std::size_t r = 0; r < n; ++r) {
            std::vector<double> row;
            for (const auto& c : cols) row.push_back(c[r]);
            table.push_back(std::move(row));
        }
        higher_better = false;
    }
    const auto fr = friedman_test(table, higher_better);
    const auto pv = friedman_control_pvalues(fr, control);
    const auto hm = hommel_apv(pv, alpha);
    nlohmann::json j = {{"methods", header}, {"friedman", fr.to_json()}, {"control", control},
                        {"unadjusted", pv},  {"hommel", hm.to_json()},  {"config_hash", cfg.hash()},
                        {"seed", cfg.seed}};
    write_json(ws.root / "stats" / "stats.json", j);
    std::cout << "Friedman statistic " << text::format_double(fr.statistic) << " p=" << text::format_double(fr.p_value)
              << '\n';
    for (std::size_t i = 0, k = 0; i < fr.methods; ++i) {
        const std::string name = i < header.size() ? header[i] : std::to_string(i);
        std::cout << "  " << name << " mean rank " << text::format_double(fr.mean_ranks[i]);
        if (i != control) {
            std::cout << " apv=" << text::format_double(hm.adjusted[k]) << (hm.rejected[k] ? " reject" : "");
            ++k;
        } else {
            std::cout << " (control)";
        }
        std::cout << '\n';
    }
    return 0;
}

int cmd_export(const Workspace& ws, const std::string& algo) {
    const auto run = load_search(ws, algorithm_from_string(algo));
    const auto dir = ws.root / "exports" / algo;
    fs::create_directories(dir);
    const std::size_t dim = run.reduction ? run.reduction->dimension() : 0;
    std::ofstream front(dir / "front.csv");
    front << provenance_comment(run.config_hash, run.config.seed) << '\n'
          << "genome,e_cv,c,e_pr,features,layer1_size,layer1_activation,layer2_size,layer2_activation\n";
    for (const auto& e : run.merged.sorted()) {
        const auto a = architecture_for(e.genome, run.config.space, dim);
        front << e.genome.to_string() << ',' << text::format_double(e.objectives.e_cv) << ','
              << text::format_double(e.objectives.c) << ',' << text::format_double(e.objectives.e_pr) << ','
              << a.features.size();
        for (std::size_t k = 0; k < 2; ++k) {
            if (k < a.topology.layers.size()) {
                front << ',' << a.topology.layers[k].size << ',' << to_string(a.topology.layers[k].activation);
            } else {
                front << ",0,";
            }
        }
        front << '\n';
    }
    std::ofstream gens(dir / "generations.csv");
    gens << provenance_comment(run.config_hash, run.config.seed) << '\n'
         << "seed," << GenerationStats::csv_header() << '\n';
    for (std::size_t k = 1; fs::exists(run.dir / ("seed-" + std::to_string(k))); ++k) {
        std::ifstream in(run.dir / ("seed-" + std::to_string(k)) / "generations.csv");
        std::string line;
        std::getline(in, line);
        std::getline(in, line);
        while (std::getline(in, line)) gens << k << ',' << line << '\n';
    }
    std::cout << "exported " << run.merged.size() << " front members to " << dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Co-evolution of feature subsets and neural topologies"};
    app.require_subcommand(1);
    Common common;
    app.add_option("-w,--workspace", common.workspace, "Workspace directory")->capture_default_str();
    app.add_option("-c,--config", common.config, "Run configuration JSON");

    Overrides ov;

    auto* synth = app.add_subcommand("synth", "Generate a planted synthetic OHLCV series");
    std::string synth_out, synth_manifest;
    std::uint64_t synth_seed = 1;
    SynthSpec synth_spec;
    std::vector<std::string> relevant;
    synth->add_option("-o,--output", synth_out, "CSV path")->required();
    synth->add_option("--manifest", synth_manifest, "Manifest path (default <output>.manifest.json)");
    synth->add_option("--seed", synth_seed);
    synth->add_option("--noise", synth_spec.noise, "Label noise probability");
    synth->add_option("--volatility", synth_spec.volatility);
    synth->add_option("--relevant", relevant, "Planted feature names")->delimiter(',');
    std::vector<double> synth_weights;
    synth->add_option("--weights", synth_weights, "Planted rule weights (default all ones with --relevant)")
        ->delimiter(',');

    auto* ingest = app.add_subcommand("ingest", "Build, split and standardize patterns");
    std::string data;
    ingest->add_option("-d,--data", data, "OHLCV CSV");

    auto* search = app.add_subcommand("search", "Run a search for several seeds and merge archives");
    std::string algo = "nsga2", trace;
    bool trace_wall = false;
    search->add_option("-a,--algo", algo, "nsga2, eagd, scalarized, topology-only, random")->capture_default_str();
    search->add_option("--trace", trace, "JSON-lines evaluation trace");
    search->add_flag("--trace-wall-time", trace_wall, "Include wall time in the trace");
    add_overrides(search, ov);

    auto* select = app.add_subcommand("select", "Select architectures from the merged archive");
    std::vector<std::string> presets;
    std::string rank, sel_name;
    double intensity = 9.0;
    select->add_option("-a,--algo", algo)->capture_default_str();
    select->add_option("--preset", presets, "O1..O5 (default: all configured presets)");
    select->add_option("--rank", rank, "Custom ranking, e.g. cv=1,c=2,pr=3");
    select->add_option("--intensity", intensity, "Preference intensity 1..9")->capture_default_str();
    select->add_option("--name", sel_name, "Name for a custom ranking");

    auto* baseline = app.add_subcommand("baseline", "Rule-of-thumb networks on reduced inputs");
    std::string reduction = "none";
    baseline->add_option("--reduction", reduction, "none, pca, mrmr, cfs")->capture_default_str();
    Overrides bov;
    bov.reduction.reset();
    baseline->add_option("--seed", bov.seed);
    baseline->add_option("--mrmr-k", bov.mrmr_k);
    baseline->add_option("--final-iterations", bov.final_iterations);

    auto* holdout = app.add_subcommand("holdout-eval", "Retrain a selected architecture and score the hold-out split");
    std::string preset = "O2", hb, hrule = "kolmogorov";
    holdout->add_option("-a,--algo", algo)->capture_default_str();
    holdout->add_option("--preset", preset)->capture_default_str();
    holdout->add_option("--baseline", hb, "Evaluate a rule-of-thumb baseline instead (none, pca, mrmr, cfs)");
    holdout->add_option("--rule", hrule)->capture_default_str();
    add_overrides(holdout, ov);

    auto* stats = app.add_subcommand("stats", "Friedman ranks and Hommel-adjusted comparisons");
    std::string table;
    std::vector<std::string> algos;
    bool higher_better = false;
    std::size_t control = 0;
    double alpha = 0.05;
    stats->add_option("--table", table, "CSV table: header of method names, one row per run");
    stats->add_option("--algos", algos, "Compare per-seed hold-out balanced error of these searches")->delimiter(',');
    stats->add_option("--preset", preset)->capture_default_str();
    stats->add_flag("--higher-better", higher_better, "Larger table values rank better");
    stats->add_option("--control", control, "Control method column")->capture_default_str();
    stats->add_option("--alpha", alpha)->capture_default_str();
    add_overrides(stats, ov);

    auto* exp = app.add_subcommand("export", "Front table and generation metrics as CSV");
    exp->add_option("-a,--algo", algo)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const Workspace ws{common.workspace};
        if (*synth) {
            if (!relevant.empty()) {
                synth_spec.relevant = relevant;
                synth_spec.weights.clear();
            }
            if (!synth_weights.empty()) synth_spec.weights = synth_weights;
            return cmd_synth(synth_out, synth_manifest, synth_seed, synth_spec);
        }
        if (*ingest) return cmd_ingest(ws, load_config(common, ov), data);
        if (*search) return cmd_search(ws, load_config(common, ov), algo, trace, trace_wall);
        if (*select) return cmd_select(ws, algo, presets, rank, intensity, sel_name);
        if (*baseline) {
            if (reduction != "none") bov.reduction = reduction;
            return cmd_baseline(ws, load_config(common, bov), reduction);
        }
        if (*holdout) return cmd_holdout(ws, load_config(common, ov), ov, algo, preset, hb, hrule);
        if (*stats) {
            return cmd_stats(ws, load_config(common, ov), ov, table, algos, preset, higher_better, control, alpha);
        }
        if (*exp) return cmd_export(ws, algo);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
