// Acceptance checks. Prints one PASS/FAIL line per requested criterion; exits 1 if any fails.
//   acceptance [--criterion 1,2,...|all]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "coevo/baselines.hpp"
#include "coevo/decision.hpp"
#include "coevo/experiment.hpp"
#include "coevo/genome.hpp"
#include "coevo/metrics.hpp"
#include "coevo/moea.hpp"
#include "coevo/neural.hpp"
#include "coevo/pareto.hpp"
#include "coevo/stats.hpp"
#include "coevo/synth.hpp"
#include "coevo/text.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "process.hpp"

namespace fs = std::filesystem;
using namespace coevo;

namespace {

// Details go to stdout, indented under the verdict line that follows them.
std::ostringstream details;

void note(const std::string& s) { details << "    " << s << '\n'; }

std::string fmt(double v) { return text::format_double(v); }

bool within(double got, double want, double tol, const std::string& what) {
    const bool ok = std::abs(got - want) <= tol;
    if (!ok) note(what + ": got " + fmt(got) + ", expected " + fmt(want) + " +/- " + fmt(tol));
    return ok;
}

Topology layers(std::initializer_list<int> sizes) {
    Topology t;
    for (int s : sizes) t.layers.push_back({s, Activation::Tanh});
    return t;
}

// 1. Complexity of the printed architectures.
bool complexity_values() {
    const SearchSpaceConfig space;
    struct Row {
        std::size_t features;
        Topology topology;
        double value;
    };
    const std::vector<Row> rows{
        {11, layers({18}), 0.27},     {11, layers({32}), 0.30},      {10, layers({35, 32}), 0.47},
        {14, layers({123, 64}), 0.65}, {13, layers({48}), 0.36},      {17, layers({35}), 0.3419},
        {17, layers({68}), 0.4285},   {17, layers({11}), 0.2789},    {17, layers({10}), 0.2762},
        {17, layers({57, 19}), 0.5164}, {68, layers({127, 127}), 1.0}};
    bool ok = true;
    for (const auto& r : rows) {
        ok &= within(complexity(r.features, r.topology, space), r.value, 0.005,
                     "C(|X|=" + std::to_string(r.features) + ")");
    }
    return ok;
}

// 2. Preference weights for O = [1, 2, 3], I = 9.
bool preference_values() {
    const auto w = preference_weights({{1, 2, 3}, 9.0});
    note("weights " + fmt(w[0]) + ", " + fmt(w[1]) + ", " + fmt(w[2]));
    bool ok = within(w[0], 0.69, 0.005, "theta_cv");
    ok &= within(w[1], 0.23, 0.005, "theta_c");
    ok &= within(w[2], 0.07, 0.005, "theta_pr");
    return ok;
}

// 3. Tournament on the four-member worked front.
bool tournament_example() {
    const std::vector<ObjectiveVector> front{
        {0.43, 0.27, 0.46}, {0.42, 0.30, 0.48}, {0.41, 0.36, 0.47}, {0.45, 0.65, 0.45}};
    std::vector<ArchiveEntry> members;
    for (std::size_t i = 0; i < front.size(); ++i) {
        Genome g(8);
        g.bits[i] = 1;
        members.push_back({g, front[i]});
    }
    const auto r = mtd_select(members, preference_weights({{1, 2, 3}, 9.0}));
    const std::vector<std::array<int, 3>> tau{{1, 3, 2}, {2, 2, 0}, {3, 1, 1}, {0, 0, 3}};
    bool ok = r.wins == tau;
    if (!ok) note("tau differs from the worked matrix");
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t p = 0; p < 3; ++p) {
            if (std::abs(r.phi[i][p] - tau[i][p] / 3.0) > 1e-12) {
                ok = false;
                note("phi differs at (" + std::to_string(i) + ", " + std::to_string(p) + ")");
            }
        }
    }
    const std::vector<double> want{0.77, 0.0, 0.89, 0.0};
    for (std::size_t i = 0; i < 4; ++i) ok &= within(r.global_rank[i], want[i], 0.005, "R[" + std::to_string(i) + "]");
    if (r.selected != 2) {
        ok = false;
        note("selected member " + std::to_string(r.selected + 1) + ", expected 3");
    }
    return ok;
}

// 4. Rule-of-thumb sizes.
bool rule_sizes() {
    using R = RuleOfThumb;
    struct Row {
        R rule;
        double nf;
        std::pair<int, int> size;
        bool second_matters;
    };
    const std::vector<Row> rows{
        {R::Kolmogorov, 17, {35, 0}, false},  {R::Kolmogorov, 29, {59, 0}, false},  {R::Kolmogorov, 44, {89, 0}, false},
        {R::Hush, 17, {68, 0}, false},        {R::Hush, 29, {116, 0}, false},       {R::Wang, 17, {11, 0}, false},
        {R::Wang, 29, {19, 0}, false},        {R::Wang, 44, {29, 0}, false},        {R::Ripley, 17, {10, 0}, false},
        {R::Ripley, 29, {16, 0}, false},      {R::Ripley, 44, {23, 0}, false},      {R::FletcherGoss, 17, {10, 0}, false},
        {R::FletcherGoss, 29, {13, 0}, false}, {R::FletcherGoss, 44, {15, 0}, false}, {R::Huang, 17, {57, 19}, true}};
    bool ok = true;
    int checked = 0;
    for (const auto& r : rows) {
        const auto got = rule_of_thumb(r.rule, RuleInputs{r.nf, 2, 361});
        const bool match = got.first == r.size.first && (!r.second_matters || got.second == r.size.second);
        checked += r.second_matters ? 2 : 1;
        if (!match) {
            ok = false;
            note(to_string(r.rule) + " n_f=" + fmt(r.nf) + ": got (" + std::to_string(got.first) + ", " +
                 std::to_string(got.second) + ")");
        }
    }
    note(std::to_string(checked) + " layer sizes checked");
    return ok && checked == 16;
}

// 5. Sorting and archive filtering against brute force.
bool dominance_machinery() {
    Rng rng(2024);
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        const auto pts = oracle::random_points(rng, 200, 12);
        const auto fronts = fast_nondominated_sort(pts);
        std::vector<int> rank(pts.size(), -1);
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            for (auto i : fronts[f]) rank[i] = int(f);
        }
        if (rank != oracle::peel_ranks(pts)) {
            ok = false;
            note("sort mismatch in trial " + std::to_string(trial));
        }
        std::vector<ParetoArchive> parts(4);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            Genome g(16);
            for (std::size_t b = 0; b < 16; ++b) g.bits[b] = (i >> b) & 1;
            parts[i % 4].insert(g, pts[i]);
        }
        const auto merged = merge_archives(parts);
        const auto filtered = nondominated_filter(merged.entries());
        if (ParetoArchive::from_entries(filtered).sorted() != merged.sorted()) {
            ok = false;
            note("merged archive is not a filter fixed point in trial " + std::to_string(trial));
        }
        const auto nd = oracle::nondominated_indices(pts);
        std::multiset<std::array<double, 3>> want, got;
        for (auto i : nd) want.insert(pts[i].as_array());
        for (const auto& e : merged.entries()) got.insert(e.objectives.as_array());
        if (want != got) {
            ok = false;
            note("merged archive differs from the brute-force front in trial " + std::to_string(trial));
        }
    }
    return ok;
}

// 6. Classification metrics.
bool metric_oracles() {
    Rng rng(6);
    bool ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.below(100);
        std::vector<std::uint8_t> pred(n), actual(n);
        const double bias = rng.uniform();
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = rng.bernoulli(bias);
            actual[i] = rng.bernoulli(0.5);
        }
        const auto c = confusion(pred, actual);
        const auto o = oracle::recount(pred, actual);
        if (std::abs(accuracy(c) - o.accuracy) > 1e-12 || std::abs(balanced_accuracy(c) - o.balanced_accuracy) > 1e-12 ||
            std::abs(mcc(c) - o.mcc) > 1e-12) {
            ok = false;
            note("metric mismatch in trial " + std::to_string(trial));
        }
    }
    for (std::uint8_t cls : {0, 1}) {
        const std::vector<std::uint8_t> pred(20, cls);
        std::vector<std::uint8_t> actual(20);
        for (auto& a : actual) a = rng.bernoulli(0.5);
        if (mcc(confusion(pred, actual)) != 0.0) {
            ok = false;
            note("MCC of a one-class prediction is not 0");
        }
    }
    return ok;
}

// 7. Gradient and XOR.
bool trainer_checks() {
    Rng rng(7);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t inputs = 1 + rng.below(4);
        Topology topo;
        const auto n_layers = rng.below(3);
        for (std::uint64_t k = 0; k < n_layers; ++k) {
            topo.layers.push_back({int(1 + rng.below(6)), rng.bernoulli(0.5) ? Activation::Tanh : Activation::Sigmoid});
        }
        const auto data = fixture::linear_patterns(500 + trial, 10, inputs, 0.3);
        const NetworkShape shape(inputs, topo);
        Vector w(Eigen::Index(shape.parameter_count()));
        for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.uniform(-1.0, 1.0);
        Vector g;
        network_loss(shape, w, data.features, data.labels, &g);
        const auto fd = oracle::central_difference(
            [&](const Vector& v) { return network_loss(shape, v, data.features, data.labels, nullptr); }, w);
        worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), fd.norm()));
    }
    note("worst gradient relative error " + fmt(worst));

    PatternSet xor_set;
    xor_set.features.resize(4, 2);
    xor_set.features << 0, 0, 0, 1, 1, 0, 1, 1;
    xor_set.labels = {0, 1, 1, 0};
    xor_set.dates.assign(4, Date(2019, 1, 1));
    xor_set.feature_names = {"a", "b"};
    int solved = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        ScgConfig cfg;
        cfg.max_iterations = 500;
        cfg.seed = seed;
        const auto model = scg_train(layers({4}), {0, 1}, xor_set, cfg);
        solved += predict(model, xor_set) == xor_set.labels;
    }
    note("XOR solved for " + std::to_string(solved) + "/10 seeds");
    return worst < 1e-5 && solved >= 9;
}

// 8 and 9. One search campaign on the planted synthetic market.
struct Campaign {
    bool efficacy = false;
    bool ordering = false;
};

Campaign search_campaign() {
    const auto t0 = std::chrono::steady_clock::now();
    Campaign out;
    const SynthSpec spec;
    const auto synth = synth_generate(spec, 1);
    auto data = prepare_data(synth.series, SplitSpec::standard());
    auto& splits = data.splits;
    const std::set<std::size_t> planted(synth.relevant.begin(), synth.relevant.end());

    RunConfig cfg;
    cfg.runs = 5;
    cfg.max_evaluations = 2000;
    cfg.eval.cycles = 1;
    cfg.eval.scg.max_iterations = 50;
    cfg.seed = 1;
    cfg.baseline.reduction = ReductionMethod::Mrmr;
    cfg.baseline.mrmr_features = 17;
    note("budget: " + std::to_string(cfg.max_evaluations) + " evaluations x " + std::to_string(cfg.runs) +
         " seeds, 1 training cycle, SCG cap " + std::to_string(cfg.eval.scg.max_iterations));

    splits.seal_holdout();
    const auto coevo_runs = run_search(splits, cfg, Algorithm::Nsga2);
    const auto random_runs = run_search(splits, cfg, Algorithm::Random);
    const auto topo_runs = run_search(splits, cfg, Algorithm::TopologyOnly);
    if (splits.holdout_reads() != 0) note("search read the hold-out split");
    splits.unseal_holdout();

    // Full-feature rule-of-thumb baselines, scored on the hold-out split per seed.
    std::vector<double> best_rule(cfg.runs, 1.0);
    std::vector<std::string> best_rule_name(cfg.runs);
    const std::size_t nf = splits.feature_count();
    const RuleInputs in{double(nf), 2.0, double(splits.d_train.size())};
    Architecture all_inputs;
    for (std::size_t j = 0; j < nf; ++j) all_inputs.features.push_back(j);

    int hv_wins = 0, planted_hits = 0, be_wins = 0, order_ok = 0;
    const ObjectiveVector ref{1, 1, 1};
    for (std::size_t k = 0; k < cfg.runs; ++k) {
        const auto seed = cfg.run_seed(k);
        const auto& arch_k = coevo_runs.seeds[k].result.archive;
        const double hv_n = hypervolume(arch_k, ref);
        const double hv_r = hypervolume(random_runs.seeds[k].result.archive, ref);
        hv_wins += hv_n > hv_r;

        const auto rec = select_from_archive(arch_k, "O2", PreferenceSpec::preset("O2"));
        const auto arch = architecture_for(rec.selected.genome, cfg.space);
        std::size_t hits = 0;
        for (auto f : arch.features) hits += planted.count(f);
        planted_hits += hits >= 3;
        const auto hold = holdout_evaluate(arch, splits, cfg, seed);

        for (auto rule : all_rules()) {
            Architecture a = all_inputs;
            a.topology = rule_topology(rule, in, cfg.space, cfg.baseline.activation);
            const double be = holdout_evaluate(a, splits, cfg, seed).balanced_error;
            if (be < best_rule[k]) best_rule[k] = be, best_rule_name[k] = to_string(rule);
        }
        be_wins += hold.balanced_error <= best_rule[k] - 0.03;

        bool dominated = false;
        for (const auto& t : topo_runs.seeds[k].result.archive.entries()) {
            for (const auto& c : coevo_runs.merged.entries()) dominated |= dominates(t.objectives, c.objectives);
        }
        order_ok += !dominated;

        note("seed " + std::to_string(seed) + ": HV nsga2 " + fmt(hv_n) + " vs random " + fmt(hv_r) + "; O2 pick " +
             arch.summary() + " with " + std::to_string(hits) + " planted; hold-out BE " + fmt(hold.balanced_error) +
             " vs best rule " + best_rule_name[k] + " " + fmt(best_rule[k]) + "; topology-only dominates a co-evolution member: " +
             (dominated ? "yes" : "no"));
    }
    note("8(a) hypervolume wins " + std::to_string(hv_wins) + "/5, 8(b) >= 3 planted " + std::to_string(planted_hits) +
         "/5, 8(c) hold-out margin >= 0.03 " + std::to_string(be_wins) + "/5, 9 ordering " + std::to_string(order_ok) +
         "/5");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    note("campaign wall time " + fmt(std::round(secs)) + " s");
    out.efficacy = hv_wins >= 4 && planted_hits >= 4 && be_wins >= 4;
    out.ordering = order_ok >= 4;
    return out;
}

// 10. Statistics against brute force.
bool statistics() {
    Rng rng(10);
    bool ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3 + rng.below(20), k = 2 + rng.below(6);
        MetricTable t(n, std::vector<double>(k));
        for (auto& row : t) {
            for (auto& v : row) v = double(rng.below(8)) / 7.0;
        }
        const bool higher = trial % 2 == 0;
        const auto r = friedman_test(t, higher);
        const auto o = oracle::friedman(t, higher);
        if (std::abs(r.statistic - o.statistic) > 1e-9) {
            ok = false;
            note("Friedman statistic mismatch in trial " + std::to_string(trial));
        }
        for (std::size_t j = 0; j < k; ++j) ok &= std::abs(r.mean_ranks[j] - o.mean_ranks[j]) < 1e-12;

        std::vector<double> p(1 + rng.below(8));
        for (auto& v : p) v = rng.bernoulli(0.3) ? rng.uniform(0, 0.02) : rng.uniform();
        const auto h = hommel_apv(p);
        const auto hp = oracle::hommel_closed_testing(p);
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (std::abs(h.adjusted[i] - hp[i]) > 1e-12) {
                ok = false;
                note("Hommel mismatch in trial " + std::to_string(trial));
            }
        }
    }
    const auto two = friedman_test(MetricTable(10, std::vector<double>{0.2, 0.1}), true);
    note("two-method always-wins statistic " + fmt(two.statistic));
    return ok && std::abs(two.statistic - 10.0) < 1e-12;
}

// 11. Every subcommand twice in the same workspace path; all outputs must match byte for byte.
using Snapshot = std::map<std::string, std::string>;

Snapshot snapshot(const fs::path& root) {
    Snapshot s;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        s[fs::relative(e.path(), root).generic_string()] = buf.str();
    }
    return s;
}

Snapshot pipeline(const fs::path& root) {
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string ws = (root / "ws").string(), csv = (root / "synth.csv").string();
    const std::vector<std::string> budget{"--fe", "60", "--runs", "2", "--cycles", "1", "--scg-iterations", "5"};
    std::vector<std::vector<std::string>> steps{
        {"synth", "-o", csv, "--seed", "3"},
        {"ingest", "--data", csv},
        {"search", "--trace", (root / "trace.jsonl").string()},
        {"search", "-a", "topology-only", "--mrmr-k", "5"},
        {"search", "-a", "eagd"},
        {"search", "-a", "scalarized"},
        {"search", "-a", "random"},
        {"select"},
        {"select", "-a", "topology-only", "--preset", "O2"},
        {"baseline", "--reduction", "mrmr", "--mrmr-k", "5", "--final-iterations", "10"},
        {"holdout-eval", "--preset", "O2", "--final-iterations", "10"},
        {"holdout-eval", "--baseline", "mrmr", "--rule", "wang", "--mrmr-k", "5", "--final-iterations", "10"},
        {"stats", "--algos", "nsga2,topology-only", "--final-iterations", "10"},
        {"export"},
        {"export", "-a", "topology-only"}};
    for (auto& s : steps) {
        if (s[0] == "search") s.insert(s.end(), budget.begin(), budget.end());
    }
    Snapshot s;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        auto args = steps[i];
        args.insert(args.begin(), {"-w", ws});
        const auto r = proc::run(COEVO_CLI_PATH, args);
        s["stdout/" + std::to_string(i) + "-" + steps[i][0]] = std::to_string(r.code) + "\n" + r.output;
        if (r.code != 0) note("step " + std::to_string(i) + " (" + steps[i][0] + ") exited " + std::to_string(r.code) +
                              ": " + r.output);
    }
    for (auto& [k, v] : snapshot(root)) s["files/" + k] = v;
    return s;
}

bool determinism() {
    fixture::TempDir tmp("acceptance-determinism");
    const auto root = tmp.path() / "run";
    const auto a = pipeline(root);
    const auto b = pipeline(root);
    bool ok = true;
    std::size_t files = 0;
    for (const auto& [k, v] : a) {
        files += k.rfind("files/", 0) == 0;
        const auto it = b.find(k);
        if (it == b.end() || it->second != v) {
            ok = false;
            note("differs: " + k);
        }
    }
    for (const auto& [k, v] : b) {
        if (!a.count(k)) {
            ok = false;
            note("only in the second run: " + k);
        }
    }
    for (const auto& [k, v] : a) {
        if (k.rfind("stdout/", 0) == 0 && v.rfind("0\n", 0) != 0) ok = false;
    }
    note(std::to_string(files) + " output files compared");
    return ok;
}

const std::map<int, std::string> kTitles{
    {1, "complexity reproduces the printed values"},
    {2, "preference weights for O=[1,2,3], I=9"},
    {3, "tournament worked example"},
    {4, "rule-of-thumb layer sizes"},
    {5, "dominance machinery"},
    {6, "metric oracles"},
    {7, "trainer checks"},
    {8, "search efficacy on planted synthetic data"},
    {9, "co-evolution is not dominated by topology-only search"},
    {10, "statistics"},
    {11, "determinism of every subcommand"}};

std::set<int> parse_criteria(int argc, char** argv) {
    std::set<int> out;
    std::string spec = "all";
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if ((a == "--criterion" || a == "-c") && i + 1 < argc) spec = argv[++i];
        else throw std::invalid_argument("usage: acceptance [--criterion 1,2,...|all]");
    }
    if (spec == "all") {
        for (const auto& [k, v] : kTitles) out.insert(k);
        return out;
    }
    for (auto part : text::split(spec, ',')) {
        const int c = std::stoi(std::string(text::trim(part)));
        if (!kTitles.count(c)) throw std::invalid_argument("unknown criterion " + std::to_string(c));
        out.insert(c);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    try {
        wanted = parse_criteria(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }

    std::map<int, bool> verdict;
    auto report = [&](int c, bool ok) {
        verdict[c] = ok;
        std::cout << details.str();
        details.str("");
        std::cout << "criterion " << c << ": " << (ok ? "PASS" : "FAIL") << " - " << kTitles.at(c) << std::endl;
    };
    auto guarded = [&](int c, const std::function<bool()>& fn) {
        if (!wanted.count(c)) return;
        bool ok = false;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            note(std::string("exception: ") + e.what());
        }
        report(c, ok);
    };

    guarded(1, complexity_values);
    guarded(2, preference_values);
    guarded(3, tournament_example);
    guarded(4, rule_sizes);
    guarded(5, dominance_machinery);
    guarded(6, metric_oracles);
    guarded(7, trainer_checks);
    if (wanted.count(8) || wanted.count(9)) {
        Campaign c;
        bool ran = false;
        try {
            c = search_campaign();
            ran = true;
        } catch (const std::exception& e) {
            note(std::string("exception: ") + e.what());
        }
        if (wanted.count(8)) report(8, ran && c.efficacy);
        if (wanted.count(9)) report(9, ran && c.ordering);
    }
    guarded(10, statistics);
    guarded(11, determinism);

    const bool all = std::all_of(verdict.begin(), verdict.end(), [](const auto& kv) { return kv.second; });
    return all ? 0 : 1;
}
