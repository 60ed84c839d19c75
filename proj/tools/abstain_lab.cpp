// abstain_lab: command-line front end for the abstention-learning simulation
// laboratory. Subcommands: simulate, sweep, estimate, lowerbound, complexity,
// schedule. Exit codes: 0 success, 1 input error, 2 internal failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "abstain/abstain_boost.hpp"
#include "abstain/complexity.hpp"
#include "abstain/environment.hpp"
#include "abstain/harness.hpp"
#include "abstain/lower_bound.hpp"
#include "abstain/trace_io.hpp"
#include "abstain/weak_learner.hpp"

namespace {

using namespace abstain;

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config file: " + path);
    return ExperimentConfig::from_kv(parse_key_values(in));
}

void write_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open output file: " + path);
    out << content;
}

int cmd_schedule(const std::string& regime, int d, long long T, double alpha, double D) {
    Regime r = Regime::oblivious;
    if (regime == "adaptive") r = Regime::adaptive;
    else if (regime == "censored_oblivious") r = Regime::censored_oblivious;
    else if (regime != "oblivious") throw input_error("unknown regime: " + regime);
    const Schedule s = schedule_params(
        r, d, T, alpha, r == Regime::adaptive ? std::optional<double>(D) : std::nullopt);
    std::cout << "regime=" << regime << " d=" << d << " T=" << T << " alpha=" << alpha << "\n"
              << "epsilon=" << s.epsilon << "\n"
              << "m=" << s.m << "\n"
              << "N=" << s.block_size << "\n"
              << "s_max=" << s.s_max << "\n"
              << "M=" << s.mistake_tolerance << "\n"
              << "update=" << (s.policy == UpdatePolicy::always ? "always" : "restricted") << "\n";
    if (s.edge_case) std::cout << "warning: " << s.note << "\n";
    return 0;
}

int cmd_simulate(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& out_dir) {
    ExperimentConfig one = cfg;
    one.seeds = 1;
    one.master_seed = seed;
    one.horizons = {cfg.horizons.front()};
    one.alphas = {cfg.alphas.front()};
    const RunResult run = harness_detail::run_one(one, one.horizons[0], one.alphas[0], seed);
    const auto [mis, abs] = run.recount();
    std::cout << "T=" << one.horizons[0] << " seed=" << seed << " MisErr=" << run.mis_err
              << " AbsErr=" << run.abs_err << "\n";
    if (mis != run.mis_err || abs != run.abs_err) {
        std::cerr << "internal: trace recount mismatch\n";
        return 2;
    }
    if (!out_dir.empty()) {
        write_file(out_dir + "/trace.tsv", format_trace(run));
        std::cout << "trace written to " << out_dir << "/trace.tsv\n";
    }
    return 0;
}

int cmd_sweep(ExperimentConfig cfg, const std::string& out_dir, const std::string& format,
              int threads) {
    if (!out_dir.empty()) {
        cfg.trace_dir = out_dir + "/traces";
        std::filesystem::create_directories(cfg.trace_dir);
    }
    const SweepResult result = run_experiment(cfg, threads);
    const std::string payload = format == "jsonl" ? sweep_to_jsonl(result) : sweep_to_csv(result);
    if (out_dir.empty()) {
        std::cout << payload;
    } else {
        const std::string path = out_dir + "/sweep." + (format == "jsonl" ? "jsonl" : "csv");
        write_file(path, payload);
        std::cout << "sweep written to " << path << "\n";
    }
    for (const auto& agg : result.aggregates) {
        std::cout << "T=" << agg.horizon << " alpha=" << agg.alpha << " runs=" << agg.runs
                  << " mis_mean=" << agg.mis_mean << " abs_mean=" << agg.abs_mean << "\n";
    }
    return 0;
}

int cmd_estimate(const std::string& spec_name, int dist_points, const std::string& constraints,
                 int k, std::uint64_t budget, std::uint64_t seed, int blocks, int block_size) {
    if (spec_name != "thresholds")
        throw input_error("estimate: only the thresholds probe is wired up");
    ClassSpec spec = ClassSpec::thresholds();
    FiniteDistribution dist = FiniteDistribution::uniform_scalar_grid(dist_points);
    std::vector<LabeledExample> cons;
    if (!constraints.empty()) {
        std::stringstream ss(constraints);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw input_error("estimate: constraints look like x:label,...");
            cons.emplace_back(Point::scalar(std::stod(item.substr(0, colon))),
                              std::stoi(item.substr(colon + 1)));
        }
    }
    ReducedClass cls(spec, cons);
    const double exact = exact_rho(cls, dist, k);
    Rng rng(seed);
    std::vector<Point> pool;
    for (int i = 0; i < blocks * block_size; ++i) pool.push_back(dist.sample(rng));
    PartitionedSamples samples = PartitionedSamples::split(pool, blocks);
    const RhoEstimate med = median_rho(cls, samples, k, budget, seed);
    const RhoEstimate u = u_stat_rho(cls, samples.blocks[0], k, budget, seed);
    std::cout << "exact_rho(k=" << k << ") = " << exact << "\n"
              << "u_stat(block 0)   = " << u.value << " (budget used " << u.budget_used << ")\n"
              << "median(" << blocks << " blocks) = " << med.value << " (budget used "
              << med.budget_used << ")\n";
    return 0;
}

int cmd_lowerbound(int T, int trials, std::uint64_t seed, const std::string& learner,
                   const std::string& out_dir) {
    LearnerFactory factory;
    if (learner == "predict_zero") {
        factory = [] { return std::make_unique<ConstantLearner>(0); };
    } else if (learner == "majority") {
        factory = [] { return std::make_unique<MajorityLearner>(); };
    } else if (learner == "always_abstain") {
        factory = [] { return std::make_unique<AlwaysAbstainLearner>(); };
    } else {
        throw input_error("lowerbound: learner must be predict_zero, majority or always_abstain");
    }
    const double budget =
        measure_abstention_budget(factory, T, 4LL * T, std::max(1, trials / 5), seed);
    const LowerBoundOutcome out = build_lowerbound_adversary(factory, T, budget, trials, seed);
    std::cout << "measured abstention budget A = " << budget << "\n"
              << "i_max = " << out.i_max << "\n";
    if (!out.success) {
        std::cout << "construction failed: " << out.failure_reason << "\n";
        return 0;
    }
    std::cout << "layers completed = " << out.mistake_rounds.size() << "\n"
              << "measured MisErr = " << out.measured_mis << " (target >= " << out.i_max / 8.0
              << ")\n"
              << "measured abstentions = " << out.measured_abstentions << "\n"
              << "probe half-width = " << out.probe_half_width << "\n";
    if (!out_dir.empty()) {
        write_file(out_dir + "/lowerbound_script.tsv", format_script(out.script));
        std::cout << "script written to " << out_dir << "/lowerbound_script.tsv\n";
    }
    return 0;
}

int cmd_complexity(const std::string& spec_name, int n, int l, double user_dim,
                   std::uint64_t budget) {
    ReductionCountReport rep;
    if (spec_name == "intervals" || spec_name == "rectangles1") {
        std::vector<Point> grid;
        for (int i = 0; i < n; ++i) grid.push_back(Point::vector({(i + 0.5) / n}));
        rep = count_reductions(ClassSpec::rectangles(1), grid, l, grid, std::nullopt, budget);
    } else if (spec_name == "thresholds") {
        std::vector<Point> grid;
        for (int i = 0; i < n; ++i) grid.push_back(Point::scalar((i + 0.5) / n));
        rep = count_reductions(ClassSpec::thresholds(), grid, l, grid,
                               user_dim > 0 ? std::optional<double>(user_dim)
                                            : std::optional<double>(l + 2.0),
                               budget);
    } else if (spec_name == "halfspaces2d") {
        std::vector<Point> pts;
        const int side = std::max(2, static_cast<int>(std::lround(std::sqrt(n))));
        for (int i = 0; i < side && static_cast<int>(pts.size()) < n; ++i) {
            for (int j = 0; j < side && static_cast<int>(pts.size()) < n; ++j) {
                pts.push_back(Point::vector2((i + 0.5) / side, (j + 0.5) / side));
            }
        }
        rep = count_reductions(ClassSpec::halfspaces2d(), pts, l, pts,
                               user_dim > 0 ? std::optional<double>(user_dim)
                                            : std::optional<double>(4.0 * l),
                               budget);
    } else if (spec_name == "subsets") {
        std::vector<Point> ground;
        for (int i = 0; i < 2 * n; ++i) ground.push_back(Point::scalar(i / (2.0 * n)));
        ClassSpec spec = ClassSpec::subsets_of_size(2, ground);
        std::vector<Point> test(ground.begin(), ground.begin() + n);
        rep = count_reductions(spec, test, l, ground, std::nullopt, budget);
    } else {
        throw input_error("complexity: unknown spec " + spec_name);
    }
    std::cout << "spec=" << rep.spec.name() << " n=" << rep.num_test_points
              << " l=" << rep.constraint_budget << " pool=" << rep.pool_size << "\n"
              << "distinct reductions = " << rep.distinct_count << " (datasets enumerated "
              << rep.datasets_enumerated << ")\n"
              << "bound " << rep.bound_kind << " = " << rep.bound_value
              << (rep.bound_satisfied ? "  [satisfied]" : "  [VIOLATED]") << "\n"
              << "measured exponent = " << rep.measured_exponent << "\n";
    return rep.bound_satisfied ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"abstention-learning simulation laboratory"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand name

    std::string config_path, out_dir, format = "csv";
    std::uint64_t seed = 1;
    int threads = 1;
    std::uint64_t budget = 200'000;
    app.add_option("--config", config_path, "experiment config file (key = value lines)");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "sweep output format: csv or jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    app.add_option("--threads", threads, "worker threads for sweeps");
    app.add_option("--budget", budget, "subset-evaluation budget for estimators");

    auto* sim = app.add_subcommand("simulate", "one seeded protocol run");
    auto* sweep = app.add_subcommand("sweep", "grid of runs with aggregation");

    auto* sched = app.add_subcommand("schedule", "print a guarantee parameter schedule");
    std::string regime = "oblivious";
    int sched_d = 1;
    long long sched_T = 1000;
    double sched_alpha = 0.25, sched_D = 4.0;
    sched->add_option("--regime", regime, "oblivious | adaptive | censored_oblivious");
    sched->add_option("--d", sched_d, "VC dimension");
    sched->add_option("--T", sched_T, "horizon");
    sched->add_option("--alpha", sched_alpha, "tradeoff exponent in [0,1/3]");
    sched->add_option("--D", sched_D, "reduction dimension (adaptive regime)");

    auto* est = app.add_subcommand("estimate", "estimator probes against the exact oracle");
    std::string est_constraints;
    int est_points = 20, est_k = 1, est_blocks = 5, est_block_size = 20;
    est->add_option("--dist-points", est_points, "support grid size");
    est->add_option("--constraints", est_constraints, "x:label,... constraint list");
    est->add_option("--k", est_k, "shattering order");
    est->add_option("--blocks", est_blocks, "number of sample blocks");
    est->add_option("--block-size", est_block_size, "samples per block");

    auto* lb = app.add_subcommand("lowerbound", "run the tree-adversary construction");
    int lb_T = 200, lb_trials = 50;
    std::string lb_learner = "majority";
    lb->add_option("--T", lb_T, "horizon");
    lb->add_option("--trials", lb_trials, "Monte Carlo probe trials");
    lb->add_option("--learner", lb_learner, "predict_zero | majority | always_abstain");

    auto* cx = app.add_subcommand("complexity", "brute-force reduction counting");
    std::string cx_spec = "intervals";
    int cx_n = 6, cx_l = 2;
    double cx_D = 0.0;
    cx->add_option("--spec", cx_spec, "intervals | thresholds | halfspaces2d | subsets");
    cx->add_option("--n", cx_n, "number of test points");
    cx->add_option("--l", cx_l, "constraint budget");
    cx->add_option("--D", cx_D, "exponent override for n^D bounds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints usage/help
        return code == 0 ? 0 : 1;
    }

    try {
        if (sched->parsed()) return cmd_schedule(regime, sched_d, sched_T, sched_alpha, sched_D);
        if (est->parsed())
            return cmd_estimate("thresholds", est_points, est_constraints, est_k, budget, seed,
                                est_blocks, est_block_size);
        if (lb->parsed()) return cmd_lowerbound(lb_T, lb_trials, seed, lb_learner, out_dir);
        if (cx->parsed()) return cmd_complexity(cx_spec, cx_n, cx_l, cx_D, 50'000'000);
        ExperimentConfig cfg;
        if (!config_path.empty()) {
            cfg = load_config(config_path);
        }
        if (app.count("--seed")) cfg.master_seed = seed;
        cfg.subset_budget = budget;
        if (sim->parsed()) return cmd_simulate(cfg, cfg.master_seed, out_dir);
        if (sweep->parsed()) return cmd_sweep(cfg, out_dir, format, threads);
    } catch (const input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
