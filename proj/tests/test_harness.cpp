#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "abstain/harness.hpp"

using namespace abstain;

TEST_CASE("schedule: oblivious formulas at d=1, T=1000, alpha=1/4") {
    const Schedule s = schedule_params(Regime::oblivious, 1, 1000, 0.25);
    const double lnT = std::log(1000.0);
    const double eps = std::pow(lnT, 5.0 / 3.0) * std::pow(1000.0, -0.25);
    CHECK(s.epsilon == doctest::Approx(eps));
    CHECK(s.block_size == static_cast<long long>(std::ceil(2000.0 / eps)));
    CHECK(s.m == static_cast<long long>(std::ceil(8.0 * std::log(1000.0 / eps))));
    // epsilon > 1 at this scale: the edge flag fires and M drops to zero
    CHECK(s.edge_case);
    CHECK(s.mistake_tolerance == 0.0);
    CHECK(s.policy == UpdatePolicy::always);
}

TEST_CASE("schedule: alpha=0 caps s_max at the horizon") {
    const Schedule s = schedule_params(Regime::oblivious, 1, 100, 0.0);
    CHECK(s.s_max == 100);
    CHECK(s.edge_case);
}

TEST_CASE("schedule: adaptive regime requires D and switches policy") {
    CHECK_THROWS_AS(schedule_params(Regime::adaptive, 2, 1000, 0.25), input_error);
    const Schedule s = schedule_params(Regime::adaptive, 2, 1000, 0.25, 8.0);
    CHECK(s.policy == UpdatePolicy::restricted);
    const double lnT = std::log(1000.0);
    const double mix = 8.0 * std::log(8.0) + lnT;
    CHECK(s.epsilon == doctest::Approx(4.0 * std::pow(mix, 2.0 / 3.0) * lnT *
                                       std::pow(1000.0, -0.25)));
}

TEST_CASE("schedule: censored regime constants") {
    // the constants keep epsilon above 1 until astronomically large horizons;
    // evaluate the formulas where they are non-degenerate
    const long long horizon = 10'000'000'000'000LL;
    const Schedule s = schedule_params(Regime::censored_oblivious, 1, horizon, 1.0 / 3.0);
    const double T = static_cast<double>(horizon), lnT = std::log(T);
    CHECK(s.epsilon ==
          doctest::Approx(std::pow(lnT, 7.0 / 3.0) * std::pow(T, -1.0 / 3.0)));
    CHECK_FALSE(s.edge_case);
    CHECK(s.m == static_cast<long long>(std::ceil(80.0 * std::log(1.0 / s.epsilon) * lnT)));
    CHECK(s.mistake_tolerance == doctest::Approx(5.0 * std::log(1.0 / s.epsilon)));
    CHECK(s.policy == UpdatePolicy::restricted);

    // at desk scale the edge flag fires instead
    const Schedule desk = schedule_params(Regime::censored_oblivious, 1, 100000, 1.0 / 3.0);
    CHECK(desk.edge_case);
    CHECK(desk.mistake_tolerance == 0.0);
}

TEST_CASE("schedule: invalid inputs") {
    CHECK_THROWS_AS(schedule_params(Regime::oblivious, 0, 100, 0.1), input_error);
    CHECK_THROWS_AS(schedule_params(Regime::oblivious, 1, 100, 0.5), input_error);
}

TEST_CASE("practical schedule produces usable desk-scale parameters") {
    for (long long T : {250LL, 2000LL}) {
        const PracticalSchedule p = practical_schedule(1, T, 0.25);
        CHECK(p.epsilon < 1.0);
        CHECK(p.epsilon > 0.0);
        CHECK(p.block_size >= 8);
        CHECK(p.s_max >= 1);
        CHECK(p.mistake_tolerance >= 1);
        CHECK(p.m * p.block_size < T);
    }
}

TEST_CASE("config parsing: defaults, overrides, unknown keys") {
    std::istringstream in("learner = weak_learner\n"
                          "T = 100, 200\n"
                          "alpha = 0.25\n"
                          "seeds = 2\n"
                          "epsilon = 0.1\n"
                          "N = 12\n"
                          "# comment line\n");
    const ExperimentConfig cfg = ExperimentConfig::from_kv(parse_key_values(in));
    CHECK(cfg.horizons == std::vector<long long>{100, 200});
    CHECK(cfg.seeds == 2);
    CHECK(cfg.epsilon == doctest::Approx(0.1));
    CHECK(cfg.block_size == 12);

    std::istringstream bad("no_such_key = 1\n");
    CHECK_THROWS_AS(ExperimentConfig::from_kv(parse_key_values(bad)), input_error);
}

TEST_CASE("run_experiment: single cell equals the direct run") {
    ExperimentConfig cfg;
    cfg.learner = "oracle";
    cfg.horizons = {50};
    cfg.alphas = {0.25};
    cfg.seeds = 1;
    const SweepResult r = run_experiment(cfg, 1);
    REQUIRE(r.cells.size() == 1);
    CHECK_FALSE(r.cells[0].failed);
    CHECK(r.cells[0].mis_err == 0);
    CHECK(r.cells[0].abs_err == 0);
    REQUIRE(r.aggregates.size() == 1);
    CHECK(r.aggregates[0].runs == 1);
}

TEST_CASE("run_experiment: repeated invocations are bit-identical") {
    ExperimentConfig cfg;
    cfg.learner = "weak_learner";
    cfg.adversary = "replay:0.5";
    cfg.horizons = {120};
    cfg.alphas = {0.25};
    cfg.seeds = 3;
    cfg.epsilon = 0.15;
    cfg.m = 3;
    cfg.block_size = 10;
    const SweepResult a = run_experiment(cfg, 1);
    const SweepResult b = run_experiment(cfg, 3); // different thread count
    CHECK(sweep_to_csv(a) == sweep_to_csv(b));
    CHECK(sweep_to_jsonl(a) == sweep_to_jsonl(b));
}

TEST_CASE("run_experiment: failures are recorded, the sweep continues") {
    ExperimentConfig cfg;
    cfg.learner = "weak_learner";
    cfg.horizons = {20}; // warmup cannot fit -> per-cell input error
    cfg.alphas = {0.25};
    cfg.seeds = 2;
    cfg.m = 3;
    cfg.block_size = 10;
    const SweepResult r = run_experiment(cfg, 1);
    REQUIRE(r.cells.size() == 2);
    for (const auto& c : r.cells) {
        CHECK(c.failed);
        CHECK(!c.error.empty());
    }
}

TEST_CASE("csv output: fixed header and config echo") {
    ExperimentConfig cfg;
    cfg.learner = "always_abstain";
    cfg.horizons = {10};
    cfg.alphas = {0.1};
    cfg.seeds = 1;
    const SweepResult r = run_experiment(cfg, 1);
    const std::string csv = sweep_to_csv(r);
    CHECK(csv.find("# config:") == 0);
    CHECK(csv.find("T,alpha,seed_index,seed,mis_err,abs_err,failed") != std::string::npos);
    CHECK(csv.find("10,0.1,0,") != std::string::npos);
}

TEST_CASE("run_experiment: known-mu learner never errs on a VC-1 class") {
    ExperimentConfig cfg;
    cfg.learner = "known_mu";
    cfg.adversary = "replay:0.4";
    cfg.horizons = {80};
    cfg.alphas = {0.25};
    cfg.seeds = 3;
    const SweepResult r = run_experiment(cfg, 1);
    for (const auto& c : r.cells) {
        CHECK_FALSE(c.failed);
        // at level <= 1 the learner only answers on disambiguated points
        CHECK(c.mis_err == 0);
        CHECK(c.abs_err < 40);
    }
}

TEST_CASE("run_experiment: weak learner on halfspaces honors its bound") {
    ExperimentConfig cfg;
    cfg.learner = "weak_learner";
    cfg.spec = "halfspaces2d";
    cfg.horizons = {80};
    cfg.alphas = {0.25};
    cfg.seeds = 2;
    cfg.epsilon = 0.2;
    cfg.m = 3;
    cfg.block_size = 10;
    const SweepResult r = run_experiment(cfg, 1);
    const double bound = 5.0 * 9.0 * std::log(1.0 / cfg.epsilon); // d = 3
    for (const auto& c : r.cells) {
        CHECK_FALSE(c.failed);
        CHECK(static_cast<double>(c.mis_err) < bound);
    }
}

TEST_CASE("abstain_boost run: clean oracle-assisted pool stays error-light") {
    Environment env{ClassSpec::thresholds(), FiniteDistribution::uniform_scalar_grid(20),
                    Labeler::threshold(0.37), AdversaryScript::all_clean(300), 300};
    PoolSpec pool;
    pool.kind = PoolSpec::Kind::oracle_assisted;
    BoostParams params;
    params.epsilon = 0.15;
    params.m = 3;
    params.block_size = 15;
    params.s_max = 5;
    params.mistake_tolerance = 8;
    const RunResult r = abstain_boost_run(pool, params, env, 77);
    const auto [mis, abs] = r.recount();
    CHECK(mis == r.mis_err);
    CHECK(abs == r.abs_err);
    CHECK(r.mis_err <= 8);
    CHECK(r.abs_err < 150); // well below always-abstaining
}

TEST_CASE("abstain_boost run: censored protocol mode is well defined") {
    Environment env{ClassSpec::thresholds(), FiniteDistribution::uniform_scalar_grid(20),
                    Labeler::threshold(0.5), AdversaryScript::all_clean(250), 250};
    env.adversary = make_fixed_fraction_replay(250, 0.3, env.dist.support, 5);
    PoolSpec pool;
    pool.kind = PoolSpec::Kind::prefix_sweep;
    pool.count = 4;
    BoostParams params;
    params.epsilon = 0.15;
    params.m = 3;
    params.block_size = 12;
    params.s_max = 4;
    params.mistake_tolerance = 6;
    params.feedback_mode = FeedbackMode::censored;
    const RunResult r = abstain_boost_run(pool, params, env, 13);
    const auto [mis, abs] = r.recount();
    CHECK(mis == r.mis_err);
    CHECK(abs == r.abs_err);
    for (const auto& row : r.trace) {
        CHECK(row.observed == is_label(row.prediction)); // labels only on predictions
    }
    // deterministic repeat
    const RunResult r2 = abstain_boost_run(pool, params, env, 13);
    CHECK(r2.mis_err == r.mis_err);
    CHECK(r2.abs_err == r.abs_err);
}

TEST_CASE("loglog slope: exact powers recover their exponent") {
    std::vector<double> x{250, 500, 1000, 2000};
    std::vector<double> y;
    for (double v : x) y.push_back(std::pow(v, 0.75));
    CHECK(loglog_slope(x, y) == doctest::Approx(0.75));
    std::vector<double> flat{5, 5, 5, 5};
    CHECK(loglog_slope(x, flat) == doctest::Approx(0.0));
}
