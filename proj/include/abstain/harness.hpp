#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "abstain/abstain_boost.hpp"
#include "abstain/environment.hpp"
#include "abstain/errors.hpp"
#include "abstain/trace_io.hpp"
#include "abstain/weak_learner.hpp"

namespace abstain {

enum class Regime { oblivious, adaptive, censored_oblivious };

// Parameter schedule of the main guarantees, natural log throughout. Flags
// the degenerate corners (epsilon >= 1 or s_max > T) where the guarantee is
// vacuous and the mistake tolerance is set to zero.
struct Schedule {
    double epsilon = 0.0;
    long long m = 0;
    long long block_size = 0; // N
    long long s_max = 0;
    double mistake_tolerance = 0.0; // M
    UpdatePolicy policy = UpdatePolicy::always;
    bool edge_case = false;
    std::string note;
};

inline Schedule schedule_params(Regime regime, int d, long long horizon, double alpha,
                                std::optional<double> reduction_dimension = std::nullopt) {
    if (d < 1) throw input_error("schedule: VC dimension must be >= 1");
    if (horizon < 1) throw input_error("schedule: horizon must be >= 1");
    if (alpha < 0.0 || alpha > 1.0 / 3.0)
        throw input_error("schedule: alpha must lie in [0, 1/3] for these regimes");
    const double T = static_cast<double>(horizon);
    const double dd = static_cast<double>(d) * d;
    const double lnT = std::log(T);
    Schedule s;
    double raw_smax = 0.0;
    switch (regime) {
    case Regime::oblivious: {
        s.policy = UpdatePolicy::always;
        s.epsilon = dd * std::pow(lnT, 5.0 / 3.0) * std::pow(T, -alpha);
        s.m = static_cast<long long>(std::ceil(8.0 * std::log(d * T / s.epsilon)));
        raw_smax = std::ceil(dd * std::pow(lnT, 4.0 / 3.0) * std::pow(T, 1.0 - 2.0 * alpha));
        break;
    }
    case Regime::adaptive: {
        if (!reduction_dimension)
            throw input_error("schedule: the adaptive regime needs the reduction dimension D");
        const double D = *reduction_dimension;
        s.policy = UpdatePolicy::restricted;
        const double mix = D * std::log(D) + lnT;
        s.epsilon = dd * std::pow(mix, 2.0 / 3.0) * lnT * std::pow(T, -alpha);
        // the universal constant in front of m is unspecified; c0 = 1 here
        s.m = static_cast<long long>(
            std::ceil(D * std::log(D) + 8.0 * D + 3.0 * std::log(d / s.epsilon)));
        raw_smax = std::ceil(dd * std::pow(mix, 1.0 / 3.0) * lnT * std::pow(T, 1.0 - 2.0 * alpha));
        break;
    }
    case Regime::censored_oblivious: {
        s.policy = UpdatePolicy::restricted;
        s.epsilon = std::pow(static_cast<double>(d), 10.0 / 3.0) * std::pow(lnT, 7.0 / 3.0) *
                    std::pow(T, -alpha);
        s.m = static_cast<long long>(std::ceil(80.0 * dd * std::log(1.0 / s.epsilon) * lnT));
        raw_smax = std::ceil(std::pow(static_cast<double>(d), 8.0 / 3.0) *
                             std::pow(lnT, 5.0 / 3.0) * std::pow(T, 1.0 - 2.0 * alpha));
        break;
    }
    }
    s.block_size = static_cast<long long>(std::ceil(2000.0 * dd / s.epsilon));
    s.s_max = static_cast<long long>(std::min(raw_smax, T));
    s.mistake_tolerance = 5.0 * dd * std::log(1.0 / s.epsilon);
    if (s.epsilon >= 1.0 || raw_smax > T) {
        s.edge_case = true;
        s.mistake_tolerance = 0.0;
        s.note = s.epsilon >= 1.0 ? "epsilon >= 1: guarantee vacuous, tolerance forced to 0"
                                  : "s_max exceeds the horizon: capped, tolerance forced to 0";
    }
    if (s.m < 1) s.m = 1;
    return s;
}

// Constant-reduced schedule for workstation-scale horizons. The guarantee
// constants put epsilon above 1 for any desk-sized T, so rate experiments use
// the same exponents with unit constants.
struct PracticalSchedule {
    double epsilon;
    int m;
    int block_size;
    long long s_max;
    long long mistake_tolerance;
};

inline PracticalSchedule practical_schedule(int d, long long horizon, double alpha,
                                            double block_constant = 8.0, int m = 3) {
    const double T = static_cast<double>(horizon);
    PracticalSchedule p;
    p.epsilon = std::min(0.9, std::pow(T, -alpha));
    p.m = m;
    p.block_size = static_cast<int>(std::ceil(block_constant * d * d / p.epsilon));
    p.s_max = static_cast<long long>(std::min(T, std::ceil(std::pow(T, 1.0 - 2.0 * alpha))));
    p.mistake_tolerance =
        static_cast<long long>(std::ceil(5.0 * d * d * std::log(1.0 / p.epsilon)));
    if (p.mistake_tolerance < 1) p.mistake_tolerance = 1;
    return p;
}

// ---- experiment configuration ----

// Flat key = value text format; '#' starts a comment.
inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw input_error("config: empty key");
        kv[key] = value;
    }
    return kv;
}

struct ExperimentConfig {
    std::string learner = "weak_learner"; // weak_learner | known_mu | abstain_boost |
                                          // oracle | always_abstain | majority
    std::string spec = "thresholds";      // thresholds | rectangles2 | halfspaces2d
    int dist_points = 20;                 // scalar or planar grid resolution
    double labeler_threshold = 0.37;
    std::vector<double> labeler_box; // lo..., hi... (2*dim values)
    std::string adversary = "none";  // none | replay:<frac> | burst:<start>:<len> |
                                     // targeting:<frac>
    std::vector<long long> horizons = {500};
    std::vector<double> alphas = {0.25};
    int seeds = 1;
    std::uint64_t master_seed = 1;
    FeedbackMode feedback_mode = FeedbackMode::full;
    std::string update = "always";
    std::string pool = "prefix_sweep"; // abstain_boost pool strategy
    int pool_count = 8;
    double epsilon = 0.0; // 0 = derive from the alpha schedule
    int m = 3;
    int block_size = 0; // 0 = derive
    std::uint64_t subset_budget = 200'000;
    std::string trace_dir; // when nonempty, every run writes its trace here

    static std::vector<long long> parse_ll_list(const std::string& s) {
        std::vector<long long> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) out.push_back(std::stoll(item));
        }
        return out;
    }
    static std::vector<double> parse_double_list(const std::string& s) {
        std::vector<double> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) out.push_back(std::stod(item));
        }
        return out;
    }

    static ExperimentConfig from_kv(const std::map<std::string, std::string>& kv) {
        ExperimentConfig c;
        static const std::set<std::string> known = {
            "learner", "spec",  "dist_points", "labeler_threshold", "labeler_box",
            "adversary", "T",   "alpha",       "seeds",             "master_seed",
            "feedback",  "update", "pool",     "pool_count",        "epsilon",
            "m",         "N",   "subset_budget"};
        for (const auto& [k, v] : kv) {
            if (!known.count(k)) throw input_error("config: unknown key '" + k + "'");
        }
        auto get = [&](const char* k) -> std::optional<std::string> {
            const auto it = kv.find(k);
            if (it == kv.end()) return std::nullopt;
            return it->second;
        };
        if (auto v = get("learner")) c.learner = *v;
        if (auto v = get("spec")) c.spec = *v;
        if (auto v = get("dist_points")) c.dist_points = std::stoi(*v);
        if (auto v = get("labeler_threshold")) c.labeler_threshold = std::stod(*v);
        if (auto v = get("labeler_box")) c.labeler_box = parse_double_list(*v);
        if (auto v = get("adversary")) c.adversary = *v;
        if (auto v = get("T")) c.horizons = parse_ll_list(*v);
        if (auto v = get("alpha")) c.alphas = parse_double_list(*v);
        if (auto v = get("seeds")) c.seeds = std::stoi(*v);
        if (auto v = get("master_seed")) c.master_seed = std::stoull(*v);
        if (auto v = get("feedback"))
            c.feedback_mode = *v == "censored" ? FeedbackMode::censored : FeedbackMode::full;
        if (auto v = get("update")) c.update = *v;
        if (auto v = get("pool")) c.pool = *v;
        if (auto v = get("pool_count")) c.pool_count = std::stoi(*v);
        if (auto v = get("epsilon")) c.epsilon = std::stod(*v);
        if (auto v = get("m")) c.m = std::stoi(*v);
        if (auto v = get("N")) c.block_size = std::stoi(*v);
        if (auto v = get("subset_budget")) c.subset_budget = std::stoull(*v);
        if (c.horizons.empty() || c.alphas.empty() || c.seeds < 1)
            throw input_error("config: empty grid");
        return c;
    }

    std::string echo() const {
        std::ostringstream os;
        os << "learner=" << learner << " spec=" << spec << " dist_points=" << dist_points
           << " adversary=" << adversary << " seeds=" << seeds << " master_seed=" << master_seed
           << " feedback=" << (feedback_mode == FeedbackMode::censored ? "censored" : "full")
           << " update=" << update << " pool=" << pool << " pool_count=" << pool_count;
        return os.str();
    }
};

struct SweepCell {
    long long horizon = 0;
    double alpha = 0.0;
    int seed_index = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    long long mis_err = 0;
    long long abs_err = 0;
};

struct SweepAggregate {
    long long horizon = 0;
    double alpha = 0.0;
    int runs = 0;
    double mis_mean = 0.0, mis_std = 0.0, mis_min = 0.0, mis_max = 0.0;
    double abs_mean = 0.0, abs_std = 0.0, abs_min = 0.0, abs_max = 0.0;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::vector<SweepAggregate> aggregates;
    std::string config_echo;
    std::uint64_t master_seed = 0;
};

// Deterministic parallel map: results land in a preallocated slot per index,
// so the merge is schedule-independent.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const int count = std::min<std::size_t>(threads, n);
    workers.reserve(count);
    for (int w = 0; w < count; ++w) {
        workers.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : workers) t.join();
}

inline int thread_count_override(int requested) {
    if (const char* env = std::getenv("ABSTAIN_LAB_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return requested;
}

namespace harness_detail {

inline Environment build_environment(const ExperimentConfig& cfg, long long horizon,
                                     std::uint64_t seed, int adaptive_exempt_prefix = 0) {
    ClassSpec spec = ClassSpec::thresholds();
    FiniteDistribution dist = FiniteDistribution::uniform_scalar_grid(cfg.dist_points);
    Labeler labeler = Labeler::threshold(cfg.labeler_threshold);
    if (cfg.spec == "thresholds") {
        // defaults above
    } else if (cfg.spec == "rectangles2") {
        spec = ClassSpec::rectangles(2);
        const int side = std::max(2, static_cast<int>(std::lround(std::sqrt(cfg.dist_points))));
        dist = FiniteDistribution::uniform_planar_grid(side);
        if (cfg.labeler_box.size() == 4) {
            labeler = Labeler::box({cfg.labeler_box[0], cfg.labeler_box[1]},
                                   {cfg.labeler_box[2], cfg.labeler_box[3]});
        } else {
            labeler = Labeler::box({0.2, 0.2}, {0.65, 0.65});
        }
    } else if (cfg.spec == "halfspaces2d") {
        spec = ClassSpec::halfspaces2d();
        const int side = std::max(2, static_cast<int>(std::lround(std::sqrt(cfg.dist_points))));
        dist = FiniteDistribution::uniform_planar_grid(side);
        labeler = Labeler::halfplane(1.0, 1.0, 1.0);
    } else {
        throw input_error("config: unknown spec '" + cfg.spec + "'");
    }

    Adversary adversary = AdversaryScript::all_clean(static_cast<int>(horizon));
    const auto& a = cfg.adversary;
    if (a == "none") {
        // all clean
    } else if (a.rfind("replay:", 0) == 0) {
        const double frac = std::stod(a.substr(7));
        std::vector<Point> replay = dist.support;
        adversary = make_fixed_fraction_replay(static_cast<int>(horizon), frac, replay,
                                               Rng::derive(seed, {0xadULL}));
    } else if (a.rfind("burst:", 0) == 0) {
        const std::size_t colon = a.find(':', 6);
        if (colon == std::string::npos) throw input_error("config: burst needs start:length");
        const int start = std::stoi(a.substr(6, colon - 6));
        const int len = std::stoi(a.substr(colon + 1));
        adversary = make_burst(static_cast<int>(horizon), start, len, dist.support);
    } else if (a.rfind("targeting:", 0) == 0) {
        const double frac = std::stod(a.substr(10));
        adversary = std::make_shared<DisagreementTargetingPolicy>(
            spec, dist.support, frac, Rng::derive(seed, {0xadULL}), adaptive_exempt_prefix);
    } else {
        throw input_error("config: unknown adversary '" + a + "'");
    }
    return Environment{std::move(spec), std::move(dist), std::move(labeler), std::move(adversary),
                       static_cast<int>(horizon)};
}

inline RunResult run_one(const ExperimentConfig& cfg, long long horizon, double alpha,
                         std::uint64_t seed) {
    // schedule first: adaptive adversaries must leave the warmup prefix clean
    const int d = cfg.spec == "rectangles2" ? 4 : (cfg.spec == "halfspaces2d" ? 3 : 1);
    const PracticalSchedule ps = practical_schedule(d, horizon, alpha);
    const double eps = cfg.epsilon > 0.0 ? cfg.epsilon : ps.epsilon;
    const int N = cfg.block_size > 0 ? cfg.block_size : ps.block_size;
    const bool estimator_learner = cfg.learner == "weak_learner" || cfg.learner == "abstain_boost";
    const int exempt = estimator_learner ? cfg.m * N : 0;
    Environment env = build_environment(cfg, horizon, seed, exempt);
    const UpdatePolicy policy =
        cfg.update == "restricted" ? UpdatePolicy::restricted : UpdatePolicy::always;

    if (cfg.learner == "oracle") {
        class OracleLearner final : public OnlineLearner {
        public:
            explicit OracleLearner(const Labeler& lab) : lab_(lab) {}
            Prediction predict(int, const Point& x) override { return to_prediction(lab_(x)); }
            void feedback(int, const Point&, std::optional<int>) override {}

        private:
            Labeler lab_;
        } oracle(env.labeler);
        return run_protocol(oracle, env, cfg.feedback_mode, seed);
    }
    if (cfg.learner == "always_abstain") {
        AlwaysAbstainLearner l;
        return run_protocol(l, env, cfg.feedback_mode, seed);
    }
    if (cfg.learner == "majority") {
        MajorityLearner l;
        return run_protocol(l, env, cfg.feedback_mode, seed);
    }
    if (cfg.learner == "known_mu") {
        KnownMuLearner l(env.spec, env.dist, static_cast<int>(horizon));
        return run_protocol(l, env, cfg.feedback_mode, seed);
    }
    if (cfg.learner == "weak_learner") {
        WeakLearnerConfig wl;
        wl.epsilon = eps;
        wl.m = cfg.m;
        wl.update_policy = policy;
        wl.subset_budget = cfg.subset_budget;
        wl.seed = seed;
        const int warmup_len = cfg.m * N;
        if (warmup_len >= horizon)
            throw input_error("config: warmup longer than the horizon; lower m or N");
        // oracle warmup: the first m*N clean rounds with their true labels
        if (const auto* script = std::get_if<AdversaryScript>(&env.adversary)) {
            for (int t = 1; t <= horizon && static_cast<int>(wl.warmup_times.size()) < warmup_len;
                 ++t) {
                if (!script->corrupt[t - 1]) {
                    wl.warmup_times.push_back(t);
                    wl.warmup_labels.push_back(env.labeler(clean_draw(env.dist, seed, t)));
                }
            }
        } else {
            // adaptive adversary: exempt the prefix so it stays clean
            for (int t = 1; t <= warmup_len; ++t) {
                wl.warmup_times.push_back(t);
                wl.warmup_labels.push_back(env.labeler(clean_draw(env.dist, seed, t)));
            }
        }
        if (static_cast<int>(wl.warmup_times.size()) < warmup_len)
            throw input_error("config: not enough clean rounds for the warmup set");
        WeakLearner learner(wl, env.spec);
        return run_protocol(learner, env, cfg.feedback_mode, seed);
    }
    if (cfg.learner == "abstain_boost") {
        PoolSpec pool;
        pool.kind = cfg.pool == "oracle_assisted" ? PoolSpec::Kind::oracle_assisted
                                                  : PoolSpec::Kind::prefix_sweep;
        pool.count = cfg.pool_count;
        BoostParams params;
        params.epsilon = eps;
        params.m = cfg.m;
        params.block_size = N;
        params.s_max = ps.s_max;
        params.mistake_tolerance = ps.mistake_tolerance;
        params.update_policy = policy;
        params.feedback_mode = cfg.feedback_mode;
        params.subset_budget = cfg.subset_budget;
        return abstain_boost_run(pool, params, env, seed);
    }
    throw input_error("config: unknown learner '" + cfg.learner + "'");
}

} // namespace harness_detail

inline SweepResult run_experiment(const ExperimentConfig& cfg, int threads = 1) {
    SweepResult result;
    result.master_seed = cfg.master_seed;
    result.config_echo = cfg.echo();
    const std::size_t grid =
        cfg.horizons.size() * cfg.alphas.size() * static_cast<std::size_t>(cfg.seeds);
    result.cells.resize(grid);
    const int workers = thread_count_override(threads);
    parallel_for(grid, workers, [&](std::size_t idx) {
        const std::size_t per_t = cfg.alphas.size() * static_cast<std::size_t>(cfg.seeds);
        const std::size_t ti = idx / per_t;
        const std::size_t ai = (idx % per_t) / cfg.seeds;
        const int si = static_cast<int>(idx % cfg.seeds);
        SweepCell& cell = result.cells[idx];
        cell.horizon = cfg.horizons[ti];
        cell.alpha = cfg.alphas[ai];
        cell.seed_index = si;
        cell.seed = Rng::derive(cfg.master_seed,
                                {static_cast<std::uint64_t>(ti), static_cast<std::uint64_t>(ai),
                                 static_cast<std::uint64_t>(si)});
        try {
            const RunResult run =
                harness_detail::run_one(cfg, cell.horizon, cell.alpha, cell.seed);
            cell.mis_err = run.mis_err;
            cell.abs_err = run.abs_err;
            if (!cfg.trace_dir.empty()) {
                std::ostringstream name;
                name << cfg.trace_dir << "/trace_T" << cell.horizon << "_a" << cell.alpha << "_s"
                     << cell.seed_index << ".tsv";
                std::ofstream out(name.str(), std::ios::binary);
                if (!out) throw input_error("cannot open trace file " + name.str());
                out << "# seed: " << cell.seed << "\n" << format_trace(run);
            }
        } catch (const std::exception& e) {
            cell.failed = true;
            cell.error = e.what();
        }
    });
    // aggregate per grid point
    for (std::size_t ti = 0; ti < cfg.horizons.size(); ++ti) {
        for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
            SweepAggregate agg;
            agg.horizon = cfg.horizons[ti];
            agg.alpha = cfg.alphas[ai];
            std::vector<double> mis, abs;
            for (const auto& cell : result.cells) {
                if (cell.horizon != agg.horizon || cell.alpha != agg.alpha || cell.failed) continue;
                mis.push_back(static_cast<double>(cell.mis_err));
                abs.push_back(static_cast<double>(cell.abs_err));
            }
            agg.runs = static_cast<int>(mis.size());
            if (agg.runs > 0) {
                auto stats = [](const std::vector<double>& v, double& mean, double& sd,
                                double& lo, double& hi) {
                    mean = 0.0;
                    lo = v.front();
                    hi = v.front();
                    for (double x : v) {
                        mean += x;
                        lo = std::min(lo, x);
                        hi = std::max(hi, x);
                    }
                    mean /= static_cast<double>(v.size());
                    double ss = 0.0;
                    for (double x : v) ss += (x - mean) * (x - mean);
                    sd = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
                };
                stats(mis, agg.mis_mean, agg.mis_std, agg.mis_min, agg.mis_max);
                stats(abs, agg.abs_mean, agg.abs_std, agg.abs_min, agg.abs_max);
            }
            result.aggregates.push_back(agg);
        }
    }
    return result;
}

// Least-squares slope of log(y) against log(x); the sublinearity probe.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw input_error("loglog_slope: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(std::max(y[i], 0.5)); // guard log(0) for error-free runs
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---- structured output ----

inline std::string format_double_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// Fixed, versioned column order; the JSONL mirror carries the same fields.
inline const char* kSweepCsvHeader = "T,alpha,seed_index,seed,mis_err,abs_err,failed\n";

inline std::string sweep_to_csv(const SweepResult& result) {
    std::string out = "# config: " + result.config_echo + "\n";
    out += "# master_seed: " + std::to_string(result.master_seed) + "\n";
    out += kSweepCsvHeader;
    for (const auto& c : result.cells) {
        out += std::to_string(c.horizon) + "," + format_double_short(c.alpha) + "," +
               std::to_string(c.seed_index) + "," + std::to_string(c.seed) + "," +
               std::to_string(c.mis_err) + "," + std::to_string(c.abs_err) + "," +
               (c.failed ? "1" : "0") + "\n";
    }
    return out;
}

inline std::string sweep_to_jsonl(const SweepResult& result) {
    std::string out = "{\"type\":\"config\",\"echo\":\"" + result.config_echo +
                      "\",\"master_seed\":" + std::to_string(result.master_seed) + "}\n";
    for (const auto& c : result.cells) {
        out += "{\"type\":\"run\",\"T\":" + std::to_string(c.horizon) +
               ",\"alpha\":" + format_double_short(c.alpha) +
               ",\"seed_index\":" + std::to_string(c.seed_index) +
               ",\"seed\":" + std::to_string(c.seed) + ",\"mis_err\":" + std::to_string(c.mis_err) +
               ",\"abs_err\":" + std::to_string(c.abs_err) +
               ",\"failed\":" + (c.failed ? "true" : "false") + "}\n";
    }
    return out;
}

} // namespace abstain
