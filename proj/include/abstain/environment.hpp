#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "abstain/class_spec.hpp"
#include "abstain/distribution.hpp"
#include "abstain/errors.hpp"
#include "abstain/hypothesis.hpp"
#include "abstain/online_learner.hpp"
#include "abstain/point.hpp"
#include "abstain/rng.hpp"

namespace abstain {

// The target function f*, described by its parameter. Labels every instance,
// corrupted or not (clean-label corruptions).
class Labeler {
public:
    struct Threshold {
        double x0 = 0.5;
    };
    struct Box {
        std::vector<double> lo, hi;
    };
    struct Halfplane {
        double a1 = 1.0, a2 = 0.0, b = 0.0; // 1[a1 x + a2 y >= b]
    };
    struct TreePath {
        TreeNode target;
    };
    struct Subset {
        std::vector<Point> members;
    };

    using Variant = std::variant<Threshold, Box, Halfplane, TreePath, Subset>;

    explicit Labeler(Variant v) : v_(std::move(v)) {}

    static Labeler threshold(double x0) { return Labeler(Threshold{x0}); }
    static Labeler box(std::vector<double> lo, std::vector<double> hi) {
        return Labeler(Box{std::move(lo), std::move(hi)});
    }
    static Labeler halfplane(double a1, double a2, double b) { return Labeler(Halfplane{a1, a2, b}); }
    static Labeler tree_path(TreeNode target) { return Labeler(TreePath{std::move(target)}); }
    static Labeler subset(std::vector<Point> members) { return Labeler(Subset{std::move(members)}); }

    int operator()(const Point& x) const {
        if (const auto* t = std::get_if<Threshold>(&v_)) {
            return x.scalar() <= t->x0 ? 1 : 0;
        }
        if (const auto* b = std::get_if<Box>(&v_)) {
            const auto& v = x.vec();
            for (std::size_t i = 0; i < b->lo.size(); ++i) {
                if (v[i] < b->lo[i] || v[i] > b->hi[i]) return 0;
            }
            return 1;
        }
        if (const auto* h = std::get_if<Halfplane>(&v_)) {
            const auto& v = x.vec();
            return h->a1 * v[0] + h->a2 * v[1] >= h->b ? 1 : 0;
        }
        if (const auto* tp = std::get_if<TreePath>(&v_)) {
            return x.node().is_prefix_of(tp->target) ? 1 : 0;
        }
        const auto& s = std::get<Subset>(v_);
        for (const auto& p : s.members) {
            if (p == x) return 1;
        }
        return 0;
    }

    // f* must be a member of the configured class.
    bool consistent_with(const ClassSpec& spec) const {
        if (std::holds_alternative<Threshold>(v_)) {
            const double x0 = std::get<Threshold>(v_).x0;
            return spec.is<Thresholds>() && x0 >= 0.0 && x0 <= 1.0;
        }
        if (std::holds_alternative<Box>(v_)) {
            const auto& b = std::get<Box>(v_);
            return spec.is<Rectangles>() &&
                   static_cast<int>(b.lo.size()) == spec.as<Rectangles>().dim &&
                   b.lo.size() == b.hi.size();
        }
        if (std::holds_alternative<Halfplane>(v_)) return spec.is<Halfspaces2D>();
        if (std::holds_alternative<TreePath>(v_)) {
            return spec.is<TreePaths>() && spec.admits(Point::node(std::get<TreePath>(v_).target));
        }
        const auto& s = std::get<Subset>(v_);
        if (!spec.is<SubsetsOfSize>()) return false;
        if (static_cast<int>(s.members.size()) > spec.as<SubsetsOfSize>().max_size) return false;
        for (const auto& p : s.members) {
            if (!spec.admits(p)) return false;
        }
        return true;
    }

    const Variant& variant() const { return v_; }

private:
    Variant v_;
};

// Oblivious adversary: corruption flags and instances fixed before the run.
struct AdversaryScript {
    int horizon = 0;
    std::vector<std::uint8_t> corrupt;          // [horizon], 1 = corrupted
    std::vector<std::optional<Point>> instance; // instance present iff corrupt

    void validate() const {
        if (static_cast<int>(corrupt.size()) != horizon ||
            static_cast<int>(instance.size()) != horizon)
            throw input_error("adversary script: length mismatch with horizon");
        for (int t = 0; t < horizon; ++t) {
            if (static_cast<bool>(corrupt[t]) != instance[t].has_value())
                throw input_error("adversary script: instance must be present exactly on "
                                  "corrupted rounds");
        }
    }

    static AdversaryScript all_clean(int horizon) {
        AdversaryScript s;
        s.horizon = horizon;
        s.corrupt.assign(horizon, 0);
        s.instance.assign(horizon, std::nullopt);
        return s;
    }
};

// What an adaptive adversary is allowed to see: the visible history of played
// rounds. It never sees learner internals or future randomness.
struct HistoryRow {
    Point x;
    bool corrupted = false;
    Prediction prediction = Prediction::Abstain;
    int label = 0;
};

class AdaptivePolicy {
public:
    virtual ~AdaptivePolicy() = default;
    // Return the corrupted instance for round t, or nullopt to keep it clean.
    virtual std::optional<Point> decide(int t, std::span<const HistoryRow> history) = 0;
};

using Adversary = std::variant<AdversaryScript, std::shared_ptr<AdaptivePolicy>>;

struct Environment {
    ClassSpec spec;
    FiniteDistribution dist;
    Labeler labeler;
    Adversary adversary;
    int horizon = 0;
};

enum class FeedbackMode { full, censored };

struct TraceRow {
    int t = 0;
    bool corrupted = false;
    Point x;
    Prediction prediction = Prediction::Abstain;
    int label = 0;
    bool observed = false;
};

struct RunResult {
    std::vector<TraceRow> trace;
    long long mis_err = 0;
    long long abs_err = 0;
    std::uint64_t seed = 0;
    std::string config_echo;

    // Recompute the counters from the trace; must match the fields.
    std::pair<long long, long long> recount() const {
        long long mis = 0, abs = 0;
        for (const auto& row : trace) {
            if (is_label(row.prediction) && label_value(row.prediction) != row.label) ++mis;
            if (!row.corrupted && !is_label(row.prediction)) ++abs;
        }
        return {mis, abs};
    }
};

// The clean draw for round t depends only on (seed, t), never on the learner
// or adversary, so oracle warmup sets can be materialized ahead of a run.
inline Point clean_draw(const FiniteDistribution& dist, std::uint64_t seed, int t) {
    Rng rng(Rng::derive(seed, {0x636c65616eULL, static_cast<std::uint64_t>(t)}));
    return dist.sample(rng);
}

// Execute the protocol: the adversary picks corruption, clean rounds draw
// i.i.d. instances, labels always come from f*, and feedback is withheld on
// abstention rounds in censored mode.
inline RunResult run_protocol(OnlineLearner& learner, const Environment& env, FeedbackMode mode,
                              std::uint64_t seed) {
    if (!env.labeler.consistent_with(env.spec))
        throw input_error("run_protocol: labeler is not a member of the configured class");
    if (const auto* script = std::get_if<AdversaryScript>(&env.adversary)) {
        script->validate();
        if (script->horizon < env.horizon)
            throw input_error("run_protocol: script shorter than the horizon");
    }
    RunResult result;
    result.seed = seed;
    result.trace.reserve(env.horizon);
    std::vector<HistoryRow> history;
    history.reserve(env.horizon);
    for (int t = 1; t <= env.horizon; ++t) {
        bool corrupted = false;
        Point x;
        if (const auto* script = std::get_if<AdversaryScript>(&env.adversary)) {
            corrupted = script->corrupt[t - 1] != 0;
            if (corrupted) x = *script->instance[t - 1];
        } else {
            auto& policy = *std::get<std::shared_ptr<AdaptivePolicy>>(env.adversary);
            if (auto chosen = policy.decide(t, history)) {
                corrupted = true;
                x = std::move(*chosen);
            }
        }
        if (!corrupted) x = clean_draw(env.dist, seed, t);
        if (!env.spec.admits(x))
            throw input_error("run_protocol: instance outside the domain at round " +
                              std::to_string(t));
        const int y = env.labeler(x);
        const Prediction yhat = learner.predict(t, x);
        const bool observed = mode == FeedbackMode::full || is_label(yhat);
        learner.feedback(t, x, observed ? std::optional<int>(y) : std::nullopt);

        if (is_label(yhat) && label_value(yhat) != y) ++result.mis_err;
        if (!corrupted && !is_label(yhat)) ++result.abs_err;
        result.trace.push_back({t, corrupted, x, yhat, y, observed});
        history.push_back({x, corrupted, yhat, y});
    }
    return result;
}

// ---- built-in adversaries ----

// Corrupt a fixed fraction of rounds (chosen by seeded sampling without
// replacement), replaying instances from a fixed list in round order.
inline AdversaryScript make_fixed_fraction_replay(int horizon, double fraction,
                                                  std::span<const Point> replay,
                                                  std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0)
        throw input_error("replay adversary: fraction must be in [0,1]");
    const long long count = static_cast<long long>(fraction * horizon + 0.5);
    if (count > 0 && replay.empty())
        throw input_error("replay adversary: replay list must be nonempty");
    AdversaryScript s = AdversaryScript::all_clean(horizon);
    std::vector<int> rounds(horizon);
    std::iota(rounds.begin(), rounds.end(), 0);
    Rng rng(seed);
    for (long long i = 0; i < count; ++i) {
        const std::size_t j = i + rng.next_index(rounds.size() - i);
        std::swap(rounds[i], rounds[j]);
    }
    std::vector<int> chosen(rounds.begin(), rounds.begin() + count);
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        s.corrupt[chosen[i]] = 1;
        s.instance[chosen[i]] = replay[i % replay.size()];
    }
    return s;
}

// Contiguous corrupted block [start, start+length], 1-based inclusive start.
inline AdversaryScript make_burst(int horizon, int start, int length,
                                  std::span<const Point> replay) {
    if (start < 1 || length < 0) throw input_error("burst adversary: bad window");
    AdversaryScript s = AdversaryScript::all_clean(horizon);
    for (int i = 0; i < length && start - 1 + i < horizon; ++i) {
        if (replay.empty()) throw input_error("burst adversary: replay list must be nonempty");
        s.corrupt[start - 1 + i] = 1;
        s.instance[start - 1 + i] = replay[i % replay.size()];
    }
    return s;
}

// Adaptive attacker that submits points from a candidate pool lying in the
// disagreement region of a shadow copy of the learner's class. The shadow is
// rebuilt from the visible history with the given update policy.
class DisagreementTargetingPolicy final : public AdaptivePolicy {
public:
    DisagreementTargetingPolicy(ClassSpec spec, std::vector<Point> candidate_pool, double fraction,
                                std::uint64_t seed, int exempt_prefix = 0,
                                bool update_on_mistakes_only = true)
        : shadow_(ReducedClass(std::move(spec))), pool_(std::move(candidate_pool)),
          fraction_(fraction), rng_(seed), exempt_prefix_(exempt_prefix),
          mistakes_only_(update_on_mistakes_only) {
        if (fraction < 0.0 || fraction > 1.0)
            throw input_error("targeting adversary: fraction must be in [0,1]");
    }

    std::optional<Point> decide(int t, std::span<const HistoryRow> history) override {
        // fold the rounds played since the last call into the shadow class
        while (applied_ < history.size()) {
            const HistoryRow& row = history[applied_];
            const bool mistake =
                is_label(row.prediction) && label_value(row.prediction) != row.label;
            if (!mistakes_only_ || mistake) {
                ReducedClass next = shadow_.reduce(LabeledExample(row.x, row.label));
                if (!next.is_empty()) shadow_ = std::move(next);
            }
            ++applied_;
        }
        if (t <= exempt_prefix_) return std::nullopt;
        if (!rng_.next_bool(fraction_)) return std::nullopt;
        // collect pool points still in the shadow disagreement region
        std::vector<const Point*> live;
        for (const auto& p : pool_) {
            if (shadow_.in_disagreement_unchecked(p)) live.push_back(&p);
        }
        if (live.empty()) return std::nullopt; // nothing ambiguous left to aim at
        return *live[rng_.next_index(live.size())];
    }

private:
    ReducedClass shadow_;
    std::vector<Point> pool_;
    double fraction_;
    Rng rng_;
    std::size_t applied_ = 0;
    int exempt_prefix_;
    bool mistakes_only_;
};

} // namespace abstain
