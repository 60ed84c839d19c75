#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "abstain/environment.hpp"
#include "abstain/errors.hpp"
#include "abstain/online_learner.hpp"
#include "abstain/point.hpp"
#include "abstain/rng.hpp"

namespace abstain {

using LearnerFactory = std::function<std::unique_ptr<OnlineLearner>()>;

// Output of the recursive tree-adversary construction: the realizable script
// it emitted, the target path node, the per-layer mistake rounds, and the
// learner's measured errors on the finished script.
struct LowerBoundOutcome {
    bool success = false;
    std::string failure_reason;
    ClassSpec spec = ClassSpec::thresholds(); // overwritten with the tree spec
    AdversaryScript script;
    TreeNode target;
    std::vector<TreeNode> target_chain; // x*_0 (root) .. x*_{i_max}
    int i_max = 0;
    std::vector<int> mistake_rounds; // the k_i
    double probe_half_width = 0.0;
    int trials = 0;
    double measured_mis = 0.0;
    double measured_abstentions = 0.0;
};

namespace lb_detail {

// Run the learner over a fixed instance prefix labeled by 1[. prefix-of target],
// recording predictions. Full feedback, rounds 1..|xs|.
inline std::vector<Prediction> replay(OnlineLearner& learner, std::span<const Point> xs,
                                      const TreeNode& target) {
    std::vector<Prediction> preds;
    preds.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const int t = static_cast<int>(i) + 1;
        const int y = xs[i].node().is_prefix_of(target) ? 1 : 0;
        preds.push_back(learner.predict(t, xs[i]));
        learner.feedback(t, xs[i], y);
    }
    return preds;
}

} // namespace lb_detail

// Measure the learner's abstention count on a clean i.i.d. stream of root
// children, as the budget estimate A for the construction.
inline double measure_abstention_budget(const LearnerFactory& factory, int horizon,
                                        std::int64_t arity, int trials, std::uint64_t seed) {
    double total = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(Rng::derive(seed, {0xabu, static_cast<std::uint64_t>(trial)}));
        auto learner = factory();
        TreeNode root;
        long long abstains = 0;
        for (int t = 1; t <= horizon; ++t) {
            const Point x =
                Point::node(root.child(static_cast<std::int32_t>(rng.next_index(arity) + 1)));
            const Prediction p = learner->predict(t, x);
            learner->feedback(t, x, 0); // children of the root are never the target's ancestors
            if (!is_label(p)) ++abstains;
        }
        total += static_cast<double>(abstains);
    }
    return total / trials;
}

// The recursive lower-bound construction. Layer by layer it samples i.i.d.
// children of the current target, probes the learner for a round where the
// abstention frequency is at most 1/2 (plus probe slack), fixes an
// instantiation on which the learner predicts and the probed round's instance
// is fresh, then moves the target to force a mistake on the learner's
// majority answer. Probabilities are estimated with `trials` Monte Carlo
// probes (exact for deterministic learners).
inline LowerBoundOutcome build_lowerbound_adversary(const LearnerFactory& factory, int horizon,
                                                    double abstention_budget, int trials,
                                                    std::uint64_t seed,
                                                    std::int64_t arity_override = 0) {
    LowerBoundOutcome out;
    out.trials = trials;
    if (horizon < 1) throw input_error("lower bound: horizon must be >= 1");
    if (trials < 1) throw input_error("lower bound: at least one probe trial required");
    const double budget = std::max(0.5, std::min(abstention_budget, horizon / 2.0));
    const std::int64_t arity =
        arity_override > 0 ? arity_override : 4LL * static_cast<std::int64_t>(horizon);
    out.i_max = static_cast<int>(horizon / (2.0 * budget));
    if (out.i_max < 1) out.i_max = 1;
    const int window = static_cast<int>(std::ceil(2.0 * budget));
    out.probe_half_width = 1.0 / std::sqrt(static_cast<double>(trials));
    out.spec = ClassSpec::tree_paths(arity, out.i_max);

    std::vector<Point> fixed;       // x_1..x_{k_{i-1}}
    TreeNode target;                // x*_{i-1}
    out.target_chain.push_back(target);
    Rng rng(Rng::derive(seed, {0x1bU}));

    for (int layer = 1; layer <= out.i_max; ++layer) {
        const int base = static_cast<int>(fixed.size());
        const int extension = std::min(window, horizon - base);
        if (extension <= 0) {
            out.failure_reason = "horizon exhausted before layer " + std::to_string(layer);
            return out;
        }
        // probe abstention frequency per candidate round over fresh extensions
        std::vector<int> abstain_count(extension, 0);
        for (int trial = 0; trial < trials; ++trial) {
            std::vector<Point> xs = fixed;
            Rng draw(Rng::derive(seed, {static_cast<std::uint64_t>(layer),
                                        static_cast<std::uint64_t>(trial)}));
            for (int i = 0; i < extension; ++i) {
                xs.push_back(Point::node(
                    target.child(static_cast<std::int32_t>(draw.next_index(arity) + 1))));
            }
            auto learner = factory();
            const auto preds = lb_detail::replay(*learner, xs, target);
            for (int i = 0; i < extension; ++i) {
                if (!is_label(preds[base + i])) ++abstain_count[i];
            }
        }
        int candidate = -1;
        for (int i = 0; i < extension; ++i) {
            const double freq = static_cast<double>(abstain_count[i]) / trials;
            if (freq <= 0.5 + out.probe_half_width) {
                candidate = i;
                break;
            }
        }
        if (candidate < 0) {
            out.failure_reason = "no candidate round with abstention frequency <= 1/2 in layer " +
                                 std::to_string(layer);
            return out;
        }
        // fix an instantiation: learner predicts at the candidate and the
        // candidate instance is distinct from the other new instances
        const int k_i = base + candidate + 1;
        std::vector<Point> chosen;
        Prediction pred_at_k = Prediction::Abstain;
        bool fixed_ok = false;
        const int attempts = 8 * trials;
        for (int attempt = 0; attempt < attempts && !fixed_ok; ++attempt) {
            std::vector<Point> xs = fixed;
            Rng draw(Rng::derive(seed, {static_cast<std::uint64_t>(layer), 0xf1eeULL,
                                        static_cast<std::uint64_t>(attempt)}));
            for (int i = 0; i <= candidate; ++i) {
                xs.push_back(Point::node(
                    target.child(static_cast<std::int32_t>(draw.next_index(arity) + 1))));
            }
            bool distinct = true;
            for (int i = base; i < k_i - 1; ++i) {
                if (xs[i] == xs[k_i - 1]) distinct = false;
            }
            if (!distinct) continue;
            auto learner = factory();
            const auto preds = lb_detail::replay(*learner, xs, target);
            if (is_label(preds[k_i - 1])) {
                chosen.assign(xs.begin() + base, xs.end());
                pred_at_k = preds[k_i - 1];
                fixed_ok = true;
            }
        }
        if (!fixed_ok) {
            out.failure_reason = "could not fix a predicting instantiation in layer " +
                                 std::to_string(layer);
            return out;
        }
        for (auto& p : chosen) fixed.push_back(std::move(p));
        out.mistake_rounds.push_back(k_i);
        // move the target to contradict the learner's answer at k_i
        if (pred_at_k == Prediction::Zero) {
            target = fixed[k_i - 1].node(); // true label becomes 1
        } else {
            // fresh child distinct from every instance in this layer
            TreeNode fresh;
            bool found = false;
            for (int probe = 0; probe < 64 && !found; ++probe) {
                fresh = target.child(static_cast<std::int32_t>(rng.next_index(arity) + 1));
                found = true;
                for (int i = base; i < k_i; ++i) {
                    if (fixed[i].node() == fresh) found = false;
                }
            }
            if (!found) {
                out.failure_reason = "failed to find a fresh child in layer " +
                                     std::to_string(layer);
                return out;
            }
            target = fresh; // true label at k_i stays 0, learner answered 1
        }
        out.target_chain.push_back(target);
    }

    // complete the script to the horizon by repeating the last fixed instance
    out.target = target;
    out.script.horizon = horizon;
    out.script.corrupt.assign(horizon, 1);
    out.script.instance.assign(horizon, std::nullopt);
    for (int t = 0; t < horizon; ++t) {
        if (t < static_cast<int>(fixed.size())) {
            out.script.instance[t] = fixed[t];
        } else {
            out.script.instance[t] = fixed.empty() ? Point::node(TreeNode{}) : fixed.back();
        }
    }
    out.success = true;

    // measure the learner on the finished script
    double mis_total = 0.0, abs_total = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        auto learner = factory();
        long long mis = 0, abs = 0;
        for (int t = 1; t <= horizon; ++t) {
            const Point& x = *out.script.instance[t - 1];
            const int y = x.node().is_prefix_of(target) ? 1 : 0;
            const Prediction p = learner->predict(t, x);
            learner->feedback(t, x, y);
            if (is_label(p) && label_value(p) != y) ++mis;
            if (!is_label(p)) ++abs;
        }
        mis_total += static_cast<double>(mis);
        abs_total += static_cast<double>(abs);
    }
    out.measured_mis = mis_total / trials;
    out.measured_abstentions = abs_total / trials;
    return out;
}

} // namespace abstain
