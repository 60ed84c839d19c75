#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "abstain/boosting.hpp"
#include "abstain/environment.hpp"
#include "abstain/errors.hpp"
#include "abstain/weak_learner.hpp"

namespace abstain {

// Finite, tractable stand-ins for the combinatorial weak-learner pool. The
// boosting guarantee is relative to the best pool member, so bound checks
// work with any finite pool; end-to-end rate experiments additionally need a
// pool that contains a well-calibrated member.
//
//  - prefix_sweep: one learner per warmup window offset; window w covers
//    rounds [1 + w*stride, mN + w*stride]. Warmup labels are filled with the
//    observed labels as those rounds are played.
//  - oracle_assisted: a single learner whose warmup set is the true first-mN-
//    clean-rounds set of a script adversary.
//  - explicit_list: caller-provided configurations.
struct PoolSpec {
    enum class Kind { prefix_sweep, oracle_assisted, explicit_list };
    Kind kind = Kind::prefix_sweep;
    int count = 8;   // prefix_sweep: number of windows
    int stride = 0;  // prefix_sweep: offset step; 0 = warmup length
    std::vector<WeakLearnerConfig> explicit_configs;
};

struct BoostParams {
    double epsilon = 0.1;
    int m = 3;
    int block_size = 20; // N
    long long s_max = 4;
    long long mistake_tolerance = 8; // M
    UpdatePolicy update_policy = UpdatePolicy::always;
    FeedbackMode feedback_mode = FeedbackMode::full;
    std::uint64_t subset_budget = 200'000;
};

// Drives a weak-learner pool through the boosting combiner as one protocol
// learner. The pool's warmup recommendations are the labels the environment
// will reveal (the pool member that "guessed" them); the driver reads them
// from the labeler at frame-assembly time.
class AbstainBoostDriver final : public OnlineLearner {
public:
    AbstainBoostDriver(const PoolSpec& pool, const BoostParams& params, const Environment& env,
                       std::uint64_t seed)
        : labeler_(env.labeler), params_(params) {
        const int warmup_len = params.m * params.block_size;
        std::vector<WeakLearnerConfig> configs;
        switch (pool.kind) {
        case PoolSpec::Kind::prefix_sweep: {
            if (pool.count < 1) throw input_error("pool: window count must be >= 1");
            // default stride spreads the requested number of windows over the
            // horizon; windows may overlap
            int stride = pool.stride;
            if (stride <= 0) {
                stride = pool.count > 1
                             ? std::max(1, (env.horizon - warmup_len) / (pool.count - 1))
                             : warmup_len;
            }
            for (int w = 0; w < pool.count; ++w) {
                WeakLearnerConfig cfg = base_config(warmup_len, seed, w);
                const int start = 1 + w * stride;
                if (start + warmup_len - 1 > env.horizon) break;
                for (int t = start; t < start + warmup_len; ++t) cfg.warmup_times.push_back(t);
                configs.push_back(std::move(cfg));
            }
            break;
        }
        case PoolSpec::Kind::oracle_assisted: {
            const auto* script = std::get_if<AdversaryScript>(&env.adversary);
            if (!script)
                throw input_error("pool: oracle-assisted warmup requires a script adversary");
            WeakLearnerConfig cfg = base_config(warmup_len, seed, 0);
            for (int t = 1; t <= env.horizon && static_cast<int>(cfg.warmup_times.size()) < warmup_len;
                 ++t) {
                if (!script->corrupt[t - 1]) cfg.warmup_times.push_back(t);
            }
            configs.push_back(std::move(cfg));
            break;
        }
        case PoolSpec::Kind::explicit_list:
            configs = pool.explicit_configs;
            break;
        }
        if (configs.empty()) throw input_error("pool: no weak learners could be instantiated");
        for (auto& cfg : configs) {
            if (static_cast<int>(cfg.warmup_times.size()) < params.m)
                throw input_error("pool: warmup window too small for the block count");
            members_.push_back(std::make_unique<WeakLearner>(cfg, env.spec));
        }
        combiner_ = std::make_unique<BoostingCombiner>(static_cast<int>(members_.size()),
                                                       params.s_max, params.mistake_tolerance);
    }

    int pool_size() const { return static_cast<int>(members_.size()); }
    const BoostingCombiner& combiner() const { return *combiner_; }
    const WeakLearner& member(int i) const { return *members_[i]; }

    Prediction predict(int t, const Point& x) override {
        frame_.assign(members_.size(), Prediction::Abstain);
        for (std::size_t i = 0; i < members_.size(); ++i) {
            WeakLearner& wl = *members_[i];
            if (wl.phase() == WlPhase::warmup) {
                // a warmup recommendation is the label this member's window
                // assigns to round t; fill it from the target function
                wl.set_warmup_label_if_pending(t, labeler_(x));
            }
            frame_[i] = wl.predict(t, x);
        }
        return combiner_->step_predict(frame_);
    }

    void feedback(int t, const Point& x, std::optional<int> label) override {
        combiner_->step_feedback(frame_, label);
        for (auto& wl : members_) {
            if (params_.feedback_mode == FeedbackMode::censored) {
                wl->feedback(t, x, std::nullopt);
            } else {
                wl->feedback(t, x, label);
            }
        }
    }

private:
    WeakLearnerConfig base_config(int warmup_len, std::uint64_t seed, int index) const {
        WeakLearnerConfig cfg;
        cfg.epsilon = params_.epsilon;
        cfg.m = params_.m;
        cfg.update_policy = params_.update_policy;
        cfg.subset_budget = params_.subset_budget;
        cfg.seed = Rng::derive(seed, {0x9001ULL, static_cast<std::uint64_t>(index)});
        cfg.warmup_times.reserve(warmup_len);
        if (params_.feedback_mode == FeedbackMode::censored) {
            cfg.censored = CensoredUpdates{}; // no class updates without harvested labels
        }
        return cfg;
    }

    Labeler labeler_;
    BoostParams params_;
    std::vector<std::unique_ptr<WeakLearner>> members_;
    std::unique_ptr<BoostingCombiner> combiner_;
    std::vector<Prediction> frame_;
};

// One seeded AbstainBoost protocol execution.
inline RunResult abstain_boost_run(const PoolSpec& pool, const BoostParams& params,
                                   const Environment& env, std::uint64_t seed) {
    AbstainBoostDriver driver(pool, params, env, seed);
    return run_protocol(driver, env, params.feedback_mode, seed);
}

} // namespace abstain
