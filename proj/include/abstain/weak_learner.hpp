#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "abstain/distribution.hpp"
#include "abstain/errors.hpp"
#include "abstain/estimators.hpp"
#include "abstain/hypothesis.hpp"
#include "abstain/online_learner.hpp"
#include "abstain/point.hpp"
#include "abstain/rng.hpp"

namespace abstain {

enum class UpdatePolicy { always, restricted };

// Censored-mode replacement for label-driven class updates: reduce at the
// listed rounds with the listed labels, ignore everything else.
struct CensoredUpdates {
    std::vector<int> times;  // sorted, 1-based rounds
    std::vector<int> labels; // parallel to times
};

struct WeakLearnerConfig {
    double epsilon = 0.1;
    int m = 3; // number of sample blocks
    UpdatePolicy update_policy = UpdatePolicy::always;
    std::vector<int> warmup_times;  // the calibration set, sorted 1-based rounds
    std::vector<int> warmup_labels; // parallel to warmup_times; -1 = not yet provided
    std::optional<CensoredUpdates> censored;
    int d = 0; // VC dimension override; 0 = take it from the class spec
    std::uint64_t subset_budget = 200'000;
    std::uint64_t seed = 0;
};

enum class WlPhase { warmup, active, final_phase };

// The estimate-driven weak learner. Warmup rounds answer with the provided
// labels and collect the calibration samples; active rounds run the
// level-selection / 0.9-drop rule on median-of-U-statistic estimates; once the
// order-1 estimate falls to epsilon the learner only answers on points outside
// the disagreement region.
class WeakLearner final : public OnlineLearner {
public:
    WeakLearner(WeakLearnerConfig config, ClassSpec spec)
        : config_(std::move(config)), current_(ReducedClass(std::move(spec))) {
        if (!(config_.epsilon > 0.0 && config_.epsilon <= 1.0))
            throw input_error("weak learner: epsilon must be in (0,1]");
        if (config_.warmup_times.empty())
            throw input_error("weak learner: the warmup time set must be nonempty");
        if (!std::is_sorted(config_.warmup_times.begin(), config_.warmup_times.end()))
            throw input_error("weak learner: warmup times must be sorted");
        if (config_.warmup_labels.empty()) {
            config_.warmup_labels.assign(config_.warmup_times.size(), -1);
        }
        if (config_.warmup_labels.size() != config_.warmup_times.size())
            throw input_error("weak learner: warmup labels must match warmup times");
        if (config_.m < 1) throw input_error("weak learner: block count must be >= 1");
        if (static_cast<int>(config_.warmup_times.size()) < config_.m)
            throw input_error("weak learner: warmup set smaller than the block count");
        if (config_.censored) {
            if (config_.censored->times.size() != config_.censored->labels.size())
                throw input_error("weak learner: censored update labels must match times");
            if (!std::is_sorted(config_.censored->times.begin(), config_.censored->times.end()))
                throw input_error("weak learner: censored update times must be sorted");
        }
        if (config_.d == 0) config_.d = current_.spec().vc_dimension();
        if (config_.d < 1) throw input_error("weak learner: VC dimension must be >= 1");
        warmup_end_ = config_.warmup_times.back();
        warmup_points_.reserve(config_.warmup_times.size());
    }

    WlPhase phase() const { return phase_; }
    const ReducedClass& current_class() const { return current_; }
    const std::vector<int>& mistake_times() const { return mistake_times_; }
    int last_k() const { return last_k_; }
    double mistake_bound() const {
        return 5.0 * config_.d * config_.d * std::log(1.0 / config_.epsilon);
    }

    // Pool-driver hook: fill in a warmup label before its round is played.
    void set_warmup_label(int t, int label) {
        const int idx = warmup_index(t);
        if (idx < 0) throw contract_error("weak learner: round is not in the warmup set");
        config_.warmup_labels[idx] = label;
    }

    // No-op when t is not a warmup round or already labeled; for pool drivers
    // that discover labels online.
    void set_warmup_label_if_pending(int t, int label) {
        const int idx = warmup_index(t);
        if (idx >= 0 && config_.warmup_labels[idx] == -1) config_.warmup_labels[idx] = label;
    }

    Prediction predict(int t, const Point& x) override {
        require_round(t, /*for_predict=*/true);
        last_prediction_ = predict_impl(t, x);
        return last_prediction_;
    }

    void feedback(int t, const Point& x, std::optional<int> label) override {
        require_round(t, /*for_predict=*/false);
        if (phase_ == WlPhase::warmup) {
            if (warmup_index(t) >= 0) warmup_points_.push_back(x);
            if (t == warmup_end_) finish_warmup();
            return;
        }
        if (phase_ != WlPhase::active) return;
        if (config_.censored) {
            const auto& cu = *config_.censored;
            const auto it = std::lower_bound(cu.times.begin(), cu.times.end(), t);
            if (it != cu.times.end() && *it == t) {
                apply_reduction(x, cu.labels[it - cu.times.begin()], t);
            }
        } else {
            if (!label) throw input_error("weak learner: label required in full-feedback mode");
            const Prediction made = last_prediction_;
            const bool mistake = is_label(made) && label_value(made) != *label;
            if (mistake) mistake_times_.push_back(t);
            const bool update = config_.update_policy == UpdatePolicy::always || mistake;
            if (update) apply_reduction(x, *label, t);
        }
        check_active_exit();
    }

    // Estimates behind the most recent active-round decision; for inspection.
    struct ActiveDecision {
        int k = 0;
        double rho_k = 0.0, rho0 = 0.0, rho1 = 0.0;
    };
    const std::optional<ActiveDecision>& last_decision() const { return last_decision_; }
    Prediction last_prediction() const { return last_prediction_; }

private:
    Prediction predict_impl(int t, const Point& x) {
        if (phase_ == WlPhase::warmup) {
            const int idx = warmup_index(t);
            if (idx < 0) return Prediction::Abstain;
            const int z = config_.warmup_labels[idx];
            if (z != 0 && z != 1)
                throw contract_error("weak learner: warmup label missing for round " +
                                     std::to_string(t));
            return to_prediction(z);
        }
        if (phase_ == WlPhase::final_phase) {
            if (current_.in_disagreement_unchecked(x)) return Prediction::Abstain;
            return to_prediction(current_.consistent_label(x));
        }
        // active: pick the largest order whose estimate chain stays above
        // epsilon ratios, then compare both one-step reductions at that order.
        const auto [k, rho_k] = select_order();
        last_k_ = k;
        const LabeledExample as0(x, 0), as1(x, 1);
        const double rho0 = median_with_extra(as0, k);
        const double rho1 = median_with_extra(as1, k);
        last_decision_ = ActiveDecision{k, rho_k, rho0, rho1};
        if (std::min(rho0, rho1) >= 0.9 * rho_k) return Prediction::Abstain;
        return rho1 >= rho0 ? Prediction::One : Prediction::Zero;
    }

    void require_round(int t, bool for_predict) {
        if (for_predict) {
            if (t <= last_predicted_t_)
                throw contract_error("weak learner: rounds must be presented in increasing order");
            if (awaiting_feedback_)
                throw contract_error("weak learner: feedback for the previous round is missing");
            last_predicted_t_ = t;
            awaiting_feedback_ = true;
        } else {
            if (!awaiting_feedback_ || t != last_predicted_t_)
                throw contract_error("weak learner: feedback must follow its round's predict call");
            awaiting_feedback_ = false;
        }
    }

    int warmup_index(int t) const {
        const auto it =
            std::lower_bound(config_.warmup_times.begin(), config_.warmup_times.end(), t);
        if (it == config_.warmup_times.end() || *it != t) return -1;
        return static_cast<int>(it - config_.warmup_times.begin());
    }

    void finish_warmup() {
        samples_ = PartitionedSamples::split(warmup_points_, config_.m);
        caches_.clear();
        caches_.reserve(samples_.blocks.size());
        for (auto& b : samples_.blocks) caches_.emplace_back(b);
        phase_ = WlPhase::active;
        check_active_exit();
    }

    double median_rho_level(int k) {
        std::vector<double> vals;
        vals.reserve(caches_.size());
        for (auto& c : caches_) vals.push_back(c.rho(current_, k));
        return lower_median(std::move(vals));
    }

    double median_with_extra(const LabeledExample& e, int k) {
        std::vector<double> vals;
        vals.reserve(caches_.size());
        for (auto& c : caches_) vals.push_back(c.rho_with_extra(current_, e, k));
        return lower_median(std::move(vals));
    }

    // k = max{k' in [d] : for all l <= k', rho_l > epsilon * rho_{l-1}} with
    // rho_0 = 1. The active-phase guard keeps rho_1 > epsilon, so k >= 1.
    std::pair<int, double> select_order() {
        const int d_cap = std::min(config_.d, samples_.block_size());
        double prev = 1.0;
        int k = 0;
        double rho_k = 1.0;
        for (int l = 1; l <= d_cap; ++l) {
            const double rho_l = median_rho_level(l);
            if (rho_l > config_.epsilon * prev) {
                k = l;
                rho_k = rho_l;
                prev = rho_l;
            } else {
                break;
            }
        }
        if (k == 0) {
            // can only happen through estimate ties at the guard boundary
            k = 1;
            rho_k = median_rho_level(1);
        }
        return {k, rho_k};
    }

    void apply_reduction(const Point& x, int label, int t) {
        current_ = current_.reduce(LabeledExample(x, label));
        if (current_.is_empty())
            throw state_error("weak learner: hypothesis class emptied at round " + std::to_string(t) +
                              "; the run is not realizable");
    }

    void check_active_exit() {
        if (median_rho_level(1) <= config_.epsilon) phase_ = WlPhase::final_phase;
    }

    WeakLearnerConfig config_;
    Prediction last_prediction_ = Prediction::Abstain;
    std::optional<ActiveDecision> last_decision_;
    ReducedClass current_;
    PartitionedSamples samples_;
    std::vector<BlockShatterCache> caches_;
    std::vector<Point> warmup_points_;
    std::vector<int> mistake_times_;
    WlPhase phase_ = WlPhase::warmup;
    int warmup_end_ = 0;
    int last_k_ = 0;
    int last_predicted_t_ = 0;
    bool awaiting_feedback_ = false;
};

// The known-distribution baseline: level counter k starts at the VC dimension,
// abstains on the 0.6-rule over exact shattering probabilities, reduces on
// every observed label, and drops the level while rho_k <= T^{-k}.
class KnownMuLearner final : public OnlineLearner {
public:
    KnownMuLearner(ClassSpec spec, FiniteDistribution dist, int horizon,
                   std::uint64_t rho_budget = 20'000'000)
        : current_(ReducedClass(std::move(spec))), dist_(std::move(dist)), horizon_(horizon),
          budget_(rho_budget) {
        if (horizon_ < 1) throw input_error("known-mu learner: horizon must be >= 1");
        level_ = current_.spec().vc_dimension();
    }

    int level() const { return level_; }
    const ReducedClass& current_class() const { return current_; }

    Prediction predict(int, const Point& x) override {
        if (level_ <= 1) {
            if (current_.in_disagreement_unchecked(x)) return Prediction::Abstain;
            return to_prediction(current_.consistent_label(x));
        }
        const double rho = exact_rho(current_, dist_, level_, budget_);
        const double rho0 = exact_rho(current_.reduce(LabeledExample(x, 0)), dist_, level_, budget_);
        const double rho1 = exact_rho(current_.reduce(LabeledExample(x, 1)), dist_, level_, budget_);
        if (std::min(rho0, rho1) >= 0.6 * rho) return Prediction::Abstain;
        return rho1 >= rho0 ? Prediction::One : Prediction::Zero;
    }

    void feedback(int, const Point& x, std::optional<int> label) override {
        if (!label) throw input_error("known-mu learner: label required");
        current_ = current_.reduce(LabeledExample(x, *label));
        if (current_.is_empty()) throw state_error("known-mu learner: hypothesis class emptied");
        while (level_ >= 1 &&
               exact_rho(current_, dist_, level_, budget_) <=
                   std::pow(static_cast<double>(horizon_), -level_)) {
            --level_;
        }
    }

private:
    ReducedClass current_;
    FiniteDistribution dist_;
    int horizon_;
    std::uint64_t budget_;
    int level_ = 1;
};

} // namespace abstain
