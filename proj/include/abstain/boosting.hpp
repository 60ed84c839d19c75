#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "abstain/errors.hpp"
#include "abstain/point.hpp"
#include "abstain/rng.hpp"

namespace abstain {

// Per-round vector of expert outputs plus the true label when available.
struct RecommendationFrame {
    int t = 0;
    std::vector<Prediction> outputs;
    std::optional<int> label;
};

inline int ceil_log2(std::uint64_t x) {
    int k = 0;
    while ((1ULL << k) < x) ++k;
    return k;
}

// One deletion layer: suppress each expert's first s predictions, then follow
// the plain majority when at least C survive (tie -> 1), otherwise abstain.
// C may be fractional; "at least C" compares the integer survivor count to it.
class DeleteCombiner {
public:
    DeleteCombiner(int num_experts, double min_predictions, long long deletions)
        : s_(deletions), min_predictions_(min_predictions),
          seen_(static_cast<std::size_t>(num_experts), 0) {
        if (num_experts < 1) throw input_error("delete: expert count must be >= 1");
        if (deletions < 0) throw input_error("delete: deletion number must be >= 0");
    }

    Prediction step(const std::vector<Prediction>& outputs) {
        if (outputs.size() != seen_.size())
            throw contract_error("delete: expert count changed mid-run");
        long long votes[2] = {0, 0};
        long long survivors = 0;
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            if (!is_label(outputs[i])) continue;
            if (seen_[i] >= s_) {
                ++survivors;
                ++votes[label_value(outputs[i])];
            }
            ++seen_[i];
        }
        if (survivors == 0 || static_cast<double>(survivors) < min_predictions_)
            return Prediction::Abstain;
        return votes[1] >= votes[0] ? Prediction::One : Prediction::Zero;
    }

private:
    long long s_;
    double min_predictions_;
    std::vector<long long> seen_;
};

// Weighted-majority aggregation over Delete_{s,C} for s = 0..s_max: abstain as
// soon as any deletion level abstains, otherwise vote with halving weights.
// Weights are kept as exponents (w_s = 2^-e_s) so arbitrarily long runs cannot
// underflow.
class AggregateCombiner {
public:
    AggregateCombiner(int num_experts, double min_predictions, long long s_max)
        : exponents_(static_cast<std::size_t>(s_max + 1), 0) {
        if (s_max < 0) throw input_error("aggregate: s_max must be >= 0");
        if (s_max + 1 > (1LL << 17))
            throw input_error("aggregate: s_max too large for the fixed-point vote");
        subs_.reserve(static_cast<std::size_t>(s_max + 1));
        for (long long s = 0; s <= s_max; ++s) {
            subs_.emplace_back(num_experts, min_predictions, s);
        }
    }

    Prediction step_predict(const std::vector<Prediction>& outputs) {
        last_outputs_.clear();
        last_outputs_.reserve(subs_.size());
        bool any_abstain = false;
        for (auto& sub : subs_) {
            const Prediction p = sub.step(outputs);
            last_outputs_.push_back(p);
            if (!is_label(p)) any_abstain = true;
        }
        if (any_abstain) {
            predicted_ = false;
            return Prediction::Abstain;
        }
        predicted_ = true;
        // fixed-point weighted vote; exponents are halving counts. Each level
        // contributes at most 2^46 after the shift, so up to 2^17 levels sum
        // without overflowing 64 bits; weights below 2^-46 of the maximum
        // round to zero.
        long long emin = exponents_[0];
        for (long long e : exponents_) emin = std::min(emin, e);
        unsigned long long mass[2] = {0, 0};
        for (std::size_t s = 0; s < subs_.size(); ++s) {
            const long long shift = exponents_[s] - emin;
            if (shift <= 46) mass[label_value(last_outputs_[s])] += (1ULL << (46 - shift));
        }
        return mass[1] >= mass[0] ? Prediction::One : Prediction::Zero;
    }

    // Must be called once per step; the label is required on predicted rounds.
    void step_feedback(std::optional<int> label) {
        if (!predicted_) return;
        if (!label)
            throw contract_error("aggregate: label required on a predicted round");
        for (std::size_t s = 0; s < subs_.size(); ++s) {
            if (label_value(last_outputs_[s]) != *label) ++exponents_[s];
        }
    }

    bool predicted_last() const { return predicted_; }
    const std::vector<long long>& weight_exponents() const { return exponents_; }

    // Number of mistakes a fixed deletion level s has made on rounds where the
    // aggregate predicted; bookkeeping for bound checks lives outside.

private:
    std::vector<DeleteCombiner> subs_;
    std::vector<long long> exponents_; // w_s = 2^-exponents_[s]
    std::vector<Prediction> last_outputs_;
    bool predicted_ = false;
};

// The full layered booster. Layer j (1-based) runs an Aggregate with
// prediction threshold 2^-j L over the subsequence of rounds routed to it; a
// per-layer, per-expert budget of s_max deletions is spent before a round
// falls through to the next layer. Experts with >= M observed mistakes are
// muted up front. Labels are consumed whenever the caller supplies them, so
// the censored variant is this same machine fed labels only on its own
// prediction rounds.
class BoostingCombiner {
public:
    BoostingCombiner(int num_experts, long long s_max, long long mistake_tolerance)
        : L_(num_experts), s_max_(s_max), tolerance_(mistake_tolerance),
          mistakes_(static_cast<std::size_t>(num_experts), 0) {
        if (num_experts < 1) throw input_error("boosting: expert count must be >= 1");
        if (s_max < 0) throw input_error("boosting: s_max must be >= 0");
        if (mistake_tolerance < 0) throw input_error("boosting: tolerance must be >= 0");
        num_layers_ = std::max(1, ceil_log2(static_cast<std::uint64_t>(L_)));
        layers_.reserve(num_layers_);
        budgets_.assign(static_cast<std::size_t>(num_layers_) * L_, s_max_);
        for (int j = 1; j <= num_layers_; ++j) {
            layers_.emplace_back(L_, std::ldexp(static_cast<double>(L_), -j), s_max_);
        }
        rounds_fed_.assign(num_layers_, 0);
    }

    int num_layers() const { return num_layers_; }
    const std::vector<long long>& expert_mistakes() const { return mistakes_; }
    long long rounds_fed(int layer) const { return rounds_fed_.at(layer - 1); }

    Prediction step_predict(const std::vector<Prediction>& outputs) {
        if (static_cast<int>(outputs.size()) != L_)
            throw contract_error("boosting: expert count changed mid-run");
        scratch_ = outputs;
        // mute experts that already exhausted the mistake tolerance
        for (int i = 0; i < L_; ++i) {
            if (mistakes_[i] >= tolerance_) scratch_[i] = Prediction::Abstain;
        }
        predicted_layer_ = 0;
        last_prediction_ = Prediction::Abstain;
        int prev_j = 0;
        long long n = count_predictions(scratch_);
        while (n > 0) {
            const int j = layer_for(n);
            if (j <= prev_j) throw state_error("boosting: layer index failed to increase");
            prev_j = j;
            ++rounds_fed_[j - 1];
            const Prediction yj = layers_[j - 1].step_predict(scratch_);
            // spend this layer's deletion budget on the surviving predictions
            for (int i = 0; i < L_; ++i) {
                long long& budget = budgets_[(j - 1) * L_ + i];
                if (is_label(scratch_[i]) && budget > 0) {
                    scratch_[i] = Prediction::Abstain;
                    --budget;
                }
            }
            if (is_label(yj)) {
                predicted_layer_ = j;
                last_prediction_ = yj;
                break;
            }
            layers_[j - 1].step_feedback(std::nullopt);
            n = count_predictions(scratch_);
        }
        awaiting_feedback_ = true;
        return last_prediction_;
    }

    // `label` must be present whenever this step predicted; in the full-
    // feedback protocol it is present on every round.
    void step_feedback(const std::vector<Prediction>& outputs, std::optional<int> label) {
        if (!awaiting_feedback_) throw contract_error("boosting: feedback without a predict call");
        awaiting_feedback_ = false;
        if (predicted_layer_ > 0) {
            if (!label) throw contract_error("boosting: label required on a predicted round");
            layers_[predicted_layer_ - 1].step_feedback(label);
        }
        if (label) {
            for (int i = 0; i < L_; ++i) {
                if (is_label(outputs[i]) && label_value(outputs[i]) != *label) ++mistakes_[i];
            }
        }
    }

    Prediction last_prediction() const { return last_prediction_; }

private:
    static long long count_predictions(const std::vector<Prediction>& v) {
        long long n = 0;
        for (Prediction p : v) n += is_label(p);
        return n;
    }

    // Smallest j with n > 2^-j L, clamped into [1, num_layers]. The clamp
    // folds the n = 1, power-of-two-L case into the last layer, whose
    // threshold is <= 1, so the stuck configuration cannot arise.
    int layer_for(long long n) const {
        int j = 1;
        while (j < num_layers_ &&
               static_cast<double>(n) <= std::ldexp(static_cast<double>(L_), -j)) {
            ++j;
        }
        return j;
    }

    int L_;
    long long s_max_;
    long long tolerance_;
    int num_layers_ = 1;
    std::vector<AggregateCombiner> layers_;
    std::vector<long long> budgets_; // (layer-1)*L + expert -> remaining deletions
    std::vector<long long> mistakes_;
    std::vector<long long> rounds_fed_;
    std::vector<Prediction> scratch_;
    int predicted_layer_ = 0;
    Prediction last_prediction_ = Prediction::Abstain;
    bool awaiting_feedback_ = false;
};

// Structured synthetic expert streams for bound checks: at most
// `max_predictions_per_round` non-abstentions per round and at most
// `max_mistakes` lifetime mistakes per expert. Expert 0 never errs, so the
// "best expert with fewer than M mistakes" in the combining bound exists
// whenever M >= 1.
struct StreamConfig {
    int num_experts = 4;
    int horizon = 100;
    int max_predictions_per_round = 4; // C
    int max_mistakes = 1;              // M
    double abstain_rate = 0.3;
    double mistake_rate = 0.3;
    std::uint64_t seed = 0;
};

struct SyntheticStream {
    std::vector<RecommendationFrame> frames;
    std::vector<long long> expert_mistakes;
    std::vector<long long> expert_abstentions;
};

inline SyntheticStream make_structured_stream(const StreamConfig& cfg) {
    if (cfg.num_experts < 1 || cfg.horizon < 1)
        throw input_error("stream: experts and horizon must be >= 1");
    if (cfg.max_predictions_per_round > cfg.num_experts)
        throw input_error("stream: per-round prediction cap exceeds the expert count");
    if (cfg.max_mistakes > cfg.horizon)
        throw input_error("stream: mistake cap exceeds the horizon");
    Rng rng(cfg.seed);
    SyntheticStream out;
    out.frames.resize(cfg.horizon);
    out.expert_mistakes.assign(cfg.num_experts, 0);
    out.expert_abstentions.assign(cfg.num_experts, 0);

    std::vector<long long> budget(cfg.num_experts);
    for (int i = 0; i < cfg.num_experts; ++i) {
        budget[i] = i == 0 ? 0 : static_cast<long long>(rng.next_index(cfg.max_mistakes + 1));
    }
    std::vector<int> order(cfg.num_experts);
    for (int t = 1; t <= cfg.horizon; ++t) {
        RecommendationFrame& frame = out.frames[t - 1];
        frame.t = t;
        frame.outputs.assign(cfg.num_experts, Prediction::Abstain);
        const int y = static_cast<int>(rng.next_index(2));
        frame.label = y;
        // pick the predicting experts for this round
        std::iota(order.begin(), order.end(), 0);
        for (int i = 0; i < cfg.max_predictions_per_round; ++i) {
            const std::size_t j = i + rng.next_index(cfg.num_experts - i);
            std::swap(order[i], order[j]);
        }
        for (int slot = 0; slot < cfg.max_predictions_per_round; ++slot) {
            if (rng.next_bool(cfg.abstain_rate)) continue;
            const int i = order[slot];
            int out_label = y;
            if (out.expert_mistakes[i] < budget[i] && rng.next_bool(cfg.mistake_rate)) {
                out_label = 1 - y;
                ++out.expert_mistakes[i];
            }
            frame.outputs[i] = to_prediction(out_label);
        }
        for (int i = 0; i < cfg.num_experts; ++i) {
            if (!is_label(frame.outputs[i])) ++out.expert_abstentions[i];
        }
    }
    return out;
}

} // namespace abstain
