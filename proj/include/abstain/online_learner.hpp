#pragma once

#include <optional>

#include "abstain/point.hpp"

namespace abstain {

// Round-by-round learner contract used by the protocol runner. predict() is
// called once per round with increasing t (1-based), feedback() once after it;
// feedback carries the label only when the protocol reveals it.
class OnlineLearner {
public:
    virtual ~OnlineLearner() = default;
    virtual Prediction predict(int t, const Point& x) = 0;
    virtual void feedback(int t, const Point& x, std::optional<int> label) = 0;
};

class AlwaysAbstainLearner final : public OnlineLearner {
public:
    Prediction predict(int, const Point&) override { return Prediction::Abstain; }
    void feedback(int, const Point&, std::optional<int>) override {}
};

class ConstantLearner final : public OnlineLearner {
public:
    explicit ConstantLearner(int label) : out_(to_prediction(label)) {}
    Prediction predict(int, const Point&) override { return out_; }
    void feedback(int, const Point&, std::optional<int>) override {}

private:
    Prediction out_;
};

// Predicts the majority of the labels observed so far; ties and the first
// round go to 0. Deterministic, never abstains.
class MajorityLearner final : public OnlineLearner {
public:
    Prediction predict(int, const Point&) override {
        return ones_ > zeros_ ? Prediction::One : Prediction::Zero;
    }
    void feedback(int, const Point&, std::optional<int> label) override {
        if (!label) return;
        (*label == 1 ? ones_ : zeros_) += 1;
    }

private:
    long long zeros_ = 0;
    long long ones_ = 0;
};

} // namespace abstain
