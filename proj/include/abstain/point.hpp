#pragma once

#include <cstdint>
#include <compare>
#include <variant>
#include <vector>

#include "abstain/errors.hpp"

namespace abstain {

// Node of a rooted N-ary tree, encoded as the child-index path from the root.
// The root is the empty path; entries are 1-based child indices.
struct TreeNode {
    std::vector<std::int32_t> path;

    bool operator==(const TreeNode&) const = default;
    auto operator<=>(const TreeNode&) const = default;

    int depth() const { return static_cast<int>(path.size()); }

    // true iff this node is an ancestor of `other` or equal to it
    // (i.e. this path is a prefix of the other path).
    bool is_prefix_of(const TreeNode& other) const {
        if (path.size() > other.path.size()) return false;
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (path[i] != other.path[i]) return false;
        }
        return true;
    }

    TreeNode child(std::int32_t index) const {
        TreeNode c = *this;
        c.path.push_back(index);
        return c;
    }
};

// An instance x in the domain. Scalar for threshold/interval classes, real
// vector for rectangles and halfspaces, tree node for the path classes used
// by the lower-bound construction. Finite ground sets reuse the scalar or
// vector encodings of their elements.
class Point {
public:
    using Vec = std::vector<double>;

    Point() : value_(0.0) {}

    static Point scalar(double v) { return Point(Value(v)); }
    static Point vector(Vec v) { return Point(Value(std::move(v))); }
    static Point vector2(double x, double y) { return vector(Vec{x, y}); }
    static Point node(TreeNode n) { return Point(Value(std::move(n))); }

    bool is_scalar() const { return std::holds_alternative<double>(value_); }
    bool is_vector() const { return std::holds_alternative<Vec>(value_); }
    bool is_node() const { return std::holds_alternative<TreeNode>(value_); }

    double scalar() const {
        if (!is_scalar()) throw input_error("point: scalar value requested from non-scalar point");
        return std::get<double>(value_);
    }
    const Vec& vec() const {
        if (!is_vector()) throw input_error("point: vector value requested from non-vector point");
        return std::get<Vec>(value_);
    }
    const TreeNode& node() const {
        if (!is_node()) throw input_error("point: tree node requested from non-node point");
        return std::get<TreeNode>(value_);
    }

    bool operator==(const Point&) const = default;
    auto operator<=>(const Point&) const = default;

private:
    using Value = std::variant<double, Vec, TreeNode>;
    explicit Point(Value v) : value_(std::move(v)) {}
    Value value_;
};

struct LabeledExample {
    Point point;
    int label = 0; // 0 or 1; abstention is never stored in a dataset

    LabeledExample() = default;
    LabeledExample(Point p, int y) : point(std::move(p)), label(y) {
        if (y != 0 && y != 1) throw input_error("labeled example: label must be 0 or 1");
    }

    bool operator==(const LabeledExample&) const = default;
};

// Learner output per round: a label or the abstention symbol.
enum class Prediction : std::int8_t { Zero = 0, One = 1, Abstain = 2 };

inline bool is_label(Prediction p) { return p != Prediction::Abstain; }

inline int label_value(Prediction p) {
    if (!is_label(p)) throw contract_error("prediction: abstention has no label value");
    return static_cast<int>(p);
}

inline Prediction to_prediction(int label) {
    if (label != 0 && label != 1) throw input_error("prediction: label must be 0 or 1");
    return static_cast<Prediction>(label);
}

} // namespace abstain
