#pragma once

#include <array>
#include <limits>
#include <memory>
#include <set>
#include <span>
#include <vector>

#include "abstain/class_spec.hpp"
#include "abstain/errors.hpp"
#include "abstain/exact_geometry.hpp"
#include "abstain/point.hpp"

namespace abstain {

namespace detail {

// Non-owning labeled point; the oracle query currency. Queries run inside
// subset-enumeration loops, so they must not copy Point payloads.
struct LabeledRef {
    const Point* point = nullptr;
    int label = 0;
};

// A consistency oracle compiled from one constraint list. It answers whether
// the class still contains a function matching the constraints plus a small
// extra dataset. Compilation is O(|constraints|^2) worst case; queries touch
// only the extras and a pruned residue of the constraints, which is what
// keeps the subset-enumeration estimators affordable.
class Oracle {
public:
    virtual ~Oracle() = default;
    virtual bool realizable(std::span<const LabeledRef> extras) const = 0;
};

class ThresholdOracle final : public Oracle {
public:
    explicit ThresholdOracle(std::span<const LabeledExample> constraints) {
        for (const auto& e : constraints) {
            const double x = e.point.scalar();
            if (e.label == 1) {
                if (x > lo_) lo_ = x;
            } else if (x < hi_) {
                hi_ = x;
            }
        }
    }

    bool realizable(std::span<const LabeledRef> extras) const override {
        double lo = lo_, hi = hi_;
        for (const auto& e : extras) {
            const double x = e.point->scalar();
            if (e.label == 1) {
                if (x > lo) lo = x;
            } else if (x < hi) {
                hi = x;
            }
        }
        return lo < hi; // threshold parameter lives in [lo, min(hi,1)); lo <= 1 always
    }

private:
    double lo_ = 0.0; // x0 >= lo
    double hi_ = std::numeric_limits<double>::infinity(); // x0 < hi
};

class RectangleOracle final : public Oracle {
public:
    static constexpr int kMaxDim = 16;

    RectangleOracle(int dim, std::span<const LabeledExample> constraints) : dim_(dim) {
        for (const auto& e : constraints) {
            if (e.label == 1) {
                extend_box(e.point.vec());
            } else {
                negatives_.push_back(e.point.vec());
            }
        }
        feasible_ = true;
        if (has_pos_) {
            for (const auto& n : negatives_) {
                if (inside(n.data(), lo_.data(), hi_.data())) {
                    feasible_ = false;
                    break;
                }
            }
            if (feasible_) prune_negatives();
        }
    }

    bool realizable(std::span<const LabeledRef> extras) const override {
        if (!feasible_) return false;
        std::array<double, kMaxDim> lo, hi;
        bool box = has_pos_;
        if (box) {
            std::copy(lo_.begin(), lo_.end(), lo.begin());
            std::copy(hi_.begin(), hi_.end(), hi.begin());
        }
        for (const auto& e : extras) {
            if (e.label != 1) continue;
            const auto& v = e.point->vec();
            if (!box) {
                std::copy(v.begin(), v.end(), lo.begin());
                std::copy(v.begin(), v.end(), hi.begin());
                box = true;
            } else {
                for (int i = 0; i < dim_; ++i) {
                    if (v[i] < lo[i]) lo[i] = v[i];
                    if (v[i] > hi[i]) hi[i] = v[i];
                }
            }
        }
        if (!box) return true; // no positives anywhere: the empty box fits
        for (const auto& e : extras) {
            if (e.label == 0 && inside(e.point->vec().data(), lo.data(), hi.data())) return false;
        }
        const std::vector<std::vector<double>>& negs = has_pos_ ? pruned_ : negatives_;
        for (const auto& n : negs) {
            if (inside(n.data(), lo.data(), hi.data())) return false;
        }
        return true;
    }

private:
    void extend_box(const std::vector<double>& v) {
        if (!has_pos_) {
            lo_.assign(v.begin(), v.end());
            hi_.assign(v.begin(), v.end());
            has_pos_ = true;
            return;
        }
        for (int i = 0; i < dim_; ++i) {
            if (v[i] < lo_[i]) lo_[i] = v[i];
            if (v[i] > hi_[i]) hi_[i] = v[i];
        }
    }

    bool inside(const double* p, const double* lo, const double* hi) const {
        for (int i = 0; i < dim_; ++i) {
            if (p[i] < lo[i] || p[i] > hi[i]) return false;
        }
        return true;
    }

    // Drop negatives whose box-membership is implied by another kept negative.
    // Relative to the base box, a negative only constrains growth in the
    // directions where it lies outside; a point further out in every such
    // direction can never be the first to land inside a grown box.
    void prune_negatives() {
        const std::size_t n = negatives_.size();
        std::vector<bool> drop(n, false);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n && !drop[a]; ++b) {
                if (a == b || drop[b]) continue;
                if (implies(negatives_[a], negatives_[b])) drop[a] = true;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!drop[i]) pruned_.push_back(negatives_[i]);
        }
    }

    // true iff (x in B') implies (y in B') for every box B' containing the base box.
    bool implies(const std::vector<double>& x, const std::vector<double>& y) const {
        for (int i = 0; i < dim_; ++i) {
            if (y[i] < lo_[i]) {
                if (!(x[i] < lo_[i] && x[i] <= y[i])) return false;
            } else if (y[i] > hi_[i]) {
                if (!(x[i] > hi_[i] && x[i] >= y[i])) return false;
            }
        }
        return true;
    }

    int dim_;
    bool has_pos_ = false;
    bool feasible_ = true;
    std::vector<double> lo_, hi_;
    std::vector<std::vector<double>> negatives_;
    std::vector<std::vector<double>> pruned_;
};

class HalfspaceOracle final : public Oracle {
public:
    using P2 = std::array<double, 2>;

    explicit HalfspaceOracle(std::span<const LabeledExample> constraints) {
        for (const auto& e : constraints) {
            const auto& v = e.point.vec();
            (e.label == 1 ? pos_ : neg_).push_back({v[0], v[1]});
        }
        feasible_ = !hulls_intersect(pos_, neg_);
    }

    bool realizable(std::span<const LabeledRef> extras) const override {
        if (!feasible_) return false;
        if (extras.empty()) return true;
        std::vector<P2> pos = pos_, neg = neg_;
        for (const auto& e : extras) {
            const auto& v = e.point->vec();
            (e.label == 1 ? pos : neg).push_back({v[0], v[1]});
        }
        return !hulls_intersect(pos, neg);
    }

    // Positives take the closed side, negatives the open side; a consistent
    // halfplane exists exactly when the two convex hulls are disjoint.
    static bool hulls_intersect(const std::vector<P2>& a, const std::vector<P2>& b) {
        if (a.empty() || b.empty()) return false;
        for (const auto& p : a) {
            if (point_in_hull(p, b)) return true;
        }
        for (const auto& q : b) {
            if (point_in_hull(q, a)) return true;
        }
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t j = i + 1; j < a.size(); ++j) {
                for (std::size_t k = 0; k < b.size(); ++k) {
                    for (std::size_t l = k + 1; l < b.size(); ++l) {
                        if (geo::segments_intersect(a[i], a[j], b[k], b[l])) return true;
                    }
                }
            }
        }
        return false;
    }

    static bool point_in_hull(const P2& x, const std::vector<P2>& s) {
        for (const auto& p : s) {
            if (p == x) return true;
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (std::size_t j = i + 1; j < s.size(); ++j) {
                if (geo::on_segment(x, s[i], s[j])) return true;
            }
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (std::size_t j = i + 1; j < s.size(); ++j) {
                for (std::size_t k = j + 1; k < s.size(); ++k) {
                    if (geo::orient2d(s[i], s[j], s[k]) == 0) continue; // degenerate: pairs cover it
                    if (geo::in_triangle(x, s[i], s[j], s[k])) return true;
                }
            }
        }
        return false;
    }

private:
    bool feasible_ = true;
    std::vector<P2> pos_, neg_;
};

class TreePathOracle final : public Oracle {
public:
    explicit TreePathOracle(std::span<const LabeledExample> constraints) {
        // positives must form a root chain; pmax_ is its deepest node (root if none)
        for (const auto& e : constraints) {
            if (e.label != 1) continue;
            const TreeNode& p = e.point.node();
            if (pmax_.is_prefix_of(p)) {
                pmax_ = p;
            } else if (!p.is_prefix_of(pmax_)) {
                feasible_ = false;
                return;
            }
        }
        for (const auto& e : constraints) {
            if (e.label != 0) continue;
            const TreeNode& n = e.point.node();
            if (n.is_prefix_of(pmax_)) {
                feasible_ = false;
                return;
            }
            // only negatives strictly below pmax can block a deeper target later
            if (pmax_.is_prefix_of(n)) deep_negs_.push_back(n);
        }
    }

    bool realizable(std::span<const LabeledRef> extras) const override {
        if (!feasible_) return false;
        const TreeNode* cur = &pmax_;
        for (const auto& e : extras) {
            if (e.label != 1) continue;
            const TreeNode& p = e.point->node();
            if (cur->is_prefix_of(p)) {
                cur = &p;
            } else if (!p.is_prefix_of(*cur)) {
                return false;
            }
        }
        for (const auto& e : extras) {
            if (e.label == 0 && e.point->node().is_prefix_of(*cur)) return false;
        }
        if (cur->depth() > pmax_.depth()) {
            for (const auto& n : deep_negs_) {
                if (n.is_prefix_of(*cur)) return false;
            }
        }
        return true;
    }

private:
    bool feasible_ = true;
    TreeNode pmax_;
    std::vector<TreeNode> deep_negs_;
};

class SubsetOracle final : public Oracle {
public:
    SubsetOracle(int max_size, std::span<const LabeledExample> constraints) : cap_(max_size) {
        for (const auto& e : constraints) {
            (e.label == 1 ? pos_ : neg_).insert(e.point);
        }
        for (const auto& p : pos_) {
            if (neg_.count(p)) {
                feasible_ = false;
                return;
            }
        }
        if (static_cast<int>(pos_.size()) > cap_) feasible_ = false;
    }

    bool realizable(std::span<const LabeledRef> extras) const override {
        if (!feasible_) return false;
        std::array<const Point*, 16> new_pos{};
        int np = 0;
        for (const auto& e : extras) {
            if (e.label == 1) {
                if (neg_.count(*e.point)) return false;
                if (!pos_.count(*e.point)) {
                    if (np == 16) throw input_error("subsets oracle: too many extras");
                    new_pos[np++] = e.point;
                }
            } else if (pos_.count(*e.point)) {
                return false;
            }
        }
        for (const auto& e : extras) {
            if (e.label != 0) continue;
            for (int i = 0; i < np; ++i) {
                if (*new_pos[i] == *e.point) return false;
            }
        }
        int distinct = 0;
        for (int i = 0; i < np; ++i) {
            bool dup = false;
            for (int j = 0; j < i; ++j) {
                if (*new_pos[i] == *new_pos[j]) {
                    dup = true;
                    break;
                }
            }
            if (!dup) ++distinct;
        }
        return static_cast<int>(pos_.size()) + distinct <= cap_;
    }

private:
    int cap_;
    bool feasible_ = true;
    std::set<Point> pos_, neg_;
};

inline std::shared_ptr<const Oracle> compile_oracle(const ClassSpec& spec,
                                                    std::span<const LabeledExample> constraints) {
    if (spec.is<Thresholds>()) return std::make_shared<ThresholdOracle>(constraints);
    if (spec.is<Rectangles>())
        return std::make_shared<RectangleOracle>(spec.as<Rectangles>().dim, constraints);
    if (spec.is<Halfspaces2D>()) return std::make_shared<HalfspaceOracle>(constraints);
    if (spec.is<TreePaths>()) return std::make_shared<TreePathOracle>(constraints);
    return std::make_shared<SubsetOracle>(spec.as<SubsetsOfSize>().max_size, constraints);
}

} // namespace detail

// The reduction F cap A: the hypothesis class restricted to the functions
// consistent with an ordered multiset of labeled examples. Values are
// immutable; reduce() returns a new object. Query results are invariant under
// permutation of the constraint list.
class ReducedClass {
public:
    static constexpr int kDefaultShatterCap = 12;

    explicit ReducedClass(ClassSpec spec, std::vector<LabeledExample> constraints = {})
        : spec_(std::move(spec)), constraints_(std::move(constraints)) {
        for (const auto& e : constraints_) {
            if (!spec_.admits(e.point))
                throw input_error("reduced class: constraint point outside the domain of " +
                                  spec_.name());
        }
        oracle_ = detail::compile_oracle(spec_, constraints_);
    }

    const ClassSpec& spec() const { return spec_; }
    const std::vector<LabeledExample>& constraints() const { return constraints_; }
    std::uint64_t version() const { return constraints_.size(); }

    ReducedClass reduce(const LabeledExample& e) const {
        std::vector<LabeledExample> next = constraints_;
        next.push_back(e);
        return ReducedClass(spec_, std::move(next));
    }

    bool realizable(std::span<const LabeledExample> dataset) const {
        std::vector<detail::LabeledRef> refs(dataset.size());
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            if (!spec_.admits(dataset[i].point))
                throw input_error("realizable: dataset point outside the domain of " + spec_.name());
            refs[i] = {&dataset[i].point, dataset[i].label};
        }
        return oracle_->realizable(refs);
    }

    // Same decision without domain validation or copies; for pre-validated hot paths.
    bool realizable_refs(std::span<const detail::LabeledRef> dataset) const {
        return oracle_->realizable(dataset);
    }

    bool is_empty() const { return !oracle_->realizable({}); }

    // All 2^|pts| labelings realizable under the constraints.
    bool shatters(std::span<const Point> pts, int cap = kDefaultShatterCap) const {
        const std::size_t m = pts.size();
        if (m > static_cast<std::size_t>(cap))
            throw input_error("shatters: point set exceeds the labeling-enumeration cap");
        for (std::size_t i = 0; i < m; ++i) {
            if (!spec_.admits(pts[i]))
                throw input_error("shatters: point outside the domain of " + spec_.name());
            for (std::size_t j = i + 1; j < m; ++j) {
                if (pts[i] == pts[j]) throw input_error("shatters: points must be distinct");
            }
        }
        return shatters_unchecked(pts);
    }

    bool shatters_unchecked(std::span<const Point> pts) const {
        const std::size_t m = pts.size();
        if (m > 30) throw input_error("shatters: point set too large");
        std::array<const Point*, 30> ptrs;
        for (std::size_t i = 0; i < m; ++i) ptrs[i] = &pts[i];
        return shatters_ptrs(std::span<const Point* const>(ptrs.data(), m));
    }

    bool shatters_ptrs(std::span<const Point* const> pts) const {
        const std::size_t m = pts.size();
        if (m > 30) throw input_error("shatters: point set too large");
        std::array<detail::LabeledRef, 30> refs;
        for (std::size_t i = 0; i < m; ++i) refs[i] = {pts[i], 0};
        const std::uint64_t total = 1ULL << m;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            for (std::size_t i = 0; i < m; ++i) refs[i].label = static_cast<int>((mask >> i) & 1u);
            if (!oracle_->realizable(std::span<const detail::LabeledRef>(refs.data(), m)))
                return false;
        }
        return true;
    }

    // x lies in the disagreement region D(F cap A): both labels remain realizable.
    bool in_disagreement(const Point& x) const {
        if (is_empty()) throw state_error("in_disagreement: hypothesis class is empty");
        if (!spec_.admits(x)) throw input_error("in_disagreement: point outside the domain");
        return in_disagreement_unchecked(x);
    }

    bool in_disagreement_unchecked(const Point& x) const {
        detail::LabeledRef ref{&x, 0};
        if (!oracle_->realizable({&ref, 1})) return false;
        ref.label = 1;
        return oracle_->realizable({&ref, 1});
    }

    int consistent_label(const Point& x) const {
        if (!spec_.admits(x)) throw input_error("consistent_label: point outside the domain");
        detail::LabeledRef ref{&x, 0};
        const bool r0 = oracle_->realizable({&ref, 1});
        ref.label = 1;
        const bool r1 = oracle_->realizable({&ref, 1});
        if (r0 && r1) throw contract_error("consistent_label: point is in the disagreement region");
        if (!r0 && !r1) throw state_error("consistent_label: hypothesis class is empty");
        return r1 ? 1 : 0;
    }

private:
    ClassSpec spec_;
    std::vector<LabeledExample> constraints_;
    std::shared_ptr<const detail::Oracle> oracle_;
};

} // namespace abstain
