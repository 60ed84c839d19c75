#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "abstain/class_spec.hpp"
#include "abstain/errors.hpp"
#include "abstain/hypothesis.hpp"
#include "abstain/point.hpp"

namespace abstain {

// Result of brute-force reduction counting: the number of distinct
// projections of F cap A onto the test points over all datasets A with at
// most l points from the candidate pool.
struct ReductionCountReport {
    ClassSpec spec = ClassSpec::thresholds();
    int num_test_points = 0;
    int constraint_budget = 0; // l
    std::size_t pool_size = 0;
    std::uint64_t distinct_count = 0;
    std::uint64_t datasets_enumerated = 0;
    double bound_value = 0.0;
    std::string bound_kind;
    bool bound_satisfied = false;
    double measured_exponent = 0.0; // log(count) / log(n)
};

namespace detail {

// Canonical fingerprint of a projection: the bitset of realizable labelings
// of the test points under the dataset's constraints.
inline std::vector<std::uint64_t> projection_bits(const ReducedClass& reduced,
                                                  std::span<const Point> test_points) {
    const std::size_t n = test_points.size();
    const std::uint64_t labelings = 1ULL << n;
    std::vector<std::uint64_t> bits((labelings + 63) / 64, 0);
    std::vector<LabeledRef> refs(n);
    for (std::size_t i = 0; i < n; ++i) refs[i].point = &test_points[i];
    for (std::uint64_t mask = 0; mask < labelings; ++mask) {
        for (std::size_t i = 0; i < n; ++i) refs[i].label = static_cast<int>((mask >> i) & 1u);
        if (reduced.realizable_refs(refs)) bits[mask / 64] |= 1ULL << (mask % 64);
    }
    return bits;
}

} // namespace detail

// The explicit bound expression per hypothesis class. Rectangles and subsets
// carry closed-form expressions; thresholds and halfspaces are checked
// against n^D for a caller-supplied exponent (their propositions hide
// unspecified constants).
inline std::pair<double, std::string> reduction_bound(const ClassSpec& spec, int n, int l,
                                                      std::optional<double> user_dimension) {
    if (spec.is<Rectangles>()) {
        const int p = spec.as<Rectangles>().dim;
        return {1.0 + std::pow(n + 1.0, 4.0 * p), "1+(n+1)^(4p)"};
    }
    if (spec.is<SubsetsOfSize>()) {
        const int d = spec.as<SubsetsOfSize>().max_size;
        return {1.0 + std::exp(1.0) * d * std::pow(n, l), "1+e*d*n^l"};
    }
    if (!user_dimension)
        throw input_error("count_reductions: this class needs a user-supplied exponent D");
    return {std::pow(n, *user_dimension), "n^D"};
}

inline ReductionCountReport count_reductions(const ClassSpec& spec,
                                             std::span<const Point> test_points, int l,
                                             std::span<const Point> pool,
                                             std::optional<double> user_dimension = std::nullopt,
                                             std::uint64_t budget = 50'000'000) {
    const int n = static_cast<int>(test_points.size());
    if (n < 1 || n > 16) throw input_error("count_reductions: test point count must be in [1,16]");
    if (l < 0) throw input_error("count_reductions: constraint budget must be >= 0");
    for (int i = 0; i < n; ++i) {
        if (!spec.admits(test_points[i]))
            throw input_error("count_reductions: test point outside the domain");
        for (int j = i + 1; j < n; ++j) {
            if (test_points[i] == test_points[j])
                throw input_error("count_reductions: test points must be distinct");
        }
    }
    for (const auto& p : pool) {
        if (!spec.admits(p)) throw input_error("count_reductions: pool point outside the domain");
    }
    // enumeration size: datasets are subsets of pool x {0,1} with <= l elements
    const std::size_t items = pool.size() * 2;
    double datasets = 0.0;
    {
        double term = 1.0;
        datasets = 1.0;
        for (int r = 1; r <= l; ++r) {
            term *= static_cast<double>(items - (r - 1)) / r;
            datasets += term;
        }
    }
    const double per_dataset = std::ldexp(1.0, n);
    if (datasets * per_dataset > static_cast<double>(budget))
        throw input_error("count_reductions: enumeration exceeds the budget");

    std::set<std::vector<std::uint64_t>> projections;
    std::vector<LabeledExample> dataset;
    std::uint64_t enumerated = 0;

    // all subsets of pool x {0,1} of size <= l, by recursion over item index
    const auto item_example = [&](std::size_t item) {
        return LabeledExample(pool[item / 2], static_cast<int>(item % 2));
    };
    auto recurse = [&](auto&& self, std::size_t next_item) -> void {
        ++enumerated;
        projections.insert(
            detail::projection_bits(ReducedClass(spec, dataset), test_points));
        if (static_cast<int>(dataset.size()) == l) return;
        for (std::size_t item = next_item; item < items; ++item) {
            dataset.push_back(item_example(item));
            self(self, item + 1);
            dataset.pop_back();
        }
    };
    recurse(recurse, 0);

    ReductionCountReport report;
    report.spec = spec;
    report.num_test_points = n;
    report.constraint_budget = l;
    report.pool_size = pool.size();
    report.distinct_count = projections.size();
    report.datasets_enumerated = enumerated;
    auto [bound, kind] = reduction_bound(spec, n, l, user_dimension);
    report.bound_value = bound;
    report.bound_kind = kind;
    report.bound_satisfied = static_cast<double>(report.distinct_count) <= bound;
    report.measured_exponent =
        n > 1 ? std::log(static_cast<double>(report.distinct_count)) / std::log(n) : 0.0;
    return report;
}

} // namespace abstain
