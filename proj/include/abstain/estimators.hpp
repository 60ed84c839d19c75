#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "abstain/distribution.hpp"
#include "abstain/errors.hpp"
#include "abstain/hypothesis.hpp"
#include "abstain/point.hpp"
#include "abstain/rng.hpp"

namespace abstain {

// One block S_i of N samples feeding a U-statistic.
struct SampleBlock {
    std::vector<Point> points;

    int size() const { return static_cast<int>(points.size()); }
};

// The collection S = {S_1,...,S_m}: equal-size disjoint slices of one source
// sequence. Leftover samples that do not fill a block are discarded.
struct PartitionedSamples {
    std::vector<SampleBlock> blocks;

    static PartitionedSamples split(std::span<const Point> source, int m) {
        if (m < 1) throw input_error("partition: block count must be >= 1");
        const std::size_t block_size = source.size() / static_cast<std::size_t>(m);
        if (block_size == 0) throw input_error("partition: not enough samples for the block count");
        PartitionedSamples out;
        out.blocks.resize(m);
        std::size_t idx = 0;
        for (int i = 0; i < m; ++i) {
            out.blocks[i].points.assign(source.begin() + idx, source.begin() + idx + block_size);
            idx += block_size;
        }
        return out;
    }

    int block_size() const { return blocks.empty() ? 0 : blocks.front().size(); }
    int count() const { return static_cast<int>(blocks.size()); }
};

enum class RhoMethod { exact, u_stat, median };

struct RhoEstimate {
    double value = 0.0;
    int k = 0;
    RhoMethod method = RhoMethod::u_stat;
    std::uint64_t budget_used = 0;
};

namespace detail {

// C(n,k) clamped at `cap` to avoid overflow; returns cap when the true value
// is at least cap.
inline std::uint64_t binomial_clamped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i; // exact: prefix products are binomials
        if (result > cap) return cap;
    }
    return static_cast<std::uint64_t>(result);
}

// Iterate all k-combinations of {0,...,n-1} in lexicographic order.
template <class Fn>
void for_each_combination(int n, int k, Fn&& fn) {
    if (k == 0) {
        fn(std::span<const int>{});
        return;
    }
    if (k > n) return;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        fn(std::span<const int>(idx.data(), idx.size()));
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

// Collapses a tuple of points to its distinct set and asks the class whether
// that set is shattered (all labelings realizable).
inline bool distinct_set_shattered(const ReducedClass& cls, std::span<const Point* const> tuple) {
    std::array<const Point*, 30> distinct;
    std::size_t m = 0;
    for (const Point* p : tuple) {
        bool dup = false;
        for (std::size_t j = 0; j < m; ++j) {
            if (*p == *distinct[j]) {
                dup = true;
                break;
            }
        }
        if (!dup) distinct[m++] = p;
    }
    return cls.shatters_ptrs(std::span<const Point* const>(distinct.data(), m));
}

} // namespace detail

// Exact k-shattering probability for a finite-support distribution: the sum
// over ordered k-tuples of support points (with repetition) of the tuple
// weight times the indicator that the tuple's distinct set is shattered.
// rho_0 = 1 by convention.
inline double exact_rho(const ReducedClass& cls, const FiniteDistribution& dist, int k,
                        std::uint64_t budget = 20'000'000) {
    if (k < 0) throw input_error("exact_rho: order must be >= 0");
    if (k == 0) return 1.0;
    const std::size_t n = dist.support.size();
    double tuples = 1.0;
    for (int i = 0; i < k; ++i) {
        tuples *= static_cast<double>(n);
        if (tuples > static_cast<double>(budget))
            throw input_error("exact_rho: |support|^k exceeds the enumeration budget; "
                              "use the Monte Carlo estimators instead");
    }
    for (const auto& p : dist.support) {
        if (!cls.spec().admits(p)) throw input_error("exact_rho: support point outside the domain");
    }

    // memoize shattering per distinct index set
    std::map<std::vector<int>, bool> memo;
    std::vector<int> tuple(k, 0);
    std::vector<Point> pts;
    double total = 0.0;
    while (true) {
        double w = 1.0;
        for (int i = 0; i < k; ++i) w *= dist.weights[tuple[i]];
        if (w > 0.0) {
            std::vector<int> key(tuple);
            std::sort(key.begin(), key.end());
            key.erase(std::unique(key.begin(), key.end()), key.end());
            auto it = memo.find(key);
            if (it == memo.end()) {
                pts.clear();
                for (int i : key) pts.push_back(dist.support[i]);
                it = memo.emplace(std::move(key), cls.shatters_unchecked(pts)).first;
            }
            if (it->second) total += w;
        }
        // odometer
        int pos = k - 1;
        while (pos >= 0 && tuple[pos] == static_cast<int>(n) - 1) {
            tuple[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++tuple[pos];
    }
    return total;
}

// The U-statistic estimator: the average of the shattering indicator over
// k-subsets of the block. Exact enumeration when C(N,k) fits in the budget,
// otherwise a seeded Monte Carlo average over uniformly sampled subsets.
inline RhoEstimate u_stat_rho(const ReducedClass& cls, const SampleBlock& block, int k,
                              std::uint64_t budget = 200'000, std::uint64_t seed = 0) {
    const int n = block.size();
    if (k < 0) throw input_error("u_stat_rho: order must be >= 0");
    if (k > n) throw input_error("u_stat_rho: order exceeds the block size");
    RhoEstimate out;
    out.k = k;
    out.method = RhoMethod::u_stat;
    if (k == 0) {
        out.value = 1.0;
        return out;
    }
    const std::uint64_t combos = detail::binomial_clamped(n, k, budget + 1);
    std::vector<const Point*> tuple(k);
    if (combos <= budget) {
        std::uint64_t hits = 0, total = 0;
        detail::for_each_combination(n, k, [&](std::span<const int> idx) {
            for (int i = 0; i < k; ++i) tuple[i] = &block.points[idx[i]];
            if (detail::distinct_set_shattered(cls, tuple)) ++hits;
            ++total;
        });
        out.value = static_cast<double>(hits) / static_cast<double>(total);
        out.budget_used = total;
        return out;
    }
    Rng rng(seed);
    std::vector<int> pool(n);
    std::uint64_t hits = 0;
    for (std::uint64_t trial = 0; trial < budget; ++trial) {
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < k; ++i) {
            const std::size_t j = i + rng.next_index(n - i);
            std::swap(pool[i], pool[j]);
            tuple[i] = &block.points[pool[i]];
        }
        if (detail::distinct_set_shattered(cls, tuple)) ++hits;
    }
    out.value = static_cast<double>(hits) / static_cast<double>(budget);
    out.budget_used = budget;
    return out;
}

// Median of the per-block U-statistics. Lower median for even block counts.
inline RhoEstimate median_rho(const ReducedClass& cls, const PartitionedSamples& samples, int k,
                              std::uint64_t budget = 200'000, std::uint64_t seed = 0) {
    if (samples.blocks.empty()) throw input_error("median_rho: at least one block required");
    std::vector<double> values;
    values.reserve(samples.blocks.size());
    RhoEstimate out;
    out.k = k;
    out.method = RhoMethod::median;
    for (std::size_t i = 0; i < samples.blocks.size(); ++i) {
        RhoEstimate e = u_stat_rho(cls, samples.blocks[i], k, budget, Rng::derive(seed, {i}));
        values.push_back(e.value);
        out.budget_used += e.budget_used;
    }
    std::sort(values.begin(), values.end());
    out.value = values[(values.size() - 1) / 2];
    return out;
}

inline double lower_median(std::vector<double> values) {
    if (values.empty()) throw input_error("median: empty input");
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

// Sample standard deviation of the U-statistic over freshly drawn blocks of
// size N. Each trial derives its own seed, so evaluation order is irrelevant.
inline double empirical_sigma(const ReducedClass& cls, const FiniteDistribution& dist, int k, int N,
                              int trials, std::uint64_t seed = 0,
                              std::uint64_t budget = 200'000) {
    if (trials < 2) throw input_error("empirical_sigma: at least two trials required");
    if (k > N) throw input_error("empirical_sigma: order exceeds the block size");
    std::vector<double> values(trials);
    for (int t = 0; t < trials; ++t) {
        Rng rng(Rng::derive(seed, {static_cast<std::uint64_t>(t), 0}));
        SampleBlock block;
        block.points.reserve(N);
        for (int i = 0; i < N; ++i) block.points.push_back(dist.sample(rng));
        values[t] =
            u_stat_rho(cls, block, k, budget, Rng::derive(seed, {static_cast<std::uint64_t>(t), 1}))
                .value;
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / trials;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (trials - 1));
}

// Incremental U-statistic evaluator for one block under a shrinking class
// chain. Reductions never re-shatter a subset, so only the subsets that were
// shattered at the previous version need re-checking. Query classes must be
// reductions of the tracked class.
class BlockShatterCache {
public:
    BlockShatterCache() = default;

    explicit BlockShatterCache(SampleBlock block) : block_(std::move(block)) {}

    const SampleBlock& block() const { return block_; }

    // rho-hat of `cls` at order k; advances the cached alive set to cls.
    double rho(const ReducedClass& cls, int k) {
        if (k == 0) return 1.0;
        if (k > block_.size()) throw input_error("shatter cache: order exceeds block size");
        Level& level = ensure_level(cls, k);
        return static_cast<double>(level.alive.size()) / static_cast<double>(level.total);
    }

    // rho-hat of (cls + extra) at order k without mutating the cache beyond
    // refreshing it to cls's version.
    double rho_with_extra(const ReducedClass& cls, const LabeledExample& extra, int k) {
        if (k == 0) return 1.0;
        Level& level = ensure_level(cls, k);
        std::uint64_t hits = 0;
        for (const auto& subset : level.alive) {
            if (subset_shattered_with(cls, subset, k, &extra)) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(level.total);
    }

private:
    struct Level {
        bool initialized = false;
        std::uint64_t version = 0;
        std::uint64_t total = 0;
        std::vector<std::array<std::uint8_t, 12>> alive; // index tuples, first k entries used
    };

    Level& ensure_level(const ReducedClass& cls, int k) {
        if (k < 1 || k > 12) throw input_error("shatter cache: order must be in [1,12]");
        if (levels_.size() < static_cast<std::size_t>(k)) levels_.resize(k);
        Level& level = levels_[k - 1];
        if (!level.initialized) {
            level.total = detail::binomial_clamped(block_.size(), k, ~0ULL >> 1);
            detail::for_each_combination(block_.size(), k, [&](std::span<const int> idx) {
                std::array<std::uint8_t, 12> subset{};
                for (int i = 0; i < k; ++i) subset[i] = static_cast<std::uint8_t>(idx[i]);
                if (subset_shattered_with(cls, subset, k, nullptr)) level.alive.push_back(subset);
            });
            level.initialized = true;
            level.version = cls.version();
            return level;
        }
        if (cls.version() < level.version)
            throw contract_error("shatter cache: class chain must be non-increasing");
        if (cls.version() > level.version) {
            std::vector<std::array<std::uint8_t, 12>> still;
            still.reserve(level.alive.size());
            for (const auto& subset : level.alive) {
                if (subset_shattered_with(cls, subset, k, nullptr)) still.push_back(subset);
            }
            level.alive = std::move(still);
            level.version = cls.version();
        }
        return level;
    }

    bool subset_shattered_with(const ReducedClass& cls, const std::array<std::uint8_t, 12>& subset,
                               int k, const LabeledExample* extra) const {
        // distinct points of the subset
        std::array<detail::LabeledRef, 13> refs{};
        int m = 0;
        for (int i = 0; i < k; ++i) {
            const Point& p = block_.points[subset[i]];
            bool dup = false;
            for (int j = 0; j < m; ++j) {
                if (*refs[j].point == p) {
                    dup = true;
                    break;
                }
            }
            if (!dup) refs[m++].point = &p;
        }
        const int total_refs = m + (extra ? 1 : 0);
        if (extra) refs[m] = {&extra->point, extra->label};
        const std::uint32_t total = 1u << m;
        const std::span<const detail::LabeledRef> query(refs.data(), total_refs);
        for (std::uint32_t mask = 0; mask < total; ++mask) {
            for (int i = 0; i < m; ++i) refs[i].label = static_cast<int>((mask >> i) & 1u);
            if (!cls.realizable_refs(query)) return false;
        }
        return true;
    }

    SampleBlock block_;
    std::vector<Level> levels_;
};

} // namespace abstain
