#pragma once

#include <cmath>
#include <set>
#include <vector>

#include "abstain/errors.hpp"
#include "abstain/point.hpp"
#include "abstain/rng.hpp"

namespace abstain {

// Finite-support distribution over instances. Finite support is what makes
// the exact shattering-probability oracle possible.
struct FiniteDistribution {
    std::vector<Point> support;
    std::vector<double> weights;

    static constexpr double kWeightTolerance = 1e-12;

    FiniteDistribution() = default;

    FiniteDistribution(std::vector<Point> pts, std::vector<double> w)
        : support(std::move(pts)), weights(std::move(w)) {
        validate();
    }

    static FiniteDistribution uniform(std::vector<Point> pts) {
        const std::size_t n = pts.size();
        if (n == 0) throw input_error("distribution: support must be nonempty");
        return FiniteDistribution(std::move(pts), std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    // n interior grid points (i+0.5)/n on [0,1], uniform weights.
    static FiniteDistribution uniform_scalar_grid(int n) {
        if (n < 1) throw input_error("distribution: grid size must be >= 1");
        std::vector<Point> pts;
        pts.reserve(n);
        for (int i = 0; i < n; ++i) pts.push_back(Point::scalar((i + 0.5) / n));
        return uniform(std::move(pts));
    }

    // n x n interior grid on [0,1]^2, uniform weights.
    static FiniteDistribution uniform_planar_grid(int n) {
        if (n < 1) throw input_error("distribution: grid size must be >= 1");
        std::vector<Point> pts;
        pts.reserve(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                pts.push_back(Point::vector2((i + 0.5) / n, (j + 0.5) / n));
            }
        }
        return uniform(std::move(pts));
    }

    void validate() const {
        if (support.empty()) throw input_error("distribution: support must be nonempty");
        if (support.size() != weights.size())
            throw input_error("distribution: support/weight size mismatch");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw input_error("distribution: weights must be nonnegative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > kWeightTolerance)
            throw input_error("distribution: weights must sum to 1");
        std::set<Point> distinct(support.begin(), support.end());
        if (distinct.size() != support.size())
            throw input_error("distribution: support points must be distinct");
    }

    std::size_t sample_index(Rng& rng) const {
        const double u = rng.next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.size() - 1;
    }

    const Point& sample(Rng& rng) const { return support[sample_index(rng)]; }
};

} // namespace abstain
