#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace abstain::geo {

// Exact planar predicates over IEEE doubles via floating-point expansions
// (the Shewchuk construction, non-adaptive variant). The halfspace oracle
// branches on these signs, so no tolerance is acceptable.

namespace detail {

inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double bv = s - a;
    e = (a - (s - bv)) + (b - bv);
}

inline void two_prod(double a, double b, double& p, double& e) {
    p = a * b;
    e = std::fma(a, b, -p);
}

// An expansion is a sum of doubles, stored by increasing magnitude, whose
// components do not overlap in binary. The sign of the expansion equals the
// sign of its largest (last nonzero) component.
struct Expansion {
    std::array<double, 24> c{};
    std::size_t n = 0;

    void grow(double b) {
        // grow-expansion with zero elimination
        std::array<double, 24> h{};
        std::size_t m = 0;
        double q = b;
        for (std::size_t i = 0; i < n; ++i) {
            double s, e;
            two_sum(q, c[i], s, e);
            if (e != 0.0) h[m++] = e;
            q = s;
        }
        if (q != 0.0 || m == 0) h[m++] = q;
        c = h;
        n = m;
    }

    int sign() const {
        if (n == 0) return 0;
        const double top = c[n - 1];
        return top > 0.0 ? 1 : (top < 0.0 ? -1 : 0);
    }
};

} // namespace detail

// Sign of the determinant | bx-ax  by-ay |
//                         | cx-ax  cy-ay |
// i.e. +1 when (a,b,c) turn counter-clockwise, -1 clockwise, 0 collinear.
inline int orient2d(double ax, double ay, double bx, double by, double cx, double cy) {
    using namespace detail;
    // Each coordinate difference is represented exactly as a 2-term expansion.
    double u1, u0, v1, v0, w1, w0, z1, z0;
    two_sum(bx, -ax, u1, u0);
    two_sum(cy, -ay, v1, v0);
    two_sum(by, -ay, w1, w0);
    two_sum(cx, -ax, z1, z0);

    Expansion acc;
    // (u1+u0)(v1+v0) - (w1+w0)(z1+z0), all partial products exact via fma
    const double us[2] = {u0, u1}, vs[2] = {v0, v1}, ws[2] = {w0, w1}, zs[2] = {z0, z1};
    for (double u : us) {
        for (double v : vs) {
            double p, e;
            two_prod(u, v, p, e);
            if (e != 0.0) acc.grow(e);
            if (p != 0.0) acc.grow(p);
        }
    }
    for (double w : ws) {
        for (double z : zs) {
            double p, e;
            two_prod(w, z, p, e);
            if (e != 0.0) acc.grow(-e);
            if (p != 0.0) acc.grow(-p);
        }
    }
    return acc.sign();
}

inline int orient2d(const std::array<double, 2>& a, const std::array<double, 2>& b,
                    const std::array<double, 2>& c) {
    return orient2d(a[0], a[1], b[0], b[1], c[0], c[1]);
}

inline bool on_segment(const std::array<double, 2>& p, const std::array<double, 2>& a,
                       const std::array<double, 2>& b) {
    if (orient2d(a, b, p) != 0) return false;
    const double lox = a[0] < b[0] ? a[0] : b[0], hix = a[0] < b[0] ? b[0] : a[0];
    const double loy = a[1] < b[1] ? a[1] : b[1], hiy = a[1] < b[1] ? b[1] : a[1];
    return lox <= p[0] && p[0] <= hix && loy <= p[1] && p[1] <= hiy;
}

// Closed segment intersection, including collinear overlap and shared endpoints.
inline bool segments_intersect(const std::array<double, 2>& a, const std::array<double, 2>& b,
                               const std::array<double, 2>& c, const std::array<double, 2>& d) {
    const int o1 = orient2d(a, b, c);
    const int o2 = orient2d(a, b, d);
    const int o3 = orient2d(c, d, a);
    const int o4 = orient2d(c, d, b);
    if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) &&
        ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
        return true;
    }
    if (o1 == 0 && on_segment(c, a, b)) return true;
    if (o2 == 0 && on_segment(d, a, b)) return true;
    if (o3 == 0 && on_segment(a, c, d)) return true;
    if (o4 == 0 && on_segment(b, c, d)) return true;
    return false;
}

// Point inside or on the boundary of triangle abc; the triangle may be
// degenerate only if callers handle that case themselves.
inline bool in_triangle(const std::array<double, 2>& p, const std::array<double, 2>& a,
                        const std::array<double, 2>& b, const std::array<double, 2>& c) {
    const int s1 = orient2d(a, b, p);
    const int s2 = orient2d(b, c, p);
    const int s3 = orient2d(c, a, p);
    return (s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0);
}

} // namespace abstain::geo
