#pragma once
// Affine lines in R^d and the rigid-motion invariant line measure.
//
// A line is stored canonically as (unit direction, foot of the perpendicular
// from the origin), with the direction sign fixed so that each geometric line
// has exactly one representation. The invariant measure is normalized so that
// the set of lines hitting a ball of radius r has mass ubv(d-1) * r^(d-1),
// where ubv(s) is the Lebesgue volume of the s-dimensional unit ball. Under
// that normalization, sampling a line through a ball means: direction uniform
// on the sphere, foot offset uniform in the (d-1)-ball of the orthogonal
// hyperplane.

#include <cmath>
#include <stdexcept>
#include <utility>

#include "roadnet/rng.hpp"
#include "roadnet/vec.hpp"

namespace roadnet {

inline constexpr double kUnitTol = 1e-12;      // |direction| - 1
inline constexpr double kAnchorTol = 1e-12;    // anchor . direction, scaled
inline constexpr double kParallelTol = 1e-12;  // 1 - |cos| threshold

struct Line {
    Vector direction;  // unit, canonical sign
    Vector anchor;     // perpendicular foot from the origin
};

struct Ball {
    Vector center;
    double radius = 0.0;

    Ball() = default;
    Ball(Vector c, double r) : center(std::move(c)), radius(r) {
        if (!(r >= 0.0)) throw std::invalid_argument("Ball: negative radius");
    }
};

// ===== canonical form ========================================================

// Canonical representative of the line through `point` along `direction`.
// Sign rule: the first coordinate of the direction with magnitude > 1e-12 is
// positive. A unit vector always has a coordinate of magnitude >= 1/sqrt(d),
// so the rule picks one.
inline Line canonicalize_line(const Vector& point, const Vector& direction) {
    if (!same_dim(point, direction))
        throw std::invalid_argument("canonicalize_line: dimension mismatch");
    const double n = norm(direction);
    if (!(n > 0.0)) throw std::invalid_argument("canonicalize_line: zero direction");

    // an already-unit direction is kept bit-for-bit, so canonical inputs are
    // an exact fixed point of this function
    Vector dir = (std::fabs(n - 1.0) <= 4e-16) ? direction : direction * (1.0 / n);
    for (int i = 0; i < dir.d; ++i) {
        if (std::fabs(dir.c[i]) > 1e-12) {
            if (dir.c[i] < 0.0) dir *= -1.0;
            break;
        }
    }
    Vector anchor = point;
    for (int pass = 0; pass < 8; ++pass) {
        const double r = dot(anchor, dir);
        if (std::fabs(r) <= 1e-15 * (1.0 + norm(anchor))) break;
        anchor -= r * dir;
    }
    return Line{dir, anchor};
}

inline Vector project_point(const Vector& x, const Line& line) {
    if (!same_dim(x, line.direction))
        throw std::invalid_argument("project_point: dimension mismatch");
    return line.anchor + dot(x - line.anchor, line.direction) * line.direction;
}

inline double point_line_distance(const Vector& x, const Line& line) {
    return dist(x, project_point(x, line));
}

// signed abscissa of the projection of x, measured along line.direction
inline double line_param(const Vector& x, const Line& line) {
    return dot(x - line.anchor, line.direction);
}

inline Vector point_at(const Line& line, double param) {
    return line.anchor + param * line.direction;
}

// ===== closest pair ==========================================================

struct ClosestPair {
    Vector a;    // on l1
    Vector b;    // on l2
    double gap = 0.0;
    bool parallel = false;
};

// Nearest points of two lines. Parallel convention (|cos| > 1 - parallel_tol):
// a is the anchor of l1 and b its projection onto l2, gap the separation.
inline ClosestPair closest_pair(const Line& l1, const Line& l2,
                                double parallel_tol = kParallelTol) {
    if (!same_dim(l1.direction, l2.direction))
        throw std::invalid_argument("closest_pair: dimension mismatch");
    const double c = dot(l1.direction, l2.direction);
    if (std::fabs(c) > 1.0 - parallel_tol) {
        const Vector a = l1.anchor;
        const Vector b = project_point(a, l2);
        return ClosestPair{a, b, dist(a, b), true};
    }
    const Vector w = l1.anchor - l2.anchor;
    const double wd1 = dot(w, l1.direction);
    const double wd2 = dot(w, l2.direction);
    const double den = 1.0 - c * c;
    const double s = (c * wd2 - wd1) / den;
    const double t = (wd2 - c * wd1) / den;
    const Vector a = point_at(l1, s);
    const Vector b = point_at(l2, t);
    return ClosestPair{a, b, dist(a, b), false};
}

// ===== invariant measure =====================================================

// Lebesgue volume of the unit ball in dimension s: pi^(s/2) / Gamma(s/2 + 1)
inline double unit_ball_volume(int s) {
    if (s < 0) throw std::invalid_argument("unit_ball_volume: negative dimension");
    return std::pow(M_PI, 0.5 * s) / std::tgamma(0.5 * s + 1.0);
}

// mass of the lines meeting a ball of radius r in R^d; center-independent
inline double mu_ball_mass(int d, double r) {
    if (d < 2) throw std::invalid_argument("mu_ball_mass: d < 2");
    if (!(r >= 0.0)) throw std::invalid_argument("mu_ball_mass: negative radius");
    return unit_ball_volume(d - 1) * std::pow(r, d - 1);
}

namespace detail {

// orthonormal basis of the hyperplane orthogonal to dir (d-1 vectors), by
// Gram-Schmidt over the standard basis with the most-aligned axis dropped
inline int hyperplane_basis(const Vector& dir, Vector* basis) {
    const int d = dir.d;
    int skip = 0;
    for (int i = 1; i < d; ++i)
        if (std::fabs(dir.c[i]) > std::fabs(dir.c[skip])) skip = i;
    int m = 0;
    for (int i = 0; i < d; ++i) {
        if (i == skip) continue;
        Vector v = Vector::axis(d, i);
        v -= dot(v, dir) * dir;
        for (int j = 0; j < m; ++j) v -= dot(v, basis[j]) * basis[j];
        basis[m] = v * (1.0 / norm(v));
        ++m;
    }
    return m;
}

}  // namespace detail

// One line drawn from the invariant measure restricted to the lines meeting
// `ball`, normalized to a probability. Direction uniform on the sphere, foot
// uniform in the (d-1)-ball of the orthogonal hyperplane.
inline Line sample_line_hitting_ball(RandomStream& g, const Ball& ball) {
    if (!(ball.radius > 0.0))
        throw std::invalid_argument("sample_line_hitting_ball: radius must be positive");
    const int d = ball.center.d;
    if (d == 2) {
        // planar case: direction by the angle-doubling map of a uniform point
        // in the unit disc (no trig calls), foot by a signed offset
        double c, s;
        for (;;) {
            const double u = 2.0 * uniform01(g) - 1.0;
            const double v = 2.0 * uniform01(g) - 1.0;
            const double t = u * u + v * v;
            if (t > 1.0 || t < 1e-290) continue;
            c = (u * u - v * v) / t;
            s = 2.0 * u * v / t;
            break;
        }
        const double off = ball.radius * (2.0 * uniform01(g) - 1.0);
        Vector dir(2);
        dir.c[0] = c;
        dir.c[1] = s;
        Vector p = ball.center;
        p.c[0] -= s * off;
        p.c[1] += c * off;
        return canonicalize_line(p, dir);
    }
    const Vector dir = sample_direction(g, d);

    Vector basis[kMaxDim];
    const int m = detail::hyperplane_basis(dir, basis);

    // uniform point in the (d-1)-ball of radius `ball.radius`
    Vector u(m);
    gaussian_fill(g, u.c.data(), m);
    const double un = norm(u);
    const double rad = ball.radius * std::pow(uniform_open0(g), 1.0 / m);
    const double scale = (un > 1e-14) ? rad / un : 0.0;

    Vector p = ball.center;
    for (int j = 0; j < m; ++j) p += (scale * u.c[j]) * basis[j];
    return canonicalize_line(p, dir);
}

struct MassEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
};

// Monte Carlo mass of the lines meeting both balls: lines are drawn through
// b1 and the hit fraction against b2 is scaled by the known mass of b1.
inline MassEstimate two_ball_hit_fraction(const Ball& b1, const Ball& b2,
                                          long n_samples, RandomStream& g) {
    if (n_samples < 1) throw std::invalid_argument("two_ball_hit_fraction: n_samples < 1");
    long hits = 0;
    for (long i = 0; i < n_samples; ++i) {
        const Line l = sample_line_hitting_ball(g, b1);
        if (point_line_distance(b2.center, l) <= b2.radius) ++hits;
    }
    const double mass = mu_ball_mass(b1.center.d, b1.radius);
    const double p = static_cast<double>(hits) / static_cast<double>(n_samples);
    return MassEstimate{mass * p, mass * std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples))};
}

}  // namespace roadnet
