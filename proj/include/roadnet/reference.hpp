#pragma once
// Brute-force travel-time oracle for tiny configurations. Enumerates every
// road sequence up to a length cap (no immediate repeats) and grid-searches
// the 2k junction parameters of each, repeatedly shrinking the grid around
// the incumbent. A fixed sequence's travel time is jointly convex in its
// parameters (a sum of Euclidean norms of affine maps), so the shrinking
// grid cannot lock onto a spurious local minimum. Cost grows as
// points^(2k) per sequence; use only on samples with a handful of roads.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "roadnet/geom.hpp"
#include "roadnet/sampler.hpp"
#include "roadnet/vec.hpp"

namespace roadnet::reference {

inline double sequence_time_grid(const ProcessSample& sample, const std::vector<int>& seq,
                                 const Vector& x, const Vector& y, double epsilon,
                                 int points_per_axis = 7, int levels = 24) {
    const int k = static_cast<int>(seq.size());
    if (k == 0) return dist(x, y) / epsilon;
    if (points_per_axis < 3) throw std::invalid_argument("sequence_time_grid: need >= 3 points");

    std::vector<const Line*> lines(static_cast<std::size_t>(k));
    std::vector<double> speeds(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        lines[static_cast<std::size_t>(j)] = &sample.roads[static_cast<std::size_t>(seq[static_cast<std::size_t>(j)])].line;
        speeds[static_cast<std::size_t>(j)] = sample.roads[static_cast<std::size_t>(seq[static_cast<std::size_t>(j)])].speed;
    }

    auto eval = [&](const std::vector<double>& q) {
        double t = 0.0;
        Vector prev = x;
        for (int j = 0; j < k; ++j) {
            const Vector A = point_at(*lines[static_cast<std::size_t>(j)], q[static_cast<std::size_t>(2 * j)]);
            const Vector B = point_at(*lines[static_cast<std::size_t>(j)], q[static_cast<std::size_t>(2 * j + 1)]);
            t += dist(prev, A) / epsilon +
                 std::abs(q[static_cast<std::size_t>(2 * j + 1)] - q[static_cast<std::size_t>(2 * j)]) /
                     speeds[static_cast<std::size_t>(j)];
            prev = B;
        }
        return t + dist(prev, y) / epsilon;
    };

    const int m = 2 * k;
    std::vector<double> center(static_cast<std::size_t>(m));
    std::vector<double> width(static_cast<std::size_t>(m));
    for (int j = 0; j < k; ++j) {
        const double px = line_param(x, *lines[static_cast<std::size_t>(j)]);
        const double py = line_param(y, *lines[static_cast<std::size_t>(j)]);
        const double w = dist(x, y) + point_line_distance(x, *lines[static_cast<std::size_t>(j)]) +
                         point_line_distance(y, *lines[static_cast<std::size_t>(j)]) + 1.0;
        center[static_cast<std::size_t>(2 * j)] = 0.5 * (px + py);
        center[static_cast<std::size_t>(2 * j + 1)] = 0.5 * (px + py);
        width[static_cast<std::size_t>(2 * j)] = w;
        width[static_cast<std::size_t>(2 * j + 1)] = w;
    }

    std::vector<int> idx(static_cast<std::size_t>(m));
    std::vector<double> q(static_cast<std::size_t>(m));
    std::vector<double> best_q = center;
    double best = eval(center);
    for (int level = 0; level < levels; ++level) {
        std::fill(idx.begin(), idx.end(), 0);
        bool done = false;
        while (!done) {
            for (int c = 0; c < m; ++c) {
                const double lo = best_q[static_cast<std::size_t>(c)] - width[static_cast<std::size_t>(c)];
                const double step = 2.0 * width[static_cast<std::size_t>(c)] / (points_per_axis - 1);
                q[static_cast<std::size_t>(c)] = lo + idx[static_cast<std::size_t>(c)] * step;
            }
            const double t = eval(q);
            if (t < best) {
                best = t;
                center = q;
            }
            int c = 0;
            while (c < m && ++idx[static_cast<std::size_t>(c)] == points_per_axis) {
                idx[static_cast<std::size_t>(c)] = 0;
                ++c;
            }
            done = c == m;
        }
        best_q = center;
        double max_step = 0.0;
        for (int c = 0; c < m; ++c) {
            const double step = 2.0 * width[static_cast<std::size_t>(c)] / (points_per_axis - 1);
            max_step = std::max(max_step, step);
            width[static_cast<std::size_t>(c)] = 1.25 * step;
        }
        if (max_step < 1e-8) break;
    }
    return best;
}

inline double brute_force_time(const ProcessSample& sample, const Vector& x, const Vector& y,
                               double epsilon, int max_roads = 3) {
    if (!(epsilon > 0)) throw std::invalid_argument("brute_force_time: epsilon must be positive");
    if (dist(x, y) == 0.0) return 0.0;
    double best = dist(x, y) / epsilon;
    const int n = static_cast<int>(sample.roads.size());
    std::vector<int> seq;
    auto extend = [&](auto&& self) -> void {
        if (!seq.empty()) best = std::min(best, sequence_time_grid(sample, seq, x, y, epsilon));
        if (static_cast<int>(seq.size()) == max_roads) return;
        for (int r = 0; r < n; ++r) {
            if (!seq.empty() && seq.back() == r) continue;
            seq.push_back(r);
            self(self);
            seq.pop_back();
        }
    };
    extend(extend);
    return best;
}

}  // namespace roadnet::reference
