#pragma once
// Sampling of the truncated road process: Poisson many lines through a window
// ball, each carrying an independent heavy-tailed speed mark. The truncation
// keeps the lines meeting B(center, R_win) and the speeds >= v0; the expected
// number of kept roads is R_win^(d-1) * v0^-(gamma-1).

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "roadnet/errors.hpp"
#include "roadnet/geom.hpp"
#include "roadnet/rng.hpp"

namespace roadnet {

struct WindowSpec {
    int d = 2;
    double gamma = 3.0;
    Vector center;
    double R_win = 1.0;
    double v0 = 1.0;

    WindowSpec() : center(Vector::zero(2)) {}
    WindowSpec(int d_, double gamma_, Vector center_, double R_win_, double v0_)
        : d(d_), gamma(gamma_), center(std::move(center_)), R_win(R_win_), v0(v0_) {
        validate();
    }

    void validate() const {
        if (d < 2 || d > kMaxDim) throw ConfigError("WindowSpec: d out of range");
        if (!(gamma > d)) throw ConfigError("WindowSpec: gamma must exceed d");
        if (!(R_win > 0.0)) throw ConfigError("WindowSpec: R_win must be positive");
        if (!(v0 > 0.0)) throw ConfigError("WindowSpec: v0 must be positive");
        if (center.d != d) throw ConfigError("WindowSpec: center dimension mismatch");
    }

    Ball ball() const { return Ball(center, R_win); }
};

struct Road {
    Line line;
    double speed = 0.0;
};

struct ProcessSample {
    WindowSpec window;
    std::vector<Road> roads;
    std::uint64_t seed = 0;
    std::int64_t count = 0;
};

// mean number of roads kept by the window
inline double expected_road_count(const WindowSpec& w) {
    w.validate();
    return std::pow(w.R_win, w.d - 1) * std::pow(w.v0, -(w.gamma - 1.0));
}

// distinct task streams from one master seed; mix64 is bijective, so distinct
// task indices can never collide for a fixed master
inline std::uint64_t derive_seed(std::uint64_t master, std::int64_t task_index) {
    return mix64(master + 0x9e3779b97f4a7c15ULL *
                              static_cast<std::uint64_t>(task_index + 1));
}

inline ProcessSample sample_process(std::uint64_t seed, const WindowSpec& window) {
    window.validate();
    RandomStream g(seed);
    const double mean = expected_road_count(window);
    const std::int64_t n = poisson_count(g, mean);
    ProcessSample s;
    s.window = window;
    s.seed = seed;
    s.count = n;
    s.roads.reserve(static_cast<std::size_t>(n));
    const Ball b = window.ball();
    for (std::int64_t i = 0; i < n; ++i) {
        Line line = sample_line_hitting_ball(g, b);
        s.roads.push_back(Road{line, pareto_speed(g, window.v0, window.gamma)});
    }
    return s;
}

// Top speed among sampled roads meeting B(x, r), 0 when none. The value is the
// process truth whenever it is >= v0 and the query ball stays inside the
// window; a query ball sticking out can only miss roads, so the result is
// then a lower bound and *out_of_window is set.
inline double fastest_in_ball(const ProcessSample& sample, const Vector& x, double r,
                              bool* out_of_window = nullptr) {
    if (out_of_window)
        *out_of_window = dist(x, sample.window.center) + r > sample.window.R_win * (1 + 1e-12);
    double best = 0.0;
    for (const Road& road : sample.roads)
        if (road.speed > best && point_line_distance(x, road.line) <= r) best = road.speed;
    return best;
}

// top speed among roads meeting both B(x, r) and B(y, s), 0 when none
inline double fastest_two_ball(const ProcessSample& sample, const Vector& x, double r,
                               const Vector& y, double s) {
    double best = 0.0;
    for (const Road& road : sample.roads)
        if (road.speed > best && point_line_distance(x, road.line) <= r &&
            point_line_distance(y, road.line) <= s)
            best = road.speed;
    return best;
}

// ===== degeneracy checks =====================================================

// In the continuum model three roads never meet at a point (d = 2) and two
// roads never meet at all (d >= 3), almost surely. Reported hits on sampled
// data therefore indicate a geometry bug or a handcrafted degenerate input.
struct CrossingReport {
    std::vector<std::array<int, 3>> concurrent_triples;  // d = 2
    std::vector<std::pair<int, int>> touching_pairs;     // d >= 3
    bool empty() const { return concurrent_triples.empty() && touching_pairs.empty(); }
};

inline CrossingReport check_simple_crossings(const ProcessSample& sample, double tol) {
    CrossingReport rep;
    const int n = static_cast<int>(sample.roads.size());
    if (sample.window.d >= 3) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (closest_pair(sample.roads[i].line, sample.roads[j].line).gap < tol)
                    rep.touching_pairs.emplace_back(i, j);
        return rep;
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const ClosestPair cp = closest_pair(sample.roads[i].line, sample.roads[j].line);
            if (cp.gap > tol) continue;  // parallel pair, no crossing
            for (int k = j + 1; k < n; ++k)
                if (point_line_distance(cp.a, sample.roads[k].line) <= tol)
                    rep.concurrent_triples.push_back({i, j, k});
        }
    }
    return rep;
}

// ===== plain-text serialization ==============================================
// Header line: d gamma R_win v0 seed count, then the d window-center
// coordinates. Road lines: d anchor coordinates, d direction coordinates,
// speed. All doubles carry 17 significant digits, so a write/read cycle is
// exact to the bit.

namespace detail {

inline void put_g17(std::string& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
}

}  // namespace detail

inline void write_sample(std::ostream& os, const ProcessSample& s) {
    std::string line;
    line.reserve(128);
    line += std::to_string(s.window.d);
    line += ' ';
    detail::put_g17(line, s.window.gamma);
    line += ' ';
    detail::put_g17(line, s.window.R_win);
    line += ' ';
    detail::put_g17(line, s.window.v0);
    line += ' ';
    line += std::to_string(s.seed);
    line += ' ';
    line += std::to_string(s.count);
    for (int i = 0; i < s.window.d; ++i) {
        line += ' ';
        detail::put_g17(line, s.window.center[i]);
    }
    line += '\n';
    os << line;
    for (const Road& r : s.roads) {
        line.clear();
        for (int i = 0; i < s.window.d; ++i) {
            detail::put_g17(line, r.line.anchor[i]);
            line += ' ';
        }
        for (int i = 0; i < s.window.d; ++i) {
            detail::put_g17(line, r.line.direction[i]);
            line += ' ';
        }
        detail::put_g17(line, r.speed);
        line += '\n';
        os << line;
    }
    if (!os) throw IoError("write_sample: stream failure");
}

inline ProcessSample read_sample(std::istream& is) {
    ProcessSample s;
    std::string header;
    if (!std::getline(is, header)) throw ParseError("read_sample: missing header");
    {
        unsigned long long seed = 0;
        long long d = 0, count = 0;
        double gamma = 0, R = 0, v0 = 0;
        int consumed = 0;
        if (std::sscanf(header.c_str(), "%lld %lg %lg %lg %llu %lld%n", &d, &gamma, &R, &v0,
                        &seed, &count, &consumed) != 6)
            throw ParseError("read_sample: malformed header");
        if (d < 2 || d > kMaxDim) throw ParseError("read_sample: bad dimension");
        Vector center(static_cast<int>(d));
        const char* p = header.c_str() + consumed;
        for (int i = 0; i < d; ++i) {
            char* end = nullptr;
            center[i] = std::strtod(p, &end);
            if (end == p) throw ParseError("read_sample: missing center coordinate");
            p = end;
        }
        s.window = WindowSpec(static_cast<int>(d), gamma, center, R, v0);
        s.seed = seed;
        s.count = count;
        if (count < 0) throw ParseError("read_sample: negative count");
    }
    const int d = s.window.d;
    s.roads.resize(static_cast<std::size_t>(s.count));
    std::string line;
    for (std::int64_t k = 0; k < s.count; ++k) {
        if (!std::getline(is, line)) throw ParseError("read_sample: truncated road list");
        Road& r = s.roads[static_cast<std::size_t>(k)];
        r.line.anchor = Vector(d);
        r.line.direction = Vector(d);
        const char* p = line.c_str();
        auto next = [&]() {
            char* end = nullptr;
            const double x = std::strtod(p, &end);
            if (end == p) throw ParseError("read_sample: malformed road line " + std::to_string(k));
            p = end;
            return x;
        };
        for (int i = 0; i < d; ++i) r.line.anchor[i] = next();
        for (int i = 0; i < d; ++i) r.line.direction[i] = next();
        r.speed = next();
        if (std::fabs(norm(r.line.direction) - 1.0) > 1e-9)
            throw ParseError("read_sample: non-unit direction on road " + std::to_string(k));
        if (!(r.speed >= s.window.v0))
            throw ParseError("read_sample: speed below v0 on road " + std::to_string(k));
        if (point_line_distance(s.window.center, r.line) > s.window.R_win * (1 + 1e-9))
            throw ParseError("read_sample: road misses the window, road " + std::to_string(k));
    }
    return s;
}

}  // namespace roadnet
