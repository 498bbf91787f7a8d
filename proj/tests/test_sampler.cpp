#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "roadnet/sampler.hpp"
#include "roadnet/stats.hpp"

using namespace roadnet;

namespace {

WindowSpec window2(double gamma, double R, double v0) {
    return WindowSpec(2, gamma, Vector::zero(2), R, v0);
}

}  // namespace

TEST_CASE("expected road count") {
    CHECK(expected_road_count(window2(3.0, 1.0, 0.1)) == Catch::Approx(100.0));
    CHECK(expected_road_count(window2(3.0, 2.0, 1.0)) == Catch::Approx(2.0));
    CHECK(expected_road_count(window2(3.0, 1.0, 1e6)) < 1e-11);
    CHECK(expected_road_count(WindowSpec(3, 4.0, Vector::zero(3), 2.0, 0.5)) ==
          Catch::Approx(4.0 * 8.0));
    CHECK_THROWS_AS(window2(2.0, 1.0, 1.0), ConfigError);   // gamma must exceed d
    CHECK_THROWS_AS(window2(3.0, -1.0, 1.0), ConfigError);  // bad radius
}

TEST_CASE("count law matches the Poisson mean") {
    // a few parameter settings, mean and variance within 4 sigma
    struct Setting { double gamma, R, v0; };
    int idx = 0;
    for (const Setting& st : {Setting{3.0, 1.0, 1.0}, Setting{3.0, 2.0, 0.7}, Setting{4.5, 1.5, 0.9}}) {
        const WindowSpec w = window2(st.gamma, st.R, st.v0);
        const double mean = expected_road_count(w);
        const int n = 4000;
        std::vector<double> counts(n);
        for (int i = 0; i < n; ++i)
            counts[i] = static_cast<double>(sample_process(derive_seed(900 + idx, i), w).count);
        ++idx;
        const double m = mean_of(counts);
        const double v = variance_of(counts);
        // Poisson: var of the sample mean is mean/n, var of the sample
        // variance is about (mean + 2 mean^2)/n
        CHECK(std::fabs(m - mean) < 4.0 * std::sqrt(mean / n));
        CHECK(std::fabs(v - mean) < 4.0 * std::sqrt((mean + 2.0 * mean * mean) / n));
    }
}

TEST_CASE("speed marks follow the heavy-tailed law") {
    SECTION("tail CDF by KS, batch majority") {
        const WindowSpec w = window2(3.0, 1.0, 0.5);
        int passes = 0;
        for (int b = 0; b < 10; ++b) {
            std::vector<double> speeds;
            int i = 0;
            while (speeds.size() < 5000) {
                const ProcessSample s = sample_process(derive_seed(17, b * 1000 + i++), w);
                for (const Road& r : s.roads) speeds.push_back(r.speed);
            }
            speeds.resize(5000);
            const KsResult ks = ks_test(speeds, [&](double u) {
                return u < w.v0 ? 0.0 : 1.0 - std::pow(u / w.v0, -(w.gamma - 1.0));
            });
            if (ks.p_value > 0.01) ++passes;
        }
        CHECK(passes >= 8);
    }
    SECTION("mean for gamma 3 is near 2") {
        const WindowSpec w = window2(3.0, 1.0, 1.0);
        std::vector<double> speeds;
        int i = 0;
        while (speeds.size() < 50000)
            for (const Road& r : sample_process(derive_seed(18, i++), w).roads)
                speeds.push_back(r.speed);
        CHECK(mean_of(speeds) == Catch::Approx(2.0).margin(0.2));
    }
    SECTION("finite-variance case, gamma 4") {
        const WindowSpec w = window2(4.0, 1.0, 1.0);
        std::vector<double> speeds;
        int i = 0;
        while (speeds.size() < 50000)
            for (const Road& r : sample_process(derive_seed(19, i++), w).roads)
                speeds.push_back(r.speed);
        // E[v] = v0 (gamma-1)/(gamma-2) = 1.5, var = 0.75
        CHECK(std::fabs(mean_of(speeds) - 1.5) < 4.0 * std::sqrt(0.75 / 50000.0));
    }
}

TEST_CASE("fastest speed in a ball") {
    SECTION("empty sample gives zero") {
        ProcessSample s;
        s.window = window2(3.0, 1.0, 1.0);
        CHECK(fastest_in_ball(s, Vector::zero(2), 0.5) == 0.0);
        CHECK(fastest_two_ball(s, Vector::zero(2), 0.5, Vector{1, 0}, 0.5) == 0.0);
    }
    SECTION("hit geometry decides") {
        ProcessSample s;
        s.window = window2(3.0, 2.0, 1.0);
        s.roads.push_back(Road{canonicalize_line({0, 0.5}, {1, 0}), 7.0});
        s.count = 1;
        const Vector x = Vector::zero(2);
        CHECK(fastest_in_ball(s, x, 0.4) == 0.0);
        CHECK(fastest_in_ball(s, x, 0.6) == 7.0);
    }
    SECTION("window coverage flag") {
        ProcessSample s;
        s.window = window2(3.0, 1.0, 1.0);
        bool flag = false;
        fastest_in_ball(s, Vector{0.8, 0.0}, 0.5, &flag);
        CHECK(flag);
        fastest_in_ball(s, Vector{0.2, 0.0}, 0.5, &flag);
        CHECK_FALSE(flag);
    }
    SECTION("law of the fastest speed through a unit ball") {
        // P(V <= u) = exp(-u^-2) at d=2, gamma=3, r=1; truncation far below
        const WindowSpec w = window2(3.0, 1.0, 0.05);
        const int n = 2000;
        std::vector<double> vs(n);
        for (int i = 0; i < n; ++i)
            vs[i] = fastest_in_ball(sample_process(derive_seed(77, i), w), Vector::zero(2), 1.0);
        const KsResult ks = ks_test(vs, [](double u) {
            return u <= 0.0 ? 0.0 : std::exp(-1.0 / (u * u));
        });
        CHECK(ks.p_value > 0.01);
    }
    SECTION("scale equivariance of the fastest speed") {
        // V at radius r matches r^((d-1)/(gamma-1)) times V at radius 1
        const int n = 2500;
        const double r = 0.25;
        std::vector<double> a(n), b(n);
        const WindowSpec w1 = window2(3.0, 1.0, 0.05);
        const WindowSpec wr = window2(3.0, r, 0.05 * std::sqrt(r));
        for (int i = 0; i < n; ++i) {
            a[i] = fastest_in_ball(sample_process(derive_seed(501, i), wr), Vector::zero(2), r);
            b[i] = std::sqrt(r) *
                   fastest_in_ball(sample_process(derive_seed(502, i), w1), Vector::zero(2), 1.0);
        }
        const KsResult ks = ks_test_two(a, b);
        CHECK(ks.p_value > 0.01);
    }
    SECTION("two-ball speed never beats either single ball") {
        const WindowSpec w = window2(3.0, 1.5, 0.4);
        for (int i = 0; i < 50; ++i) {
            const ProcessSample s = sample_process(derive_seed(61, i), w);
            RandomStream g(derive_seed(62, i));
            const Vector x{uniform(g, -0.5, 0.5), uniform(g, -0.5, 0.5)};
            const Vector y{uniform(g, -0.5, 0.5), uniform(g, -0.5, 0.5)};
            const double r = uniform(g, 0.1, 0.4), t = uniform(g, 0.1, 0.4);
            const double both = fastest_two_ball(s, x, r, y, t);
            CHECK(both <= fastest_in_ball(s, x, r) + 0.0);
            CHECK(both <= fastest_in_ball(s, y, t) + 0.0);
        }
    }
    SECTION("appending roads never lowers the result") {
        const WindowSpec w = window2(3.0, 1.0, 0.5);
        ProcessSample s = sample_process(derive_seed(63, 0), w);
        const ProcessSample extra = sample_process(derive_seed(63, 1), w);
        RandomStream g(derive_seed(63, 2));
        std::vector<Vector> xs;
        std::vector<double> rs, before;
        for (int q = 0; q < 40; ++q) {
            xs.push_back(Vector{uniform(g, -0.6, 0.6), uniform(g, -0.6, 0.6)});
            rs.push_back(uniform(g, 0.05, 0.5));
            before.push_back(fastest_in_ball(s, xs.back(), rs.back()));
        }
        for (const Road& r : extra.roads) s.roads.push_back(r);
        s.count = static_cast<std::int64_t>(s.roads.size());
        for (int q = 0; q < 40; ++q)
            CHECK(fastest_in_ball(s, xs[q], rs[q]) >= before[q]);
    }
}

TEST_CASE("degenerate crossings") {
    SECTION("three concurrent lines are reported") {
        ProcessSample s;
        s.window = window2(3.0, 2.0, 1.0);
        s.roads.push_back(Road{canonicalize_line({0, 0}, {1, 0}), 1.0});
        s.roads.push_back(Road{canonicalize_line({0, 0}, {0, 1}), 2.0});
        s.roads.push_back(Road{canonicalize_line({0, 0}, {1, 1}), 3.0});
        s.count = 3;
        const CrossingReport rep = check_simple_crossings(s, 1e-9);
        REQUIRE(rep.concurrent_triples.size() == 1);
        CHECK(rep.concurrent_triples[0] == std::array<int, 3>{0, 1, 2});
    }
    SECTION("random planar samples are simple") {
        const ProcessSample s = sample_process(derive_seed(71, 0), window2(3.0, 1.0, 0.15));
        CHECK(check_simple_crossings(s, 1e-9).empty());
    }
    SECTION("random spatial samples have disjoint roads") {
        const WindowSpec w(3, 4.0, Vector::zero(3), 1.0, 0.3);
        const ProcessSample s = sample_process(derive_seed(72, 0), w);
        CHECK(check_simple_crossings(s, 1e-9).empty());
    }
    SECTION("sampled speeds are pairwise distinct") {
        const ProcessSample s = sample_process(derive_seed(73, 0), window2(3.0, 1.0, 0.05));
        std::unordered_set<double> seen;
        for (const Road& r : s.roads) REQUIRE(seen.insert(r.speed).second);
    }
}

TEST_CASE("seed derivation") {
    CHECK(derive_seed(42, 0) == derive_seed(42, 0));
    CHECK(derive_seed(42, 0) != derive_seed(42, 1));
    CHECK(derive_seed(42, 5) != derive_seed(43, 5));
    std::unordered_set<std::uint64_t> seen;
    for (int i = 0; i < 100000; ++i) REQUIRE(seen.insert(derive_seed(42, i)).second);
}

TEST_CASE("determinism and round trip") {
    const WindowSpec w(2, 3.0, Vector{0.25, -1.5}, 1.25, 0.4);
    const ProcessSample a = sample_process(9001, w);
    SECTION("same seed, same sample, to the bit") {
        const ProcessSample b = sample_process(9001, w);
        REQUIRE(a.count == b.count);
        for (std::size_t i = 0; i < a.roads.size(); ++i) {
            REQUIRE(a.roads[i].speed == b.roads[i].speed);
            for (int k = 0; k < 2; ++k) {
                REQUIRE(a.roads[i].line.anchor[k] == b.roads[i].line.anchor[k]);
                REQUIRE(a.roads[i].line.direction[k] == b.roads[i].line.direction[k]);
            }
        }
    }
    SECTION("text round trip is exact") {
        std::stringstream ss;
        write_sample(ss, a);
        const ProcessSample b = read_sample(ss);
        REQUIRE(b.count == a.count);
        CHECK(b.seed == a.seed);
        CHECK(b.window.gamma == a.window.gamma);
        CHECK(b.window.R_win == a.window.R_win);
        CHECK(b.window.v0 == a.window.v0);
        for (int k = 0; k < 2; ++k) CHECK(b.window.center[k] == a.window.center[k]);
        for (std::size_t i = 0; i < a.roads.size(); ++i) {
            REQUIRE(b.roads[i].speed == a.roads[i].speed);
            for (int k = 0; k < 2; ++k) {
                REQUIRE(b.roads[i].line.anchor[k] == a.roads[i].line.anchor[k]);
                REQUIRE(b.roads[i].line.direction[k] == a.roads[i].line.direction[k]);
            }
        }
    }
    SECTION("malformed inputs are rejected") {
        std::stringstream empty("");
        CHECK_THROWS_AS(read_sample(empty), ParseError);
        std::stringstream junk("not a header\n");
        CHECK_THROWS_AS(read_sample(junk), ParseError);
        std::stringstream truncated("2 3 1 0.5 12 3 0 0\n0 0 1 0 0.7\n");
        CHECK_THROWS_AS(read_sample(truncated), ParseError);
        // speed below the declared v0
        std::stringstream slow("2 3 1 0.5 12 1 0 0\n0 0 1 0 0.1\n");
        CHECK_THROWS_AS(read_sample(slow), ParseError);
    }
}
