#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "roadnet/metric.hpp"
#include "roadnet/reference.hpp"
#include "roadnet/rng.hpp"
#include "roadnet/sampler.hpp"

using namespace roadnet;

namespace {

// frozen values from tools/reference_gen for the one-road crossing problem:
// speed-10 road along y = 0.1, terminals (0,0) and (1,0), epsilon 1
constexpr double kRefractionGrid = 0.29899751167497818;
constexpr double kRefractionSnell = 0.29899748742132404;

ProcessSample empty_sample(double R = 5.0, double v0 = 0.5) {
    ProcessSample s;
    s.window = WindowSpec(2, 3.0, Vector::zero(2), R, v0);
    return s;
}

Road make_road(double ax, double ay, double dx, double dy, double speed) {
    return Road{canonicalize_line(Vector{ax, ay}, Vector{dx, dy}), speed};
}

Vector random_in_disc(RandomStream& g, double R) {
    for (;;) {
        const double a = uniform(g, -R, R);
        const double b = uniform(g, -R, R);
        if (a * a + b * b <= R * R) return Vector{a, b};
    }
}

SolverConfig config_for(double eps) {
    SolverConfig c;
    c.epsilon = eps;
    return c;
}

}  // namespace

TEST_CASE("empty sample reduces to the straight hop") {
    const ProcessSample s = empty_sample();
    const Vector x{0.0, 0.0}, y{1.0, 0.0};
    const SolverConfig cfg = config_for(0.5);

    const TransferGraph g = build_transfer_graph(s, x, y, cfg);
    REQUIRE(g.nodes.size() == 2);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].kind == EdgeKind::hop);
    CHECK(g.edges[0].cost == Catch::Approx(2.0).epsilon(1e-14));

    const UpperBound ub = t_eps_upper(s, x, y, cfg);
    CHECK(ub.time == Catch::Approx(2.0).epsilon(1e-13));
    REQUIRE(ub.path.legs.size() == 1);
    CHECK(ub.path.legs[0].road_index == -1);

    const auto [kt, kj] = kendall_recursive_upper(s, x, y, 1.0 / 3.0, 12, 0.5);
    CHECK(kt == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(kj.empty());

    CHECK(lower_certificate(s, x, y, 0.5, 6) == Catch::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("terminals sharing a fast road ride it end to end") {
    ProcessSample s = empty_sample(5.0, 0.01);
    s.roads.push_back(make_road(0.0, 0.0, 1.0, 0.0, 2.0));
    const Vector x{0.0, 0.0}, y{1.0, 0.0};

    const UpperBound ub = t_eps_upper(s, x, y, config_for(0.01));
    CHECK(ub.time == Catch::Approx(0.5).epsilon(1e-9));

    const auto [kt, kj] = kendall_recursive_upper(s, x, y, 1.0 / 3.0, 12, 0.01);
    CHECK(kt == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(kj.size() == 2);

    const PathSolution refined = refine_path(s, {0}, x, y, 0.01);
    CHECK(refined.total_time == Catch::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("crossing one offset road matches the frozen grid optimum") {
    ProcessSample s = empty_sample(5.0, 1.0);
    s.roads.push_back(make_road(0.0, 0.1, 1.0, 0.0, 10.0));
    const Vector x{0.0, 0.0}, y{1.0, 0.0};

    const double oracle = reference::brute_force_time(s, x, y, 1.0, 2);
    CHECK(std::abs(oracle - kRefractionSnell) < 1e-7);
    CHECK(std::abs(oracle - kRefractionGrid) < 1e-6);

    const UpperBound ub = t_eps_upper(s, x, y, config_for(1.0));
    CHECK(std::abs(ub.time - kRefractionGrid) / kRefractionGrid < 1e-3);
    CHECK(ub.time > kRefractionSnell - 1e-9);

    const PathSolution refined = refine_path(s, {0}, x, y, 1.0);
    CHECK(std::abs(refined.total_time - kRefractionSnell) < 1e-6);
}

TEST_CASE("certificate, solver, and recursive bound stay ordered") {
    for (std::uint64_t seed : {11u, 12u}) {
        const WindowSpec win(2, 3.0, Vector::zero(2), 1.2, 0.2);
        const ProcessSample s = sample_process(seed, win);
        const SolverConfig cfg = config_for(0.2);
        const CoreGraph core = build_core_graph(s, cfg);
        RandomStream g(derive_seed(seed, 7001));
        for (int trial = 0; trial < 25; ++trial) {
            const Vector x = random_in_disc(g, 0.5);
            const Vector y = random_in_disc(g, 0.5);
            const UpperBound ub = t_eps_upper_with_core(s, core, x, y, cfg);
            const double cert = lower_certificate(s, x, y, cfg.epsilon, 24);
            const auto [kt, kj] = kendall_recursive_upper(s, x, y, 1.0 / 3.0, 12, cfg.epsilon);
            INFO("seed " << seed << " trial " << trial);
            CHECK(cert <= ub.time + 1e-12);
            CHECK(ub.time <= kt + 1e-9);
            CHECK(ub.time <= dist(x, y) / cfg.epsilon + 1e-12);
        }
    }
}

TEST_CASE("pairwise times form a metric on shared terminals") {
    for (std::uint64_t seed : {21u, 22u}) {
        const WindowSpec win(2, 3.0, Vector::zero(2), 1.2, 0.2);
        const ProcessSample s = sample_process(seed, win);
        const SolverConfig cfg = config_for(0.2);
        RandomStream g(derive_seed(seed, 7002));
        for (int trial = 0; trial < 8; ++trial) {
            const std::vector<Vector> pts = {random_in_disc(g, 0.5), random_in_disc(g, 0.5),
                                             random_in_disc(g, 0.5)};
            const PairwiseTimes pw = pairwise_times(s, pts, cfg);
            INFO("seed " << seed << " trial " << trial);
            for (int i = 0; i < 3; ++i) CHECK(pw.at(i, i) == 0.0);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    CHECK(std::abs(pw.at(i, j) - pw.at(j, i)) <=
                          1e-9 * std::max(1.0, pw.at(i, j)));
                    if (i != j) {
                        CHECK(pw.at(i, j) <=
                              dist(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]) / cfg.epsilon +
                                  1e-12);
                        CHECK(lower_certificate(s, pts[static_cast<std::size_t>(i)],
                                                pts[static_cast<std::size_t>(j)], cfg.epsilon, 24) <=
                              pw.at(i, j) + 1e-9);
                    }
                }
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    for (int k = 0; k < 3; ++k)
                        CHECK(pw.at(i, k) <= pw.at(i, j) + pw.at(j, k) + 1e-9);
        }
    }
}

TEST_CASE("self distance is exactly zero") {
    const WindowSpec win(2, 3.0, Vector::zero(2), 1.2, 0.2);
    const ProcessSample s = sample_process(31, win);
    const Vector x{0.1, -0.2};
    const UpperBound ub = t_eps_upper(s, x, x, config_for(0.2));
    CHECK(ub.time == 0.0);
    CHECK(ub.path.legs.empty());
    CHECK(lower_certificate(s, x, x, 0.2, 8) == 0.0);
}

TEST_CASE("fixed-graph times rise as the hop speed drops") {
    const WindowSpec win(2, 3.0, Vector::zero(2), 0.8, 0.12);
    const ProcessSample s = sample_process(41, win);
    const SolverConfig cfg = config_for(0.12);
    const CoreGraph core = build_core_graph(s, cfg);
    RandomStream g(derive_seed(41, 7003));
    for (int trial = 0; trial < 15; ++trial) {
        const Vector x = random_in_disc(g, 0.35);
        const Vector y = random_in_disc(g, 0.35);
        const TransferGraph graph = assemble_transfer_graph(s, core, {x, y}, cfg);
        const double t_048 = transfer_graph_time(graph, 0.48);
        const double t_024 = transfer_graph_time(graph, 0.24);
        const double t_012 = transfer_graph_time(graph, 0.12);
        INFO("trial " << trial);
        CHECK(t_012 >= t_024);
        CHECK(t_024 >= t_048);
    }
}

TEST_CASE("roads at or below the hop speed never change the answer") {
    const WindowSpec win(2, 3.0, Vector::zero(2), 1.2, 0.2);
    ProcessSample s = sample_process(51, win);
    ProcessSample padded = s;
    RandomStream g(derive_seed(51, 7005));
    for (int i = 0; i < 6; ++i) {
        const Line line = sample_line_hitting_ball(g, Ball{Vector::zero(2), 1.2});
        padded.roads.push_back(Road{line, uniform(g, 0.05, 0.19)});
    }
    padded.roads.push_back(Road{sample_line_hitting_ball(g, Ball{Vector::zero(2), 1.2}), 0.2});

    const SolverConfig cfg = config_for(0.2);
    RandomStream gp(derive_seed(51, 7006));
    for (int trial = 0; trial < 10; ++trial) {
        const Vector x = random_in_disc(gp, 0.5);
        const Vector y = random_in_disc(gp, 0.5);
        const UpperBound a = t_eps_upper(s, x, y, cfg);
        const UpperBound b = t_eps_upper(padded, x, y, cfg);
        CHECK(a.time == b.time);
        CHECK(a.path.legs.size() == b.path.legs.size());
        CHECK(lower_certificate(s, x, y, 0.2, 16) == lower_certificate(padded, x, y, 0.2, 16));
        CHECK(kendall_recursive_upper(s, x, y, 1.0 / 3.0, 12, 0.2).first ==
              kendall_recursive_upper(padded, x, y, 1.0 / 3.0, 12, 0.2).first);
    }
}

TEST_CASE("denser candidate sets only improve the bound") {
    const WindowSpec win(2, 3.0, Vector::zero(2), 1.0, 0.18);
    const ProcessSample s = sample_process(61, win);
    SolverConfig lean = config_for(0.18);
    lean.hop_neighbors = 12;
    lean.candidate_depth = 1;
    SolverConfig rich = lean;
    rich.hop_neighbors = 20;
    rich.candidate_depth = 4;
    const CoreGraph core_lean = build_core_graph(s, lean);
    const CoreGraph core_rich = build_core_graph(s, rich);
    RandomStream g(derive_seed(61, 7007));
    for (int trial = 0; trial < 12; ++trial) {
        const Vector x = random_in_disc(g, 0.4);
        const Vector y = random_in_disc(g, 0.4);
        const double tl = t_eps_upper_with_core(s, core_lean, x, y, lean).time;
        const double tr = t_eps_upper_with_core(s, core_rich, x, y, rich).time;
        INFO("trial " << trial);
        CHECK(tr <= tl + 1e-9);
    }
}

TEST_CASE("adding a road only improves the bound") {
    RandomStream g(derive_seed(71, 7008));
    for (int trial = 0; trial < 12; ++trial) {
        const WindowSpec win(2, 3.0, Vector::zero(2), 1.0, 0.2);
        const ProcessSample base = sample_process(100 + static_cast<std::uint64_t>(trial), win);
        ProcessSample more = base;
        more.roads.push_back(Road{sample_line_hitting_ball(g, Ball{Vector::zero(2), 1.0}),
                                  uniform(g, 0.3, 3.0)});
        SolverConfig cfg = config_for(0.2);
        cfg.hop_neighbors = 24;
        const Vector x = random_in_disc(g, 0.4);
        const Vector y = random_in_disc(g, 0.4);
        const double t0 = t_eps_upper(base, x, y, cfg).time;
        const double t1 = t_eps_upper(more, x, y, cfg).time;
        INFO("trial " << trial);
        CHECK(t1 <= t0 + 1e-9);
    }
}

TEST_CASE("ball-exit certificate agrees with hand evaluation") {
    SECTION("slow far road is as useless as no road") {
        ProcessSample s = empty_sample(50.0, 0.01);
        s.roads.push_back(make_road(0.0, 30.0, 1.0, 0.0, 0.02));
        const Vector x{0.0, 0.0}, y{1.0, 0.0};
        CHECK(lower_certificate(s, x, y, 0.01, 10) == Catch::Approx(100.0).epsilon(1e-14));
    }
    SECTION("fast road through one endpoint caps that endpoint only") {
        ProcessSample s = empty_sample(50.0, 0.01);
        s.roads.push_back(make_road(0.0, 0.0, 0.0, 1.0, 5.0));
        const Vector x{0.0, 0.0}, y{1.0, 0.0};
        // largest ball around y missing the road has radius 1/2: r/eps = 50
        CHECK(lower_certificate(s, x, y, 0.01, 8) == Catch::Approx(50.0).epsilon(1e-14));
    }
    SECTION("configuration checks") {
        const ProcessSample s = empty_sample(5.0, 0.5);
        const Vector x{0.0, 0.0}, y{1.0, 0.0};
        CHECK_THROWS_AS(lower_certificate(s, x, y, 0.4, 8), ConfigError);
        CHECK_THROWS_AS(lower_certificate(s, x, y, 0.5, 0), std::invalid_argument);
    }
}

TEST_CASE("recursive construction rejects bad arguments") {
    const ProcessSample s = empty_sample(5.0, 0.5);
    const Vector x{0.0, 0.0}, y{1.0, 0.0};
    CHECK_THROWS_AS(kendall_recursive_upper(s, x, y, 0.5, 12, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(kendall_recursive_upper(s, x, y, 0.0, 12, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(kendall_recursive_upper(s, x, y, 1.0 / 3.0, 12, 0.4), ConfigError);
}

TEST_CASE("epsilon below the sample floor is refused everywhere") {
    const ProcessSample s = empty_sample(5.0, 0.5);
    const Vector x{0.0, 0.0}, y{1.0, 0.0};
    const SolverConfig cfg = config_for(0.25);
    CHECK_THROWS_AS(build_transfer_graph(s, x, y, cfg), ConfigError);
    CHECK_THROWS_AS(t_eps_upper(s, x, y, cfg), ConfigError);
    CHECK_THROWS_AS(distance_field(s, x, GridSpec{Vector{-1.0, -1.0}, Vector{1.0, 1.0}, 8, 8}, cfg),
                    ConfigError);
    SolverConfig bad = config_for(1.0);
    bad.hop_neighbors = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("distance field over an empty sample is the cone") {
    const ProcessSample s = empty_sample(8.0, 0.5);
    const Vector x{0.25, -0.125};
    const GridSpec grid{Vector{-1.0, -1.0}, Vector{1.0, 1.0}, 101, 101};
    const SolverConfig cfg = config_for(0.5);
    const DistanceField f = distance_field(s, x, grid, cfg);
    for (int iy = 0; iy < grid.ny; iy += 7)
        for (int ix = 0; ix < grid.nx; ix += 7) {
            const Vector p = f.pixel_center(ix, iy);
            CHECK(f.at(ix, iy) == Catch::Approx(dist(x, p) / 0.5).margin(1e-12));
        }
}

TEST_CASE("distance field invariants on a random sample") {
    const WindowSpec win(2, 3.0, Vector::zero(2), 1.5, 0.15);
    const ProcessSample s = sample_process(81, win);
    const Vector x{0.0, 0.0};
    const GridSpec grid{Vector{-0.7, -0.7}, Vector{0.7, 0.7}, 120, 120};
    const SolverConfig cfg = config_for(0.15);
    const DistanceField f = distance_field(s, x, grid, cfg);
    const double diam = std::hypot(f.pixel_w(), f.pixel_h());

    // pixel containing the origin
    const int ix0 = static_cast<int>((x[0] - grid.lo[0]) / f.pixel_w());
    const int iy0 = static_cast<int>((x[1] - grid.lo[1]) / f.pixel_h());
    CHECK(f.at(ix0, iy0) <= diam / cfg.epsilon);

    RandomStream g(derive_seed(81, 7009));
    for (int trial = 0; trial < 50; ++trial) {
        const int ix = static_cast<int>(uniform01(g) * grid.nx);
        const int iy = static_cast<int>(uniform01(g) * grid.ny);
        const Vector p = f.pixel_center(ix, iy);
        const double v = f.at(ix, iy);
        CHECK(v <= dist(x, p) / cfg.epsilon + 1e-12);
        CHECK(lower_certificate(s, x, p, cfg.epsilon, 20) <= v + 1e-9);

        const int jx = static_cast<int>(uniform01(g) * grid.nx);
        const int jy = static_cast<int>(uniform01(g) * grid.ny);
        const Vector q = f.pixel_center(jx, jy);
        CHECK(std::abs(v - f.at(jx, jy)) <= dist(p, q) / cfg.epsilon + 1e-12);
    }
}

TEST_CASE("ball volumes grow like the hop disc when no road helps") {
    const ProcessSample s = empty_sample(8.0, 0.5);
    const Vector x{0.0, 0.0};
    const GridSpec grid{Vector{-1.0, -1.0}, Vector{1.0, 1.0}, 201, 201};
    const SolverConfig cfg = config_for(0.5);
    const DistanceField f = distance_field(s, x, grid, cfg);

    bool tainted = false;
    const double v1 = ball_volume(f, 1.0, &tainted);
    CHECK_FALSE(tainted);
    CHECK(std::abs(v1 - M_PI * 0.25) < 0.05);
    CHECK(v1 >= 0.9 * M_PI * 0.25);

    CHECK(ball_volume(f, 0.0) <= f.pixel_w() * f.pixel_h() + 1e-15);
    double prev = 0.0;
    for (double t = 0.2; t < 2.4; t += 0.2) {
        const double v = ball_volume(f, t);
        CHECK(v >= prev);
        prev = v;
    }
    ball_volume(f, 2.2, &tainted);
    CHECK(tainted);
    CHECK_THROWS_AS(ball_volume(f, -0.1), std::invalid_argument);
}

TEST_CASE("path solutions are well formed") {
    const WindowSpec win(2, 3.0, Vector::zero(2), 1.2, 0.2);
    const ProcessSample s = sample_process(91, win);
    const SolverConfig cfg = config_for(0.2);
    const CoreGraph core = build_core_graph(s, cfg);
    RandomStream g(derive_seed(91, 7010));
    for (int trial = 0; trial < 15; ++trial) {
        const Vector x = random_in_disc(g, 0.5);
        const Vector y = random_in_disc(g, 0.5);
        const UpperBound ub = t_eps_upper_with_core(s, core, x, y, cfg);
        REQUIRE_FALSE(ub.path.legs.empty());
        CHECK(ub.time == ub.path.total_time);
        double total = 0.0;
        Vector prev = x;
        for (const PathLeg& leg : ub.path.legs) {
            CHECK(dist(leg.from, prev) == 0.0);
            if (leg.road_index >= 0) {
                const Line& line = s.roads[static_cast<std::size_t>(leg.road_index)].line;
                CHECK(point_line_distance(leg.from, line) < 1e-9);
                CHECK(point_line_distance(leg.to, line) < 1e-9);
            } else {
                CHECK(leg.duration ==
                      Catch::Approx(dist(leg.from, leg.to) / cfg.epsilon).epsilon(1e-12));
            }
            total += leg.duration;
            prev = leg.to;
        }
        CHECK(dist(prev, y) == 0.0);
        CHECK(ub.path.total_time == Catch::Approx(total).epsilon(1e-12));
    }
}

TEST_CASE("paths brushing the window edge are flagged") {
    const WindowSpec win(2, 3.0, Vector::zero(2), 1.0, 0.25);
    const ProcessSample s = sample_process(95, win);
    const SolverConfig cfg = config_for(0.25);
    const UpperBound central = t_eps_upper(s, Vector{0.1, 0.0}, Vector{-0.1, 0.1}, cfg);
    CHECK_FALSE(central.window_suspect);
    const UpperBound edge = t_eps_upper(s, Vector{0.85, 0.0}, Vector{0.9, 0.15}, cfg);
    CHECK(edge.window_suspect);
}

TEST_CASE("graph size respects the construction bound") {
    const WindowSpec win(2, 3.0, Vector::zero(2), 1.0, 0.3);
    const ProcessSample s = sample_process(97, win);
    SolverConfig cfg = config_for(0.3);
    cfg.ingest_recursive_junctions = false;
    const TransferGraph g = build_transfer_graph(s, Vector{0.1, 0.0}, Vector{-0.2, 0.1}, cfg);
    const std::size_t n = s.roads.size();
    const std::size_t ladder = 1 + 2 * static_cast<std::size_t>(cfg.candidate_depth);
    CHECK(g.nodes.size() <= 2 + n * (n + 1) * ladder);
}

TEST_CASE("solves are deterministic") {
    const WindowSpec win(2, 3.0, Vector::zero(2), 1.2, 0.2);
    const ProcessSample s = sample_process(99, win);
    const SolverConfig cfg = config_for(0.2);
    const Vector x{0.3, -0.1}, y{-0.25, 0.3};
    const UpperBound a = t_eps_upper(s, x, y, cfg);
    const UpperBound b = t_eps_upper(s, x, y, cfg);
    CHECK(a.time == b.time);
    REQUIRE(a.path.legs.size() == b.path.legs.size());
    for (std::size_t i = 0; i < a.path.legs.size(); ++i)
        CHECK(a.path.legs[i].duration == b.path.legs[i].duration);
}

TEST_CASE("refine_path edge cases") {
    ProcessSample s = empty_sample(5.0, 0.01);
    s.roads.push_back(make_road(0.0, 0.0, 1.0, 0.0, 2.0));
    const Vector x{0.0, 0.0}, y{1.0, 0.0};
    const PathSolution hop = refine_path(s, {}, x, y, 0.5);
    REQUIRE(hop.legs.size() == 1);
    CHECK(hop.total_time == Catch::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(refine_path(s, {3}, x, y, 0.5), std::invalid_argument);
    const std::vector<double> bad_init{0.0};
    CHECK_THROWS_AS(refine_path(s, {0}, x, y, 0.5, 1e-10, 40, &bad_init),
                    std::invalid_argument);
}

TEST_CASE("path dump renders one leg per line") {
    ProcessSample s = empty_sample(5.0, 0.01);
    s.roads.push_back(make_road(0.0, 0.0, 1.0, 0.0, 2.0));
    const UpperBound ub = t_eps_upper(s, Vector{-0.5, 0.0}, Vector{1.5, 0.0}, config_for(0.01));
    std::ostringstream os;
    write_path(os, ub.path);
    const std::string text = os.str();
    CHECK(text.find("road 0") != std::string::npos);
    std::size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    CHECK(lines == ub.path.legs.size());
}

TEST_CASE("solver tracks the brute-force oracle on small configurations") {
    struct Case {
        ProcessSample sample;
        Vector x, y;
        double eps;
    };
    std::vector<Case> cases;
    {
        ProcessSample s = empty_sample(6.0, 0.5);
        s.roads.push_back(make_road(0.5, -1.0, 0.0, 1.0, 6.0));
        cases.push_back({s, Vector{0.0, 0.0}, Vector{1.0, 0.0}, 0.5});
    }
    {
        ProcessSample s = empty_sample(6.0, 0.5);
        s.roads.push_back(make_road(0.0, 0.2, 1.0, 0.0, 8.0));
        s.roads.push_back(make_road(1.0, -0.3, 0.0, 1.0, 5.0));
        cases.push_back({s, Vector{0.0, 0.0}, Vector{1.2, -0.1}, 0.5});
    }
    {
        ProcessSample s = empty_sample(6.0, 0.4);
        s.roads.push_back(make_road(0.0, 0.3, 1.0, 0.0, 12.0));
        s.roads.push_back(make_road(0.8, 0.0, 0.0, 1.0, 9.0));
        s.roads.push_back(make_road(0.0, -0.4, 1.0, 0.25, 7.0));
        cases.push_back({s, Vector{-0.4, 0.0}, Vector{1.4, 0.3}, 0.4});
    }
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const Case& c = cases[i];
        const double oracle = reference::brute_force_time(c.sample, c.x, c.y, c.eps, 3);
        const double solved = t_eps_upper(c.sample, c.x, c.y, config_for(c.eps)).time;
        INFO("case " << i);
        CHECK(std::abs(solved - oracle) / oracle < 1e-3);
        // the oracle grid bottoms out near 1e-8, so allow it that much slack
        CHECK(solved > oracle - 1e-6);
    }
}
