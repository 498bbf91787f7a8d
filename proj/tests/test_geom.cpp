#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "roadnet/geom.hpp"
#include "roadnet/stats.hpp"

using namespace roadnet;

namespace {

// signed offset of a line from a point, d = 2 only
double signed_offset(const Vector& x, const Line& l) {
    const Vector q = project_point(x, l);
    const Vector perp{-l.direction[1], l.direction[0]};
    return dot(q - x, perp);
}

}  // namespace

TEST_CASE("canonical line form") {
    SECTION("through the origin") {
        const Line l = canonicalize_line({0, 0}, {1, 0});
        CHECK(l.anchor[0] == Catch::Approx(0.0).margin(1e-15));
        CHECK(l.anchor[1] == Catch::Approx(0.0).margin(1e-15));
        CHECK(l.direction[0] == Catch::Approx(1.0));
    }
    SECTION("horizontal line, foot on the y axis") {
        const Line l = canonicalize_line({3, 5}, {1, 0});
        CHECK(l.anchor[0] == Catch::Approx(0.0).margin(1e-15));
        CHECK(l.anchor[1] == Catch::Approx(5.0));
    }
    SECTION("sign rule flips reversed directions") {
        const Line l = canonicalize_line({1, 1}, {-2, 0});
        CHECK(l.direction[0] == Catch::Approx(1.0));
        CHECK(l.direction[1] == Catch::Approx(0.0).margin(1e-15));
        CHECK(l.anchor[0] == Catch::Approx(0.0).margin(1e-15));
        CHECK(l.anchor[1] == Catch::Approx(1.0));
    }
    SECTION("zero direction rejected") {
        CHECK_THROWS_AS(canonicalize_line({0, 0}, {0, 0}), std::invalid_argument);
    }
    SECTION("idempotent to the bit") {
        RandomStream g(11);
        for (int k = 0; k < 200; ++k) {
            const int d = 2 + static_cast<int>(g() % 3);
            Vector p(d), v(d);
            for (int i = 0; i < d; ++i) {
                p[i] = uniform(g, -50, 50);
                v[i] = uniform(g, -1, 1);
            }
            if (norm(v) < 1e-3) continue;
            const Line a = canonicalize_line(p, v);
            const Line b = canonicalize_line(a.anchor, a.direction);
            for (int i = 0; i < d; ++i) {
                REQUIRE(a.direction[i] == b.direction[i]);
                REQUIRE(a.anchor[i] == b.anchor[i]);
            }
        }
    }
    SECTION("representation-independent up to 1e-12") {
        RandomStream g(12);
        for (int k = 0; k < 200; ++k) {
            const int d = 2 + static_cast<int>(g() % 3);
            Vector p(d), v(d);
            for (int i = 0; i < d; ++i) {
                p[i] = uniform(g, -10, 10);
                v[i] = uniform(g, -1, 1);
            }
            if (norm(v) < 1e-3) continue;
            const Line a = canonicalize_line(p, v);
            // same line, other point, rescaled and flipped direction
            const Line b = canonicalize_line(p + uniform(g, -20, 20) * v,
                                             v * uniform(g, -3, -0.1));
            for (int i = 0; i < d; ++i) {
                CHECK(a.direction[i] == Catch::Approx(b.direction[i]).margin(1e-12));
                CHECK(a.anchor[i] == Catch::Approx(b.anchor[i]).margin(1e-12 * (1 + norm(a.anchor))));
            }
        }
    }
    SECTION("line invariants hold") {
        RandomStream g(13);
        for (int k = 0; k < 500; ++k) {
            const int d = 2 + static_cast<int>(g() % 3);
            Vector p(d), v(d);
            for (int i = 0; i < d; ++i) {
                p[i] = uniform(g, -100, 100);
                v[i] = gaussian(g);
            }
            if (norm(v) < 1e-3) continue;
            const Line l = canonicalize_line(p, v);
            REQUIRE(std::fabs(norm(l.direction) - 1.0) < 1e-12);
            REQUIRE(std::fabs(dot(l.anchor, l.direction)) < 1e-12 * (1 + norm(l.anchor)));
            REQUIRE(point_line_distance(p, l) < 1e-9 * (1 + norm(p)));
        }
    }
}

TEST_CASE("projections and distances") {
    const Line xaxis = canonicalize_line({0, 0}, {1, 0});
    SECTION("drop onto the x axis") {
        const Vector q = project_point({0, 1}, xaxis);
        CHECK(q[0] == Catch::Approx(0.0).margin(1e-15));
        CHECK(q[1] == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("points of the line are fixed") {
        const Vector q = project_point({5, 0}, xaxis);
        CHECK(q[0] == Catch::Approx(5.0));
        CHECK(q[1] == Catch::Approx(0.0).margin(1e-15));
        CHECK(point_line_distance({5, 0}, xaxis) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("offset line") {
        const Line l = canonicalize_line({0, 1}, {1, 0});
        const Vector q = project_point({2, 3}, l);
        CHECK(q[0] == Catch::Approx(2.0));
        CHECK(q[1] == Catch::Approx(1.0));
    }
    SECTION("plain heights") {
        CHECK(point_line_distance({0, 1}, xaxis) == Catch::Approx(1.0));
        CHECK(point_line_distance({3, 4}, xaxis) == Catch::Approx(4.0));
    }
    SECTION("residual is orthogonal to the direction") {
        RandomStream g(21);
        for (int k = 0; k < 200; ++k) {
            const int d = 2 + static_cast<int>(g() % 3);
            Vector p(d), v(d), x(d);
            for (int i = 0; i < d; ++i) {
                p[i] = uniform(g, -10, 10);
                v[i] = gaussian(g);
                x[i] = uniform(g, -10, 10);
            }
            const Line l = canonicalize_line(p, v);
            const Vector q = project_point(x, l);
            REQUIRE(std::fabs(dot(x - q, l.direction)) < 1e-9);
        }
    }
}

TEST_CASE("closest pair of lines") {
    SECTION("crossing axes meet at the origin") {
        const Line l1 = canonicalize_line({0, 0}, {1, 0});
        const Line l2 = canonicalize_line({0, 0}, {0, 1});
        const ClosestPair cp = closest_pair(l1, l2);
        CHECK(cp.gap == Catch::Approx(0.0).margin(1e-12));
        CHECK(dist(cp.a, cp.b) == Catch::Approx(0.0).margin(1e-12));
        CHECK(norm(cp.a) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("parallel lines keep their separation") {
        const Line l1 = canonicalize_line({0, 0}, {1, 0});
        const Line l2 = canonicalize_line({0, 1}, {1, 0});
        const ClosestPair cp = closest_pair(l1, l2);
        CHECK(cp.gap == Catch::Approx(1.0));
    }
    SECTION("skew lines in three dimensions") {
        const Line l1 = canonicalize_line({0, 0, 0}, {1, 0, 0});
        const Line l2 = canonicalize_line({0, 0, 1}, {0, 1, 0});
        const ClosestPair cp = closest_pair(l1, l2);
        CHECK(cp.gap == Catch::Approx(1.0));
        CHECK(norm(cp.a) == Catch::Approx(0.0).margin(1e-12));
        CHECK(cp.b[2] == Catch::Approx(1.0));
    }
}

TEST_CASE("ball volumes and line-measure mass") {
    CHECK(unit_ball_volume(0) == Catch::Approx(1.0));
    CHECK(unit_ball_volume(1) == Catch::Approx(2.0));
    CHECK(unit_ball_volume(2) == Catch::Approx(M_PI));
    CHECK(unit_ball_volume(3) == Catch::Approx(4.0 * M_PI / 3.0));

    CHECK(mu_ball_mass(2, 1.0) == Catch::Approx(2.0));
    CHECK(mu_ball_mass(3, 2.0) == Catch::Approx(4.0 * M_PI));
    CHECK(mu_ball_mass(2, 0.0) == 0.0);
    CHECK(mu_ball_mass(5, 0.0) == 0.0);
}

TEST_CASE("line sampling through a ball") {
    SECTION("sampled lines always meet the ball") {
        RandomStream g(31);
        const Ball b2({0.5, -1.0}, 0.8);
        const Ball b3({1.0, -2.0, 3.0}, 0.7);
        for (int i = 0; i < 20000; ++i) {
            REQUIRE(point_line_distance(b2.center, sample_line_hitting_ball(g, b2)) <=
                    b2.radius * (1 + 1e-12) + 1e-12);
            REQUIRE(point_line_distance(b3.center, sample_line_hitting_ball(g, b3)) <=
                    b3.radius * (1 + 1e-12) + 1e-12);
        }
    }
    SECTION("signed offset uniform on [-1, 1]") {
        RandomStream g(32);
        const Ball b({0, 0}, 1.0);
        const int n = 100000;
        std::vector<double> offs(n);
        for (int i = 0; i < n; ++i) offs[i] = signed_offset(b.center, sample_line_hitting_ball(g, b));
        const double m = mean_of(offs);
        // var of U[-1,1] is 1/3
        CHECK(std::fabs(m) < 3.0 * std::sqrt(1.0 / 3.0 / n));
        const KsResult ks = ks_test(offs, [](double x) { return std::clamp((x + 1.0) / 2.0, 0.0, 1.0); });
        CHECK(ks.p_value > 0.01);
    }
    SECTION("direction angle uniform on the half circle") {
        RandomStream g(33);
        const Ball b({2, 1}, 0.5);
        const int n = 100000;
        std::vector<double> ang(n);
        for (int i = 0; i < n; ++i) {
            const Line l = sample_line_hitting_ball(g, b);
            ang[i] = std::atan2(l.direction[1], l.direction[0]);  // (-pi/2, pi/2]
        }
        const KsResult ks = ks_test(ang, [](double a) {
            return std::clamp((a + M_PI / 2.0) / M_PI, 0.0, 1.0);
        });
        CHECK(ks.p_value > 0.01);
    }
    SECTION("zero radius rejected") {
        RandomStream g(34);
        Ball b({0, 0}, 0.0);
        CHECK_THROWS_AS(sample_line_hitting_ball(g, b), std::invalid_argument);
    }
}

TEST_CASE("two-ball mass estimates") {
    SECTION("identical balls give the full mass exactly") {
        RandomStream g(41);
        const Ball b({0.3, 0.7}, 0.6);
        const MassEstimate e = two_ball_hit_fraction(b, b, 5000, g);
        CHECK(e.estimate == Catch::Approx(mu_ball_mass(2, 0.6)));
        CHECK(e.stderr_ == 0.0);
    }
    SECTION("distant small balls match the quadrature reference") {
        // reference_gen: mass of lines meeting B((0,0),0.1) and B((10,0),0.1)
        const double ref = 0.0012732819911472056;
        RandomStream g(42);
        const MassEstimate e =
            two_ball_hit_fraction(Ball({0, 0}, 0.1), Ball({10, 0}, 0.1), 2000000, g);
        CHECK(std::fabs(e.estimate - ref) <= 4.0 * e.stderr_);
    }
    SECTION("mass decreases with separation") {
        RandomStream g(43);
        const Ball b1({0, 0}, 0.5);
        double prev = 1e300;
        for (double sep : {2.0, 4.0, 8.0, 16.0}) {
            const MassEstimate e = two_ball_hit_fraction(b1, Ball({sep, 0}, 0.5), 400000, g);
            CHECK(e.estimate < prev);
            prev = e.estimate;
        }
    }
    SECTION("estimates scale like r^(d-1)") {
        RandomStream g(44);
        for (int d : {2, 3}) {
            Vector c1 = Vector::zero(d);
            Vector c2 = Vector::zero(d);
            c2[0] = 2.0;
            c2[d - 1] = 0.5;
            const double rho = 2.0;
            const MassEstimate e1 = two_ball_hit_fraction(Ball(c1, 0.3), Ball(c2, 0.4), 400000, g);
            const MassEstimate e2 =
                two_ball_hit_fraction(Ball(c1 * rho, 0.3 * rho), Ball(c2 * rho, 0.4 * rho), 400000, g);
            const double expect = std::pow(rho, d - 1);
            const double sigma = std::sqrt(e1.stderr_ * e1.stderr_ * expect * expect +
                                           e2.stderr_ * e2.stderr_);
            CHECK(std::fabs(e2.estimate - expect * e1.estimate) < 3.0 * sigma);
        }
    }
    SECTION("rigid motions leave the estimate unchanged") {
        RandomStream g(45);
        const Ball b1({0, 0}, 0.4);
        const Ball b2({3, 1}, 0.6);
        const MassEstimate e = two_ball_hit_fraction(b1, b2, 400000, g);
        const double a = 0.83, tx = -4.2, ty = 7.9;
        auto move = [&](const Vector& v) {
            return Vector{std::cos(a) * v[0] - std::sin(a) * v[1] + tx,
                          std::sin(a) * v[0] + std::cos(a) * v[1] + ty};
        };
        const MassEstimate em =
            two_ball_hit_fraction(Ball(move(b1.center), 0.4), Ball(move(b2.center), 0.6), 400000, g);
        const double sigma = std::hypot(e.stderr_, em.stderr_);
        CHECK(std::fabs(e.estimate - em.estimate) < 3.0 * sigma);
    }
    SECTION("bounded ratio against r s / separation") {
        RandomStream g(46);
        double lo = 1e300, hi = 0.0;
        for (int k = 0; k < 20; ++k) {
            const double sep = uniform(g, 1.0, 5.0);
            const double r = sep * uniform(g, 0.2, 0.8);
            const double s = sep * uniform(g, 0.2, 0.8);
            const MassEstimate e =
                two_ball_hit_fraction(Ball({0, 0}, r), Ball({sep, 0}, s), 200000, g);
            const double ratio = e.estimate * sep / (r * s);
            REQUIRE(ratio > 0.1);
            REQUIRE(ratio < 10.0);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        INFO("fitted ratio interval [" << lo << ", " << hi << "]");
        CHECK(lo > 0.0);
    }
}
