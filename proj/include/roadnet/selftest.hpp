#pragma once
// Verification battery shared by the verify subcommand and the acceptance
// runner. Each check is a pure function of its size parameters (defaults are
// the acceptance sizes) and returns a pass flag plus the measured numbers,
// so a failure always prints something actionable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "roadnet/estimators.hpp"
#include "roadnet/reference.hpp"

namespace roadnet {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

namespace selftest {

namespace detail {

inline std::string fmt(const char* spec, ...) {
    char buf[512];
    va_list args;
    va_start(args, spec);
    std::vsnprintf(buf, sizeof(buf), spec, args);
    va_end(args);
    return std::string(buf);
}

inline Vector random_in_disc(RandomStream& g, double radius) {
    for (;;) {
        const double a = uniform(g, -1.0, 1.0);
        const double b = uniform(g, -1.0, 1.0);
        if (a * a + b * b <= 1.0) return Vector{a * radius, b * radius};
    }
}

inline SolverConfig solver_for(double epsilon) {
    SolverConfig cfg;
    cfg.epsilon = epsilon;
    return cfg;
}

}  // namespace detail

// Re-canonicalizing a line, or canonicalizing any other parametrization of
// the same line, must give the identical representative with the anchor
// perpendicular to the direction.
inline CheckResult geom_canonicalization(int n_trials = 300) {
    RandomStream g(derive_seed(9000, 1));
    long violations = 0;
    double worst = 0.0;
    for (int trial = 0; trial < n_trials; ++trial) {
        const Vector p{uniform(g, -5.0, 5.0), uniform(g, -5.0, 5.0)};
        const Vector u = sample_direction(g, 2);
        const Line a = canonicalize_line(p, u);
        const Line b = canonicalize_line(p + uniform(g, -7.0, 7.0) * u, -1.0 * u);
        const Line c = canonicalize_line(a.anchor, a.direction);
        double err = std::max(dist(a.anchor, b.anchor), dist(a.direction, b.direction));
        err = std::max({err, dist(a.anchor, c.anchor), dist(a.direction, c.direction)});
        err = std::max(err, std::fabs(dot(a.anchor, a.direction)));
        err = std::max(err, std::fabs(norm(a.direction) - 1.0));
        worst = std::max(worst, err);
        if (!(err <= 1e-9)) ++violations;
    }
    CheckResult res;
    res.name = "line canonical form";
    res.pass = violations == 0;
    res.detail = detail::fmt("%d trials, worst deviation %.3g (need <= 1e-9)", n_trials, worst);
    return res;
}

// Road counts through the unit window at v0 = 1 are Poisson with mean 1.
inline CheckResult road_count_law(long n_samples = 10000) {
    const WindowSpec win(2, 3.0, Vector::zero(2), 1.0, 1.0);
    std::vector<double> counts;
    counts.reserve((std::size_t)n_samples);
    for (long i = 0; i < n_samples; ++i)
        counts.push_back((double)sample_process(derive_seed(9001, i), win).roads.size());
    const double mean = mean_of(counts);
    const double var = variance_of(counts);
    CheckResult res;
    res.name = "road count law";
    res.pass = mean >= 0.97 && mean <= 1.03 && var >= 0.9 && var <= 1.1;
    res.detail = detail::fmt("mean %.4f (need [0.97,1.03]), variance %.4f (need [0.9,1.1]), n=%ld", mean, var,
                             n_samples);
    return res;
}

// Speed marks are Pareto: P(V > v) = v^-(gamma-1) at v0 = 1.
inline CheckResult pareto_speed_law(int n_batches = 10, long per_batch = 5000) {
    const double gamma = 3.0;
    const WindowSpec win(2, gamma, Vector::zero(2), 25.0, 1.0);
    int passes = 0;
    double total = 0.0;
    long count = 0;
    for (int b = 0; b < n_batches; ++b) {
        std::vector<double> speeds;
        speeds.reserve((std::size_t)per_batch);
        for (long i = 0; (long)speeds.size() < per_batch; ++i) {
            const ProcessSample s = sample_process(derive_seed(9002, b * 1000000L + i), win);
            for (const Road& r : s.roads) {
                speeds.push_back(r.speed);
                if ((long)speeds.size() == per_batch) break;
            }
        }
        for (double v : speeds) total += v;
        count += per_batch;
        const KsResult ks = ks_test(std::move(speeds),
                                    [](double v) { return v < 1.0 ? 0.0 : 1.0 - 1.0 / (v * v); });
        if (ks.p_value >= 0.01) ++passes;
    }
    const double mean = total / (double)count;
    CheckResult res;
    res.name = "speed mark law";
    res.pass = passes >= (n_batches * 8 + 9) / 10 && mean >= 1.8 && mean <= 2.2;
    res.detail = detail::fmt("KS 1%% passed %d/%d batches of %ld (need >= %d), mean %.4f (need [1.8,2.2])",
                             passes, n_batches, per_batch, (n_batches * 8 + 9) / 10, mean);
    return res;
}

// The fastest speed through B(x, r) follows the Frechet-type law
// P(V <= u) = exp(-r^(d-1) u^-(gamma-1)).
inline CheckResult ball_speed_law(int n_batches = 10, long per_batch = 5000) {
    const WindowSpec win(2, 3.0, Vector::zero(2), 1.0, 0.01);
    int passes = 0;
    for (int b = 0; b < n_batches; ++b) {
        std::vector<double> maxima;
        maxima.reserve((std::size_t)per_batch);
        for (long i = 0; i < per_batch; ++i) {
            const ProcessSample s = sample_process(derive_seed(9003, b * 1000000L + i), win);
            double v = win.v0;
            for (const Road& r : s.roads) v = std::max(v, r.speed);
            maxima.push_back(v);
        }
        const KsResult ks = ks_test(std::move(maxima),
                                    [](double u) { return u <= 0.0 ? 0.0 : std::exp(-1.0 / (u * u)); });
        if (ks.p_value >= 0.01) ++passes;
    }
    CheckResult res;
    res.name = "ball speed law";
    res.pass = passes >= (n_batches * 8 + 9) / 10;
    res.detail = detail::fmt("KS 1%% passed %d/%d batches of %ld (need >= %d)", passes, n_batches, per_batch,
                             (n_batches * 8 + 9) / 10);
    return res;
}

// Shared-terminal solves must form a genuine metric: zero self distance,
// symmetric, triangle-consistent.
inline CheckResult metric_axioms(int n_samples = 10, int n_triples = 100) {
    const WindowSpec win(2, 3.0, Vector::zero(2), 1.0, 0.15);
    const SolverConfig cfg = detail::solver_for(0.15);
    long self_bad = 0, sym_bad = 0, tri_bad = 0, triples = 0;
    double worst_sym = 0.0, worst_tri = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const ProcessSample s = sample_process(derive_seed(9004, k), win);
        RandomStream g(derive_seed(9004, 1000 + k));
        std::vector<Vector> terms;
        for (int i = 0; i < 10; ++i) terms.push_back(detail::random_in_disc(g, 0.55));
        const PairwiseTimes mat = pairwise_times(s, terms, cfg);
        const int T = mat.n;
        for (int i = 0; i < T; ++i)
            if (mat.at(i, i) != 0.0) ++self_bad;
        for (int i = 0; i < T; ++i)
            for (int j = i + 1; j < T; ++j) {
                const double gap = std::fabs(mat.at(i, j) - mat.at(j, i));
                const double rel = gap / std::max(1.0, mat.at(i, j));
                worst_sym = std::max(worst_sym, rel);
                if (rel > 1e-9) ++sym_bad;
            }
        int used = 0;
        for (int i = 0; i < T && used < n_triples; ++i)
            for (int j = i + 1; j < T && used < n_triples; ++j)
                for (int l = j + 1; l < T && used < n_triples; ++l) {
                    ++used;
                    ++triples;
                    const double ij = mat.at(i, j), jl = mat.at(j, l), il = mat.at(i, l);
                    const double slack1 = il - (ij + jl);
                    const double slack2 = ij - (il + jl);
                    const double slack3 = jl - (ij + il);
                    const double scale = std::max(1.0, std::max(ij, std::max(jl, il)));
                    const double worst = std::max(slack1, std::max(slack2, slack3)) / scale;
                    worst_tri = std::max(worst_tri, worst);
                    if (worst > 1e-9) ++tri_bad;
                }
    }
    CheckResult res;
    res.name = "metric axioms";
    res.pass = self_bad == 0 && sym_bad == 0 && tri_bad == 0;
    res.detail = detail::fmt(
        "%d samples, %ld triples: self!=0 %ld, asymmetry>1e-9 %ld (worst %.2g), triangle>1e-9 %ld (worst %.2g)",
        n_samples, triples, self_bad, sym_bad, worst_sym, tri_bad, worst_tri);
    return res;
}

// Certificate <= solver upper bound <= recursive upper bound on every pair.
inline CheckResult bound_sandwich(int n_samples = 10, int n_pairs = 100) {
    const WindowSpec win(2, 3.0, Vector::zero(2), 1.0, 0.15);
    const SolverConfig cfg = detail::solver_for(0.15);
    long lower_bad = 0, upper_bad = 0;
    double worst = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const ProcessSample s = sample_process(derive_seed(9005, k), win);
        const CoreGraph core = build_core_graph(s, cfg);
        RandomStream g(derive_seed(9005, 1000 + k));
        for (int p = 0; p < n_pairs; ++p) {
            const Vector x = detail::random_in_disc(g, 0.5);
            const Vector y = detail::random_in_disc(g, 0.5);
            const double lc = lower_certificate(s, x, y, cfg.epsilon, 4);
            const double ub = t_eps_upper_with_core(s, core, x, y, cfg).time;
            const double ku = kendall_recursive_upper(s, x, y, 1.0 / 3.0, 12, cfg.epsilon).first;
            if (lc > ub * (1.0 + 1e-9) + 1e-12) {
                ++lower_bad;
                worst = std::max(worst, (lc - ub) / std::max(ub, 1e-300));
            }
            if (ub > ku * (1.0 + 1e-9) + 1e-12) {
                ++upper_bad;
                worst = std::max(worst, (ub - ku) / std::max(ku, 1e-300));
            }
        }
    }
    CheckResult res;
    res.name = "bound sandwich";
    res.pass = lower_bad == 0 && upper_bad == 0;
    res.detail = detail::fmt(
        "%d samples x %d pairs: certificate>solver %ld, solver>recursive %ld (worst rel excess %.2g)", n_samples,
        n_pairs, lower_bad, upper_bad, worst);
    return res;
}

namespace detail {

struct OracleCase {
    std::vector<Road> roads;
    Vector x, y;
    double epsilon;
};

inline Road road(double ax, double ay, double dx, double dy, double speed) {
    return Road{canonicalize_line(Vector{ax, ay}, Vector{dx, dy}), speed};
}

inline std::vector<OracleCase> oracle_cases() {
    std::vector<OracleCase> cases;
    // one road, terminals on opposite sides
    cases.push_back({{road(0, 0, 1, 0, 4.0)}, Vector{0.0, -0.3}, Vector{0.7, 0.2}, 0.5});
    // one diagonal road, terminals close to it
    cases.push_back({{road(0, 0, 1, 1, 10.0)}, Vector{-0.7, -0.68}, Vector{0.8, 0.82}, 0.3});
    // one barely useful road: speed close to the hop speed
    cases.push_back({{road(0, 0.1, 1, 0, 0.6)}, Vector{-0.5, -0.2}, Vector{0.6, 0.3}, 0.4});
    // terminals exactly on a single road
    cases.push_back({{road(0, 0, 1, 0, 5.0)}, Vector{-0.4, 0.0}, Vector{0.9, 0.0}, 0.3});
    // short off-road pair where the straight hop wins
    cases.push_back({{road(0, 0.5, 1, 0, 3.0), road(0.5, 0, 0, 1, 2.0)}, Vector{-0.06, -0.05},
                     Vector{0.05, 0.04}, 0.5});
    // two parallel roads, transfer across the gap
    cases.push_back({{road(0, 0, 1, 0, 3.0), road(0, 0.5, 1, 0, 8.0)}, Vector{-0.6, 0.0}, Vector{0.7, 0.5},
                     0.25});
    // crossing roads, terminals on different arms
    cases.push_back({{road(0, 0, 1, 0.2, 5.0), road(0, 0, -0.3, 1, 2.0)}, Vector{-0.6, -0.12},
                     Vector{-0.2, 0.65}, 0.3});
    // crossing roads, both terminals off-road
    cases.push_back({{road(0.1, 0, 1, 0.4, 6.0), road(-0.1, 0.1, 0.2, -1, 2.5)}, Vector{-0.55, 0.3},
                     Vector{0.6, -0.35}, 0.5});
    // close parallel pair bridged by walking
    cases.push_back({{road(0, 0, 1, 0, 6.0), road(0, -0.3, 1, 0, 6.0)}, Vector{-0.5, -0.15},
                     Vector{0.6, -0.15}, 0.45});
    // ladder of three parallel roads
    cases.push_back({{road(0, 0, 1, 0, 2.0), road(0, 0.4, 1, 0, 9.0), road(0, 0.8, 1, 0, 3.0)},
                     Vector{-0.4, -0.1}, Vector{0.5, 0.9}, 0.2});
    // triangle circuit: two crossings worth taking
    cases.push_back({{road(0, 0, 1, 0, 2.0), road(0.6, 0, 0, 1, 4.0), road(-0.1, -0.1, 1, 0.9, 7.0)},
                     Vector{-0.7, -0.25}, Vector{0.75, 0.8}, 0.35});
    // three roads through nearly one point, widely different speeds
    cases.push_back({{road(0, 0, 1, 0, 1.5), road(0.02, 0, 0.1, 1, 5.0), road(-0.02, 0.01, 1, -1, 12.0)},
                     Vector{-0.8, 0.7}, Vector{0.7, -0.6}, 0.25});
    return cases;
}

}  // namespace detail

// The production solver must track a brute-force grid oracle on small
// hand-built configurations.
inline CheckResult oracle_equivalence(int n_cases = 12) {
    const std::vector<detail::OracleCase> cases = detail::oracle_cases();
    const int use = std::min<int>(n_cases, (int)cases.size());
    long bad = 0;
    double worst = 0.0;
    for (int i = 0; i < use; ++i) {
        const detail::OracleCase& c = cases[(std::size_t)i];
        double v_min = c.epsilon;
        for (const Road& r : c.roads) v_min = std::min(v_min, r.speed);
        ProcessSample s;
        s.window = WindowSpec(2, 3.0, Vector::zero(2), 2.0, 0.9 * v_min);
        s.roads = c.roads;
        const double oracle = reference::brute_force_time(s, c.x, c.y, c.epsilon, 3);
        const double solved = t_eps_upper(s, c.x, c.y, detail::solver_for(c.epsilon)).time;
        const double rel = std::fabs(solved - oracle) / oracle;
        worst = std::max(worst, rel);
        if (!(rel <= 1e-3) || solved < oracle - 1e-6) ++bad;
    }
    CheckResult res;
    res.name = "oracle equivalence";
    res.pass = bad == 0;
    res.detail = detail::fmt("%d hand-built configurations, %ld outside 1e-3 relative (worst %.2g)", use, bad,
                             worst);
    return res;
}

// On a fixed transfer graph, times are nondecreasing as the hop speed drops.
inline CheckResult epsilon_monotonicity(int n_pairs = 50) {
    const WindowSpec win(2, 3.0, Vector::zero(2), 0.7, 0.05);
    // monotonicity is a property of re-costing one assembled graph, so a lean
    // assembly keeps the check honest at a fraction of the cost
    SolverConfig cfg = detail::solver_for(0.05);
    cfg.hop_neighbors = 8;
    cfg.candidate_depth = 1;
    cfg.refine_rounds = 1;
    const ProcessSample s = sample_process(derive_seed(9007, 0), win);
    const CoreGraph core = build_core_graph(s, cfg);
    RandomStream g(derive_seed(9007, 1));
    long violations = 0;
    double worst = 0.0;
    for (int p = 0; p < n_pairs; ++p) {
        const Vector x = detail::random_in_disc(g, 0.4);
        const Vector y = detail::random_in_disc(g, 0.4);
        const TransferGraph graph = assemble_transfer_graph(s, core, {x, y}, cfg);
        const double t_coarse = transfer_graph_time(graph, 0.2);
        const double t_mid = transfer_graph_time(graph, 0.1);
        const double t_fine = transfer_graph_time(graph, 0.05);
        if (t_mid < t_coarse - cfg.refine_tol) ++violations;
        if (t_fine < t_mid - cfg.refine_tol) ++violations;
        worst = std::max(worst, std::max(t_coarse - t_mid, t_mid - t_fine));
    }
    CheckResult res;
    res.name = "epsilon monotonicity";
    res.pass = violations == 0;
    res.detail = detail::fmt("%d pairs at eps 0.2/0.1/0.05: %ld drops beyond refine_tol (worst gap %.2g)",
                             n_pairs, violations, worst);
    return res;
}

// Roads at or below the hop speed are dead weight: deleting them must not
// move the solver output.
inline CheckResult truncation_exactness(int n_pairs = 50) {
    const double eps = 0.2;
    const WindowSpec win(2, 3.0, Vector::zero(2), 1.2, 0.1);
    const SolverConfig cfg = detail::solver_for(eps);
    const ProcessSample full = sample_process(derive_seed(9008, 0), win);
    ProcessSample trimmed;
    trimmed.window = WindowSpec(2, 3.0, Vector::zero(2), 1.2, eps);
    trimmed.seed = full.seed;
    long removed = 0;
    for (const Road& r : full.roads) {
        if (r.speed > eps) trimmed.roads.push_back(r);
        else ++removed;
    }
    RandomStream g(derive_seed(9008, 1));
    long violations = 0;
    double worst = 0.0;
    for (int p = 0; p < n_pairs; ++p) {
        const Vector x = detail::random_in_disc(g, 0.6);
        const Vector y = detail::random_in_disc(g, 0.6);
        const double a = t_eps_upper(full, x, y, cfg).time;
        const double b = t_eps_upper(trimmed, x, y, cfg).time;
        worst = std::max(worst, std::fabs(a - b));
        if (std::fabs(a - b) > cfg.refine_tol) ++violations;
    }
    CheckResult res;
    res.name = "truncation exactness";
    res.pass = violations == 0;
    res.detail = detail::fmt("%ld roads at speed <= eps deleted, %d pairs: %ld moved beyond refine_tol (worst %.2g)",
                             removed, n_pairs, violations, worst);
    return res;
}

// Monte Carlo probabilities of nested fast-ball events against the closed
// form bounds, across a battery of scale/speed ladders.
inline CheckResult multiscale_battery(long n_samples = 100000) {
    struct Setup {
        int d;
        double gamma;
        std::vector<double> r_seq, v_seq;
        int n, K;
    };
    const std::vector<Setup> setups = {
        {2, 3.0, {1.0}, {0.5}, 0, 0},
        {2, 3.0, {1.0, 0.5}, {0.8, 0.4}, 0, 1},
        {2, 3.0, {1.0, 0.5, 0.25}, {1.2, 0.6, 0.3}, 0, 2},
        {2, 3.0, {1.0, 0.5, 0.25}, {1.2, 0.6, 0.3}, 1, 2},
        {2, 3.0, {2.0, 1.0}, {0.5, 0.25}, 0, 1},
        {2, 3.0, {1.0, 0.6, 0.36}, {2.0, 1.0, 0.5}, 2, 2},
        {3, 4.0, {1.0, 0.5}, {1.0, 0.5}, 0, 1},
        {3, 4.0, {1.0}, {0.8}, 0, 0},
        {2, 3.0, {1.5, 1.0, 0.7, 0.5}, {1.6, 0.9, 0.5, 0.3}, 1, 3},
        {2, 3.0, {1.0, 0.8}, {1.25, 1.0}, 0, 1},
    };
    int upper_ok = 0, lower_ok = 0;
    std::string first_bad;
    for (std::size_t i = 0; i < setups.size(); ++i) {
        const Setup& su = setups[i];
        MultiscaleConfig cfg;
        cfg.d = su.d;
        cfg.gamma = su.gamma;
        cfg.r_seq = su.r_seq;
        cfg.v_seq = su.v_seq;
        cfg.n = su.n;
        cfg.K = su.K;
        cfg.n_samples = n_samples;
        cfg.master_seed = derive_seed(9009, (long)i);
        const MultiscaleResult res = multiscale_mc_check(cfg);
        if (res.upper_ok) ++upper_ok;
        if (res.lower_ok) ++lower_ok;
        if ((!res.upper_ok || !res.lower_ok) && first_bad.empty())
            first_bad = detail::fmt(" (first failure: setup %zu, estimate %.4g, bounds [%.4g, %.4g], se %.2g)", i,
                                    res.estimate, res.lower_bound, res.upper_bound, res.std_err);
    }
    CheckResult res;
    res.name = "multiscale bounds";
    res.pass = upper_ok == (int)setups.size() && lower_ok == (int)setups.size();
    res.detail = detail::fmt("%zu ladders x %ld samples: upper bound held %d, lower bound held %d%s",
                             setups.size(), n_samples, upper_ok, lower_ok, first_bad.c_str());
    return res;
}

// The time-to-distance quotient along a road recovers the reciprocal speed.
inline CheckResult speed_recovery(int n_random = 10) {
    const std::vector<double> h_list = {1e-4, 3e-4, 1e-3};
    long bad = 0;
    double worst = 0.0;
    std::string note;

    {
        ProcessSample s;
        s.window = WindowSpec(2, 3.0, Vector::zero(2), 2.0, 0.25);
        s.roads.push_back(detail::road(0, 0, 1, 0, 4.0));
        const double est = recover_speed(s, Vector{0.2, 0.0}, h_list, detail::solver_for(0.25));
        worst = std::max(worst, std::fabs(est - 0.25));
        if (std::fabs(est - 0.25) > 1e-6) {
            ++bad;
            note += detail::fmt(" single-road est %.8f vs 0.25;", est);
        }
    }
    {
        ProcessSample s;
        s.window = WindowSpec(2, 3.0, Vector::zero(2), 2.0, 0.25);
        s.roads.push_back(detail::road(0, 0, 1, 0, 3.0));
        s.roads.push_back(detail::road(0, 0, 0.5, 1, 7.0));
        const double at_cross = recover_speed(s, Vector{0.0, 0.0}, h_list, detail::solver_for(0.25));
        if (std::fabs(at_cross - 1.0 / 7.0) > 1e-6) {
            ++bad;
            note += detail::fmt(" crossing est %.8f vs %.8f;", at_cross, 1.0 / 7.0);
        }
        const double on_slow = recover_speed(s, Vector{0.8, 0.0}, h_list, detail::solver_for(0.25));
        if (std::fabs(on_slow - 1.0 / 3.0) > 1e-6) {
            ++bad;
            note += detail::fmt(" slow-arm est %.8f vs %.8f;", on_slow, 1.0 / 3.0);
        }
        worst = std::max(worst, std::max(std::fabs(at_cross - 1.0 / 7.0), std::fabs(on_slow - 1.0 / 3.0)));
    }

    const WindowSpec win(2, 3.0, Vector::zero(2), 1.0, 0.12);
    const SolverConfig cfg = detail::solver_for(0.12);
    RandomStream g(derive_seed(9010, 1));
    int tested = 0;
    for (long k = 0; tested < n_random && k < 40; ++k) {
        const ProcessSample s = sample_process(derive_seed(9010, 100 + k), win);
        if (s.roads.empty()) continue;
        const Road& r = s.roads[(std::size_t)(k % (long)s.roads.size())];
        const Vector x = point_at(r.line, uniform(g, -0.3, 0.3));
        if (dist(x, Vector::zero(2)) > 0.6) continue;
        double v_here = 0.0;
        for (const Road& other : s.roads)
            if (point_line_distance(x, other.line) <= 1e-9) v_here = std::max(v_here, other.speed);
        const double est = recover_speed(s, x, h_list, cfg);
        const double rel = std::fabs(est * v_here - 1.0);
        worst = std::max(worst, rel);
        if (rel > 0.05) ++bad;
        ++tested;
    }
    CheckResult res;
    res.name = "speed recovery";
    res.pass = bad == 0;
    res.detail = detail::fmt("hand cases + %d random on-road points: %ld outside tolerance (worst %.2g)%s",
                             tested, bad, worst, note.c_str());
    return res;
}

// Collapse of rescaled connection times onto the unit-scale law, plus a
// power check that a wrong exponent is rejected.
inline CheckResult scaling_collapse(int n_batches = 10, int n_per_side = 1000) {
    int collapse_pass = 0, control_reject = 0;
    for (int b = 0; b < n_batches; ++b) {
        ScalingConfig cfg;
        cfg.n = n_per_side;
        cfg.master_seed = derive_seed(9011, b);
        const ScalingResult good = scaling_ks(cfg);
        if (good.p_value >= 0.01) ++collapse_pass;
        cfg.time_exponent_override = 0.35;
        const ScalingResult wrong = scaling_ks(cfg);
        if (wrong.p_value < 0.01) ++control_reject;
    }
    CheckResult res;
    res.name = "scaling collapse";
    const int need_pass = (n_batches * 7 + 9) / 10;
    const int need_reject = (n_batches * 8 + 9) / 10;
    res.pass = collapse_pass >= need_pass && control_reject >= need_reject;
    res.detail = detail::fmt(
        "true exponent: KS 1%% passed %d/%d (need >= %d); wrong exponent 0.35 rejected %d/%d (need >= %d)",
        collapse_pass, n_batches, need_pass, control_reject, n_batches, need_reject);
    return res;
}

// Paired growth curves of metric-ball volume around a typical point and
// around a point planted on a nearby fast road. Pairing both curves on the
// same realization and dropping samples whose field cannot vouch for the
// whole fit window keeps the comparison free of survivorship artifacts. The
// on-road curve must be flatter in every ensemble, and the pooled slopes
// must land in the expected bands.
inline CheckResult volume_ordering(int n_ensembles = 10, int n_samples = 32) {
    const std::vector<double> t_list = {0.35, 0.45, 0.55, 0.65, 0.77, 0.90};
    const double fit_lo = 0.44, fit_hi = 0.78;
    const double window_top = 0.77;
    const double eps = 0.055, R = 2.4, half = 1.35, search = 0.36;
    const int grid_n = 191;
    const WindowSpec win(2, 3.0, Vector::zero(2), R, eps);
    SolverConfig lean = detail::solver_for(eps);
    lean.hop_neighbors = 8;
    lean.candidate_depth = 0;
    lean.refine_rounds = 1;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    auto row_of = [&](const DistanceField& f) {
        std::vector<double> row(t_list.size(), nan);
        for (std::size_t k = 0; k < t_list.size(); ++k) {
            bool contaminated = false;
            const double v = ball_volume(f, t_list[k], &contaminated);
            if (!contaminated) row[k] = v;
        }
        return row;
    };
    auto fit_of = [&](const std::vector<std::vector<double>>& rows) {
        std::vector<CurvePoint> pts;
        for (std::size_t k = 0; k < t_list.size(); ++k) {
            double sum = 0.0;
            long n = 0;
            for (const auto& r : rows)
                if (!std::isnan(r[k])) {
                    sum += r[k];
                    ++n;
                }
            pts.push_back(CurvePoint{t_list[k], n > 0 ? sum / (double)n : nan, 0.0, n});
        }
        return fit_exponent(pts, fit_lo, fit_hi).slope;
    };

    int ordered = 0;
    long drop_typical = 0, drop_road = 0, total = 0;
    std::vector<std::vector<double>> pool_typical, pool_road;
    std::string per_ens;
    for (int e = 0; e < n_ensembles; ++e) {
        std::vector<std::vector<double>> ens_typical, ens_road;
        for (int i = 0; i < n_samples; ++i) {
            const ProcessSample s =
                sample_process(derive_seed(24601, (std::int64_t)e * 100000 + i), win);
            const CoreGraph core = build_core_graph(s, lean);
            ++total;
            GridSpec grid;
            grid.lo = Vector{-half, -half};
            grid.hi = Vector{half, half};
            grid.nx = grid.ny = grid_n;
            const DistanceField typical =
                distance_field_with_core(s, core, Vector::zero(2), grid, lean);
            if (typical.boundary_reach > window_top) {
                const auto row = row_of(typical);
                ens_typical.push_back(row);
                pool_typical.push_back(row);
            } else {
                ++drop_typical;
            }

            int pick = -1;
            for (std::size_t j = 0; j < s.roads.size(); ++j) {
                if (point_line_distance(Vector::zero(2), s.roads[j].line) > search) continue;
                if (pick < 0 || s.roads[j].speed > s.roads[(std::size_t)pick].speed)
                    pick = (int)j;
            }
            if (pick < 0) {
                ++drop_road;
                continue;
            }
            const Vector x = project_point(Vector::zero(2), s.roads[(std::size_t)pick].line);
            GridSpec road_grid;
            road_grid.lo = x;
            road_grid.hi = x;
            road_grid.lo[0] -= half;
            road_grid.lo[1] -= half;
            road_grid.hi[0] += half;
            road_grid.hi[1] += half;
            road_grid.nx = road_grid.ny = grid_n;
            const DistanceField on_road = distance_field_with_core(s, core, x, road_grid, lean);
            if (on_road.boundary_reach > window_top) {
                const auto row = row_of(on_road);
                ens_road.push_back(row);
                pool_road.push_back(row);
            } else {
                ++drop_road;
            }
        }
        const double ft = fit_of(ens_typical);
        const double fr = fit_of(ens_road);
        if (fr < ft) ++ordered;
        per_ens += detail::fmt(" %.2f/%.2f", ft, fr);
    }
    const double pooled_typical = fit_of(pool_typical);
    const double pooled_road = fit_of(pool_road);
    const int need = (n_ensembles * 9 + 9) / 10;
    CheckResult res;
    res.name = "volume ordering";
    res.pass = ordered >= need && pooled_typical >= 3.0 && pooled_typical <= 5.0 &&
               pooled_road >= 2.2 && pooled_road <= 3.8;
    res.detail = detail::fmt(
        "on-road flatter in %d/%d ensembles (need >= %d); pooled typical %.3f (need [3.0,5.0]), "
        "on-road %.3f (need [2.2,3.8]); dropped %ld+%ld of %ld; per-ensemble%s",
        ordered, n_ensembles, need, pooled_typical, pooled_road, drop_typical, drop_road, total,
        per_ens.c_str());
    return res;
}

// Probability that two points a unit apart pass the dyadic fast-ball
// certificate at threshold t, as a function of t. Every speed the screen
// consults is at least the banded sampling floor, so the curve is exact for
// the infinite process, and its log-log slope must sit in the expected band
// with no break of monotonicity.
inline CheckResult quick_connection_slope(double fraction = 1.0) {
    const std::vector<double> t_list = {1.0,  0.7071067811865476, 0.5, 0.3535533905932738,
                                        0.25, 0.1767766952966369, 0.125};
    const std::vector<long> n_base = {5000, 10000, 25000, 60000, 150000, 400000, 1000000};
    const int n_scales = 6;
    const double r_min = std::ldexp(1.0, 1 - n_scales);
    const Vector x0 = Vector::zero(2);
    const Vector y0 = Vector::axis(2, 1);
    std::vector<CurvePoint> curve;
    for (std::size_t ti = 0; ti < t_list.size(); ++ti) {
        const double t = t_list[ti];
        const long n = std::max<long>(200, (long)std::llround((double)n_base[ti] * fraction));
        Vector center = y0;
        center[0] *= 0.5;
        center[1] *= 0.5;
        const WindowSpec win(2, 3.0, center, 2.5, r_min / t);
        const std::uint64_t point_seed = derive_seed(31415, (std::int64_t)ti);
        long pass_n = 0;
        for (long i = 0; i < n; ++i) {
            const ProcessSample sample = sample_process(derive_seed(point_seed, i), win);
            bool pass = true;
            for (int j = 0; j < n_scales && pass; ++j) {
                const double r = std::ldexp(1.0, -j);
                const double need = r / t;
                if (fastest_in_ball(sample, x0, r) < need || fastest_in_ball(sample, y0, r) < need)
                    pass = false;
            }
            pass_n += pass;
        }
        const double p = (double)pass_n / (double)n;
        curve.push_back(CurvePoint{t, p, std::sqrt(std::max(0.0, p * (1.0 - p)) / (double)n), n});
    }
    long breaks = 0;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i)
        if (curve[i].value < curve[i + 1].value - 3.0 * (curve[i].std_err + curve[i + 1].std_err))
            ++breaks;
    const ExponentFit fit = fit_exponent(curve, 0.12, 1.01);
    CheckResult res;
    res.name = "connection slope";
    res.pass = fit.slope >= 4.0 && fit.slope <= 8.0 && breaks == 0;
    res.detail = detail::fmt(
        "slope %.3f over t in [1/8,1] (need [4,8]), r2 %.4f, %ld monotonicity breaks beyond 3 sigma; "
        "tail events %ld/%ld",
        fit.slope, fit.r_squared, breaks, (long)std::llround(curve.back().value * (double)curve.back().n),
        curve.back().n);
    return res;
}

// Greedy covering counts of a fixed square must grow strictly faster than
// the Euclidean square law once travel is measured in the road metric, while
// the roadless control reproduces the square law. The scale range sits well
// above the walking floor so the road hierarchy is actually exercised.
inline CheckResult covering_dimension(int n_random = 3) {
    const WindowSpec win(2, 3.0, Vector::zero(2), 1.75, 0.05);
    BoxDimensionConfig cfg;
    cfg.t_scales = {3.2, 2.1, 1.4, 0.95};
    cfg.square_half = 0.75;
    cfg.grid_n = 121;
    cfg.epsilon = 0.05;
    cfg.max_centers = 5000;
    cfg.solver.hop_neighbors = 8;
    cfg.solver.candidate_depth = 0;
    cfg.solver.refine_rounds = 1;

    ProcessSample control = sample_process(derive_seed(9013, 0), win);
    control.roads.clear();
    const double control_slope = box_dimension(control, cfg).fit.slope;

    int above = 0;
    std::string slopes;
    for (int k = 0; k < n_random; ++k) {
        const ProcessSample s = sample_process(derive_seed(9013, 21 + k), win);
        const BoxDimensionResult r = box_dimension(s, cfg);
        if (r.fit.slope > 2.5) ++above;
        slopes += detail::fmt(" %.3f", r.fit.slope);
    }
    CheckResult res;
    res.name = "covering dimension";
    res.pass = above == n_random && std::fabs(control_slope - 2.0) <= 0.1;
    res.detail = detail::fmt("random slopes%s (need each > 2.5), roadless control %.3f (need 2.0 +- 0.1)",
                             slopes.c_str(), control_slope);
    return res;
}

// The invariant battery behind the verify subcommand. quick shrinks the
// expensive checks; full runs acceptance sizes.
inline std::vector<CheckResult> run_battery(bool quick, std::ostream* progress = nullptr) {
    using Runner = CheckResult (*)(bool);
    struct Entry {
        const char* label;
        Runner run;
    };
    const Entry entries[] = {
        {"canonical", [](bool) { return geom_canonicalization(); }},
        {"counts", [](bool) { return road_count_law(); }},
        {"speeds", [](bool q) { return pareto_speed_law(q ? 4 : 10, q ? 2000 : 5000); }},
        {"ball law", [](bool q) { return ball_speed_law(q ? 3 : 10, q ? 1200 : 5000); }},
        {"axioms", [](bool q) { return metric_axioms(q ? 3 : 10, q ? 40 : 100); }},
        {"sandwich", [](bool q) { return bound_sandwich(q ? 3 : 10, q ? 30 : 100); }},
        {"monotone", [](bool q) { return epsilon_monotonicity(q ? 15 : 50); }},
        {"truncation", [](bool q) { return truncation_exactness(q ? 15 : 50); }},
        {"oracle", [](bool q) { return oracle_equivalence(q ? 5 : 12); }},
        {"bounds", [](bool q) { return multiscale_battery(q ? 20000 : 100000); }},
    };
    std::vector<CheckResult> out;
    for (const Entry& e : entries) {
        const auto start = std::chrono::steady_clock::now();
        CheckResult res = e.run(quick);
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (progress)
            (*progress) << (res.pass ? "[PASS] " : "[FAIL] ") << res.name << ": " << res.detail << " ("
                        << detail::fmt("%.1fs", res.seconds) << ")\n"
                        << std::flush;
        out.push_back(std::move(res));
    }
    return out;
}

}  // namespace selftest
}  // namespace roadnet
