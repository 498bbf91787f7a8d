#pragma once
// Monte Carlo experiments over the sampled road process: connection
// probability curves, ball-volume scaling, distributional self-similarity,
// multiscale hitting bounds, correlation decay, covering dimension, and
// local speed recovery. Every experiment is a pure function of its config
// and master seed. Per-sample seeds are derived from the sample index, so
// results are identical no matter how the work is scheduled.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "roadnet/errors.hpp"
#include "roadnet/geom.hpp"
#include "roadnet/metric.hpp"
#include "roadnet/rng.hpp"
#include "roadnet/sampler.hpp"
#include "roadnet/stats.hpp"
#include "roadnet/vec.hpp"

namespace roadnet {

// std_err rather than stderr: <cstdio> claims the latter as a macro.
struct CurvePoint {
    double t = 0.0;
    double value = 0.0;
    double std_err = 0.0;
    long n = 0;
};

struct Exponents {
    double sigma = 0.0;
    double s_star = 0.0;
    double s_lower = 0.0;
    double scale_exp = 0.0;
};

inline Exponents exponents(int d, double gamma) {
    if (d < 2) throw std::invalid_argument("exponents: dimension must be at least 2");
    if (!(gamma > d)) throw std::invalid_argument("exponents: gamma must exceed the dimension");
    const double gd = gamma - d;
    Exponents e;
    e.sigma = (gamma - 1.0) * (d + gamma - 2.0) / gd;
    e.s_star = (gamma - 1.0) * d / gd;
    e.s_lower = e.s_star - (d - 1.0) / gd;
    e.scale_exp = gd / (gamma - 1.0);
    return e;
}

struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    int n_points = 0;
};

// log-log least squares over the points falling in [t_lo, t_hi]; points with
// nonpositive value carry no information on a power law and are dropped
inline ExponentFit fit_exponent(const std::vector<CurvePoint>& points, double t_lo, double t_hi) {
    if (!(t_lo < t_hi)) throw std::invalid_argument("fit_exponent: window must satisfy t_lo < t_hi");
    std::vector<double> xs, ys;
    for (const CurvePoint& p : points) {
        if (p.t < t_lo || p.t > t_hi || !(p.value > 0.0)) continue;
        xs.push_back(std::log(p.t));
        ys.push_back(std::log(p.value));
    }
    if (xs.size() < 3)
        throw std::invalid_argument("fit_exponent: need at least 3 positive points in the window");
    const OlsFit f = ols(xs, ys);
    return ExponentFit{f.slope, f.intercept, f.r_squared, t_lo, t_hi, static_cast<int>(xs.size())};
}

struct ExperimentWarnings {
    long window_suspect = 0;
    long boundary_contaminated = 0;
    long skipped = 0;
};

namespace detail {

inline double binomial_stderr(double successes, double n) {
    if (n <= 0) return 0.0;
    const double p = successes / n;
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
}

// Runs fn(i) for i in [0, n). Each task must write only to its own slot of a
// preallocated buffer; aggregation stays with the caller, so the outcome is
// independent of the worker count.
template <typename Fn>
void for_indexed(long n, int workers, Fn&& fn) {
    if (workers <= 1 || n < 2) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    auto drain = [&] {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int extra = std::min<long>(workers, n) - 1;
    pool.reserve(static_cast<std::size_t>(extra));
    for (int w = 0; w < extra; ++w) pool.emplace_back(drain);
    drain();
    for (std::thread& th : pool) th.join();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// quick connection probability

struct QcpConfig {
    int d = 2;
    double gamma = 3.0;
    std::vector<double> t_list = {1.0, 0.7071067811865476, 0.5, 0.3535533905932738,
                                  0.25, 0.1767766952966369, 0.125};
    std::vector<long> n_per_t = {5000, 10000, 25000, 60000, 150000, 400000, 1000000};
    // hop speed per threshold; empty means epsilon = t / 50, slow enough that a
    // bare hop between the terminals can never register as a connection
    std::function<double(double)> epsilon_rule;
    double window_radius = 2.5;
    // ball-exit screen at radii 1, 1/2, ..., 2^{1-screen_scales} around both
    // terminals; the sampling speed floor is matched to the finest scale, so
    // the screen's verdict is unaffected by the truncation
    int screen_scales = 4;
    std::uint64_t master_seed = 1;
    int workers = 1;
    SolverConfig solver;
};

struct QcpResult {
    std::vector<CurvePoint> upper;  // fraction of samples the solver connects by t
    std::vector<CurvePoint> cert;   // fraction the ball-exit screen cannot rule out
    ExperimentWarnings warnings;
    QcpConfig config;
};

inline QcpResult qcp_curve(const QcpConfig& cfg) {
    if (cfg.d < 2) throw ConfigError("qcp_curve: dimension must be at least 2");
    if (!(cfg.gamma > cfg.d)) throw ConfigError("qcp_curve: gamma must exceed the dimension");
    if (cfg.t_list.empty()) throw ConfigError("qcp_curve: empty t_list");
    if (cfg.n_per_t.size() != cfg.t_list.size() && cfg.n_per_t.size() != 1)
        throw ConfigError("qcp_curve: n_per_t must match t_list or hold a single shared count");
    if (cfg.screen_scales < 1) throw ConfigError("qcp_curve: need at least one screen scale");
    for (double t : cfg.t_list)
        if (!(t > 0.0) || t > 1.0) throw ConfigError("qcp_curve: thresholds must lie in (0, 1]");
    // the screen examines balls of radius up to 1 around terminals half a unit
    // from the window center, so the window must reach past 1.5
    if (!(cfg.window_radius >= 1.5))
        throw ConfigError("qcp_curve: window_radius must be at least 1.5 to cover the screen balls");

    const Vector x0 = Vector::zero(cfg.d);
    const Vector y0 = Vector::axis(cfg.d, cfg.d - 1);
    const double r_min = std::ldexp(1.0, 1 - cfg.screen_scales);

    QcpResult out;
    out.config = cfg;
    for (std::size_t ti = 0; ti < cfg.t_list.size(); ++ti) {
        const double t = cfg.t_list[ti];
        const long n = cfg.n_per_t.size() == 1 ? cfg.n_per_t[0] : cfg.n_per_t[ti];
        if (n < 1) throw ConfigError("qcp_curve: sample counts must be positive");
        const double eps = cfg.epsilon_rule ? cfg.epsilon_rule(t) : t / 50.0;
        if (!(eps > 0.0)) throw ConfigError("qcp_curve: epsilon rule produced a nonpositive value");

        const double v0 = r_min / t;
        Vector center = y0;
        for (int c = 0; c < cfg.d; ++c) center[c] *= 0.5;
        const WindowSpec win(cfg.d, cfg.gamma, center, cfg.window_radius, v0);
        SolverConfig solver = cfg.solver;
        solver.epsilon = eps;
        solver.allow_undersampled = true;

        const std::uint64_t point_seed = derive_seed(cfg.master_seed, static_cast<std::int64_t>(ti));
        // per sample: bit 0 = screen passed, bit 1 = solver connected, bit 2 =
        // the connecting path brushed the window rim
        std::vector<unsigned char> flags(static_cast<std::size_t>(n), 0);
        detail::for_indexed(n, cfg.workers, [&](long i) {
            const ProcessSample sample = sample_process(derive_seed(point_seed, i), win);
            bool pass = true;
            for (int j = 0; j < cfg.screen_scales && pass; ++j) {
                const double r = std::ldexp(1.0, -j);
                const double need = r / t;
                if (need <= eps) continue;  // ball exit by bare hops is fast enough
                if (fastest_in_ball(sample, x0, r) < need ||
                    fastest_in_ball(sample, y0, r) < need)
                    pass = false;
            }
            if (!pass) return;
            unsigned char f = 1;
            const UpperBound ub = t_eps_upper(sample, x0, y0, solver);
            if (ub.time <= t) f |= 2;
            if (ub.window_suspect) f |= 4;
            flags[static_cast<std::size_t>(i)] = f;
        });

        long cert_count = 0, upper_count = 0;
        for (unsigned char f : flags) {
            cert_count += f & 1;
            upper_count += (f >> 1) & 1;
            out.warnings.window_suspect += (f >> 2) & 1;
        }
        const double nn = static_cast<double>(n);
        out.upper.push_back(CurvePoint{t, upper_count / nn,
                                       detail::binomial_stderr(static_cast<double>(upper_count), nn), n});
        out.cert.push_back(CurvePoint{t, cert_count / nn,
                                      detail::binomial_stderr(static_cast<double>(cert_count), nn), n});
    }
    return out;
}

// ---------------------------------------------------------------------------
// ball-volume curves

enum class PointMode { typical, on_road };

struct VolumeConfig {
    int d = 2;
    double gamma = 3.0;
    PointMode mode = PointMode::typical;
    std::vector<double> t_list = {0.15, 0.19, 0.23, 0.29, 0.36, 0.45, 0.56, 0.70, 0.87, 1.08,
                                  1.34, 1.67};
    int n_samples = 40;
    double window_radius = 1.6;
    double v0 = 0.12;
    double epsilon = 0.12;
    double grid_half_extent = 0.7;
    int grid_n = 151;
    // on_road mode picks the fastest road passing within this fraction of the
    // window radius from the center; farther roads would drag the field grid
    // toward the rim where the sample is unreliable
    double on_road_search_fraction = 0.2;
    std::uint64_t master_seed = 1;
    int workers = 1;
    SolverConfig solver;
};

struct VolumeResult {
    std::vector<CurvePoint> points;
    // per_sample[i][k] is the volume for sample i at t_list[k]; NaN marks a
    // boundary-contaminated or skipped measurement
    std::vector<std::vector<double>> per_sample;
    // speed of the road carrying x (on_road mode), NaN for typical or skipped
    std::vector<double> road_speed;
    ExperimentWarnings warnings;
    double crossover = 0.0;  // largest t where the bare-hop disc is >= 10% of the mean
    VolumeConfig config;
};

inline VolumeResult volume_curve(const VolumeConfig& cfg) {
    if (cfg.d != 2) throw ConfigError("volume_curve: raster volumes need d = 2");
    if (!(cfg.gamma > cfg.d)) throw ConfigError("volume_curve: gamma must exceed the dimension");
    if (cfg.t_list.empty() || cfg.n_samples < 1)
        throw ConfigError("volume_curve: need thresholds and at least one sample");
    if (!(std::is_sorted(cfg.t_list.begin(), cfg.t_list.end())))
        throw ConfigError("volume_curve: t_list must be increasing");
    if (cfg.grid_n < 2) throw ConfigError("volume_curve: grid too coarse");
    const double reach = cfg.grid_half_extent * std::sqrt(2.0) +
                         (cfg.mode == PointMode::on_road
                              ? cfg.on_road_search_fraction * cfg.window_radius
                              : 0.0);
    if (!(reach <= cfg.window_radius))
        throw ConfigError("volume_curve: field grid can leave the sampling window; shrink "
                          "grid_half_extent or enlarge window_radius");

    const WindowSpec win(cfg.d, cfg.gamma, Vector::zero(cfg.d), cfg.window_radius, cfg.v0);
    SolverConfig solver = cfg.solver;
    solver.epsilon = cfg.epsilon;
    solver.check_against(win);

    const std::size_t nt = cfg.t_list.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    VolumeResult out;
    out.config = cfg;
    out.per_sample.assign(static_cast<std::size_t>(cfg.n_samples), std::vector<double>(nt, nan));
    out.road_speed.assign(static_cast<std::size_t>(cfg.n_samples), nan);
    std::vector<long> contaminated(static_cast<std::size_t>(cfg.n_samples), 0);
    std::vector<unsigned char> skipped(static_cast<std::size_t>(cfg.n_samples), 0);

    detail::for_indexed(cfg.n_samples, cfg.workers, [&](long i) {
        const ProcessSample sample = sample_process(derive_seed(cfg.master_seed, i), win);
        Vector x = Vector::zero(cfg.d);
        if (cfg.mode == PointMode::on_road) {
            const double search = cfg.on_road_search_fraction * cfg.window_radius;
            int pick = -1;
            for (std::size_t j = 0; j < sample.roads.size(); ++j) {
                if (point_line_distance(x, sample.roads[j].line) > search) continue;
                if (pick < 0 || sample.roads[j].speed > sample.roads[static_cast<std::size_t>(pick)].speed)
                    pick = static_cast<int>(j);
            }
            if (pick < 0) {
                skipped[static_cast<std::size_t>(i)] = 1;
                return;
            }
            out.road_speed[static_cast<std::size_t>(i)] =
                sample.roads[static_cast<std::size_t>(pick)].speed;
            x = project_point(x, sample.roads[static_cast<std::size_t>(pick)].line);
        }
        GridSpec grid;
        grid.lo = x;
        grid.hi = x;
        grid.lo[0] -= cfg.grid_half_extent;
        grid.lo[1] -= cfg.grid_half_extent;
        grid.hi[0] += cfg.grid_half_extent;
        grid.hi[1] += cfg.grid_half_extent;
        grid.nx = grid.ny = cfg.grid_n;

        const CoreGraph core = build_core_graph(sample, solver);
        const DistanceField field = distance_field_with_core(sample, core, x, grid, solver);
        for (std::size_t k = 0; k < nt; ++k) {
            bool contam = false;
            const double vol = ball_volume(field, cfg.t_list[k], &contam);
            if (contam)
                ++contaminated[static_cast<std::size_t>(i)];
            else
                out.per_sample[static_cast<std::size_t>(i)][k] = vol;
        }
    });

    for (long i = 0; i < cfg.n_samples; ++i) {
        out.warnings.boundary_contaminated += contaminated[static_cast<std::size_t>(i)];
        out.warnings.skipped += skipped[static_cast<std::size_t>(i)];
    }
    for (std::size_t k = 0; k < nt; ++k) {
        double sum = 0.0, sum2 = 0.0;
        long m = 0;
        for (long i = 0; i < cfg.n_samples; ++i) {
            const double v = out.per_sample[static_cast<std::size_t>(i)][k];
            if (std::isnan(v)) continue;
            sum += v;
            sum2 += v * v;
            ++m;
        }
        CurvePoint p;
        p.t = cfg.t_list[k];
        p.n = m;
        if (m > 0) p.value = sum / m;
        if (m > 1) {
            const double var = std::max(0.0, (sum2 - sum * sum / m) / (m - 1));
            p.std_err = std::sqrt(var / m);
        }
        out.points.push_back(p);
    }
    for (const CurvePoint& p : out.points) {
        const double hop_disc = unit_ball_volume(2) * (cfg.epsilon * p.t) * (cfg.epsilon * p.t);
        if (p.value > 0.0 && hop_disc >= 0.1 * p.value) out.crossover = p.t;
    }
    return out;
}

// ---------------------------------------------------------------------------
// on-road volume ratio diagnostics

struct ThetaResult {
    std::vector<CurvePoint> ratio_mean;  // mean of volume / (V(x) t^{s_lower}) per t
    std::vector<double> cv;              // coefficient of variation per t
    std::vector<std::vector<double>> per_sample;
    std::vector<double> road_speed;
    ExperimentWarnings warnings;
};

inline ThetaResult theta_ratio(VolumeConfig cfg) {
    cfg.mode = PointMode::on_road;
    const VolumeResult vols = volume_curve(cfg);
    const double s_lower = exponents(cfg.d, cfg.gamma).s_lower;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    ThetaResult out;
    out.road_speed = vols.road_speed;
    out.warnings = vols.warnings;
    out.per_sample.assign(vols.per_sample.size(),
                          std::vector<double>(cfg.t_list.size(), nan));
    for (std::size_t i = 0; i < vols.per_sample.size(); ++i) {
        const double v = vols.road_speed[i];
        if (std::isnan(v)) continue;
        for (std::size_t k = 0; k < cfg.t_list.size(); ++k) {
            const double vol = vols.per_sample[i][k];
            if (std::isnan(vol)) continue;
            out.per_sample[i][k] = vol / (v * std::pow(cfg.t_list[k], s_lower));
        }
    }
    for (std::size_t k = 0; k < cfg.t_list.size(); ++k) {
        double sum = 0.0, sum2 = 0.0;
        long m = 0;
        for (std::size_t i = 0; i < out.per_sample.size(); ++i) {
            const double r = out.per_sample[i][k];
            if (std::isnan(r)) continue;
            sum += r;
            sum2 += r * r;
            ++m;
        }
        CurvePoint p;
        p.t = cfg.t_list[k];
        p.n = m;
        double cv = nan;
        if (m > 0) p.value = sum / m;
        if (m > 1) {
            const double var = std::max(0.0, (sum2 - sum * sum / m) / (m - 1));
            p.std_err = std::sqrt(var / m);
            if (p.value > 0.0) cv = std::sqrt(var) / p.value;
        }
        out.ratio_mean.push_back(p);
        out.cv.push_back(cv);
    }
    return out;
}

// ---------------------------------------------------------------------------
// distributional self-similarity

struct ScalingConfig {
    int d = 2;
    double gamma = 3.0;
    double r = 0.25;
    int n = 1000;  // samples per side
    double epsilon1 = 0.25;
    double v0_1 = 0.25;
    double window_radius1 = 2.0;
    // NaN means the model's time exponent (gamma-d)/(gamma-1); override it to
    // run a deliberately wrong rescaling as a power check
    double time_exponent_override = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t master_seed = 1;
    int workers = 1;
    SolverConfig solver;
};

struct ScalingResult {
    double ks_stat = 0.0;
    double p_value = 1.0;
    std::vector<double> scaled_small;  // r-scale times, rescaled to unit scale
    std::vector<double> unit;
    ExperimentWarnings warnings;
};

inline ScalingResult scaling_ks(const ScalingConfig& cfg) {
    if (cfg.d < 2) throw ConfigError("scaling_ks: dimension must be at least 2");
    if (!(cfg.gamma > cfg.d)) throw ConfigError("scaling_ks: gamma must exceed the dimension");
    if (!(cfg.r > 0.0) || cfg.r > 1.0) throw ConfigError("scaling_ks: r must lie in (0, 1]");
    if (cfg.n < 10) throw ConfigError("scaling_ks: need at least 10 samples per side");
    if (!(cfg.window_radius1 > 1.0))
        throw ConfigError("scaling_ks: unit window must contain both terminals");

    // lengths shrink by r, speeds by r^{(d-1)/(gamma-1)}, times by
    // r^{(gamma-d)/(gamma-1)}; scaling every knob at once maps the r-scale
    // experiment onto the unit-scale one
    const double speed_exp = (cfg.d - 1.0) / (cfg.gamma - 1.0);
    const double time_exp = (cfg.gamma - cfg.d) / (cfg.gamma - 1.0);
    const double rescale = std::isnan(cfg.time_exponent_override)
                               ? std::pow(cfg.r, -time_exp)
                               : std::pow(cfg.r, -cfg.time_exponent_override);

    ScalingResult out;
    out.unit.assign(static_cast<std::size_t>(cfg.n), 0.0);
    out.scaled_small.assign(static_cast<std::size_t>(cfg.n), 0.0);
    std::vector<unsigned char> suspect(2 * static_cast<std::size_t>(cfg.n), 0);

    for (int side = 0; side < 2; ++side) {
        const double scale = side == 0 ? 1.0 : cfg.r;
        const double sscale = side == 0 ? 1.0 : std::pow(cfg.r, speed_exp);
        const Vector y = [&] {
            Vector v = Vector::axis(cfg.d, cfg.d - 1);
            for (int c = 0; c < cfg.d; ++c) v[c] *= scale;
            return v;
        }();
        Vector center = y;
        for (int c = 0; c < cfg.d; ++c) center[c] *= 0.5;
        const WindowSpec win(cfg.d, cfg.gamma, center, cfg.window_radius1 * scale,
                             cfg.v0_1 * sscale);
        SolverConfig solver = cfg.solver;
        solver.epsilon = cfg.epsilon1 * sscale;
        solver.check_against(win);
        const Vector x = Vector::zero(cfg.d);
        const std::uint64_t side_seed = derive_seed(cfg.master_seed, side + 1);

        detail::for_indexed(cfg.n, cfg.workers, [&](long i) {
            const ProcessSample sample = sample_process(derive_seed(side_seed, i), win);
            const UpperBound ub = t_eps_upper(sample, x, y, solver);
            if (side == 0)
                out.unit[static_cast<std::size_t>(i)] = ub.time;
            else
                out.scaled_small[static_cast<std::size_t>(i)] = ub.time * rescale;
            suspect[static_cast<std::size_t>(side * cfg.n + i)] = ub.window_suspect ? 1 : 0;
        });
    }
    for (unsigned char s : suspect) out.warnings.window_suspect += s;
    const KsResult ks = ks_test_two(out.scaled_small, out.unit);
    out.ks_stat = ks.stat;
    out.p_value = ks.p_value;
    return out;
}

// ---------------------------------------------------------------------------
// multiscale hitting bounds

inline double multiscale_bound(const std::vector<double>& r_seq, const std::vector<double>& v_seq,
                               int n, int K, int d, double gamma) {
    if (r_seq.empty() || r_seq.size() != v_seq.size())
        throw std::invalid_argument("multiscale_bound: need matching nonempty sequences");
    if (n < 0 || K < n || K >= static_cast<int>(r_seq.size()))
        throw std::invalid_argument("multiscale_bound: need 0 <= n <= K < sequence length");
    if (d < 2 || !(gamma > d)) throw std::invalid_argument("multiscale_bound: need gamma > d >= 2");
    for (std::size_t i = 0; i < r_seq.size(); ++i) {
        if (!(r_seq[i] > 0.0) || !(v_seq[i] > 0.0))
            throw std::invalid_argument("multiscale_bound: sequences must be positive");
        if (i > 0 && (r_seq[i] > r_seq[i - 1] || v_seq[i] > v_seq[i - 1]))
            throw std::invalid_argument("multiscale_bound: sequences must be decreasing");
    }
    double sum = 0.0;
    for (int k = n + 1; k <= K; ++k)
        sum += std::pow(r_seq[static_cast<std::size_t>(k - 1)], d - 1) *
               std::pow(v_seq[static_cast<std::size_t>(k)], -(gamma - 1.0));
    return std::pow(r_seq[static_cast<std::size_t>(K)], d - 1) *
           std::pow(v_seq[static_cast<std::size_t>(n)], -(gamma - 1.0)) * std::exp(sum);
}

struct MultiscaleConfig {
    int d = 2;
    double gamma = 3.0;
    std::vector<double> r_seq;
    std::vector<double> v_seq;
    int n = 0;
    int K = 0;
    long n_samples = 100000;
    double window_margin = 1.05;  // window radius as a multiple of r_seq[0]
    std::uint64_t master_seed = 1;
};

struct MultiscaleResult {
    double estimate = 0.0;   // P(fastest road through B(x, r_k) >= v_k for all k in [n, K])
    double std_err = 0.0;
    double upper_bound = 0.0;
    double lower_bound = 0.0;
    bool upper_ok = false;
    bool lower_ok = false;
    long n_samples = 0;
};

inline MultiscaleResult multiscale_mc_check(const MultiscaleConfig& cfg) {
    const double bound = multiscale_bound(cfg.r_seq, cfg.v_seq, cfg.n, cfg.K, cfg.d, cfg.gamma);
    if (cfg.n_samples < 100)
        throw ConfigError("multiscale_mc_check: too few samples for a meaningful check");
    if (!(cfg.window_margin >= 1.0))
        throw ConfigError("multiscale_mc_check: window does not cover the largest ball");

    // sampling exactly down to the smallest tested speed keeps every event
    // V >= v_k unaffected by the truncation
    const double v0 = cfg.v_seq.back();
    const WindowSpec win(cfg.d, cfg.gamma, Vector::zero(cfg.d),
                         cfg.window_margin * cfg.r_seq.front(), v0);
    const Vector x = Vector::zero(cfg.d);

    long hits = 0;
    for (long i = 0; i < cfg.n_samples; ++i) {
        const ProcessSample sample = sample_process(derive_seed(cfg.master_seed, i), win);
        bool ok = true;
        for (int k = cfg.n; k <= cfg.K && ok; ++k)
            if (fastest_in_ball(sample, x, cfg.r_seq[static_cast<std::size_t>(k)]) <
                cfg.v_seq[static_cast<std::size_t>(k)])
                ok = false;
        hits += ok ? 1 : 0;
    }

    MultiscaleResult out;
    out.n_samples = cfg.n_samples;
    out.estimate = static_cast<double>(hits) / static_cast<double>(cfg.n_samples);
    out.std_err = detail::binomial_stderr(static_cast<double>(hits),
                                          static_cast<double>(cfg.n_samples));
    out.upper_bound = bound;
    out.lower_bound =
        1.0 - std::exp(-std::pow(cfg.r_seq[static_cast<std::size_t>(cfg.K)], cfg.d - 1) *
                       std::pow(cfg.v_seq[static_cast<std::size_t>(cfg.n)], -(cfg.gamma - 1.0)));
    out.upper_ok = out.estimate <= out.upper_bound + 3.0 * out.std_err;
    out.lower_ok = out.estimate >= out.lower_bound - 3.0 * out.std_err;
    return out;
}

// ---------------------------------------------------------------------------
// correlation decay

struct CorrelationConfig {
    int d = 2;
    double gamma = 3.0;
    std::vector<double> separations = {0.0, 1.0, 2.0, 3.0, 4.0, 6.0};
    long n_samples = 20000;
    double ball_radius = 1.0;
    double speed_threshold = 1.0;  // statistic: fastest road through B(x, radius) >= this
    std::uint64_t master_seed = 1;
};

// empirical correlation of the local indicator at two points per separation;
// value is a correlation, not a probability, so it lives in [-1, 1]
inline std::vector<CurvePoint> correlation_decay(const CorrelationConfig& cfg) {
    if (cfg.d < 2 || !(cfg.gamma > cfg.d))
        throw ConfigError("correlation_decay: need gamma > d >= 2");
    if (cfg.n_samples < 10) throw ConfigError("correlation_decay: too few samples");
    if (!(cfg.ball_radius > 0.0) || !(cfg.speed_threshold > 0.0))
        throw ConfigError("correlation_decay: radius and threshold must be positive");

    std::vector<CurvePoint> out;
    for (std::size_t si = 0; si < cfg.separations.size(); ++si) {
        const double s = cfg.separations[si];
        if (s < 0.0) throw ConfigError("correlation_decay: separations must be nonnegative");
        const Vector x = Vector::zero(cfg.d);
        Vector y = Vector::axis(cfg.d, 0);
        for (int c = 0; c < cfg.d; ++c) y[c] *= s;
        Vector center = y;
        for (int c = 0; c < cfg.d; ++c) center[c] *= 0.5;
        // roads below the indicator threshold never matter, so the floor sits
        // exactly at the threshold
        const WindowSpec win(cfg.d, cfg.gamma, center,
                             0.5 * s + cfg.ball_radius * 1.05, cfg.speed_threshold);
        const std::uint64_t sep_seed = derive_seed(cfg.master_seed, static_cast<std::int64_t>(si));

        long nx = 0, ny = 0, nxy = 0;
        for (long i = 0; i < cfg.n_samples; ++i) {
            const ProcessSample sample = sample_process(derive_seed(sep_seed, i), win);
            const bool ix = fastest_in_ball(sample, x, cfg.ball_radius) >= cfg.speed_threshold;
            const bool iy = fastest_in_ball(sample, y, cfg.ball_radius) >= cfg.speed_threshold;
            nx += ix ? 1 : 0;
            ny += iy ? 1 : 0;
            nxy += (ix && iy) ? 1 : 0;
        }
        const double nn = static_cast<double>(cfg.n_samples);
        const double px = nx / nn, py = ny / nn, pxy = nxy / nn;
        const double varx = px * (1.0 - px), vary = py * (1.0 - py);
        double corr;
        if (varx > 0.0 && vary > 0.0)
            corr = (pxy - px * py) / std::sqrt(varx * vary);
        else
            corr = s == 0.0 ? 1.0 : 0.0;
        CurvePoint p;
        p.t = s;
        p.value = corr;
        p.std_err = (1.0 - corr * corr) / std::sqrt(nn);
        p.n = cfg.n_samples;
        out.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// covering dimension

struct BoxDimensionConfig {
    std::vector<double> t_scales = {1.0, 0.7, 0.5, 0.35, 0.25};
    double square_half = 0.75;
    int grid_n = 121;
    double epsilon = 0.15;
    long max_centers = 2000;
    SolverConfig solver;
};

struct BoxDimensionResult {
    ExponentFit fit;            // slope of log N(t) against log(1/t)
    std::vector<long> counts;   // greedy covering counts, aligned with t_scales
};

// Greedy covering of the central square by metric balls of radius t: starting
// from the square's center, repeatedly plant a ball at the uncovered pixel
// closest in travel time to the balls already planted. The core graph is
// shared by every field, so each new center costs one assembly and solve.
inline BoxDimensionResult box_dimension(const ProcessSample& sample, const BoxDimensionConfig& cfg) {
    if (cfg.t_scales.size() < 2)
        throw std::invalid_argument("box_dimension: need at least two scales");
    for (std::size_t i = 0; i < cfg.t_scales.size(); ++i) {
        if (!(cfg.t_scales[i] > 0.0))
            throw std::invalid_argument("box_dimension: scales must be positive");
        if (i > 0 && !(cfg.t_scales[i] < cfg.t_scales[i - 1]))
            throw std::invalid_argument("box_dimension: scales must be decreasing");
    }
    if (cfg.grid_n < 3) throw std::invalid_argument("box_dimension: grid too coarse");
    if (!(cfg.square_half * std::sqrt(2.0) <= sample.window.R_win))
        throw ConfigError("box_dimension: square leaves the sampling window");
    SolverConfig solver = cfg.solver;
    solver.epsilon = cfg.epsilon;
    solver.check_against(sample.window);

    GridSpec grid;
    grid.lo = sample.window.center;
    grid.hi = sample.window.center;
    grid.lo[0] -= cfg.square_half;
    grid.lo[1] -= cfg.square_half;
    grid.hi[0] += cfg.square_half;
    grid.hi[1] += cfg.square_half;
    grid.nx = grid.ny = cfg.grid_n;
    const std::size_t npix = static_cast<std::size_t>(cfg.grid_n) * static_cast<std::size_t>(cfg.grid_n);

    const CoreGraph core = build_core_graph(sample, solver);
    const double inf = std::numeric_limits<double>::infinity();

    BoxDimensionResult out;
    for (double t : cfg.t_scales) {
        std::vector<double> dmin(npix, inf);
        long count = 0;
        for (;;) {
            std::size_t pick = npix;
            double best = inf;
            for (std::size_t p = 0; p < npix; ++p) {
                if (dmin[p] <= t) continue;
                if (pick == npix || dmin[p] < best) {
                    pick = p;
                    best = dmin[p];
                }
            }
            if (pick == npix) break;
            if (count == 0) {
                const std::size_t mid = static_cast<std::size_t>(cfg.grid_n / 2);
                pick = mid * static_cast<std::size_t>(cfg.grid_n) + mid;
            }
            const Vector c = [&] {
                const int ix = static_cast<int>(pick % static_cast<std::size_t>(cfg.grid_n));
                const int iy = static_cast<int>(pick / static_cast<std::size_t>(cfg.grid_n));
                DistanceField probe;
                probe.grid = grid;
                return probe.pixel_center(ix, iy);
            }();
            const DistanceField field = distance_field_with_core(sample, core, c, grid, solver);
            for (std::size_t p = 0; p < npix; ++p) dmin[p] = std::min(dmin[p], field.values[p]);
            if (++count > cfg.max_centers)
                throw ConfigError("box_dimension: covering exceeded max_centers; raise the "
                                  "scales or the cap");
        }
        out.counts.push_back(count);
    }

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < cfg.t_scales.size(); ++i) {
        xs.push_back(std::log(1.0 / cfg.t_scales[i]));
        ys.push_back(std::log(static_cast<double>(std::max<long>(1, out.counts[i]))));
    }
    const OlsFit f = ols(xs, ys);
    out.fit = ExponentFit{f.slope, f.intercept, f.r_squared, cfg.t_scales.back(),
                          cfg.t_scales.front(), static_cast<int>(xs.size())};
    return out;
}

// ---------------------------------------------------------------------------
// local speed recovery

// min over offsets h of t_eps_upper(x, x + h dir) / h along x's own road; the
// quotient estimates the reciprocal of the fastest speed through x
inline double recover_speed(const ProcessSample& sample, const Vector& x,
                            const std::vector<double>& h_list, const SolverConfig& config) {
    if (h_list.empty()) throw std::invalid_argument("recover_speed: empty offset list");
    for (double h : h_list)
        if (!(h > 0.0)) throw std::invalid_argument("recover_speed: offsets must be positive");
    int pick = -1;
    for (std::size_t j = 0; j < sample.roads.size(); ++j) {
        if (point_line_distance(x, sample.roads[j].line) > 1e-9) continue;
        if (pick < 0 || sample.roads[j].speed > sample.roads[static_cast<std::size_t>(pick)].speed)
            pick = static_cast<int>(j);
    }
    if (pick < 0)
        throw std::invalid_argument("recover_speed: x does not lie on any sampled road");
    const Vector dir = sample.roads[static_cast<std::size_t>(pick)].line.direction;

    const CoreGraph core = build_core_graph(sample, config);
    double best = std::numeric_limits<double>::infinity();
    for (double h : h_list) {
        Vector y = x;
        for (int c = 0; c < sample.window.d; ++c) y[c] += h * dir[c];
        const UpperBound ub = t_eps_upper_with_core(sample, core, x, y, config);
        best = std::min(best, ub.time / h);
    }
    return best;
}

}  // namespace roadnet
