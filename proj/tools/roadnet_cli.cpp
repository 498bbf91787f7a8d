// Command line front end. One subcommand per operation; every configuration
// key doubles as a long option, so quick runs need no config file and a file
// can be overridden flag by flag. Results land in out_dir next to a .meta
// sidecar carrying the full effective configuration and the master seed, so
// any output can be regenerated from its sidecar alone.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 failed
// verification, 3 I/O failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "roadnet/estimators.hpp"
#include "roadnet/io.hpp"
#include "roadnet/selftest.hpp"

namespace {

struct KeyHelp {
    const char* key;
    const char* help;
};

// One entry per configuration key, same spelling as the config file.
const KeyHelp kKeys[] = {
    {"d", "ambient dimension"},
    {"gamma", "speed tail exponent, must exceed d"},
    {"center", "window center coordinates, comma separated"},
    {"window_radius", "sampling window radius"},
    {"v0", "slowest sampled road speed"},
    {"master_seed", "root seed for all randomness"},
    {"workers", "worker threads for Monte Carlo loops"},
    {"out_dir", "directory for result files"},
    {"epsilon", "walking speed of the approximate metric"},
    {"hop_neighbors", "graph edges kept per transfer node"},
    {"candidate_depth", "recursion depth of the junction candidates"},
    {"refine_rounds", "local path refinement rounds"},
    {"refine_tol", "refinement convergence tolerance"},
    {"refine_max_iters", "refinement iteration cap"},
    {"ingest_junctions", "seed the route graph with recursive junctions (0/1)"},
    {"x", "first terminal coordinates, comma separated"},
    {"y", "second terminal coordinates, comma separated"},
    {"alpha", "midpoint ball radius fraction, in (0, 1/3]"},
    {"kendall_depth", "recursion depth of the junction upper bound"},
    {"cert_scales", "dyadic scales in the ball-exit certificate"},
    {"t_list", "thresholds or radii, comma separated"},
    {"n_per_t", "sample counts per threshold, comma separated"},
    {"n_samples", "Monte Carlo repetitions"},
    {"mode", "volume center placement: typical or on_road"},
    {"grid_half_extent", "half side of the raster grid"},
    {"grid_n", "raster pixels per side"},
    {"on_road_search_fraction", "search radius fraction for the on-road pick"},
    {"screen_scales", "dyadic scales in the connection screen"},
    {"r", "shrink factor of the rescaled ensemble"},
    {"exponent_override", "forced time exponent for the scaling check"},
    {"r_seq", "radius sequence of the multiscale bound"},
    {"v_seq", "speed sequence of the multiscale bound"},
    {"bound_n", "first index of the multiscale event"},
    {"bound_k", "last index of the multiscale event"},
    {"bound_samples", "Monte Carlo samples for the bound check"},
    {"window_margin", "window radius as a multiple of the largest ball"},
    {"t_scales", "covering radii, comma separated, decreasing"},
    {"square_half", "half side of the covered square"},
    {"max_centers", "covering size cap"},
};

// Registers --config plus one string option per key. Values are collected as
// raw strings and handed to the config parser, so flags and file lines share
// one grammar and one set of error messages.
void attach_config_options(CLI::App* cmd, std::string& config_path,
                           std::vector<std::pair<std::string, std::string>>& overrides) {
    cmd->add_option("--config", config_path, "configuration file of key = value lines");
    for (const KeyHelp& entry : kKeys) {
        std::string names = std::string("--") + entry.key;
        const std::string key = entry.key;
        if (key == "master_seed") names += ",--seed";
        if (key == "out_dir") names += ",--out";
        cmd->add_option_function<std::string>(
            names,
            [&overrides, key](const std::string& value) { overrides.emplace_back(key, value); },
            entry.help);
    }
}

roadnet::RunConfig load_config(const std::string& config_path,
                               const std::vector<std::pair<std::string, std::string>>& overrides) {
    const std::string text =
        config_path.empty() ? std::string() : roadnet::read_text_file(config_path);
    return roadnet::parse_config(text, overrides);
}

std::string out_path(const roadnet::RunConfig& cfg, const char* name) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec)
        throw roadnet::IoError("cannot create output directory " + cfg.out_dir + ": " +
                               ec.message());
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

std::vector<std::pair<std::string, std::string>> meta_entries(const roadnet::RunConfig& cfg) {
    auto entries = roadnet::effective_entries(cfg);
    entries.emplace_back("version", roadnet::version_stamp());
    return entries;
}

void put_number(std::vector<std::pair<std::string, std::string>>& entries, const char* key,
                double value) {
    std::string s;
    roadnet::detail::put_g17(s, value);
    entries.emplace_back(key, s);
}

void print_value(const char* name, double value) {
    std::printf("%s = %.17g\n", name, value);
}

int run_sample(const roadnet::RunConfig& cfg) {
    const roadnet::ProcessSample s = roadnet::sample_process(cfg.master_seed, cfg.window());
    const std::string path = out_path(cfg, "sample.txt");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw roadnet::IoError("cannot open " + path + " for writing");
    roadnet::write_sample(f, s);
    f.flush();
    if (!f) throw roadnet::IoError("write failed for " + path);
    roadnet::write_meta(path + ".meta", meta_entries(cfg));
    std::printf("wrote %s (%zu roads)\n", path.c_str(), s.roads.size());
    return 0;
}

int run_dist(const roadnet::RunConfig& cfg) {
    if (cfg.x.empty() || cfg.y.empty())
        throw roadnet::ConfigError("dist needs both terminals; set the x and y keys");
    const roadnet::Vector x = cfg.terminal(cfg.x);
    const roadnet::Vector y = cfg.terminal(cfg.y);
    const roadnet::ProcessSample s = roadnet::sample_process(cfg.master_seed, cfg.window());
    const double lower = roadnet::lower_certificate(s, x, y, cfg.solver.epsilon, cfg.cert_scales);
    const roadnet::UpperBound upper = roadnet::t_eps_upper(s, x, y, cfg.solver);
    const double kendall =
        roadnet::kendall_recursive_upper(s, x, y, cfg.alpha, cfg.kendall_depth, cfg.solver.epsilon)
            .first;
    print_value("lower_certificate", lower);
    print_value("t_eps_upper", upper.time);
    print_value("kendall_recursive_upper", kendall);
    print_value("gap", upper.time - lower);
    if (upper.window_suspect)
        std::printf("note: best route touches the window rim; the upper bound is suspect\n");
    return 0;
}

int run_field(const roadnet::RunConfig& cfg) {
    if (cfg.d != 2) throw roadnet::ConfigError("field rendering needs d = 2");
    const roadnet::Vector x = cfg.x.empty() ? cfg.center_point() : cfg.terminal(cfg.x);
    const roadnet::ProcessSample s = roadnet::sample_process(cfg.master_seed, cfg.window());
    roadnet::GridSpec grid;
    grid.lo = x;
    grid.hi = x;
    grid.lo[0] -= cfg.grid_half_extent;
    grid.lo[1] -= cfg.grid_half_extent;
    grid.hi[0] += cfg.grid_half_extent;
    grid.hi[1] += cfg.grid_half_extent;
    grid.nx = cfg.grid_n;
    grid.ny = cfg.grid_n;
    const roadnet::DistanceField field = roadnet::distance_field(s, x, grid, cfg.solver);
    auto extra = meta_entries(cfg);
    extra.erase(extra.end() - 1);  // write_field_pgm stamps the version itself
    put_number(extra, "boundary_reach", field.boundary_reach);
    const std::string path = out_path(cfg, "field.pgm");
    roadnet::write_field_pgm(field, path, extra);
    std::printf("wrote %s (boundary reach %.17g)\n", path.c_str(), field.boundary_reach);
    return 0;
}

int run_qcp(const roadnet::RunConfig& cfg) {
    roadnet::QcpConfig qc;
    qc.d = cfg.d;
    qc.gamma = cfg.gamma;
    if (cfg.has("t_list")) qc.t_list = cfg.t_list;
    if (cfg.has("n_per_t")) qc.n_per_t = cfg.n_per_t;
    if (cfg.has("window_radius")) qc.window_radius = cfg.window_radius;
    if (cfg.has("screen_scales")) qc.screen_scales = cfg.screen_scales;
    qc.master_seed = cfg.master_seed;
    qc.workers = cfg.workers;
    qc.solver = cfg.solver;
    if (cfg.has("epsilon")) {
        const double eps = cfg.solver.epsilon;
        qc.epsilon_rule = [eps](double) { return eps; };
    }
    const roadnet::QcpResult res = roadnet::qcp_curve(qc);
    std::vector<std::vector<roadnet::CsvCell>> rows;
    for (std::size_t i = 0; i < res.upper.size(); ++i)
        rows.push_back({res.upper[i].t, res.upper[i].value, res.cert[i].value,
                        res.upper[i].std_err, static_cast<long long>(res.upper[i].n)});
    const std::string path = out_path(cfg, "qcp.csv");
    roadnet::write_csv(rows, {"t", "estimate_upper", "estimate_cert", "stderr", "n"}, path);
    auto meta = meta_entries(cfg);
    meta.emplace_back("window_suspect", std::to_string(res.warnings.window_suspect));
    meta.emplace_back("skipped", std::to_string(res.warnings.skipped));
    roadnet::write_meta(path + ".meta", meta);
    std::printf("wrote %s (%zu thresholds)\n", path.c_str(), rows.size());
    return 0;
}

int run_volume(const roadnet::RunConfig& cfg) {
    roadnet::VolumeConfig vc;
    vc.d = cfg.d;
    vc.gamma = cfg.gamma;
    vc.mode = cfg.mode == "on_road" ? roadnet::PointMode::on_road : roadnet::PointMode::typical;
    if (cfg.has("t_list")) vc.t_list = cfg.t_list;
    if (cfg.n_samples > 0) vc.n_samples = static_cast<int>(cfg.n_samples);
    if (cfg.has("window_radius")) vc.window_radius = cfg.window_radius;
    if (cfg.has("v0")) vc.v0 = cfg.v0;
    if (cfg.has("epsilon")) vc.epsilon = cfg.solver.epsilon;
    if (cfg.has("grid_half_extent")) vc.grid_half_extent = cfg.grid_half_extent;
    if (cfg.has("grid_n")) vc.grid_n = cfg.grid_n;
    if (cfg.has("on_road_search_fraction")) vc.on_road_search_fraction = cfg.on_road_search_fraction;
    vc.master_seed = cfg.master_seed;
    vc.workers = cfg.workers;
    vc.solver = cfg.solver;
    const roadnet::VolumeResult res = roadnet::volume_curve(vc);
    std::vector<std::vector<roadnet::CsvCell>> rows;
    for (const roadnet::CurvePoint& p : res.points)
        rows.push_back({p.t, p.value, p.std_err, static_cast<long long>(p.n)});
    const std::string path = out_path(cfg, "volume.csv");
    roadnet::write_csv(rows, {"t", "mean_volume", "stderr", "n"}, path);
    auto meta = meta_entries(cfg);
    put_number(meta, "crossover", res.crossover);
    meta.emplace_back("contaminated", std::to_string(res.warnings.boundary_contaminated));
    meta.emplace_back("skipped", std::to_string(res.warnings.skipped));
    roadnet::write_meta(path + ".meta", meta);
    std::printf("wrote %s (bare-hop crossover below t = %.17g)\n", path.c_str(), res.crossover);
    return 0;
}

int run_scaling(const roadnet::RunConfig& cfg) {
    roadnet::ScalingConfig sc;
    sc.d = cfg.d;
    sc.gamma = cfg.gamma;
    sc.r = cfg.r;
    if (cfg.n_samples > 0) sc.n = static_cast<int>(cfg.n_samples);
    if (cfg.has("epsilon")) sc.epsilon1 = cfg.solver.epsilon;
    if (cfg.has("v0")) sc.v0_1 = cfg.v0;
    if (cfg.has("window_radius")) sc.window_radius1 = cfg.window_radius;
    sc.time_exponent_override = cfg.exponent_override;
    sc.master_seed = cfg.master_seed;
    sc.workers = cfg.workers;
    sc.solver = cfg.solver;
    const roadnet::ScalingResult res = roadnet::scaling_ks(sc);
    std::vector<std::vector<roadnet::CsvCell>> rows;
    for (double t : res.unit) rows.push_back({std::string("unit"), t});
    for (double t : res.scaled_small) rows.push_back({std::string("rescaled"), t});
    const std::string path = out_path(cfg, "scaling.csv");
    roadnet::write_csv(rows, {"side", "time"}, path);
    auto meta = meta_entries(cfg);
    put_number(meta, "ks_stat", res.ks_stat);
    put_number(meta, "p_value", res.p_value);
    meta.emplace_back("window_suspect", std::to_string(res.warnings.window_suspect));
    roadnet::write_meta(path + ".meta", meta);
    print_value("ks_stat", res.ks_stat);
    print_value("p_value", res.p_value);
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

int run_dim(const roadnet::RunConfig& cfg) {
    const roadnet::ProcessSample s = roadnet::sample_process(cfg.master_seed, cfg.window());
    roadnet::BoxDimensionConfig bc;
    if (cfg.has("t_scales")) bc.t_scales = cfg.t_scales;
    if (cfg.has("square_half")) bc.square_half = cfg.square_half;
    if (cfg.has("grid_n")) bc.grid_n = cfg.grid_n;
    if (cfg.has("epsilon")) bc.epsilon = cfg.solver.epsilon;
    if (cfg.has("max_centers")) bc.max_centers = cfg.max_centers;
    bc.solver = cfg.solver;
    const roadnet::BoxDimensionResult res = roadnet::box_dimension(s, bc);
    std::vector<std::vector<roadnet::CsvCell>> rows;
    for (std::size_t i = 0; i < bc.t_scales.size(); ++i)
        rows.push_back({bc.t_scales[i], static_cast<long long>(res.counts[i])});
    const std::string path = out_path(cfg, "dim.csv");
    roadnet::write_csv(rows, {"t", "count"}, path);
    auto meta = meta_entries(cfg);
    put_number(meta, "slope", res.fit.slope);
    put_number(meta, "intercept", res.fit.intercept);
    put_number(meta, "r_squared", res.fit.r_squared);
    roadnet::write_meta(path + ".meta", meta);
    print_value("covering_slope", res.fit.slope);
    print_value("r_squared", res.fit.r_squared);
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

int run_bounds(const roadnet::RunConfig& cfg) {
    if (cfg.r_seq.empty() || cfg.v_seq.empty())
        throw roadnet::ConfigError("bounds needs the r_seq and v_seq keys");
    roadnet::MultiscaleConfig mc;
    mc.d = cfg.d;
    mc.gamma = cfg.gamma;
    mc.r_seq = cfg.r_seq;
    mc.v_seq = cfg.v_seq;
    mc.n = cfg.bound_n;
    mc.K = cfg.bound_k;
    mc.n_samples = cfg.bound_samples;
    if (cfg.has("window_margin")) mc.window_margin = cfg.window_margin;
    mc.master_seed = cfg.master_seed;
    const roadnet::MultiscaleResult res = roadnet::multiscale_mc_check(mc);
    std::vector<std::vector<roadnet::CsvCell>> rows;
    rows.push_back({res.estimate, res.std_err, res.lower_bound, res.upper_bound,
                    static_cast<long long>(res.n_samples)});
    const std::string path = out_path(cfg, "bounds.csv");
    roadnet::write_csv(rows, {"estimate", "stderr", "lower_bound", "upper_bound", "n"}, path);
    auto meta = meta_entries(cfg);
    meta.emplace_back("upper_ok", res.upper_ok ? "1" : "0");
    meta.emplace_back("lower_ok", res.lower_ok ? "1" : "0");
    roadnet::write_meta(path + ".meta", meta);
    print_value("estimate", res.estimate);
    print_value("std_err", res.std_err);
    print_value("lower_bound", res.lower_bound);
    print_value("upper_bound", res.upper_bound);
    std::printf("upper bound %s, lower bound %s\n",
                res.upper_ok ? "holds" : "VIOLATED beyond 3 sigma",
                res.lower_ok ? "holds" : "VIOLATED beyond 3 sigma");
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

int run_verify(bool quick) {
    const std::vector<roadnet::CheckResult> results = roadnet::selftest::run_battery(quick, &std::cout);
    long failed = 0;
    for (const roadnet::CheckResult& r : results)
        if (!r.pass) ++failed;
    if (failed) {
        std::printf("verification FAILED (%ld of %zu checks)\n", failed, results.size());
        return 2;
    }
    std::printf("verification passed (%zu checks)\n", results.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact sampler and certified travel time bounds for a random road network"};
    app.require_subcommand(1);
    app.set_version_flag("--version", roadnet::version_stamp());

    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;

    CLI::App* c_sample =
        app.add_subcommand("sample", "draw one process sample and write it as text");
    CLI::App* c_dist =
        app.add_subcommand("dist", "bound the travel time between two terminals");
    CLI::App* c_field =
        app.add_subcommand("field", "raster travel times from one point into a PGM image");
    CLI::App* c_qcp =
        app.add_subcommand("qcp", "connection probability against the time threshold");
    CLI::App* c_volume =
        app.add_subcommand("volume", "mean metric ball volume against the radius");
    CLI::App* c_scaling =
        app.add_subcommand("scaling", "two-scale travel time collapse test");
    CLI::App* c_dim =
        app.add_subcommand("dim", "greedy covering of a square by metric balls");
    CLI::App* c_bounds =
        app.add_subcommand("bounds", "Monte Carlo check of the multiscale probability bound");
    CLI::App* c_verify = app.add_subcommand("verify", "run the invariant battery");
    for (CLI::App* cmd : {c_sample, c_dist, c_field, c_qcp, c_volume, c_scaling, c_dim, c_bounds})
        attach_config_options(cmd, config_path, overrides);
    bool quick = false;
    bool full = false;
    c_verify->add_flag("--quick", quick, "small sizes, finishes in a few minutes");
    c_verify->add_flag("--full", full, "full sizes (default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*c_verify) return run_verify(quick && !full);
        const roadnet::RunConfig cfg = load_config(config_path, overrides);
        if (*c_sample) return run_sample(cfg);
        if (*c_dist) return run_dist(cfg);
        if (*c_field) return run_field(cfg);
        if (*c_qcp) return run_qcp(cfg);
        if (*c_volume) return run_volume(cfg);
        if (*c_scaling) return run_scaling(cfg);
        if (*c_dim) return run_dim(cfg);
        if (*c_bounds) return run_bounds(cfg);
    } catch (const roadnet::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
