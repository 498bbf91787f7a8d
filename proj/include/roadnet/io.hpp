#pragma once
// Run configuration and file emitters for the batch front end: a flat
// key = value config format, CSV reports, 16-bit PGM rasters with text
// sidecars, and a version stamp. Identical (config, seed) pairs produce
// byte-identical output files.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "roadnet/errors.hpp"
#include "roadnet/estimators.hpp"

#ifndef ROADNET_VERSION
#define ROADNET_VERSION "0.0.0-dev"
#endif

namespace roadnet {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// "<version>+g<hash>": content hash of the version string the build supplied
inline std::string version_stamp() {
    const std::string v = ROADNET_VERSION;
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", (unsigned long long)fnv1a64(v));
    return v + "+g" + hex;
}

// ---------------------------------------------------------------------------
// run configuration

struct RunConfig {
    int d = 2;
    double gamma = 3.0;
    std::vector<double> center;  // d coordinates; origin when absent
    double window_radius = 1.5;
    double v0 = 0.1;
    std::uint64_t master_seed = 1;
    int workers = 1;
    std::string out_dir = ".";

    SolverConfig solver;  // epsilon keyed as "epsilon", knobs under their own names

    std::vector<double> x, y;  // terminal pair for dist, field center for field
    double alpha = 1.0 / 3.0;
    int kendall_depth = 12;
    int cert_scales = 4;

    std::vector<double> t_list;
    std::vector<long> n_per_t;
    long n_samples = 0;  // 0 lets each subcommand pick its default
    std::string mode = "typical";
    double grid_half_extent = 0.7;
    int grid_n = 151;
    double on_road_search_fraction = 0.2;
    int screen_scales = 4;

    double r = 0.25;
    double exponent_override = std::numeric_limits<double>::quiet_NaN();

    std::vector<double> r_seq, v_seq;
    int bound_n = 0;
    int bound_k = 0;
    long bound_samples = 100000;
    double window_margin = 1.05;

    std::vector<double> t_scales;
    double square_half = 0.75;
    long max_centers = 2000;

    std::set<std::string> provided;

    RunConfig() { solver.epsilon = 0.1; }

    bool has(const std::string& key) const { return provided.count(key) != 0; }

    Vector center_point() const {
        if (center.empty()) return Vector::zero(d);
        Vector c = Vector::zero(d);
        for (int i = 0; i < d; ++i) c[i] = center[(std::size_t)i];
        return c;
    }

    WindowSpec window() const { return WindowSpec(d, gamma, center_point(), window_radius, v0); }

    Vector terminal(const std::vector<double>& coords) const {
        Vector p = Vector::zero(d);
        for (int i = 0; i < d; ++i) p[i] = coords[(std::size_t)i];
        return p;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string key_site(int line) {
    return line > 0 ? " on line " + std::to_string(line) : " on the command line";
}

inline bool parse_double_str(const std::string& s, double* out) {
    if (s.empty()) return false;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return false;
    *out = v;
    return true;
}

inline bool parse_longlong_str(const std::string& s, long long* out) {
    if (s.empty()) return false;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size()) return false;
    *out = v;
    return true;
}

inline double want_double(const std::string& key, const std::string& value, int line) {
    double v;
    if (!parse_double_str(value, &v))
        throw ParseError("key '" + key + "'" + key_site(line) + ": expected a number, got '" + value + "'");
    return v;
}

inline long long want_integer(const std::string& key, const std::string& value, int line) {
    long long v;
    if (!parse_longlong_str(value, &v))
        throw ParseError("key '" + key + "'" + key_site(line) + ": expected an integer, got '" + value + "'");
    return v;
}

inline std::uint64_t want_u64(const std::string& key, const std::string& value, int line) {
    if (value.empty() || value[0] == '-')
        throw ParseError("key '" + key + "'" + key_site(line) + ": expected an unsigned integer, got '" + value +
                         "'");
    char* end = nullptr;
    const std::uint64_t v = std::strtoull(value.c_str(), &end, 10);
    if (end != value.c_str() + value.size())
        throw ParseError("key '" + key + "'" + key_site(line) + ": expected an unsigned integer, got '" + value +
                         "'");
    return v;
}

inline bool want_bool(const std::string& key, const std::string& value, int line) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    throw ParseError("key '" + key + "'" + key_site(line) + ": expected 0/1/true/false, got '" + value + "'");
}

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = value.find(',', start);
        parts.push_back(trim(std::string_view(value).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return parts;
}

inline std::vector<double> want_list_double(const std::string& key, const std::string& value, int line) {
    std::vector<double> out;
    for (const std::string& part : split_list(value)) {
        double v;
        if (!parse_double_str(part, &v))
            throw ParseError("key '" + key + "'" + key_site(line) + ": expected comma-separated numbers, got '" +
                             value + "'");
        out.push_back(v);
    }
    return out;
}

inline std::vector<long> want_list_long(const std::string& key, const std::string& value, int line) {
    std::vector<long> out;
    for (const std::string& part : split_list(value)) {
        long long v;
        if (!parse_longlong_str(part, &v))
            throw ParseError("key '" + key + "'" + key_site(line) + ": expected comma-separated integers, got '" +
                             value + "'");
        out.push_back((long)v);
    }
    return out;
}

}  // namespace detail

// Applies one key. line > 0 refers to a config file line; 0 means a command
// line override. Unknown keys are errors so typos cannot silently fall back
// to defaults.
inline void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value, int line = 0) {
    using namespace detail;
    if (key == "d") cfg.d = (int)want_integer(key, value, line);
    else if (key == "gamma") cfg.gamma = want_double(key, value, line);
    else if (key == "center") cfg.center = want_list_double(key, value, line);
    else if (key == "window_radius") cfg.window_radius = want_double(key, value, line);
    else if (key == "v0") cfg.v0 = want_double(key, value, line);
    else if (key == "master_seed") cfg.master_seed = want_u64(key, value, line);
    else if (key == "workers") cfg.workers = (int)want_integer(key, value, line);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "epsilon") cfg.solver.epsilon = want_double(key, value, line);
    else if (key == "hop_neighbors") cfg.solver.hop_neighbors = (int)want_integer(key, value, line);
    else if (key == "candidate_depth") cfg.solver.candidate_depth = (int)want_integer(key, value, line);
    else if (key == "refine_rounds") cfg.solver.refine_rounds = (int)want_integer(key, value, line);
    else if (key == "refine_tol") cfg.solver.refine_tol = want_double(key, value, line);
    else if (key == "refine_max_iters") cfg.solver.refine_max_iters = (int)want_integer(key, value, line);
    else if (key == "ingest_junctions") cfg.solver.ingest_recursive_junctions = want_bool(key, value, line);
    else if (key == "x") cfg.x = want_list_double(key, value, line);
    else if (key == "y") cfg.y = want_list_double(key, value, line);
    else if (key == "alpha") cfg.alpha = want_double(key, value, line);
    else if (key == "kendall_depth") cfg.kendall_depth = (int)want_integer(key, value, line);
    else if (key == "cert_scales") cfg.cert_scales = (int)want_integer(key, value, line);
    else if (key == "t_list") cfg.t_list = want_list_double(key, value, line);
    else if (key == "n_per_t") cfg.n_per_t = want_list_long(key, value, line);
    else if (key == "n_samples") cfg.n_samples = (long)want_integer(key, value, line);
    else if (key == "mode") cfg.mode = value;
    else if (key == "grid_half_extent") cfg.grid_half_extent = want_double(key, value, line);
    else if (key == "grid_n") cfg.grid_n = (int)want_integer(key, value, line);
    else if (key == "on_road_search_fraction") cfg.on_road_search_fraction = want_double(key, value, line);
    else if (key == "screen_scales") cfg.screen_scales = (int)want_integer(key, value, line);
    else if (key == "r") cfg.r = want_double(key, value, line);
    else if (key == "exponent_override") cfg.exponent_override = want_double(key, value, line);
    else if (key == "r_seq") cfg.r_seq = want_list_double(key, value, line);
    else if (key == "v_seq") cfg.v_seq = want_list_double(key, value, line);
    else if (key == "bound_n") cfg.bound_n = (int)want_integer(key, value, line);
    else if (key == "bound_k") cfg.bound_k = (int)want_integer(key, value, line);
    else if (key == "bound_samples") cfg.bound_samples = (long)want_integer(key, value, line);
    else if (key == "window_margin") cfg.window_margin = want_double(key, value, line);
    else if (key == "t_scales") cfg.t_scales = want_list_double(key, value, line);
    else if (key == "square_half") cfg.square_half = want_double(key, value, line);
    else if (key == "max_centers") cfg.max_centers = (long)want_integer(key, value, line);
    else throw ParseError("unknown key '" + key + "'" + detail::key_site(line));
    cfg.provided.insert(key);
}

namespace detail {

inline void check_coords(const RunConfig& cfg, const char* key, const std::vector<double>& coords) {
    if (!coords.empty() && (int)coords.size() != cfg.d)
        throw ParseError("key '" + std::string(key) + "': expected d = " + std::to_string(cfg.d) +
                         " coordinates, got " + std::to_string(coords.size()));
}

}  // namespace detail

// Cross-key constraints. Kept separate from set_config_key so command line
// overrides are applied before anything is rejected.
inline void validate_config(const RunConfig& cfg) {
    if (cfg.d < 2 || cfg.d > kMaxDim)
        throw ParseError("key 'd': must be between 2 and " + std::to_string(kMaxDim) + ", got " +
                         std::to_string(cfg.d));
    if (!(cfg.gamma > cfg.d)) {
        std::string g;
        detail::put_g17(g, cfg.gamma);
        throw ParseError("config violates the gamma > d constraint: gamma = " + g + ", d = " +
                         std::to_string(cfg.d));
    }
    if (!(cfg.window_radius > 0)) throw ParseError("key 'window_radius': must be positive");
    if (!(cfg.v0 > 0)) throw ParseError("key 'v0': must be positive");
    if (cfg.solver.epsilon < cfg.v0) {
        std::string e, v;
        detail::put_g17(e, cfg.solver.epsilon);
        detail::put_g17(v, cfg.v0);
        throw ParseError("config violates the epsilon >= v0 constraint: epsilon = " + e + ", v0 = " + v);
    }
    cfg.solver.validate();
    detail::check_coords(cfg, "center", cfg.center);
    detail::check_coords(cfg, "x", cfg.x);
    detail::check_coords(cfg, "y", cfg.y);
    if (cfg.mode != "typical" && cfg.mode != "on_road")
        throw ParseError("key 'mode': expected 'typical' or 'on_road', got '" + cfg.mode + "'");
    if (cfg.workers < 1) throw ParseError("key 'workers': must be >= 1");
    if (!(cfg.alpha > 0) || cfg.alpha > 1.0 / 3.0 + 1e-12)
        throw ParseError("key 'alpha': must lie in (0, 1/3]");
    if (cfg.kendall_depth < 1) throw ParseError("key 'kendall_depth': must be >= 1");
    if (cfg.cert_scales < 1) throw ParseError("key 'cert_scales': must be >= 1");
    if (cfg.screen_scales < 1) throw ParseError("key 'screen_scales': must be >= 1");
    if (cfg.grid_n < 2) throw ParseError("key 'grid_n': must be >= 2");
    if (!(cfg.grid_half_extent > 0)) throw ParseError("key 'grid_half_extent': must be positive");
    if (!(cfg.square_half > 0)) throw ParseError("key 'square_half': must be positive");
    if (cfg.on_road_search_fraction < 0 || cfg.on_road_search_fraction > 1)
        throw ParseError("key 'on_road_search_fraction': must lie in [0, 1]");
    if (!(cfg.r > 0)) throw ParseError("key 'r': must be positive");
    if (cfg.n_samples < 0) throw ParseError("key 'n_samples': must be >= 0");
    if (cfg.max_centers < 1) throw ParseError("key 'max_centers': must be >= 1");
    if (!(cfg.window_margin >= 1)) throw ParseError("key 'window_margin': must be >= 1");
    for (double t : cfg.t_list)
        if (!(t > 0)) throw ParseError("key 't_list': entries must be positive");
    for (double t : cfg.t_scales)
        if (!(t > 0)) throw ParseError("key 't_scales': entries must be positive");
    for (long n : cfg.n_per_t)
        if (n < 1) throw ParseError("key 'n_per_t': entries must be >= 1");
}

// Overrides (command line flags) are applied after the file so they win, and
// constraints are only checked once everything is in place.
inline RunConfig parse_config(const std::string& text,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
    RunConfig cfg;
    std::map<std::string, int> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty key");
        const auto [it, fresh] = seen.emplace(key, line_no);
        if (!fresh)
            throw ParseError("duplicate key '" + key + "' on line " + std::to_string(line_no) +
                             " (first set on line " + std::to_string(it->second) + ")");
        set_config_key(cfg, key, value, line_no);
    }
    for (const auto& [key, value] : overrides) set_config_key(cfg, key, value, 0);
    validate_config(cfg);
    return cfg;
}

// Full effective configuration, defaults included, plus the derived exponents.
// Emitted into every sidecar so a report is reproducible from the file alone.
inline std::vector<std::pair<std::string, std::string>> effective_entries(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    const auto put = [&out](const std::string& key, const std::string& value) { out.emplace_back(key, value); };
    const auto num = [&put](const std::string& key, double v) {
        std::string s;
        detail::put_g17(s, v);
        put(key, s);
    };
    const auto list = [&put](const std::string& key, const std::vector<double>& vs) {
        std::string s;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            if (i) s += ',';
            detail::put_g17(s, vs[i]);
        }
        put(key, s);
    };
    put("d", std::to_string(cfg.d));
    num("gamma", cfg.gamma);
    list("center", cfg.center);
    num("window_radius", cfg.window_radius);
    num("v0", cfg.v0);
    put("master_seed", std::to_string(cfg.master_seed));
    put("workers", std::to_string(cfg.workers));
    put("out_dir", cfg.out_dir);
    num("epsilon", cfg.solver.epsilon);
    put("hop_neighbors", std::to_string(cfg.solver.hop_neighbors));
    put("candidate_depth", std::to_string(cfg.solver.candidate_depth));
    put("refine_rounds", std::to_string(cfg.solver.refine_rounds));
    num("refine_tol", cfg.solver.refine_tol);
    put("refine_max_iters", std::to_string(cfg.solver.refine_max_iters));
    put("ingest_junctions", cfg.solver.ingest_recursive_junctions ? "1" : "0");
    list("x", cfg.x);
    list("y", cfg.y);
    num("alpha", cfg.alpha);
    put("kendall_depth", std::to_string(cfg.kendall_depth));
    put("cert_scales", std::to_string(cfg.cert_scales));
    list("t_list", cfg.t_list);
    {
        std::string s;
        for (std::size_t i = 0; i < cfg.n_per_t.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(cfg.n_per_t[i]);
        }
        put("n_per_t", s);
    }
    put("n_samples", std::to_string(cfg.n_samples));
    put("mode", cfg.mode);
    num("grid_half_extent", cfg.grid_half_extent);
    put("grid_n", std::to_string(cfg.grid_n));
    num("on_road_search_fraction", cfg.on_road_search_fraction);
    put("screen_scales", std::to_string(cfg.screen_scales));
    num("r", cfg.r);
    num("exponent_override", cfg.exponent_override);
    list("r_seq", cfg.r_seq);
    list("v_seq", cfg.v_seq);
    put("bound_n", std::to_string(cfg.bound_n));
    put("bound_k", std::to_string(cfg.bound_k));
    put("bound_samples", std::to_string(cfg.bound_samples));
    num("window_margin", cfg.window_margin);
    list("t_scales", cfg.t_scales);
    num("square_half", cfg.square_half);
    put("max_centers", std::to_string(cfg.max_centers));
    const Exponents ex = exponents(cfg.d, cfg.gamma);
    num("sigma", ex.sigma);
    num("s_star", ex.s_star);
    num("s_lower", ex.s_lower);
    num("scale_exp", ex.scale_exp);
    return out;
}

// ---------------------------------------------------------------------------
// plain file helpers

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.write(text.data(), (std::streamsize)text.size());
    f.flush();
    if (!f) throw IoError("write failed for " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (f.bad()) throw IoError("read failed for " + path);
    return text;
}

inline void write_meta(const std::string& path, const std::vector<std::pair<std::string, std::string>>& entries) {
    std::string text;
    for (const auto& [key, value] : entries) {
        text += key;
        text += " = ";
        text += value;
        text += '\n';
    }
    write_text_file(path, text);
}

// ---------------------------------------------------------------------------
// CSV

using CsvCell = std::variant<double, long long, std::string>;

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline std::string csv_text(const std::vector<std::vector<CsvCell>>& rows, const std::vector<std::string>& schema) {
    if (schema.empty()) throw std::invalid_argument("csv_text: empty schema");
    std::string text;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (i) text += ',';
        text += csv_escape(schema[i]);
    }
    text += '\n';
    for (const auto& row : rows) {
        if (row.size() != schema.size())
            throw std::invalid_argument("csv_text: row width " + std::to_string(row.size()) +
                                        " does not match schema width " + std::to_string(schema.size()));
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) text += ',';
            if (const double* v = std::get_if<double>(&row[i])) detail::put_g17(text, *v);
            else if (const long long* n = std::get_if<long long>(&row[i])) text += std::to_string(*n);
            else text += csv_escape(std::get<std::string>(row[i]));
        }
        text += '\n';
    }
    return text;
}

inline void write_csv(const std::vector<std::vector<CsvCell>>& rows, const std::vector<std::string>& schema,
                      const std::string& path) {
    write_text_file(path, csv_text(rows, schema));
}

// ---------------------------------------------------------------------------
// 16-bit PGM rasters

inline std::uint16_t quantize_16(double v, double v_max) {
    double u = v_max > 0 ? v / v_max : 0.0;
    if (!(u > 0)) u = 0.0;
    if (u > 1) u = 1.0;
    return (std::uint16_t)std::lround(65535.0 * u);
}

// Binary "P5" PGM, 16-bit big-endian samples scaled by the field maximum.
// A text sidecar at <path>.meta records the grid geometry and v_max (plus any
// caller entries, e.g. seed and config echo) so values can be reconstructed.
inline void write_field_pgm(const DistanceField& field, const std::string& path,
                            const std::vector<std::pair<std::string, std::string>>& sidecar_extra = {}) {
    const int nx = field.grid.nx, ny = field.grid.ny;
    if (nx < 1 || ny < 1 || field.values.size() != (std::size_t)nx * ny)
        throw std::invalid_argument("write_field_pgm: field geometry does not match its values");
    double v_max = 0.0;
    for (double v : field.values)
        if (v > v_max) v_max = v;
    std::string text = "P5\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n65535\n";
    text.reserve(text.size() + field.values.size() * 2);
    for (double v : field.values) {
        const std::uint16_t q = quantize_16(v, v_max);
        text += (char)(q >> 8);
        text += (char)(q & 0xff);
    }
    write_text_file(path, text);

    std::vector<std::pair<std::string, std::string>> meta;
    meta.emplace_back("format", "pgm16");
    meta.emplace_back("nx", std::to_string(nx));
    meta.emplace_back("ny", std::to_string(ny));
    std::string lo, hi, vm;
    for (int i = 0; i < field.grid.lo.d; ++i) {
        if (i) lo += ',';
        detail::put_g17(lo, field.grid.lo[i]);
    }
    for (int i = 0; i < field.grid.hi.d; ++i) {
        if (i) hi += ',';
        detail::put_g17(hi, field.grid.hi[i]);
    }
    detail::put_g17(vm, v_max);
    meta.emplace_back("lo", lo);
    meta.emplace_back("hi", hi);
    meta.emplace_back("v_max", vm);
    meta.emplace_back("version", version_stamp());
    for (const auto& kv : sidecar_extra) meta.push_back(kv);
    write_meta(path + ".meta", meta);
}

struct Pgm16 {
    int nx = 0;
    int ny = 0;
    std::vector<std::uint16_t> samples;
};

inline Pgm16 read_pgm16(const std::string& path) {
    const std::string text = read_text_file(path);
    std::size_t pos = 0;
    const auto token = [&text, &pos](const char* what) {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' || text[pos] == '\r'))
            ++pos;
        const std::size_t start = pos;
        while (pos < text.size() && !(text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' || text[pos] == '\r'))
            ++pos;
        if (start == pos) throw ParseError("read_pgm16: missing " + std::string(what));
        return text.substr(start, pos - start);
    };
    if (token("magic") != "P5") throw ParseError("read_pgm16: not a binary PGM file");
    Pgm16 img;
    img.nx = std::atoi(token("width").c_str());
    img.ny = std::atoi(token("height").c_str());
    if (img.nx < 1 || img.ny < 1) throw ParseError("read_pgm16: bad dimensions");
    if (token("maxval") != "65535") throw ParseError("read_pgm16: expected 16-bit samples");
    ++pos;  // single whitespace byte after maxval
    const std::size_t count = (std::size_t)img.nx * img.ny;
    if (text.size() - pos < count * 2) throw ParseError("read_pgm16: truncated sample data");
    img.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto hi8 = (unsigned char)text[pos + 2 * i];
        const auto lo8 = (unsigned char)text[pos + 2 * i + 1];
        img.samples[i] = (std::uint16_t)((hi8 << 8) | lo8);
    }
    return img;
}

}  // namespace roadnet
