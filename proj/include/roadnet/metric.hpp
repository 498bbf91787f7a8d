#pragma once
// Travel times on a sampled road network. A path alternates straight "hop"
// segments at speed epsilon with rides along roads at their own speeds; the
// infimum over such paths is approximated from above by a shortest path in a
// finite transfer graph followed by convex refinement of the junction
// positions, and from below by a ball-exit certificate. A recursive
// two-ball construction supplies an independent upper bound whose junctions
// can be fed back into the graph.
//
// Everything here is pure with respect to the sample: solves never mutate
// it, and concurrent solves over a shared sample or CoreGraph are safe.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "roadnet/errors.hpp"
#include "roadnet/geom.hpp"
#include "roadnet/sampler.hpp"
#include "roadnet/spatial.hpp"
#include "roadnet/vec.hpp"

namespace roadnet {

struct SolverConfig {
    double epsilon = 0.05;
    int hop_neighbors = 16;
    double refine_tol = 1e-10;
    int refine_max_iters = 60;
    int candidate_depth = 3;
    bool ingest_recursive_junctions = true;
    int refine_rounds = 2;
    // Accept samples whose speed floor v0 exceeds epsilon. Results are then
    // upper bounds for the fully sampled process rather than exact: the
    // missing roads in (epsilon, v0) could only have sped paths up. Meant for
    // rare-event experiments where sampling all the way down to epsilon is
    // infeasible; leave off everywhere else.
    bool allow_undersampled = false;

    void validate() const {
        if (!(epsilon > 0)) throw ConfigError("SolverConfig: epsilon must be positive");
        if (hop_neighbors < 1) throw ConfigError("SolverConfig: hop_neighbors must be >= 1");
        if (!(refine_tol > 0)) throw ConfigError("SolverConfig: refine_tol must be positive");
        if (refine_max_iters < 1) throw ConfigError("SolverConfig: refine_max_iters must be >= 1");
        if (candidate_depth < 0) throw ConfigError("SolverConfig: candidate_depth must be >= 0");
        if (refine_rounds < 1) throw ConfigError("SolverConfig: refine_rounds must be >= 1");
    }

    void check_against(const WindowSpec& window) const {
        validate();
        if (allow_undersampled) return;
        if (epsilon < window.v0)
            throw ConfigError("solver epsilon " + std::to_string(epsilon) +
                              " is below the sample speed floor v0 " + std::to_string(window.v0) +
                              "; the epsilon >= v0 constraint keeps truncation exact");
    }
};

enum class EdgeKind : std::uint8_t { road, hop };

struct TransferNode {
    int road = -1;  // -1 marks a terminal
    double param = 0.0;
    Vector pos;
};

struct TransferEdge {
    int u = 0;
    int v = 0;
    double length = 0.0;
    double cost = 0.0;
    EdgeKind kind = EdgeKind::hop;
};

struct TransferGraph {
    std::vector<TransferNode> nodes;
    std::vector<TransferEdge> edges;
    std::vector<int> terminal_ids;
    double epsilon = 0.0;

    // CSR adjacency: for node u, adj[head[u]..head[u+1]) holds (neighbor, edge index)
    std::vector<int> head;
    std::vector<std::pair<int, int>> adj;

    int x_id() const { return terminal_ids.at(0); }
    int y_id() const { return terminal_ids.at(1); }

    void build_adjacency() {
        const int n = static_cast<int>(nodes.size());
        head.assign(static_cast<std::size_t>(n) + 1, 0);
        for (const TransferEdge& e : edges) {
            ++head[static_cast<std::size_t>(e.u) + 1];
            ++head[static_cast<std::size_t>(e.v) + 1];
        }
        for (int i = 0; i < n; ++i) head[static_cast<std::size_t>(i) + 1] += head[static_cast<std::size_t>(i)];
        adj.resize(static_cast<std::size_t>(head[static_cast<std::size_t>(n)]));
        std::vector<int> fill(head.begin(), head.end() - 1);
        for (int ei = 0; ei < static_cast<int>(edges.size()); ++ei) {
            const TransferEdge& e = edges[static_cast<std::size_t>(ei)];
            adj[static_cast<std::size_t>(fill[static_cast<std::size_t>(e.u)]++)] = {e.v, ei};
            adj[static_cast<std::size_t>(fill[static_cast<std::size_t>(e.v)]++)] = {e.u, ei};
        }
    }
};

struct PathLeg {
    Vector from;
    Vector to;
    int road_index = -1;  // -1 = hop
    double duration = 0.0;
};

struct PathSolution {
    std::vector<PathLeg> legs;
    double total_time = 0.0;
};

inline void write_path(std::ostream& os, const PathSolution& path) {
    std::string line;
    for (const PathLeg& leg : path.legs) {
        line.clear();
        if (leg.road_index < 0) line = "hop";
        else line = "road " + std::to_string(leg.road_index);
        auto put = [&](double v) {
            line.push_back(' ');
            detail::put_g17(line, v);
        };
        for (int i = 0; i < leg.from.d; ++i) put(leg.from[i]);
        for (int i = 0; i < leg.to.d; ++i) put(leg.to[i]);
        put(leg.duration);
        os << line << '\n';
    }
}

// Junctions discovered outside the graph construction (by the recursive
// builder or a previous refinement round) that should become graph nodes.
// Links are hop edges between them; entries < 0 encode terminal -1-t.
struct JunctionHint {
    int road = 0;
    double param = 0.0;
};

struct IngestSet {
    std::vector<JunctionHint> junctions;
    std::vector<std::pair<int, int>> links;
    static int terminal_ref(int t) { return -1 - t; }
};

namespace detail {

// fastest road meeting both balls with speed strictly above `floor`; roads
// at or below the hop speed are never worth riding, so passing epsilon as
// the floor keeps the construction invariant to deleting them
inline int fastest_two_ball_index(const ProcessSample& sample, const Vector& a, double ra,
                                  const Vector& b, double rb, double floor) {
    int best = -1;
    double best_speed = floor;
    for (int i = 0; i < static_cast<int>(sample.roads.size()); ++i) {
        const Road& road = sample.roads[static_cast<std::size_t>(i)];
        if (road.speed <= best_speed) continue;
        if (point_line_distance(a, road.line) <= ra && point_line_distance(b, road.line) <= rb) {
            best = i;
            best_speed = road.speed;
        }
    }
    return best;
}

struct KendallRun {
    double time = 0.0;
    std::vector<JunctionHint> junctions;
    std::vector<Vector> junction_pos;
    std::vector<std::pair<int, int>> closures;   // enc: -1 = x, -2 = y, else junction index
    std::vector<std::pair<int, int>> road_legs;  // junction index pairs riding one road
};

inline KendallRun kendall_run(const ProcessSample& sample, const Vector& x, const Vector& y,
                              double alpha, int max_depth, double epsilon) {
    if (!(alpha > 0.0) || alpha > 1.0 / 3.0 + 1e-15)
        throw std::invalid_argument("kendall_recursive_upper: alpha must lie in (0, 1/3]");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("kendall_recursive_upper: epsilon must be positive");

    KendallRun run;
    struct Pending {
        Vector a;
        int enc_a;
        Vector b;
        int enc_b;
        int depth;
    };
    std::vector<Pending> stack;
    stack.push_back({x, -1, y, -2, 0});
    while (!stack.empty()) {
        Pending p = stack.back();
        stack.pop_back();
        const double gap = dist(p.a, p.b);
        if (gap == 0.0) continue;
        const double r = alpha * gap;
        const int road = p.depth < max_depth
                             ? fastest_two_ball_index(sample, p.a, r, p.b, r, epsilon)
                             : -1;
        if (road < 0) {
            run.time += gap / epsilon;
            run.closures.emplace_back(p.enc_a, p.enc_b);
            continue;
        }
        const Line& line = sample.roads[static_cast<std::size_t>(road)].line;
        const double ta = line_param(p.a, line);
        const double tb = line_param(p.b, line);
        const Vector pa = point_at(line, ta);
        const Vector pb = point_at(line, tb);
        const int ja = static_cast<int>(run.junctions.size());
        run.junctions.push_back({road, ta});
        run.junction_pos.push_back(pa);
        const int jb = static_cast<int>(run.junctions.size());
        run.junctions.push_back({road, tb});
        run.junction_pos.push_back(pb);
        run.time += std::abs(tb - ta) / sample.roads[static_cast<std::size_t>(road)].speed;
        run.road_legs.emplace_back(ja, jb);
        stack.push_back({p.b, p.enc_b, pb, jb, p.depth + 1});
        stack.push_back({p.a, p.enc_a, pa, ja, p.depth + 1});
    }
    return run;
}

}  // namespace detail

inline std::pair<double, std::vector<Vector>> kendall_recursive_upper(
    const ProcessSample& sample, const Vector& x, const Vector& y, double alpha, int max_depth,
    double epsilon) {
    if (epsilon < sample.window.v0)
        throw ConfigError("kendall_recursive_upper: epsilon below the sample speed floor v0");
    detail::KendallRun run = detail::kendall_run(sample, x, y, alpha, max_depth, epsilon);
    return {run.time, std::move(run.junction_pos)};
}

// Terminal-independent part of the transfer graph: per-road junction
// parameters (closest-pair points against every other road, with dyadic
// offsets at window scale) and the hop-neighbor pairs among them. Built
// once per (sample, config) and shared across solves.
struct CoreGraph {
    std::vector<int> active;              // original road indices, speed > epsilon
    std::vector<int> rank;                // road index -> slot in active, or -1
    std::vector<std::vector<double>> params;
    std::vector<int> flat_offset;         // rank -> first flat node id
    std::vector<Vector> pos;              // flat node positions
    std::vector<std::pair<int, int>> ref; // flat node -> (rank, slot)
    std::vector<std::pair<int, int>> hop_pairs;
    KdTree tree;

    int flat_id(int rk, int slot) const { return flat_offset[static_cast<std::size_t>(rk)] + slot; }
};

namespace detail {

inline void sort_dedup_params(std::vector<double>& ps) {
    std::sort(ps.begin(), ps.end());
    std::vector<double> out;
    out.reserve(ps.size());
    for (double p : ps) {
        if (out.empty() || p - out.back() > 1e-12 * std::max(1.0, std::abs(out.back())))
            out.push_back(p);
    }
    ps.swap(out);
}

}  // namespace detail

inline CoreGraph build_core_graph(const ProcessSample& sample, const SolverConfig& config) {
    config.check_against(sample.window);
    CoreGraph core;
    core.rank.assign(sample.roads.size(), -1);
    for (int i = 0; i < static_cast<int>(sample.roads.size()); ++i) {
        if (sample.roads[static_cast<std::size_t>(i)].speed > config.epsilon) {
            core.rank[static_cast<std::size_t>(i)] = static_cast<int>(core.active.size());
            core.active.push_back(i);
        }
    }
    const int na = static_cast<int>(core.active.size());
    core.params.assign(static_cast<std::size_t>(na), {});

    const double R = sample.window.R_win;
    auto push_with_offsets = [&](int rk, double p) {
        auto& ps = core.params[static_cast<std::size_t>(rk)];
        ps.push_back(p);
        for (int l = 1; l <= config.candidate_depth; ++l) {
            const double s = R * std::ldexp(1.0, -l);
            ps.push_back(p - s);
            ps.push_back(p + s);
        }
    };

    for (int ai = 0; ai < na; ++ai) {
        const Line& li = sample.roads[static_cast<std::size_t>(core.active[static_cast<std::size_t>(ai)])].line;
        for (int aj = ai + 1; aj < na; ++aj) {
            const Line& lj = sample.roads[static_cast<std::size_t>(core.active[static_cast<std::size_t>(aj)])].line;
            const ClosestPair cp = closest_pair(li, lj);
            if (cp.parallel) continue;
            push_with_offsets(ai, line_param(cp.a, li));
            push_with_offsets(aj, line_param(cp.b, lj));
        }
    }

    core.flat_offset.assign(static_cast<std::size_t>(na) + 1, 0);
    for (int ai = 0; ai < na; ++ai) {
        detail::sort_dedup_params(core.params[static_cast<std::size_t>(ai)]);
        core.flat_offset[static_cast<std::size_t>(ai) + 1] =
            core.flat_offset[static_cast<std::size_t>(ai)] +
            static_cast<int>(core.params[static_cast<std::size_t>(ai)].size());
    }
    const int nflat = core.flat_offset[static_cast<std::size_t>(na)];
    core.pos.reserve(static_cast<std::size_t>(nflat));
    core.ref.reserve(static_cast<std::size_t>(nflat));
    for (int ai = 0; ai < na; ++ai) {
        const Line& line = sample.roads[static_cast<std::size_t>(core.active[static_cast<std::size_t>(ai)])].line;
        const auto& ps = core.params[static_cast<std::size_t>(ai)];
        for (int s = 0; s < static_cast<int>(ps.size()); ++s) {
            core.pos.push_back(point_at(line, ps[static_cast<std::size_t>(s)]));
            core.ref.emplace_back(ai, s);
        }
    }
    core.tree = KdTree(core.pos);

    std::vector<int> nb;
    for (int u = 0; u < nflat; ++u) {
        const int my_rank = core.ref[static_cast<std::size_t>(u)].first;
        core.tree.knn(
            core.pos[static_cast<std::size_t>(u)], config.hop_neighbors,
            [&](int v) { return core.ref[static_cast<std::size_t>(v)].first != my_rank; }, nb);
        for (int v : nb) core.hop_pairs.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(core.hop_pairs.begin(), core.hop_pairs.end());
    core.hop_pairs.erase(std::unique(core.hop_pairs.begin(), core.hop_pairs.end()),
                         core.hop_pairs.end());
    return core;
}

namespace detail {

// one merged candidate on a road, tagged with where it came from so the
// assembled node ids can be reported back to projections and hints
struct RoadEntry {
    double param;
    int kind;  // 0 core, 1 terminal projection, 2 terminal offset, 3 hint
    int aux;   // core flat id / terminal index / hint index
    int seq;
};

}  // namespace detail

inline TransferGraph assemble_transfer_graph(const ProcessSample& sample, const CoreGraph& core,
                                             const std::vector<Vector>& terminals,
                                             const SolverConfig& config,
                                             const IngestSet& extra = {}) {
    config.check_against(sample.window);
    if (terminals.empty()) throw std::invalid_argument("assemble_transfer_graph: no terminals");
    for (const Vector& t : terminals)
        if (t.d != sample.window.d)
            throw std::invalid_argument("assemble_transfer_graph: terminal dimension mismatch");

    const int T = static_cast<int>(terminals.size());
    const int na = static_cast<int>(core.active.size());
    TransferGraph g;
    g.epsilon = config.epsilon;

    // ladder scale per terminal: separation from the farthest co-terminal,
    // or the window radius when solving one-to-all
    std::vector<double> tscale(static_cast<std::size_t>(T), sample.window.R_win);
    if (T > 1) {
        for (int t = 0; t < T; ++t) {
            double s = 0.0;
            for (int o = 0; o < T; ++o)
                if (o != t) s = std::max(s, dist(terminals[static_cast<std::size_t>(t)], terminals[static_cast<std::size_t>(o)]));
            tscale[static_cast<std::size_t>(t)] = s;
        }
    }

    std::vector<std::vector<detail::RoadEntry>> entries(static_cast<std::size_t>(na));
    int seq = 0;
    for (int ai = 0; ai < na; ++ai) {
        const int road = core.active[static_cast<std::size_t>(ai)];
        const auto& ps = core.params[static_cast<std::size_t>(ai)];
        auto& es = entries[static_cast<std::size_t>(ai)];
        es.reserve(ps.size() + static_cast<std::size_t>(T) * (1 + 2 * static_cast<std::size_t>(config.candidate_depth)));
        for (int s = 0; s < static_cast<int>(ps.size()); ++s)
            es.push_back({ps[static_cast<std::size_t>(s)], 0, core.flat_id(ai, s), seq++});
        const Line& line = sample.roads[static_cast<std::size_t>(road)].line;
        for (int t = 0; t < T; ++t) {
            const double p = line_param(terminals[static_cast<std::size_t>(t)], line);
            es.push_back({p, 1, t, seq++});
            for (int l = 1; l <= config.candidate_depth; ++l) {
                const double s = tscale[static_cast<std::size_t>(t)] * std::ldexp(1.0, -l);
                if (s == 0.0) break;
                es.push_back({p - s, 2, t, seq++});
                es.push_back({p + s, 2, t, seq++});
            }
        }
    }
    const int nh = static_cast<int>(extra.junctions.size());
    std::vector<int> free_hints;  // hints on roads outside the active set
    for (int k = 0; k < nh; ++k) {
        const JunctionHint& h = extra.junctions[static_cast<std::size_t>(k)];
        if (h.road < 0 || h.road >= static_cast<int>(sample.roads.size()))
            throw std::invalid_argument("assemble_transfer_graph: hint road out of range");
        const int rk = core.rank[static_cast<std::size_t>(h.road)];
        if (rk >= 0) entries[static_cast<std::size_t>(rk)].push_back({h.param, 3, k, seq++});
        else free_hints.push_back(k);
    }

    // terminals first, then road nodes by (road, param)
    for (int t = 0; t < T; ++t) {
        g.nodes.push_back({-1, 0.0, terminals[static_cast<std::size_t>(t)]});
        g.terminal_ids.push_back(t);
    }
    std::vector<std::vector<int>> proj_node(static_cast<std::size_t>(T),
                                            std::vector<int>(static_cast<std::size_t>(na), -1));
    std::vector<int> hint_node(static_cast<std::size_t>(nh), -1);
    std::vector<int> core_node(core.pos.size(), -1);
    std::vector<std::vector<int>> chain(static_cast<std::size_t>(na));

    for (int ai = 0; ai < na; ++ai) {
        auto& es = entries[static_cast<std::size_t>(ai)];
        std::sort(es.begin(), es.end(), [](const detail::RoadEntry& a, const detail::RoadEntry& b) {
            if (a.param != b.param) return a.param < b.param;
            if (a.kind != b.kind) return a.kind < b.kind;
            if (a.aux != b.aux) return a.aux < b.aux;
            return a.seq < b.seq;
        });
        const int road = core.active[static_cast<std::size_t>(ai)];
        const Line& line = sample.roads[static_cast<std::size_t>(road)].line;
        int node_id = -1;
        double group_param = 0.0;
        for (const detail::RoadEntry& e : es) {
            if (node_id < 0 || e.param - group_param > 1e-12 * std::max(1.0, std::abs(group_param))) {
                node_id = static_cast<int>(g.nodes.size());
                group_param = e.param;
                g.nodes.push_back({road, e.param, point_at(line, e.param)});
                chain[static_cast<std::size_t>(ai)].push_back(node_id);
            }
            if (e.kind == 0) core_node[static_cast<std::size_t>(e.aux)] = node_id;
            else if (e.kind == 1) proj_node[static_cast<std::size_t>(e.aux)][static_cast<std::size_t>(ai)] = node_id;
            else if (e.kind == 3) hint_node[static_cast<std::size_t>(e.aux)] = node_id;
        }
    }
    for (int k : free_hints) {
        const JunctionHint& h = extra.junctions[static_cast<std::size_t>(k)];
        const Line& line = sample.roads[static_cast<std::size_t>(h.road)].line;
        hint_node[static_cast<std::size_t>(k)] = static_cast<int>(g.nodes.size());
        g.nodes.push_back({h.road, h.param, point_at(line, h.param)});
    }

    // road edges: consecutive candidates along each active road
    for (int ai = 0; ai < na; ++ai) {
        const int road = core.active[static_cast<std::size_t>(ai)];
        const double speed = sample.roads[static_cast<std::size_t>(road)].speed;
        const auto& ch = chain[static_cast<std::size_t>(ai)];
        for (int s = 1; s < static_cast<int>(ch.size()); ++s) {
            const int u = ch[static_cast<std::size_t>(s - 1)];
            const int v = ch[static_cast<std::size_t>(s)];
            const double len = g.nodes[static_cast<std::size_t>(v)].param - g.nodes[static_cast<std::size_t>(u)].param;
            g.edges.push_back({u, v, len, len / speed, EdgeKind::road});
        }
    }

    // hop edges: cached core pairs, K nearest core nodes from every node
    // added on top of the core, K nearest among the added nodes themselves,
    // then the guaranteed terminal edges and explicit hint links
    std::vector<std::pair<int, int>> hops;
    for (const auto& pr : core.hop_pairs) {
        const int u = core_node[static_cast<std::size_t>(pr.first)];
        const int v = core_node[static_cast<std::size_t>(pr.second)];
        if (u != v) hops.emplace_back(std::min(u, v), std::max(u, v));
    }

    std::vector<int> added;
    for (int id = 0; id < T; ++id) added.push_back(id);
    {
        std::vector<char> is_core(g.nodes.size(), 0);
        for (int fid = 0; fid < static_cast<int>(core.pos.size()); ++fid)
            is_core[static_cast<std::size_t>(core_node[static_cast<std::size_t>(fid)])] = 1;
        for (int id = T; id < static_cast<int>(g.nodes.size()); ++id)
            if (!is_core[static_cast<std::size_t>(id)]) added.push_back(id);
    }
    std::vector<int> nb;
    auto rank_of_node = [&](int id) {
        const int road = g.nodes[static_cast<std::size_t>(id)].road;
        return road < 0 ? -1 : core.rank[static_cast<std::size_t>(road)];
    };
    for (int id : added) {
        const int my_rank = rank_of_node(id);
        core.tree.knn(
            g.nodes[static_cast<std::size_t>(id)].pos, config.hop_neighbors,
            [&](int v) { return core.ref[static_cast<std::size_t>(v)].first != my_rank; }, nb);
        for (int v : nb) {
            const int w = core_node[static_cast<std::size_t>(v)];
            if (w != id) hops.emplace_back(std::min(id, w), std::max(id, w));
        }
    }
    if (added.size() > 1) {
        std::vector<Vector> apos;
        apos.reserve(added.size());
        for (int id : added) apos.push_back(g.nodes[static_cast<std::size_t>(id)].pos);
        KdTree atree(apos);
        for (int i = 0; i < static_cast<int>(added.size()); ++i) {
            const int id = added[static_cast<std::size_t>(i)];
            const int my_road = g.nodes[static_cast<std::size_t>(id)].road;
            atree.knn(
                g.nodes[static_cast<std::size_t>(id)].pos, config.hop_neighbors,
                [&](int j) {
                    if (j == i) return false;
                    const int r = g.nodes[static_cast<std::size_t>(added[static_cast<std::size_t>(j)])].road;
                    return r < 0 || my_road < 0 || r != my_road;
                },
                nb);
            for (int j : nb) {
                const int w = added[static_cast<std::size_t>(j)];
                if (w != id) hops.emplace_back(std::min(id, w), std::max(id, w));
            }
        }
    }
    for (int t = 0; t < T; ++t)
        for (int o = t + 1; o < T; ++o) hops.emplace_back(t, o);
    for (int t = 0; t < T; ++t)
        for (int ai = 0; ai < na; ++ai) {
            const int p = proj_node[static_cast<std::size_t>(t)][static_cast<std::size_t>(ai)];
            if (p >= 0 && p != t) hops.emplace_back(std::min(t, p), std::max(t, p));
        }
    auto resolve = [&](int enc) {
        if (enc < 0) {
            const int t = -1 - enc;
            if (t >= T) throw std::invalid_argument("assemble_transfer_graph: bad terminal link");
            return t;
        }
        if (enc >= nh) throw std::invalid_argument("assemble_transfer_graph: bad hint link");
        return hint_node[static_cast<std::size_t>(enc)];
    };
    for (const auto& lk : extra.links) {
        const int u = resolve(lk.first);
        const int v = resolve(lk.second);
        if (u != v) hops.emplace_back(std::min(u, v), std::max(u, v));
    }

    std::sort(hops.begin(), hops.end());
    hops.erase(std::unique(hops.begin(), hops.end()), hops.end());
    for (const auto& h : hops) {
        const double len = dist(g.nodes[static_cast<std::size_t>(h.first)].pos,
                                g.nodes[static_cast<std::size_t>(h.second)].pos);
        g.edges.push_back({h.first, h.second, len, len / config.epsilon, EdgeKind::hop});
    }

    g.build_adjacency();
    return g;
}

inline TransferGraph build_transfer_graph(const ProcessSample& sample, const Vector& x,
                                          const Vector& y, const SolverConfig& config) {
    const CoreGraph core = build_core_graph(sample, config);
    IngestSet ingest;
    if (config.ingest_recursive_junctions) {
        detail::KendallRun run = detail::kendall_run(sample, x, y, 1.0 / 3.0, 12, config.epsilon);
        ingest.junctions = run.junctions;
        auto enc = [&](int e) { return e < 0 ? IngestSet::terminal_ref(-1 - e) : e; };
        for (const auto& c : run.closures) ingest.links.emplace_back(enc(c.first), enc(c.second));
        for (const auto& rl : run.road_legs) {
            const int road = run.junctions[static_cast<std::size_t>(rl.first)].road;
            if (core.rank[static_cast<std::size_t>(road)] < 0)
                ingest.links.emplace_back(rl.first, rl.second);
        }
    }
    return assemble_transfer_graph(sample, core, {x, y}, config, ingest);
}

namespace detail {

inline void dijkstra(const TransferGraph& g, int source, std::vector<double>& dist_out,
                     std::vector<int>& pred_edge, double epsilon_override = 0.0) {
    const int n = static_cast<int>(g.nodes.size());
    dist_out.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    pred_edge.assign(static_cast<std::size_t>(n), -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist_out[static_cast<std::size_t>(source)] = 0.0;
    pq.emplace(0.0, source);
    while (!pq.empty()) {
        const auto [du, u] = pq.top();
        pq.pop();
        if (du > dist_out[static_cast<std::size_t>(u)]) continue;
        for (int k = g.head[static_cast<std::size_t>(u)]; k < g.head[static_cast<std::size_t>(u) + 1]; ++k) {
            const auto [v, ei] = g.adj[static_cast<std::size_t>(k)];
            const TransferEdge& e = g.edges[static_cast<std::size_t>(ei)];
            const double cost = (epsilon_override > 0.0 && e.kind == EdgeKind::hop)
                                    ? e.length / epsilon_override
                                    : e.cost;
            const double dv = du + cost;
            if (dv < dist_out[static_cast<std::size_t>(v)]) {
                dist_out[static_cast<std::size_t>(v)] = dv;
                pred_edge[static_cast<std::size_t>(v)] = ei;
                pq.emplace(dv, v);
            }
        }
    }
}

struct SeqVisit {
    int road;
    double a;
    double b;
};

inline std::vector<SeqVisit> extract_sequence(const TransferGraph& g,
                                              const std::vector<int>& pred_edge, int src, int dst) {
    std::vector<int> nodes_rev;
    std::vector<int> edges_rev;
    int cur = dst;
    nodes_rev.push_back(cur);
    while (cur != src) {
        const int ei = pred_edge[static_cast<std::size_t>(cur)];
        if (ei < 0) return {};  // unreachable; callers fall back to the direct hop
        const TransferEdge& e = g.edges[static_cast<std::size_t>(ei)];
        cur = (e.u == cur) ? e.v : e.u;
        edges_rev.push_back(ei);
        nodes_rev.push_back(cur);
    }
    std::vector<SeqVisit> visits;
    int open = -1;
    for (int i = static_cast<int>(nodes_rev.size()) - 1; i >= 0; --i) {
        const int id = nodes_rev[static_cast<std::size_t>(i)];
        const TransferNode& nd = g.nodes[static_cast<std::size_t>(id)];
        const bool via_road =
            i < static_cast<int>(nodes_rev.size()) - 1 &&
            g.edges[static_cast<std::size_t>(edges_rev[static_cast<std::size_t>(i)])].kind == EdgeKind::road;
        if (nd.road < 0) {
            open = -1;
            continue;
        }
        if (via_road && open >= 0 && visits[static_cast<std::size_t>(open)].road == nd.road) {
            visits[static_cast<std::size_t>(open)].b = nd.param;
        } else {
            open = static_cast<int>(visits.size());
            visits.push_back({nd.road, nd.param, nd.param});
        }
    }
    return visits;
}

template <typename F>
inline double golden_min(F&& f, double lo, double hi, double tol) {
    constexpr double phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

}  // namespace detail

// Minimize travel time over the 2k junction parameters of a fixed road
// sequence by cyclic coordinate descent. Each one-dimensional slice is a sum
// of Euclidean norms of affine functions of the parameter, hence convex, so
// golden-section search finds its minimum; brackets are re-expanded whenever
// the minimizer lands near an end.
inline PathSolution refine_path(const ProcessSample& sample, const std::vector<int>& road_sequence,
                                const Vector& x, const Vector& y, double epsilon,
                                double tol = 1e-10, int max_iters = 60,
                                const std::vector<double>* initial_params = nullptr,
                                std::vector<double>* final_params = nullptr) {
    if (!(epsilon > 0)) throw std::invalid_argument("refine_path: epsilon must be positive");
    const int k = static_cast<int>(road_sequence.size());
    std::vector<const Line*> lines;
    std::vector<double> speeds;
    lines.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const int r = road_sequence[static_cast<std::size_t>(j)];
        if (r < 0 || r >= static_cast<int>(sample.roads.size()))
            throw std::invalid_argument("refine_path: road index out of range");
        lines.push_back(&sample.roads[static_cast<std::size_t>(r)].line);
        speeds.push_back(sample.roads[static_cast<std::size_t>(r)].speed);
    }

    std::vector<double> p(static_cast<std::size_t>(2 * k));
    if (initial_params) {
        if (static_cast<int>(initial_params->size()) != 2 * k)
            throw std::invalid_argument("refine_path: initial parameter count mismatch");
        p = *initial_params;
    } else {
        Vector prev = x;
        for (int j = 0; j < k; ++j) {
            p[static_cast<std::size_t>(2 * j)] = line_param(prev, *lines[static_cast<std::size_t>(j)]);
            p[static_cast<std::size_t>(2 * j + 1)] = line_param(y, *lines[static_cast<std::size_t>(j)]);
            prev = point_at(*lines[static_cast<std::size_t>(j)], p[static_cast<std::size_t>(2 * j + 1)]);
        }
    }

    auto eval = [&](const std::vector<double>& q) {
        double t = 0.0;
        Vector prev = x;
        for (int j = 0; j < k; ++j) {
            const Vector A = point_at(*lines[static_cast<std::size_t>(j)], q[static_cast<std::size_t>(2 * j)]);
            const Vector B = point_at(*lines[static_cast<std::size_t>(j)], q[static_cast<std::size_t>(2 * j + 1)]);
            t += dist(prev, A) / epsilon;
            t += std::abs(q[static_cast<std::size_t>(2 * j + 1)] - q[static_cast<std::size_t>(2 * j)]) /
                 speeds[static_cast<std::size_t>(j)];
            prev = B;
        }
        return t + dist(prev, y) / epsilon;
    };

    if (k > 0) {
        std::vector<double> base_width(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j)
            base_width[static_cast<std::size_t>(j)] =
                dist(x, y) + point_line_distance(x, *lines[static_cast<std::size_t>(j)]) +
                point_line_distance(y, *lines[static_cast<std::size_t>(j)]) + 1e-6;
        double prev_total = eval(p);
        for (int sweep = 0; sweep < max_iters; ++sweep) {
            for (int c = 0; c < 2 * k; ++c) {
                double center = p[static_cast<std::size_t>(c)];
                double width = base_width[static_cast<std::size_t>(c / 2)];
                auto slice = [&](double s) {
                    const double keep = p[static_cast<std::size_t>(c)];
                    p[static_cast<std::size_t>(c)] = s;
                    const double v = eval(p);
                    p[static_cast<std::size_t>(c)] = keep;
                    return v;
                };
                for (int grow = 0; grow < 12; ++grow) {
                    const double gtol = 1e-12 * std::max(1.0, std::abs(center) + width);
                    const double s = detail::golden_min(slice, center - width, center + width, gtol);
                    if (std::abs(s - center) < 0.98 * width) {
                        p[static_cast<std::size_t>(c)] = s;
                        break;
                    }
                    center = s;
                    width *= 2.0;
                }
            }
            const double total = eval(p);
            if (prev_total - total < tol) break;
            prev_total = total;
        }
    }

    if (final_params) *final_params = p;

    PathSolution sol;
    Vector prev = x;
    auto add_leg = [&](const Vector& from, const Vector& to, int road, double duration) {
        if (duration == 0.0 && dist(from, to) == 0.0) return;
        sol.legs.push_back({from, to, road, duration});
        sol.total_time += duration;
    };
    for (int j = 0; j < k; ++j) {
        const Vector A = point_at(*lines[static_cast<std::size_t>(j)], p[static_cast<std::size_t>(2 * j)]);
        const Vector B = point_at(*lines[static_cast<std::size_t>(j)], p[static_cast<std::size_t>(2 * j + 1)]);
        add_leg(prev, A, -1, dist(prev, A) / epsilon);
        add_leg(A, B, road_sequence[static_cast<std::size_t>(j)],
                std::abs(p[static_cast<std::size_t>(2 * j + 1)] - p[static_cast<std::size_t>(2 * j)]) /
                    speeds[static_cast<std::size_t>(j)]);
        prev = B;
    }
    add_leg(prev, y, -1, dist(prev, y) / epsilon);
    return sol;
}

namespace detail {

struct RefineOutcome {
    PathSolution path;
    std::vector<SeqVisit> visits;
};

inline RefineOutcome refine_visits(const ProcessSample& sample, const std::vector<SeqVisit>& visits,
                                   const Vector& x, const Vector& y, const SolverConfig& config) {
    std::vector<int> roads;
    std::vector<double> init;
    roads.reserve(visits.size());
    init.reserve(2 * visits.size());
    for (const SeqVisit& v : visits) {
        roads.push_back(v.road);
        init.push_back(v.a);
        init.push_back(v.b);
    }
    RefineOutcome out;
    std::vector<double> final_params;
    out.path = refine_path(sample, roads, x, y, config.epsilon, config.refine_tol,
                           config.refine_max_iters, init.empty() ? nullptr : &init,
                           &final_params);
    out.visits = visits;
    for (std::size_t j = 0; j < out.visits.size(); ++j) {
        out.visits[j].a = final_params[2 * j];
        out.visits[j].b = final_params[2 * j + 1];
    }
    return out;
}

inline void append_visit_path(IngestSet& ingest, const std::vector<SeqVisit>& visits, int enc_x,
                              int enc_y) {
    int prev = enc_x;
    for (const SeqVisit& v : visits) {
        const int ja = static_cast<int>(ingest.junctions.size());
        ingest.junctions.push_back({v.road, v.a});
        const int jb = static_cast<int>(ingest.junctions.size());
        ingest.junctions.push_back({v.road, v.b});
        ingest.links.emplace_back(prev, ja);
        prev = jb;
    }
    ingest.links.emplace_back(prev, enc_y);
}

inline void append_kendall(IngestSet& ingest, const KendallRun& run, int enc_x, int enc_y,
                           const CoreGraph& core) {
    const int base = static_cast<int>(ingest.junctions.size());
    for (const JunctionHint& j : run.junctions) ingest.junctions.push_back(j);
    auto enc = [&](int e) {
        if (e == -1) return enc_x;
        if (e == -2) return enc_y;
        return base + e;
    };
    for (const auto& c : run.closures) ingest.links.emplace_back(enc(c.first), enc(c.second));
    for (const auto& rl : run.road_legs) {
        const int road = run.junctions[static_cast<std::size_t>(rl.first)].road;
        if (core.rank[static_cast<std::size_t>(road)] < 0)
            ingest.links.emplace_back(enc(rl.first), enc(rl.second));
    }
}

}  // namespace detail

struct UpperBound {
    double time = 0.0;
    PathSolution path;
    bool window_suspect = false;
};

inline UpperBound t_eps_upper_with_core(const ProcessSample& sample, const CoreGraph& core,
                                        const Vector& x, const Vector& y,
                                        const SolverConfig& config) {
    config.check_against(sample.window);
    UpperBound best;
    if (dist(x, y) == 0.0) return best;

    best.path.legs.push_back({x, y, -1, dist(x, y) / config.epsilon});
    best.path.total_time = best.path.legs[0].duration;
    best.time = best.path.total_time;

    IngestSet ingest;
    if (config.ingest_recursive_junctions) {
        const detail::KendallRun run =
            detail::kendall_run(sample, x, y, 1.0 / 3.0, 12, config.epsilon);
        detail::append_kendall(ingest, run, IngestSet::terminal_ref(0), IngestSet::terminal_ref(1),
                               core);
    }

    std::vector<double> dist_x;
    std::vector<int> pred;
    for (int round = 0; round < config.refine_rounds; ++round) {
        const TransferGraph g = assemble_transfer_graph(sample, core, {x, y}, config, ingest);
        detail::dijkstra(g, g.x_id(), dist_x, pred);
        const std::vector<detail::SeqVisit> visits =
            detail::extract_sequence(g, pred, g.x_id(), g.y_id());
        const detail::RefineOutcome out = detail::refine_visits(sample, visits, x, y, config);
        if (out.path.total_time < best.path.total_time || best.path.legs.empty()) {
            best.path = out.path;
            best.time = out.path.total_time;
        }
        if (round + 1 < config.refine_rounds)
            detail::append_visit_path(ingest, out.visits, IngestSet::terminal_ref(0),
                                      IngestSet::terminal_ref(1));
    }

    const double guard = 0.8 * sample.window.R_win;
    for (const PathLeg& leg : best.path.legs) {
        if (dist(leg.from, sample.window.center) > guard ||
            dist(leg.to, sample.window.center) > guard) {
            best.window_suspect = true;
            break;
        }
    }
    return best;
}

inline UpperBound t_eps_upper(const ProcessSample& sample, const Vector& x, const Vector& y,
                              const SolverConfig& config) {
    config.check_against(sample.window);
    if (dist(x, y) == 0.0) return {};
    const CoreGraph core = build_core_graph(sample, config);
    return t_eps_upper_with_core(sample, core, x, y, config);
}

// Shortest x-to-y time in an already built graph, optionally re-costing the
// hop edges at a different epsilon. With the node set held fixed, shrinking
// epsilon raises every hop cost, so the reported time is monotone in it.
inline double transfer_graph_time(const TransferGraph& g, double epsilon_override = 0.0) {
    if (g.terminal_ids.size() < 2)
        throw std::invalid_argument("transfer_graph_time: graph has fewer than two terminals");
    std::vector<double> d;
    std::vector<int> pred;
    detail::dijkstra(g, g.x_id(), d, pred, epsilon_override);
    return d[static_cast<std::size_t>(g.y_id())];
}

// All-pairs times over a shared terminal set: one graph, one Dijkstra per
// terminal, refinement of each discovered pair sequence fed back as graph
// nodes, then a final Dijkstra pass. Reporting the final graph distances
// keeps the matrix exactly symmetric and exactly triangle-consistent.
struct PairwiseTimes {
    int n = 0;
    std::vector<double> times;
    double at(int i, int j) const { return times[static_cast<std::size_t>(i * n + j)]; }
};

inline PairwiseTimes pairwise_times(const ProcessSample& sample,
                                    const std::vector<Vector>& terminals,
                                    const SolverConfig& config) {
    config.check_against(sample.window);
    const int T = static_cast<int>(terminals.size());
    if (T < 1) throw std::invalid_argument("pairwise_times: no terminals");
    const CoreGraph core = build_core_graph(sample, config);

    IngestSet ingest;
    if (config.ingest_recursive_junctions) {
        for (int i = 0; i < T; ++i)
            for (int j = i + 1; j < T; ++j) {
                const detail::KendallRun run = detail::kendall_run(
                    sample, terminals[static_cast<std::size_t>(i)],
                    terminals[static_cast<std::size_t>(j)], 1.0 / 3.0, 12, config.epsilon);
                detail::append_kendall(ingest, run, IngestSet::terminal_ref(i),
                                       IngestSet::terminal_ref(j), core);
            }
    }

    std::vector<double> d;
    std::vector<int> pred;
    for (int round = 0; round + 1 < config.refine_rounds; ++round) {
        const TransferGraph g = assemble_transfer_graph(sample, core, terminals, config, ingest);
        IngestSet next = ingest;
        for (int i = 0; i < T; ++i) {
            detail::dijkstra(g, g.terminal_ids[static_cast<std::size_t>(i)], d, pred);
            for (int j = i + 1; j < T; ++j) {
                const std::vector<detail::SeqVisit> visits = detail::extract_sequence(
                    g, pred, g.terminal_ids[static_cast<std::size_t>(i)],
                    g.terminal_ids[static_cast<std::size_t>(j)]);
                const detail::RefineOutcome out = detail::refine_visits(
                    sample, visits, terminals[static_cast<std::size_t>(i)],
                    terminals[static_cast<std::size_t>(j)], config);
                detail::append_visit_path(next, out.visits, IngestSet::terminal_ref(i),
                                          IngestSet::terminal_ref(j));
            }
        }
        ingest = std::move(next);
    }

    const TransferGraph g = assemble_transfer_graph(sample, core, terminals, config, ingest);
    PairwiseTimes out;
    out.n = T;
    out.times.assign(static_cast<std::size_t>(T) * static_cast<std::size_t>(T), 0.0);
    for (int i = 0; i < T; ++i) {
        detail::dijkstra(g, g.terminal_ids[static_cast<std::size_t>(i)], d, pred);
        for (int j = 0; j < T; ++j)
            out.times[static_cast<std::size_t>(i * T + j)] =
                d[static_cast<std::size_t>(g.terminal_ids[static_cast<std::size_t>(j)])];
    }
    return out;
}

// Ball-exit lower bound: leaving B(z, r) costs at least r / max(eps, V)
// where V is the fastest road meeting the ball. Scales whose ball pokes out
// of the sampling window are skipped; the sample cannot certify them.
inline double lower_certificate(const ProcessSample& sample, const Vector& x, const Vector& y,
                                double epsilon, int n_scales) {
    if (!(epsilon > 0)) throw ConfigError("lower_certificate: epsilon must be positive");
    if (epsilon < sample.window.v0)
        throw ConfigError("lower_certificate: epsilon below the sample speed floor v0");
    if (n_scales < 1) throw std::invalid_argument("lower_certificate: n_scales must be >= 1");
    const double D = dist(x, y);
    if (D == 0.0) return 0.0;
    double best = 0.0;
    for (int k = 0; k < n_scales; ++k) {
        const double r = std::ldexp(D, -k);
        for (const Vector* z : {&x, &y}) {
            if (dist(*z, sample.window.center) + r > sample.window.R_win * (1 + 1e-9)) continue;
            const double v = fastest_in_ball(sample, *z, r);
            best = std::max(best, r / std::max(epsilon, v));
        }
    }
    return best;
}

struct GridSpec {
    Vector lo;
    Vector hi;
    int nx = 0;
    int ny = 0;
};

struct DistanceField {
    Vector origin;
    GridSpec grid;
    double epsilon = 0.0;
    std::uint64_t sample_seed = 0;
    std::vector<double> values;  // row-major, iy * nx + ix, at pixel centers
    double boundary_reach = std::numeric_limits<double>::infinity();

    double pixel_w() const { return (grid.hi[0] - grid.lo[0]) / grid.nx; }
    double pixel_h() const { return (grid.hi[1] - grid.lo[1]) / grid.ny; }
    Vector pixel_center(int ix, int iy) const {
        return Vector{grid.lo[0] + (ix + 0.5) * pixel_w(), grid.lo[1] + (iy + 0.5) * pixel_h()};
    }
    double at(int ix, int iy) const {
        return values[static_cast<std::size_t>(iy) * static_cast<std::size_t>(grid.nx) +
                      static_cast<std::size_t>(ix)];
    }
};

// Rasterized one-to-all travel time. Every path ends with a straight run
// from its last graph node, so pixel values are exactly
// min(|x-p|/eps, min_n dist(n) + |p-n|/eps), an additively weighted nearest
// neighbor query over the graph nodes.
inline DistanceField distance_field_with_core(const ProcessSample& sample, const CoreGraph& core,
                                              const Vector& x, const GridSpec& grid,
                                              const SolverConfig& config) {
    config.check_against(sample.window);
    if (sample.window.d != 2)
        throw std::invalid_argument("distance_field: raster output needs d = 2");
    if (grid.nx < 1 || grid.ny < 1)
        throw std::invalid_argument("distance_field: grid must have at least one pixel");
    if (!(grid.hi[0] > grid.lo[0]) || !(grid.hi[1] > grid.lo[1]))
        throw std::invalid_argument("distance_field: grid corners out of order");

    const TransferGraph g = assemble_transfer_graph(sample, core, {x}, config);
    std::vector<double> d;
    std::vector<int> pred;
    detail::dijkstra(g, g.terminal_ids[0], d, pred);

    std::vector<Vector> pts;
    pts.reserve(g.nodes.size());
    for (const TransferNode& nd : g.nodes) pts.push_back(nd.pos);
    KdTree tree(std::move(pts));
    std::vector<double> w(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) w[i] = config.epsilon * d[i];
    tree.set_weights_hint(w);

    DistanceField field;
    field.origin = x;
    field.grid = grid;
    field.epsilon = config.epsilon;
    field.sample_seed = sample.seed;
    field.values.resize(static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny));
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
            double val = 0.0;
            tree.weighted_nearest(field.pixel_center(ix, iy), w, &val);
            const double t = val / config.epsilon;
            field.values[static_cast<std::size_t>(iy) * static_cast<std::size_t>(grid.nx) +
                         static_cast<std::size_t>(ix)] = t;
            if (ix == 0 || iy == 0 || ix == grid.nx - 1 || iy == grid.ny - 1)
                field.boundary_reach = std::min(field.boundary_reach, t);
        }
    return field;
}

inline DistanceField distance_field(const ProcessSample& sample, const Vector& x,
                                    const GridSpec& grid, const SolverConfig& config) {
    const CoreGraph core = build_core_graph(sample, config);
    return distance_field_with_core(sample, core, x, grid, config);
}

inline double ball_volume(const DistanceField& field, double t,
                          bool* boundary_contaminated = nullptr) {
    if (t < 0) throw std::invalid_argument("ball_volume: radius must be nonnegative");
    std::size_t count = 0;
    for (double v : field.values)
        if (v <= t) ++count;
    if (boundary_contaminated) *boundary_contaminated = t >= field.boundary_reach;
    return static_cast<double>(count) * field.pixel_w() * field.pixel_h();
}

}  // namespace roadnet
