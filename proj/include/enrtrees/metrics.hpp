#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"
#include "symmetry.hpp"

namespace enr {

// Edge-length laws for first-passage percolation variants; DET1 is the plain
// graph metric.
enum class EdgeLaw { DET1, EXP1, UNIF01 };

inline double draw_edge_length(EdgeLaw law, RngStream& rng) {
    switch (law) {
        case EdgeLaw::DET1: return 1.0;
        case EdgeLaw::EXP1: return rng.next_exp1();
        case EdgeLaw::UNIF01: return rng.next_u01();
    }
    return 1.0;
}

// ---------------------------------------------------------------------------
// Patched metric space: the expanded tree with a local metric patch per
// attachment. For plain trees each parent-child edge is a two-point patch;
// for block models each block instance is a patch whose local distances are
// shortest paths around the polygon. Distances in the glued space decompose
// along the block tree, which keeps diameter and height exact in one DP pass.
// ---------------------------------------------------------------------------
struct PatchedSpace {
    struct Patch {
        std::vector<int> pts;     // pts[0] is the parent-side vertex
        std::vector<double> dist; // row-major square matrix over pts
        double d(std::size_t a, std::size_t b) const { return dist[a * pts.size() + b]; }
    };
    int n = 0;
    int root = 0;
    std::vector<std::vector<int>> patches_below; // per vertex, patch indices
    std::vector<Patch> patches;
};

namespace detail {

// local matrix of a polygon patch: vertices in path order root, a_0, .., a_{s-1}
// with per-edge lengths; shortest path = min of the two arc sums
inline std::vector<double> polygon_matrix(const std::vector<double>& edge_len) {
    std::size_t p = edge_len.size(); // polygon size (edges == vertices)
    std::vector<double> pref(p + 1, 0.0);
    for (std::size_t i = 0; i < p; ++i) pref[i + 1] = pref[i] + edge_len[i];
    double total = pref[p];
    std::vector<double> m(p * p, 0.0);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) {
            double arc = std::abs(pref[a] - pref[b]);
            m[a * p + b] = std::min(arc, total - arc);
        }
    return m;
}

} // namespace detail

inline PatchedSpace build_patched_space(const MaterializedTree& mt, EdgeLaw law, RngStream& rng) {
    PatchedSpace ps;
    ps.n = int(mt.size());
    ps.root = 0;
    ps.patches_below.assign(mt.size(), {});
    for (std::size_t v = 0; v < mt.size(); ++v) {
        if (!mt.blocks[v].empty()) {
            for (const auto& inst : mt.blocks[v]) {
                PatchedSpace::Patch p;
                p.pts.push_back(int(v));
                for (int a : inst.atoms) p.pts.push_back(a);
                std::size_t s = p.pts.size();
                if (inst.atoms.size() == 1) {
                    double w = draw_edge_length(law, rng);
                    p.dist = {0.0, w, w, 0.0};
                } else {
                    std::vector<double> el(s);
                    for (auto& e : el) e = draw_edge_length(law, rng);
                    p.dist = detail::polygon_matrix(el);
                }
                ps.patches_below[v].push_back(int(ps.patches.size()));
                ps.patches.push_back(std::move(p));
            }
        } else {
            for (int c : mt.children[v]) {
                PatchedSpace::Patch p;
                p.pts = {int(v), c};
                double w = draw_edge_length(law, rng);
                p.dist = {0.0, w, w, 0.0};
                ps.patches_below[v].push_back(int(ps.patches.size()));
                ps.patches.push_back(std::move(p));
            }
        }
    }
    return ps;
}

struct DiameterHeight {
    double diameter = 0.0;
    double height = 0.0;
};

// Exact diameter and root height of the patched space. down[v] is the deepest
// descent below v; a diametral path peaks at some vertex and either combines
// two arms through it (distinct patches) or rides a within-patch shortcut
// between two atoms of one block.
inline DiameterHeight diameter_height(const PatchedSpace& ps) {
    DiameterHeight out;
    if (ps.n == 0) return out;
    std::vector<double> down(std::size_t(ps.n), 0.0);
    // post-order via explicit two-phase stack (children = patch atoms)
    std::vector<std::pair<int, bool>> st{{ps.root, false}};
    double best = 0.0;
    while (!st.empty()) {
        auto [v, done] = st.back();
        st.pop_back();
        if (!done) {
            st.push_back({v, true});
            for (int pi : ps.patches_below[std::size_t(v)]) {
                const auto& p = ps.patches[std::size_t(pi)];
                for (std::size_t a = 1; a < p.pts.size(); ++a) st.push_back({p.pts[a], false});
            }
            continue;
        }
        double top1 = 0.0, top2 = 0.0; // best two arms over distinct patches
        for (int pi : ps.patches_below[std::size_t(v)]) {
            const auto& p = ps.patches[std::size_t(pi)];
            double arm = 0.0;
            for (std::size_t a = 1; a < p.pts.size(); ++a) {
                double cand = p.d(0, a) + down[std::size_t(p.pts[a])];
                arm = std::max(arm, cand);
                // within-patch pair with the polygon shortcut
                for (std::size_t b = a + 1; b < p.pts.size(); ++b)
                    best = std::max(best, down[std::size_t(p.pts[a])] + p.d(a, b) +
                                              down[std::size_t(p.pts[b])]);
            }
            if (arm > top1) {
                top2 = top1;
                top1 = arm;
            } else if (arm > top2) {
                top2 = arm;
            }
        }
        best = std::max(best, top1 + top2);
        down[std::size_t(v)] = top1;
    }
    out.diameter = best;
    out.height = down[std::size_t(ps.root)];
    return out;
}

// ---------------------------------------------------------------------------
// Exact distances on small graphs (decoded objects); Dijkstra per source.
// ---------------------------------------------------------------------------

// per-edge lengths keyed by the unordered vertex pair
struct EdgeLengths {
    std::unordered_map<std::uint64_t, double> w;
    static std::uint64_t key(int u, int v) {
        if (u > v) std::swap(u, v);
        return (std::uint64_t(std::uint32_t(u)) << 32) | std::uint64_t(std::uint32_t(v));
    }
    double at(int u, int v) const {
        auto it = w.find(key(u, v));
        return it == w.end() ? 1.0 : it->second;
    }
};

inline std::vector<double> graph_distances(const Graph& g, int src,
                                           const EdgeLengths* edge_len = nullptr) {
    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> dist(std::size_t(g.size()), INF);
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
    dist[std::size_t(src)] = 0.0;
    pq.push({0.0, src});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[std::size_t(u)]) continue;
        for (int v : g.neighbors(u)) {
            double nd = d + (edge_len ? edge_len->at(u, v) : 1.0);
            if (nd < dist[std::size_t(v)]) {
                dist[std::size_t(v)] = nd;
                pq.push({nd, v});
            }
        }
    }
    return dist;
}

// exact diameter/height for an arbitrary connected graph with optional FPP
// edge lengths (indexed per graph edge id); quadratic in n, intended for
// decoded structures up to 2^12 vertices
inline DiameterHeight graph_diameter_height(const Graph& g, int root,
                                            const EdgeLengths* edge_len = nullptr) {
    DiameterHeight out;
    for (int s = 0; s < g.size(); ++s) {
        auto d = graph_distances(g, s, edge_len);
        for (double x : d) {
            if (std::isinf(x)) throw std::domain_error("diameter: graph is disconnected");
            out.diameter = std::max(out.diameter, x);
            if (s == root) out.height = std::max(out.height, x);
        }
    }
    return out;
}

inline EdgeLengths draw_graph_edge_lengths(const Graph& g, EdgeLaw law, RngStream& rng) {
    EdgeLengths el;
    for (int u = 0; u < g.size(); ++u)
        for (int v : g.neighbors(u))
            if (u < v) el.w[EdgeLengths::key(u, v)] = draw_edge_length(law, rng);
    return el;
}

// ---------------------------------------------------------------------------
// Neighborhood balls.
// ---------------------------------------------------------------------------

enum class BallMetric { GRAPH, BLOCK };

struct Ball {
    Graph graph;         // induced subgraph, re-indexed
    int center = 0;      // index of the center in the ball
    std::vector<int> ids; // ball index -> original vertex
};

// radius-r ball: GRAPH uses edge hops; BLOCK counts the number of blocks a
// path crosses (vertices of a shared block are at block-distance 1)
inline Ball neighborhood(const Graph& g, int center, int radius, BallMetric metric,
                         int max_points = 4096) {
    std::vector<int> dist(std::size_t(g.size()), -1);
    std::vector<int> order;
    dist[std::size_t(center)] = 0;
    order.push_back(center);
    if (metric == BallMetric::GRAPH) {
        std::queue<int> q;
        q.push(center);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            if (dist[std::size_t(u)] == radius) continue;
            for (int v : g.neighbors(u))
                if (dist[std::size_t(v)] < 0) {
                    dist[std::size_t(v)] = dist[std::size_t(u)] + 1;
                    order.push_back(v);
                    q.push(v);
                }
        }
    } else {
        auto comps = biconnected_components(g);
        // vertex -> blocks incidence
        std::vector<std::vector<int>> vblocks(std::size_t(g.size()));
        for (std::size_t b = 0; b < comps.size(); ++b) {
            std::vector<int> vs;
            for (auto& [u, v] : comps[b]) {
                vs.push_back(u);
                vs.push_back(v);
            }
            std::sort(vs.begin(), vs.end());
            vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
            for (int u : vs) vblocks[std::size_t(u)].push_back(int(b));
        }
        std::vector<std::vector<int>> bverts(comps.size());
        for (std::size_t u = 0; u < vblocks.size(); ++u)
            for (int b : vblocks[u]) bverts[std::size_t(b)].push_back(int(u));
        std::queue<int> q;
        q.push(center);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            if (dist[std::size_t(u)] == radius) continue;
            for (int b : vblocks[std::size_t(u)])
                for (int v : bverts[std::size_t(b)])
                    if (dist[std::size_t(v)] < 0) {
                        dist[std::size_t(v)] = dist[std::size_t(u)] + 1;
                        order.push_back(v);
                        q.push(v);
                    }
        }
    }
    if (int(order.size()) > max_points)
        throw std::domain_error("neighborhood: ball exceeds the point cap");
    Ball ball;
    std::vector<int> back(std::size_t(g.size()), -1);
    for (std::size_t i = 0; i < order.size(); ++i) back[std::size_t(order[i])] = int(i);
    ball.graph = Graph(int(order.size()));
    ball.ids = order;
    ball.center = 0;
    for (std::size_t i = 0; i < order.size(); ++i)
        for (int v : g.neighbors(order[i]))
            if (back[std::size_t(v)] >= 0 && back[std::size_t(v)] > int(i))
                ball.graph.add_edge(int(i), back[std::size_t(v)]);
    return ball;
}

} // namespace enr
