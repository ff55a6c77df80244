#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace enr {

// Simple undirected graph; adjacency rows are 64-bit masks for n <= 64 plus a
// generic edge list for larger graphs. Vertex 0 is the root by convention;
// k-tree decoders place the root front at vertices 0..k-1.
class Graph {
public:
    explicit Graph(int n = 0) : n_(n), rows_(n <= 64 ? std::size_t(n) : 0, 0ULL), adj_(std::size_t(n)) {}

    int size() const { return n_; }

    void add_edge(int u, int v) {
        if (u == v) throw std::domain_error("Graph: self loop");
        if (u < 0 || v < 0 || u >= n_ || v >= n_) throw std::domain_error("Graph: vertex out of range");
        if (has_edge(u, v)) return;
        if (n_ <= 64) {
            rows_[std::size_t(u)] |= 1ULL << v;
            rows_[std::size_t(v)] |= 1ULL << u;
        }
        adj_[std::size_t(u)].push_back(v);
        adj_[std::size_t(v)].push_back(u);
        ++edges_;
    }

    bool has_edge(int u, int v) const {
        if (n_ <= 64) return (rows_[std::size_t(u)] >> v) & 1ULL;
        for (int w : adj_[std::size_t(u)])
            if (w == v) return true;
        return false;
    }

    const std::vector<int>& neighbors(int u) const { return adj_[std::size_t(u)]; }
    std::uint64_t row(int u) const { return rows_[std::size_t(u)]; }
    long long edge_count() const { return edges_; }

    bool connected() const {
        if (n_ == 0) return true;
        std::vector<char> seen(std::size_t(n_), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int cnt = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : adj_[std::size_t(u)])
                if (!seen[std::size_t(v)]) {
                    seen[std::size_t(v)] = 1;
                    ++cnt;
                    stack.push_back(v);
                }
        }
        return cnt == n_;
    }

private:
    int n_;
    long long edges_ = 0;
    std::vector<std::uint64_t> rows_;
    std::vector<std::vector<int>> adj_;
};

// Biconnected components as edge sets, via the standard lowpoint stack walk.
// Each component is returned as a list of (u, v) edges.
inline std::vector<std::vector<std::pair<int, int>>> biconnected_components(const Graph& g) {
    int n = g.size();
    std::vector<int> num(std::size_t(n), -1), low(std::size_t(n), 0), parent(std::size_t(n), -1);
    std::vector<std::pair<int, int>> estack;
    std::vector<std::vector<std::pair<int, int>>> comps;
    int timer = 0;

    struct Frame { int u; std::size_t idx; };
    for (int s = 0; s < n; ++s) {
        if (num[std::size_t(s)] != -1) continue;
        std::vector<Frame> st{{s, 0}};
        num[std::size_t(s)] = low[std::size_t(s)] = timer++;
        while (!st.empty()) {
            auto& [u, idx] = st.back();
            const auto& nb = g.neighbors(u);
            if (idx < nb.size()) {
                int v = nb[idx++];
                if (num[std::size_t(v)] == -1) {
                    parent[std::size_t(v)] = u;
                    estack.emplace_back(u, v);
                    num[std::size_t(v)] = low[std::size_t(v)] = timer++;
                    st.push_back({v, 0});
                } else if (v != parent[std::size_t(u)] && num[std::size_t(v)] < num[std::size_t(u)]) {
                    estack.emplace_back(u, v);
                    low[std::size_t(u)] = std::min(low[std::size_t(u)], num[std::size_t(v)]);
                }
            } else {
                st.pop_back();
                if (!st.empty()) {
                    int p = st.back().u;
                    low[std::size_t(p)] = std::min(low[std::size_t(p)], low[std::size_t(u)]);
                    if (low[std::size_t(u)] >= num[std::size_t(p)]) {
                        std::vector<std::pair<int, int>> comp;
                        while (!estack.empty()) {
                            auto e = estack.back();
                            estack.pop_back();
                            comp.push_back(e);
                            if (e.first == p && e.second == u) break;
                        }
                        comps.push_back(std::move(comp));
                    }
                }
            }
        }
    }
    return comps;
}

} // namespace enr
