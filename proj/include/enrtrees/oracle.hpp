#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "graph.hpp"
#include "rational.hpp"

// Brute-force enumeration of the unlabelled structures the generators are
// tested against. Everything here counts by explicit canonical codes and
// exact rational weights; nothing is shared with the generating-function or
// sampling code paths.
namespace enr::oracle {

struct CodedObject {
    std::string code;
    Rational weight;
    int size = 0;
};

using CodeWeights = std::map<std::string, Rational>;

inline Rational total_weight(const CodeWeights& m) {
    Rational t(0);
    for (const auto& [c, w] : m) t += w;
    return t;
}

namespace detail {

// Enumerates multisets over `items` (non-increasing item index, repeats
// allowed) with sizes summing to `target`; calls cb with the picked indices.
inline void multisets_summing(const std::vector<CodedObject>& items, int target, int max_children,
                              std::vector<int>& pick,
                              const std::function<void(const std::vector<int>&)>& cb,
                              std::size_t max_idx) {
    if (target == 0) {
        cb(pick);
        return;
    }
    if ((int)pick.size() >= max_children) return;
    for (std::size_t i = 0; i < max_idx; ++i) {
        int s = items[i].size;
        if (s > target) continue;
        pick.push_back((int)i);
        multisets_summing(items, target - s, max_children, pick, cb, i + 1);
        pick.pop_back();
    }
}

inline std::string wrap_sorted(std::vector<std::string> parts) {
    std::sort(parts.begin(), parts.end());
    std::string s = "(";
    for (auto& p : parts) s += p;
    s += ")";
    return s;
}

} // namespace detail

// Unordered rooted trees where a vertex with d children carries factor
// kappa(d); the tree weight is the product over vertices. max_degree bounds
// the enumeration (pass n for unbounded kappa).
inline std::vector<CodeWeights> polya_trees_up_to(int n, const std::function<Rational(int)>& kappa,
                                                  int max_degree) {
    std::vector<CodeWeights> by_size(std::size_t(n) + 1);
    std::vector<CodedObject> items; // all trees of size < current n, code-sorted per size
    for (int sz = 1; sz <= n; ++sz) {
        std::vector<int> pick;
        detail::multisets_summing(
            items, sz - 1, max_degree, pick,
            [&](const std::vector<int>& idx) {
                Rational w = kappa((int)idx.size());
                if (w == Rational(0)) return;
                std::vector<std::string> parts;
                for (int i : idx) {
                    w *= items[std::size_t(i)].weight;
                    parts.push_back(items[std::size_t(i)].code);
                }
                by_size[std::size_t(sz)][detail::wrap_sorted(std::move(parts))] += w;
            },
            items.size());
        for (const auto& [c, w] : by_size[std::size_t(sz)]) items.push_back({c, w, sz});
    }
    return by_size;
}

// Ordered rooted trees (SEQ) with an allowed-outdegree predicate.
inline std::vector<CodeWeights> plane_trees_up_to(int n, const std::function<bool(int)>& allowed) {
    std::vector<CodeWeights> by_size(std::size_t(n) + 1);
    for (int sz = 1; sz <= n; ++sz) {
        // compositions of sz-1 into parts, each part a smaller tree, order kept
        std::function<void(int, std::vector<std::string>&)> go = [&](int rem, std::vector<std::string>& parts) {
            if (rem == 0) {
                if (!allowed((int)parts.size())) return;
                std::string s = "(";
                for (auto& p : parts) s += p;
                s += ")";
                by_size[std::size_t(sz)][s] += Rational(1);
                return;
            }
            for (int s1 = 1; s1 <= rem; ++s1)
                for (const auto& [c, w] : by_size[std::size_t(s1)]) {
                    (void)w;
                    parts.push_back(c);
                    go(rem - s1, parts);
                    parts.pop_back();
                }
        };
        std::vector<std::string> parts;
        go(sz - 1, parts);
    }
    return by_size;
}

// Rooted connected graphs whose blocks are single edges or polygons with at
// most max_gon sides, enumerated as block trees. A polygon block hanging at a
// vertex carries p-1 child slots in path order around the polygon, identified
// up to reversal.
inline std::vector<CodeWeights> cacti_trees_up_to(int n, int max_gon) {
    std::vector<CodeWeights> by_size(std::size_t(n) + 1);
    std::vector<std::vector<CodedObject>> trees(std::size_t(n) + 1); // per exact size
    for (int sz = 1; sz <= n; ++sz) {
        // blocks with t := total child vertices, t <= sz-1
        std::vector<CodedObject> blocks;
        for (int t = 1; t < sz; ++t) {
            for (const auto& e : trees[std::size_t(t)])
                blocks.push_back({"E" + e.code, e.weight, t});
            for (int p = 3; p <= max_gon; ++p) {
                int slots = p - 1;
                if (t < slots) continue; // each slot holds a tree of size >= 1
                std::vector<CodedObject> tup(static_cast<std::size_t>(slots));
                std::function<void(int, int)> fill = [&](int pos, int rem) {
                    if (pos == slots) {
                        if (rem != 0) return;
                        std::vector<std::string> fwd, rev;
                        for (auto& x : tup) fwd.push_back(x.code);
                        rev.assign(fwd.rbegin(), fwd.rend());
                        if (rev < fwd) return; // reversal class representative only
                        Rational w(1);
                        std::string code = "P" + std::to_string(p) + "[";
                        for (auto& x : tup) {
                            w *= x.weight;
                            code += x.code;
                        }
                        code += "]";
                        blocks.push_back({code, w, t});
                        return;
                    }
                    for (int s1 = 1; s1 <= rem - (slots - pos - 1); ++s1)
                        for (const auto& sub : trees[std::size_t(s1)]) {
                            tup[std::size_t(pos)] = sub;
                            fill(pos + 1, rem - s1);
                        }
                };
                fill(0, t);
            }
        }
        std::sort(blocks.begin(), blocks.end(),
                  [](const CodedObject& a, const CodedObject& b) { return a.code < b.code; });
        std::vector<int> pick;
        detail::multisets_summing(
            blocks, sz - 1, sz, pick,
            [&](const std::vector<int>& idx) {
                Rational w(1);
                std::vector<std::string> parts;
                for (int i : idx) {
                    w *= blocks[std::size_t(i)].weight;
                    parts.push_back(blocks[std::size_t(i)].code);
                }
                by_size[std::size_t(sz)][detail::wrap_sorted(std::move(parts))] += w;
            },
            blocks.size());
        for (const auto& [c, w] : by_size[std::size_t(sz)]) trees[std::size_t(sz)].push_back({c, w, sz});
    }
    return by_size;
}

// Front-rooted k-trees by hedron count: an object is a root hedron with k
// ordered fronts, each carrying a multiset of sub-objects.
inline std::vector<CodeWeights> ktree_objects_up_to(int k, int hedra) {
    std::vector<CodeWeights> by_size(std::size_t(hedra) + 1);
    std::vector<CodedObject> items;
    for (int h = 1; h <= hedra; ++h) {
        std::vector<std::vector<std::string>> slot_codes(static_cast<std::size_t>(k));
        std::function<void(int, int)> fill_slot = [&](int slot, int rem) {
            if (slot == k) {
                if (rem != 0) return;
                std::string code = "(";
                for (int s = 0; s < k; ++s) {
                    auto parts = slot_codes[std::size_t(s)];
                    std::sort(parts.begin(), parts.end());
                    for (auto& p : parts) code += p;
                    code += ";";
                }
                code += ")";
                by_size[std::size_t(h)][code] += Rational(1);
                return;
            }
            // multiset for this slot: non-increasing item index
            std::function<void(int, std::size_t)> pick = [&](int rem2, std::size_t maxi) {
                fill_slot(slot + 1, rem2); // this slot done, remainder moves on
                for (std::size_t i = 0; i < maxi; ++i) {
                    if (items[i].size > rem2) continue;
                    slot_codes[std::size_t(slot)].push_back(items[i].code);
                    pick(rem2 - items[i].size, i + 1);
                    slot_codes[std::size_t(slot)].pop_back();
                }
            };
            pick(rem, items.size());
        };
        fill_slot(0, h - 1);
        for (const auto& [c, w] : by_size[std::size_t(h)]) items.push_back({c, w, h});
    }
    return by_size;
}

// Minimal adjacency bitstring over all relabelings that fix vertices
// [0, fixed) pointwise. Practical for size() - fixed <= 9.
inline std::string canonical_graph_code(const Graph& g, int fixed = 1) {
    int n = g.size();
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[std::size_t(i)] = i;
    std::string best;
    do {
        std::string code;
        code.reserve(std::size_t(n) * std::size_t(n - 1) / 2);
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                code += g.has_edge(perm[std::size_t(u)], perm[std::size_t(v)]) ? '1' : '0';
        if (best.empty() || code < best) best = std::move(code);
    } while (std::next_permutation(perm.begin() + fixed, perm.end()));
    return std::to_string(n) + ":" + best;
}

namespace detail {

// Blocks of a tiny graph given as adjacency masks; returns false unless every
// block is a single edge or a cycle with at most max_gon vertices.
inline bool blocks_are_small_polygons(const std::uint8_t adj[8], int n, int max_gon) {
    int num[8], low[8], parent[8], timer = 0;
    std::pair<int, int> estack[32];
    int etop = 0;
    for (int i = 0; i < n; ++i) num[i] = -1, parent[i] = -1;
    struct Frame { int u; int nb; };
    Frame st[9];
    bool ok = true;
    auto check_comp = [&](int from) {
        int ecount = etop - from;
        std::uint8_t vset = 0;
        for (int i = from; i < etop; ++i) {
            vset |= std::uint8_t(1u << estack[i].first);
            vset |= std::uint8_t(1u << estack[i].second);
        }
        int vcount = __builtin_popcount(vset);
        if (ecount == 1) return true;
        return ecount == vcount && vcount >= 3 && vcount <= max_gon;
    };
    for (int s0 = 0; s0 < n && ok; ++s0) {
        if (num[s0] != -1) continue;
        int top = 0;
        st[0] = {s0, 0};
        num[s0] = low[s0] = timer++;
        while (top >= 0 && ok) {
            int u = st[top].u;
            if (st[top].nb < n) {
                int v = st[top].nb++;
                if (!((adj[u] >> v) & 1)) continue;
                if (num[v] == -1) {
                    parent[v] = u;
                    estack[etop++] = {u, v};
                    num[v] = low[v] = timer++;
                    st[++top] = {v, 0};
                } else if (v != parent[u] && num[v] < num[u]) {
                    estack[etop++] = {u, v};
                    low[u] = std::min(low[u], num[v]);
                }
            } else {
                --top;
                if (top >= 0) {
                    int p = st[top].u;
                    low[p] = std::min(low[p], low[u]);
                    if (low[u] >= num[p]) {
                        int from = etop;
                        while (from > 0) {
                            --from;
                            if (estack[from].first == p && estack[from].second == u) break;
                        }
                        if (!check_comp(from)) ok = false;
                        etop = from;
                    }
                }
            }
        }
    }
    return ok;
}

} // namespace detail

// Exhaustive scan over all labelled graphs on n vertices (n <= 7): counts
// isomorphism classes of rooted connected graphs whose blocks are edges or
// polygons with at most max_gon sides. Root-fixed canonization by brute
// force. This is the decoder-independent cross-check for the block models.
inline long long scan_rooted_block_graphs(int n, int max_gon) {
    if (n > 7) throw std::domain_error("scan_rooted_block_graphs: n too large");
    if (n == 1) return 1;
    int m = n * (n - 1) / 2;
    std::vector<std::pair<int, int>> epos;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) epos.emplace_back(u, v);
    std::set<std::string> classes;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        if (__builtin_popcount(mask) < n - 1) continue;
        std::uint8_t adj[8] = {0};
        for (int e = 0; e < m; ++e)
            if ((mask >> e) & 1) {
                adj[epos[std::size_t(e)].first] |= std::uint8_t(1u << epos[std::size_t(e)].second);
                adj[epos[std::size_t(e)].second] |= std::uint8_t(1u << epos[std::size_t(e)].first);
            }
        // connectivity by mask flood
        std::uint8_t seen = 1, frontier = 1;
        while (frontier) {
            std::uint8_t next = 0;
            for (int u = 0; u < n; ++u)
                if ((frontier >> u) & 1) next |= adj[u];
            frontier = std::uint8_t(next & ~seen);
            seen |= next;
        }
        if (__builtin_popcount(seen) != n) continue;
        if (!detail::blocks_are_small_polygons(adj, n, max_gon)) continue;
        for (int root = 0; root < n; ++root) {
            Graph g(n);
            std::vector<int> map(static_cast<std::size_t>(n));
            map[std::size_t(root)] = 0;
            int next_id = 1;
            for (int v = 0; v < n; ++v)
                if (v != root) map[std::size_t(v)] = next_id++;
            for (int e = 0; e < m; ++e)
                if ((mask >> e) & 1)
                    g.add_edge(map[std::size_t(epos[std::size_t(e)].first)],
                               map[std::size_t(epos[std::size_t(e)].second)]);
            classes.insert(canonical_graph_code(g, 1));
        }
    }
    return (long long)classes.size();
}

} // namespace enr::oracle
