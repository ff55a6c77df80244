#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"
#include "species.hpp"
#include "symmetry.hpp"

namespace enr {

// A named species: the unit the CLI and the verification suites operate on.
struct ModelSpec {
    std::string name;
    SpeciesDescriptor species;
};

inline const std::vector<std::string>& builtin_model_names() {
    static const std::vector<std::string> names = {"polya",  "binary", "seq",
                                                   "cacti3", "ktree2", "ktree3"};
    return names;
}

inline ModelSpec builtin_model(const std::string& name) {
    ModelSpec m;
    m.name = name;
    if (name == "polya") {
        m.species = make_polya_model_unrestricted();
    } else if (name == "binary") {
        m.species = make_polya_model({{0, Rational(1)}, {2, Rational(1)}});
    } else if (name == "seq") {
        m.species = make_seq_model();
    } else if (name == "cacti3") {
        m.species = make_block_species(cacti_catalog(3));
    } else if (name == "ktree2") {
        m.species = make_ktree_species(2);
    } else if (name == "ktree3") {
        m.species = make_ktree_species(3);
    } else {
        throw std::out_of_range("unknown model: " + name);
    }
    return m;
}

inline ModelSpec model_from_json(const nlohmann::json& j) {
    ModelSpec m;
    m.name = j.value("name", std::string("spec"));
    m.species = species_from_json(j);
    return m;
}

// ---------------------------------------------------------------------------
// Canonical codes in the exact format the enumeration oracles emit, so
// sampled structures and enumerated ones land in the same census classes.
// ---------------------------------------------------------------------------

namespace detail {

// front-rooted k-tree object: per slot the sorted multiset of sub-objects
inline std::string ktree_code_at(const SymEnrichedTree& t, int v, int k) {
    std::vector<std::vector<std::string>> buckets;
    buckets.resize(std::size_t(k));
    for (const auto& g : t.nodes[std::size_t(v)].groups) {
        if (g.child < 0) throw std::domain_error("ktree code: unfilled slot");
        std::string c = ktree_code_at(t, g.child, k);
        for (int i = 0; i < g.len(); ++i) buckets[std::size_t(g.slot)].push_back(c);
    }
    std::string code = "(";
    for (int s = 0; s < k; ++s) {
        auto& parts = buckets[std::size_t(s)];
        std::sort(parts.begin(), parts.end());
        for (auto& p : parts) code += p;
        code += ";";
    }
    code += ")";
    return code;
}

inline std::string block_code_at(const MaterializedTree& mt, int v) {
    std::vector<std::string> parts;
    for (const auto& inst : mt.blocks[std::size_t(v)]) {
        if (inst.atoms.size() == 1) {
            parts.push_back("E" + block_code_at(mt, inst.atoms[0]));
            continue;
        }
        std::vector<std::string> fwd;
        for (int a : inst.atoms) fwd.push_back(block_code_at(mt, a));
        std::vector<std::string> rev(fwd.rbegin(), fwd.rend());
        const auto& rep = rev < fwd ? rev : fwd; // reflection class representative
        std::string code = "P" + std::to_string(inst.atoms.size() + 1) + "[";
        for (const auto& c : rep) code += c;
        code += "]";
        parts.push_back(std::move(code));
    }
    std::sort(parts.begin(), parts.end());
    std::string out = "(";
    for (auto& p : parts) out += p;
    out += ")";
    return out;
}

} // namespace detail

// Canonical code of a sampled structure under the model's own equivalence
// (multiset vs sequence offspring, block shapes, k-tree slots).
inline std::string structure_code(const ModelSpec& m, const SymEnrichedTree& t) {
    switch (m.species.kind) {
        case SpeciesKind::SET_WEIGHTED:
            return canonical_tree_code(t, false);
        case SpeciesKind::SEQ_RESTRICTED:
            return canonical_tree_code(t, true);
        case SpeciesKind::SEQK_SET:
            return detail::ktree_code_at(t, t.root, m.species.k);
        case SpeciesKind::SET_DERIVED_BLOCKS: {
            MaterializedTree mt = materialize(t, &m.species.catalog);
            return detail::block_code_at(mt, 0);
        }
    }
    throw std::logic_error("unreachable species kind");
}

// ---------------------------------------------------------------------------
// Decoders to labelled graphs.
// ---------------------------------------------------------------------------

// Blocks glued at shared vertices: a catalog entry of size 1 is a bridge
// edge, an entry of size s >= 2 is an (s+1)-gon whose atom positions walk the
// polygon path leaving the root vertex.
inline Graph decode_block_graph(const SymEnrichedTree& t, const BlockCatalog& cat) {
    MaterializedTree mt = materialize(t, &cat);
    Graph g(int(mt.size()));
    for (std::size_t v = 0; v < mt.size(); ++v) {
        for (const auto& inst : mt.blocks[v]) {
            if (inst.atoms.size() == 1) {
                g.add_edge(int(v), inst.atoms[0]);
                continue;
            }
            g.add_edge(int(v), inst.atoms.front());
            for (std::size_t p = 0; p + 1 < inst.atoms.size(); ++p)
                g.add_edge(inst.atoms[p], inst.atoms[p + 1]);
            g.add_edge(inst.atoms.back(), int(v));
        }
    }
    return g;
}

// Front-rooted k-tree: graph vertices 0..k-1 form the root front; hedron j
// (in materialized order) adds vertex k+j glued to its parent front. A child
// with slot s attaches to the front of its parent's hedron that omits the
// parent-front vertex at position s (the new vertex takes that position).
struct DecodedKTree {
    Graph graph;
    std::vector<std::vector<int>> fronts; // per hedron, the front it was glued to
};

inline DecodedKTree decode_ktree(const SymEnrichedTree& t, int k) {
    MaterializedTree mt = materialize(t);
    DecodedKTree out;
    out.graph = Graph(int(mt.size()) + k);
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) out.graph.add_edge(a, b);
    std::vector<std::vector<int>> front(mt.size());
    for (std::size_t v = 0; v < mt.size(); ++v) {
        int w = k + int(v);
        if (mt.parent[v] < 0) {
            front[v].resize(std::size_t(k));
            for (int a = 0; a < k; ++a) front[v][std::size_t(a)] = a;
        } else {
            int pw = k + mt.parent[v];
            front[v] = front[std::size_t(mt.parent[v])];
            front[v][std::size_t(mt.slot[v])] = pw;
        }
        for (int a : front[v]) out.graph.add_edge(w, a);
        out.fronts.push_back(front[v]);
    }
    return out;
}

// Simplicial-elimination validity: repeatedly delete a degree-k vertex whose
// neighborhood is a clique; a k-tree reduces to the k-clique root front.
inline bool is_k_tree(const Graph& g, int k) {
    int n = g.size();
    if (n < k) return false;
    std::vector<std::vector<char>> adj(std::size_t(n), std::vector<char>(std::size_t(n), 0));
    std::vector<int> deg(std::size_t(n), 0);
    for (int u = 0; u < n; ++u)
        for (int v : g.neighbors(u))
            if (!adj[std::size_t(u)][std::size_t(v)]) {
                adj[std::size_t(u)][std::size_t(v)] = adj[std::size_t(v)][std::size_t(u)] = 1;
                ++deg[std::size_t(u)];
                ++deg[std::size_t(v)];
            }
    std::vector<char> alive(std::size_t(n), 1);
    int remaining = n;
    while (remaining > k) {
        int pick = -1;
        for (int u = 0; u < n && pick < 0; ++u) {
            if (!alive[std::size_t(u)] || deg[std::size_t(u)] != k) continue;
            std::vector<int> nb;
            for (int v = 0; v < n; ++v)
                if (alive[std::size_t(v)] && adj[std::size_t(u)][std::size_t(v)]) nb.push_back(v);
            bool clique = true;
            for (std::size_t a = 0; a < nb.size() && clique; ++a)
                for (std::size_t b = a + 1; b < nb.size(); ++b)
                    if (!adj[std::size_t(nb[a])][std::size_t(nb[b])]) {
                        clique = false;
                        break;
                    }
            if (clique) pick = u;
        }
        if (pick < 0) return false;
        alive[std::size_t(pick)] = 0;
        --remaining;
        for (int v = 0; v < n; ++v)
            if (alive[std::size_t(v)] && adj[std::size_t(pick)][std::size_t(v)]) {
                adj[std::size_t(pick)][std::size_t(v)] = adj[std::size_t(v)][std::size_t(pick)] = 0;
                --deg[std::size_t(v)];
                --deg[std::size_t(pick)];
            }
    }
    // the survivors must form a k-clique
    std::vector<int> rest;
    for (int u = 0; u < n; ++u)
        if (alive[std::size_t(u)]) rest.push_back(u);
    for (std::size_t a = 0; a < rest.size(); ++a)
        for (std::size_t b = a + 1; b < rest.size(); ++b)
            if (!adj[std::size_t(rest[a])][std::size_t(rest[b])]) return false;
    return true;
}

// ---------------------------------------------------------------------------
// The k-tree front chain: states 1..k, from state 1 jump to k with
// probability 1/k, from state i >= 2 step down to i-1 with probability i/k;
// otherwise hold. Stationary law pi_i proportional to 1/i; visits to state k
// occur at rate b_k = 1 / (k * H_k).
// ---------------------------------------------------------------------------

struct ChainReport {
    int k = 0;
    long long steps = 0;
    long long visits_k = 0;            // visits to state k over steps 1..L
    long long d_prime = 0;             // 1 + visits_k
    std::vector<double> occupancy;     // occupancy[i-1] = fraction of time in state i
    double b_k = 0.0;                  // closed form 1/(k H_k)
};

inline double ktree_chain_bk(int k) {
    double h = 0.0;
    for (int i = 1; i <= k; ++i) h += 1.0 / double(i);
    return 1.0 / (double(k) * h);
}

inline ChainReport ktree_chain(int k, long long steps, RngStream& rng) {
    if (k < 1) throw std::domain_error("chain: k must be >= 1");
    ChainReport rep;
    rep.k = k;
    rep.steps = steps;
    rep.occupancy.assign(std::size_t(k), 0.0);
    rep.b_k = ktree_chain_bk(k);
    int x = 1;
    for (long long s = 0; s < steps; ++s) {
        if (x == 1) {
            if (k > 1 && rng.next_u01() < 1.0 / double(k)) x = k;
        } else {
            if (rng.next_u01() < double(x) / double(k)) x -= 1;
        }
        if (x == k) ++rep.visits_k;
        rep.occupancy[std::size_t(x - 1)] += 1.0;
    }
    for (auto& o : rep.occupancy) o /= double(std::max<long long>(steps, 1));
    rep.d_prime = 1 + rep.visits_k;
    return rep;
}

inline std::vector<std::vector<double>> ktree_chain_matrix(int k) {
    std::vector<std::vector<double>> P(std::size_t(k), std::vector<double>(std::size_t(k), 0.0));
    if (k == 1) {
        P[0][0] = 1.0;
        return P;
    }
    P[0][std::size_t(k - 1)] = 1.0 / double(k);
    P[0][0] = 1.0 - 1.0 / double(k);
    for (int i = 2; i <= k; ++i) {
        P[std::size_t(i - 1)][std::size_t(i - 2)] = double(i) / double(k);
        P[std::size_t(i - 1)][std::size_t(i - 1)] = 1.0 - double(i) / double(k);
    }
    return P;
}

} // namespace enr
