#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "species.hpp"

namespace enr {

// One orbit of the root symmetry acting on a vertex's offspring: outer_len
// identical copies of the representative subtree, arranged in a cycle. When
// the offspring sit inside a block whose own automorphism moves them on an
// inner cycle, the two compose into a single cycle of length
// outer_len * inner_len (all copies still identical).
struct SymGroup {
    int outer_len = 1;
    int inner_len = 1;
    int child = -1;    // representative subtree root; -1 marks an unfilled slot
    int slot = 0;      // SEQ: position; SEQK: which of the k sets; blocks: cycle index in entry
    int block_id = -1; // groups expanded from the same block cycle share an id
    int entry = -1;    // block catalog entry index

    int len() const { return outer_len * inner_len; }
};

struct SymNode {
    std::vector<SymGroup> groups;
};

// A tree together with an automorphism, in compressed form: cycles of
// identical siblings are stored once via their representative.
struct SymEnrichedTree {
    std::vector<SymNode> nodes;
    int root = 0;

    int add_node() {
        nodes.emplace_back();
        return int(nodes.size()) - 1;
    }

    // expanded atom count of the subtree at v (the tree the pair projects to)
    long long expanded_size_at(int v) const {
        long long s = 1;
        for (const auto& g : nodes[std::size_t(v)].groups)
            if (g.child >= 0) s += (long long)g.len() * expanded_size_at(g.child);
        return s;
    }
    long long expanded_size() const { return nodes.empty() ? 0 : expanded_size_at(root); }
};

// Composing an outer cycle of length `outer` over copies of an object whose
// own symmetry moves some of its atoms on a cycle of length `inner` yields
// one cycle of length outer * inner on the expanded atoms.
inline long long compose_symmetries(long long outer, long long inner) { return outer * inner; }

// Cycle type (length -> count) of the automorphism the compressed tree
// encodes, over all expanded atoms.
namespace detail {
inline void cycle_type_at(const SymEnrichedTree& t, int v, long long mult,
                          std::map<long long, long long>& out) {
    out[mult] += 1; // v's own orbit
    for (const auto& g : t.nodes[std::size_t(v)].groups)
        if (g.child >= 0) cycle_type_at(t, g.child, mult * g.len(), out);
}
} // namespace detail

inline std::map<long long, long long> reconstruct_automorphism(const SymEnrichedTree& t) {
    std::map<long long, long long> out;
    if (!t.nodes.empty()) detail::cycle_type_at(t, t.root, 1, out);
    return out;
}

// The tree induced on the automorphism's fixed atoms: exactly the vertices
// whose ancestor path uses only length-1 groups. zeta[v] counts the expanded
// atoms hanging at fixpoint v through non-trivial cycles.
struct FixpointTree {
    std::vector<int> parent;                // -1 at the root
    std::vector<std::vector<int>> children; // preorder vertex ids
    std::vector<long long> zeta;
    std::vector<int> origin;     // compressed node each fixpoint came from
    long long total_size = 0;    // expanded size of the full tree

    std::size_t size() const { return parent.size(); }
};

inline FixpointTree to_fixpoint_tree(const SymEnrichedTree& t) {
    FixpointTree f;
    f.total_size = t.expanded_size();
    if (t.nodes.empty()) return f;
    struct Item {
        int node;
        int parent;
    };
    std::vector<Item> stack{{t.root, -1}};
    while (!stack.empty()) {
        Item it = stack.back();
        stack.pop_back();
        int id = int(f.parent.size());
        f.parent.push_back(it.parent);
        f.children.emplace_back();
        f.origin.push_back(it.node);
        if (it.parent >= 0) f.children[std::size_t(it.parent)].push_back(id);
        long long z = 0;
        const auto& groups = t.nodes[std::size_t(it.node)].groups;
        // push fixpoint children in reverse so they pop in stored order
        for (auto g = groups.rbegin(); g != groups.rend(); ++g) {
            if (g->child < 0) continue;
            if (g->len() == 1)
                stack.push_back({g->child, id});
            else
                z += (long long)g->len() * t.expanded_size_at(g->child);
        }
        f.zeta.push_back(z);
    }
    return f;
}

// ---- expansion ---------------------------------------------------------------

// Fully expanded (plain) tree, with enough structure retained to decode the
// enriched object: per-vertex slot of the group it came from, and for block
// models the attached block instances with atoms placed per position.
struct MaterializedTree {
    std::vector<int> parent; // -1 at the root
    std::vector<std::vector<int>> children;
    std::vector<int> slot; // slot of the originating group (0 at the root)

    struct BlockInstance {
        int entry = -1;
        std::vector<int> atoms; // atoms[p] = vertex at block position p
    };
    std::vector<std::vector<BlockInstance>> blocks; // per vertex

    std::size_t size() const { return parent.size(); }
};

namespace detail {

inline int materialize_at(const SymEnrichedTree& t, int node, int parent, int slot,
                          const BlockCatalog* cat, MaterializedTree& out) {
    int id = int(out.parent.size());
    out.parent.push_back(parent);
    out.children.emplace_back();
    out.slot.push_back(slot);
    out.blocks.emplace_back();
    if (parent >= 0) out.children[std::size_t(parent)].push_back(id);

    const auto& groups = t.nodes[std::size_t(node)].groups;
    // group the block-model groups by block_id; keep plain groups in order
    std::map<int, std::vector<const SymGroup*>> by_block;
    for (const auto& g : groups) {
        if (g.child < 0) throw std::domain_error("materialize: unfilled slot");
        if (g.block_id >= 0) {
            by_block[g.block_id].push_back(&g);
        } else {
            for (int c = 0; c < g.len(); ++c)
                materialize_at(t, g.child, id, g.slot, cat, out);
        }
    }
    for (auto& [bid, parts] : by_block) {
        if (!cat) throw std::domain_error("materialize: block groups without a catalog");
        int entry_idx = parts.front()->entry;
        int outer = parts.front()->outer_len;
        const BlockEntry& ent = cat->entries[std::size_t(entry_idx)];
        auto positions = entry_positions(ent);
        for (const SymGroup* g : parts)
            if (g->entry != entry_idx || g->outer_len != outer)
                throw std::domain_error("materialize: inconsistent block group");
        // outer identical copies of the block, each with ent.size atoms
        for (int copy = 0; copy < outer; ++copy) {
            MaterializedTree::BlockInstance inst;
            inst.entry = entry_idx;
            inst.atoms.assign(std::size_t(ent.size), -1);
            for (const SymGroup* g : parts) {
                const auto& pos = positions[std::size_t(g->slot)];
                for (int p : pos)
                    inst.atoms[std::size_t(p)] = materialize_at(t, g->child, id, g->slot, cat, out);
            }
            for (int a : inst.atoms)
                if (a < 0) throw std::domain_error("materialize: block position left empty");
            out.blocks[std::size_t(id)].push_back(std::move(inst));
        }
    }
    return id;
}

} // namespace detail

inline MaterializedTree materialize(const SymEnrichedTree& t, const BlockCatalog* cat = nullptr) {
    MaterializedTree out;
    if (!t.nodes.empty()) detail::materialize_at(t, t.root, -1, 0, cat, out);
    return out;
}

// ---- canonical codes ----------------------------------------------------------

// Nested-parenthesis code of the expanded plain tree. Child codes are sorted
// when `ordered` is false (multiset offspring) and kept in stored order when
// true (sequence offspring). Identical cycle copies repeat their code.
namespace detail {
inline std::string tree_code_at(const SymEnrichedTree& t, int v, bool ordered) {
    std::vector<std::string> parts;
    for (const auto& g : t.nodes[std::size_t(v)].groups) {
        if (g.child < 0) throw std::domain_error("tree code: unfilled slot");
        std::string c = tree_code_at(t, g.child, ordered);
        for (int i = 0; i < g.len(); ++i) parts.push_back(c);
    }
    if (!ordered) std::sort(parts.begin(), parts.end());
    std::string out = "(";
    for (auto& p : parts) out += p;
    out += ")";
    return out;
}
} // namespace detail

inline std::string canonical_tree_code(const SymEnrichedTree& t, bool ordered = false) {
    if (t.nodes.empty()) return "";
    return detail::tree_code_at(t, t.root, ordered);
}

// ---- G-objects and the cycle lemma --------------------------------------------

// One fixpoint vertex together with its fully grown non-fixpoint content;
// groups with child == -1 at the root are the xi slots that later G-objects
// fill in depth-first order.
struct GObject {
    SymEnrichedTree shape;

    int xi() const {
        int c = 0;
        for (const auto& g : shape.nodes[std::size_t(shape.root)].groups)
            if (g.child < 0) ++c;
        return c;
    }
    // 1 + zeta: expanded atoms contributed by this object alone
    long long content_size() const {
        long long s = 1;
        for (const auto& g : shape.nodes[std::size_t(shape.root)].groups)
            if (g.child >= 0) s += (long long)g.len() * shape.expanded_size_at(g.child);
        return s;
    }
};

// Appends src's nodes into dst and returns the new index of src's root.
inline int append_subtree(SymEnrichedTree& dst, const SymEnrichedTree& src) {
    int offset = int(dst.nodes.size());
    for (const auto& n : src.nodes) {
        SymNode copy = n;
        for (auto& g : copy.groups)
            if (g.child >= 0) g.child += offset;
        dst.nodes.push_back(std::move(copy));
    }
    return src.root + offset;
}

struct GlueResult {
    bool ok = false;
    std::size_t error_index = 0; // offending object (== size() when objects ran out)
    SymEnrichedTree tree;
};

// Rebuilds the tree from its depth-first G-object sequence: each object's
// root fills the most recently opened slot.
inline GlueResult from_g_sequence(const std::vector<GObject>& gs) {
    GlueResult res;
    if (gs.empty()) return res;
    res.tree = SymEnrichedTree{};
    int r0 = append_subtree(res.tree, gs[0].shape);
    res.tree.root = r0;
    std::vector<std::pair<int, int>> open; // (node, group index), top = next to fill
    auto push_slots = [&](int node) {
        const auto& groups = res.tree.nodes[std::size_t(node)].groups;
        for (int gi = int(groups.size()) - 1; gi >= 0; --gi)
            if (groups[std::size_t(gi)].child < 0) open.emplace_back(node, gi);
    };
    push_slots(r0);
    for (std::size_t i = 1; i < gs.size(); ++i) {
        if (open.empty()) {
            res.error_index = i; // tree already complete, object i is surplus
            return res;
        }
        auto [node, gi] = open.back();
        open.pop_back();
        int r = append_subtree(res.tree, gs[i].shape);
        res.tree.nodes[std::size_t(node)].groups[std::size_t(gi)].child = r;
        push_slots(r);
    }
    if (!open.empty()) {
        res.error_index = gs.size(); // ran out of objects with slots open
        return res;
    }
    res.ok = true;
    return res;
}

// First-passage test of the cycle lemma: with increments xi - 1 >= -1
// summing to -r < 0, a rotation is valid when its partial sums stay
// strictly above -r until the final step lands on -r. Exactly r of the
// cyclic shifts qualify; for r = 1 this is the first passage to -1.
inline bool valid_rotation(const std::vector<int>& xi, std::size_t start) {
    if (xi.empty()) return false;
    std::size_t n = xi.size();
    long long total = 0;
    for (int x : xi) total += x - 1;
    if (total >= 0) return false;
    long long s = 0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        s += xi[(start + j) % n] - 1;
        if (s <= total) return false;
    }
    return true;
}

inline bool valid_rotation(const std::vector<GObject>& gs, std::size_t start) {
    std::vector<int> xi;
    xi.reserve(gs.size());
    for (const auto& g : gs) xi.push_back(g.xi());
    return valid_rotation(xi, start);
}

} // namespace enr
