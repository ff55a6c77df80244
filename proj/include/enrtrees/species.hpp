#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rational.hpp"

namespace enr {

// The four offspring-structure kinds a model can use. SET_WEIGHTED carries
// per-degree weights kappa_d (possibly kappa ≡ 1, i.e. unrestricted);
// SEQ_RESTRICTED carries an allowed-length set; SEQK_SET is a k-tuple of
// unrestricted sets; SET_DERIVED_BLOCKS is a set of rooted blocks described
// by a catalog of block symmetries.
enum class SpeciesKind { SET_WEIGHTED, SEQ_RESTRICTED, SEQK_SET, SET_DERIVED_BLOCKS };

// One block shape's derived symmetry: `cycles` is the cycle type of an
// automorphism fixing the block's root, over the `size` non-root vertices.
// `weight` folds in the 1/|Aut| normalization; `gamma` is the block's
// multiplicative model weight (raised to the i-th power on i-cycles of the
// surrounding set structure).
struct BlockEntry {
    int size = 0;
    std::vector<int> cycles;
    Rational weight{1};
    Rational gamma{1};
    // concrete atom positions of each cycle (pos_cycles[i] lists the
    // positions permuted by cycles[i]); empty means consecutive assignment
    std::vector<std::vector<int>> pos_cycles;
};

// Positions covered by each cycle of the entry, defaulting to consecutive
// blocks of atom positions when none were specified.
inline std::vector<std::vector<int>> entry_positions(const BlockEntry& e) {
    if (!e.pos_cycles.empty()) return e.pos_cycles;
    std::vector<std::vector<int>> out;
    int p = 0;
    for (int c : e.cycles) {
        std::vector<int> cyc;
        for (int i = 0; i < c; ++i) cyc.push_back(p++);
        out.push_back(cyc);
    }
    return out;
}

struct BlockCatalog {
    std::vector<BlockEntry> entries;

    int max_size() const {
        int m = 0;
        for (const auto& e : entries) m = std::max(m, e.size);
        return m;
    }
    bool unit_gammas() const {
        for (const auto& e : entries)
            if (e.gamma != Rational(1)) return false;
        return true;
    }
};

struct SpeciesDescriptor {
    SpeciesKind kind = SpeciesKind::SET_WEIGHTED;

    // SET_WEIGHTED
    bool unit_weights = false;             // kappa_d = 1 for every d
    std::map<int, Rational> degree_weights; // finite support otherwise

    // SEQ_RESTRICTED
    bool all_lengths = false;
    std::set<int> length_set;

    // SEQK_SET
    int k = 0;

    // SET_DERIVED_BLOCKS
    BlockCatalog catalog;

    // True when power-weighting is trivial (all weights 0/1, all gammas 1),
    // so the power-weighted series family collapses to a single member.
    bool flat_weights() const {
        switch (kind) {
            case SpeciesKind::SET_WEIGHTED:
                if (unit_weights) return true;
                for (const auto& [d, w] : degree_weights)
                    if (w != Rational(0) && w != Rational(1)) return false;
                return true;
            case SpeciesKind::SEQ_RESTRICTED:
            case SpeciesKind::SEQK_SET:
                return true;
            case SpeciesKind::SET_DERIVED_BLOCKS:
                return catalog.unit_gammas();
        }
        return false;
    }

    Rational kappa(int d) const {
        if (unit_weights) return Rational(1);
        auto it = degree_weights.find(d);
        return it == degree_weights.end() ? Rational(0) : it->second;
    }

    int max_degree_support() const { // SET_WEIGHTED finite support only
        int m = 0;
        for (const auto& [d, w] : degree_weights)
            if (w != Rational(0)) m = std::max(m, d);
        return m;
    }

    void validate() const {
        switch (kind) {
            case SpeciesKind::SET_WEIGHTED: {
                if (unit_weights) return;
                for (const auto& [d, w] : degree_weights) {
                    if (d < 0) throw std::domain_error("species: negative degree");
                    if (w < Rational(0)) throw std::domain_error("species: negative weight");
                }
                if (kappa(0) <= Rational(0))
                    throw std::domain_error("species: weight at size 0 must be positive");
                bool some_big = false;
                for (const auto& [d, w] : degree_weights)
                    if (d >= 2 && w > Rational(0)) some_big = true;
                if (!some_big)
                    throw std::domain_error("species: needs positive weight at some size >= 2");
                return;
            }
            case SpeciesKind::SEQ_RESTRICTED: {
                if (all_lengths) return;
                if (!length_set.count(0))
                    throw std::domain_error("species: length set must contain 0");
                bool some_big = false;
                for (int j : length_set)
                    if (j >= 2) some_big = true;
                if (!some_big)
                    throw std::domain_error("species: length set needs an element >= 2");
                return;
            }
            case SpeciesKind::SEQK_SET:
                if (k < 1) throw std::domain_error("species: k must be >= 1");
                return;
            case SpeciesKind::SET_DERIVED_BLOCKS: {
                if (catalog.entries.empty())
                    throw std::domain_error("species: empty block catalog");
                Rational total(0);
                for (const auto& e : catalog.entries) {
                    if (e.size < 1) throw std::domain_error("species: block size must be >= 1");
                    int s = 0;
                    for (int c : e.cycles) {
                        if (c < 1) throw std::domain_error("species: bad cycle length");
                        s += c;
                    }
                    if (s != e.size)
                        throw std::domain_error("species: cycle lengths must sum to block size");
                    if (e.weight < Rational(0) || e.gamma < Rational(0))
                        throw std::domain_error("species: negative block weight");
                    if (!e.pos_cycles.empty()) {
                        if (e.pos_cycles.size() != e.cycles.size())
                            throw std::domain_error("species: positions don't match cycles");
                        std::vector<bool> seen(std::size_t(e.size), false);
                        for (std::size_t i = 0; i < e.cycles.size(); ++i) {
                            if (int(e.pos_cycles[i].size()) != e.cycles[i])
                                throw std::domain_error("species: position cycle length mismatch");
                            for (int p : e.pos_cycles[i]) {
                                if (p < 0 || p >= e.size || seen[std::size_t(p)])
                                    throw std::domain_error("species: bad position in cycle");
                                seen[std::size_t(p)] = true;
                            }
                        }
                    }
                    total += e.weight * e.gamma;
                }
                if (total <= Rational(0))
                    throw std::domain_error("species: catalog needs positive total weight");
                return;
            }
        }
    }
};

// ---- built-in constructors ------------------------------------------------

inline SpeciesDescriptor make_polya_model(const std::map<int, Rational>& weights) {
    SpeciesDescriptor sp;
    sp.kind = SpeciesKind::SET_WEIGHTED;
    sp.degree_weights = weights;
    sp.validate();
    return sp;
}

inline SpeciesDescriptor make_polya_model_unrestricted() {
    SpeciesDescriptor sp;
    sp.kind = SpeciesKind::SET_WEIGHTED;
    sp.unit_weights = true;
    return sp;
}

inline SpeciesDescriptor make_seq_model() {
    SpeciesDescriptor sp;
    sp.kind = SpeciesKind::SEQ_RESTRICTED;
    sp.all_lengths = true;
    return sp;
}

inline SpeciesDescriptor make_seq_model(const std::set<int>& lengths) {
    SpeciesDescriptor sp;
    sp.kind = SpeciesKind::SEQ_RESTRICTED;
    sp.length_set = lengths;
    sp.validate();
    return sp;
}

inline SpeciesDescriptor make_ktree_species(int k) {
    SpeciesDescriptor sp;
    sp.kind = SpeciesKind::SEQK_SET;
    sp.k = k;
    sp.validate();
    return sp;
}

// Single-edge blocks: attaching trees of edges reproduces plain rooted trees.
inline BlockCatalog edge_catalog() {
    BlockCatalog cat;
    BlockEntry e;
    e.size = 1;
    e.cycles = {1};
    e.pos_cycles = {{0}};
    cat.entries.push_back(std::move(e));
    return cat;
}

// Edges plus polygons with up to max_gon sides. A rooted m+1-gon's non-root
// vertices admit exactly two root-fixing automorphisms: the identity and the
// reflection through the root, each carrying 1/2. Atom position p is the
// p-th vertex along the polygon path leaving the root, so the reflection
// maps p to m-1-p.
inline BlockCatalog cacti_catalog(int max_gon) {
    BlockCatalog cat = edge_catalog();
    for (int gon = 3; gon <= max_gon; ++gon) {
        int m = gon - 1;
        BlockEntry id;
        id.size = m;
        id.cycles.assign(std::size_t(m), 1);
        for (int p = 0; p < m; ++p) id.pos_cycles.push_back({p});
        id.weight = Rational(1, 2);
        cat.entries.push_back(std::move(id));

        BlockEntry refl;
        refl.size = m;
        refl.weight = Rational(1, 2);
        if (m % 2 == 1) {
            refl.cycles.push_back(1);
            refl.pos_cycles.push_back({(m - 1) / 2});
        }
        for (int p = 0; p < m / 2; ++p) {
            refl.cycles.push_back(2);
            refl.pos_cycles.push_back({p, m - 1 - p});
        }
        cat.entries.push_back(std::move(refl));
    }
    return cat;
}

inline SpeciesDescriptor make_block_species(BlockCatalog cat) {
    SpeciesDescriptor sp;
    sp.kind = SpeciesKind::SET_DERIVED_BLOCKS;
    sp.catalog = std::move(cat);
    sp.validate();
    return sp;
}

// ---- JSON loading ----------------------------------------------------------

namespace detail {

inline Rational rational_from_json(const nlohmann::json& j) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        auto slash = s.find('/');
        if (slash == std::string::npos) return Rational(std::stoll(s));
        return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    }
    if (j.is_number_float()) {
        // accept dyadic floats exactly (0.5, 0.25, ...), reject the rest
        double x = j.get<double>();
        for (long long den = 1; den <= (1LL << 30); den *= 2) {
            double scaled = x * double(den);
            if (scaled == std::floor(scaled) && std::abs(scaled) < 9e15)
                return Rational((long long)scaled, den);
        }
        throw std::domain_error("species json: weight is not exactly representable; use \"p/q\"");
    }
    throw std::domain_error("species json: bad weight value");
}

} // namespace detail

inline SpeciesDescriptor species_from_json(const nlohmann::json& j) {
    SpeciesDescriptor sp;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "set") {
        sp.kind = SpeciesKind::SET_WEIGHTED;
        if (!j.contains("weights")) {
            sp.unit_weights = true;
        } else {
            for (auto& [key, val] : j.at("weights").items())
                sp.degree_weights[std::stoi(key)] = detail::rational_from_json(val);
        }
    } else if (kind == "seq") {
        sp.kind = SpeciesKind::SEQ_RESTRICTED;
        if (!j.contains("lengths")) {
            sp.all_lengths = true;
        } else {
            for (auto& v : j.at("lengths")) sp.length_set.insert(v.get<int>());
        }
    } else if (kind == "seq_k_set") {
        sp.kind = SpeciesKind::SEQK_SET;
        sp.k = j.at("k").get<int>();
    } else if (kind == "set_blocks") {
        sp.kind = SpeciesKind::SET_DERIVED_BLOCKS;
        for (auto& item : j.at("catalog")) {
            int m = item.at("size").get<int>();
            Rational gamma = item.contains("gamma") ? detail::rational_from_json(item.at("gamma"))
                                                    : Rational(1);
            for (auto& ct : item.at("cycle_types")) {
                BlockEntry e;
                e.size = m;
                for (auto& c : ct.at("cycles")) e.cycles.push_back(c.get<int>());
                e.weight = detail::rational_from_json(ct.at("weight"));
                e.gamma = gamma;
                if (ct.contains("positions"))
                    for (auto& pc : ct.at("positions")) {
                        std::vector<int> v;
                        for (auto& p : pc) v.push_back(p.get<int>());
                        e.pos_cycles.push_back(std::move(v));
                    }
                sp.catalog.entries.push_back(std::move(e));
            }
        }
    } else {
        throw std::domain_error("species json: unknown kind '" + kind + "'");
    }
    sp.validate();
    return sp;
}

// ---- scalar cycle-index evaluation ------------------------------------------

// Value of Z at scalar arguments together with its first two partial
// derivatives in s_1 (the quantities behind criticality and offspring
// moments). `e` is the weight-power exponent: weights kappa/gamma enter as
// kappa^e, gamma^e.
struct CycleIndexValue {
    double z = 0, d1 = 0, d11 = 0;
};

namespace detail {

// Partitions of d as cycle types, with the 1/(prod i^{c_i} c_i!) symmetry
// factor. Enumerated once per degree and cached.
struct CycleType {
    std::vector<std::pair<int, int>> cycles; // (length, count), ascending length
    double sym_factor;
    int ones; // count of 1-cycles
};

inline const std::vector<CycleType>& cycle_types_of(int d) {
    static std::map<int, std::vector<CycleType>> cache;
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;
    std::vector<CycleType> out;
    std::vector<std::pair<int, int>> cur;
    std::function<void(int, int)> rec = [&](int rem, int min_len) {
        if (rem == 0) {
            double f = 1.0;
            int ones = 0;
            for (auto& [len, cnt] : cur) {
                for (int c = 1; c <= cnt; ++c) f /= double(len) * c;
                if (len == 1) ones = cnt;
            }
            out.push_back({cur, f, ones});
            return;
        }
        for (int len = min_len; len <= rem; ++len)
            for (int cnt = 1; len * cnt <= rem; ++cnt) {
                cur.emplace_back(len, cnt);
                rec(rem - len * cnt, len + 1);
                cur.pop_back();
            }
    };
    if (d == 0)
        out.push_back({{}, 1.0, 0});
    else
        rec(d, 1);
    return cache.emplace(d, std::move(out)).first->second;
}

// exp(sum_i s_i / i) over the provided arguments; shared by the set kinds.
inline double set_exponent_sum(const std::vector<double>& s) {
    double t = 0;
    for (std::size_t i = 0; i < s.size(); ++i) t += s[i] / double(i + 1);
    return t;
}

} // namespace detail

// args[i-1] = s_i. Throws on divergent geometric evaluation (SEQ at s_1 >= 1).
inline CycleIndexValue eval_cycle_index_d(const SpeciesDescriptor& sp,
                                          const std::vector<double>& args, long long e = 1) {
    CycleIndexValue r;
    auto s = [&](int i) { return i <= int(args.size()) ? args[std::size_t(i - 1)] : 0.0; };
    switch (sp.kind) {
        case SpeciesKind::SET_WEIGHTED: {
            if (sp.unit_weights) {
                double z = std::exp(detail::set_exponent_sum(args));
                return {z, z, z};
            }
            for (const auto& [d, w] : sp.degree_weights) {
                if (w == Rational(0)) continue;
                double wd = std::pow(w.to_double(), double(e));
                for (const auto& ct : detail::cycle_types_of(d)) {
                    double prod = 1.0;
                    for (auto& [len, cnt] : ct.cycles)
                        for (int c = 0; c < cnt; ++c) prod *= s(len);
                    double term = wd * ct.sym_factor * prod;
                    r.z += term;
                    if (ct.ones >= 1 && s(1) != 0.0) r.d1 += term * ct.ones / s(1);
                    if (ct.ones >= 2 && s(1) != 0.0)
                        r.d11 += term * ct.ones * (ct.ones - 1) / (s(1) * s(1));
                    // s_1 = 0 needs the limit forms
                    if (s(1) == 0.0) {
                        if (ct.ones == 1) {
                            double rest = wd * ct.sym_factor;
                            for (auto& [len, cnt] : ct.cycles)
                                if (len != 1)
                                    for (int c = 0; c < cnt; ++c) rest *= s(len);
                            r.d1 += rest;
                        } else if (ct.ones == 2) {
                            double rest = wd * ct.sym_factor;
                            for (auto& [len, cnt] : ct.cycles)
                                if (len != 1)
                                    for (int c = 0; c < cnt; ++c) rest *= s(len);
                            r.d11 += 2.0 * rest;
                        }
                    }
                }
            }
            return r;
        }
        case SpeciesKind::SEQ_RESTRICTED: {
            double u = s(1);
            if (sp.all_lengths) {
                if (u >= 1.0) throw std::domain_error("cycle index: divergent geometric sum");
                double g = 1.0 / (1.0 - u);
                return {g, g * g, 2.0 * g * g * g};
            }
            for (int j : sp.length_set) {
                r.z += std::pow(u, j);
                if (j >= 1) r.d1 += j * std::pow(u, j - 1);
                if (j >= 2) r.d11 += double(j) * (j - 1) * std::pow(u, j - 2);
            }
            return r;
        }
        case SpeciesKind::SEQK_SET: {
            double w = std::exp(detail::set_exponent_sum(args));
            double z = std::pow(w, double(sp.k));
            return {z, sp.k * z, double(sp.k) * sp.k * z};
        }
        case SpeciesKind::SET_DERIVED_BLOCKS: {
            // Z = exp(T), T = sum_l D_l / l with D_l the catalog's cycle index
            // under gamma^{e*l}, evaluated at (s_l, s_2l, ...).
            double T = 0, T1 = 0, T11 = 0;
            int I = int(args.size());
            for (int l = 1; l <= I; ++l) {
                for (const auto& ent : sp.catalog.entries) {
                    double w = ent.weight.to_double() *
                               std::pow(ent.gamma.to_double(), double(e) * l);
                    double prod = w;
                    bool dead = false;
                    int ones = 0; // cycles of length 1 when l == 1 (the s_1 slots)
                    for (int c : ent.cycles) {
                        if (c * l > I) { dead = true; break; }
                        if (c * l == 1) ++ones;
                        prod *= s(c * l);
                    }
                    if (dead) continue;
                    T += prod / l;
                    if (l == 1 && ones >= 1) {
                        if (s(1) != 0.0) {
                            T1 += prod * ones / s(1);
                            if (ones >= 2) T11 += prod * ones * (ones - 1) / (s(1) * s(1));
                        } else {
                            double rest = w;
                            for (int c : ent.cycles)
                                if (c != 1) rest *= s(c);
                            if (ones == 1) T1 += rest;
                            if (ones == 2) T11 += 2.0 * rest;
                        }
                    }
                }
            }
            double z = std::exp(T);
            return {z, z * T1, z * (T1 * T1 + T11)};
        }
    }
    return r;
}

// Spec'd entry point: plain cycle-index value at scalar arguments.
inline double eval_cycle_index(const SpeciesDescriptor& sp, const std::vector<double>& args) {
    return eval_cycle_index_d(sp, args, 1).z;
}

} // namespace enr
