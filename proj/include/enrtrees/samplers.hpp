#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rng.hpp"
#include "solver.hpp"
#include "symmetry.hpp"

namespace enr {

// Requested size has zero weight; the message names the supported residue
// class so callers can pick a nearby valid size.
struct LatticeError : std::domain_error {
    explicit LatticeError(const std::string& m) : std::domain_error(m) {}
};

// A draw exceeded its node or attempt budget (termination is almost sure,
// budgets guard against pathological parameters).
struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& m) : std::runtime_error(m) {}
};

enum class ExactSizeMethod { REJECT, ROTATION, RECURSIVE };

struct SamplerLimits {
    long long node_budget = 1LL << 22;     // per single tree draw
    long long attempt_budget = 1LL << 40;  // exact-size restarts
};

namespace detail {

// One offspring orbit chosen by a blueprint draw. The subtree at an orbit of
// total length L = outer*inner lives at weight member e*L and argument x^{m*L}.
struct OrbitChoice {
    int outer = 1;
    int inner = 1;
    int slot = 0;       // SEQ position / SEQK set index / block cycle index
    int entry = -1;     // block catalog entry
    int block_tag = -1; // orbits of one drawn block share a tag
    long long len() const { return (long long)outer * inner; }
};

struct BlueprintDraw {
    std::vector<OrbitChoice> orbits;
    int marked = -1;    // orbit index of the distinguished fixpoint / palm orbit
    int palm_size = 0;  // ZETA_PALM: expanded subtree size forced on the marked orbit
};

enum class BpBias {
    PLAIN,     // the Boltzmann cycle-type distribution
    XI,        // size-biased by the fixpoint count, one fixpoint marked
    ZETA_PALM, // one extra non-fixpoint orbit by Palm calculus, size-biased subtree
};

} // namespace detail

// ---------------------------------------------------------------------------
// Core Boltzmann machinery: blueprint distributions at state (e, m), where a
// vertex's structure is drawn from Z_{R^{kappa^e}} with arguments
// A_{e*i}(x^{m*i}). Fixpoint offspring keep the state; an orbit of length L
// moves to (e*L, m*L).
// ---------------------------------------------------------------------------
class ModelSampler {
  public:
    ModelSampler(const SpeciesDescriptor& sp, std::shared_ptr<const CriticalAnalysis> crit,
                 double x = 0.0, SamplerLimits limits = {})
        : sp_(sp), crit_(std::move(crit)), limits_(limits) {
        flat_ = sp_.flat_weights();
        // At the critical point the truncated series still evaluates the
        // i >= 2 arguments to full precision, but the i = 1 value must come
        // from the fixed-point solve. Weighted members lack such a corrected
        // value, so weighted models sample at a strictly subcritical x where
        // plain evaluation converges geometrically (exact-size laws do not
        // depend on x).
        x_ = x > 0.0 ? x : (flat_ ? rho() : 0.8 * rho());
        at_rho_ = std::abs(x_ - rho()) <= 1e-12 * rho();
    }

    ModelSampler(const SpeciesDescriptor& sp, int cap = 128, double x = 0.0,
                 SamplerLimits limits = {})
        : ModelSampler(sp, std::make_shared<const CriticalAnalysis>(analyze_criticality(sp, cap)),
                       x, limits) {}

    const SpeciesDescriptor& species() const { return sp_; }
    const CriticalityReport& report() const { return crit_->report; }
    const CriticalAnalysis& analysis() const { return *crit_; }
    double x() const { return x_; }
    double rho() const { return crit_->report.rho; }
    bool flat() const { return flat_; }

    // ---- values A_e(x^m) ---------------------------------------------------
    double value(long long e, long long m) const {
        if (flat_) e = 1;
        if (e >= (1LL << 31) || m >= (1LL << 31)) return 0.0; // x^m underflows
        if (e == 1 && m == 1 && at_rho_) return crit_->report.A_rho;
        std::uint64_t key = (std::uint64_t(e) << 32) ^ std::uint64_t(m);
        auto it = vcache_.find(key);
        if (it != vcache_.end()) return it->second;
        double v = 0.0;
        double arg = std::pow(x_, double(m));
        if (arg >= 1e-300) {
            const auto& fam = crit_->family;
            if (flat_ || fam.has_member(e))
                v = fam.member(e).eval(arg);
            else
                v = weight_pow(sp_.kappa(0).to_double(), e) * arg; // deep members: lone vertex
        }
        vcache_.emplace(key, v);
        return v;
    }

    // mean subtree size at an orbit argument: sum m' a_{m'} y^{m'} / A(y),
    // finite whenever the orbit length L >= 2 keeps y strictly subcritical
    double mean_size(long long e, long long m) const {
        if (flat_) e = 1;
        if (e >= (1LL << 31) || m >= (1LL << 31)) return 0.0;
        std::uint64_t key = (std::uint64_t(e) << 32) ^ std::uint64_t(m);
        auto it = scache_.find(key);
        if (it != scache_.end()) return it->second;
        double s1 = weighted_size_sum(e, m);
        double s0 = value(e, m);
        double v = s0 > 0.0 ? s1 / s0 : 0.0;
        scache_.emplace(key, v);
        return v;
    }

    // ---- one-vertex structure draws ----------------------------------------
    detail::BlueprintDraw draw_blueprint(long long e, long long m, detail::BpBias bias,
                                         RngStream& rng) const {
        switch (sp_.kind) {
            case SpeciesKind::SET_WEIGHTED:
                return sp_.unit_weights ? bp_exp_set(e, m, 1, bias, rng)
                                        : bp_weighted_set(e, m, bias, rng);
            case SpeciesKind::SEQ_RESTRICTED:
                return bp_seq(e, m, bias, rng);
            case SpeciesKind::SEQK_SET:
                return bp_exp_set(e, m, sp_.k, bias, rng);
            case SpeciesKind::SET_DERIVED_BLOCKS:
                return bp_blocks(e, m, bias, rng);
        }
        throw std::logic_error("unreachable species kind");
    }

    // expected non-fixpoint mass of a root blueprint (the Palm normalizer)
    double zeta_mean() const {
        ensure_zeta_sources();
        return zeta_total_;
    }

    const SamplerLimits& limits() const { return limits_; }

  private:
    friend class TreeGrower;

    SpeciesDescriptor sp_;
    std::shared_ptr<const CriticalAnalysis> crit_;
    SamplerLimits limits_;
    double x_ = 0.0;
    bool flat_ = true;
    bool at_rho_ = false;

    mutable std::unordered_map<std::uint64_t, double> vcache_;
    mutable std::unordered_map<std::uint64_t, double> scache_;

    static constexpr double TAIL_EPS = 1e-13; // blueprint tail cutoff

    double weighted_size_sum(long long e, long long m) const {
        double arg = std::pow(x_, double(m));
        if (arg < 1e-300) return 0.0;
        const auto& fam = crit_->family;
        if (!flat_ && !fam.has_member(e)) return weight_pow(sp_.kappa(0).to_double(), e) * arg;
        const auto& ser = fam.member(flat_ ? 1 : e);
        double acc = 0.0, p = 1.0;
        for (int n = 0; n <= ser.cap(); ++n) {
            if (n >= 1) acc += double(n) * ser[std::size_t(n)] * p;
            p *= arg;
            if (p < 1e-320) break;
        }
        return acc;
    }

    // -- SET with unit weights, possibly k parallel copies (SEQK) ------------
    detail::BlueprintDraw bp_exp_set(long long e, long long m, int kcopies, detail::BpBias bias,
                                     RngStream& rng) const {
        detail::BlueprintDraw out;
        for (int i = 1;; ++i) {
            double v = value(e * i, m * i);
            double rate = double(kcopies) * v / double(i);
            if (i > 1 && rate < TAIL_EPS) break;
            if (i > 4 * crit_->report.i_max + 8) break;
            unsigned c = rng.next_poisson(rate);
            for (unsigned j = 0; j < c; ++j) {
                detail::OrbitChoice o;
                o.outer = i;
                o.slot = kcopies > 1 ? int(rng.next_below(std::uint64_t(kcopies))) : 0;
                out.orbits.push_back(o);
            }
        }
        if (bias == detail::BpBias::XI) {
            detail::OrbitChoice o;
            o.outer = 1;
            o.slot = kcopies > 1 ? int(rng.next_below(std::uint64_t(kcopies))) : 0;
            out.orbits.push_back(o);
            out.marked = int(out.orbits.size()) - 1;
        } else if (bias == detail::BpBias::ZETA_PALM) {
            // choose the extra orbit's length i >= 2 with weight k * S1(i),
            // S1(i) = sum m' a_{m'} x^{i m'}; then the subtree size m' with
            // weight m' a_{m'} x^{i m'}
            std::vector<double> w;
            double tot = 0.0;
            for (int i = 2;; ++i) {
                double s1 = weighted_size_sum(e * i, m * i) * double(kcopies);
                if (i > 2 && s1 < TAIL_EPS * (1.0 + tot)) break;
                if (i > 4 * crit_->report.i_max + 8) break;
                w.push_back(s1);
                tot += s1;
            }
            if (tot <= 0.0) throw std::domain_error("palm draw: no non-fixpoint mass");
            int i = 2 + int(rng.next_index(w, tot));
            detail::OrbitChoice o;
            o.outer = i;
            o.slot = kcopies > 1 ? int(rng.next_below(std::uint64_t(kcopies))) : 0;
            out.orbits.push_back(o);
            out.marked = int(out.orbits.size()) - 1;
            out.palm_size = size_biased_size(e * i, m * i, rng);
        }
        return out;
    }

    // -- SET with finite degree weights ---------------------------------------
    struct WSetTable {
        std::vector<double> w;           // per row weight
        std::vector<int> degree;         // row -> degree
        std::vector<const detail::CycleType*> type; // row -> cycle type
        double total = 0.0;
        std::vector<double> wxi;         // XI-biased weights (w * ones)
        double total_xi = 0.0;
        std::vector<double> wzeta;       // ZETA weights (w * E[zeta | type])
        double total_zeta = 0.0;
    };

    const WSetTable& wset_table(long long e, long long m) const {
        std::uint64_t key = (std::uint64_t(e) << 32) ^ std::uint64_t(m);
        auto it = wtables_.find(key);
        if (it != wtables_.end()) return it->second;
        WSetTable tb;
        for (const auto& [d, kw] : sp_.degree_weights) {
            if (kw == Rational(0)) continue;
            double kd = weight_pow(kw.to_double(), e);
            for (const auto& ct : detail::cycle_types_of(d)) {
                double prod = kd * ct.sym_factor;
                double ez = 0.0;
                for (auto& [len, cnt] : ct.cycles) {
                    for (int c = 0; c < cnt; ++c) prod *= value(e * len, m * len);
                    if (len >= 2) ez += double(cnt) * len * mean_size(e * len, m * len);
                }
                if (prod <= 0.0) continue;
                tb.w.push_back(prod);
                tb.degree.push_back(d);
                tb.type.push_back(&ct);
                tb.total += prod;
                tb.wxi.push_back(prod * ct.ones);
                tb.total_xi += prod * ct.ones;
                tb.wzeta.push_back(prod * ez);
                tb.total_zeta += prod * ez;
            }
        }
        if (tb.total <= 0.0) throw std::domain_error("blueprint: zero total weight");
        return wtables_.emplace(key, std::move(tb)).first->second;
    }

    detail::BlueprintDraw bp_weighted_set(long long e, long long m, detail::BpBias bias,
                                          RngStream& rng) const {
        const WSetTable& tb = wset_table(e, m);
        detail::BlueprintDraw out;
        const std::vector<double>* wv = &tb.w;
        double tot = tb.total;
        if (bias == detail::BpBias::XI) {
            wv = &tb.wxi;
            tot = tb.total_xi;
        } else if (bias == detail::BpBias::ZETA_PALM) {
            wv = &tb.wzeta;
            tot = tb.total_zeta;
        }
        if (tot <= 0.0) throw std::domain_error("blueprint: bias has no mass");
        std::size_t row = rng.next_index(*wv, tot);
        const detail::CycleType& ct = *tb.type[row];
        for (auto& [len, cnt] : ct.cycles)
            for (int c = 0; c < cnt; ++c) {
                detail::OrbitChoice o;
                o.outer = len;
                out.orbits.push_back(o);
            }
        if (bias == detail::BpBias::XI) {
            std::vector<int> ones_at;
            for (std::size_t i = 0; i < out.orbits.size(); ++i)
                if (out.orbits[i].len() == 1) ones_at.push_back(int(i));
            out.marked = ones_at[rng.next_below(ones_at.size())];
        } else if (bias == detail::BpBias::ZETA_PALM) {
            // pick the contributing cycle with weight len * E|tau|_{len}
            std::vector<double> w;
            double t2 = 0.0;
            for (auto& o : out.orbits) {
                double c = o.len() >= 2 ? double(o.len()) * mean_size(e * o.len(), m * o.len())
                                        : 0.0;
                w.push_back(c);
                t2 += c;
            }
            out.marked = int(rng.next_index(w, t2));
            const auto& mo = out.orbits[std::size_t(out.marked)];
            out.palm_size = size_biased_size(e * mo.len(), m * mo.len(), rng);
        }
        return out;
    }

    // -- SEQ -----------------------------------------------------------------
    detail::BlueprintDraw bp_seq(long long e, long long m, detail::BpBias bias,
                                 RngStream& rng) const {
        double q = value(e, m);
        detail::BlueprintDraw out;
        int j = 0;
        if (sp_.all_lengths) {
            if (q >= 1.0) throw std::domain_error("blueprint: divergent sequence weight");
            auto geom = [&]() {
                int g = 0;
                while (rng.next_u01() < q) ++g; // P(g) = (1-q) q^g
                return g;
            };
            if (bias == detail::BpBias::XI)
                j = geom() + geom() + 1; // P(j) proportional to j q^j
            else
                j = geom();
        } else {
            std::vector<double> w;
            std::vector<int> lens;
            double tot = 0.0;
            for (int L : sp_.length_set) {
                double wl = std::pow(q, L);
                if (bias == detail::BpBias::XI) wl *= double(L);
                w.push_back(wl);
                lens.push_back(L);
                tot += wl;
            }
            if (tot <= 0.0) throw std::domain_error("blueprint: zero total weight");
            j = lens[rng.next_index(w, tot)];
        }
        if (bias == detail::BpBias::ZETA_PALM)
            throw std::domain_error("palm draw: sequences have no non-fixpoint mass");
        for (int s = 0; s < j; ++s) {
            detail::OrbitChoice o;
            o.slot = s;
            out.orbits.push_back(o);
        }
        if (bias == detail::BpBias::XI && j > 0)
            out.marked = int(rng.next_below(std::uint64_t(j)));
        return out;
    }

    // -- SET of derived blocks -------------------------------------------------
    struct BlockRates {
        // flattened (level, entry) cells with Poisson rates
        std::vector<int> level, entry;
        std::vector<double> rate;      // w gamma^{e l} prod_c A(x^{m c l}) / l
        std::vector<double> zeta_mass; // rate * sum_{cl >= 2} c l E|tau|_{cl}
        std::vector<double> xi_mass;   // rate * (number of fixpoint cycles)
        double zeta_total = 0.0, xi_total = 0.0;
    };

    const BlockRates& block_rates(long long e, long long m) const {
        std::uint64_t key = (std::uint64_t(e) << 32) ^ std::uint64_t(m);
        auto it = btables_.find(key);
        if (it != btables_.end()) return it->second;
        BlockRates tb;
        for (int l = 1;; ++l) {
            double level_mass = 0.0;
            for (std::size_t en = 0; en < sp_.catalog.entries.size(); ++en) {
                const BlockEntry& ent = sp_.catalog.entries[en];
                double w = ent.weight.to_double();
                if (ent.gamma != Rational(1))
                    w *= weight_pow(ent.gamma.to_double(), e * (long long)l);
                double prod = w;
                double ez = 0.0;
                int ones = 0;
                for (int c : ent.cycles) {
                    long long L = (long long)c * l;
                    prod *= value(e * L, m * L);
                    if (L == 1)
                        ++ones;
                    else
                        ez += double(L) * mean_size(e * L, m * L);
                }
                double rate = prod / double(l);
                level_mass += rate;
                if (rate <= 0.0) continue;
                tb.level.push_back(l);
                tb.entry.push_back(int(en));
                tb.rate.push_back(rate);
                // expected non-fixpoint mass from this cell: E[count] times
                // the per-block mass sum_{cl >= 2} (c l) E|tau|_{cl}
                tb.zeta_mass.push_back(rate * ez);
                tb.xi_mass.push_back(rate * ones);
            }
            if (l > 1 && level_mass < TAIL_EPS) break;
            if (l > 8 * crit_->report.i_max + 16) break;
        }
        for (std::size_t i = 0; i < tb.rate.size(); ++i) {
            tb.zeta_total += tb.zeta_mass[i];
            tb.xi_total += tb.xi_mass[i];
        }
        if (tb.rate.empty()) throw std::domain_error("blueprint: empty block table");
        return btables_.emplace(key, std::move(tb)).first->second;
    }

    void add_block_orbits(detail::BlueprintDraw& out, int level, int entry_idx,
                          int& block_tag) const {
        const BlockEntry& ent = sp_.catalog.entries[std::size_t(entry_idx)];
        for (std::size_t ci = 0; ci < ent.cycles.size(); ++ci) {
            detail::OrbitChoice o;
            o.outer = level;
            o.inner = ent.cycles[ci];
            o.slot = int(ci);
            o.entry = entry_idx;
            o.block_tag = block_tag;
            out.orbits.push_back(o);
        }
        ++block_tag;
    }

    detail::BlueprintDraw bp_blocks(long long e, long long m, detail::BpBias bias,
                                    RngStream& rng) const {
        const BlockRates& tb = block_rates(e, m);
        detail::BlueprintDraw out;
        int tag = 0;
        for (std::size_t i = 0; i < tb.rate.size(); ++i) {
            unsigned c = tb.rate[i] > 0.0 ? rng.next_poisson(tb.rate[i]) : 0;
            for (unsigned j = 0; j < c; ++j) add_block_orbits(out, tb.level[i], tb.entry[i], tag);
        }
        if (bias == detail::BpBias::XI) {
            if (tb.xi_total <= 0.0) throw std::domain_error("blueprint: bias has no mass");
            std::size_t cell = rng.next_index(tb.xi_mass, tb.xi_total);
            int first = int(out.orbits.size());
            add_block_orbits(out, tb.level[cell], tb.entry[cell], tag);
            std::vector<int> ones_at;
            for (std::size_t i = std::size_t(first); i < out.orbits.size(); ++i)
                if (out.orbits[i].len() == 1) ones_at.push_back(int(i));
            out.marked = ones_at[rng.next_below(ones_at.size())];
        } else if (bias == detail::BpBias::ZETA_PALM) {
            if (tb.zeta_total <= 0.0) throw std::domain_error("palm draw: no non-fixpoint mass");
            std::size_t cell = rng.next_index(tb.zeta_mass, tb.zeta_total);
            int first = int(out.orbits.size());
            add_block_orbits(out, tb.level[cell], tb.entry[cell], tag);
            std::vector<double> w;
            double tot = 0.0;
            for (std::size_t i = std::size_t(first); i < out.orbits.size(); ++i) {
                const auto& o = out.orbits[i];
                double c = o.len() >= 2 ? double(o.len()) * mean_size(e * o.len(), m * o.len())
                                        : 0.0;
                w.push_back(c);
                tot += c;
            }
            out.marked = first + int(rng.next_index(w, tot));
            const auto& mo = out.orbits[std::size_t(out.marked)];
            out.palm_size = size_biased_size(e * mo.len(), m * mo.len(), rng);
        }
        return out;
    }

    // size-biased subtree size at state (e', m'): P(m') ~ m' a_{m'} x^{m' m}
    int size_biased_size(long long e, long long m, RngStream& rng) const {
        if (flat_) e = 1;
        const auto& fam = crit_->family;
        if (!flat_ && !fam.has_member(e)) return 1;
        const auto& ser = fam.member(e);
        double arg = std::pow(x_, double(m));
        double u = rng.next_u01() * weighted_size_sum(e, m);
        double acc = 0.0, p = arg;
        for (int n = 1; n <= ser.cap(); ++n) {
            acc += double(n) * ser[std::size_t(n)] * p;
            if (u < acc) return n;
            p *= arg;
        }
        return std::max(1, ser.cap());
    }

    // root-level zeta decomposition, kept for diagnostics and tests
    void ensure_zeta_sources() const {
        if (zeta_ready_) return;
        double tot = 0.0;
        switch (sp_.kind) {
            case SpeciesKind::SET_WEIGHTED:
                if (sp_.unit_weights) {
                    for (int i = 2; i <= 4 * crit_->report.i_max + 8; ++i)
                        tot += weighted_size_sum(i, i);
                } else {
                    const WSetTable& tb = wset_table(1, 1);
                    tot = tb.total_zeta / tb.total;
                }
                break;
            case SpeciesKind::SEQ_RESTRICTED:
                tot = 0.0;
                break;
            case SpeciesKind::SEQK_SET:
                for (int i = 2; i <= 4 * crit_->report.i_max + 8; ++i)
                    tot += double(sp_.k) * weighted_size_sum(i, i);
                break;
            case SpeciesKind::SET_DERIVED_BLOCKS:
                tot = block_rates(1, 1).zeta_total;
                break;
        }
        zeta_total_ = tot;
        zeta_ready_ = true;
    }

    mutable std::unordered_map<std::uint64_t, WSetTable> wtables_;
    mutable std::unordered_map<std::uint64_t, BlockRates> btables_;
    mutable bool zeta_ready_ = false;
    mutable double zeta_total_ = 0.0;
};

// ---------------------------------------------------------------------------
// Tree construction from blueprints.
// ---------------------------------------------------------------------------
namespace detail {

struct GrowItem {
    int node;       // parent compressed node
    int group;      // group index awaiting a child
    long long e, m; // child state
    long long mult; // expanded copies of the child vertex
};

} // namespace detail

class TreeGrower {
  public:
    explicit TreeGrower(const ModelSampler& s) : s_(s) {}

    struct Result {
        SymEnrichedTree tree;
        long long expanded = 0;
        bool aborted = false;
    };

    // Full recursive draw from state (e, m); abort_above > 0 stops early once
    // the expanded size exceeds it (used by exact-size rejection).
    Result draw_tree(RngStream& rng, long long abort_above = 0, long long e = 1,
                     long long m = 1) const {
        Result res;
        int root = res.tree.add_node();
        res.tree.root = root;
        res.expanded = 1;
        std::vector<detail::GrowItem> stack;
        expand_node(res.tree, root, e, m, 1, detail::BpBias::PLAIN, rng, stack);
        long long nodes = 1;
        while (!stack.empty()) {
            auto it = stack.back();
            stack.pop_back();
            res.expanded += it.mult;
            if (abort_above > 0 && res.expanded > abort_above) {
                res.aborted = true;
                return res;
            }
            if (++nodes > s_.limits().node_budget)
                throw BudgetError("tree draw exceeded the node budget");
            int v = res.tree.add_node();
            res.tree.nodes[std::size_t(it.node)].groups[std::size_t(it.group)].child = v;
            expand_node(res.tree, v, it.e, it.m, it.mult, detail::BpBias::PLAIN, rng, stack);
        }
        return res;
    }

    // One G-object: the root blueprint with fixpoint slots left open and the
    // non-fixpoint orbits grown in full.
    GObject draw_G(RngStream& rng, detail::BpBias bias = detail::BpBias::PLAIN,
                   int* marked_group = nullptr, int* palm_node = nullptr) const {
        GObject g;
        int root = g.shape.add_node();
        g.shape.root = root;
        detail::BlueprintDraw bp = s_.draw_blueprint(1, 1, bias, rng);
        std::vector<detail::GrowItem> stack;
        int mg = install_orbits(g.shape, root, bp, 1, 1, 1, stack, /*open_fixpoints=*/true);
        if (marked_group) *marked_group = mg;
        int palm_root = -1;
        if (bias == detail::BpBias::ZETA_PALM && bp.marked >= 0) {
            // the palm orbit's subtree has a forced size (install_orbits left
            // it unqueued): grow it exactly at state (e*L, m*L) from (1, 1)
            const auto& o = bp.orbits[std::size_t(bp.marked)];
            SymEnrichedTree sub = exact_subtree(o.len(), o.len(), bp.palm_size, rng);
            int r = append_subtree(g.shape, sub);
            g.shape.nodes[std::size_t(root)].groups[std::size_t(mg)].child = r;
            palm_root = r;
        }
        grow_pending(g.shape, stack, rng);
        if (palm_node) *palm_node = palm_root;
        return g;
    }

    // Exact-size subtree at state (e, m) by rejection (subcritical states
    // terminate fast; used for palm content only).
    SymEnrichedTree exact_subtree(long long e, long long m, int n, RngStream& rng) const {
        for (long long att = 0; att < s_.limits().attempt_budget; ++att) {
            Result r = draw_tree(rng, n, e, m);
            if (!r.aborted && r.expanded == n) return std::move(r.tree);
        }
        throw BudgetError("exact-size subtree attempts exhausted");
    }

    // Install blueprint orbits as groups of node v; returns the group index of
    // the marked orbit (-1 when none). Fixpoint orbits are left as open slots
    // when open_fixpoints is set, otherwise queued for growth like the rest.
    int install_orbits(SymEnrichedTree& t, int v, const detail::BlueprintDraw& bp, long long e,
                       long long m, long long mult, std::vector<detail::GrowItem>& stack,
                       bool open_fixpoints) const {
        int marked_group = -1;
        auto& groups = t.nodes[std::size_t(v)].groups;
        int base_tag = next_tag_;
        for (std::size_t oi = 0; oi < bp.orbits.size(); ++oi) {
            const auto& o = bp.orbits[oi];
            SymGroup g;
            g.outer_len = o.outer;
            g.inner_len = o.inner;
            g.slot = o.slot;
            g.entry = o.entry;
            g.block_id = o.block_tag >= 0 ? base_tag + o.block_tag : -1;
            groups.push_back(g);
            int gi = int(groups.size()) - 1;
            if (int(oi) == bp.marked) marked_group = gi;
            bool leave_open = open_fixpoints && o.len() == 1;
            // a palm-marked orbit is grown by the caller at its forced size
            bool is_marked_palm = int(oi) == bp.marked && bp.palm_size > 0;
            if (!leave_open && !is_marked_palm)
                stack.push_back({v, gi, e * o.len(), m * o.len(), mult * o.len()});
        }
        for (const auto& o : bp.orbits)
            if (o.block_tag >= 0) next_tag_ = std::max(next_tag_, base_tag + o.block_tag + 1);
        return marked_group;
    }

    // draw blueprint for node v and queue its offspring
    void expand_node(SymEnrichedTree& t, int v, long long e, long long m, long long mult,
                     detail::BpBias bias, RngStream& rng,
                     std::vector<detail::GrowItem>& stack) const {
        detail::BlueprintDraw bp = s_.draw_blueprint(e, m, bias, rng);
        install_orbits(t, v, bp, e, m, mult, stack, /*open_fixpoints=*/false);
    }

    void grow_pending(SymEnrichedTree& t, std::vector<detail::GrowItem>& stack,
                      RngStream& rng) const {
        long long nodes = 0;
        while (!stack.empty()) {
            auto it = stack.back();
            stack.pop_back();
            if (++nodes > s_.limits().node_budget)
                throw BudgetError("tree draw exceeded the node budget");
            int v = t.add_node();
            t.nodes[std::size_t(it.node)].groups[std::size_t(it.group)].child = v;
            expand_node(t, v, it.e, it.m, it.mult, detail::BpBias::PLAIN, rng, stack);
        }
    }

  private:
    const ModelSampler& s_;
    mutable int next_tag_ = 0;
};

// ---------------------------------------------------------------------------
// Spec'd operations.
// ---------------------------------------------------------------------------

inline SymEnrichedTree gamma_S(const ModelSampler& s, RngStream& rng) {
    TreeGrower g(s);
    return g.draw_tree(rng).tree;
}

inline GObject draw_G(const ModelSampler& s, RngStream& rng) {
    TreeGrower g(s);
    return g.draw_G(rng);
}

// fixpoint-count-biased G with one distinguished fixpoint slot
struct MarkedG {
    GObject g;
    int marked_group = -1; // group index at the root
};

inline MarkedG draw_G_hat(const ModelSampler& s, RngStream& rng) {
    TreeGrower gr(s);
    MarkedG out;
    out.g = gr.draw_G(rng, detail::BpBias::XI, &out.marked_group);
    return out;
}

// (1 + non-fixpoint mass)-biased G carrying the marked atom u*: either the
// root itself or an atom inside the palm-grown fringe subtree. Realized as the
// exact palm mixture: with probability 1/(1+E[zeta]) a plain G (u* = root),
// otherwise a G with one extra size-biased non-fixpoint orbit whose content
// holds the size-biased atom.
struct BarG {
    GObject g;
    int u_star = 0; // node id inside g.shape
};

inline BarG draw_G_bar(const ModelSampler& s, RngStream& rng) {
    TreeGrower gr(s);
    BarG out;
    double ez = s.zeta_mean();
    if (ez <= 0.0 || rng.next_u01() < 1.0 / (1.0 + ez)) {
        out.g = gr.draw_G(rng);
        out.u_star = out.g.shape.root;
        return out;
    }
    int palm_root = -1;
    out.g = gr.draw_G(rng, detail::BpBias::ZETA_PALM, nullptr, &palm_root);
    // uniform atom within the palm subtree: weight nodes by expanded copies
    std::vector<int> nodes;
    std::vector<double> w;
    double tot = 0.0;
    std::vector<std::pair<int, long long>> st{{palm_root, 1}};
    while (!st.empty()) {
        auto [v, mult] = st.back();
        st.pop_back();
        nodes.push_back(v);
        w.push_back(double(mult));
        tot += double(mult);
        for (const auto& g2 : out.g.shape.nodes[std::size_t(v)].groups)
            if (g2.child >= 0) st.push_back({g2.child, mult * g2.len()});
    }
    out.u_star = nodes[rng.next_index(w, tot)];
    return out;
}

// ---------------------------------------------------------------------------
// Exact-size sampling.
// ---------------------------------------------------------------------------

namespace detail {

// Coefficient tables for the recursive exact-size method (0/1-weight species
// only). Everything is kept in the scaled world b_m = a_m rho^m; probabilities
// are ratios, so the scaling cancels.
class RecursiveTables {
  public:
    RecursiveTables(const SpeciesDescriptor& sp, double rho, int n_max)
        : sp_(sp), rho_(rho), n_(n_max) {
        if (!sp.flat_weights())
            throw std::domain_error("recursive method requires 0/1 weights");
        auto fam = solve_enriched_fixed_point<double>(sp, n_max, rho);
        b_ = fam.member(1).coeffs;
        b_.resize(std::size_t(n_) + 1, 0.0);
        spow_.assign(std::size_t(n_) + 1, 1.0);
        for (int i = 1; i <= n_; ++i) spow_[std::size_t(i)] = spow_[std::size_t(i - 1)] * rho_;
        switch (sp_.kind) {
            case SpeciesKind::SET_WEIGHTED:
                if (sp_.unit_weights)
                    build_forest(1);
                else
                    build_wset();
                break;
            case SpeciesKind::SEQ_RESTRICTED:
                build_seq();
                break;
            case SpeciesKind::SEQK_SET:
                build_forest(1);
                build_seqk();
                break;
            case SpeciesKind::SET_DERIVED_BLOCKS:
                build_blocks();
                break;
        }
        build_gibbs_forest();
    }

    int capacity() const { return n_; }
    double tree_coeff(int n) const { return n >= 0 && n <= n_ ? b_[std::size_t(n)] : 0.0; }

    SymEnrichedTree sample(int n, RngStream& rng) const {
        if (n < 1 || n > n_ || b_[std::size_t(n)] <= 0.0)
            throw LatticeError(lattice_message(n));
        SymEnrichedTree t;
        int root = t.add_node();
        t.root = root;
        sample_vertex(t, root, n, rng);
        return t;
    }

    // multiset of (cycle length, member size) clusters for a SET of whole
    // model structures with total size M (the Gibbs composite); valid for
    // every species kind because it runs over the model's own size series
    struct Cluster {
        int cycle_len;
        int size;
    };
    std::vector<Cluster> sample_forest_clusters(int M, RngStream& rng) const {
        std::vector<Cluster> out;
        while (M > 0) {
            int kk = pick_split(gc_, gf_, M, rng);
            auto [i, mm] = pick_cluster(kk, rng);
            out.push_back({i, mm});
            M -= kk;
        }
        return out;
    }

    double forest_coeff(int M) const {
        return M >= 0 && M <= n_ ? gf_[std::size_t(M)] : 0.0;
    }

    std::string lattice_message(int n) const {
        long long g = 0;
        for (int m = 1; m <= n_; ++m)
            if (b_[std::size_t(m)] > 0.0) g = std::gcd(g, (long long)m - 1);
        if (g == 0) g = 1;
        return "no objects of size " + std::to_string(n) + ": sizes lie in 1 + " +
               std::to_string(g) + "*Z (within the solved range)";
    }

  private:
    const SpeciesDescriptor sp_;
    double rho_;
    int n_;
    std::vector<double> b_;    // scaled tree coefficients
    std::vector<double> spow_; // rho powers
    // unit-set forest tables (offspring forests, kind-specific use)
    std::vector<double> c_, f_;
    bool forest_ready_ = false;
    // SET-of-whole-structures tables for Gibbs composites
    std::vector<double> gc_, gf_;
    // seqk: convolution powers of the forest series
    std::vector<std::vector<double>> fpow_;
    // weighted set: per cycle type, slot series and suffix products
    struct TypeTab {
        double sym;
        std::vector<int> lens;                  // flattened cycle lengths
        std::vector<std::vector<double>> suf;   // suf[j] = conv of slots j..end
    };
    std::vector<TypeTab> types_;
    // seq
    std::vector<std::vector<double>> seqpow_; // A^j tables (restricted lengths)
    std::vector<double> fseq_;                // 1/(1-A) table (all lengths)
    // blocks: per entry, base product arrays and suffix products in the level
    // variable, e_hat[j] = rho^j [y^j] prod_c A(y^c)
    struct EntryTab {
        double w;
        std::vector<int> cycles;
        std::vector<std::vector<double>> suf; // suffix conv of slot arrays
        std::vector<double> slot0;            // slot series of the first cycle
    };
    std::vector<EntryTab> entries_;

    void build_gibbs_forest() {
        gc_.assign(std::size_t(n_) + 1, 0.0);
        for (int i = 1; i <= n_; ++i)
            for (int m = 1; (long long)i * m <= n_; ++m)
                gc_[std::size_t(i * m)] += double(m) * b_[std::size_t(m)] *
                                           spow_[std::size_t((long long)m * (i - 1))];
        gf_.assign(std::size_t(n_) + 1, 0.0);
        gf_[0] = 1.0;
        for (int M = 1; M <= n_; ++M) {
            double acc = 0.0;
            for (int k = 1; k <= M; ++k) acc += gc_[std::size_t(k)] * gf_[std::size_t(M - k)];
            gf_[std::size_t(M)] = acc / double(M);
        }
    }

    // slot series of a cycle of length c: u[t] = b[t/c] * rho^{(t/c)(c-1)}
    std::vector<double> slot_series(int c) const {
        std::vector<double> u(std::size_t(n_) + 1, 0.0);
        for (int m = 1; (long long)c * m <= n_; ++m)
            u[std::size_t(c * m)] =
                b_[std::size_t(m)] * spow_[std::size_t((long long)m * (c - 1))];
        return u;
    }

    static std::vector<double> conv(const std::vector<double>& a, const std::vector<double>& bv) {
        std::vector<double> r(a.size(), 0.0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0.0) continue;
            for (std::size_t j = 0; i + j < r.size(); ++j) {
                if (bv[j] == 0.0) continue;
                r[i + j] += a[i] * bv[j];
            }
        }
        return r;
    }

    void build_forest(int kcopies) {
        // c[k] = kcopies * sum_{i m = k} m b[m] rho^{m(i-1)};
        // M f[M] = sum c[k] f[M-k]
        c_.assign(std::size_t(n_) + 1, 0.0);
        for (int i = 1; i <= n_; ++i)
            for (int m = 1; (long long)i * m <= n_; ++m)
                c_[std::size_t(i * m)] += double(kcopies) * double(m) * b_[std::size_t(m)] *
                                          spow_[std::size_t((long long)m * (i - 1))];
        f_.assign(std::size_t(n_) + 1, 0.0);
        f_[0] = 1.0;
        for (int M = 1; M <= n_; ++M) {
            double acc = 0.0;
            for (int k = 1; k <= M; ++k) acc += c_[std::size_t(k)] * f_[std::size_t(M - k)];
            f_[std::size_t(M)] = acc / double(M);
        }
        forest_ready_ = true;
    }

    void build_seqk() {
        fpow_.assign(std::size_t(sp_.k) + 1, {});
        fpow_[0].assign(std::size_t(n_) + 1, 0.0);
        fpow_[0][0] = 1.0;
        for (int r = 1; r <= sp_.k; ++r) fpow_[std::size_t(r)] = conv(fpow_[std::size_t(r - 1)], f_);
    }

    void build_wset() {
        for (const auto& [d, w] : sp_.degree_weights) {
            if (w == Rational(0)) continue;
            for (const auto& ct : cycle_types_of(d)) {
                TypeTab tt;
                tt.sym = ct.sym_factor; // 0/1 weights: kappa factor is 1
                for (auto& [len, cnt] : ct.cycles)
                    for (int c = 0; c < cnt; ++c) tt.lens.push_back(len);
                std::vector<double> acc(std::size_t(n_) + 1, 0.0);
                acc[0] = 1.0;
                tt.suf.assign(tt.lens.size() + 1, {});
                tt.suf[tt.lens.size()] = acc;
                for (int j = int(tt.lens.size()) - 1; j >= 0; --j)
                    tt.suf[std::size_t(j)] =
                        conv(slot_series(tt.lens[std::size_t(j)]), tt.suf[std::size_t(j + 1)]);
                types_.push_back(std::move(tt));
            }
        }
    }

    void build_seq() {
        if (sp_.all_lengths) {
            fseq_.assign(std::size_t(n_) + 1, 0.0);
            fseq_[0] = 1.0;
            for (int M = 1; M <= n_; ++M) {
                double acc = 0.0;
                for (int m = 1; m <= M; ++m)
                    acc += b_[std::size_t(m)] * fseq_[std::size_t(M - m)];
                fseq_[std::size_t(M)] = acc;
            }
            return;
        }
        int maxL = *sp_.length_set.rbegin();
        seqpow_.assign(std::size_t(maxL) + 1, {});
        seqpow_[0].assign(std::size_t(n_) + 1, 0.0);
        seqpow_[0][0] = 1.0;
        for (int j = 1; j <= maxL; ++j) {
            seqpow_[std::size_t(j)] = conv(seqpow_[std::size_t(j - 1)], b_);
            // b_ has index 0 empty; conv uses b_[0] = 0 so sizes shift correctly
        }
    }

    void build_blocks() {
        for (const auto& ent : sp_.catalog.entries) {
            EntryTab et;
            et.w = ent.weight.to_double(); // flat: gamma == 1
            et.cycles = ent.cycles;
            std::vector<double> acc(std::size_t(n_) + 1, 0.0);
            acc[0] = 1.0;
            et.suf.assign(ent.cycles.size() + 1, {});
            et.suf[ent.cycles.size()] = acc;
            for (int j = int(ent.cycles.size()) - 1; j >= 0; --j)
                et.suf[std::size_t(j)] =
                    conv(slot_series(ent.cycles[std::size_t(j)]), et.suf[std::size_t(j + 1)]);
            entries_.push_back(std::move(et));
        }
        // c[k] = sum over levels l and entries: (k/l) w e_hat[k/l] rho^{(k/l)(l-1)}
        c_.assign(std::size_t(n_) + 1, 0.0);
        for (std::size_t en = 0; en < entries_.size(); ++en) {
            const auto& base = entries_[en].suf[0];
            for (int l = 1; l <= n_; ++l)
                for (int j = 1; (long long)l * j <= n_; ++j) {
                    double v = base[std::size_t(j)];
                    if (v == 0.0) continue;
                    c_[std::size_t(l * j)] += double(j) * entries_[en].w * v *
                                              spow_[std::size_t((long long)j * (l - 1))];
                }
        }
        f_.assign(std::size_t(n_) + 1, 0.0);
        f_[0] = 1.0;
        for (int M = 1; M <= n_; ++M) {
            double acc = 0.0;
            for (int k = 1; k <= M; ++k) acc += c_[std::size_t(k)] * f_[std::size_t(M - k)];
            f_[std::size_t(M)] = acc / double(M);
        }
        forest_ready_ = true;
    }

    // boustrophedon pick of k in [1, M] with weight c[k] f[M-k]
    static int pick_split(const std::vector<double>& c, const std::vector<double>& f, int M,
                          RngStream& rng) {
        double tot = double(M) * f[std::size_t(M)];
        double u = rng.next_u01() * tot;
        double acc = 0.0;
        int lo = 1, hi = M;
        bool from_lo = true;
        while (lo <= hi) {
            int k = from_lo ? lo++ : hi--;
            from_lo = !from_lo;
            acc += c[std::size_t(k)] * f[std::size_t(M - k)];
            if (u < acc) return k;
        }
        // numerical slack: fall back to the largest positive term
        for (int k = M; k >= 1; --k)
            if (c[std::size_t(k)] * f[std::size_t(M - k)] > 0.0) return k;
        throw std::logic_error("forest split: no positive weight");
    }

    // given cluster total k, pick (cycle length i, subtree size m), i*m = k
    std::pair<int, int> pick_cluster(int k, RngStream& rng) const {
        std::vector<double> w;
        std::vector<std::pair<int, int>> im;
        double tot = 0.0;
        for (int m = 1; m <= k; ++m) {
            if (k % m != 0) continue;
            int i = k / m;
            double v = double(m) * b_[std::size_t(m)] *
                       spow_[std::size_t((long long)m * (i - 1))];
            if (v <= 0.0) continue;
            w.push_back(v);
            im.emplace_back(i, m);
            tot += v;
        }
        auto [i, m] = im[rng.next_index(w, tot)];
        return {i, m};
    }

    // append one cluster (i identical copies of an exact-size m subtree)
    void add_set_cluster(SymEnrichedTree& t, int v, int i, int m, int slot, RngStream& rng) const {
        SymGroup g;
        g.outer_len = i;
        g.slot = slot;
        t.nodes[std::size_t(v)].groups.push_back(g);
        int gi = int(t.nodes[std::size_t(v)].groups.size()) - 1;
        SymEnrichedTree sub;
        int r = sub.add_node();
        sub.root = r;
        sample_vertex(sub, r, m, rng);
        int nr = append_subtree(t, sub);
        t.nodes[std::size_t(v)].groups[std::size_t(gi)].child = nr;
    }

    void sample_set_forest(SymEnrichedTree& t, int v, int M, int slot, RngStream& rng) const {
        while (M > 0) {
            int kk = pick_split(c_, f_, M, rng);
            auto [i, m] = pick_cluster(kk, rng);
            add_set_cluster(t, v, i, m, slot, rng);
            M -= kk;
        }
    }

    void sample_vertex(SymEnrichedTree& t, int v, int n, RngStream& rng) const {
        int M = n - 1; // children mass after the vertex itself
        switch (sp_.kind) {
            case SpeciesKind::SET_WEIGHTED:
                if (sp_.unit_weights) {
                    sample_set_forest(t, v, M, 0, rng);
                    return;
                }
                sample_wset_vertex(t, v, M, rng);
                return;
            case SpeciesKind::SEQ_RESTRICTED:
                sample_seq_vertex(t, v, M, rng);
                return;
            case SpeciesKind::SEQK_SET: {
                // split M over the k ordered set-slots via convolution powers
                int rem = M;
                for (int s = 0; s + 1 < sp_.k; ++s) {
                    std::vector<double> w(std::size_t(rem) + 1);
                    double tot = 0.0;
                    for (int M1 = 0; M1 <= rem; ++M1) {
                        w[std::size_t(M1)] =
                            f_[std::size_t(M1)] *
                            fpow_[std::size_t(sp_.k - s - 1)][std::size_t(rem - M1)];
                        tot += w[std::size_t(M1)];
                    }
                    int M1 = int(rng.next_index(w, tot));
                    sample_set_forest(t, v, M1, s, rng);
                    rem -= M1;
                }
                sample_set_forest(t, v, rem, sp_.k - 1, rng);
                return;
            }
            case SpeciesKind::SET_DERIVED_BLOCKS:
                sample_blocks_vertex(t, v, M, rng);
                return;
        }
    }

    void sample_wset_vertex(SymEnrichedTree& t, int v, int M, RngStream& rng) const {
        std::vector<double> w(types_.size());
        double tot = 0.0;
        for (std::size_t i = 0; i < types_.size(); ++i) {
            w[i] = types_[i].sym * types_[i].suf[0][std::size_t(M)];
            tot += w[i];
        }
        if (tot <= 0.0) throw LatticeError(lattice_message(M + 1));
        const TypeTab& tt = types_[rng.next_index(w, tot)];
        int rem = M;
        for (std::size_t j = 0; j < tt.lens.size(); ++j) {
            int len = tt.lens[j];
            std::vector<double> wm;
            std::vector<int> ms;
            double tm = 0.0;
            for (int m = 1; (long long)len * m <= rem; ++m) {
                double val = b_[std::size_t(m)] *
                             spow_[std::size_t((long long)m * (len - 1))] *
                             tt.suf[j + 1][std::size_t(rem - len * m)];
                if (val <= 0.0) continue;
                wm.push_back(val);
                ms.push_back(m);
                tm += val;
            }
            int m = ms[rng.next_index(wm, tm)];
            add_set_cluster(t, v, len, m, 0, rng);
            rem -= len * m;
        }
    }

    void sample_seq_vertex(SymEnrichedTree& t, int v, int M, RngStream& rng) const {
        auto add_child = [&](int m, int slot) {
            SymGroup g;
            g.slot = slot;
            t.nodes[std::size_t(v)].groups.push_back(g);
            int gi = int(t.nodes[std::size_t(v)].groups.size()) - 1;
            SymEnrichedTree sub;
            int r = sub.add_node();
            sub.root = r;
            sample_vertex(sub, r, m, rng);
            t.nodes[std::size_t(v)].groups[std::size_t(gi)].child = append_subtree(t, sub);
        };
        if (sp_.all_lengths) {
            int rem = M, slot = 0;
            while (rem > 0) {
                std::vector<double> w;
                std::vector<int> ms;
                double tot = 0.0;
                for (int m = 1; m <= rem; ++m) {
                    double val = b_[std::size_t(m)] * fseq_[std::size_t(rem - m)];
                    if (val <= 0.0) continue;
                    w.push_back(val);
                    ms.push_back(m);
                    tot += val;
                }
                int m = ms[rng.next_index(w, tot)];
                add_child(m, slot++);
                rem -= m;
            }
            return;
        }
        std::vector<double> w;
        std::vector<int> js;
        double tot = 0.0;
        for (int j : sp_.length_set) {
            double val = seqpow_[std::size_t(j)][std::size_t(M)];
            if (val <= 0.0) continue;
            w.push_back(val);
            js.push_back(j);
            tot += val;
        }
        if (tot <= 0.0) throw LatticeError(lattice_message(M + 1));
        int j = js[rng.next_index(w, tot)];
        int rem = M;
        for (int s = 0; s < j; ++s) {
            std::vector<double> wm;
            std::vector<int> ms;
            double tm = 0.0;
            for (int m = 1; m <= rem; ++m) {
                double val =
                    b_[std::size_t(m)] * seqpow_[std::size_t(j - s - 1)][std::size_t(rem - m)];
                if (val <= 0.0) continue;
                wm.push_back(val);
                ms.push_back(m);
                tm += val;
            }
            int m = ms[rng.next_index(wm, tm)];
            add_child(m, s);
            rem -= m;
        }
    }

    void sample_blocks_vertex(SymEnrichedTree& t, int v, int M, RngStream& rng) const {
        int block_tag = 0;
        while (M > 0) {
            int kk = pick_split(c_, f_, M, rng);
            // (level l, entry, inner total j), l * j = kk, weight
            // j * w * e_hat[j] * rho^{j(l-1)}
            std::vector<double> w;
            std::vector<std::pair<int, std::size_t>> lj;
            double tot = 0.0;
            for (int l = 1; l <= kk; ++l) {
                if (kk % l != 0) continue;
                int j = kk / l;
                for (std::size_t en = 0; en < entries_.size(); ++en) {
                    double val = double(j) * entries_[en].w *
                                 entries_[en].suf[0][std::size_t(j)] *
                                 spow_[std::size_t((long long)j * (l - 1))];
                    if (val <= 0.0) continue;
                    w.push_back(val);
                    lj.emplace_back(l, en);
                    tot += val;
                }
            }
            auto [l, en] = lj[rng.next_index(w, tot)];
            const EntryTab& et = entries_[en];
            int j = kk / l;
            // split j over the entry's cycles in the level variable
            int rem = j;
            for (std::size_t ci = 0; ci < et.cycles.size(); ++ci) {
                int cyc = et.cycles[ci];
                std::vector<double> wm;
                std::vector<int> ms;
                double tm = 0.0;
                for (int m = 1; (long long)cyc * m <= rem; ++m) {
                    double val = b_[std::size_t(m)] *
                                 spow_[std::size_t((long long)m * (cyc - 1))] *
                                 et.suf[ci + 1][std::size_t(rem - cyc * m)];
                    if (val <= 0.0) continue;
                    wm.push_back(val);
                    ms.push_back(m);
                    tm += val;
                }
                int m = ms[rng.next_index(wm, tm)];
                SymGroup g;
                g.outer_len = l;
                g.inner_len = cyc;
                g.slot = int(ci);
                g.entry = int(en);
                g.block_id = block_tag;
                t.nodes[std::size_t(v)].groups.push_back(g);
                int gi = int(t.nodes[std::size_t(v)].groups.size()) - 1;
                SymEnrichedTree sub;
                int r = sub.add_node();
                sub.root = r;
                sample_vertex(sub, r, m, rng);
                t.nodes[std::size_t(v)].groups[std::size_t(gi)].child = append_subtree(t, sub);
                rem -= cyc * m;
            }
            ++block_tag;
            M -= kk;
        }
    }
};

} // namespace detail

// Exact-size generator bundling the three methods. Heavy tables are built
// lazily per requested capacity.
class ExactSizeSampler {
  public:
    explicit ExactSizeSampler(std::shared_ptr<const ModelSampler> s) : s_(std::move(s)) {}
    explicit ExactSizeSampler(const SpeciesDescriptor& sp, int cap = 128)
        : s_(std::make_shared<const ModelSampler>(sp, cap)) {}

    const ModelSampler& sampler() const { return *s_; }

    void ensure_capacity(int n) const {
        if (!rec_ || rec_->capacity() < n)
            rec_ = std::make_unique<detail::RecursiveTables>(s_->species(), s_->rho(),
                                                             std::max(n, 64));
    }

    SymEnrichedTree sample(int n, ExactSizeMethod method, RngStream& rng) const {
        if (n < 1) throw std::domain_error("exact-size: n must be >= 1");
        if (s_->flat()) {
            ensure_capacity(n);
            if (rec_->tree_coeff(n) <= 0.0) throw LatticeError(rec_->lattice_message(n));
        } else {
            check_weighted_support(n);
        }
        switch (method) {
            case ExactSizeMethod::REJECT:
                return sample_reject(n, rng);
            case ExactSizeMethod::ROTATION:
                return sample_rotation(n, rng);
            case ExactSizeMethod::RECURSIVE:
                if (!s_->flat())
                    throw std::domain_error("recursive method requires 0/1 weights");
                return rec_->sample(n, rng);
        }
        throw std::logic_error("unreachable method");
    }

    const detail::RecursiveTables& tables(int n) const {
        ensure_capacity(n);
        return *rec_;
    }

  private:
    std::shared_ptr<const ModelSampler> s_;
    mutable std::unique_ptr<detail::RecursiveTables> rec_;

    void check_weighted_support(int n) const {
        const auto& fam = s_->analysis().family;
        const auto& ser = fam.member(1);
        if (n <= ser.cap()) {
            if (ser[std::size_t(n)] <= 0.0) {
                long long g = 0;
                for (int m = 1; m <= ser.cap(); ++m)
                    if (ser[std::size_t(m)] > 0.0) g = std::gcd(g, (long long)m - 1);
                if (g == 0) g = 1;
                throw LatticeError("no objects of size " + std::to_string(n) +
                                   ": sizes lie in 1 + " + std::to_string(g) + "*Z");
            }
        }
    }

    SymEnrichedTree sample_reject(int n, RngStream& rng) const {
        TreeGrower gr(*s_);
        for (long long att = 0; att < s_->limits().attempt_budget; ++att) {
            auto r = gr.draw_tree(rng, n);
            if (!r.aborted && r.expanded == n) return std::move(r.tree);
        }
        throw BudgetError("exact-size rejection attempts exhausted");
    }

    // i.i.d. G-objects with the first passage of sum(xi - 1) to -1 as the
    // stopping rule; accept when the expanded mass is exactly n. The stopped
    // sequence is a valid rotation by construction (asserted), and the glue
    // rebuilds the tree depth-first.
    SymEnrichedTree sample_rotation(int n, RngStream& rng) const {
        TreeGrower gr(*s_);
        for (long long att = 0; att < s_->limits().attempt_budget; ++att) {
            std::vector<GObject> gs;
            long long walk = 0, mass = 0;
            bool ok = false;
            while (true) {
                GObject g = gr.draw_G(rng);
                walk += g.xi() - 1;
                mass += g.content_size();
                gs.push_back(std::move(g));
                if (mass > n) break;
                if (walk == -1) {
                    ok = (mass == n);
                    break;
                }
            }
            if (!ok) continue;
            if (!valid_rotation(gs, 0))
                throw std::logic_error("first-passage sequence fails its own rotation test");
            GlueResult res = from_g_sequence(gs);
            if (!res.ok) throw std::logic_error("first-passage sequence failed to glue");
            return std::move(res.tree);
        }
        throw BudgetError("exact-size rotation attempts exhausted");
    }
};

// ---------------------------------------------------------------------------
// Pointed sampler and limit objects.
// ---------------------------------------------------------------------------

struct PointedTree {
    SymEnrichedTree tree;
    std::vector<int> spine; // node ids, spine[0] = root, back() = marked outer root
};

// Spine of ell fixpoint steps built from fixpoint-biased blueprints (the
// derived-species law), everything off-spine grown as plain subcritical /
// critical Boltzmann content. grow_off_spine=false keeps only the spine and
// its blueprint skeleton (structure-only uses such as spine-distance
// statistics); the marked outer root is the deep end of the spine.
inline PointedTree gamma_S_pointed(const ModelSampler& s, int ell, RngStream& rng,
                                   bool grow_off_spine = true) {
    TreeGrower gr(s);
    PointedTree out;
    int root = out.tree.add_node();
    out.tree.root = root;
    out.spine.push_back(root);
    std::vector<detail::GrowItem> pending;
    int cur = root;
    for (int step = 0; step < ell; ++step) {
        detail::BlueprintDraw bp = s.draw_blueprint(1, 1, detail::BpBias::XI, rng);
        std::vector<detail::GrowItem> local;
        int mg = gr.install_orbits(out.tree, cur, bp, 1, 1, 1, local, /*open_fixpoints=*/false);
        int next = out.tree.add_node();
        for (auto& item : local) {
            if (item.node == cur && item.group == mg)
                out.tree.nodes[std::size_t(cur)].groups[std::size_t(mg)].child = next;
            else
                pending.push_back(item);
        }
        out.spine.push_back(next);
        cur = next;
    }
    // the outer root's own structure is an ordinary draw
    {
        std::vector<detail::GrowItem> local;
        gr.expand_node(out.tree, cur, 1, 1, 1, detail::BpBias::PLAIN, rng, local);
        for (auto& item : local) pending.push_back(item);
    }
    if (grow_off_spine) {
        gr.grow_pending(out.tree, pending, rng);
    } else {
        for (auto& item : pending) {
            int v = out.tree.add_node(); // bare placeholder
            out.tree.nodes[std::size_t(item.node)].groups[std::size_t(item.group)].child = v;
        }
    }
    return out;
}

enum class LimitKind { T_INF, H_HAT };

// A limit object trimmed at fixpoint height k: fixpoint vertices of height
// < k carry blueprints (the spine's are fixpoint-biased), height-k vertices
// are bare, and non-fixpoint fringe content is grown in full at every kept
// level. For H_HAT the spine runs backward: the window root is the k-th
// ancestor, the height-k spine end carries the (1+|F|)-biased object and the
// marked atom u*.
struct TrimmedEnrichedTree {
    SymEnrichedTree tree;
    std::vector<int> fix_level; // per node: fixpoint height; -1 inside fringe content
    std::vector<int> spine;     // node ids from the window root downward
    int u_star = -1;            // H_HAT only

    long long level_count(int k) const {
        long long c = 0;
        for (int lv : fix_level)
            if (lv == k) ++c;
        return c;
    }
};

inline TrimmedEnrichedTree sample_limit_trimmed(const ModelSampler& s, int k, LimitKind which,
                                                RngStream& rng) {
    TreeGrower gr(s);
    TrimmedEnrichedTree out;
    int root = out.tree.add_node();
    out.tree.root = root;
    out.fix_level.push_back(0);
    out.spine.push_back(root);

    struct FixItem {
        int node;
        int level;
        bool on_spine;
    };
    std::vector<FixItem> queue{{root, 0, true}};
    std::vector<detail::GrowItem> fringe;

    auto note_node = [&](int level) {
        while (int(out.fix_level.size()) < int(out.tree.nodes.size()))
            out.fix_level.push_back(level);
    };

    while (!queue.empty()) {
        FixItem it = queue.back();
        queue.pop_back();
        if (it.level >= k) {
            if (which == LimitKind::H_HAT && it.on_spine) {
                // the height-k spine end: (1 + |F|)-biased content, u* inside
                BarG bar = draw_G_bar(s, rng);
                int local_u = bar.u_star;
                int base = int(out.tree.nodes.size());
                int r = append_subtree(out.tree, bar.g.shape);
                // transplant: r's groups become it.node's groups (r is bare)
                out.tree.nodes[std::size_t(it.node)].groups =
                    std::move(out.tree.nodes[std::size_t(r)].groups);
                note_node(-1);
                // open fixpoint slots become bare height-(k+1) children
                for (auto& g : out.tree.nodes[std::size_t(it.node)].groups)
                    if (g.child < 0) {
                        int v = out.tree.add_node();
                        out.fix_level.push_back(k + 1);
                        g.child = v;
                    }
                out.u_star = local_u == bar.g.shape.root ? it.node : base + local_u;
                // (append_subtree put shape node j at base + j; the root slot
                // was transplanted onto it.node)
            }
            continue; // bare trim boundary
        }
        detail::BpBias bias = it.on_spine ? detail::BpBias::XI : detail::BpBias::PLAIN;
        detail::BlueprintDraw bp = s.draw_blueprint(1, 1, bias, rng);
        std::vector<detail::GrowItem> local;
        int mg = gr.install_orbits(out.tree, it.node, bp, 1, 1, 1, local,
                                   /*open_fixpoints=*/false);
        for (auto& item : local) {
            const SymGroup& g =
                out.tree.nodes[std::size_t(item.node)].groups[std::size_t(item.group)];
            if (g.len() == 1) {
                int v = out.tree.add_node();
                out.fix_level.push_back(it.level + 1);
                out.tree.nodes[std::size_t(item.node)].groups[std::size_t(item.group)].child = v;
                bool spine_child = it.on_spine && item.group == mg;
                if (spine_child) out.spine.push_back(v);
                queue.push_back({v, it.level + 1, spine_child});
            } else {
                fringe.push_back(item);
            }
        }
    }
    // fringe content is ordinary (subcritical) Boltzmann growth
    {
        long long nodes = 0;
        std::vector<detail::GrowItem>& stack = fringe;
        while (!stack.empty()) {
            auto item = stack.back();
            stack.pop_back();
            if (++nodes > s.limits().node_budget)
                throw BudgetError("tree draw exceeded the node budget");
            int v = out.tree.add_node();
            out.fix_level.push_back(-1);
            out.tree.nodes[std::size_t(item.node)].groups[std::size_t(item.group)].child = v;
            gr.expand_node(out.tree, v, item.e, item.m, item.mult, detail::BpBias::PLAIN, rng,
                           stack);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Census codes for trimmed structures.
// ---------------------------------------------------------------------------

namespace detail {

// canonical decorated code: fixpoint levels advance toward the trim depth k,
// fringe content (level -1) is coded in full
inline std::string trim_code_at(const SymEnrichedTree& t, int v, int level, int k, bool ordered) {
    if (level >= 0 && level >= k) return "#";
    std::vector<std::string> parts;
    std::map<int, std::vector<const SymGroup*>> blocks;
    for (const auto& g : t.nodes[std::size_t(v)].groups) {
        if (g.block_id >= 0) {
            blocks[g.block_id].push_back(&g);
            continue;
        }
        int child_level = level >= 0 && g.len() == 1 ? level + 1 : -1;
        std::string c = g.child >= 0 ? trim_code_at(t, g.child, child_level, k, ordered) : "_";
        parts.push_back("[" + std::to_string(g.outer_len) + "x" + std::to_string(g.inner_len) +
                        (g.slot ? "s" + std::to_string(g.slot) : "") + "|" + c + "]");
    }
    for (auto& [bid, parts_b] : blocks) {
        std::string tok = "{B" + std::to_string(parts_b.front()->entry) + "o" +
                          std::to_string(parts_b.front()->outer_len);
        for (const SymGroup* g : parts_b) {
            int child_level = level >= 0 && g->len() == 1 ? level + 1 : -1;
            std::string c = g->child >= 0 ? trim_code_at(t, g->child, child_level, k, ordered) : "_";
            tok += ":" + std::to_string(g->inner_len) + "|" + c;
        }
        tok += "}";
        parts.push_back(std::move(tok));
    }
    if (!ordered) std::sort(parts.begin(), parts.end());
    std::string out = "(";
    for (auto& p : parts) out += p;
    out += ")";
    return out;
}

} // namespace detail

// code of the enriched structure trimmed at fixpoint height k from the root
inline std::string trimmed_code(const SymEnrichedTree& t, int k, bool ordered = false) {
    if (t.nodes.empty()) return "";
    return detail::trim_code_at(t, t.root, 0, k, ordered);
}

inline std::string trimmed_code(const TrimmedEnrichedTree& t, int k, bool ordered = false) {
    return trimmed_code(t.tree, k, ordered);
}

// ---------------------------------------------------------------------------
// Gibbs partitions: SET of model components conditioned on total size n.
// ---------------------------------------------------------------------------

struct GibbsDraw {
    // components fully sampled; identical cycle copies are materialized as
    // repeated entries
    std::vector<SymEnrichedTree> components;
    std::vector<int> sizes;
};

inline GibbsDraw gibbs_sample(const ExactSizeSampler& xs, int n, RngStream& rng) {
    if (n < 1) throw std::domain_error("gibbs: n must be >= 1");
    if (!xs.sampler().flat()) throw std::domain_error("gibbs: requires 0/1 weights");
    const auto& tb = xs.tables(n);
    if (tb.forest_coeff(n) <= 0.0)
        throw LatticeError("gibbs: no composite of size " + std::to_string(n));
    GibbsDraw out;
    for (const auto& cl : tb.sample_forest_clusters(n, rng)) {
        SymEnrichedTree rep = tb.sample(cl.size, rng);
        for (int c = 0; c < cl.cycle_len; ++c) {
            out.components.push_back(rep);
            out.sizes.push_back(cl.size);
        }
    }
    return out;
}

struct RemainderReport {
    std::vector<int> sizes; // component sizes after deleting one largest
    int largest = 0;
    long long total = 0;
};

// delete a uniformly chosen largest component; the remainder keeps the rest
inline RemainderReport extract_remainder(const GibbsDraw& d, RngStream& rng) {
    RemainderReport rep;
    if (d.sizes.empty()) return rep;
    int mx = *std::max_element(d.sizes.begin(), d.sizes.end());
    std::vector<std::size_t> at;
    for (std::size_t i = 0; i < d.sizes.size(); ++i)
        if (d.sizes[i] == mx) at.push_back(i);
    std::size_t drop = at[rng.next_below(at.size())];
    rep.largest = mx;
    for (std::size_t i = 0; i < d.sizes.size(); ++i) {
        if (i == drop) continue;
        rep.sizes.push_back(d.sizes[i]);
        rep.total += d.sizes[i];
    }
    return rep;
}

} // namespace enr
