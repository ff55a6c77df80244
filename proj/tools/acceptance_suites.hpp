#pragma once

// The verification suite: twelve end-to-end checks tying the analytic layer,
// the samplers, and the decoders to independent ground truth (brute-force
// enumeration, closed-form constants, and distributional laws). Each check
// prints one pass/fail line; tolerances are pinned here and nowhere else.
// Shared by the test binary and the `verify` CLI subcommand.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <enrtrees/metrics.hpp>
#include <enrtrees/models.hpp>
#include <enrtrees/oracle.hpp>
#include <enrtrees/samplers.hpp>
#include <enrtrees/solver.hpp>
#include <enrtrees/stats.hpp>

namespace enr::accept {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

namespace detail {

inline std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

inline double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

inline const ModelSpec& shared_spec(const std::string& name) {
    static std::map<std::string, ModelSpec> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, builtin_model(name)).first;
    return it->second;
}

inline const std::shared_ptr<const ModelSampler>& shared_model(const std::string& name) {
    static std::map<std::string, std::shared_ptr<const ModelSampler>> cache;
    auto it = cache.find(name);
    if (it == cache.end())
        it = cache
                 .emplace(name, std::make_shared<const ModelSampler>(
                                    shared_spec(name).species, 128))
                 .first;
    return it->second;
}

inline const ExactSizeSampler& shared_exact(const std::string& name) {
    static std::map<std::string, std::unique_ptr<ExactSizeSampler>> cache;
    auto it = cache.find(name);
    if (it == cache.end())
        it = cache.emplace(name, std::make_unique<ExactSizeSampler>(shared_model(name)))
                 .first;
    return *it->second;
}

inline std::map<std::string, double> class_probabilities(const oracle::CodeWeights& cw) {
    double total = oracle::total_weight(cw).to_double();
    std::map<std::string, double> probs;
    for (const auto& [code, w] : cw) probs[code] = w.to_double() / total;
    return probs;
}

inline double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

} // namespace detail

// 1. Every built-in model's solved series coefficients equal the brute-force
//    enumeration totals exactly, in rational arithmetic.
inline CriterionResult criterion_series_vs_enumeration(std::uint64_t) {
    CriterionResult r{1, "series-vs-enumeration"};
    double t0 = detail::now_seconds();
    bool ok = true;
    int checked = 0;
    auto compare = [&](const SpeciesDescriptor& sp, int cap,
                       const std::vector<oracle::CodeWeights>& per) {
        auto fam = solve_enriched_fixed_point<Rational>(sp, cap);
        for (int n = 1; n <= cap; ++n) {
            ok = ok && fam.unlabelled()[std::size_t(n)] == oracle::total_weight(per[std::size_t(n)]);
            ++checked;
        }
    };
    compare(detail::shared_spec("polya").species, 12,
            oracle::polya_trees_up_to(12, [](int) { return Rational(1); }, 12));
    compare(detail::shared_spec("binary").species, 12,
            oracle::polya_trees_up_to(
                12, [](int d) { return Rational(d == 0 || d == 2 ? 1 : 0); }, 12));
    compare(detail::shared_spec("seq").species, 12,
            oracle::plane_trees_up_to(12, [](int) { return true; }));
    compare(detail::shared_spec("cacti3").species, 7, oracle::cacti_trees_up_to(7, 3));
    compare(detail::shared_spec("ktree2").species, 6, oracle::ktree_objects_up_to(2, 6));
    compare(detail::shared_spec("ktree3").species, 6, oracle::ktree_objects_up_to(3, 6));
    double el = detail::now_seconds() - t0;
    r.pass = ok && el < 60.0;
    r.detail = std::to_string(checked) + " coefficients exact" + (ok ? "" : " (MISMATCH)") +
               ", " + detail::fmt(el, 3) + "s of 60s budget";
    return r;
}

// 2. The critical point solves the offspring-mean equation to 1e-6 for every
//    built-in; the unit-multiset model additionally has series value 1 there.
inline CriterionResult criterion_criticality(std::uint64_t) {
    CriterionResult r{2, "criticality"};
    double worst_eu = 0.0;
    bool ok = true;
    for (const auto& name : builtin_model_names()) {
        const auto& rep = detail::shared_model(name)->analysis().report;
        worst_eu = std::max(worst_eu, std::abs(rep.Exi - 1.0));
        ok = ok && std::abs(rep.Exi - 1.0) <= 1e-6;
    }
    double polya_gap = std::abs(detail::shared_model("polya")->analysis().report.A_rho - 1.0);
    ok = ok && polya_gap <= 1e-4;
    r.pass = ok;
    r.detail = "max |E_u - 1| = " + detail::fmt(worst_eu, 3) +
               " (<= 1e-6), unit-multiset |A(rho) - 1| = " + detail::fmt(polya_gap, 3) +
               " (<= 1e-4)";
    return r;
}

// 3. Exact-size samples follow the enumerated class law (chi-square GOF,
//    p >= 0.001) for both the rejection and the rotation method.
inline CriterionResult criterion_exact_size_gof(std::uint64_t seed) {
    CriterionResult r{3, "exact-size-gof"};
    double t0 = detail::now_seconds();
    const long long samples = 100000;
    double min_p = 1.0;
    std::string worst;
    int stream = 300;
    struct Setup {
        std::string name;
        int n;
        std::map<std::string, double> probs;
    };
    std::vector<Setup> setups;
    setups.push_back({"polya", 7,
                      detail::class_probabilities(oracle::polya_trees_up_to(
                          7, [](int) { return Rational(1); }, 7)[7])});
    setups.push_back(
        {"cacti3", 5, detail::class_probabilities(oracle::cacti_trees_up_to(5, 3)[5])});
    for (const auto& [name, n, probs] : setups) {
        const auto& m = detail::shared_spec(name);
        const auto& ex = detail::shared_exact(name);
        for (auto method : {ExactSizeMethod::REJECT, ExactSizeMethod::ROTATION}) {
            RngStream rng(seed, stream++);
            Census c;
            for (long long i = 0; i < samples; ++i)
                c.add(structure_code(m, ex.sample(n, method, rng)));
            double p = chi_square_gof(c, probs).pvalue;
            if (p < min_p) {
                min_p = p;
                worst = name + "/" +
                        (method == ExactSizeMethod::REJECT ? "reject" : "rotation");
            }
        }
    }
    double el = detail::now_seconds() - t0;
    r.pass = min_p >= 0.001 && el < 300.0;
    r.detail = "min GOF p = " + detail::fmt(min_p, 3) + " (" + worst +
               ", >= 0.001), 4 runs x 1e5 samples, " + detail::fmt(el, 3) + "s of 300s budget";
    return r;
}

// 4. The root object's offspring count averages 1 and its extra-atom count
//    matches the analytic probability generating function at 1/2.
inline CriterionResult criterion_root_coupling(std::uint64_t seed) {
    CriterionResult r{4, "root-coupling"};
    const auto& ms = detail::shared_model("polya");
    RngStream rng(seed, 400);
    const long long N = 1000000;
    double sx = 0.0, sp = 0.0, spp = 0.0;
    for (long long i = 0; i < N; ++i) {
        GObject g = draw_G(*ms, rng);
        sx += double(g.xi());
        double v = std::pow(0.5, double(g.content_size() - 1));
        sp += v;
        spp += v * v;
    }
    double mean_xi = sx / double(N);
    double mean_pgf = sp / double(N);
    double sd = std::sqrt(std::max(0.0, spp / double(N) - mean_pgf * mean_pgf));
    double se = sd / std::sqrt(double(N));
    const auto& rep = ms->analysis().report;
    double target = zeta_pgf(ms->species(), ms->analysis().family, rep.rho, rep.A_rho, 0.5,
                             rep.cap);
    bool ok = mean_xi >= 0.99 && mean_xi <= 1.01 &&
              std::abs(mean_pgf - target) <= 3.0 * se;
    r.pass = ok;
    r.detail = "mean offspring = " + detail::fmt(mean_xi, 5) +
               " (in [0.99, 1.01]), pgf(1/2) gap = " + detail::fmt(mean_pgf - target, 3) +
               " vs 3*SE = " + detail::fmt(3.0 * se, 3);
    return r;
}

// 5. The fixpoint count at n = 2048 concentrates at the predicted fraction
//    with vanishing skewness (central-limit shape).
inline CriterionResult criterion_fixpoint_clt(std::uint64_t seed) {
    CriterionResult r{5, "fixpoint-clt"};
    const int n = 2048;
    const long long S = 10000;
    const auto& ex = detail::shared_exact("polya");
    ex.ensure_capacity(4096);
    RngStream rng(seed, 500);
    std::vector<double> fx;
    fx.reserve(std::size_t(S));
    for (long long i = 0; i < S; ++i)
        fx.push_back(double(to_fixpoint_tree(ex.sample(n, ExactSizeMethod::RECURSIVE, rng)).size()));
    auto mo = moments(fx);
    double mu = detail::shared_model("polya")->analysis().report.mu;
    double rel = std::abs(mo.mean / double(n) - mu) / mu;
    r.pass = rel <= 0.02 && std::abs(mo.skewness) <= 0.15;
    r.detail = "fixpoint fraction = " + detail::fmt(mo.mean / double(n), 5) + " vs " +
               detail::fmt(mu, 5) + " (rel gap " + detail::fmt(rel, 3) +
               " <= 0.02), |skewness| = " + detail::fmt(std::abs(mo.skewness), 3) +
               " <= 0.15";
    return r;
}

// 6. Radius-2 window censuses of the size-conditioned tree approach the
//    infinite limit object's census in total variation.
inline CriterionResult criterion_local_limit(std::uint64_t seed) {
    CriterionResult r{6, "local-limit"};
    const long long S = 100000;
    const auto& ms = detail::shared_model("polya");
    const auto& ex = detail::shared_exact("polya");
    ex.ensure_capacity(4096);
    Census cinf;
    {
        RngStream rng(seed, 600);
        for (long long i = 0; i < S; ++i)
            cinf.add(trimmed_code(sample_limit_trimmed(*ms, 2, LimitKind::T_INF, rng), 2));
    }
    std::vector<int> sizes{128, 512, 2048};
    std::vector<double> tvs;
    double se_last = 0.0;
    int stream = 601;
    for (int n : sizes) {
        RngStream rng(seed, stream++);
        Census cn;
        for (long long i = 0; i < S; ++i)
            cn.add(trimmed_code(ex.sample(n, ExactSizeMethod::RECURSIVE, rng), 2));
        tvs.push_back(tv_distance(cn, cinf));
        se_last = tv_standard_error(cn, cinf);
    }
    bool decreasing = tvs[0] > tvs[1] && tvs[1] > tvs[2];
    bool small = tvs[2] - 2.0 * se_last < 0.05;
    r.pass = decreasing && small;
    r.detail = "TV(n vs limit) = " + detail::fmt(tvs[0], 4) + " / " + detail::fmt(tvs[1], 4) +
               " / " + detail::fmt(tvs[2], 4) + " at n = 128/512/2048 (decreasing), " +
               detail::fmt(tvs[2], 4) + " - 2*SE < 0.05";
    return r;
}

// 7. Level populations of the trimmed limit object grow linearly with the
//    size-biased offspring mean.
inline CriterionResult criterion_limit_levels(std::uint64_t seed) {
    CriterionResult r{7, "limit-levels"};
    const long long S = 100000;
    const auto& ms = detail::shared_model("polya");
    double vxi = ms->analysis().report.Vxi;
    bool ok = true;
    std::string gaps;
    int stream = 700;
    for (int k : {1, 2, 4}) {
        RngStream rng(seed, stream++);
        std::vector<double> counts;
        counts.reserve(std::size_t(S));
        for (long long i = 0; i < S; ++i)
            counts.push_back(
                double(sample_limit_trimmed(*ms, k, LimitKind::T_INF, rng).level_count(k)));
        auto mo = moments(counts);
        double target = double(k) * vxi + 1.0;
        ok = ok && std::abs(mo.mean - target) <= 3.0 * mo.se;
        gaps += (gaps.empty() ? "" : ", ") + std::string("k=") + std::to_string(k) + ": " +
                detail::fmt(mo.mean, 4) + " vs " + detail::fmt(target, 4);
    }
    r.pass = ok;
    r.detail = "level means within 3*SE of k*(sizebiased mean - 1) + 1 (" + gaps + ")";
    return r;
}

// 8. Distances scale diffusively: the rescaled diameter stabilizes between
//    n = 1024 and n = 4096, the diameter/height ratio approaches 4/3, the
//    rescaled tail is log-linear with negative slope, and random exponential
//    edge lengths stabilize the same way.
inline CriterionResult criterion_diameter_scaling(std::uint64_t seed) {
    CriterionResult r{8, "diameter-scaling"};
    double t0 = detail::now_seconds();
    const long long S = 10000;
    bool ok = true;
    std::string parts;
    int stream = 800;
    for (const std::string name : {"polya", "cacti3"}) {
        const auto& m = detail::shared_spec(name);
        const auto& ex = detail::shared_exact(name);
        ex.ensure_capacity(4096);
        const BlockCatalog* cat =
            m.species.kind == SpeciesKind::SET_DERIVED_BLOCKS ? &m.species.catalog : nullptr;
        std::map<int, std::vector<double>> diam, height, fpp;
        for (int n : {1024, 4096}) {
            RngStream rng(seed, stream++);
            for (long long i = 0; i < S; ++i) {
                auto t = ex.sample(n, ExactSizeMethod::RECURSIVE, rng);
                auto mt = materialize(t, cat);
                auto unit = diameter_height(build_patched_space(mt, EdgeLaw::DET1, rng));
                diam[n].push_back(unit.diameter);
                height[n].push_back(unit.height);
                fpp[n].push_back(
                    diameter_height(build_patched_space(mt, EdgeLaw::EXP1, rng)).diameter);
            }
        }
        auto rescaled_mean = [](const std::vector<double>& xs, int n) {
            return moments(xs).mean / std::sqrt(double(n));
        };
        double r1 = rescaled_mean(diam[1024], 1024), r2 = rescaled_mean(diam[4096], 4096);
        double f1 = rescaled_mean(fpp[1024], 1024), f2 = rescaled_mean(fpp[4096], 4096);
        double ratio = moments(diam[4096]).mean / moments(height[4096]).mean;
        std::vector<double> tail;
        tail.reserve(diam[4096].size());
        for (double d : diam[4096]) tail.push_back(d * d / 4096.0);
        double slope = tail_log_slope(tail);
        bool stable = std::abs(r2 - r1) < 0.05 * r1;
        bool fpp_stable = std::abs(f2 - f1) < 0.05 * f1;
        bool ratio_ok = std::abs(ratio - 4.0 / 3.0) <= 0.05 * (4.0 / 3.0);
        ok = ok && stable && fpp_stable && ratio_ok && slope < 0.0;
        parts += (parts.empty() ? "" : "; ") + name + ": E[D]/sqrt(n) " + detail::fmt(r1, 4) +
                 " -> " + detail::fmt(r2, 4) + ", D/H = " + detail::fmt(ratio, 4) +
                 ", tail slope " + detail::fmt(slope, 3) + ", fpp " + detail::fmt(f1, 4) +
                 " -> " + detail::fmt(f2, 4);
    }
    double el = detail::now_seconds() - t0;
    r.pass = ok && el < 1200.0;
    r.detail = parts + ", " + detail::fmt(el, 3) + "s of 1200s budget";
    return r;
}

// 9. The front-distance chain: simulated growth rate and occupancy match the
//    closed forms, and the stationary vector is exact for every k <= 16.
inline CriterionResult criterion_ktree_chain(std::uint64_t seed) {
    CriterionResult r{9, "ktree-chain"};
    bool ok = true;
    std::string parts;
    int stream = 900;
    for (int k : {2, 3, 4}) {
        RngStream rng(seed, stream++);
        auto rep = ktree_chain(k, 100000, rng);
        double rate = double(rep.d_prime - 1) / double(rep.steps);
        double h = 0.0;
        for (int i = 1; i <= k; ++i) h += 1.0 / double(i);
        double tv = 0.0;
        for (int i = 1; i <= k; ++i)
            tv += std::abs(rep.occupancy[std::size_t(i - 1)] - 1.0 / (double(i) * h));
        tv *= 0.5;
        ok = ok && std::abs(rate - rep.b_k) <= 1e-2 && tv <= 1e-2;
        parts += (parts.empty() ? "" : ", ") + std::string("k=") + std::to_string(k) +
                 ": rate gap " + detail::fmt(std::abs(rate - rep.b_k), 2) + ", occ TV " +
                 detail::fmt(tv, 2);
    }
    double worst_pi = 0.0;
    for (int k = 1; k <= 16; ++k) {
        auto P = ktree_chain_matrix(k);
        double h = 0.0;
        for (int i = 1; i <= k; ++i) h += 1.0 / double(i);
        std::vector<double> pi(std::size_t(k), 0.0);
        for (int i = 1; i <= k; ++i) pi[std::size_t(i - 1)] = 1.0 / (double(i) * h);
        for (int j = 0; j < k; ++j) {
            double s = 0.0;
            for (int i = 0; i < k; ++i) s += pi[std::size_t(i)] * P[std::size_t(i)][std::size_t(j)];
            worst_pi = std::max(worst_pi, std::abs(s - pi[std::size_t(j)]));
        }
    }
    ok = ok && worst_pi <= 1e-12;
    r.pass = ok;
    r.detail = parts + "; stationarity residual " + detail::fmt(worst_pi, 2) + " <= 1e-12";
    return r;
}

// 10. Composite structures show the giant-component effect: the remainder
//     after deleting the largest component has a stable size law.
inline CriterionResult criterion_gibbs_remainder(std::uint64_t seed) {
    CriterionResult r{10, "gibbs-remainder"};
    const long long S = 100000;
    const auto& ex = detail::shared_exact("ktree2");
    ex.ensure_capacity(256);
    std::map<int, Census> cens;
    std::map<int, double> med;
    int stream = 1000;
    for (int n : {256, 128, 64}) {
        RngStream rng(seed, stream++);
        std::vector<double> rems;
        rems.reserve(std::size_t(S));
        for (long long i = 0; i < S; ++i) {
            auto d = gibbs_sample(ex, n, rng);
            auto rr = extract_remainder(d, rng);
            cens[n].add(std::to_string(rr.total));
            rems.push_back(double(rr.total));
        }
        med[n] = detail::median(std::move(rems));
    }
    double tv = tv_distance(cens[64], cens[128]);
    double se = tv_standard_error(cens[64], cens[128]);
    bool ok = (tv - se) < 0.05 && med[64] >= med[128] && med[128] >= med[256];
    r.pass = ok;
    r.detail = "remainder TV(64 vs 128) = " + detail::fmt(tv, 4) + " - SE < 0.05, medians " +
               detail::fmt(med[64], 3) + " / " + detail::fmt(med[128], 3) + " / " +
               detail::fmt(med[256], 3) + " non-increasing";
    return r;
}

// 11. Rotation counting: a sequence of entries >= -1 summing to -r has
//     exactly r valid cyclic shifts.
inline CriterionResult criterion_cycle_lemma(std::uint64_t seed) {
    CriterionResult r{11, "cycle-lemma"};
    RngStream rng(seed, 1100);
    long long bad = 0;
    for (int rep = 0; rep < 10000; ++rep) {
        int L = 2 + int(rng.next_below(29));
        int want = 1 + int(rng.next_below(std::size_t(std::min(5, L))));
        std::vector<int> xi(std::size_t(L), 0);
        for (int j = 0; j < L - want; ++j) xi[rng.next_below(std::size_t(L))] += 1;
        int got = 0;
        for (int s = 0; s < L; ++s)
            if (valid_rotation(xi, std::size_t(s))) ++got;
        if (got != want) ++bad;
    }
    r.pass = bad == 0;
    r.detail = std::to_string(bad) + " of 10000 sequences had a wrong rotation count";
    return r;
}

// 12. Decoders emit valid objects: coding trees decode to graphs passing the
//     simplicial-elimination check with one new vertex per unit of size, and
//     block trees decode to graphs whose blocks are single edges or triangles.
inline CriterionResult criterion_decode_audit(std::uint64_t seed) {
    CriterionResult r{12, "decode-audit"};
    long long bad = 0;
    int stream = 1200;
    for (int k : {2, 3}) {
        const auto& ex = detail::shared_exact(k == 2 ? "ktree2" : "ktree3");
        RngStream rng(seed, stream++);
        for (int i = 0; i < 10000; ++i) {
            int n = 1 + i % 24;
            auto t = ex.sample(n, ExactSizeMethod::RECURSIVE, rng);
            DecodedKTree d = decode_ktree(t, k);
            if (!is_k_tree(d.graph, k) || d.graph.size() != k + n) ++bad;
        }
    }
    {
        const auto& m = detail::shared_spec("cacti3");
        const auto& ex = detail::shared_exact("cacti3");
        RngStream rng(seed, stream++);
        for (int i = 0; i < 10000; ++i) {
            int n = 2 + i % 30;
            auto t = ex.sample(n, ExactSizeMethod::RECURSIVE, rng);
            Graph g = decode_block_graph(t, m.species.catalog);
            bool good = g.size() == n && g.connected();
            if (good)
                for (const auto& comp : biconnected_components(g)) {
                    std::set<int> verts;
                    for (auto [u, v] : comp) {
                        verts.insert(u);
                        verts.insert(v);
                    }
                    bool edge_block = comp.size() == 1 && verts.size() == 2;
                    bool triangle = comp.size() == 3 && verts.size() == 3;
                    if (!edge_block && !triangle) good = false;
                }
            if (!good) ++bad;
        }
    }
    r.pass = bad == 0;
    r.detail = std::to_string(bad) + " of 30000 decoded graphs failed validity";
    return r;
}

struct Criterion {
    int id;
    const char* name;
    CriterionResult (*run)(std::uint64_t);
};

inline const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "series-vs-enumeration", criterion_series_vs_enumeration},
        {2, "criticality", criterion_criticality},
        {3, "exact-size-gof", criterion_exact_size_gof},
        {4, "root-coupling", criterion_root_coupling},
        {5, "fixpoint-clt", criterion_fixpoint_clt},
        {6, "local-limit", criterion_local_limit},
        {7, "limit-levels", criterion_limit_levels},
        {8, "diameter-scaling", criterion_diameter_scaling},
        {9, "ktree-chain", criterion_ktree_chain},
        {10, "gibbs-remainder", criterion_gibbs_remainder},
        {11, "cycle-lemma", criterion_cycle_lemma},
        {12, "decode-audit", criterion_decode_audit},
    };
    return all;
}

inline CriterionResult run_criterion(const Criterion& c, std::uint64_t seed) {
    double t0 = detail::now_seconds();
    CriterionResult res = c.run(seed);
    res.seconds = detail::now_seconds() - t0;
    return res;
}

// Runs the selected criteria (all when ids is empty), printing one line per
// criterion. Returns true when every selected criterion passed.
inline bool run_and_print(const std::vector<int>& ids, std::uint64_t seed, std::ostream& os) {
    bool all_pass = true;
    for (const auto& c : criteria()) {
        if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
        CriterionResult res = run_criterion(c, seed);
        os << (res.pass ? "[PASS]" : "[FAIL]") << " criterion " << res.id << " (" << res.name
           << "): " << res.detail << " [" << detail::fmt(res.seconds, 3) << "s]" << std::endl;
        all_pass = all_pass && res.pass;
    }
    return all_pass;
}

} // namespace enr::accept
