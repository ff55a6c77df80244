#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "series.hpp"
#include "species.hpp"

namespace enr {

template <class T> T from_rational(const Rational& r);
template <> inline double from_rational<double>(const Rational& r) { return r.to_double(); }
template <> inline Rational from_rational<Rational>(const Rational& r) { return r; }

template <class T>
inline T weight_pow(const T& w, long long e) {
    if constexpr (std::is_floating_point_v<T>) {
        return std::pow(w, double(e));
    } else {
        return w.pow(static_cast<unsigned>(e));
    }
}

// The solved family of power-weighted tree series. Member e holds the series
// whose weights kappa/gamma are raised to the e-th power; coefficient n is
// a_n^{(e)} * scale^n. For flat (0/1-weight) species every member coincides,
// so only member 1 is stored and consulted.
template <class T>
struct SeriesFamily {
    std::map<long long, TruncatedSeries<T>> members;
    T scale{1};
    bool flat = true;

    bool has_member(long long e) const { return members.count(flat ? 1 : e) > 0; }
    const TruncatedSeries<T>& member(long long e) const {
        auto it = members.find(flat ? 1 : e);
        if (it == members.end())
            throw std::out_of_range("series family: member " + std::to_string(e) + " absent");
        return it->second;
    }
    const TruncatedSeries<T>& unlabelled() const { return member(1); }
};

namespace detail {

template <class T>
class FamilyWork {
  public:
    FamilyWork(const SpeciesDescriptor& sp, int cap, T scale)
        : sp_(sp), cap1_(cap), scale_(scale), flat_(sp.flat_weights()) {
        if (cap < 1) throw std::domain_error("family solve: cap must be >= 1");
        // powers of the scale: reading a member as argument i of the fixed
        // point means reading A(s^i z^i), i.e. coefficient m picks up an
        // extra s^{m(i-1)} on top of the member's own s^m
        spow_.assign(std::size_t(cap) + 1, T(1));
        for (int i = 1; i <= cap; ++i) spow_[std::size_t(i)] = spow_[std::size_t(i - 1)] * scale_;
    }

    SeriesFamily<T> run() {
        member(1);
        SeriesFamily<T> fam;
        fam.members = std::move(done_);
        fam.scale = scale_;
        fam.flat = flat_;
        return fam;
    }

  private:
    const SpeciesDescriptor& sp_;
    int cap1_;
    T scale_;
    bool flat_;
    std::vector<T> spow_;
    std::map<long long, TruncatedSeries<T>> done_;

    int cap_of(long long e) const { return int(cap1_ / e); }

    const TruncatedSeries<T>& member(long long e) {
        if (flat_) e = 1;
        auto it = done_.find(e);
        if (it != done_.end()) return it->second;
        TruncatedSeries<T> s = solve_member(e);
        if constexpr (std::is_floating_point_v<T>) {
            for (const auto& c : s.coeffs)
                if (!std::isfinite(c))
                    throw std::overflow_error(
                        "series solve exceeded floating-point range; reduce the cap or use "
                        "0/1 weights");
        }
        return done_.emplace(e, std::move(s)).first->second;
    }

    TruncatedSeries<T> solve_member(long long e) {
        switch (sp_.kind) {
            case SpeciesKind::SET_WEIGHTED:
                return sp_.unit_weights ? solve_exp_set(e, T(1)) : solve_weighted_set(e);
            case SpeciesKind::SEQ_RESTRICTED:
                return solve_seq(e);
            case SpeciesKind::SEQK_SET:
                return solve_exp_set(e, T(sp_.k));
            case SpeciesKind::SET_DERIVED_BLOCKS:
                return solve_blocks(e);
        }
        throw std::logic_error("unreachable species kind");
    }

    // R = exp(mult * sum_i A(z^i)/i): the unrestricted multiset kinds.
    TruncatedSeries<T> solve_exp_set(long long e, T mult) {
        int cap = cap_of(e);
        TruncatedSeries<T> b(cap);
        std::vector<T> KS(std::size_t(cap), T(0)); // KS[k] = k * [z^k] of the exponent
        std::vector<T> R(std::size_t(cap), T(0));
        R[0] = T(1);
        b[1] = scale_ * R[0];
        for (int t = 1; t + 1 <= cap; ++t) {
            T ks(0);
            for (int m = 1; m <= t; ++m)
                if (t % m == 0) ks += T(m) * b[std::size_t(m)] * spow_[std::size_t(t - m)];
            KS[std::size_t(t)] = mult * ks;
            T acc(0);
            for (int k = 1; k <= t; ++k) acc += KS[std::size_t(k)] * R[std::size_t(t - k)];
            R[std::size_t(t)] = acc / T(t);
            b[std::size_t(t) + 1] = scale_ * R[std::size_t(t)];
        }
        return b;
    }

    // R = sum_d kappa_d^e Z_d with d * Z_d = sum_{j=1..d} s_j Z_{d-j},
    // s_j = member(e*j) read on the z^j lattice.
    TruncatedSeries<T> solve_weighted_set(long long e) {
        int cap = cap_of(e);
        int maxd = sp_.max_degree_support();
        std::vector<const TruncatedSeries<T>*> arg(std::size_t(maxd) + 1, nullptr);
        if (!flat_)
            for (int j = 2; j <= maxd && j <= cap; ++j) arg[std::size_t(j)] = &member(e * j);
        std::vector<T> kp(std::size_t(maxd) + 1, T(0));
        for (const auto& [d, w] : sp_.degree_weights)
            if (w != Rational(0)) kp[std::size_t(d)] = weight_pow(from_rational<T>(w), e);

        TruncatedSeries<T> b(cap);
        std::vector<std::vector<T>> Zd(std::size_t(maxd) + 1,
                                       std::vector<T>(std::size_t(cap), T(0)));
        for (int t = 0; t + 1 <= cap; ++t) {
            if (t == 0) Zd[0][0] = T(1);
            for (int d = 1; d <= maxd; ++d) {
                T acc(0);
                for (int j = 1; j <= d && j <= t; ++j) {
                    const TruncatedSeries<T>& src =
                        (j == 1 || flat_) ? b : *arg[std::size_t(j)];
                    for (int m = 1; j * m <= t; ++m) {
                        if (m > src.cap()) break;
                        acc += src[std::size_t(m)] * spow_[std::size_t(m * (j - 1))] *
                               Zd[std::size_t(d - j)][std::size_t(t - j * m)];
                    }
                }
                Zd[std::size_t(d)][std::size_t(t)] = acc / T(d);
            }
            T R(0);
            for (int d = 0; d <= maxd; ++d) R += kp[std::size_t(d)] * Zd[std::size_t(d)][std::size_t(t)];
            b[std::size_t(t) + 1] = scale_ * R;
        }
        return b;
    }

    TruncatedSeries<T> solve_seq(long long e) {
        int cap = cap_of(e);
        TruncatedSeries<T> b(cap);
        if (sp_.all_lengths) {
            std::vector<T> R(std::size_t(cap), T(0));
            for (int t = 0; t + 1 <= cap; ++t) {
                T acc = (t == 0) ? T(1) : T(0);
                for (int m = 1; m <= t; ++m) acc += b[std::size_t(m)] * R[std::size_t(t - m)];
                R[std::size_t(t)] = acc;
                b[std::size_t(t) + 1] = scale_ * R[std::size_t(t)];
            }
            return b;
        }
        int maxL = *sp_.length_set.rbegin();
        std::vector<std::vector<T>> P(std::size_t(maxL) + 1,
                                      std::vector<T>(std::size_t(cap), T(0)));
        for (int t = 0; t + 1 <= cap; ++t) {
            P[0][std::size_t(t)] = (t == 0) ? T(1) : T(0);
            for (int j = 1; j <= maxL; ++j) {
                T acc(0);
                for (int m = 1; m <= t; ++m)
                    acc += b[std::size_t(m)] * P[std::size_t(j - 1)][std::size_t(t - m)];
                P[std::size_t(j)][std::size_t(t)] = acc;
            }
            T R(0);
            for (int j : sp_.length_set)
                if (j <= maxL) R += P[std::size_t(j)][std::size_t(t)];
            b[std::size_t(t) + 1] = scale_ * R;
        }
        return b;
    }

    // [z^n] of prod over the entry's cycles c of member(e*c*l)(z^{c*l}).
    // `self` is the series currently being solved (consulted when the factor
    // refers back to the same member).
    T prod_coeff(const std::vector<int>& cycles, std::size_t idx, long long e, int l, int n,
                 const TruncatedSeries<T>& self) {
        int c = cycles[idx];
        long long step = (long long)c * l;
        bool is_self = flat_ || step == 1;
        const TruncatedSeries<T>& src = is_self ? self : member(e * step);
        if (idx + 1 == cycles.size()) {
            if (n % step != 0) return T(0);
            long long m = n / step;
            if (m < 1 || m > src.cap()) return T(0);
            return src[std::size_t(m)] * spow_[std::size_t(m * (step - 1))];
        }
        long long rest_min = 0;
        for (std::size_t j = idx + 1; j < cycles.size(); ++j) rest_min += (long long)cycles[j] * l;
        T acc(0);
        for (long long m = 1; step * m + rest_min <= n; ++m) {
            if (m > src.cap()) break;
            T cm = src[std::size_t(m)] * spow_[std::size_t(m * (step - 1))];
            if (cm == T(0)) continue;
            acc += cm * prod_coeff(cycles, idx + 1, e, l, int(n - step * m), self);
        }
        return acc;
    }

    // R = exp(T), T = sum_l (1/l) * catalog cycle index at level l with
    // gamma^{e*l} block weights; composed cycles read member(e*c*l) at z^{c*l}.
    TruncatedSeries<T> solve_blocks(long long e) {
        int cap = cap_of(e);
        TruncatedSeries<T> b(cap);
        std::vector<T> Tc(std::size_t(cap), T(0));
        std::vector<T> R(std::size_t(cap), T(0));
        for (int t = 0; t + 1 <= cap; ++t) {
            if (t >= 1) {
                T acc(0);
                for (int l = 1; l <= t; ++l) {
                    for (const auto& ent : sp_.catalog.entries) {
                        if ((long long)l * ent.size > t) continue;
                        T c = prod_coeff(ent.cycles, 0, e, l, t, b);
                        if (c == T(0)) continue;
                        T w = from_rational<T>(ent.weight);
                        if (ent.gamma != Rational(1))
                            w = w * weight_pow(from_rational<T>(ent.gamma), e * (long long)l);
                        acc += w * c / T(l);
                    }
                }
                Tc[std::size_t(t)] = acc;
            }
            if (t == 0) {
                R[0] = T(1);
            } else {
                T acc(0);
                for (int k = 1; k <= t; ++k)
                    acc += T(k) * Tc[std::size_t(k)] * R[std::size_t(t - k)];
                R[std::size_t(t)] = acc / T(t);
            }
            b[std::size_t(t) + 1] = scale_ * R[std::size_t(t)];
        }
        return b;
    }
};

} // namespace detail

// Solves the enriched-tree fixed point A = scale * z * Z_R(A, ...) order by
// order, together with every power-weighted member the equations reference.
template <class T>
SeriesFamily<T> solve_enriched_fixed_point(const SpeciesDescriptor& sp, int cap, T scale = T(1)) {
    sp.validate();
    detail::FamilyWork<T> work(sp, cap, scale);
    return work.run();
}

// ---- criticality ------------------------------------------------------------

struct CriticalityReport {
    double rho = 0;    // radius of convergence / critical argument
    double A_rho = 0;  // limit value of the unlabelled series at rho
    double Exi = 0;    // mean root offspring at criticality (should be 1)
    double Vxi = 0;    // offspring variance parameter
    double Ezeta = 0;  // mean extra atoms carried by non-trivial cycles
    double Vzeta = 0;
    double mu = 0;     // asymptotic fixpoint-fraction 1/(1+Ezeta)
    int span = 1;      // gcd of {n-1 : [z^n] A > 0}
    int i_max = 1;     // argument depth with relative mass >= 1e-12
    int cap = 0;       // series truncation used
};

struct CriticalAnalysis {
    CriticalityReport report;
    SeriesFamily<double> family; // unscaled solve at report.cap
};

namespace detail {

// Scalar evaluation of E(x, u) = x * Z_R(u, A_2(x^2), A_3(x^3), ...) with
// derivatives in u, against a solved (unscaled) double family.
class CriticalScalar {
  public:
    CriticalScalar(const SpeciesDescriptor& sp, const SeriesFamily<double>& fam, int cap)
        : sp_(sp), fam_(fam), cap_(cap) {}

    std::vector<double> tail_args(double x) const {
        int n = std::max(2, cap_ - 1);
        std::vector<double> s(std::size_t(n), 0.0);
        for (int i = 2; i <= n; ++i) {
            double xi = std::pow(x, double(i));
            double v = 0.0;
            if (fam_.flat)
                v = fam_.member(1).eval(xi);
            else if (fam_.has_member(i))
                v = fam_.member(i).eval(xi);
            s[std::size_t(i - 1)] = v;
            if (!std::isfinite(v)) break;
            if (x < 1.0 && v < 1e-18 && i >= 4) break;
        }
        return s;
    }

    CycleIndexValue E(double x, double u, std::vector<double>& s) const {
        s[0] = u;
        CycleIndexValue v = eval_cycle_index_d(sp_, s, 1);
        return {x * v.z, x * v.d1, x * v.d11};
    }

    CycleIndexValue E(double x, double u) const {
        auto s = tail_args(x);
        return E(x, u, s);
    }

    // Newton in u from 0 toward the least root of E(x,u) = u. Convexity keeps
    // the iterates left of the root; the slope passing 1 with residual mass
    // certifies divergence (x beyond the radius).
    struct ULimit {
        bool converges;
        double u;
    };
    ULimit u_limit(double x) const {
        auto s = tail_args(x);
        double u = 0.0;
        for (int it = 0; it < 300; ++it) {
            CycleIndexValue v;
            try {
                v = E(x, u, s);
            } catch (const std::domain_error&) {
                return {false, u};
            }
            if (!std::isfinite(v.z) || !std::isfinite(v.d1)) return {false, u};
            double g = v.z - u;
            if (std::abs(g) <= 1e-14 * (1.0 + std::abs(u))) return {true, u};
            if (v.d1 >= 1.0 - 1e-12) {
                if (g > 1e-12 * (1.0 + std::abs(u))) return {false, u};
                return {true, u};
            }
            u += g / (1.0 - v.d1);
        }
        return {true, u};
    }

  private:
    const SpeciesDescriptor& sp_;
    const SeriesFamily<double>& fam_;
    int cap_;
};

} // namespace detail

// Value of the cycle-content generating function
// g(t) = (rho/ustar) * Z_R(ustar, A_2((t rho)^2), A_3((t rho)^3), ...),
// the probability generating function of the extra atoms attached through
// non-trivial cycles at a critical root. g(1) = 1.
inline double zeta_pgf(const SpeciesDescriptor& sp, const SeriesFamily<double>& fam, double rho,
                       double ustar, double t, int cap) {
    detail::CriticalScalar ev(sp, fam, cap);
    auto s = ev.tail_args(t * rho);
    s[0] = ustar;
    double z = eval_cycle_index_d(sp, s, 1).z;
    return rho * z / ustar;
}

inline CriticalAnalysis analyze_criticality(const SpeciesDescriptor& sp, int cap = 128,
                                            double tol = 1e-6) {
    sp.validate();
    CriticalAnalysis out;
    out.family = solve_enriched_fixed_point<double>(sp, cap, 1.0);
    detail::CriticalScalar ev(sp, out.family, cap);

    // bracket the radius, then bisect on divergence of the u-iteration
    double lo = 1e-9, hi = 0.5;
    if (!ev.u_limit(lo).converges)
        throw std::domain_error("criticality: no convergence at tiny argument");
    while (ev.u_limit(hi).converges) {
        lo = hi;
        hi *= 1.5;
        if (hi > 1e6) throw std::domain_error("criticality: no finite radius detected");
    }
    for (int it = 0; it < 70; ++it) {
        double mid = 0.5 * (lo + hi);
        if (ev.u_limit(mid).converges)
            lo = mid;
        else
            hi = mid;
    }
    double x = lo;
    double u = ev.u_limit(lo).u;

    // polish the regular 2x2 system (E - u, E_u - 1) = 0
    for (int it = 0; it < 100; ++it) {
        CycleIndexValue v = ev.E(x, u);
        double F1 = v.z - u, F2 = v.d1 - 1.0;
        if (std::abs(F1) <= 1e-13 * (1.0 + std::abs(u)) && std::abs(F2) <= 1e-13) break;
        double h = std::max(1e-12, 1e-7 * x);
        CycleIndexValue vp = ev.E(x + h, u), vm = ev.E(x - h, u);
        double J11 = (vp.z - vm.z) / (2 * h);   // dE/dx
        double J12 = v.d1 - 1.0;                // dF1/du
        double J21 = (vp.d1 - vm.d1) / (2 * h); // dE_u/dx
        double J22 = v.d11;                     // dF2/du
        double det = J11 * J22 - J12 * J21;
        if (!std::isfinite(det) || std::abs(det) < 1e-300) break;
        double dx = (-F1 * J22 + F2 * J12) / det;
        double du = (-F2 * J11 + F1 * J21) / det;
        int guard = 0;
        while ((x + dx <= 0.0 || u + du <= 0.0) && guard++ < 60) {
            dx *= 0.5;
            du *= 0.5;
        }
        x += dx;
        u += du;
    }

    CycleIndexValue v = ev.E(x, u);
    if (std::abs(v.d1 - 1.0) > tol)
        throw std::domain_error("criticality: |E_u - 1| = " + std::to_string(std::abs(v.d1 - 1.0)) +
                                " exceeds tolerance at this truncation");

    CriticalityReport& r = out.report;
    r.cap = cap;
    r.rho = x;
    r.A_rho = u;
    r.Exi = v.d1;
    r.Vxi = v.d11 * u;

    // cycle-content moments from the pgf, fourth-order central stencils
    {
        double h = 1e-3;
        auto g = [&](double t) { return zeta_pgf(sp, out.family, x, u, t, cap); };
        double g1 = g(1.0), gp1 = g(1.0 + h), gm1 = g(1.0 - h), gp2 = g(1.0 + 2 * h),
               gm2 = g(1.0 - 2 * h);
        double d1 = (-gp2 + 8 * gp1 - 8 * gm1 + gm2) / (12 * h);
        double d2 = (-gp2 + 16 * gp1 - 30 * g1 + 16 * gm1 - gm2) / (12 * h * h);
        if (std::abs(d1) < 1e-8) d1 = 0.0;
        if (std::abs(d2) < 1e-8) d2 = 0.0;
        r.Ezeta = d1;
        r.Vzeta = d2 + d1 - d1 * d1;
        if (std::abs(r.Vzeta) < 1e-8) r.Vzeta = 0.0;
    }
    r.mu = 1.0 / (1.0 + r.Ezeta);

    // lattice span of the coefficient support
    {
        const auto& a = out.family.member(1);
        long long g = 0;
        for (int n = 1; n <= a.cap(); ++n)
            if (a[std::size_t(n)] > 0.0) g = std::gcd(g, (long long)n - 1);
        r.span = g >= 1 ? int(g) : 1;
    }

    // argument depth that still carries relative mass 1e-12
    {
        r.i_max = 2;
        for (int i = 2; i <= cap; ++i) {
            double val = 0.0;
            if (out.family.flat)
                val = out.family.member(1).eval(std::pow(x, i));
            else if (out.family.has_member(i))
                val = out.family.member(i).eval(std::pow(x, i));
            if (val >= 1e-12 * u)
                r.i_max = i;
            else
                break;
        }
    }
    return out;
}

inline CriticalityReport estimate_rho(const SpeciesDescriptor& sp, int cap = 128,
                                      double tol = 1e-6) {
    return analyze_criticality(sp, cap, tol).report;
}

} // namespace enr
