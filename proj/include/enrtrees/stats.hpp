#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace enr {

// ---------------------------------------------------------------------------
// Empirical censuses over string-coded classes.
// ---------------------------------------------------------------------------
struct Census {
    std::map<std::string, long long> counts;
    long long total = 0;

    void add(const std::string& code, long long c = 1) {
        counts[code] += c;
        total += c;
    }
};

// total-variation distance between two empirical distributions
inline double tv_distance(const Census& a, const Census& b) {
    if (a.total == 0 || b.total == 0) throw std::domain_error("tv: empty census");
    double tv = 0.0;
    auto ia = a.counts.begin();
    auto ib = b.counts.begin();
    while (ia != a.counts.end() || ib != b.counts.end()) {
        double pa = 0.0, pb = 0.0;
        if (ib == b.counts.end() || (ia != a.counts.end() && ia->first < ib->first)) {
            pa = double(ia->second) / double(a.total);
            ++ia;
        } else if (ia == a.counts.end() || ib->first < ia->first) {
            pb = double(ib->second) / double(b.total);
            ++ib;
        } else {
            pa = double(ia->second) / double(a.total);
            pb = double(ib->second) / double(b.total);
            ++ia;
            ++ib;
        }
        tv += std::abs(pa - pb);
    }
    return 0.5 * tv;
}

// sampling-noise scale for an empirical TV estimate: sqrt(sum min(p,q)) / sqrt(N)
// with N the smaller sample count
inline double tv_standard_error(const Census& a, const Census& b) {
    if (a.total == 0 || b.total == 0) throw std::domain_error("tv: empty census");
    double overlap = 0.0;
    for (const auto& [code, ca] : a.counts) {
        auto it = b.counts.find(code);
        if (it == b.counts.end()) continue;
        overlap += std::min(double(ca) / double(a.total), double(it->second) / double(b.total));
    }
    double n = double(std::min(a.total, b.total));
    return std::sqrt(std::max(overlap, 1e-12)) / std::sqrt(n);
}

// ---------------------------------------------------------------------------
// Regularized incomplete gamma (for chi-square tail probabilities).
// ---------------------------------------------------------------------------
namespace detail {

inline double gamma_p_series(double a, double x) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace detail

// upper regularized incomplete gamma Q(a, x) = P(Gamma(a) > x)
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_contfrac(a, x);
}

inline double chi_square_pvalue(double stat, long long df) {
    if (df <= 0) return 1.0;
    return gamma_q(double(df) / 2.0, stat / 2.0);
}

struct GofReport {
    double stat = 0.0;
    long long df = 0;
    double pvalue = 1.0;
    long long n = 0;
    std::string impossible_class; // nonempty if a zero-probability class was observed
};

// Pearson chi-square of observed counts against exact class probabilities.
// Classes with zero probability that are nevertheless observed force a zero
// p-value (the strongest possible rejection).
inline GofReport chi_square_gof(const Census& obs, const std::map<std::string, double>& prob) {
    GofReport rep;
    rep.n = obs.total;
    if (obs.total == 0) throw std::domain_error("gof: empty census");
    double psum = 0.0;
    for (const auto& [code, p] : prob) psum += p;
    if (std::abs(psum - 1.0) > 1e-9)
        throw std::domain_error("gof: class probabilities sum to " + std::to_string(psum));
    for (const auto& [code, c] : obs.counts) {
        auto it = prob.find(code);
        if ((it == prob.end() || it->second <= 0.0) && c > 0) {
            rep.impossible_class = code;
            rep.pvalue = 0.0;
            return rep;
        }
    }
    long long classes = 0;
    for (const auto& [code, p] : prob) {
        if (p <= 0.0) continue;
        double expct = p * double(obs.total);
        auto it = obs.counts.find(code);
        double got = it == obs.counts.end() ? 0.0 : double(it->second);
        rep.stat += (got - expct) * (got - expct) / expct;
        ++classes;
    }
    rep.df = classes - 1;
    rep.pvalue = chi_square_pvalue(rep.stat, rep.df);
    return rep;
}

// ---------------------------------------------------------------------------
// Moment summaries.
// ---------------------------------------------------------------------------
struct MomentReport {
    long long n = 0;
    double mean = 0.0;
    double sd = 0.0;       // sample standard deviation
    double se = 0.0;       // standard error of the mean
    double skewness = 0.0; // sample skewness (g1)
};

inline MomentReport moments(const std::vector<double>& xs) {
    MomentReport r;
    r.n = (long long)xs.size();
    if (xs.empty()) return r;
    double m = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
    double m2 = 0.0, m3 = 0.0;
    for (double x : xs) {
        double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= double(xs.size());
    m3 /= double(xs.size());
    r.mean = m;
    r.sd = std::sqrt(m2 * double(xs.size()) / std::max(1.0, double(xs.size() - 1)));
    r.se = r.sd / std::sqrt(double(xs.size()));
    r.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    return r;
}

// span of an integer sample's support offsets (lattice detector): gcd of
// (x - x_min) over the sample
inline long long sample_span(const std::vector<long long>& xs) {
    if (xs.empty()) return 0;
    long long mn = *std::min_element(xs.begin(), xs.end());
    long long g = 0;
    for (long long x : xs) g = std::gcd(g, x - mn);
    return g;
}

// least-squares slope of log tail frequencies: for thresholds t_j over the
// upper quantiles, fit log(P(X > t_j)) against t_j
inline double tail_log_slope(std::vector<double> xs, double q_lo = 0.80, double q_hi = 0.99,
                             int points = 8) {
    if (xs.size() < 50) throw std::domain_error("tail slope: sample too small");
    std::sort(xs.begin(), xs.end());
    std::vector<double> ts, ys;
    for (int j = 0; j < points; ++j) {
        double q = q_lo + (q_hi - q_lo) * double(j) / double(points - 1);
        std::size_t idx = std::size_t(q * double(xs.size()));
        idx = std::min(idx, xs.size() - 1);
        double t = xs[idx];
        double tail = double(xs.size() - idx) / double(xs.size());
        if (tail <= 0.0) continue;
        ts.push_back(t);
        ys.push_back(std::log(tail));
    }
    if (ts.size() < 3) throw std::domain_error("tail slope: degenerate quantiles");
    double mx = std::accumulate(ts.begin(), ts.end(), 0.0) / double(ts.size());
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / double(ys.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        num += (ts[i] - mx) * (ys[i] - my);
        den += (ts[i] - mx) * (ts[i] - mx);
    }
    if (den <= 0.0) throw std::domain_error("tail slope: zero variance in thresholds");
    return num / den;
}

// one row of a distance-scaling study at a given size
struct ScalingRow {
    int n = 0;
    long long samples = 0;
    double mean_diameter = 0.0;
    double mean_height = 0.0;
    double d_over_sqrt = 0.0;     // E[D] / sqrt(n)
    double h_over_sqrt = 0.0;     // E[H] / sqrt(n)
    double ratio = 0.0;           // E[D] / E[H]
    double d_se = 0.0;            // SE of E[D]
    double tail_slope = 0.0;      // slope of the rescaled diameter log tail
};

inline ScalingRow scaling_row(int n, const std::vector<double>& diam,
                              const std::vector<double>& height) {
    ScalingRow row;
    row.n = n;
    row.samples = (long long)diam.size();
    MomentReport md = moments(diam), mh = moments(height);
    row.mean_diameter = md.mean;
    row.mean_height = mh.mean;
    row.d_over_sqrt = md.mean / std::sqrt(double(n));
    row.h_over_sqrt = mh.mean / std::sqrt(double(n));
    row.ratio = mh.mean > 0.0 ? md.mean / mh.mean : 0.0;
    row.d_se = md.se;
    std::vector<double> rescaled;
    rescaled.reserve(diam.size());
    for (double d : diam) rescaled.push_back(d / std::sqrt(double(n)));
    row.tail_slope = tail_log_slope(std::move(rescaled));
    return row;
}

} // namespace enr
