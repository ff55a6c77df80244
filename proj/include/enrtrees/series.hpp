#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rational.hpp"

namespace enr {

// Ordinary generating series truncated at a degree cap. The coefficient type
// is either Rational (exact mode, used wherever the enumeration oracle can
// check results) or double (float mode, used for large caps and sampling).
template <class T>
struct TruncatedSeries {
    std::vector<T> coeffs; // index = power of z, size = cap + 1

    TruncatedSeries() = default;
    explicit TruncatedSeries(int cap) : coeffs(std::size_t(cap) + 1, T(0)) {}

    int cap() const { return int(coeffs.size()) - 1; }
    const T& operator[](std::size_t i) const { return coeffs[i]; }
    T& operator[](std::size_t i) { return coeffs[i]; }

    // Horner evaluation at a point (meaningful inside the disc of convergence;
    // truncation tails are the caller's concern).
    T eval(T x) const {
        T acc(0);
        for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
        return acc;
    }

    // Evaluation of the term-by-term derivative.
    T eval_derivative(T x) const {
        T acc(0);
        for (std::size_t i = coeffs.size(); i-- > 1;) acc = acc * x + T((long long)i) * coeffs[i];
        return acc;
    }
};

template <class T>
inline void check_same_cap(const TruncatedSeries<T>& a, const TruncatedSeries<T>& b) {
    if (a.cap() != b.cap()) throw std::domain_error("series: degree cap mismatch");
}

template <class T>
inline TruncatedSeries<T> series_add(const TruncatedSeries<T>& a, const TruncatedSeries<T>& b) {
    check_same_cap(a, b);
    TruncatedSeries<T> r(a.cap());
    for (std::size_t i = 0; i < r.coeffs.size(); ++i) r.coeffs[i] = a.coeffs[i] + b.coeffs[i];
    return r;
}

// Cauchy product truncated at the shared cap.
template <class T>
inline TruncatedSeries<T> series_multiply(const TruncatedSeries<T>& a, const TruncatedSeries<T>& b) {
    check_same_cap(a, b);
    TruncatedSeries<T> r(a.cap());
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
        if (a.coeffs[i] == T(0)) continue;
        for (std::size_t j = 0; i + j < b.coeffs.size(); ++j)
            r.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
    }
    return r;
}

// exp of a series with zero constant term, by the differential recurrence
// n·B_n = sum_{k=1..n} k·A_k·B_{n-k}.
template <class T>
inline TruncatedSeries<T> series_exp(const TruncatedSeries<T>& a) {
    if (!(a.coeffs.at(0) == T(0))) throw std::domain_error("series_exp: nonzero constant term");
    TruncatedSeries<T> b(a.cap());
    b.coeffs[0] = T(1);
    for (std::size_t n = 1; n < b.coeffs.size(); ++n) {
        T s(0);
        for (std::size_t k = 1; k <= n; ++k) s += T((long long)k) * a.coeffs[k] * b.coeffs[n - k];
        b.coeffs[n] = s / T((long long)n);
    }
    return b;
}

// a(z) -> a(z^k), truncated at the cap of a.
template <class T>
inline TruncatedSeries<T> substitute_power(const TruncatedSeries<T>& a, int k) {
    if (k < 1) throw std::domain_error("substitute_power: k must be >= 1");
    TruncatedSeries<T> r(a.cap());
    for (std::size_t j = 0; j * std::size_t(k) < r.coeffs.size(); ++j)
        r.coeffs[j * std::size_t(k)] = a.coeffs[j];
    return r;
}

} // namespace enr
