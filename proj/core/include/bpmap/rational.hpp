#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace bpmap {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt binomial(int64_t n, int64_t k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt r = 1;
    for (int64_t i = 1; i <= k; ++i) {
        r *= (n - k + i);
        r /= i;
    }
    return r;
}

/// Parses "p/q", "p", or a decimal like "0.125" into an exact rational.
inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        BigInt p(s.substr(0, slash));
        BigInt q(s.substr(slash + 1));
        if (q == 0) throw std::invalid_argument("rational with zero denominator: " + s);
        return Rational(p, q);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        size_t frac_len = s.size() - dot - 1;
        bool neg = false;
        if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) {
            neg = digits[0] == '-';
            digits = digits.substr(1);
        }
        while (digits.size() > 1 && digits[0] == '0') digits.erase(digits.begin());  // no octal
        BigInt p(digits.empty() ? "0" : digits);
        BigInt q = 1;
        for (size_t i = 0; i < frac_len; ++i) q *= 10;
        return neg ? Rational(-p, q) : Rational(p, q);
    }
    return Rational(BigInt(s));
}

inline std::string format_rational(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Best rational approximation of x with denominator <= max_den (continued fractions).
inline Rational rationalize(double x, uint64_t max_den = 1000000000ull) {
    bool neg = x < 0;
    if (neg) x = -x;
    // Continued-fraction convergents h/k with the usual two-term recurrence.
    uint64_t h1 = 1, h2 = 0, k1 = 0, k2 = 1;
    uint64_t best_h = 0, best_k = 1;
    double v = x;
    for (int i = 0; i < 64; ++i) {
        double fa = std::floor(v);
        if (fa > 9e17) break;
        uint64_t a = static_cast<uint64_t>(fa);
        if (k1 != 0 && a > (max_den - k2) / k1) break;
        uint64_t h = a * h1 + h2;
        uint64_t k = a * k1 + k2;
        if (k > max_den || k == 0) break;
        h2 = h1; k2 = k1; h1 = h; k1 = k;
        best_h = h;
        best_k = k;
        double rem = v - fa;
        if (rem < 1e-12) break;
        v = 1.0 / rem;
    }
    Rational r = Rational(BigInt(best_h), BigInt(best_k));
    return neg ? -r : r;
}

/// Exact square root of a rational if it is a perfect square.
inline std::optional<Rational> rational_sqrt(const Rational& r) {
    if (r < 0) return std::nullopt;
    BigInt n = numerator(r), d = denominator(r);
    BigInt sn = sqrt(n), sd = sqrt(d);
    if (sn * sn == n && sd * sd == d) return Rational(sn, sd);
    return std::nullopt;
}

}  // namespace bpmap
