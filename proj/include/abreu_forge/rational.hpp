// Exact rational arithmetic for the combinatorial side of the polytope code:
// facet offsets, vertex coordinates and Delzant determinants are kept exact,
// while all field evaluation happens in double.
#ifndef ABREU_FORGE_RATIONAL_HPP
#define ABREU_FORGE_RATIONAL_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace abreu_forge {

struct Rational {
    long long num = 0;
    long long den = 1; // > 0, gcd(num, den) = 1

    Rational() = default;
    Rational(long long n) : num(n), den(1) {}
    Rational(long long n, long long d) : num(n), den(d) { normalize(); }

    static long long checked(__int128 v) {
        if (v > INT64_MAX || v < INT64_MIN)
            throw std::overflow_error("rational overflow");
        return static_cast<long long>(v);
    }

    void normalize() {
        if (den == 0) throw std::domain_error("rational with zero denominator");
        if (den < 0) { num = -num; den = -den; }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    static Rational make(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        if (d < 0) { n = -n; d = -d; }
        __int128 a = n < 0 ? -n : n, b = d;
        while (b) { __int128 t = a % b; a = b; b = t; }
        if (a > 1) { n /= a; d /= a; }
        Rational r;
        r.num = checked(n);
        r.den = checked(d);
        return r;
    }

    // Every finite double is an exact dyadic rational; reject the ones whose
    // exact form does not fit in 64 bits.
    static Rational from_double(double v) {
        if (!std::isfinite(v)) throw std::domain_error("non-finite offset");
        if (v == std::floor(v) && std::abs(v) < 9.0e15)
            return Rational(static_cast<long long>(v));
        int exp = 0;
        double m = std::frexp(v, &exp); // v = m * 2^exp, |m| in [0.5, 1)
        long long mant = static_cast<long long>(std::ldexp(m, 53));
        exp -= 53;
        if (exp >= 0) {
            if (exp > 10) throw std::overflow_error("offset too large for exact storage");
            return Rational::make(static_cast<__int128>(mant) << exp, 1);
        }
        if (-exp > 62) throw std::overflow_error("offset not representable exactly");
        return Rational::make(mant, static_cast<__int128>(1) << (-exp));
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                    static_cast<__int128>(a.den) * b.den);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
                    static_cast<__int128>(a.den) * b.den);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(static_cast<__int128>(a.num) * b.num,
                    static_cast<__int128>(a.den) * b.den);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num == 0) throw std::domain_error("rational division by zero");
        return make(static_cast<__int128>(a.num) * b.den,
                    static_cast<__int128>(a.den) * b.num);
    }
    Rational operator-() const { Rational r; r.num = -num; r.den = den; return r; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    int sign() const { return num > 0 ? 1 : (num < 0 ? -1 : 0); }

    std::string str() const {
        return den == 1 ? std::to_string(num)
                        : std::to_string(num) + "/" + std::to_string(den);
    }
};

} // namespace abreu_forge

#endif
