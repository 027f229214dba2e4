#ifndef KOWALEVSKAYA_SCALAR_HPP_
#define KOWALEVSKAYA_SCALAR_HPP_

// Scalar plumbing shared by the floating-point and exact code paths.
//
// Every numeric routine in this library is a template over the scalar type.
// Two instantiations are used in practice: `double` for time integration and
// `Rational` for exact polynomial-identity checks.

#include <boost/multiprecision/gmp.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace kowalevskaya {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

template <typename T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

template <typename T>
T make_scalar(std::int64_t num, std::int64_t den = 1)
{
    if (den == 0) throw std::invalid_argument("zero denominator");
    if constexpr (is_exact_v<T>) {
        return Rational(num, den);
    } else {
        return static_cast<T>(num) / static_cast<T>(den);
    }
}

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

template <typename To, typename From>
To scalar_cast(const From& x)
{
    if constexpr (std::is_same_v<To, From>) {
        return x;
    } else if constexpr (is_exact_v<To>) {
        // Exact conversion of the binary value of a double.
        return Rational(x);
    } else {
        return static_cast<To>(to_double(x));
    }
}

template <typename T>
    requires std::is_arithmetic_v<T>
bool is_zero(T x)
{
    return x == T(0);
}
inline bool is_zero(const Rational& x) { return x.is_zero(); }

inline double abs_value(double x) { return std::fabs(x); }
inline Rational abs_value(const Rational& x) { return boost::multiprecision::abs(x); }

/// "num/den" (or a plain integer) for rationals.
inline std::string rational_to_string(const Rational& q)
{
    auto num = boost::multiprecision::numerator(q);
    auto den = boost::multiprecision::denominator(q);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

/// Parses "num/den", an integer, or a finite decimal literal ("0.25", "-1.5e-3")
/// into an exact rational.
namespace detail {

/// Strict base-10 integer; GMP would otherwise read a leading 0 as octal.
inline boost::multiprecision::mpz_int parse_decimal_integer(std::string t)
{
    bool negative = false;
    if (!t.empty() && (t[0] == '+' || t[0] == '-')) {
        negative = t[0] == '-';
        t.erase(0, 1);
    }
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
        throw std::runtime_error("not a decimal integer");
    }
    t.erase(0, std::min(t.find_first_not_of('0'), t.size() - 1));
    boost::multiprecision::mpz_int v(t);
    return negative ? boost::multiprecision::mpz_int(-v) : v;
}

} // namespace detail

inline Rational parse_rational(std::string_view text)
{
    std::string s(text);
    auto trim = [](std::string& t) {
        auto b = t.find_first_not_of(" \t");
        auto e = t.find_last_not_of(" \t");
        t = (b == std::string::npos) ? std::string{} : t.substr(b, e - b + 1);
    };
    trim(s);
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    try {
        if (auto slash = s.find('/'); slash != std::string::npos) {
            std::string a = s.substr(0, slash), b = s.substr(slash + 1);
            trim(a);
            trim(b);
            const auto den = detail::parse_decimal_integer(b);
            if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
            return Rational(detail::parse_decimal_integer(a), den);
        }
        if (s.find_first_of(".eE") == std::string::npos) {
            return Rational(detail::parse_decimal_integer(s));
        }
    } catch (const std::runtime_error&) {
        throw std::invalid_argument("malformed rational literal '" + s + "'");
    }
    // Decimal literal: mantissa digits over a power of ten.
    std::size_t pos = 0;
    bool negative = false;
    if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
    std::string digits;
    long exponent = 0;
    bool seen_point = false, seen_digit = false;
    for (; pos < s.size(); ++pos) {
        char ch = s[pos];
        if (ch >= '0' && ch <= '9') {
            digits.push_back(ch);
            seen_digit = true;
            if (seen_point) --exponent;
        } else if (ch == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!seen_digit) throw std::invalid_argument("malformed rational literal '" + s + "'");
    if (pos < s.size()) {
        if (s[pos] != 'e' && s[pos] != 'E') {
            throw std::invalid_argument("malformed rational literal '" + s + "'");
        }
        std::size_t used = 0;
        long e = 0;
        try {
            e = std::stol(s.substr(pos + 1), &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("malformed exponent in '" + s + "'");
        }
        if (pos + 1 + used != s.size()) {
            throw std::invalid_argument("malformed exponent in '" + s + "'");
        }
        exponent += e;
    }
    using boost::multiprecision::mpz_int;
    mpz_int mantissa = detail::parse_decimal_integer(digits);
    mpz_int scale = boost::multiprecision::pow(mpz_int(10), static_cast<unsigned>(std::labs(exponent)));
    Rational q = exponent >= 0 ? Rational(mantissa * scale) : Rational(mantissa, scale);
    return negative ? Rational(-q) : q;
}

/// Uniform random rational num/den with |num| <= num_bound, 1 <= den <= den_bound.
template <typename T, typename Rng>
T random_scalar(Rng& rng, std::int64_t num_bound = 1000, std::int64_t den_bound = 997)
{
    std::uniform_int_distribution<std::int64_t> num(-num_bound, num_bound);
    std::uniform_int_distribution<std::int64_t> den(1, den_bound);
    std::int64_t a = num(rng);
    std::int64_t b = den(rng);
    return make_scalar<T>(a, b);
}

} // namespace kowalevskaya

#endif // KOWALEVSKAYA_SCALAR_HPP_
