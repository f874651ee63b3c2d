#pragma once

// Length scalars. Edge lengths are either doubles (compared at a fixed
// tolerance) or exact rationals. Every length-valued algorithm in the library
// is templated on one of the two and goes through scalar_traits.

#include <boost/rational.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qg {

using Rational = boost::rational<std::int64_t>;

/// Errors raised for invalid domain data (bad graphs, inconsistent tables).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<double> {
    static constexpr bool exact = false;
    static constexpr double tolerance = 1e-9;

    static double from_int(std::int64_t v) { return static_cast<double>(v); }
    static double to_double(double v) { return v; }
    static double scale(double v) { return std::max(1.0, std::abs(v)); }

    static bool eq(double a, double b) {
        return std::abs(a - b) <= tolerance * std::max(scale(a), scale(b));
    }
    static bool lt(double a, double b) { return a < b && !eq(a, b); }
    static bool le(double a, double b) { return a < b || eq(a, b); }
    static bool is_zero(double a) { return std::abs(a) <= tolerance; }
    static double half(double a) { return a / 2.0; }
    static double div(double a, double b) { return a / b; }
};

template <>
struct scalar_traits<Rational> {
    static constexpr bool exact = true;

    static Rational from_int(std::int64_t v) { return Rational(v); }
    static double to_double(const Rational& v) {
        return static_cast<double>(v.numerator()) / static_cast<double>(v.denominator());
    }
    static bool eq(const Rational& a, const Rational& b) { return a == b; }
    static bool lt(const Rational& a, const Rational& b) { return a < b; }
    static bool le(const Rational& a, const Rational& b) { return a <= b; }
    static bool is_zero(const Rational& a) { return a.numerator() == 0; }
    static Rational half(const Rational& a) { return a / 2; }
    static Rational div(const Rational& a, const Rational& b) { return a / b; }
};

template <class T>
double to_double(const T& v) {
    return scalar_traits<T>::to_double(v);
}

/// Parses "p/q", an integer, or a plain decimal ("1.25", "-3e-2") into an
/// exact rational. Decimals are converted digit by digit, not via double.
inline Rational parse_rational(std::string_view text) {
    const std::string s(text);
    if (s.empty()) throw DomainError("empty number");
    if (auto slash = s.find('/'); slash != std::string::npos) {
        std::size_t used_p = 0, used_q = 0;
        const long long p = std::stoll(s.substr(0, slash), &used_p);
        const long long q = std::stoll(s.substr(slash + 1), &used_q);
        if (used_p != slash || used_q != s.size() - slash - 1) throw DomainError("malformed rational '" + s + "'");
        if (q == 0) throw DomainError("zero denominator in '" + s + "'");
        return Rational(p, q);
    }
    std::size_t pos = 0;
    bool negative = false;
    if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
    std::int64_t mantissa = 0;
    int exponent = 0;
    bool digits = false, dot = false;
    for (; pos < s.size(); ++pos) {
        const char c = s[pos];
        if (c >= '0' && c <= '9') {
            if (mantissa > (INT64_MAX - 9) / 10) throw DomainError("too many digits in '" + s + "'");
            mantissa = mantissa * 10 + (c - '0');
            if (dot) --exponent;
            digits = true;
        } else if (c == '.' && !dot) {
            dot = true;
        } else if (c == 'e' || c == 'E') {
            std::size_t used = 0;
            exponent += std::stoi(s.substr(pos + 1), &used);
            if (used != s.size() - pos - 1) throw DomainError("malformed number '" + s + "'");
            pos = s.size();
            break;
        } else {
            throw DomainError("malformed number '" + s + "'");
        }
    }
    if (!digits) throw DomainError("malformed number '" + s + "'");
    Rational value(negative ? -mantissa : mantissa);
    for (; exponent > 0; --exponent) value *= 10;
    for (; exponent < 0; ++exponent) value /= 10;
    return value;
}

inline double parse_double(std::string_view text) {
    const std::string s(text);
    if (s.find('/') != std::string::npos) return to_double(parse_rational(s));
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw DomainError("malformed number '" + s + "'");
    }
    if (used != s.size()) throw DomainError("malformed number '" + s + "'");
    return v;
}

template <class T>
T parse_scalar(std::string_view text);

template <>
inline double parse_scalar<double>(std::string_view text) {
    return parse_double(text);
}
template <>
inline Rational parse_scalar<Rational>(std::string_view text) {
    return parse_rational(text);
}

/// Round-trip formatting: 17 significant digits for doubles, "p/q" (or "p")
/// for rationals.
inline std::string format_scalar(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline std::string format_scalar(const Rational& v) {
    if (v.denominator() == 1) return std::to_string(v.numerator());
    return std::to_string(v.numerator()) + "/" + std::to_string(v.denominator());
}

}  // namespace qg
