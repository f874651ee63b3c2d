#pragma once

// Multiprecision floats (MPFR) for the frequency-recovery numerics.

#include "qgraph/scalar.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace qg {

using mp_float = boost::multiprecision::mpfr_float;

/// Sets the default MPFR precision (decimal digits) for the current scope.
class PrecisionScope {
public:
    explicit PrecisionScope(unsigned digits) : saved_(mp_float::default_precision()) {
        mp_float::default_precision(digits);
    }
    ~PrecisionScope() { mp_float::default_precision(saved_); }
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned saved_;
};

inline mp_float to_mp(double v) { return mp_float(v); }
inline mp_float to_mp(const Rational& v) { return mp_float(v.numerator()) / mp_float(v.denominator()); }

/// Smallest-denominator rational within tol of x (continued fractions), with
/// denominator at most max_den.
inline std::optional<Rational> rational_approximation(const mp_float& x, const mp_float& tol,
                                                      std::int64_t max_den = 1000000000) {
    using boost::multiprecision::abs;
    using boost::multiprecision::floor;
    PrecisionScope scope(std::max<unsigned>(x.precision(), 30));
    // convergents h/k
    boost::multiprecision::cpp_int h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    mp_float r = x;
    for (int it = 0; it < 64; ++it) {
        const mp_float a_f = floor(r);
        const boost::multiprecision::cpp_int a = a_f.convert_to<boost::multiprecision::cpp_int>();
        const boost::multiprecision::cpp_int h2 = a * h1 + h0, k2 = a * k1 + k0;
        if (k2 > max_den) return std::nullopt;
        const mp_float approx = mp_float(h2.str()) / mp_float(k2.str());
        if (abs(approx - x) <= tol) return Rational(static_cast<std::int64_t>(h2), static_cast<std::int64_t>(k2));
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        const mp_float frac = r - a_f;
        if (frac == 0) return std::nullopt;
        r = 1 / frac;
    }
    return std::nullopt;
}

}  // namespace qg
