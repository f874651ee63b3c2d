#pragma once

// Small dense linear algebra over the integers and rationals: exact
// determinants, Hermite normal form, integral solves, and LLL-based integer
// relation search over any real type (double or a multiprecision float).

#include "qgraph/scalar.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <vector>

namespace qg {

using IntVec = std::vector<std::int64_t>;
using IntMat = std::vector<IntVec>;

namespace detail {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

inline std::int64_t narrow(const BigInt& v) {
    if (v > INT64_MAX || v < INT64_MIN) throw DomainError("integer overflow in lattice computation");
    return static_cast<std::int64_t>(v);
}

}  // namespace detail

/// Fraction-free Bareiss determinant.
inline boost::multiprecision::cpp_int determinant(const IntMat& m) {
    using detail::BigInt;
    const int n = static_cast<int>(m.size());
    if (n == 0) return 1;
    std::vector<std::vector<BigInt>> a(n, std::vector<BigInt>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[i][j] = m[i][j];
    BigInt prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (a[k][k] == 0) {
            int p = k + 1;
            while (p < n && a[p][k] == 0) ++p;
            if (p == n) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return a[n - 1][n - 1] * sign;
}

inline boost::multiprecision::cpp_rational determinant(std::vector<std::vector<boost::multiprecision::cpp_rational>> a) {
    const int n = static_cast<int>(a.size());
    boost::multiprecision::cpp_rational det = 1;
    for (int k = 0; k < n; ++k) {
        int p = k;
        while (p < n && a[p][k] == 0) ++p;
        if (p == n) return 0;
        if (p != k) {
            std::swap(a[p], a[k]);
            det = -det;
        }
        det *= a[k][k];
        for (int i = k + 1; i < n; ++i) {
            const boost::multiprecision::cpp_rational f = a[i][k] / a[k][k];
            for (int j = k; j < n; ++j) a[i][j] -= f * a[k][j];
        }
    }
    return det;
}

/// Gaussian elimination; exact for Rational (carried out in big rationals),
/// partial pivoting for double.
template <class T>
T determinant(std::vector<std::vector<T>> a) {
    using tr = scalar_traits<T>;
    const int n = static_cast<int>(a.size());
    if constexpr (tr::exact) {
        using detail::BigRational;
        std::vector<std::vector<BigRational>> b(n, std::vector<BigRational>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b[i][j] = BigRational(a[i][j].numerator(), a[i][j].denominator());
        BigRational det = determinant(std::move(b));
        return T(detail::narrow(numerator(det)), detail::narrow(denominator(det)));
    }
    T det = tr::from_int(1);
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i) {
            if constexpr (tr::exact) {
                if (tr::is_zero(a[p][k]) && !tr::is_zero(a[i][k])) p = i;
            } else {
                if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
            }
        }
        if (a[p][k] == tr::from_int(0)) return tr::from_int(0);
        if (p != k) {
            std::swap(a[p], a[k]);
            det = -det;
        }
        det *= a[k][k];
        for (int i = k + 1; i < n; ++i) {
            const T f = a[i][k] / a[k][k];
            for (int j = k; j < n; ++j) a[i][j] -= f * a[k][j];
        }
    }
    return det;
}

/// Cholesky test for a symmetric matrix.
template <class T>
bool is_positive_definite(const std::vector<std::vector<T>>& g) {
    const int n = static_cast<int>(g.size());
    for (int k = 1; k <= n; ++k) {
        std::vector<std::vector<T>> minor(k, std::vector<T>(k));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) minor[i][j] = g[i][j];
        const T d = determinant(minor);
        if constexpr (scalar_traits<T>::exact) {
            if (!(d > scalar_traits<T>::from_int(0))) return false;
        } else {
            if (!(d > scalar_traits<T>::tolerance)) return false;
        }
    }
    return true;
}

inline bool is_unimodular(const IntMat& m) {
    if (m.empty()) return true;
    const auto d = determinant(m);
    return d == 1 || d == -1;
}

/// Solves A x = b over the rationals for square nonsingular A.
inline std::optional<std::vector<boost::multiprecision::cpp_rational>> solve_rational(const IntMat& A, const IntVec& b) {
    using detail::BigRational;
    const int n = static_cast<int>(A.size());
    std::vector<std::vector<BigRational>> a(n, std::vector<BigRational>(n + 1));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a[i][j] = A[i][j];
        a[i][n] = b[i];
    }
    for (int k = 0; k < n; ++k) {
        int p = k;
        while (p < n && a[p][k] == 0) ++p;
        if (p == n) return std::nullopt;
        std::swap(a[p], a[k]);
        for (int i = 0; i < n; ++i) {
            if (i == k || a[i][k] == 0) continue;
            const BigRational f = a[i][k] / a[k][k];
            for (int j = k; j <= n; ++j) a[i][j] -= f * a[k][j];
        }
    }
    std::vector<BigRational> x(n);
    for (int i = 0; i < n; ++i) x[i] = a[i][n] / a[i][i];
    return x;
}

/// Integral solution of A x = b, or nullopt when A is singular or x is not integral.
inline std::optional<IntVec> solve_integer(const IntMat& A, const IntVec& b) {
    auto x = solve_rational(A, b);
    if (!x) return std::nullopt;
    IntVec out;
    for (const auto& v : *x) {
        if (boost::multiprecision::denominator(v) != 1) return std::nullopt;
        out.push_back(detail::narrow(boost::multiprecision::numerator(v)));
    }
    return out;
}

inline IntMat transpose(const IntMat& m) {
    if (m.empty()) return {};
    IntMat t(m[0].size(), IntVec(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j) t[j][i] = m[i][j];
    return t;
}

/// Inverse of a unimodular matrix (integral by Cramer).
inline IntMat integer_inverse(const IntMat& m) {
    const int n = static_cast<int>(m.size());
    if (!is_unimodular(m)) throw DomainError("integer_inverse: matrix is not unimodular");
    IntMat inv(n, IntVec(n));
    for (int j = 0; j < n; ++j) {
        IntVec e(n, 0);
        e[j] = 1;
        auto col = solve_integer(m, e);
        for (int i = 0; i < n; ++i) inv[i][j] = (*col)[i];
    }
    return inv;
}

/// Row Hermite normal form of the lattice spanned by the rows. Returns the
/// nonzero rows: leading entries positive, entries above each pivot reduced
/// into [0, pivot).
inline IntMat hermite_normal_form(const IntMat& rows) {
    using detail::BigInt;
    if (rows.empty()) return {};
    const int cols = static_cast<int>(rows[0].size());
    std::vector<std::vector<BigInt>> a;
    for (const auto& r : rows) {
        std::vector<BigInt> v(r.begin(), r.end());
        a.push_back(std::move(v));
    }
    int top = 0;
    std::vector<int> pivot_cols;
    for (int c = 0; c < cols && top < static_cast<int>(a.size()); ++c) {
        // Euclid on column c among rows top..end
        while (true) {
            int best = -1;
            for (int i = top; i < static_cast<int>(a.size()); ++i)
                if (a[i][c] != 0 && (best < 0 || abs(a[i][c]) < abs(a[best][c]))) best = i;
            if (best < 0) break;
            std::swap(a[top], a[best]);
            bool done = true;
            for (int i = top + 1; i < static_cast<int>(a.size()); ++i) {
                if (a[i][c] == 0) continue;
                const BigInt q = a[i][c] / a[top][c];
                for (int j = c; j < cols; ++j) a[i][j] -= q * a[top][j];
                if (a[i][c] != 0) done = false;
            }
            if (done) break;
        }
        if (a[top][c] == 0) continue;
        if (a[top][c] < 0)
            for (int j = c; j < cols; ++j) a[top][j] = -a[top][j];
        for (int i = 0; i < top; ++i) {
            BigInt q = a[i][c] / a[top][c];
            if (a[i][c] - q * a[top][c] < 0) q -= 1;
            for (int j = c; j < cols; ++j) a[i][j] -= q * a[top][j];
        }
        pivot_cols.push_back(c);
        ++top;
    }
    IntMat out;
    for (int i = 0; i < top; ++i) {
        IntVec r;
        for (int j = 0; j < cols; ++j) r.push_back(detail::narrow(a[i][j]));
        out.push_back(std::move(r));
    }
    return out;
}

/// Textbook LLL (delta = 3/4) on real row vectors, Gram-Schmidt recomputed
/// after each swap. Intended for dimensions below ~12.
template <class R>
void lll_reduce(std::vector<std::vector<R>>& b, double delta = 0.75) {
    using std::abs;
    using std::floor;
    const int n = static_cast<int>(b.size());
    if (n == 0) return;
    const int m = static_cast<int>(b[0].size());
    auto dot = [&](const std::vector<R>& x, const std::vector<R>& y) {
        R s = 0;
        for (int i = 0; i < m; ++i) s += x[i] * y[i];
        return s;
    };
    std::vector<std::vector<R>> bs(n), mu(n, std::vector<R>(n, R(0)));
    std::vector<R> norm(n);
    auto gram_schmidt = [&]() {
        for (int i = 0; i < n; ++i) {
            bs[i] = b[i];
            for (int j = 0; j < i; ++j) {
                mu[i][j] = norm[j] == 0 ? R(0) : R(dot(b[i], bs[j]) / norm[j]);
                for (int k = 0; k < m; ++k) bs[i][k] -= mu[i][j] * bs[j][k];
            }
            norm[i] = dot(bs[i], bs[i]);
        }
    };
    gram_schmidt();
    int k = 1;
    int guard = 0;
    while (k < n) {
        if (++guard > 100000) throw DomainError("lll_reduce: no convergence");
        for (int j = k - 1; j >= 0; --j) {
            const R q = floor(mu[k][j] + R(0.5));
            if (q != 0) {
                for (int i = 0; i < m; ++i) b[k][i] -= q * b[j][i];
                gram_schmidt();
            }
        }
        if (norm[k] >= (R(delta) - mu[k][k - 1] * mu[k][k - 1]) * norm[k - 1]) {
            ++k;
        } else {
            std::swap(b[k], b[k - 1]);
            gram_schmidt();
            k = std::max(k - 1, 1);
        }
    }
}

/// Small integer relation c with |sum c_i x_i| <= tol and max |c_i| <= bound,
/// searched among LLL-reduced rows of [I | weight x]. Returns the relation
/// with the smallest max-norm, or nullopt.
template <class R>
std::optional<IntVec> integer_relation(const std::vector<R>& x, const R& weight, int bound, const R& tol) {
    using std::abs;
    using std::round;
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<R>> b(n, std::vector<R>(n + 1, R(0)));
    for (int i = 0; i < n; ++i) {
        b[i][i] = 1;
        b[i][n] = weight * x[i];
    }
    lll_reduce(b);
    std::optional<IntVec> best;
    std::int64_t best_norm = 0;
    for (const auto& row : b) {
        IntVec c(n);
        std::int64_t norm = 0;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            const R r = round(row[i]);
            if (abs(r) > R(bound)) ok = false;
            else c[i] = static_cast<std::int64_t>(static_cast<double>(r));
            norm = std::max<std::int64_t>(norm, std::abs(c[i]));
        }
        if (!ok || norm == 0) continue;
        R residual = 0;
        for (int i = 0; i < n; ++i) residual += R(static_cast<double>(c[i])) * x[i];
        if (abs(residual) > tol) continue;
        if (!best || norm < best_norm) {
            best = c;
            best_norm = norm;
        }
    }
    return best;
}

}  // namespace qg
