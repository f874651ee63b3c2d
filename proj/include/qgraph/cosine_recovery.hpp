#pragma once

// Recovering f(t) = nu0 + sum_j nu_j cos(mu_j t) from its germ at t = 0.
//
// Derivative method: mu_max^2 is the limit of the moment ratios
// f^(2n+2)(0) / f^(2n)(0); nu_max is the limit of f^(2n)(0) / (-mu_max^2)^n.
// Peel that term off and repeat. An inexact peel leaves an error growing like
// lambda^n, which swamps the smaller terms, so the method is run either with
// an exact identification of every term or to the noise floor of a few
// thousand digits.
//
// Recurrence method: with the symmetric shift (S f)(t) = (f(t+d) + f(t-d)) / 2
// every cosine is an eigenfunction, S cos(mu t) = cos(mu d) cos(mu t), so the
// monic polynomial with roots x_j = cos(mu_j d) annihilates uniformly spaced
// samples. Its order is the rank of the shifted-sample columns.

#include "qgraph/mp.hpp"

#include <functional>

namespace qg {

struct CosineFit {
    mp_float constant = 0;
    std::vector<std::pair<mp_float, mp_float>> terms;  // (mu, nu), ascending mu
    unsigned digits = 0;                               // working precision used

    std::vector<std::pair<double, double>> terms_double() const {
        std::vector<std::pair<double, double>> out;
        for (const auto& [mu, nu] : terms) out.push_back({mu.convert_to<double>(), nu.convert_to<double>()});
        return out;
    }
};

/// Explicit cosine sum, used to synthesise test signals.
struct CosineSum {
    double constant = 0;
    std::vector<std::pair<double, double>> terms;  // (mu, nu)

    mp_float operator()(const mp_float& t) const {
        mp_float s = constant;
        for (const auto& [mu, nu] : terms) s += mp_float(nu) * boost::multiprecision::cos(mp_float(mu) * t);
        return s;
    }
    mp_float derivative(int order) const {
        if (order % 2) return mp_float(0);
        const int n = order / 2;
        mp_float s = order == 0 ? mp_float(constant) : mp_float(0);
        for (const auto& [mu, nu] : terms) s += mp_float(nu) * boost::multiprecision::pow(mp_float(mu), 2 * n);
        return n % 2 ? mp_float(-s) : s;
    }
    double band_bound() const {
        double m = 0;
        for (const auto& t : terms) m = std::max(m, t.first);
        return 1.1 * m + 1.0;
    }
};

/// Maps an approximate term (mu, nu) to its exact value at the working
/// precision, or nullopt when it cannot be identified. Called with mu = 0 for
/// the constant term.
using CosineSnap = std::function<std::optional<std::pair<mp_float, mp_float>>(const mp_float&, const mp_float&)>;

struct DerivativeOptions {
    unsigned digits = 4000;       // working precision without a snap
    unsigned snap_digits = 200;   // starting precision with a snap; doubled on loss
    unsigned max_digits = 32000;  // cap for the doubling
    int max_order = 400000;       // largest n in f^(2n)
    int min_digits = 16;          // without a snap: give up below this many reliable digits
    int identify_digits = 40;     // with a snap: accuracy of each limit before identification
};

namespace detail {

struct PrecisionLoss {};

struct PeeledTerm {
    mp_float lambda, nu;
    mp_float lambda_err, nu_err;  // relative
};

inline CosineFit derivative_once(const std::function<mp_float(int)>& derivative, const CosineSnap& snap,
                                 const DerivativeOptions& opt, unsigned digits) {
    using boost::multiprecision::abs;
    using boost::multiprecision::pow;
    PrecisionScope scope(digits);
    const mp_float eps = pow(mp_float(10), -static_cast<int>(digits) + 10);
    std::vector<PeeledTerm> found;

    // moments of what is left, sum over unpeeled terms of nu_j lambda_j^n,
    // with an estimate of their absolute error
    auto moment = [&](int n) {
        const mp_float d = derivative(2 * n);
        mp_float m = n % 2 ? mp_float(-d) : d;
        mp_float noise = eps * abs(d);
        for (const auto& t : found) {
            const mp_float p = t.nu * pow(t.lambda, n);
            m -= p;
            noise += abs(p) * (t.nu_err + n * t.lambda_err + eps);
        }
        return std::pair{m, noise};
    };

    const mp_float target = snap ? pow(mp_float(10), -opt.identify_digits) : eps;
    while (true) {
        bool empty = true;
        for (int n = 1; n <= 3 && empty; ++n) {
            const auto [m, noise] = moment(n);
            empty = abs(m) <= 1000 * noise;
        }
        if (empty) break;

        auto [m_cur, noise_cur] = moment(1);
        mp_float r_prev = 0, diff_prev = 0;
        mp_float best_r = 0, best_err = -1, best_m = 0, best_noise = 0;
        int best_n = 0;
        for (int n = 1;; ++n) {
            if (n > opt.max_order) throw DomainError("derivative method: moment ratios did not converge");
            const auto [m_next, noise_next] = moment(n + 1);
            if (abs(m_next) <= 1000 * noise_next || abs(m_cur) <= 1000 * noise_cur) break;  // noise floor
            const mp_float r = m_next / m_cur;
            if (n >= 2) {
                const mp_float diff = abs(r - r_prev);
                // geometric convergence: remaining error ~ diff q / (1 - q)
                mp_float q = diff_prev > 0 ? mp_float(diff / diff_prev) : mp_float(0.5);
                if (q > 0.999) q = 0.999;
                const mp_float err = (diff * q / (1 - q) + noise_next / abs(m_next)) / abs(r);
                if (r > 0 && (best_err < 0 || err < best_err)) {
                    best_r = r;
                    best_err = err;
                    best_m = m_next;
                    best_noise = noise_next;
                    best_n = n + 1;
                }
                if (r > 0 && err <= target) break;
                diff_prev = diff;
            }
            r_prev = r;
            m_cur = m_next;
            noise_cur = noise_next;
        }
        if (best_err < 0 || best_err > target) {
            if (snap) throw PrecisionLoss{};
            if (best_err < 0 || best_err > pow(mp_float(10), -opt.min_digits))
                throw DomainError("derivative method: precision exhausted after " + std::to_string(found.size()) +
                                  " frequencies; raise the working precision");
        }
        PeeledTerm t{best_r, best_m / pow(best_r, best_n), best_err, best_n * best_err + best_noise / abs(best_m)};
        if (snap) {
            const auto exact = snap(boost::multiprecision::sqrt(t.lambda), t.nu);
            if (!exact) throw DomainError("derivative method: recovered term could not be identified exactly");
            t = {exact->first * exact->first, exact->second, mp_float(0), mp_float(0)};
        }
        found.push_back(t);
    }

    CosineFit fit;
    fit.digits = digits;
    fit.constant = derivative(0);
    for (const auto& t : found) fit.constant -= t.nu;
    if (snap) {
        const auto exact = snap(mp_float(0), fit.constant);
        if (!exact) throw DomainError("derivative method: constant term could not be identified exactly");
        fit.constant = exact->second;
    }
    for (const auto& t : found) fit.terms.push_back({boost::multiprecision::sqrt(t.lambda), t.nu});
    std::sort(fit.terms.begin(), fit.terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return fit;
}

}  // namespace detail

/// Derivative-limit method on an oracle order -> f^(order)(0). With a snap
/// every limit is identified exactly before it is peeled, so no precision is
/// lost between stages and the result is exact.
inline CosineFit recover_cosine_derivative(const std::function<mp_float(int)>& derivative,
                                           const DerivativeOptions& opt = {}, const CosineSnap& snap = {}) {
    if (!snap) return detail::derivative_once(derivative, snap, opt, opt.digits);
    for (unsigned digits = opt.snap_digits; digits <= opt.max_digits; digits *= 2) {
        try {
            return detail::derivative_once(derivative, snap, opt, digits);
        } catch (const detail::PrecisionLoss&) {
        }
    }
    throw DomainError("derivative method: no convergence below the precision cap");
}
namespace detail {

/// Modified Gram-Schmidt over columns; keeps Q, R for least squares.
struct MpQR {
    std::vector<std::vector<mp_float>> q;  // orthonormal columns
    std::vector<std::vector<mp_float>> r;  // r[j][i] = <q_i, a_j>, i <= j

    /// Orthogonalises a new column. Returns the residual norm relative to the
    /// column norm; the column is only kept when keep is true.
    mp_float add(const std::vector<mp_float>& a, bool keep) {
        using boost::multiprecision::sqrt;
        std::vector<mp_float> v = a;
        std::vector<mp_float> coeffs;
        mp_float norm_a = 0;
        for (const auto& x : a) norm_a += x * x;
        norm_a = sqrt(norm_a);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < q.size(); ++i) {
                mp_float d = 0;
                for (std::size_t k = 0; k < v.size(); ++k) d += q[i][k] * v[k];
                for (std::size_t k = 0; k < v.size(); ++k) v[k] -= d * q[i][k];
                if (pass == 0) coeffs.push_back(d);
                else coeffs[i] += d;
            }
        }
        mp_float nv = 0;
        for (const auto& x : v) nv += x * x;
        nv = sqrt(nv);
        if (keep) {
            coeffs.push_back(nv);
            for (auto& x : v) x /= nv;
            q.push_back(std::move(v));
            r.push_back(std::move(coeffs));
        }
        return norm_a == 0 ? mp_float(0) : mp_float(nv / norm_a);
    }

    /// Least squares: minimise |A x - b| for the kept columns.
    std::vector<mp_float> solve(const std::vector<mp_float>& b) const {
        const std::size_t n = q.size();
        std::vector<mp_float> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = 0;
            for (std::size_t k = 0; k < b.size(); ++k) y[i] += q[i][k] * b[k];
        }
        std::vector<mp_float> x(n);
        for (std::size_t i = n; i-- > 0;) {
            mp_float s = y[i];
            for (std::size_t j = i + 1; j < n; ++j) s -= r[j][i] * x[j];
            x[i] = s / r[i][i];
        }
        return x;
    }
};

/// Polynomial coefficients, lowest degree first.
using MpPoly = std::vector<mp_float>;

inline mp_float poly_eval(const MpPoly& p, const mp_float& x) {
    mp_float s = 0;
    for (std::size_t i = p.size(); i-- > 0;) s = s * x + p[i];
    return s;
}

inline MpPoly poly_derivative(const MpPoly& p) {
    MpPoly d;
    for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<int>(i));
    return d;
}

/// Root of p in [a, b] given a sign change: Newton steps, falling back to
/// bisection whenever a step leaves the bracket.
inline mp_float bracketed_root(const MpPoly& p, const MpPoly& dp, mp_float a, mp_float b, const mp_float& tol) {
    using boost::multiprecision::abs;
    mp_float fa = poly_eval(p, a);
    mp_float x = (a + b) / 2;
    for (int it = 0; it < 4000; ++it) {
        const mp_float fx = poly_eval(p, x);
        if (fx == 0) return x;
        if ((fx < 0) == (fa < 0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        const mp_float d = poly_eval(dp, x);
        mp_float nx = d != 0 ? mp_float(x - fx / d) : mp_float((a + b) / 2);
        if (!(nx > a && nx < b)) nx = (a + b) / 2;
        if (abs(nx - x) <= tol || b - a <= tol) return nx;
        x = nx;
    }
    return x;
}

/// Real roots of a polynomial whose roots are all real and simple, found by
/// bracketing between consecutive roots of its derivative.
inline std::vector<mp_float> real_roots(const MpPoly& p, const mp_float& bound, const mp_float& tol) {
    const int deg = static_cast<int>(p.size()) - 1;
    if (deg <= 0) return {};
    if (deg == 1) return {-p[0] / p[1]};
    const MpPoly dp = poly_derivative(p);
    std::vector<mp_float> crit = real_roots(dp, bound, tol);
    std::vector<mp_float> pts{-bound};
    pts.insert(pts.end(), crit.begin(), crit.end());
    pts.push_back(bound);
    std::vector<mp_float> roots;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const mp_float fa = poly_eval(p, pts[i]), fb = poly_eval(p, pts[i + 1]);
        if (fa == 0) {
            if (roots.empty() || roots.back() != pts[i]) roots.push_back(pts[i]);
            continue;
        }
        if ((fa < 0) != (fb < 0) && fb != 0) roots.push_back(bracketed_root(p, dp, pts[i], pts[i + 1], tol));
    }
    if (poly_eval(p, pts.back()) == 0) roots.push_back(pts.back());
    return roots;
}

}  // namespace detail

struct RecurrenceOptions {
    unsigned digits = 120;      // starting precision; doubled until two runs agree
    unsigned max_digits = 3000;
    int max_order = 48;         // largest number of cosine terms (constant included)
    double agreement = 1e-30;   // required agreement of frequencies between precisions
};

namespace detail {

inline CosineFit recurrence_once(const std::function<mp_float(const mp_float&)>& f, double band_bound,
                                 const std::vector<mp_float>& known_mu, const RecurrenceOptions& opt,
                                 unsigned digits) {
    using boost::multiprecision::abs;
    using boost::multiprecision::acos;
    using boost::multiprecision::cos;
    using boost::multiprecision::pow;
    PrecisionScope scope(digits);
    const mp_float pi = boost::math::constants::pi<mp_float>();
    const mp_float step = mp_float(std::min(1.0, 2.0 * std::numbers::pi / band_bound)) / 4;
    std::vector<mp_float> known_x;
    for (const auto& mu : known_mu) known_x.push_back(cos(mu * step));

    const int kmax = opt.max_order;
    const int filter = static_cast<int>(known_x.size());
    const int rows = kmax + 2;
    const int samples = rows + kmax + filter + 2;
    std::vector<mp_float> h(samples);
    for (int m = 0; m < samples; ++m) h[m] = f(step * m);

    auto shift = [](const std::vector<mp_float>& v) {  // (S v)(m), even extension at 0
        std::vector<mp_float> out(v.size() - 1);
        for (std::size_t m = 0; m + 1 < v.size(); ++m) out[m] = (v[m + 1] + (m == 0 ? v[1] : v[m - 1])) / 2;
        return out;
    };
    for (const auto& x : known_x) {  // h <- (S - x) h
        auto s = shift(h);
        for (std::size_t m = 0; m < s.size(); ++m) s[m] -= x * h[m];
        h = std::move(s);
    }

    const mp_float rank_tol = pow(mp_float(10), -static_cast<int>(digits) / 3);
    MpQR qr;
    std::vector<mp_float> col(h.begin(), h.begin() + rows);
    std::vector<mp_float> cur = h;
    int order = -1;
    for (int k = 0; k <= kmax; ++k) {
        col.assign(cur.begin(), cur.begin() + rows);
        mp_float norm = 0;
        for (const auto& x : col) norm += abs(x);
        if (k == 0 && norm == 0) break;  // nothing left after the filter
        if (qr.add(col, false) <= rank_tol) {
            order = k;
            break;
        }
        qr.add(col, true);
        cur = shift(cur);
    }
    CosineFit fit;
    fit.digits = digits;
    if (order < 0) {
        if (qr.q.empty()) return fit;
        throw DomainError("recurrence method: more than " + std::to_string(kmax) + " terms or ill-conditioned samples");
    }
    if (order == 0) return fit;
    // monic annihilator x^order + sum c_k x^k
    std::vector<mp_float> rhs(rows);
    for (int m = 0; m < rows; ++m) rhs[m] = -col[m];
    const auto c = qr.solve(rhs);
    MpPoly poly(c.begin(), c.end());
    poly.push_back(1);
    const mp_float root_tol = pow(mp_float(10), -static_cast<int>(digits) + 10);
    auto roots = real_roots(poly, mp_float(1.5), root_tol);
    if (static_cast<int>(roots.size()) != order)
        throw DomainError("recurrence method: annihilator has complex roots; frequencies not resolvable");
    std::sort(roots.begin(), roots.end());
    const mp_float sep_tol = pow(mp_float(10), -static_cast<int>(digits) / 6);
    for (std::size_t i = 0; i + 1 < roots.size(); ++i)
        if (roots[i + 1] - roots[i] < sep_tol)
            throw DomainError("recurrence method: two frequencies closer than the resolvable limit");
    for (auto& x : roots) {
        if (x > 1 + sep_tol || x < -1 - sep_tol)
            throw DomainError("recurrence method: annihilator root outside [-1, 1]; ill-conditioned input");
        if (x > 1) x = 1;
        if (x < -1) x = -1;
    }
    // amplitudes of the filtered signal: h(m) = sum_j a_j T_m(x_j)
    std::vector<mp_float> theta;
    for (const auto& x : roots) theta.push_back(acos(x));
    MpQR amp;
    for (const auto& th : theta) {
        std::vector<mp_float> a(rows);
        for (int m = 0; m < rows; ++m) a[m] = cos(th * m);
        amp.add(a, true);
    }
    std::vector<mp_float> target(h.begin(), h.begin() + rows);
    const auto a = amp.solve(target);
    for (std::size_t j = 0; j < roots.size(); ++j) {
        mp_float gain = 1;  // undo the filter
        for (const auto& x : known_x) gain *= roots[j] - x;
        const mp_float nu = a[j] / gain;
        const mp_float mu = theta[j] / step;
        if (abs(theta[j]) <= sep_tol) fit.constant += nu;
        else fit.terms.push_back({mu, nu});
    }
    std::sort(fit.terms.begin(), fit.terms.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    (void)pi;
    return fit;
}

}  // namespace detail

/// Recurrence (annihilating filter) method on samples f(m d), d = min(1, 2 pi / band) / 4.
/// Frequencies listed in `known` are filtered out first and do not appear in
/// the result; they must be accurate to the working precision.
inline CosineFit recover_cosine_recurrence(const std::function<mp_float(const mp_float&)>& f, double band_bound,
                                           const std::vector<mp_float>& known = {}, const RecurrenceOptions& opt = {}) {
    using boost::multiprecision::abs;
    if (!(band_bound > 0)) throw DomainError("recurrence method: band bound must be positive");
    auto run = [&](unsigned digits) {
        PrecisionScope scope(digits);
        std::vector<mp_float> mus;
        for (const auto& k : known) mus.push_back(mp_float(k));
        return detail::recurrence_once(f, band_bound, mus, opt, digits);
    };
    unsigned digits = opt.digits;
    CosineFit prev = run(digits);
    while (true) {
        const unsigned next = digits * 2;
        if (next > opt.max_digits) throw DomainError("recurrence method: no stable result below the precision cap");
        CosineFit cur = run(next);
        bool agree = cur.terms.size() == prev.terms.size();
        for (std::size_t j = 0; agree && j < cur.terms.size(); ++j)
            agree = abs(cur.terms[j].first - prev.terms[j].first) <= opt.agreement * (1 + abs(cur.terms[j].first)) &&
                    abs(cur.terms[j].second - prev.terms[j].second) <= opt.agreement * (1 + abs(cur.terms[j].second));
        if (agree) return cur;
        prev = std::move(cur);
        digits = next;
    }
}

}  // namespace qg
