#pragma once

// Periodic orbits, their trace-formula amplitudes, the per-length coefficient
// signals along a flux ray, and a Gaussian-smoothed check of the wave trace
// formula against a computed spectrum.

#include "qgraph/homology.hpp"
#include "qgraph/mp.hpp"
#include "qgraph/spectrum.hpp"

#include <complex>
#include <limits>
#include <numbers>

namespace qg {

template <class T>
struct PeriodicOrbit {
    std::vector<BondIndex> bonds;  // lexicographically smallest rotation
    T length{};
    T primitive_length{};
    int repetitions = 1;
    int backtracks = 0;  // vertex passages with b followed by reverse(b), cyclically
    HomologyClass cls;
};

/// Vertex scattering coefficient for passing from bond b into bond next.
inline double scattering(const std::vector<int>& deg, VertexIndex v, BondIndex b, BondIndex next) {
    return 2.0 / deg[v] - (next == reverse(b) ? 1.0 : 0.0);
}

template <class T>
T scattering_exact(const std::vector<int>& deg, VertexIndex v, BondIndex b, BondIndex next) {
    if constexpr (scalar_traits<T>::exact) return T(2, deg[v]) - T(next == reverse(b) ? 1 : 0);
    else return scattering(deg, v, b, next);
}

namespace detail {

template <class T>
Matrix<T> vertex_distances(const MetricGraph<T>& g) {
    using tr = scalar_traits<T>;
    const int n = g.vertex_count();
    std::vector<std::vector<std::optional<T>>> d(n, std::vector<std::optional<T>>(n));
    for (int v = 0; v < n; ++v) d[v][v] = tr::from_int(0);
    for (const auto& e : g.edges()) {
        if (!d[e.u][e.v] || e.length < *d[e.u][e.v]) d[e.u][e.v] = d[e.v][e.u] = e.length;
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (d[i][k] && d[k][j] && (!d[i][j] || *d[i][k] + *d[k][j] < *d[i][j])) d[i][j] = *d[i][k] + *d[k][j];
    Matrix<T> out(n, std::vector<T>(n));
    // unreachable pairs get a value above any closed-walk budget; callers never close across components
    const T far = g.total_length() * T(1000) + T(1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[i][j] = d[i][j] ? *d[i][j] : far;
    return out;
}

inline bool is_min_rotation(const std::vector<BondIndex>& w) {
    const std::size_t n = w.size();
    for (std::size_t r = 1; r < n; ++r) {
        if (w[r] != w[0]) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const BondIndex a = w[(r + i) % n], b = w[i];
            if (a < b) return false;
            if (a > b) break;
        }
    }
    return true;
}

inline std::size_t primitive_period(const std::vector<BondIndex>& w) {
    const std::size_t n = w.size();
    for (std::size_t p = 1; p < n; ++p) {
        if (n % p) continue;
        bool ok = true;
        for (std::size_t i = p; i < n && ok; ++i) ok = w[i] == w[i - p];
        if (ok) return p;
    }
    return n;
}

}  // namespace detail

template <class T>
PeriodicOrbit<T> make_orbit(const MetricGraph<T>& g, const HomologyBasis& hb, std::vector<BondIndex> bonds) {
    PeriodicOrbit<T> p;
    p.bonds = canonical_rotation(bonds);
    p.length = walk_length<T>(g, p.bonds);
    const std::size_t period = detail::primitive_period(p.bonds);
    p.repetitions = static_cast<int>(p.bonds.size() / period);
    p.primitive_length = walk_length<T>(g, std::span<const BondIndex>(p.bonds.data(), period));
    for (std::size_t i = 0; i < p.bonds.size(); ++i)
        p.backtracks += p.bonds[(i + 1) % p.bonds.size()] == reverse(p.bonds[i]);
    p.cls = hb.coordinates(p.bonds);
    return p;
}

struct OrbitOptions {
    std::size_t cap = 20000000;  // abort beyond this many orbits
};

/// Streams every periodic orbit with l_p <= l_max to visit(bonds, length).
/// Each orbit is produced once, as its lexicographically smallest rotation;
/// the two orientations are distinct orbits.
template <class T, class Visit>
std::size_t for_each_orbit(const MetricGraph<T>& g, const T& l_max, Visit&& visit, const OrbitOptions& opt = {}) {
    using tr = scalar_traits<T>;
    if (!(l_max > tr::from_int(0))) throw DomainError("enumerate_orbits: l_max must be positive");
    const auto out = g.outgoing();
    const auto dist = detail::vertex_distances(g);
    std::size_t count = 0;
    std::vector<BondIndex> path;
    for (BondIndex b0 = 0; b0 < g.bond_count(); ++b0) {
        const VertexIndex home = g.origin(b0);
        path.assign(1, b0);
        std::function<void(VertexIndex, const T&)> dfs = [&](VertexIndex v, const T& len) {
            if (v == home && detail::is_min_rotation(path)) {
                if (++count > opt.cap)
                    throw DomainError("enumerate_orbits: more than " + std::to_string(opt.cap) +
                                      " orbits below l_max; lower l_max or raise the cap");
                visit(static_cast<const std::vector<BondIndex>&>(path), len);
            }
            for (BondIndex b : out[v]) {
                if (b < b0) continue;
                const T nl = len + g.bond_length(b);
                if (!tr::le(nl + dist[g.terminal(b)][home], l_max)) continue;
                path.push_back(b);
                dfs(g.terminal(b), nl);
                path.pop_back();
            }
        };
        const T l0 = g.bond_length(b0);
        if (tr::le(l0 + dist[g.terminal(b0)][home], l_max)) dfs(g.terminal(b0), l0);
    }
    return count;
}

template <class T>
struct OrbitBucket {
    T length{};
    std::vector<PeriodicOrbit<T>> orbits;
};

/// All periodic orbits up to l_max grouped by length (exact buckets for
/// rationals, 1e-9 tolerance for doubles).
template <class T>
std::vector<OrbitBucket<T>> enumerate_orbits(const MetricGraph<T>& g, const T& l_max, const OrbitOptions& opt = {}) {
    using tr = scalar_traits<T>;
    const auto hb = homology_basis(g);
    std::vector<PeriodicOrbit<T>> all;
    for_each_orbit(
        g, l_max, [&](const std::vector<BondIndex>& w, const T&) { all.push_back(make_orbit(g, hb, w)); }, opt);
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.length < b.length; });
    std::vector<OrbitBucket<T>> buckets;
    for (auto& p : all) {
        if (buckets.empty() || !tr::eq(buckets.back().length, p.length)) buckets.push_back({p.length, {}});
        buckets.back().orbits.push_back(std::move(p));
    }
    for (auto& b : buckets)
        std::sort(b.orbits.begin(), b.orbits.end(), [](const auto& x, const auto& y) { return x.bonds < y.bonds; });
    return buckets;
}

/// Real part of the connectivity factor: primitive length times the product of
/// vertex scattering coefficients along the orbit.
template <class T>
T orbit_weight(const MetricGraph<T>& g, std::span<const BondIndex> bonds, const T& primitive_length) {
    const auto deg = g.degrees();
    T w = primitive_length;
    for (std::size_t i = 0; i < bonds.size(); ++i) {
        const BondIndex b = bonds[i], next = bonds[(i + 1) % bonds.size()];
        w *= scattering_exact<T>(deg, g.terminal(b), b, next);
    }
    return w;
}

/// A_p(alpha) = primitive length * exp(i Psi(p)) * product of scattering coefficients.
template <class T>
std::complex<double> orbit_amplitude(const MetricGraph<T>& g, const PeriodicOrbit<T>& p, const FluxForm& flux) {
    const double w = to_double(orbit_weight<T>(g, p.bonds, p.primitive_length));
    return std::polar(1.0, flux.flux(p.bonds)) * w;
}

/// One basis flux along the ray: coef * sqrt(radicand), evaluated at the
/// current working precision so that high-precision recovery sees exact data.
struct RayComponent {
    Rational coef{1};
    std::int64_t radicand = 1;

    mp_float value() const {
        mp_float v = to_mp(coef);
        if (radicand != 1) v *= boost::multiprecision::sqrt(mp_float(radicand));
        return v;
    }
    double to_double() const { return qg::to_double(coef) * std::sqrt(static_cast<double>(radicand)); }
};

/// Direction alpha of the flux ray t*alpha, given by Psi on the basis cycles.
struct FluxRay {
    std::vector<RayComponent> basis;

    int rank() const { return static_cast<int>(basis.size()); }
    std::vector<double> basis_double() const {
        std::vector<double> v;
        for (const auto& c : basis) v.push_back(c.to_double());
        return v;
    }
    mp_float flux(const HomologyClass& h) const {
        mp_float s = 0;
        for (int i = 0; i < rank(); ++i)
            if (h[i]) s += h[i] * basis[i].value();
        return s;
    }
    double flux_double(const HomologyClass& h) const {
        double s = 0;
        for (int i = 0; i < rank(); ++i) s += h[i] * basis[i].to_double();
        return s;
    }
};

inline std::vector<std::int64_t> first_primes(int n, std::int64_t from = 2) {
    std::vector<std::int64_t> p;
    for (std::int64_t c = from; static_cast<int>(p.size()) < n; ++c) {
        bool prime = c >= 2;
        for (std::int64_t d = 2; d * d <= c && prime; ++d) prime = c % d != 0;
        if (prime) p.push_back(c);
    }
    return p;
}

/// Square roots of the first n primes: rationally independent basis fluxes.
inline FluxRay generic_ray(int n) {
    FluxRay r;
    for (auto p : first_primes(n)) r.basis.push_back({Rational(1), p});
    return r;
}

/// Sign normalisation for classes identified with their negatives.
inline HomologyClass canonical_sign(HomologyClass h) {
    for (int x : h) {
        if (x > 0) return h;
        if (x < 0) return negate(std::move(h));
    }
    return h;
}

/// A^l(t) = sum over orbits of length l of Re A_p(t alpha) = nu0 + sum_j nu_j cos(mu_j t).
/// Orbits in classes h and -h share one cosine.
template <class T>
struct CoefficientSignal {
    T length{};
    T constant{};
    std::vector<std::pair<HomologyClass, T>> terms;  // canonical-sign class, nu
    FluxRay ray;
    double band_bound = 0;  // every mu_j is below this

    mp_float operator()(const mp_float& t) const {
        mp_float s = to_mp(constant);
        for (const auto& [h, nu] : terms) s += to_mp(nu) * boost::multiprecision::cos(ray.flux(h) * t);
        return s;
    }
    double operator()(double t) const {
        double s = to_double(constant);
        for (const auto& [h, nu] : terms) s += to_double(nu) * std::cos(ray.flux_double(h) * t);
        return s;
    }
    /// f^(k)(0): zero for odd k, (-1)^n sum nu_j mu_j^(2n) for k = 2n.
    mp_float derivative(int order) const {
        if (order % 2) return mp_float(0);
        const int n = order / 2;
        mp_float s = order == 0 ? to_mp(constant) : mp_float(0);
        for (const auto& [h, nu] : terms) s += to_mp(nu) * boost::multiprecision::pow(ray.flux(h), 2 * n);
        return n % 2 ? mp_float(-s) : s;
    }
    std::vector<std::pair<double, double>> frequencies() const {
        std::vector<std::pair<double, double>> f;
        for (const auto& [h, nu] : terms) f.push_back({std::abs(ray.flux_double(h)), to_double(nu)});
        std::sort(f.begin(), f.end());
        return f;
    }
};

template <class T>
double ray_band_bound(const MetricGraph<T>& g, const HomologyBasis& hb, const FluxRay& ray, const T& length) {
    const auto flux = flux_representative(g, hb, ray.basis_double());
    double rate = 0;
    for (int e = 0; e < g.edge_count(); ++e) rate = std::max(rate, std::abs(flux.phase[e]) / to_double(g.length(e)));
    return 1.1 * rate * to_double(length) + 1.0;
}

template <class T>
CoefficientSignal<T> coefficient_signal(const MetricGraph<T>& g, const HomologyBasis& hb, const OrbitBucket<T>& bucket,
                                        const FluxRay& ray) {
    if (ray.rank() != hb.rank()) throw DomainError("coefficient_signal: ray has wrong dimension");
    CoefficientSignal<T> s;
    s.length = bucket.length;
    s.constant = scalar_traits<T>::from_int(0);
    s.ray = ray;
    std::map<HomologyClass, T> by_class;
    for (const auto& p : bucket.orbits) {
        const T w = orbit_weight<T>(g, p.bonds, p.primitive_length);
        if (is_zero_class(p.cls)) {
            s.constant += w;
            continue;
        }
        auto [it, fresh] = by_class.emplace(canonical_sign(p.cls), w);
        if (!fresh) it->second += w;
    }
    for (auto& [h, nu] : by_class)
        if (!scalar_traits<T>::is_zero(nu)) s.terms.push_back({h, nu});
    s.band_bound = ray_band_bound(g, hb, ray, bucket.length);
    return s;
}

/// Signals for every orbit length up to l_max.
template <class T>
std::vector<CoefficientSignal<T>> coefficient_signals(const MetricGraph<T>& g, const T& l_max, const FluxRay& ray) {
    const auto hb = homology_basis(g);
    std::vector<CoefficientSignal<T>> out;
    for (const auto& b : enumerate_orbits(g, l_max)) out.push_back(coefficient_signal(g, hb, b, ray));
    return out;
}

struct TraceCheck {
    std::vector<double> probes;
    std::vector<double> spectral;
    std::vector<double> geometric;
    double max_deviation = 0;
    double k_max = 0;
    double l_max = 0;
    std::size_t orbit_count = 0;
};

inline double gaussian(double x, double sigma) {
    return std::exp(-x * x / (2 * sigma * sigma)) / (sigma * std::sqrt(2 * std::numbers::pi));
}

/// Bounds the smoothed check needs: spectrum beyond max probe + 8 sigma, and
/// orbits out to where exp(-sigma^2 l^2 / 2) < 1e-12.
inline std::pair<double, double> trace_check_bounds(double sigma, const std::vector<double>& probes) {
    const double pmax = *std::max_element(probes.begin(), probes.end());
    return {pmax + 8 * sigma, std::sqrt(2 * std::log(1e12)) / sigma};
}

/// Gaussian-smoothed wave trace formula at each probe l0:
///   sum_n [G(l0 - k_n) + G(l0 + k_n)]
///   = L/pi + chi G(l0) + (1/2pi) sum_p 2 Re[A_p e^{i l0 l_p}] exp(-sigma^2 l_p^2 / 2).
/// The left side counts each k_n >= 0 with multiplicity, i.e. the even extension.
template <class T>
TraceCheck smoothed_trace_check(const MetricGraph<T>& g, const FluxForm& flux, double sigma,
                                const std::vector<double>& probes, const SpectrumSlice& slice, double l_max) {
    if (probes.empty() || !(sigma > 0)) throw DomainError("smoothed_trace_check: need sigma > 0 and probe points");
    const auto [need_k, need_l] = trace_check_bounds(sigma, probes);
    if (slice.k_max < need_k || l_max < need_l)
        throw DomainError("smoothed_trace_check: requires k_max >= " + std::to_string(need_k) +
                          " and l_max >= " + std::to_string(need_l));
    TraceCheck tc;
    tc.probes = probes;
    tc.k_max = slice.k_max;
    tc.l_max = l_max;
    const auto ks = slice.wavenumbers();
    const double total = to_double(g.total_length());
    const int chi = g.euler_characteristic();
    for (double l0 : probes) {
        double s = 0;
        for (double k : ks) s += gaussian(l0 - k, sigma) + gaussian(l0 + k, sigma);
        tc.spectral.push_back(s);
        tc.geometric.push_back(total / std::numbers::pi + chi * gaussian(l0, sigma));
    }
    const auto deg = g.degrees();
    const auto dg = g.to_double_graph();
    std::vector<double> orbit_sum(probes.size(), 0.0);
    tc.orbit_count = for_each_orbit(dg, l_max, [&](const std::vector<BondIndex>& w, double len) {
        const std::size_t period = detail::primitive_period(w);
        double prim = 0, amp = 1;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i < period) prim += dg.bond_length(w[i]);
            amp *= scattering(deg, dg.terminal(w[i]), w[i], w[(i + 1) % w.size()]);
        }
        const std::complex<double> a = std::polar(prim * amp, flux.flux(w));
        const double damp = std::exp(-sigma * sigma * len * len / 2);
        for (std::size_t j = 0; j < probes.size(); ++j)
            orbit_sum[j] += 2 * (a * std::polar(1.0, probes[j] * len)).real() * damp;
    });
    for (std::size_t j = 0; j < probes.size(); ++j) {
        tc.geometric[j] += orbit_sum[j] / (2 * std::numbers::pi);
        tc.max_deviation = std::max(tc.max_deviation, std::abs(tc.spectral[j] - tc.geometric[j]));
    }
    return tc;
}

/// Computes the spectrum and orbit sum to the required bounds and compares.
template <class T>
TraceCheck smoothed_trace_check(const MetricGraph<T>& g, const FluxForm& flux, double sigma,
                                const std::vector<double>& probes) {
    const auto [need_k, need_l] = trace_check_bounds(sigma, probes);
    const auto slice = eigen_wavenumbers(g, flux, need_k);
    return smoothed_trace_check(g, flux, sigma, probes, slice, need_l);
}

}  // namespace qg
