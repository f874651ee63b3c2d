#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>

using namespace qg;
using namespace qgt;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<BondIndex> min_rotation(const std::vector<BondIndex>& w) {
    std::vector<BondIndex> best = w;
    for (std::size_t s = 1; s < w.size(); ++s) {
        std::vector<BondIndex> r(w.begin() + s, w.end());
        r.insert(r.end(), w.begin(), w.begin() + s);
        best = std::min(best, r);
    }
    return best;
}

// Every cyclic bond sequence of total length <= lmax, by depth-first search
// from each starting bond, reduced to its smallest rotation.
template <class T>
std::map<T, std::set<std::vector<BondIndex>>> brute_orbits(const MetricGraph<T>& g, const T& lmax) {
    std::map<T, std::set<std::vector<BondIndex>>> out;
    const auto next = g.outgoing();
    std::vector<BondIndex> w;
    std::function<void(T)> dfs = [&](T len) {
        if (g.terminal(w.back()) == g.origin(w.front())) out[len].insert(min_rotation(w));
        for (BondIndex b : next[g.terminal(w.back())]) {
            const T l = len + g.bond_length(b);
            if (lmax < l) continue;
            w.push_back(b);
            dfs(l);
            w.pop_back();
        }
    };
    for (BondIndex b = 0; b < g.bond_count(); ++b) {
        if (lmax < g.bond_length(b)) continue;
        w = {b};
        dfs(g.bond_length(b));
    }
    return out;
}

template <class T>
std::map<T, std::set<std::vector<BondIndex>>> grouped(const std::vector<OrbitBucket<T>>& buckets) {
    std::map<T, std::set<std::vector<BondIndex>>> out;
    for (const auto& b : buckets)
        for (const auto& p : b.orbits) {
            EXPECT_EQ(p.length, b.length);
            EXPECT_TRUE(out[b.length].insert(min_rotation(p.bonds)).second) << "orbit listed twice";
        }
    return out;
}

// Scattering product times primitive length, written out from the vertex rule.
Rational hand_weight(const MetricGraph<Rational>& g, const std::vector<BondIndex>& w, Rational primitive) {
    const auto deg = g.degrees();
    Rational a = primitive;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const BondIndex b = w[i], n = w[(i + 1) % w.size()];
        a *= Rational(2, deg[g.terminal(b)]) - Rational(n == reverse(b) ? 1 : 0);
    }
    return a;
}

}  // namespace

TEST(Orbits, CompleteGraphShortLengths) {
    const auto g = complete<Rational>(4);
    const auto buckets = enumerate_orbits(g, Rational(3));
    ASSERT_EQ(buckets.size(), 2u);
    EXPECT_EQ(buckets[0].length, Rational(2));
    EXPECT_EQ(buckets[0].orbits.size(), 6u);
    for (const auto& p : buckets[0].orbits) EXPECT_EQ(p.backtracks, 2);
    EXPECT_EQ(buckets[1].length, Rational(3));
    EXPECT_EQ(buckets[1].orbits.size(), 8u);
}

TEST(Orbits, IntervalBounce) {
    const auto g = from_edges<Rational>(2, {{0, 1}}, {Rational(3, 2)});
    const auto buckets = enumerate_orbits(g, Rational(3));
    ASSERT_EQ(buckets.size(), 1u);
    ASSERT_EQ(buckets[0].orbits.size(), 1u);
    EXPECT_EQ(buckets[0].length, Rational(3));
    EXPECT_EQ(buckets[0].orbits[0].repetitions, 1);
}

TEST(Orbits, FigureEightMatchesBondSequenceSearch) {
    const auto g = figure8(Rational(2), Rational(3));
    const auto got = grouped(enumerate_orbits(g, Rational(4)));
    EXPECT_EQ(got, brute_orbits(g, Rational(4)));
    EXPECT_EQ(got.at(Rational(2)).size(), 2u);  // loop a, both orientations
    EXPECT_EQ(got.at(Rational(4)).size(), 3u);  // a a, reversed, and the backtrack a a-bar
}

TEST(Orbits, MatchBondSequenceSearchOnRandomGraphs) {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> len(1, 3);
    for (int trial = 0; trial < 15; ++trial) {
        const auto g = random_graph<Rational>(rng, 2 + trial % 4, 1 + trial % 3, [&] { return Rational(len(rng)); });
        const Rational lmax(7);
        EXPECT_EQ(grouped(enumerate_orbits(g, lmax)), brute_orbits(g, lmax));
    }
    const auto k4 = complete<Rational>(4);
    EXPECT_EQ(grouped(enumerate_orbits(k4, Rational(6))), brute_orbits(k4, Rational(6)));
}

TEST(Orbits, StructuralInvariants) {
    const auto g = load<Rational>("k4_random");
    const auto hb = homology_basis(g);
    for (const auto& b : enumerate_orbits(g, Rational(5))) {
        for (const auto& p : b.orbits) {
            for (std::size_t i = 0; i < p.bonds.size(); ++i)
                EXPECT_EQ(g.terminal(p.bonds[i]), g.origin(p.bonds[(i + 1) % p.bonds.size()]));
            EXPECT_EQ(p.length, Rational(p.repetitions) * p.primitive_length);
            const std::size_t period = p.bonds.size() / p.repetitions;
            auto prim = hb.coordinates(std::span<const BondIndex>(p.bonds.data(), period));
            for (auto& x : prim) x *= p.repetitions;
            EXPECT_EQ(p.cls, prim);
        }
    }
}

TEST(Orbits, BlowUpGuard) {
    OrbitOptions opt;
    opt.cap = 100;
    EXPECT_THROW(enumerate_orbits(complete<Rational>(4), Rational(8), opt), DomainError);
}

TEST(Amplitude, TriangleAndBacktrack) {
    const auto g = complete<Rational>(4);
    const auto buckets = enumerate_orbits(g, Rational(3));
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(-pi, pi);
    FluxForm flux{std::vector<double>(6)};
    for (auto& x : flux.phase) x = u(rng);
    // b b-bar: primitive length 2 (out and back), sigma = -1/3 at both ends
    for (const auto& p : buckets[0].orbits) {
        EXPECT_EQ(p.primitive_length, Rational(2));
        EXPECT_EQ(orbit_weight<Rational>(g, p.bonds, p.primitive_length), Rational(2, 9));
        const auto a = orbit_amplitude(g, p, flux);  // contractible: no phase
        EXPECT_NEAR(a.real(), 2.0 / 9, 1e-15);
        EXPECT_NEAR(a.imag(), 0.0, 1e-15);
    }
    for (const auto& p : buckets[1].orbits) {
        EXPECT_EQ(orbit_weight<Rational>(g, p.bonds, p.primitive_length), Rational(8, 9));
        EXPECT_EQ(hand_weight(g, p.bonds, p.primitive_length), Rational(8, 9));
        const auto a = orbit_amplitude(g, p, zero_flux(g));
        EXPECT_NEAR(a.real(), 8.0 / 9, 1e-15);
        EXPECT_EQ(a.imag(), 0.0);
    }
}

TEST(Amplitude, OrientationPairingAndPositivity) {
    std::mt19937_64 rng(33);
    std::uniform_int_distribution<int> len(1, 3);
    std::uniform_real_distribution<double> u(-pi, pi);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = random_graph<Rational>(rng, 2 + trial % 4, 2 + trial % 3, [&] { return Rational(len(rng)); });
        FluxForm flux{std::vector<double>(g.edge_count())};
        for (auto& x : flux.phase) x = u(rng);
        const auto hb = homology_basis(g);
        std::map<std::vector<BondIndex>, std::complex<double>> amp;
        std::vector<PeriodicOrbit<Rational>> all;
        for (const auto& b : enumerate_orbits(g, Rational(6)))
            for (const auto& p : b.orbits) {
                amp[min_rotation(p.bonds)] = orbit_amplitude(g, p, flux);
                all.push_back(p);
                EXPECT_EQ(orbit_weight<Rational>(g, p.bonds, p.primitive_length), hand_weight(g, p.bonds, p.primitive_length));
                if (p.backtracks == 0) EXPECT_GT(orbit_weight<Rational>(g, p.bonds, p.primitive_length), Rational(0));
            }
        for (const auto& p : all) {
            std::vector<BondIndex> rev;
            for (auto it = p.bonds.rbegin(); it != p.bonds.rend(); ++it) rev.push_back(reverse(*it));
            const auto a = amp.at(min_rotation(p.bonds)), b = amp.at(min_rotation(rev));
            EXPECT_NEAR(std::abs(a - std::conj(b)), 0.0, 1e-12);
        }
    }
}

TEST(Signal, CompleteGraphTriangles) {
    const auto g = complete<Rational>(4);
    const auto hb = homology_basis(g);
    const auto ray = generic_ray(3);
    const auto buckets = enumerate_orbits(g, Rational(3));
    const auto s = coefficient_signal(g, hb, buckets[1], ray);
    EXPECT_EQ(s.constant, Rational(0));
    ASSERT_EQ(s.terms.size(), 4u);
    for (const auto& [h, nu] : s.terms) EXPECT_EQ(nu, Rational(16, 9));
    // each triangle's class, up to sign
    std::set<HomologyClass> triangles;
    for (const auto& c : enumerate_cycles(g))
        if (c.size() == 3) triangles.insert(canonical_sign(hb.coordinates(c.bonds)));
    std::set<HomologyClass> got;
    for (const auto& [h, nu] : s.terms) got.insert(h);
    EXPECT_EQ(got, triangles);
}

TEST(Signal, FigureEightAndBacktrackOnlyLengths) {
    const auto g = figure8(Rational(2), Rational(3));
    const auto hb = homology_basis(g);
    const auto buckets = enumerate_orbits(g, Rational(2));
    const auto s = coefficient_signal(g, hb, buckets[0], generic_ray(2));
    EXPECT_EQ(s.constant, Rational(0));
    ASSERT_EQ(s.terms.size(), 1u);
    EXPECT_EQ(s.terms[0].first, (HomologyClass{1, 0}));
    EXPECT_EQ(s.terms[0].second, Rational(2));
    const auto k4 = complete<Rational>(4);
    const auto b2 = enumerate_orbits(k4, Rational(2));
    const auto c = coefficient_signal(k4, homology_basis(k4), b2[0], generic_ray(3));
    EXPECT_TRUE(c.terms.empty());
    EXPECT_EQ(c.constant, Rational(4, 3));
    EXPECT_EQ(c(0.7), 4.0 / 3);
}

TEST(Signal, ValueAtZeroEvennessAndDerivatives) {
    const auto g = load<Rational>("k4_random");
    const auto hb = homology_basis(g);
    const auto ray = generic_ray(3);
    for (const auto& b : enumerate_orbits(g, Rational(4))) {
        const auto s = coefficient_signal(g, hb, b, ray);
        double at_zero = 0;
        for (const auto& p : b.orbits) at_zero += orbit_amplitude(g, p, zero_flux(g)).real();
        EXPECT_NEAR(s(0.0), at_zero, 1e-12);
        EXPECT_NEAR(s(0.37), s(-0.37), 1e-12);

        PrecisionScope scope(80);
        const mp_float h("1e-12");
        auto f = [&](const mp_float& t) { return s(t); };
        const mp_float d2 = (f(h) - 2 * f(mp_float(0)) + f(-h)) / (h * h);
        const mp_float d4 = (f(2 * h) - 4 * f(h) + 6 * f(mp_float(0)) - 4 * f(-h) + f(-2 * h)) / (h * h * h * h);
        const mp_float d1 = (f(h) - f(-h)) / (2 * h);
        const mp_float d3 = (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h * h * h);
        auto near = [](const mp_float& a, const mp_float& b) {
            return boost::multiprecision::abs(a - b) <= mp_float("1e-6") * (1 + boost::multiprecision::abs(b));
        };
        EXPECT_TRUE(near(s.derivative(0), f(mp_float(0))));
        EXPECT_TRUE(near(s.derivative(1), d1));
        EXPECT_TRUE(near(s.derivative(2), d2));
        EXPECT_TRUE(near(s.derivative(3), d3));
        EXPECT_TRUE(near(s.derivative(4), d4));
    }
}

TEST(TraceCheck, IntervalAndCircle) {
    const auto iv = from_edges<double>(2, {{0, 1}}, {pi});
    EXPECT_LT(smoothed_trace_check(iv, zero_flux(iv), 0.5, {5.0}).max_deviation, 1e-3);
    MetricGraph<double> c;
    c.add_vertex();
    c.add_edge(0, 0, 2 * pi);
    const std::vector<double> quarter{2 * pi * 0.25};
    EXPECT_LT(smoothed_trace_check(c, flux_representative(c, quarter), 0.5, {2.0, 4.5, 7.0}).max_deviation, 1e-3);
}

TEST(TraceCheck, RefusesShortData) {
    const auto iv = from_edges<double>(2, {{0, 1}}, {pi});
    const auto slice = eigen_wavenumbers(iv, zero_flux(iv), 6.0);
    EXPECT_THROW(smoothed_trace_check(iv, zero_flux(iv), 0.5, {5.0}, slice, 30.0), DomainError);
    const auto wide = eigen_wavenumbers(iv, zero_flux(iv), 12.0);
    EXPECT_THROW(smoothed_trace_check(iv, zero_flux(iv), 0.5, {5.0}, wide, 4.0), DomainError);
}
