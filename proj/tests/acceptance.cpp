// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "support.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

using namespace qg;
using namespace qgt;

namespace {

constexpr double pi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail << "first failure: " << what << "; ";
        pass = pass && ok;
    }
};

int failures = 0;

void report(int n, const std::string& title, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %s (%s%.2f s)\n", o.pass ? "PASS" : "FAIL", n, title.c_str(), o.detail.str().c_str(),
                seconds_since(t0));
    std::fflush(stdout);
}

double spectrum_gap(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return INFINITY;
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

std::vector<double> random_phases(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-pi, pi);
    std::vector<double> p(n);
    for (auto& x : p) x = u(rng);
    return p;
}

// Every closed walk without immediate reversals, length <= bound, from each vertex.
std::map<HomologyClass, Rational> exhaustive_lengths(const MetricGraph<Rational>& g, const HomologyBasis& hb,
                                                     const Rational& bound) {
    std::map<HomologyClass, Rational> best;
    const auto out = g.outgoing();
    std::vector<BondIndex> walk;
    std::function<void(VertexIndex, VertexIndex, Rational)> dfs = [&](VertexIndex start, VertexIndex at, Rational len) {
        if (!walk.empty() && at == start) {
            const auto h = hb.coordinates(walk);
            auto it = best.find(h);
            if (it == best.end() || len < it->second) best[h] = len;
        }
        for (BondIndex b : out[at]) {
            if (!walk.empty() && b == reverse(walk.back())) continue;
            const Rational next = len + g.bond_length(b);
            if (bound < next) continue;
            walk.push_back(b);
            dfs(start, g.terminal(b), next);
            walk.pop_back();
        }
    };
    for (VertexIndex v = 0; v < g.vertex_count(); ++v) dfs(v, v, Rational(0));
    return best;
}

std::vector<HomologyClass> box_classes(int rank, int bound) {
    std::vector<HomologyClass> out;
    HomologyClass h(rank, -bound);
    while (true) {
        if (!is_zero_class(h)) out.push_back(h);
        int i = 0;
        while (i < rank && h[i] == bound) h[i++] = -bound;
        if (i == rank) break;
        ++h[i];
    }
    return out;
}

// |sum h_i c_i sqrt(r_i)| straight from the ray definition.
mp_float ray_frequency(const FluxRay& ray, const HomologyClass& h) {
    mp_float s = 0;
    for (int i = 0; i < ray.rank(); ++i) {
        const auto& c = ray.basis[i];
        s += mp_float(h[i]) * mp_float(c.coef.numerator()) / mp_float(c.coef.denominator()) *
             boost::multiprecision::sqrt(mp_float(c.radicand));
    }
    return abs(s);
}

mp_float exact(const Rational& r) { return mp_float(r.numerator()) / mp_float(r.denominator()); }

const std::vector<std::string> all_fixtures{"circle", "cube",      "disconnected", "figure8", "interval", "k33",
                                            "k4",     "k4_random", "k5",           "prism",   "star3",    "theta",
                                            "three_block_chain", "two_block_chain", "wheel4", "wheel5"};

}  // namespace

int main() {
    report(1, "spectral solver vs closed forms", [](Outcome& o) {
        auto t0 = Clock::now();
        const auto iv = from_edges<double>(2, {{0, 1}}, {pi});
        const auto ks = eigen_wavenumbers(iv, zero_flux(iv), 19.5).wavenumbers();
        std::vector<double> expect(20);
        for (int n = 0; n < 20; ++n) expect[n] = n;
        const double e_iv = spectrum_gap(ks, expect);
        const double t_iv = seconds_since(t0);
        o.require(e_iv < 1e-8, "interval error");
        o.require(t_iv < 5, "interval runtime");
        o.detail << "interval err " << e_iv << " in " << t_iv << " s; ";
        for (double t : {0.0, 0.25, 1 / std::sqrt(2.0)}) {
            t0 = Clock::now();
            MetricGraph<double> c;
            c.add_vertex();
            c.add_edge(0, 0, 2 * pi);
            std::vector<double> oracle;
            for (int n = -30; n <= 30; ++n) oracle.push_back(std::abs(n + t));
            std::sort(oracle.begin(), oracle.end());
            oracle.resize(20);
            const std::vector<double> bf{2 * pi * t};
            auto got = eigen_wavenumbers(c, flux_representative(c, bf), oracle.back() + 0.1).wavenumbers();
            got.resize(std::min<std::size_t>(got.size(), 20));
            const double err = spectrum_gap(got, oracle);
            const double secs = seconds_since(t0);
            o.require(err < 1e-8, "circle error at t = " + std::to_string(t));
            o.require(secs < 5, "circle runtime");
            o.detail << "circle t=" << t << " err " << err << "; ";
        }
    });

    report(2, "gauge and flux invariance", [](Outcome& o) {
        std::mt19937_64 rng(2);
        double worst = 0;
        for (const char* name : {"star3", "interval"}) {
            const auto g = load<double>(name, true);
            const auto base = eigen_wavenumbers(g, zero_flux(g), 12.0).wavenumbers();
            for (int trial = 0; trial < 5; ++trial) {
                const FluxForm f{random_phases(rng, g.edge_count())};
                worst = std::max(worst, spectrum_gap(eigen_wavenumbers(g, f, 12.0).wavenumbers(), base));
            }
        }
        o.require(worst < 1e-8, "tree spectra move with the flux");
        double shift = 0;
        for (const auto& name : all_fixtures) {
            const auto g = load<double>(name, true);
            const auto hb = homology_basis(g);
            if (hb.rank() == 0) continue;
            auto bf = random_phases(rng, hb.rank());
            const auto base = eigen_wavenumbers(g, flux_representative(g, hb, bf), 6.0).wavenumbers();
            std::uniform_int_distribution<int> k(-2, 2);
            for (auto& x : bf) x += 2 * pi * k(rng);
            const double d = spectrum_gap(eigen_wavenumbers(g, flux_representative(g, hb, bf), 6.0).wavenumbers(), base);
            o.require(d < 1e-8, std::string("integer shift on ") + name);
            shift = std::max(shift, d);
        }
        o.detail << "tree err " << worst << ", shift err " << shift << "; ";
    });

    report(3, "smoothed trace identity", [](Outcome& o) {
        const std::vector<double> probes{2, 4, 6, 8, 10};
        const auto iv = from_edges<double>(2, {{0, 1}}, {pi});
        MetricGraph<double> c;
        c.add_vertex();
        c.add_edge(0, 0, 2 * pi);
        const std::vector<double> quarter{2 * pi * 0.25};
        const auto k4 = load<double>("k4");
        const auto t0 = Clock::now();
        const double a = smoothed_trace_check(iv, zero_flux(iv), 0.5, probes).max_deviation;
        const double b = smoothed_trace_check(c, flux_representative(c, quarter), 0.5, probes).max_deviation;
        const double d = smoothed_trace_check(k4, zero_flux(k4), 0.5, probes).max_deviation;
        const double secs = seconds_since(t0);
        o.require(a < 1e-2 && b < 1e-2 && d < 1e-2, "deviation");
        o.require(secs < 60, "runtime");
        o.detail << "deviations " << a << ", " << b << ", " << d << "; ";
    });

    report(4, "minimal orbit length vs closed-walk enumeration", [](Outcome& o) {
        std::mt19937_64 rng(4);
        std::vector<MetricGraph<Rational>> graphs{theta(Rational(1), Rational(2), Rational(3)),
                                                  figure8(Rational(2), Rational(3)), complete<Rational>(4),
                                                  load<Rational>("k4_random"), load<Rational>("theta", true),
                                                  load<Rational>("circle", true)};
        std::uniform_int_distribution<int> len(1, 3), edges(3, 6);
        for (int trial = 0; trial < 30; ++trial) {
            const int m = edges(rng), nv = std::max(1, m - 2);
            graphs.push_back(random_graph<Rational>(rng, nv, m - (nv - 1), [&] { return Rational(len(rng)); }));
        }
        int cases = 0, matched = 0;
        for (const auto& g : graphs) {
            const auto hb = homology_basis(g);
            const auto classes = box_classes(hb.rank(), 2);
            std::map<HomologyClass, Rational> got;
            Rational bound(0);
            for (const auto& h : classes) {
                got[h] = minimal_orbit_length(g, hb, h, 0).length;
                bound = std::max(bound, got[h]);
            }
            const auto brute = exhaustive_lengths(g, hb, bound);
            for (const auto& h : classes) {
                ++cases;
                auto it = brute.find(h);
                if (it != brute.end() && it->second == got[h]) ++matched;
            }
        }
        o.require(cases > 0 && matched == cases, "mismatch");
        o.detail << matched << "/" << cases << " classes on " << graphs.size() << " graphs; ";
    });

    report(5, "cosine recovery", [](Outcome& o) {
        std::mt19937_64 rng(5);
        std::uniform_int_distribution<int> count(1, 8);
        std::uniform_real_distribution<double> amp(0.1, 10), gap(0.1, 1.5), off(-10, 10);
        int good = 0;
        for (int trial = 0; trial < 100; ++trial) {
            CosineSum f;
            f.constant = trial % 3 ? off(rng) : 0.0;
            double mu = 0;
            const int n = count(rng);
            for (int j = 0; j < n; ++j) {
                mu += gap(rng);
                f.terms.push_back({mu, amp(rng)});
            }
            const auto fit = recover_cosine_recurrence(f, f.band_bound());
            const auto got = fit.terms_double();
            bool ok = got.size() == f.terms.size() && std::abs(fit.constant.convert_to<double>() - f.constant) < 1e-8;
            for (std::size_t j = 0; ok && j < got.size(); ++j)
                ok = std::abs(got[j].first - f.terms[j].first) < 1e-8 && std::abs(got[j].second - f.terms[j].second) < 1e-8;
            good += ok;
        }
        o.require(good == 100, "recurrence trials");
        o.detail << "recurrence " << good << "/100; ";

        PrecisionScope scope(60);
        int signals = 0, exact_ok = 0;
        const std::vector<std::pair<MetricGraph<Rational>, Rational>> cases{{complete<Rational>(4), Rational(4)},
                                                                           {figure8(Rational(2), Rational(3)), Rational(12)}};
        for (const auto& [g, lmax] : cases) {
            const auto ray = generic_ray(homology_basis(g).rank());
            for (const auto& s : coefficient_signals(g, lmax, ray)) {
                ++signals;
                const auto fit = recover_signal(s, RecoveryMethod::derivative);
                std::vector<std::pair<mp_float, mp_float>> expect;
                for (const auto& [h, nu] : s.terms) expect.push_back({ray_frequency(ray, h), exact(nu)});
                std::sort(expect.begin(), expect.end());
                bool ok = fit.terms.size() == expect.size() && abs(fit.constant - exact(s.constant)) < mp_float("1e-50");
                for (std::size_t j = 0; ok && j < expect.size(); ++j)
                    ok = abs(fit.terms[j].first - expect[j].first) < mp_float("1e-50") &&
                         abs(fit.terms[j].second - expect[j].second) < mp_float("1e-50");
                exact_ok += ok;
            }
        }
        o.require(signals > 0 && exact_ok == signals, "derivative method");
        o.detail << "derivative exact on " << exact_ok << "/" << signals << " signals; ";
    });

    report(6, "spectral table equals oracle table", [](Outcome& o) {
        const Rational lmax(8);
        for (const auto& [name, g] : std::vector<std::pair<std::string, MetricGraph<Rational>>>{
                 {"theta", theta(Rational(1), Rational(2), Rational(3))},
                 {"figure8", figure8(Rational(2), Rational(3))},
                 {"k4", complete<Rational>(4)}}) {
            const int rank = homology_basis(g).rank();
            const auto ray = generic_ray(rank);
            const auto spectral = scan_lengths(coefficient_signals(g, lmax, ray), lmax, RecoveryMethod::derivative, rank);
            const auto oracle = oracle_table(g, lmax, ray);
            bool ok = spectral.entries.size() == oracle.entries.size();
            for (const auto& e : oracle.entries) {
                const FrequencyEntry<Rational>* hit = nullptr;
                for (const auto& s : spectral.entries)
                    if (abs(s.frequency - e.frequency) < mp_float("1e-8")) hit = &s;
                ok = ok && hit && hit->length == e.length;
            }
            o.require(ok, name);
            o.detail << name << " " << spectral.entries.size() << "/" << oracle.entries.size() << "; ";
        }
    });

    report(7, "Albanese Gram from lengths equals the direct Gram", [](Outcome& o) {
        std::mt19937_64 rng(7);
        const std::vector<std::pair<std::string, MetricGraph<Rational>>> graphs{
            {"theta", theta(Rational(1), Rational(2), Rational(3))},
            {"figure8", figure8(Rational(2), Rational(3))},
            {"k4", complete<Rational>(4)},
            {"k4 random", relength(complete<Rational>(4), random_rational_lengths(rng, 6))}};
        int bases = 0;
        for (const auto& [name, g] : graphs) {
            const auto hb = homology_basis(g);
            const auto t = pipeline_table(g);
            std::set<Rational> dets;
            for (const auto& basis : cycle_generator_sets(t)) {
                ++bases;
                std::vector<Cycle> cycles;
                for (const auto& h : basis) cycles.push_back(minimal_orbit_length(g, hb, h).witnesses.front());
                const auto gram = albanese_gram(t, basis).gram;
                o.require(gram == albanese_gram_direct(g, cycles), name + " gram");
                dets.insert(complexity(gram).determinant);
            }
            o.require(dets.size() == 1, name + " determinant varies");
        }
        o.detail << bases << " witness bases; ";
    });

    report(8, "complexity equals spanning tree count", [](Outcome& o) {
        const std::vector<std::tuple<std::string, MetricGraph<Rational>, int>> cases{
            {"k4", complete<Rational>(4), 16}, {"theta", theta(Rational(1), Rational(1), Rational(1)), 3},
            {"cube", cube<Rational>(), 384}};
        for (const auto& [name, g, trees] : cases) {
            const auto t = pipeline_table(g);
            const auto det = complexity(albanese_gram(t, cycle_generator_sets(t, default_cycle_cap(t), 1).front()).gram).determinant;
            o.require(det == Rational(trees) && spanning_tree_count(g) == trees, name);
            o.detail << name << " " << det << "; ";
        }
    });

    report(9, "block structure", [](Outcome& o) {
        for (const char* name : {"two_block_chain", "three_block_chain", "figure8"}) {
            const auto g = load<Rational>(name, true);
            const auto bs = block_structure(pipeline_table(g));
            o.require(block_trees_isomorphic(bs.tree, biconnected_blocks(g)), name);
            o.detail << name << " " << bs.tree.block_count() << " blocks; ";
        }
    });

    report(10, "planarity verdicts", [](Outcome& o) {
        double slowest = 0;
        for (const auto& name : all_fixtures) {
            const auto g = load<Rational>(name, true);
            for (const auto& part : split_graph_components(g)) {
                const auto t0 = Clock::now();
                const auto r = full_pipeline(part.graph);
                const double secs = seconds_since(t0);
                slowest = std::max(slowest, secs);
                o.require(r.planarity.planar == is_planar(part.graph), name);
                o.require(secs < 30, name + " runtime");
            }
            if (name == "k5" || name == "k33") o.require(!full_pipeline(g).planarity.planar, name + " reported planar");
        }
        o.detail << all_fixtures.size() << " fixtures, slowest " << slowest << " s; ";
    });

    report(11, "dual and full round trip", [](Outcome& o) {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> len(0.5, 2.0);
        double float_err = 0;
        for (const auto& base : {complete<Rational>(4), prism<Rational>(), cube<Rational>()}) {
            const auto g = relength(base, random_rational_lengths(rng, base.edge_count()));
            const auto r = full_pipeline(g);
            o.require(r.reconstructed && isomorphic(*r.reconstructed, g, true) && r.max_length_error == 0.0, "rational");
            std::vector<double> ls(base.edge_count());
            for (auto& x : ls) x = len(rng);
            const auto d = base.with_lengths<double>(ls);
            const auto rd = full_pipeline(d);
            o.require(rd.reconstructed && rd.isomorphic.value_or(false) && rd.max_length_error.value_or(1) < 1e-9, "float");
            float_err = std::max(float_err, rd.max_length_error.value_or(1));
        }
        const auto th = load<Rational>("theta", true);
        const auto r = full_pipeline(th);
        o.require(r.dual && r.dual->faces.size() == 3, "theta dual is not a triangle");
        o.require(r.reconstructed && isomorphic(*r.reconstructed, th, true), "theta");
        o.detail << "float max error " << float_err << "; ";
    });

    report(12, "disconnected graph splits and reconstructs per component", [](Outcome& o) {
        const auto f8 = figure8(Rational(2), Rational(3));
        const auto th = theta(Rational(1), Rational(2), Rational(3));
        FluxRay ray;
        for (std::int64_t p : {2, 3, 5, 7}) ray.basis.push_back({Rational(1), p});
        const auto split = split_components(oracle_table(disjoint_union(f8, th), Rational(16), ray, true), 2);
        o.require(split.tables.size() == 2 && split.tree_components == 0, "component count");
        std::vector<bool> claimed(2, false);
        for (const auto& part : split.tables) {
            const auto r = full_pipeline(part);
            bool found = false;
            for (int i = 0; i < 2 && !found; ++i) {
                if (claimed[i]) continue;
                const auto& g = i == 0 ? f8 : th;
                const auto ref = full_pipeline(g);
                bool same = r.rank == ref.rank && r.complexity && ref.complexity &&
                            r.complexity->determinant == ref.complexity->determinant &&
                            block_trees_isomorphic(r.blocks.tree, biconnected_blocks(g));
                if (same && r.reconstructed) same = isomorphic(*r.reconstructed, g, true);
                if (same) claimed[i] = found = true;
            }
            o.require(found, "a component has no match");
        }
        o.detail << split.tables.size() << " tables; ";
    });

    return failures == 0 ? 0 : 1;
}
