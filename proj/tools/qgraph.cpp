// qgraph: command-line front end for the forward simulation and the inverse
// pipeline. Exit status 0 on success, 1 on a domain error, 2 on a usage error.

#include "qgraph/qgraph.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>

namespace {

using namespace qg;

struct Options {
    bool rational = false;
    bool allow_degree_two = false;
    std::string graph;
    std::string out;
    std::string flux;
    std::string ray;
    std::string probes = "1,2,3,4,5";
    std::string input = "oracle";
    std::string method = "recurrence";
    std::string table;
    double kmax = 10;
    double sigma = 0.5;
    double tmax = 10;
    int samples = 101;
    std::string lmax = "6";
    std::uint64_t seed = 0;
    int zero_modes = -1;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(s);
    while (std::getline(is, cell, ',')) {
        if (!cell.empty()) out.push_back(cell);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> v;
    for (const auto& c : split_list(s)) v.push_back(parse_double(c));
    return v;
}

/// Writes to --out when given, else to stdout.
template <class F>
void emit(const Options& o, F&& write) {
    if (o.out.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream f(o.out);
    if (!f) throw DomainError("cannot write '" + o.out + "'");
    write(f);
}

/// "2,3,5" gives the basis fluxes sqrt(2), sqrt(3), sqrt(5); a term "p/q*r"
/// scales sqrt(r) by p/q.
FluxRay parse_ray(const std::string& s, int rank) {
    if (s.empty()) return generic_ray(rank);
    FluxRay r;
    for (const auto& c : split_list(s)) {
        RayComponent rc;
        const auto star = c.find('*');
        const std::string rad = star == std::string::npos ? c : c.substr(star + 1);
        if (star != std::string::npos) rc.coef = parse_rational(c.substr(0, star));
        rc.radicand = std::stoll(rad);
        if (rc.radicand < 1) throw DomainError("ray radicands must be positive");
        r.basis.push_back(rc);
    }
    if (r.rank() != rank)
        throw DomainError("ray has " + std::to_string(r.rank()) + " components, the graph has rank " + std::to_string(rank));
    return r;
}

template <class T>
MetricGraph<T> load(const Options& o) {
    return read_graph<T>(o.graph, o.allow_degree_two);
}

template <class T>
int cmd_validate(const Options& o) {
    auto in = detail::open_in(o.graph);
    const auto g = parse_graph_text<T>(in);
    const auto r = validate(g, o.allow_degree_two);
    std::cout << "vertices: " << g.vertex_count() << "\nedges: " << g.edge_count() << "\ncomponents: " << r.components
              << "\ntotal length: " << format_scalar(r.total_length) << "\neuler characteristic: " << r.euler_characteristic
              << "\nfirst betti number: " << r.first_betti << '\n';
    for (const auto& v : r.violations) std::cout << "violation: " << v << '\n';
    std::cout << (r.ok() ? "valid" : "invalid") << '\n';
    return r.ok() ? 0 : 1;
}

template <class T>
FluxForm flux_of(const Options& o, const MetricGraph<T>& g) {
    if (o.flux.empty()) return zero_flux(g);
    const auto fluxes = parse_doubles(o.flux);
    if (static_cast<int>(fluxes.size()) != homology_basis(g).rank())
        throw DomainError("--flux needs one value per basis cycle (" + std::to_string(homology_basis(g).rank()) + ")");
    return flux_representative(g, fluxes);
}

template <class T>
int cmd_spectrum(const Options& o) {
    const auto g = load<T>(o);
    const auto slice = eigen_wavenumbers(g, flux_of(o, g), o.kmax);
    for (const auto& w : slice.warnings) std::cerr << "warning: " << w << '\n';
    TableData t{{"k", "multiplicity"}, {}};
    for (const auto& [k, m] : slice.roots) t.rows.push_back({format_scalar(k), std::to_string(m)});
    emit(o, [&](std::ostream& os) { emit_table(t, os); });
    return 0;
}

template <class T>
int cmd_orbits(const Options& o) {
    const auto g = load<T>(o);
    const auto buckets = enumerate_orbits(g, parse_scalar<T>(o.lmax));
    TableData t{{"length", "primitive_length", "repetitions", "class", "bonds"}, {}};
    for (const auto& b : buckets)
        for (const auto& p : b.orbits) {
            std::string bonds;
            for (BondIndex x : p.bonds) bonds += (bonds.empty() ? "" : " ") + g.edge(edge_of(x)).name + (x & 1 ? "-" : "+");
            t.rows.push_back({format_scalar(p.length), format_scalar(p.primitive_length), std::to_string(p.repetitions),
                              format_class(p.cls), bonds});
        }
    emit(o, [&](std::ostream& os) { emit_table(t, os); });
    return 0;
}

template <class T>
int cmd_trace_check(const Options& o) {
    const auto g = load<T>(o);
    const auto tc = smoothed_trace_check(g, flux_of(o, g), o.sigma, parse_doubles(o.probes));
    TableData t{{"probe", "spectral", "geometric"}, {}};
    for (std::size_t i = 0; i < tc.probes.size(); ++i)
        t.rows.push_back({format_scalar(tc.probes[i]), format_scalar(tc.spectral[i]), format_scalar(tc.geometric[i])});
    emit(o, [&](std::ostream& os) { emit_table(t, os); });
    std::cerr << "max deviation: " << format_scalar(tc.max_deviation) << " (k_max " << format_scalar(tc.k_max)
              << ", l_max " << format_scalar(tc.l_max) << ", " << tc.orbit_count << " orbits)\n";
    return 0;
}

template <class T>
int cmd_signals(const Options& o) {
    const auto g = load<T>(o);
    const auto ray = parse_ray(o.ray, homology_basis(g).rank());
    const auto signals = coefficient_signals(g, parse_scalar<T>(o.lmax), ray);
    TableData t{{"length", "t", "value"}, {}};
    const int n = std::max(o.samples, 2);
    for (const auto& s : signals)
        for (int i = 0; i < n; ++i) {
            const double x = o.tmax * i / (n - 1);
            t.rows.push_back({format_scalar(s.length), format_scalar(x), format_scalar(static_cast<double>(s(mp_float(x))))});
        }
    emit(o, [&](std::ostream& os) { emit_table(t, os); });
    return 0;
}

template <class T>
int cmd_recover(const Options& o) {
    const auto g = load<T>(o);
    const T lmax = parse_scalar<T>(o.lmax);
    const auto ray = parse_ray(o.ray, homology_basis(g).rank());
    FrequencyTable<T> t;
    if (o.input == "oracle") {
        t = oracle_table(g, lmax, ray);
    } else if (o.input == "signals") {
        const auto method = o.method == "derivative" ? RecoveryMethod::derivative : RecoveryMethod::recurrence;
        t = scan_lengths(coefficient_signals(g, lmax, ray), lmax, method, ray.rank());
    } else {
        throw DomainError("--in must be 'signals' or 'oracle'");
    }
    emit(o, [&](std::ostream& os) { write_frequency_table(t, os); });
    const int zero = zero_mode_multiplicity(g, zero_flux(g));
    const auto split = split_components(t, zero);
    std::cerr << "rank " << t.rank << ", " << t.entries.size() << " frequencies, " << split.tables.size()
              << " component(s) with cycles, " << split.tree_components << " tree component(s)"
              << (t.generic ? "" : ", ray not generic") << '\n';
    return 0;
}

template <class T>
MetricGraph<T> renamed(const MetricGraph<T>& g, const std::string& prefix) {
    MetricGraph<T> h;
    for (VertexIndex v = 0; v < g.vertex_count(); ++v) h.add_vertex(prefix + g.vertex_name(v));
    for (const auto& e : g.edges()) h.add_edge(e.u, e.v, e.length, prefix + e.name);
    return h;
}

template <class T>
int cmd_reconstruct(const Options& o) {
    const auto t = read_frequency_table<T>(o.table);
    std::vector<FrequencyTable<T>> parts{t};
    if (t.rank > 0) {
        auto split = split_components(t, o.zero_modes >= 0 ? o.zero_modes : std::numeric_limits<int>::max() / 2);
        parts = std::move(split.tables);
        if (o.zero_modes >= 0) std::cout << "tree components: " << split.tree_components << '\n';
    }
    std::vector<MetricGraph<T>> graphs;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts.size() > 1) std::cout << "component " << i << ":\n";
        const auto r = full_pipeline(parts[i]);
        write_report(r, std::cout);
        if (r.reconstructed) graphs.push_back(parts.size() > 1 ? renamed(*r.reconstructed, "c" + std::to_string(i) + ".") : *r.reconstructed);
    }
    if (!o.out.empty()) {
        if (graphs.size() != parts.size()) throw DomainError("not every component was reconstructed; no graph file written");
        emit(o, [&](std::ostream& os) {
            for (const auto& g : graphs) write_graph(g, os);
        });
    }
    return 0;
}

/// Vertex and edge order shuffled by the seed; the pipeline must not care.
template <class T>
MetricGraph<T> shuffled(const MetricGraph<T>& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<VertexIndex> vp(g.vertex_count());
    std::vector<EdgeIndex> ep(g.edge_count());
    std::iota(vp.begin(), vp.end(), 0);
    std::iota(ep.begin(), ep.end(), 0);
    std::shuffle(vp.begin(), vp.end(), rng);
    std::shuffle(ep.begin(), ep.end(), rng);
    std::vector<VertexIndex> where(g.vertex_count());
    MetricGraph<T> h;
    for (VertexIndex v : vp) where[v] = h.add_vertex(g.vertex_name(v));
    for (EdgeIndex e : ep) {
        const auto& x = g.edge(e);
        h.add_edge(where[x.u], where[x.v], x.length, x.name);
    }
    return h;
}

template <class T>
int cmd_roundtrip(const Options& o) {
    const auto g = shuffled(load<T>(o), o.seed);
    const auto comps = split_graph_components(g);
    bool ok = true;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (comps.size() > 1) std::cout << "component " << i << ":\n";
        const auto r = full_pipeline(comps[i].graph);
        write_report(r, std::cout);
        ok = ok && r.planarity_matches.value_or(true) && r.blocks_match.value_or(true) && r.isomorphic.value_or(true);
        std::cout << "summary: "
                  << (r.isomorphic ? (*r.isomorphic ? "isomorphic" : "NOT isomorphic")
                                   : (r.planarity.planar ? "planar" : "nonplanar"))
                  << (r.max_length_error ? ", max error " + format_scalar(*r.max_length_error) : std::string()) << '\n';
    }
    return ok ? 0 : 1;
}

template <class T>
int dispatch(const std::string& cmd, const Options& o) {
    if (cmd == "validate") return cmd_validate<T>(o);
    if (cmd == "spectrum") return cmd_spectrum<T>(o);
    if (cmd == "orbits") return cmd_orbits<T>(o);
    if (cmd == "trace-check") return cmd_trace_check<T>(o);
    if (cmd == "signals") return cmd_signals<T>(o);
    if (cmd == "recover") return cmd_recover<T>(o);
    if (cmd == "reconstruct") return cmd_reconstruct<T>(o);
    return cmd_roundtrip<T>(o);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum graph Bloch spectra and the inverse reconstruction pipeline"};
    app.require_subcommand(1);
    Options o;
    app.add_flag("--rational", o.rational, "exact rational arithmetic")->configurable(false);
    app.add_flag("--allow-degree-two", o.allow_degree_two, "accept vertices of degree 2");
    app.fallthrough();

    auto graph_cmd = [&](const char* name, const char* help) {
        auto* c = app.add_subcommand(name, help);
        c->add_option("graph", o.graph, "graph file")->required()->check(CLI::ExistingFile);
        c->add_option("-o,--out", o.out, "output file (default stdout)");
        return c;
    };
    graph_cmd("validate", "check a graph file");
    auto* spectrum = graph_cmd("spectrum", "eigen-wavenumbers with multiplicities");
    spectrum->add_option("--flux", o.flux, "basis fluxes in radians, comma separated");
    spectrum->add_option("--kmax", o.kmax, "upper wavenumber")->check(CLI::PositiveNumber);
    auto* orbits = graph_cmd("orbits", "periodic orbits up to a length");
    orbits->add_option("--lmax", o.lmax, "maximal length");
    auto* trace = graph_cmd("trace-check", "smoothed trace formula, both sides");
    trace->add_option("--flux", o.flux, "basis fluxes in radians, comma separated");
    trace->add_option("--sigma", o.sigma, "Gaussian width")->check(CLI::PositiveNumber);
    trace->add_option("--probes", o.probes, "probe points, comma separated");
    auto* signals = graph_cmd("signals", "coefficient signals A^l(t) along a flux ray");
    signals->add_option("--ray", o.ray, "radicands of the basis fluxes, e.g. 2,3,5");
    signals->add_option("--lmax", o.lmax, "maximal length");
    signals->add_option("--tmax", o.tmax, "largest ray parameter");
    signals->add_option("--samples", o.samples, "samples per signal");
    auto* recover = graph_cmd("recover", "frequency table from signals or the oracle");
    recover->add_option("--in", o.input, "signals or oracle")->check(CLI::IsMember({"signals", "oracle"}));
    recover->add_option("--lmax", o.lmax, "maximal length");
    recover->add_option("--ray", o.ray, "radicands of the basis fluxes, e.g. 2,3,5");
    recover->add_option("--method", o.method, "derivative or recurrence")->check(CLI::IsMember({"derivative", "recurrence"}));
    auto* reconstruct = app.add_subcommand("reconstruct", "inverse pipeline on a frequency table");
    reconstruct->add_option("--table", o.table, "frequency table file")->required()->check(CLI::ExistingFile);
    reconstruct->add_option("--zero-modes", o.zero_modes, "multiplicity of k = 0, to count tree components");
    reconstruct->add_option("-o,--out", o.out, "write the reconstructed graph here");
    auto* roundtrip = graph_cmd("roundtrip", "forward in oracle mode, then the inverse pipeline");
    roundtrip->add_option("--seed", o.seed, "shuffles vertex and edge order");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        return o.rational ? dispatch<Rational>(cmd, o) : dispatch<double>(cmd, o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
