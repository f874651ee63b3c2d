#pragma once

// Flat text formats. Graph files are line based:
//   vertex <id>
//   edge <id> <u> <v> <length>
// with '#' starting a comment and lengths given as decimals or p/q.
// Tables are tab separated with a single header line.

#include "qgraph/reconstruction.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace qg {

namespace detail {

inline std::vector<std::string> split_words(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> w;
    for (std::string s; is >> s;) w.push_back(s);
    return w;
}

inline std::string strip_comment(const std::string& line) { return line.substr(0, line.find('#')); }

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open '" + path + "'");
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write '" + path + "'");
    return out;
}

}  // namespace detail

/// Parses a graph without validating it.
template <class T>
MetricGraph<T> parse_graph_text(std::istream& in) {
    MetricGraph<T> g;
    std::set<std::string> edge_ids;
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        const auto w = detail::split_words(detail::strip_comment(line));
        if (w.empty()) continue;
        auto fail = [&](const std::string& what) { throw DomainError("line " + std::to_string(n) + ": " + what); };
        try {
            if (w[0] == "vertex") {
                if (w.size() != 2) fail("expected 'vertex <id>'");
                g.add_vertex(w[1]);
            } else if (w[0] == "edge") {
                if (w.size() != 5) fail("expected 'edge <id> <u> <v> <length>'");
                const auto u = g.find_vertex(w[2]), v = g.find_vertex(w[3]);
                if (!u) fail("unknown vertex '" + w[2] + "'");
                if (!v) fail("unknown vertex '" + w[3] + "'");
                if (!edge_ids.insert(w[1]).second) fail("duplicate edge '" + w[1] + "'");
                g.add_edge(*u, *v, parse_scalar<T>(w[4]), w[1]);
            } else {
                fail("unknown record '" + w[0] + "'");
            }
        } catch (const DomainError& e) {
            const std::string msg = e.what();
            if (msg.rfind("line ", 0) == 0) throw;
            fail(msg);
        }
    }
    return g;
}

/// Parses and validates; every violation is listed in the error.
template <class T>
MetricGraph<T> parse_graph(std::istream& in, bool allow_degree_two = false) {
    auto g = parse_graph_text<T>(in);
    const auto report = validate(g, allow_degree_two);
    if (!report.ok()) {
        std::string msg = "invalid graph:";
        for (const auto& v : report.violations) msg += "\n  " + v;
        throw DomainError(msg);
    }
    return g;
}

template <class T>
MetricGraph<T> read_graph(const std::string& path, bool allow_degree_two = false) {
    auto in = detail::open_in(path);
    return parse_graph<T>(in, allow_degree_two);
}

template <class T>
void write_graph(const MetricGraph<T>& g, std::ostream& out) {
    for (VertexIndex v = 0; v < g.vertex_count(); ++v) out << "vertex " << g.vertex_name(v) << '\n';
    for (const auto& e : g.edges())
        out << "edge " << e.name << ' ' << g.vertex_name(e.u) << ' ' << g.vertex_name(e.v) << ' '
            << format_scalar(e.length) << '\n';
}

template <class T>
std::string graph_text(const MetricGraph<T>& g) {
    std::ostringstream os;
    write_graph(g, os);
    return os.str();
}

struct TableData {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline void emit_table(const TableData& t, std::ostream& out) {
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "\t" : "") << cells[i];
        out << '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) {
        if (r.size() != t.header.size()) throw DomainError("emit_table: row width does not match the header");
        line(r);
    }
}

inline void emit_table(const TableData& t, const std::string& path) {
    auto out = detail::open_out(path);
    emit_table(t, out);
}

inline TableData read_table(std::istream& in) {
    TableData t;
    std::string line;
    auto cells = [](const std::string& s) {
        std::vector<std::string> c;
        std::string cell;
        std::istringstream is(s);
        while (std::getline(is, cell, '\t')) c.push_back(cell);
        if (!s.empty() && s.back() == '\t') c.emplace_back();
        return c;
    };
    if (!std::getline(in, line)) throw DomainError("read_table: missing header");
    t.header = cells(line);
    for (int n = 2; std::getline(in, line); ++n) {
        if (line.empty()) continue;
        t.rows.push_back(cells(line));
        if (t.rows.back().size() != t.header.size())
            throw DomainError("read_table: line " + std::to_string(n) + " has the wrong number of cells");
    }
    return t;
}

/// At most `digits` significant digits, and never more than v carries.
inline std::string format_mp(const mp_float& v, int digits = 40) {
    std::ostringstream os;
    os << std::setprecision(std::min<int>(digits, static_cast<int>(v.precision()))) << v;
    return os.str();
}

inline std::string format_class(const HomologyClass& h) {
    std::string s;
    for (std::size_t i = 0; i < h.size(); ++i) s += (i ? " " : "") + std::to_string(h[i]);
    return s;
}

inline HomologyClass parse_class(const std::string& s) {
    HomologyClass h;
    for (const auto& w : detail::split_words(s)) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(w, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != w.size()) throw DomainError("malformed class coordinate '" + w + "'");
        h.push_back(v);
    }
    return h;
}

/// Frequency table file: '#' metadata lines (rank, lmax, generic, basis), then
/// a TSV block with columns coordinates, frequency, length.
template <class T>
void write_frequency_table(const FrequencyTable<T>& t, std::ostream& out) {
    out << "# rank " << t.rank << '\n';
    out << "# lmax " << format_scalar(t.lmax) << '\n';
    out << "# generic " << (t.generic ? 1 : 0) << '\n';
    if (!t.basis.empty()) {
        out << "# basis";
        for (const auto& b : t.basis) out << ' ' << format_mp(b);
        out << '\n';
    }
    TableData d{{"coordinates", "frequency", "length"}, {}};
    for (const auto& e : t.entries) d.rows.push_back({format_class(e.coordinates), format_mp(e.frequency), format_scalar(e.length)});
    emit_table(d, out);
}

template <class T>
FrequencyTable<T> read_frequency_table(std::istream& in) {
    FrequencyTable<T> t;
    std::ostringstream body;
    bool have_rank = false, have_lmax = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind('#', 0) != 0) {
            body << line << '\n';
            break;
        }
        const auto w = detail::split_words(line.substr(1));
        if (w.empty()) continue;
        if (w[0] == "rank" && w.size() == 2) {
            t.rank = std::stoi(w[1]);
            have_rank = true;
        } else if (w[0] == "lmax" && w.size() == 2) {
            t.lmax = parse_scalar<T>(w[1]);
            have_lmax = true;
        } else if (w[0] == "generic" && w.size() == 2) {
            t.generic = w[1] == "1";
        } else if (w[0] == "basis") {
            for (std::size_t i = 1; i < w.size(); ++i) t.basis.emplace_back(w[i]);
        }
    }
    if (!have_rank || !have_lmax) throw DomainError("frequency table: missing '# rank' or '# lmax' line");
    body << in.rdbuf();
    std::istringstream bs(body.str());
    const auto d = read_table(bs);
    if (d.header != std::vector<std::string>{"coordinates", "frequency", "length"})
        throw DomainError("frequency table: expected columns coordinates, frequency, length");
    for (const auto& r : d.rows) {
        auto h = parse_class(r[0]);
        if (static_cast<int>(h.size()) != t.rank) throw DomainError("frequency table: class '" + r[0] + "' has the wrong rank");
        t.add({std::move(h), mp_float(r[1]), parse_scalar<T>(r[2])});
    }
    detail::sort_entries(t);
    return t;
}

template <class T>
FrequencyTable<T> read_frequency_table(const std::string& path) {
    auto in = detail::open_in(path);
    return read_frequency_table<T>(in);
}

template <class T>
void write_report(const ReconstructionReport<T>& r, std::ostream& out) {
    auto yes = [](bool b) { return b ? "yes" : "no"; };
    out << "rank: " << r.rank << '\n';
    if (r.rank > 0) out << "cycle cap: " << format_scalar(r.cycle_cap) << '\n';
    if (r.gram) {
        out << "albanese gram:\n";
        for (const auto& row : r.gram->gram) {
            out << ' ';
            for (const auto& x : row) out << ' ' << format_scalar(x);
            out << '\n';
        }
        out << "basis:";
        for (const auto& h : r.gram->basis) out << " (" << format_class(h) << ")";
        out << '\n';
    }
    if (r.complexity) {
        out << "complexity det: " << format_scalar(r.complexity->determinant) << '\n';
        out << "complexity det^(1/4): " << format_scalar(r.complexity->fourth_root) << '\n';
    }
    out << "blocks: " << r.blocks.tree.block_count() << '\n';
    for (const auto& n : r.blocks.tree.nodes)
        out << "  " << (n.is_block ? "block dim " + std::to_string(n.dimension) : std::string("junction")) << '\n';
    for (const auto& l : r.blocks.tree.links)
        out << "  link " << l.a << " - " << l.b << " length " << format_scalar(l.length) << '\n';
    out << "planar: " << yes(r.planarity.planar) << '\n';
    if (r.planarity.planar && !r.planarity.witness.empty()) {
        out << "witness:";
        for (const auto& h : r.planarity.witness) out << " (" << format_class(h) << ")";
        out << '\n';
    }
    if (r.dual) {
        out << "dual: " << r.dual->faces.size() << " vertices, " << r.dual->edge_count() << " edges\n";
        for (std::size_t i = 0; i < r.dual->multiplicity.size(); ++i) {
            out << ' ';
            for (int m : r.dual->multiplicity[i]) out << ' ' << m;
            out << '\n';
        }
    }
    if (r.combinatorial) out << "3-connected: " << yes(r.combinatorial->three_connected) << '\n';
    if (r.reconstructed) out << "reconstructed graph:\n" << graph_text(*r.reconstructed);
    for (const auto& s : r.stages) out << "stage: " << s << '\n';
    if (r.planarity_matches) out << "check planarity: " << yes(*r.planarity_matches) << '\n';
    if (r.blocks_match) out << "check blocks: " << yes(*r.blocks_match) << '\n';
    if (r.isomorphic) out << "check isomorphic: " << yes(*r.isomorphic) << '\n';
    if (r.max_length_error) out << "check max length error: " << format_scalar(*r.max_length_error) << '\n';
}

}  // namespace qg
