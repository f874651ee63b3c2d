#pragma once

#include "qgraph/scalar.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace qg {

using VertexIndex = int;
using EdgeIndex = int;
/// Oriented edge. Bond 2e runs u -> v, bond 2e+1 runs v -> u.
using BondIndex = int;

constexpr BondIndex forward_bond(EdgeIndex e) { return 2 * e; }
constexpr BondIndex backward_bond(EdgeIndex e) { return 2 * e + 1; }
constexpr BondIndex reverse(BondIndex b) { return b ^ 1; }
constexpr EdgeIndex edge_of(BondIndex b) { return b >> 1; }
constexpr int bond_sign(BondIndex b) { return (b & 1) ? -1 : 1; }

template <class T>
struct Edge {
    std::string name;
    VertexIndex u = 0;
    VertexIndex v = 0;
    T length{};
};

/// Finite multigraph with positive edge lengths. Loops and parallel edges are
/// allowed. Vertices and edges are addressed by dense indices; the names only
/// matter for file round trips.
template <class T>
class MetricGraph {
public:
    using scalar_type = T;

    MetricGraph() = default;

    VertexIndex add_vertex(std::string name = {}) {
        if (name.empty()) name = std::to_string(vertex_names_.size());
        if (vertex_lookup_.count(name)) throw DomainError("duplicate vertex '" + name + "'");
        vertex_lookup_.emplace(name, static_cast<VertexIndex>(vertex_names_.size()));
        vertex_names_.push_back(std::move(name));
        return static_cast<VertexIndex>(vertex_names_.size() - 1);
    }

    EdgeIndex add_edge(VertexIndex u, VertexIndex v, T length, std::string name = {}) {
        if (u < 0 || v < 0 || u >= vertex_count() || v >= vertex_count())
            throw DomainError("edge endpoint does not exist");
        if (name.empty()) name = std::to_string(edges_.size());
        edges_.push_back(Edge<T>{std::move(name), u, v, std::move(length)});
        return static_cast<EdgeIndex>(edges_.size() - 1);
    }

    int vertex_count() const { return static_cast<int>(vertex_names_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    int bond_count() const { return 2 * edge_count(); }

    const Edge<T>& edge(EdgeIndex e) const { return edges_.at(e); }
    const std::vector<Edge<T>>& edges() const { return edges_; }
    const std::string& vertex_name(VertexIndex v) const { return vertex_names_.at(v); }
    std::optional<VertexIndex> find_vertex(const std::string& name) const {
        auto it = vertex_lookup_.find(name);
        if (it == vertex_lookup_.end()) return std::nullopt;
        return it->second;
    }

    VertexIndex origin(BondIndex b) const {
        const auto& e = edges_[edge_of(b)];
        return (b & 1) ? e.v : e.u;
    }
    VertexIndex terminal(BondIndex b) const {
        const auto& e = edges_[edge_of(b)];
        return (b & 1) ? e.u : e.v;
    }
    const T& length(EdgeIndex e) const { return edges_[e].length; }
    const T& bond_length(BondIndex b) const { return edges_[edge_of(b)].length; }

    /// Loops contribute 2.
    int degree(VertexIndex v) const {
        int d = 0;
        for (const auto& e : edges_) d += (e.u == v) + (e.v == v);
        return d;
    }

    std::vector<int> degrees() const {
        std::vector<int> d(vertex_count(), 0);
        for (const auto& e : edges_) {
            ++d[e.u];
            ++d[e.v];
        }
        return d;
    }

    /// Bonds leaving each vertex, in edge order (forward before backward).
    std::vector<std::vector<BondIndex>> outgoing() const {
        std::vector<std::vector<BondIndex>> out(vertex_count());
        for (BondIndex b = 0; b < bond_count(); ++b) out[origin(b)].push_back(b);
        return out;
    }

    T total_length() const {
        T sum = scalar_traits<T>::from_int(0);
        for (const auto& e : edges_) sum += e.length;
        return sum;
    }

    int euler_characteristic() const { return vertex_count() - edge_count(); }

    /// Same combinatorics, lengths replaced.
    template <class U>
    MetricGraph<U> with_lengths(std::span<const U> lengths) const {
        if (static_cast<int>(lengths.size()) != edge_count()) throw DomainError("length vector size mismatch");
        MetricGraph<U> g;
        for (const auto& n : vertex_names_) g.add_vertex(n);
        for (int e = 0; e < edge_count(); ++e) g.add_edge(edges_[e].u, edges_[e].v, lengths[e], edges_[e].name);
        return g;
    }

    MetricGraph<double> to_double_graph() const {
        std::vector<double> ls;
        for (const auto& e : edges_) ls.push_back(qg::to_double(e.length));
        return with_lengths<double>(ls);
    }

private:
    std::vector<std::string> vertex_names_;
    std::unordered_map<std::string, VertexIndex> vertex_lookup_;
    std::vector<Edge<T>> edges_;
};

/// Component label per vertex, labels 0..count-1 in order of first vertex.
struct Components {
    std::vector<int> label;
    int count = 0;
};

template <class T>
Components connected_components(const MetricGraph<T>& g) {
    Components c;
    c.label.assign(g.vertex_count(), -1);
    const auto out = g.outgoing();
    for (VertexIndex s = 0; s < g.vertex_count(); ++s) {
        if (c.label[s] >= 0) continue;
        std::vector<VertexIndex> stack{s};
        c.label[s] = c.count;
        while (!stack.empty()) {
            const VertexIndex v = stack.back();
            stack.pop_back();
            for (BondIndex b : out[v]) {
                const VertexIndex w = g.terminal(b);
                if (c.label[w] < 0) {
                    c.label[w] = c.count;
                    stack.push_back(w);
                }
            }
        }
        ++c.count;
    }
    return c;
}

template <class T>
bool is_connected(const MetricGraph<T>& g) {
    return g.vertex_count() > 0 && connected_components(g).count == 1;
}

template <class T>
struct ValidationReport {
    std::vector<int> degrees;
    int components = 0;
    T total_length{};
    int euler_characteristic = 0;
    int first_betti = 0;  // dim H1, computed componentwise
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

/// Collects every violation instead of stopping at the first one.
template <class T>
ValidationReport<T> validate(const MetricGraph<T>& g, bool allow_degree_two = false) {
    using tr = scalar_traits<T>;
    ValidationReport<T> r;
    r.degrees = g.degrees();
    const auto comps = connected_components(g);
    r.components = comps.count;
    r.total_length = g.total_length();
    r.euler_characteristic = g.euler_characteristic();
    r.first_betti = g.edge_count() - g.vertex_count() + comps.count;
    for (const auto& e : g.edges()) {
        if (!(e.length > tr::from_int(0)) || !std::isfinite(tr::to_double(e.length)))
            r.violations.push_back("edge '" + e.name + "' has nonpositive or non-finite length");
    }
    if (!allow_degree_two) {
        for (VertexIndex v = 0; v < g.vertex_count(); ++v)
            if (r.degrees[v] == 2)
                r.violations.push_back("vertex '" + g.vertex_name(v) + "' has degree 2");
    }
    return r;
}

/// Cyclic bond sequence. For a graph-theoretic cycle no vertex or edge repeats;
/// the same container is used for closed walks in general.
struct Cycle {
    std::vector<BondIndex> bonds;

    std::size_t size() const { return bonds.size(); }
    bool operator==(const Cycle&) const = default;
};

template <class T>
T walk_length(const MetricGraph<T>& g, std::span<const BondIndex> bonds) {
    T sum = scalar_traits<T>::from_int(0);
    for (BondIndex b : bonds) sum += g.bond_length(b);
    return sum;
}

template <class T>
bool is_closed_walk(const MetricGraph<T>& g, std::span<const BondIndex> bonds) {
    if (bonds.empty()) return false;
    for (std::size_t i = 0; i < bonds.size(); ++i)
        if (g.terminal(bonds[i]) != g.origin(bonds[(i + 1) % bonds.size()])) return false;
    return true;
}

template <class T>
bool is_simple_cycle(const MetricGraph<T>& g, const Cycle& c) {
    if (!is_closed_walk<T>(g, c.bonds)) return false;
    std::vector<char> seen_v(g.vertex_count(), 0), seen_e(g.edge_count(), 0);
    for (BondIndex b : c.bonds) {
        if (seen_e[edge_of(b)]++) return false;
        if (seen_v[g.origin(b)]++) return false;
    }
    return true;
}

/// Signed edge usage of a walk: +1 per forward traversal, -1 per backward.
inline std::vector<int> edge_chain(int edge_count, std::span<const BondIndex> bonds) {
    std::vector<int> z(edge_count, 0);
    for (BondIndex b : bonds) z[edge_of(b)] += bond_sign(b);
    return z;
}

/// Spanning forest plus one fundamental cycle per non-tree edge. The coordinate
/// of a closed walk is its signed usage count of each non-tree edge.
struct HomologyBasis {
    std::vector<char> tree_edge;          // per edge
    std::vector<EdgeIndex> cotree_edges;  // axis i -> edge
    std::vector<int> axis_of_edge;        // edge -> axis or -1
    std::vector<Cycle> cycles;            // basis cycle i traverses cotree edge i forward
    std::vector<int> component_of_axis;

    int rank() const { return static_cast<int>(cotree_edges.size()); }

    std::vector<int> coordinates(std::span<const BondIndex> bonds) const {
        std::vector<int> h(rank(), 0);
        for (BondIndex b : bonds) {
            const int a = axis_of_edge[edge_of(b)];
            if (a >= 0) h[a] += bond_sign(b);
        }
        return h;
    }

    std::vector<int> coordinates_of_chain(std::span<const int> chain) const {
        std::vector<int> h(rank(), 0);
        for (int i = 0; i < rank(); ++i) h[i] = chain[cotree_edges[i]];
        return h;
    }

    /// The unique cycle-space chain with the given coordinates.
    std::vector<int> chain_of(std::span<const int> h, int edge_count) const {
        std::vector<int> z(edge_count, 0);
        for (int i = 0; i < rank(); ++i) {
            if (h[i] == 0) continue;
            for (BondIndex b : cycles[i].bonds) z[edge_of(b)] += h[i] * bond_sign(b);
        }
        return z;
    }
};

/// BFS spanning forest, edges visited in index order. Works on disconnected
/// graphs; loops are never tree edges.
template <class T>
HomologyBasis homology_basis(const MetricGraph<T>& g) {
    HomologyBasis hb;
    const int n_e = g.edge_count();
    hb.tree_edge.assign(n_e, 0);
    hb.axis_of_edge.assign(n_e, -1);
    std::vector<BondIndex> parent_bond(g.vertex_count(), -1);
    std::vector<int> depth(g.vertex_count(), -1);
    std::vector<int> comp(g.vertex_count(), -1);
    const auto out = g.outgoing();
    int comp_count = 0;
    for (VertexIndex s = 0; s < g.vertex_count(); ++s) {
        if (depth[s] >= 0) continue;
        depth[s] = 0;
        comp[s] = comp_count;
        std::queue<VertexIndex> q;
        q.push(s);
        while (!q.empty()) {
            const VertexIndex v = q.front();
            q.pop();
            for (BondIndex b : out[v]) {
                const VertexIndex w = g.terminal(b);
                if (depth[w] >= 0) continue;
                depth[w] = depth[v] + 1;
                comp[w] = comp_count;
                parent_bond[w] = b;
                hb.tree_edge[edge_of(b)] = 1;
                q.push(w);
            }
        }
        ++comp_count;
    }
    // tree path from x up to the root as bonds pointing towards the root
    auto climb = [&](VertexIndex x, VertexIndex y) {
        // bonds x -> lca and lca -> y
        std::vector<BondIndex> up, down;
        while (depth[x] > depth[y]) {
            up.push_back(reverse(parent_bond[x]));
            x = g.origin(parent_bond[x]);
        }
        while (depth[y] > depth[x]) {
            down.push_back(parent_bond[y]);
            y = g.origin(parent_bond[y]);
        }
        while (x != y) {
            up.push_back(reverse(parent_bond[x]));
            x = g.origin(parent_bond[x]);
            down.push_back(parent_bond[y]);
            y = g.origin(parent_bond[y]);
        }
        std::reverse(down.begin(), down.end());
        up.insert(up.end(), down.begin(), down.end());
        return up;
    };
    for (EdgeIndex e = 0; e < n_e; ++e) {
        if (hb.tree_edge[e]) continue;
        hb.axis_of_edge[e] = hb.rank();
        hb.cotree_edges.push_back(e);
        hb.component_of_axis.push_back(comp[g.edge(e).u]);
        Cycle c;
        c.bonds.push_back(forward_bond(e));
        const auto path = climb(g.edge(e).v, g.edge(e).u);
        c.bonds.insert(c.bonds.end(), path.begin(), path.end());
        hb.cycles.push_back(std::move(c));
    }
    return hb;
}

/// Connected graphs only; disconnected input has to be split by the caller.
template <class T>
HomologyBasis fundamental_cycle_basis(const MetricGraph<T>& g) {
    if (!is_connected(g))
        throw DomainError("fundamental_cycle_basis: graph is disconnected; split it into components first");
    return homology_basis(g);
}

/// Subgraph induced by one component label, with index maps back to g.
template <class T>
struct ComponentGraph {
    MetricGraph<T> graph;
    std::vector<VertexIndex> vertex_map;  // local -> global
    std::vector<EdgeIndex> edge_map;
};

template <class T>
std::vector<ComponentGraph<T>> split_graph_components(const MetricGraph<T>& g) {
    const auto comps = connected_components(g);
    std::vector<ComponentGraph<T>> parts(comps.count);
    std::vector<VertexIndex> local(g.vertex_count());
    for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
        auto& p = parts[comps.label[v]];
        local[v] = p.graph.add_vertex(g.vertex_name(v));
        p.vertex_map.push_back(v);
    }
    for (EdgeIndex e = 0; e < g.edge_count(); ++e) {
        const auto& ed = g.edge(e);
        auto& p = parts[comps.label[ed.u]];
        p.graph.add_edge(local[ed.u], local[ed.v], ed.length, ed.name);
        p.edge_map.push_back(e);
    }
    return parts;
}

/// Disjoint union; vertex names are prefixed to stay unique.
template <class T>
MetricGraph<T> disjoint_union(const MetricGraph<T>& a, const MetricGraph<T>& b) {
    MetricGraph<T> g;
    for (VertexIndex v = 0; v < a.vertex_count(); ++v) g.add_vertex("a." + a.vertex_name(v));
    for (VertexIndex v = 0; v < b.vertex_count(); ++v) g.add_vertex("b." + b.vertex_name(v));
    for (const auto& e : a.edges()) g.add_edge(e.u, e.v, e.length, "a." + e.name);
    for (const auto& e : b.edges()) g.add_edge(e.u + a.vertex_count(), e.v + a.vertex_count(), e.length, "b." + e.name);
    return g;
}

}  // namespace qg
