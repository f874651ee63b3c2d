#pragma once

// Planarity oracle and rotation systems. The multigraph is subdivided into a
// simple graph (loops become triangles, repeated edges get a midpoint) so that
// Boost's Boyer-Myrvold test applies; the rotation at original vertices is
// read back onto bonds.

#include "qgraph/metric_graph.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boyer_myrvold_planar_test.hpp>
#include <boost/graph/graph_traits.hpp>

#include <map>
#include <set>

namespace qg {

/// Cyclic order of outgoing bonds at each vertex.
struct RotationSystem {
    std::vector<std::vector<BondIndex>> order;
};

namespace detail {

using SimpleGraph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS,
                                          boost::property<boost::vertex_index_t, int>,
                                          boost::property<boost::edge_index_t, int>>;

template <class T>
struct Subdivision {
    SimpleGraph graph;
    // (simple edge index, original endpoint) -> bond leaving that endpoint
    std::map<std::pair<int, int>, BondIndex> bond_at;
};

template <class T>
Subdivision<T> subdivide(const MetricGraph<T>& g) {
    Subdivision<T> s;
    s.graph = SimpleGraph(g.vertex_count());
    int next_vertex = g.vertex_count();
    int next_edge = 0;
    auto add = [&](int a, int b) {
        auto [e, ok] = boost::add_edge(a, b, s.graph);
        boost::put(boost::edge_index, s.graph, e, next_edge);
        return next_edge++;
    };
    std::set<std::pair<int, int>> direct;
    for (EdgeIndex e = 0; e < g.edge_count(); ++e) {
        const auto& ed = g.edge(e);
        if (ed.u == ed.v) {
            const int a = next_vertex++, b = next_vertex++;
            boost::add_vertex(s.graph);
            boost::add_vertex(s.graph);
            s.bond_at[{add(ed.u, a), ed.u}] = forward_bond(e);
            add(a, b);
            s.bond_at[{add(b, ed.u), ed.u}] = backward_bond(e);
            continue;
        }
        const auto key = std::minmax(ed.u, ed.v);
        if (direct.insert({key.first, key.second}).second) {
            const int id = add(ed.u, ed.v);
            s.bond_at[{id, ed.u}] = forward_bond(e);
            s.bond_at[{id, ed.v}] = backward_bond(e);
        } else {
            const int mid = next_vertex++;
            boost::add_vertex(s.graph);
            s.bond_at[{add(ed.u, mid), ed.u}] = forward_bond(e);
            s.bond_at[{add(mid, ed.v), ed.v}] = backward_bond(e);
        }
    }
    return s;
}

}  // namespace detail

/// Combinatorial planarity oracle.
template <class T>
bool is_planar(const MetricGraph<T>& g) {
    auto s = detail::subdivide(g);
    return boost::boyer_myrvold_planarity_test(s.graph);
}

/// Planar rotation system, or nullopt for nonplanar graphs.
template <class T>
std::optional<RotationSystem> planar_embedding(const MetricGraph<T>& g) {
    using namespace boost;
    auto s = detail::subdivide(g);
    using EdgeDesc = graph_traits<detail::SimpleGraph>::edge_descriptor;
    std::vector<std::vector<EdgeDesc>> emb(num_vertices(s.graph));
    const bool planar = boyer_myrvold_planarity_test(
        boyer_myrvold_params::graph = s.graph,
        boyer_myrvold_params::embedding = make_iterator_property_map(emb.begin(), get(vertex_index, s.graph)));
    if (!planar) return std::nullopt;
    RotationSystem rot;
    rot.order.resize(g.vertex_count());
    for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
        for (const auto& e : emb[v]) {
            const int id = get(edge_index, s.graph, e);
            auto it = s.bond_at.find({id, v});
            if (it == s.bond_at.end()) throw std::logic_error("planar_embedding: unmapped simple edge");
            rot.order[v].push_back(it->second);
        }
    }
    return rot;
}

/// Faces of a rotation system as cyclic bond sequences. After arriving at v
/// along d, a face leaves along the rotation successor of reverse(d).
template <class T>
std::vector<std::vector<BondIndex>> trace_faces(const MetricGraph<T>& g, const RotationSystem& rot) {
    std::vector<int> pos(g.bond_count(), -1);
    for (const auto& at : rot.order)
        for (int i = 0; i < static_cast<int>(at.size()); ++i) pos[at[i]] = i;
    for (BondIndex b = 0; b < g.bond_count(); ++b)
        if (pos[b] < 0) throw DomainError("trace_faces: rotation system misses a bond");
    auto next = [&](BondIndex d) {
        const BondIndex r = reverse(d);
        const auto& at = rot.order[g.origin(r)];
        return at[(pos[r] + 1) % at.size()];
    };
    std::vector<char> used(g.bond_count(), 0);
    std::vector<std::vector<BondIndex>> faces;
    for (BondIndex start = 0; start < g.bond_count(); ++start) {
        if (used[start]) continue;
        std::vector<BondIndex> face;
        for (BondIndex d = start; !used[d]; d = next(d)) {
            used[d] = 1;
            face.push_back(d);
        }
        faces.push_back(std::move(face));
    }
    return faces;
}

/// Euler's relation for a connected graph embedded on the sphere.
template <class T>
bool is_planar_rotation(const MetricGraph<T>& g, const RotationSystem& rot) {
    const int faces = static_cast<int>(trace_faces(g, rot).size());
    return g.vertex_count() - g.edge_count() + faces == 2;
}

}  // namespace qg
