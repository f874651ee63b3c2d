#pragma once

// The length structure on H1: the edge-length inner product on chains, overlap
// bookkeeping between oriented cycles, and minimal closed-walk lengths per
// homology class computed as shortest paths in the Z^n abelian cover.

#include "qgraph/int_linalg.hpp"
#include "qgraph/metric_graph.hpp"

#include <functional>
#include <map>
#include <queue>
#include <set>
#include <unordered_map>

namespace qg {

/// Coordinates with respect to a HomologyBasis.
using HomologyClass = std::vector<int>;

template <class T>
using Matrix = std::vector<std::vector<T>>;

struct HomologyClassHash {
    std::size_t operator()(const HomologyClass& h) const {
        std::size_t s = h.size();
        for (int x : h) s ^= std::hash<int>{}(x) + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
        return s;
    }
};

inline bool is_zero_class(const HomologyClass& h) {
    return std::all_of(h.begin(), h.end(), [](int x) { return x == 0; });
}
inline HomologyClass negate(HomologyClass h) {
    for (int& x : h) x = -x;
    return h;
}
inline HomologyClass add_classes(const HomologyClass& a, const HomologyClass& b, int sb = 1) {
    HomologyClass r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + sb * b[i];
    return r;
}

/// Bilinear form on integer edge chains: e.e = l(e), e.(-e) = -l(e).
template <class T>
T c1_inner_product(const MetricGraph<T>& g, std::span<const int> z1, std::span<const int> z2) {
    if (static_cast<int>(z1.size()) != g.edge_count() || static_cast<int>(z2.size()) != g.edge_count())
        throw DomainError("c1_inner_product: chain size does not match the graph");
    T s = scalar_traits<T>::from_int(0);
    for (int e = 0; e < g.edge_count(); ++e)
        if (z1[e] && z2[e]) s += T(z1[e] * z2[e]) * g.length(e);
    return s;
}

template <class T>
T c1_inner_product(const MetricGraph<T>& g, const Cycle& a, const Cycle& b) {
    const auto z1 = edge_chain(g.edge_count(), a.bonds), z2 = edge_chain(g.edge_count(), b.bonds);
    return c1_inner_product<T>(g, z1, z2);
}

template <class T>
struct OverlapProfile {
    T positive{};
    T negative{};
    int shared_edges = 0;
};

/// Shared edges of two oriented cycles, split by relative direction.
template <class T>
OverlapProfile<T> overlap_profile(const MetricGraph<T>& g, const Cycle& c1, const Cycle& c2) {
    if (!is_simple_cycle(g, c1) || !is_simple_cycle(g, c2)) throw DomainError("overlap_profile: input is not a cycle");
    OverlapProfile<T> p{scalar_traits<T>::from_int(0), scalar_traits<T>::from_int(0), 0};
    const auto z1 = edge_chain(g.edge_count(), c1.bonds), z2 = edge_chain(g.edge_count(), c2.bonds);
    for (int e = 0; e < g.edge_count(); ++e) {
        if (!z1[e] || !z2[e]) continue;
        ++p.shared_edges;
        (z1[e] == z2[e] ? p.positive : p.negative) += g.length(e);
    }
    return p;
}

/// Gram matrix of oriented cycles; they must form a basis of H1(G, Z).
template <class T>
Matrix<T> albanese_gram_direct(const MetricGraph<T>& g, const std::vector<Cycle>& basis) {
    const auto hb = homology_basis(g);
    if (static_cast<int>(basis.size()) != hb.rank()) throw DomainError("albanese_gram_direct: wrong number of cycles");
    IntMat coords;
    for (const auto& c : basis) {
        if (!is_closed_walk<T>(g, c.bonds)) throw DomainError("albanese_gram_direct: input is not closed");
        const auto h = hb.coordinates(c.bonds);
        coords.emplace_back(h.begin(), h.end());
    }
    if (!is_unimodular(coords)) throw DomainError("albanese_gram_direct: cycles do not form a basis of H1");
    const int n = hb.rank();
    Matrix<T> gram(n, std::vector<T>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gram[i][j] = c1_inner_product(g, basis[i], basis[j]);
    return gram;
}

/// Cyclic rotation with the lexicographically smallest bond sequence.
inline std::vector<BondIndex> canonical_rotation(const std::vector<BondIndex>& w) {
    std::vector<BondIndex> best = w;
    for (std::size_t r = 1; r < w.size(); ++r) {
        std::vector<BondIndex> rot(w.begin() + r, w.end());
        rot.insert(rot.end(), w.begin(), w.begin() + r);
        if (rot < best) best = std::move(rot);
    }
    return best;
}

/// Deletes adjacent b, reverse(b) pairs, cyclically, until none remain.
inline std::vector<BondIndex> remove_backtracks(std::vector<BondIndex> w) {
    bool changed = true;
    while (changed && w.size() >= 2) {
        changed = false;
        std::vector<BondIndex> out;
        for (BondIndex b : w) {
            if (!out.empty() && out.back() == reverse(b)) {
                out.pop_back();
                changed = true;
            } else {
                out.push_back(b);
            }
        }
        while (out.size() >= 2 && out.front() == reverse(out.back())) {
            out.erase(out.begin());
            out.pop_back();
            changed = true;
        }
        w = std::move(out);
    }
    return w;
}

namespace detail {

/// Dijkstra on the abelian cover from (base, 0) with every state up to `bound`.
template <class T>
class CoverSearch {
public:
    struct Node {
        VertexIndex vertex;
        HomologyClass cls;
        T dist;
        bool settled = false;
        std::vector<std::pair<int, BondIndex>> preds;  // (node, bond into this node)
    };

    CoverSearch(const MetricGraph<T>& g, const HomologyBasis& hb, const std::vector<std::vector<BondIndex>>& out)
        : g_(g), hb_(hb), out_(out) {}

    template <class Visit>
    void run(VertexIndex base, const T& bound, bool keep_preds, Visit&& visit) {
        using tr = scalar_traits<T>;
        nodes_.clear();
        index_.clear();
        using Item = std::pair<T, int>;
        auto cmp = [](const Item& a, const Item& b) { return a.first > b.first; };
        std::priority_queue<Item, std::vector<Item>, decltype(cmp)> pq(cmp);
        nodes_.push_back({base, HomologyClass(hb_.rank(), 0), tr::from_int(0)});
        index_[key(base, nodes_[0].cls)] = 0;
        pq.push({nodes_[0].dist, 0});
        while (!pq.empty()) {
            const auto [d, id] = pq.top();
            pq.pop();
            if (nodes_[id].settled || d != nodes_[id].dist) continue;
            nodes_[id].settled = true;
            if (!visit(nodes_[id])) return;
            for (BondIndex b : out_[nodes_[id].vertex]) {
                const T nd = nodes_[id].dist + g_.bond_length(b);
                if (!tr::le(nd, bound)) continue;
                HomologyClass c = nodes_[id].cls;
                if (const int a = hb_.axis_of_edge[edge_of(b)]; a >= 0) c[a] += bond_sign(b);
                const VertexIndex w = g_.terminal(b);
                auto k = key(w, c);
                auto it = index_.find(k);
                if (it == index_.end()) {
                    const int nid = static_cast<int>(nodes_.size());
                    nodes_.push_back({w, std::move(c), nd});
                    if (keep_preds) nodes_[nid].preds.push_back({id, b});
                    index_.emplace(std::move(k), nid);
                    pq.push({nd, nid});
                    continue;
                }
                Node& n = nodes_[it->second];
                if (n.settled) continue;
                if (tr::lt(nd, n.dist)) {
                    n.dist = nd;
                    n.preds.clear();
                    if (keep_preds) n.preds.push_back({id, b});
                    pq.push({nd, it->second});
                } else if (keep_preds && tr::eq(nd, n.dist)) {
                    n.preds.push_back({id, b});
                }
            }
        }
    }

    std::optional<int> find(VertexIndex v, const HomologyClass& c) const {
        auto it = index_.find(key(v, c));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    const Node& node(int id) const { return nodes_[id]; }

private:
    static HomologyClass key(VertexIndex v, const HomologyClass& c) {
        HomologyClass k;
        k.reserve(c.size() + 1);
        k.push_back(v);
        k.insert(k.end(), c.begin(), c.end());
        return k;
    }

    const MetricGraph<T>& g_;
    const HomologyBasis& hb_;
    const std::vector<std::vector<BondIndex>>& out_;
    std::vector<Node> nodes_;
    std::unordered_map<HomologyClass, int, HomologyClassHash> index_;
};

/// Length of some closed walk in class h: the chain itself, made connected by
/// doubling spanning-forest edges.
template <class T>
T orbit_length_upper_bound(const MetricGraph<T>& g, const HomologyBasis& hb, const HomologyClass& h) {
    const auto z = hb.chain_of(h, g.edge_count());
    T u = scalar_traits<T>::from_int(0);
    for (int e = 0; e < g.edge_count(); ++e) {
        u += T(std::abs(z[e])) * g.length(e);
        if (hb.tree_edge[e]) u += T(2) * g.length(e);
    }
    return u;
}

}  // namespace detail

template <class T>
struct OrbitLength {
    T length{};
    std::vector<Cycle> witnesses;  // canonical rotations, backtrack-free
    bool truncated = false;        // witness cap reached
};

inline constexpr int default_witness_cap = 64;

/// Component carrying the nonzero class h, or nullopt when h has support on
/// several components (no closed walk realises it).
inline std::optional<int> class_component(const HomologyBasis& hb, const HomologyClass& h) {
    std::optional<int> c;
    for (int i = 0; i < hb.rank(); ++i) {
        if (!h[i]) continue;
        if (c && *c != hb.component_of_axis[i]) return std::nullopt;
        c = hb.component_of_axis[i];
    }
    return c;
}

/// Minimal length of a closed walk in class h (coordinates in hb), with the
/// minimal walks themselves up to witness_cap.
template <class T>
OrbitLength<T> minimal_orbit_length(const MetricGraph<T>& g, const HomologyBasis& hb, const HomologyClass& h,
                                    int witness_cap = default_witness_cap) {
    using tr = scalar_traits<T>;
    if (static_cast<int>(h.size()) != hb.rank()) throw DomainError("minimal_orbit_length: class has wrong dimension");
    if (is_zero_class(h)) throw DomainError("minimal_orbit_length: the trivial class has no minimal positive orbit");
    if (!class_component(hb, h)) throw DomainError("minimal_orbit_length: class spans several components");
    const auto out = g.outgoing();
    detail::CoverSearch<T> search(g, hb, out);
    T best = detail::orbit_length_upper_bound(g, hb, h);
    std::vector<std::optional<T>> found(g.vertex_count());
    for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
        search.run(v, best, false, [&](const auto& n) {
            if (n.vertex == v && n.cls == h) {
                found[v] = n.dist;
                return false;
            }
            return true;
        });
        if (found[v] && tr::lt(*found[v], best)) best = *found[v];
    }
    OrbitLength<T> r;
    bool any = false;
    for (const auto& f : found) any = any || (f && tr::eq(*f, best));
    if (!any) throw std::logic_error("minimal_orbit_length: upper bound walk not found");
    r.length = best;
    if (witness_cap <= 0) return r;

    std::set<std::vector<BondIndex>> seen;
    const int raw_cap = 64 * std::max(witness_cap, 1);
    int raw = 0;
    for (VertexIndex v = 0; v < g.vertex_count() && !r.truncated; ++v) {
        if (!found[v] || !tr::eq(*found[v], best)) continue;
        search.run(v, best, true, [&](const auto& n) { return !(n.vertex == v && n.cls == h); });
        const auto target = search.find(v, h);
        if (!target) continue;
        std::vector<BondIndex> rev;
        std::function<void(int)> walk = [&](int id) {
            if (r.truncated) return;
            const auto& n = search.node(id);
            if (n.preds.empty()) {
                std::vector<BondIndex> w(rev.rbegin(), rev.rend());
                w = canonical_rotation(remove_backtracks(std::move(w)));
                if (seen.insert(w).second) r.witnesses.push_back(Cycle{w});
                if (static_cast<int>(r.witnesses.size()) >= witness_cap || ++raw >= raw_cap) r.truncated = true;
                return;
            }
            for (const auto& [p, b] : n.preds) {
                rev.push_back(b);
                walk(p);
                rev.pop_back();
            }
        };
        walk(*target);
    }
    return r;
}

template <class T>
OrbitLength<T> minimal_orbit_length(const MetricGraph<T>& g, const HomologyClass& h,
                                    int witness_cap = default_witness_cap) {
    return minimal_orbit_length(g, homology_basis(g), h, witness_cap);
}

/// Minimal lengths of every nonzero class with l(h) <= lmax.
template <class T>
struct LengthTable {
    T lmax{};
    std::unordered_map<HomologyClass, T, HomologyClassHash> lengths;

    std::optional<T> find(const HomologyClass& h) const {
        auto it = lengths.find(h);
        if (it == lengths.end()) return std::nullopt;
        return it->second;
    }
};

template <class T>
LengthTable<T> build_length_table(const MetricGraph<T>& g, const HomologyBasis& hb, const T& lmax) {
    using tr = scalar_traits<T>;
    LengthTable<T> table;
    table.lmax = lmax;
    const auto out = g.outgoing();
    detail::CoverSearch<T> search(g, hb, out);
    for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
        search.run(v, lmax, false, [&](const auto& n) {
            if (n.vertex != v || is_zero_class(n.cls)) return true;
            auto [it, inserted] = table.lengths.emplace(n.cls, n.dist);
            if (!inserted && tr::lt(n.dist, it->second)) it->second = n.dist;
            return true;
        });
    }
    return table;
}

}  // namespace qg
