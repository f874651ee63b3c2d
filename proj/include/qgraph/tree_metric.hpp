#pragma once

// Weighted trees from additive distance data. Points are inserted one at a
// time; each new point hangs off the current tree at the spot fixed by the
// three-point formula, splitting an edge when that spot is interior.
// Labelled points may end up as leaves or as interior vertices.

#include "qgraph/scalar.hpp"

#include <functional>
#include <vector>

namespace qg {

template <class T>
struct MetricTree {
    struct Edge {
        int u = 0, v = 0;
        T length{};
    };
    std::vector<int> label;          // per node: point label, or -1 for a branch point
    std::vector<int> node_of_label;  // per label
    std::vector<Edge> edges;

    int node_count() const { return static_cast<int>(label.size()); }
    int degree(int node) const {
        int d = 0;
        for (const auto& e : edges) d += (e.u == node) + (e.v == node);
        return d;
    }
    /// Distances from one node to every node.
    std::vector<T> distances_from(int node) const {
        std::vector<T> d(node_count());
        std::vector<char> seen(node_count(), 0);
        std::vector<int> stack{node};
        seen[node] = 1;
        d[node] = scalar_traits<T>::from_int(0);
        while (!stack.empty()) {
            const int x = stack.back();
            stack.pop_back();
            for (const auto& e : edges) {
                const int y = e.u == x ? e.v : e.v == x ? e.u : -1;
                if (y < 0 || seen[y]) continue;
                seen[y] = 1;
                d[y] = d[x] + e.length;
                stack.push_back(y);
            }
        }
        return d;
    }
};

/// Tree realising the additive metric d on points 0..n-1, with no unlabelled
/// vertex of degree below three. Rejects data violating the four-point
/// condition and coincident points.
template <class T>
MetricTree<T> tree_from_leaves(const std::vector<std::vector<T>>& d) {
    using tr = scalar_traits<T>;
    const int n = static_cast<int>(d.size());
    MetricTree<T> t;
    if (n == 0) return t;
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(d[i].size()) != n) throw DomainError("tree_from_leaves: distance matrix is not square");
        if (!tr::is_zero(d[i][i])) throw DomainError("tree_from_leaves: nonzero diagonal");
        for (int j = 0; j < i; ++j) {
            if (!tr::eq(d[i][j], d[j][i])) throw DomainError("tree_from_leaves: distance matrix is not symmetric");
            if (!tr::lt(tr::from_int(0), d[i][j])) throw DomainError("tree_from_leaves: coincident or negative distances");
        }
    }
    const T two = tr::from_int(2);
    // every node lies on the path from label a to label b, at distance s from a
    struct Anchor {
        int a, b;
        T s;
    };
    std::vector<Anchor> anchor;
    auto add_node = [&](int lab, Anchor an) {
        t.label.push_back(lab);
        anchor.push_back(an);
        return t.node_count() - 1;
    };
    t.node_of_label.assign(n, -1);
    t.node_of_label[0] = add_node(0, {0, 0, tr::from_int(0)});

    for (int z = 1; z < n; ++z) {
        auto dist_to = [&](int node) {
            const auto& an = anchor[node];
            const T g = (d[z][an.a] + d[an.a][an.b] - d[z][an.b]) / two;
            const T h = d[z][an.a] - g;
            const T off = tr::lt(an.s, g) ? T(g - an.s) : T(an.s - g);
            return T(h + off);
        };
        std::vector<T> dz(t.node_count());
        for (int v = 0; v < t.node_count(); ++v) dz[v] = dist_to(v);
        int best_node = 0;
        for (int v = 1; v < t.node_count(); ++v)
            if (tr::lt(dz[v], dz[best_node])) best_node = v;
        T best = dz[best_node];
        int best_edge = -1;
        T best_x{};
        for (int i = 0; i < static_cast<int>(t.edges.size()); ++i) {
            const auto& e = t.edges[i];
            const T x = (dz[e.u] - dz[e.v] + e.length) / two;
            if (!tr::lt(tr::from_int(0), x) || !tr::lt(x, e.length)) continue;
            const T p = dz[e.u] - x;
            if (tr::lt(p, best)) {
                best = p;
                best_edge = i;
                best_x = x;
            }
        }
        // a label reachable from `from` without crossing the edge to `block`
        auto side_label = [&](int from, int block) {
            std::vector<char> seen(t.node_count(), 0);
            std::vector<int> stack{from};
            seen[from] = seen[block] = 1;
            while (!stack.empty()) {
                const int x = stack.back();
                stack.pop_back();
                if (t.label[x] >= 0) return t.label[x];
                for (const auto& f : t.edges) {
                    const int y = f.u == x ? f.v : f.v == x ? f.u : -1;
                    if (y >= 0 && !seen[y]) {
                        seen[y] = 1;
                        stack.push_back(y);
                    }
                }
            }
            return -1;
        };
        int at = best_node;
        if (best_edge >= 0) {
            const auto e = t.edges[best_edge];
            const int la = side_label(e.u, e.v), lb = side_label(e.v, e.u);
            const T s = t.distances_from(t.node_of_label[la])[e.u] + best_x;
            const bool on_edge = tr::is_zero(best);
            const int mid = add_node(on_edge ? z : -1, on_edge ? Anchor{z, z, tr::from_int(0)} : Anchor{la, lb, s});
            t.edges[best_edge] = {e.u, mid, best_x};
            t.edges.push_back({mid, e.v, T(e.length - best_x)});
            if (on_edge) {
                t.node_of_label[z] = mid;
                continue;
            }
            at = mid;
        } else if (tr::is_zero(best)) {
            if (t.label[at] >= 0) throw DomainError("tree_from_leaves: coincident points");
            t.label[at] = z;
            t.node_of_label[z] = at;
            anchor[at] = {z, z, tr::from_int(0)};
            continue;
        }
        const int leaf = add_node(z, {z, z, tr::from_int(0)});
        t.node_of_label[z] = leaf;
        t.edges.push_back({at, leaf, best});
    }
    // every pairwise distance must be reproduced
    for (int a = 0; a < n; ++a) {
        const auto da = t.distances_from(t.node_of_label[a]);
        for (int b = 0; b < n; ++b)
            if (!tr::eq(da[t.node_of_label[b]], d[a][b]))
                throw DomainError("tree_from_leaves: distances violate the four-point condition");
    }
    return t;
}

}  // namespace qg
