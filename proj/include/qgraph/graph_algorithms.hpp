#pragma once

// Combinatorial oracles on the underlying multigraph: cycle enumeration,
// spanning tree counts, vertex connectivity and isomorphism tests.

#include "qgraph/metric_graph.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <functional>
#include <map>
#include <set>

namespace qg {

/// Every cycle of g, each listed once in one orientation. Backtracking over
/// simple paths rooted at the smallest vertex of the cycle; duplicates (the
/// reversed traversal) are dropped by edge set.
template <class T>
std::vector<Cycle> enumerate_cycles(const MetricGraph<T>& g) {
    std::vector<Cycle> result;
    std::set<std::vector<EdgeIndex>> seen;
    const auto out = g.outgoing();
    std::vector<char> on_path(g.vertex_count(), 0);
    std::vector<BondIndex> path;

    auto emit = [&](std::vector<BondIndex> bonds) {
        std::vector<EdgeIndex> key;
        for (BondIndex b : bonds) key.push_back(edge_of(b));
        std::sort(key.begin(), key.end());
        if (seen.insert(key).second) result.push_back(Cycle{std::move(bonds)});
    };

    std::function<void(VertexIndex, VertexIndex)> dfs = [&](VertexIndex s, VertexIndex v) {
        for (BondIndex b : out[v]) {
            const VertexIndex w = g.terminal(b);
            if (w == v) continue;  // loops handled separately
            if (!path.empty() && edge_of(b) == edge_of(path.back())) continue;
            if (w == s) {
                if (path.empty()) continue;
                auto bonds = path;
                bonds.push_back(b);
                emit(std::move(bonds));
            } else if (w > s && !on_path[w]) {
                on_path[w] = 1;
                path.push_back(b);
                dfs(s, w);
                path.pop_back();
                on_path[w] = 0;
            }
        }
    };

    for (EdgeIndex e = 0; e < g.edge_count(); ++e)
        if (g.edge(e).u == g.edge(e).v) emit({forward_bond(e)});
    for (VertexIndex s = 0; s < g.vertex_count(); ++s) {
        on_path[s] = 1;
        dfs(s, s);
        on_path[s] = 0;
    }
    return result;
}

/// Matrix-tree theorem on the loop-free Laplacian, exact integer arithmetic
/// (fraction-free Bareiss elimination).
template <class T>
boost::multiprecision::cpp_int spanning_tree_count(const MetricGraph<T>& g) {
    using boost::multiprecision::cpp_int;
    const int n = g.vertex_count();
    if (n == 0) return 0;
    if (!is_connected(g)) return 0;
    if (n == 1) return 1;
    std::vector<std::vector<cpp_int>> lap(n, std::vector<cpp_int>(n, 0));
    for (const auto& e : g.edges()) {
        if (e.u == e.v) continue;
        lap[e.u][e.u] += 1;
        lap[e.v][e.v] += 1;
        lap[e.u][e.v] -= 1;
        lap[e.v][e.u] -= 1;
    }
    const int m = n - 1;  // drop last row/column
    std::vector<std::vector<cpp_int>> a(m, std::vector<cpp_int>(m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a[i][j] = lap[i][j];
    cpp_int prev = 1;
    int sign = 1;
    for (int k = 0; k < m - 1; ++k) {
        if (a[k][k] == 0) {
            int p = k + 1;
            while (p < m && a[p][k] == 0) ++p;
            if (p == m) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (int i = k + 1; i < m; ++i)
            for (int j = k + 1; j < m; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    cpp_int det = a[m - 1][m - 1] * sign;
    return det;
}

/// Subgraph on V \ removed, connected?
template <class T>
bool connected_without(const MetricGraph<T>& g, const std::vector<char>& removed) {
    int start = -1, remaining = 0;
    for (VertexIndex v = 0; v < g.vertex_count(); ++v)
        if (!removed[v]) {
            ++remaining;
            if (start < 0) start = v;
        }
    if (remaining == 0) return true;
    const auto out = g.outgoing();
    std::vector<char> seen(g.vertex_count(), 0);
    std::vector<VertexIndex> stack{start};
    seen[start] = 1;
    int reached = 1;
    while (!stack.empty()) {
        const VertexIndex v = stack.back();
        stack.pop_back();
        for (BondIndex b : out[v]) {
            const VertexIndex w = g.terminal(b);
            if (removed[w] || seen[w]) continue;
            seen[w] = 1;
            ++reached;
            stack.push_back(w);
        }
    }
    return reached == remaining;
}

/// k-connected: more than k vertices, and removing any fewer than k vertices
/// leaves the graph connected. Exhaustive over vertex subsets.
template <class T>
bool is_k_connected(const MetricGraph<T>& g, int k) {
    const int n = g.vertex_count();
    if (n <= k) return false;
    std::vector<char> removed(n, 0);
    std::function<bool(int, int)> rec = [&](int from, int left) {
        if (!connected_without(g, removed)) return false;
        if (left == 0) return true;
        for (int v = from; v < n; ++v) {
            removed[v] = 1;
            const bool ok = rec(v + 1, left - 1);
            removed[v] = 0;
            if (!ok) return false;
        }
        return true;
    };
    return rec(0, k - 1);
}

template <class T>
std::vector<VertexIndex> cut_vertices(const MetricGraph<T>& g) {
    std::vector<VertexIndex> cuts;
    std::vector<char> removed(g.vertex_count(), 0);
    const bool base = connected_without(g, removed);
    for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
        removed[v] = 1;
        if (base && !connected_without(g, removed)) cuts.push_back(v);
        removed[v] = 0;
    }
    return cuts;
}

/// Isomorphism of multigraphs by backtracking over vertex bijections. With
/// compare_lengths the multisets of edge lengths between matched vertex pairs
/// must agree as well. Returns the vertex map g1 -> g2 when found.
template <class T>
std::optional<std::vector<VertexIndex>> find_isomorphism(const MetricGraph<T>& g1, const MetricGraph<T>& g2,
                                                         bool compare_lengths) {
    using tr = scalar_traits<T>;
    const int n = g1.vertex_count();
    if (n != g2.vertex_count() || g1.edge_count() != g2.edge_count()) return std::nullopt;
    auto key = [](VertexIndex a, VertexIndex b) { return a < b ? std::pair{a, b} : std::pair{b, a}; };
    auto buckets = [&](const MetricGraph<T>& g) {
        std::map<std::pair<int, int>, std::vector<T>> m;
        for (const auto& e : g.edges()) m[key(e.u, e.v)].push_back(e.length);
        for (auto& [k, v] : m) std::sort(v.begin(), v.end());
        return m;
    };
    const auto b1 = buckets(g1), b2 = buckets(g2);
    const auto d1 = g1.degrees(), d2 = g2.degrees();
    auto same = [&](const std::vector<T>* x, const std::vector<T>* y) {
        const std::size_t nx = x ? x->size() : 0, ny = y ? y->size() : 0;
        if (nx != ny) return false;
        if (!compare_lengths || nx == 0) return true;
        for (std::size_t i = 0; i < nx; ++i)
            if (!tr::eq((*x)[i], (*y)[i])) return false;
        return true;
    };
    auto lookup = [](const auto& m, std::pair<int, int> k) -> const std::vector<T>* {
        auto it = m.find(k);
        return it == m.end() ? nullptr : &it->second;
    };
    std::vector<VertexIndex> map(n, -1);
    std::vector<char> used(n, 0);
    std::function<bool(int)> rec = [&](int v) {
        if (v == n) return true;
        for (VertexIndex w = 0; w < n; ++w) {
            if (used[w] || d1[v] != d2[w]) continue;
            bool ok = true;
            for (VertexIndex u = 0; u <= v && ok; ++u) {
                const VertexIndex mu = (u == v) ? w : map[u];
                ok = same(lookup(b1, key(u, v)), lookup(b2, key(mu, w)));
            }
            if (!ok) continue;
            map[v] = w;
            used[w] = 1;
            if (rec(v + 1)) return true;
            used[w] = 0;
            map[v] = -1;
        }
        return false;
    };
    if (!rec(0)) return std::nullopt;
    return map;
}

template <class T>
bool isomorphic(const MetricGraph<T>& g1, const MetricGraph<T>& g2, bool compare_lengths) {
    return find_isomorphism(g1, g2, compare_lengths).has_value();
}

}  // namespace qg
