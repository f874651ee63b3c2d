#pragma once

// Graph builders, fixture access and seeded generators shared by the tests.

#include "qgraph/qgraph.hpp"

#include <random>
#include <string>
#include <utility>
#include <vector>

namespace qgt {

using qg::MetricGraph;
using qg::Rational;

inline std::string fixture(const std::string& name) { return std::string(QGRAPH_FIXTURE_DIR) + "/" + name + ".qg"; }

template <class T = Rational>
MetricGraph<T> load(const std::string& name, bool allow_degree_two = false) {
    return qg::read_graph<T>(fixture(name), allow_degree_two);
}

template <class T = Rational>
MetricGraph<T> from_edges(int nv, const std::vector<std::pair<int, int>>& es, std::vector<T> lengths = {}) {
    MetricGraph<T> g;
    for (int i = 0; i < nv; ++i) g.add_vertex();
    for (std::size_t i = 0; i < es.size(); ++i)
        g.add_edge(es[i].first, es[i].second, lengths.empty() ? qg::scalar_traits<T>::from_int(1) : lengths[i]);
    return g;
}

template <class T = Rational>
MetricGraph<T> complete(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.push_back({i, j});
    return from_edges<T>(n, e);
}

template <class T = Rational>
MetricGraph<T> k33() {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < 3; ++i)
        for (int j = 3; j < 6; ++j) e.push_back({i, j});
    return from_edges<T>(6, e);
}

template <class T = Rational>
MetricGraph<T> cube() {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < 8; ++i)
        for (int b = 0; b < 3; ++b)
            if (!(i >> b & 1)) e.push_back({i, i | 1 << b});
    return from_edges<T>(8, e);
}

template <class T = Rational>
MetricGraph<T> prism() {
    return from_edges<T>(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}, {0, 3}, {1, 4}, {2, 5}});
}

template <class T = Rational>
MetricGraph<T> wheel(int k) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < k; ++i) {
        e.push_back({i, (i + 1) % k});
        e.push_back({i, k});
    }
    return from_edges<T>(k + 1, e);
}

template <class T = Rational>
MetricGraph<T> theta(T a, T b, T c) {
    return from_edges<T>(2, {{0, 1}, {0, 1}, {0, 1}}, {a, b, c});
}

template <class T = Rational>
MetricGraph<T> figure8(T a, T b) {
    return from_edges<T>(1, {{0, 0}, {0, 0}}, {a, b});
}

/// Two unit triangles joined by an edge of the given length.
template <class T = Rational>
MetricGraph<T> two_triangles(T bridge) {
    const T one = qg::scalar_traits<T>::from_int(1);
    return from_edges<T>(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}, {0, 3}},
                         {one, one, one, one, one, one, bridge});
}

template <class T = Rational>
MetricGraph<T> star(int k) {
    std::vector<std::pair<int, int>> e;
    for (int i = 1; i <= k; ++i) e.push_back({0, i});
    return from_edges<T>(k + 1, e);
}

/// Random rational lengths p/q with q in [1, 8] and value in [1/2, 2].
inline std::vector<Rational> random_rational_lengths(std::mt19937_64& rng, int count) {
    std::uniform_int_distribution<int> den(1, 8);
    std::vector<Rational> out;
    for (int i = 0; i < count; ++i) {
        const int q = den(rng);
        std::uniform_int_distribution<int> num((q + 1) / 2, 2 * q);
        out.emplace_back(num(rng), q);
    }
    return out;
}

template <class T>
MetricGraph<T> relength(const MetricGraph<T>& g, const std::vector<T>& ls) {
    return g.template with_lengths<T>(ls);
}

/// Random connected multigraph: a random tree plus extra edges (loops and
/// parallels allowed), lengths drawn from `pick`.
template <class T, class Pick>
MetricGraph<T> random_graph(std::mt19937_64& rng, int nv, int extra, Pick&& pick) {
    MetricGraph<T> g;
    for (int i = 0; i < nv; ++i) g.add_vertex();
    for (int v = 1; v < nv; ++v) g.add_edge(std::uniform_int_distribution<int>(0, v - 1)(rng), v, pick());
    std::uniform_int_distribution<int> any(0, nv - 1);
    for (int i = 0; i < extra; ++i) g.add_edge(any(rng), any(rng), pick());
    return g;
}

}  // namespace qgt
