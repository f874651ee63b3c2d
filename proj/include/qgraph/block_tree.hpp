#pragma once

// Block structure of a graph: blocks (classes of cycles sharing edges) as fat
// vertices, joined through a weighted tree. Zero-length links mean two blocks
// share a cut vertex.

#include "qgraph/metric_graph.hpp"

#include <functional>
#include <map>
#include <set>

namespace qg {

template <class T>
struct BlockTree {
    struct Node {
        bool is_block = false;
        int dimension = 0;         // dim H1 of the block; 0 for junctions
        std::vector<int> members;  // edges (combinatorial) or generator indices (spectral)
    };
    struct Link {
        int a = 0, b = 0;
        int attach_a = -1, attach_b = -1;  // attachment point on a block endpoint
        T length{};
    };

    std::vector<Node> nodes;
    std::vector<Link> links;

    int block_count() const {
        int c = 0;
        for (const auto& n : nodes) c += n.is_block;
        return c;
    }
    int total_dimension() const {
        int d = 0;
        for (const auto& n : nodes) d += n.dimension;
        return d;
    }
    int degree(int node) const {
        int d = 0;
        for (const auto& l : links) d += (l.a == node) + (l.b == node);
        return d;
    }

    /// Merges the two links at every degree-2 junction and drops orphaned
    /// junctions, then renumbers nodes.
    void suppress_degree_two_junctions() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (int v = 0; v < static_cast<int>(nodes.size()); ++v) {
                if (nodes[v].is_block || degree(v) != 2) continue;
                std::vector<int> inc;
                for (int i = 0; i < static_cast<int>(links.size()); ++i)
                    if (links[i].a == v || links[i].b == v) inc.push_back(i);
                auto far = [&](const Link& l, int& attach) {
                    if (l.a == v) {
                        attach = l.attach_b;
                        return l.b;
                    }
                    attach = l.attach_a;
                    return l.a;
                };
                Link merged;
                merged.a = far(links[inc[0]], merged.attach_a);
                merged.b = far(links[inc[1]], merged.attach_b);
                merged.length = links[inc[0]].length + links[inc[1]].length;
                links.erase(links.begin() + inc[1]);
                links.erase(links.begin() + inc[0]);
                links.push_back(merged);
                changed = true;
            }
        }
        // drop junctions that lost all links
        std::vector<int> remap(nodes.size(), -1);
        std::vector<Node> kept;
        for (int v = 0; v < static_cast<int>(nodes.size()); ++v) {
            if (!nodes[v].is_block && degree(v) == 0 && nodes.size() > 1) continue;
            remap[v] = static_cast<int>(kept.size());
            kept.push_back(nodes[v]);
        }
        nodes = std::move(kept);
        for (auto& l : links) {
            l.a = remap[l.a];
            l.b = remap[l.b];
        }
    }

    bool is_acyclic() const {
        std::vector<int> parent(nodes.size());
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
        for (const auto& l : links) {
            const int ra = find(l.a), rb = find(l.b);
            if (ra == rb) return false;
            parent[ra] = rb;
        }
        return true;
    }
};

/// Isomorphism of block trees as weighted trees: node kinds and block
/// dimensions, link lengths, and the grouping of each block's links into
/// attachment points must all correspond.
template <class T>
bool block_trees_isomorphic(const BlockTree<T>& x, const BlockTree<T>& y) {
    using tr = scalar_traits<T>;
    const int n = static_cast<int>(x.nodes.size());
    if (n != static_cast<int>(y.nodes.size()) || x.links.size() != y.links.size()) return false;
    auto link_between = [](const BlockTree<T>& t, int a, int b) -> const typename BlockTree<T>::Link* {
        for (const auto& l : t.links)
            if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return &l;
        return nullptr;
    };
    auto attach_at = [](const typename BlockTree<T>::Link& l, int node) { return l.a == node ? l.attach_a : l.attach_b; };
    std::vector<int> map(n, -1);
    std::vector<char> used(n, 0);

    auto partitions_match = [&]() {
        for (int v = 0; v < n; ++v) {
            if (!x.nodes[v].is_block) continue;
            // pairs of neighbours of v sharing an attachment point must map to pairs sharing one in y
            std::vector<std::pair<int, int>> nb;  // (neighbour, attach)
            for (const auto& l : x.links) {
                if (l.a == v) nb.push_back({l.b, l.attach_a});
                else if (l.b == v) nb.push_back({l.a, l.attach_b});
            }
            for (std::size_t i = 0; i < nb.size(); ++i)
                for (std::size_t j = i + 1; j < nb.size(); ++j) {
                    const bool same_x = nb[i].second == nb[j].second;
                    const auto* li = link_between(y, map[v], map[nb[i].first]);
                    const auto* lj = link_between(y, map[v], map[nb[j].first]);
                    const bool same_y = attach_at(*li, map[v]) == attach_at(*lj, map[v]);
                    if (same_x != same_y) return false;
                }
        }
        return true;
    };

    std::function<bool(int)> rec = [&](int v) {
        if (v == n) return partitions_match();
        const auto& nv = x.nodes[v];
        for (int w = 0; w < n; ++w) {
            const auto& nw = y.nodes[w];
            if (used[w] || nv.is_block != nw.is_block || nv.dimension != nw.dimension) continue;
            if (x.degree(v) != y.degree(w)) continue;
            bool ok = true;
            for (int u = 0; u < v && ok; ++u) {
                const auto* lx = link_between(x, u, v);
                const auto* ly = link_between(y, map[u], w);
                if (!lx != !ly) ok = false;
                else if (lx && !tr::eq(lx->length, ly->length)) ok = false;
            }
            if (!ok) continue;
            map[v] = w;
            used[w] = 1;
            if (rec(v + 1)) return true;
            used[w] = 0;
        }
        return false;
    };
    return rec(0);
}

/// Vertex-biconnected components as edge lists (Hopcroft-Tarjan with an edge
/// stack). Each loop is its own component; parallel edges fall in one.
template <class T>
std::vector<std::vector<EdgeIndex>> biconnected_components(const MetricGraph<T>& g) {
    std::vector<std::vector<EdgeIndex>> comps;
    const int n = g.vertex_count();
    const auto out = g.outgoing();
    std::vector<int> disc(n, -1), low(n, 0);
    std::vector<EdgeIndex> stack;
    int timer = 0;
    std::function<void(VertexIndex, EdgeIndex)> dfs = [&](VertexIndex v, EdgeIndex via) {
        disc[v] = low[v] = timer++;
        for (BondIndex b : out[v]) {
            const EdgeIndex e = edge_of(b);
            if (e == via) continue;
            const VertexIndex w = g.terminal(b);
            if (w == v) {
                if (b == forward_bond(e)) comps.push_back({e});  // loop, seen twice from v
                continue;
            }
            if (disc[w] < 0) {
                stack.push_back(e);
                dfs(w, e);
                low[v] = std::min(low[v], low[w]);
                if (low[w] >= disc[v]) {
                    std::vector<EdgeIndex> comp;
                    while (true) {
                        const EdgeIndex top = stack.back();
                        stack.pop_back();
                        comp.push_back(top);
                        if (top == e) break;
                    }
                    comps.push_back(std::move(comp));
                }
            } else if (disc[w] < disc[v]) {
                stack.push_back(e);
                low[v] = std::min(low[v], disc[w]);
            }
        }
    };
    for (VertexIndex v = 0; v < n; ++v)
        if (disc[v] < 0) dfs(v, -1);
    return comps;
}

/// Direct combinatorial block structure. Blocks are the biconnected components
/// that contain a cycle; bridges and cut vertices form the connecting tree.
template <class T>
BlockTree<T> biconnected_blocks(const MetricGraph<T>& g) {
    BlockTree<T> tree;
    const auto comps = biconnected_components(g);
    std::vector<std::vector<int>> comps_at(g.vertex_count());
    std::vector<int> block_node(comps.size(), -1);
    std::vector<char> is_bridge(comps.size(), 0);
    for (std::size_t c = 0; c < comps.size(); ++c) {
        std::set<VertexIndex> vs;
        for (EdgeIndex e : comps[c]) {
            vs.insert(g.edge(e).u);
            vs.insert(g.edge(e).v);
        }
        const bool loop = comps[c].size() == 1 && g.edge(comps[c][0]).u == g.edge(comps[c][0]).v;
        if (comps[c].size() >= 2 || loop) {
            typename BlockTree<T>::Node node;
            node.is_block = true;
            node.dimension = static_cast<int>(comps[c].size()) - static_cast<int>(vs.size()) + 1;
            node.members = comps[c];
            std::sort(node.members.begin(), node.members.end());
            block_node[c] = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(std::move(node));
        } else {
            is_bridge[c] = 1;
        }
        for (VertexIndex v : vs) comps_at[v].push_back(static_cast<int>(c));
    }
    std::vector<int> junction(g.vertex_count(), -1);
    for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
        bool needs = comps_at[v].size() >= 2;
        for (int c : comps_at[v]) needs = needs || is_bridge[c];
        if (!needs) continue;
        junction[v] = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        for (int c : comps_at[v]) {
            if (is_bridge[c]) continue;
            tree.links.push_back({block_node[c], junction[v], v, -1, scalar_traits<T>::from_int(0)});
        }
    }
    for (std::size_t c = 0; c < comps.size(); ++c) {
        if (!is_bridge[c]) continue;
        const auto& e = g.edge(comps[c][0]);
        tree.links.push_back({junction[e.u], junction[e.v], -1, -1, e.length});
    }
    tree.suppress_degree_two_junctions();
    return tree;
}

}  // namespace qg
