#pragma once

// The inverse half: everything here reads a FrequencyTable and nothing else.
// Cycles are recognised from lengths, the Albanese Gram matrix and the block
// structure are assembled from lengths of sums and differences, a basis of
// oriented cycles without positive overlap decides planarity, and its shared
// edge counts give a geometric dual whose dual is the graph.

#include "qgraph/block_tree.hpp"
#include "qgraph/embedding.hpp"
#include "qgraph/frequency_table.hpp"
#include "qgraph/graph_algorithms.hpp"
#include "qgraph/tree_metric.hpp"

#include <cmath>

namespace qg {

namespace detail {

/// l*(h) <= bound (or < bound when strict), decided from the table.
template <class T>
bool length_within(const FrequencyTable<T>& t, const HomologyClass& h, const T& bound, bool strict) {
    using tr = scalar_traits<T>;
    if (is_zero_class(h)) return false;
    auto within = [&](const T& l) { return strict ? tr::lt(l, bound) : !tr::lt(bound, l); };
    if (const auto* e = t.find(h)) return within(e->length);
    if (!tr::lt(t.lmax, bound)) return false;  // missing means longer than lmax
    if (t.backend) {
        const auto l = t.backend(h);
        return l && within(*l);
    }
    throw IncompleteTable("frequency table: lengths up to " + format_scalar(bound) + " are needed, table has lmax " +
                          format_scalar(t.lmax));
}

}  // namespace detail

/// The minimal orbits of h are cycles iff h is not +-k +- k' with
/// l(k) + l(k') <= l(h).
template <class T>
bool is_cycle_frequency(const FrequencyTable<T>& t, const HomologyClass& h) {
    using tr = scalar_traits<T>;
    const T l = t.require(h);
    if (tr::lt(t.lmax, l))
        throw IncompleteTable("is_cycle_frequency: table must be complete up to " + format_scalar(l));
    for (const auto& e : t.entries) {
        if (!tr::lt(e.length, l)) break;
        for (int s : {1, -1}) {
            const auto rest = add_classes(h, e.coordinates, -s);
            if (detail::length_within(t, rest, T(l - e.length), false)) return false;
        }
    }
    return true;
}

/// Twice the n-th smallest cycle length.
template <class T>
T default_cycle_cap(const FrequencyTable<T>& t) {
    int found = 0;
    for (const auto& e : t.entries) {
        if (!is_cycle_frequency(t, e.coordinates)) continue;
        if (++found == t.rank) return T(scalar_traits<T>::from_int(2) * e.length);
    }
    throw IncompleteTable("default_cycle_cap: fewer than " + std::to_string(t.rank) + " cycles up to lmax " +
                          format_scalar(t.lmax));
}

/// Cycle classes with length <= cap, ascending.
template <class T>
std::vector<HomologyClass> cycle_candidates(const FrequencyTable<T>& t, const T& cap) {
    std::vector<HomologyClass> out;
    for (const auto& e : t.entries) {
        if (scalar_traits<T>::lt(cap, e.length)) break;
        if (is_cycle_frequency(t, e.coordinates)) out.push_back(e.coordinates);
    }
    if (scalar_traits<T>::lt(t.lmax, cap))
        throw IncompleteTable("cycle_candidates: table must be complete up to the cap " + format_scalar(cap));
    return out;
}

/// Unordered n-subsets of the cycle candidates forming a basis of the lattice.
/// The visitor returns false to stop.
template <class T, class Visit>
void for_each_cycle_generator_set(const FrequencyTable<T>& t, const T& cap, Visit&& visit) {
    const auto cand = cycle_candidates(t, cap);
    const int n = t.rank;
    std::vector<int> pick;
    IntMat rows;
    bool stop = false;
    std::function<void(int)> rec = [&](int from) {
        if (stop) return;
        if (static_cast<int>(pick.size()) == n) {
            if (!is_unimodular(rows)) return;
            std::vector<HomologyClass> set;
            for (int i : pick) set.push_back(cand[i]);
            if (!visit(set)) stop = true;
            return;
        }
        for (int i = from; i < static_cast<int>(cand.size()) && !stop; ++i) {
            if (static_cast<int>(cand.size()) - i < n - static_cast<int>(pick.size())) break;
            rows.emplace_back(cand[i].begin(), cand[i].end());
            if (hermite_normal_form(rows).size() == rows.size()) {
                pick.push_back(i);
                rec(i + 1);
                pick.pop_back();
            }
            rows.pop_back();
        }
    };
    rec(0);
}

template <class T>
std::vector<std::vector<HomologyClass>> cycle_generator_sets(const FrequencyTable<T>& t, const T& cap,
                                                             std::size_t max_sets = 0) {
    std::vector<std::vector<HomologyClass>> out;
    for_each_cycle_generator_set(t, cap, [&](const auto& s) {
        out.push_back(s);
        return max_sets == 0 || out.size() < max_sets;
    });
    return out;
}

template <class T>
std::vector<std::vector<HomologyClass>> cycle_generator_sets(const FrequencyTable<T>& t) {
    return cycle_generator_sets(t, default_cycle_cap(t));
}

template <class T>
struct AlbaneseGram {
    Matrix<T> gram;
    std::vector<HomologyClass> basis;  // oriented generators
};

namespace detail {

/// Edge norm of a class: the least total length of cycles summing to h. It is
/// l(h) when the support of h is connected; otherwise the minimal orbit pays
/// for a connecting path twice and only a split into cycles shows the norm.
template <class T>
class CycleNorm {
public:
    /// Cycles up to cap take part in the splits.
    CycleNorm(const FrequencyTable<T>& t, const T& cap) : t_(t) {
        if (tr::lt(t.lmax, cap)) throw IncompleteTable("cycle norm: table must be complete up to " + format_scalar(cap));
        for (const auto& e : t.entries) {
            if (tr::lt(cap, e.length)) break;
            if (is_cycle_frequency(t, e.coordinates)) cycles_.push_back(&e);
        }
    }

    /// The norm of h, known to be at most budget.
    T operator()(const HomologyClass& h, const T& budget) {
        const auto v = within(h, budget);
        if (!v) throw DomainError("cycle norm: no split into cycles within " + format_scalar(budget));
        return *v;
    }

private:
    using tr = scalar_traits<T>;

    // the norm if it is at most budget
    std::optional<T> within(const HomologyClass& h, const T& budget) {
        if (auto it = exact_.find(h); it != exact_.end())
            return tr::lt(budget, it->second) ? std::nullopt : std::optional<T>(it->second);
        if (auto it = above_.find(h); it != above_.end() && !tr::lt(it->second, budget)) return std::nullopt;
        std::optional<T> best;
        // budget <= cap <= lmax: a class missing from the table is longer
        if (const auto* e = t_.find(h); e && !tr::lt(budget, e->length)) best = e->length;
        for (const auto* c : cycles_) {
            const T bound = best ? *best : budget;
            if (!tr::lt(c->length, bound)) break;
            for (int s : {1, -1}) {
                const auto rest = add_classes(h, c->coordinates, -s);
                if (is_zero_class(rest)) continue;
                const auto r = within(rest, T(bound - c->length));
                if (r && (!best || tr::lt(T(c->length + *r), *best))) best = T(c->length + *r);
            }
        }
        if (best) exact_[h] = *best;
        else above_[h] = budget;
        return best;
    }

    const FrequencyTable<T>& t_;
    std::vector<const FrequencyEntry<T>*> cycles_;
    std::map<HomologyClass, T> exact_, above_;
};

}  // namespace detail

/// |v_i|^2 = l(h_i), 2 <v_i, v_j> = |h_i + h_j| - |h_i - h_j| with the edge
/// norm of detail::CycleNorm, which is l(h_i +- h_j) unless h_i +- h_j splits
/// into vertex-disjoint cycles.
template <class T>
AlbaneseGram<T> albanese_gram(const FrequencyTable<T>& t, const std::vector<HomologyClass>& basis) {
    const int n = static_cast<int>(basis.size());
    AlbaneseGram<T> a{Matrix<T>(n, std::vector<T>(n)), basis};
    T longest = scalar_traits<T>::from_int(0);
    for (const auto& h : basis) longest = std::max(longest, t.require(h), scalar_traits<T>::lt);
    detail::CycleNorm<T> norm(t, T(longest + longest));
    for (int i = 0; i < n; ++i) {
        a.gram[i][i] = t.require(basis[i]);
        for (int j = 0; j < i; ++j) {
            const T both = a.gram[i][i] + t.require(basis[j]);
            const T v = (norm(add_classes(basis[i], basis[j]), both) - norm(add_classes(basis[i], basis[j], -1), both)) /
                        scalar_traits<T>::from_int(2);
            a.gram[i][j] = a.gram[j][i] = v;
        }
    }
    if (!is_positive_definite(a.gram)) throw DomainError("albanese_gram: Gram matrix is not positive definite; table inconsistent");
    return a;
}

template <class T>
struct Complexity {
    T determinant{};        // det Gram; the spanning-tree count for unit lengths
    double fourth_root = 0;  // det^(1/4), the literal sqrt(vol) reading
};

template <class T>
Complexity<T> complexity(const Matrix<T>& gram) {
    Complexity<T> c;
    c.determinant = determinant(gram);
    c.fourth_root = std::pow(to_double(c.determinant), 0.25);
    return c;
}

/// Positive overlap of two oriented cycles: l(a - b) < l(a) + l(b).
template <class T>
bool positive_overlap(const FrequencyTable<T>& t, const HomologyClass& a, const HomologyClass& b) {
    const T sum = t.require(a) + t.require(b);
    return detail::length_within(t, add_classes(a, b, -1), sum, true);
}


template <class T>
struct BlockStructure {
    BlockTree<T> tree;                            // block members index into `cycles`
    std::vector<HomologyClass> cycles;            // cycle candidates, ascending length
    std::vector<std::vector<int>> blocks;         // candidate indices per block
    Matrix<T> distance;                           // block to block
    std::vector<char> inner;                      // separates two other blocks
};

namespace detail {

inline int span_rank(const std::vector<HomologyClass>& cls) {
    IntMat rows;
    for (const auto& c : cls) rows.emplace_back(c.begin(), c.end());
    return static_cast<int>(hermite_normal_form(rows).size());
}

}  // namespace detail

/// Blocks are classes of candidate cycles overlapping in either orientation.
/// Block distances are half the least excess l(c + c') - l(c) - l(c'). Each
/// block is then modelled as a star whose spokes, of unit length, end at its
/// attachment points; the resulting tree metric on block centres is realised
/// by tree_from_leaves and the spokes are removed again.
template <class T>
BlockStructure<T> block_structure(const FrequencyTable<T>& t, const T& cap) {
    using tr = scalar_traits<T>;
    BlockStructure<T> bs;
    if (t.rank == 0) return bs;
    bs.cycles = cycle_candidates(t, cap);
    const int m = static_cast<int>(bs.cycles.size());
    std::vector<int> parent(m);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < i; ++j) {
            if (find(i) == find(j)) continue;
            if (positive_overlap(t, bs.cycles[i], bs.cycles[j]) ||
                positive_overlap(t, bs.cycles[i], negate(bs.cycles[j])))
                parent[find(i)] = find(j);
        }
    auto groups = [&] {
        std::map<int, std::vector<int>> g;
        for (int i = 0; i < m; ++i) g[find(i)].push_back(i);
        std::vector<std::vector<int>> out;
        for (auto& [r, v] : g) out.push_back(v);
        return out;
    };
    auto classes_of = [&](const std::vector<int>& idx) {
        std::vector<HomologyClass> c;
        for (int i : idx) c.push_back(bs.cycles[i]);
        return c;
    };
    // classes with intersecting spans belong together
    for (bool merged = true; merged;) {
        merged = false;
        const auto g = groups();
        for (std::size_t a = 0; a < g.size() && !merged; ++a)
            for (std::size_t b = 0; b < a && !merged; ++b) {
                auto both = classes_of(g[a]);
                const auto cb = classes_of(g[b]);
                both.insert(both.end(), cb.begin(), cb.end());
                if (detail::span_rank(both) < detail::span_rank(classes_of(g[a])) + detail::span_rank(cb)) {
                    parent[find(g[a][0])] = find(g[b][0]);
                    merged = true;
                }
            }
    }
    bs.blocks = groups();
    const int k = static_cast<int>(bs.blocks.size());
    std::vector<int> dim(k);
    int total = 0;
    for (int b = 0; b < k; ++b) total += dim[b] = detail::span_rank(classes_of(bs.blocks[b]));
    if (total != t.rank)
        throw DomainError("block_structure: block dimensions sum to " + std::to_string(total) + ", rank is " +
                          std::to_string(t.rank) + "; raise the cycle cap");

    const T zero = tr::from_int(0), two = tr::from_int(2);
    bs.distance.assign(k, std::vector<T>(k, zero));
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < a; ++b) {
            std::optional<T> best;
            for (int i : bs.blocks[a])
                for (int j : bs.blocks[b])
                    for (int s : {1, -1}) {
                        const T ex = t.require(add_classes(bs.cycles[i], bs.cycles[j], s)) - t.require(bs.cycles[i]) -
                                     t.require(bs.cycles[j]);
                        if (!best || tr::lt(ex, *best)) best = ex;
                    }
            const T dist = *best / two;
            if (tr::lt(dist, zero)) throw DomainError("block_structure: cycles of different blocks overlap");
            bs.distance[a][b] = bs.distance[b][a] = dist;
        }
    const auto& d = bs.distance;
    if (k == 1) {
        bs.inner.assign(1, 0);
        bs.tree.nodes.push_back({true, dim[0], bs.blocks[0]});
        return bs;
    }

    // B and C lie on the same side of M iff the path between them avoids M
    auto same_side = [&](int mid, int b, int c) { return b == c || !tr::lt(d[b][mid] + d[mid][c], d[b][c]); };
    bs.inner.assign(k, 0);
    for (int mid = 0; mid < k; ++mid)
        for (int b = 0; b < k; ++b)
            for (int c = 0; c < k; ++c)
                if (b != mid && c != mid && !same_side(mid, b, c)) bs.inner[mid] = 1;

    const T spoke = tr::from_int(1);
    // bridge length between centres plus a spoke in and out of every block passed
    Matrix<T> delta(k, std::vector<T>(k, zero));
    for (int b = 0; b < k; ++b)
        for (int c = 0; c < b; ++c) {
            T v = d[b][c];
            int between = 0;
            for (int mid = 0; mid < k; ++mid) {
                if (mid == b || mid == c || same_side(mid, b, c)) continue;
                v -= d[b][c] - d[b][mid] - d[mid][c];
                ++between;
            }
            delta[b][c] = delta[c][b] = v + two * spoke * tr::from_int(1 + between);
        }
    const auto mt = tree_from_leaves(delta);

    auto& tree = bs.tree;
    for (int v = 0; v < mt.node_count(); ++v) {
        const int lab = mt.label[v];
        if (lab >= 0)
            tree.nodes.push_back({true, dim[lab], bs.blocks[lab]});
        else
            tree.nodes.push_back({});
    }
    for (std::size_t i = 0; i < mt.edges.size(); ++i) {
        const auto& e = mt.edges[i];
        typename BlockTree<T>::Link l{e.u, e.v, -1, -1, e.length};
        if (mt.label[e.u] >= 0) {
            l.length -= spoke;
            l.attach_a = static_cast<int>(i);
        }
        if (mt.label[e.v] >= 0) {
            l.length -= spoke;
            l.attach_b = static_cast<int>(i);
        }
        if (tr::lt(l.length, zero)) throw DomainError("block_structure: inconsistent block distances");
        tree.links.push_back(l);
    }
    tree.suppress_degree_two_junctions();
    return bs;
}

template <class T>
BlockStructure<T> block_structure(const FrequencyTable<T>& t) {
    return block_structure(t, default_cycle_cap(t));
}


template <class T>
struct Planarity {
    bool planar = false;
    std::vector<HomologyClass> witness;  // oriented cycles, pairwise without positive overlap
    bool outer_face = false;             // -sum(witness) has no positive overlap with any member
};

/// Searches oriented cycle bases for one without positive overlap. The graph is
/// planar iff one exists. A basis that also keeps the outer class -sum clear of
/// positive overlap is preferred as witness.
template <class T>
Planarity<T> planarity(const FrequencyTable<T>& t, const T& cap) {
    Planarity<T> out;
    if (t.rank == 0) {
        out.planar = out.outer_face = true;
        return out;
    }
    const auto cand = cycle_candidates(t, cap);
    std::vector<HomologyClass> oriented;
    for (const auto& c : cand) {
        oriented.push_back(c);
        oriented.push_back(negate(c));
    }
    const int m = static_cast<int>(oriented.size());
    std::vector<std::vector<char>> clear(m, std::vector<char>(m, 0));
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < a; ++b)
            if ((a >> 1) != (b >> 1)) clear[a][b] = clear[b][a] = !positive_overlap(t, oriented[a], oriented[b]);

    const int n = t.rank;
    std::vector<int> pick;
    IntMat rows;
    bool done = false;
    auto outer_clear = [&] {
        HomologyClass outer(n, 0);
        for (int o : pick) outer = add_classes(outer, oriented[o], -1);
        for (int o : pick)
            if (positive_overlap(t, outer, oriented[o])) return false;
        return true;
    };
    std::function<void(int)> rec = [&](int from) {
        if (static_cast<int>(pick.size()) == n) {
            if (!is_unimodular(rows)) return;
            const bool outer = outer_clear();
            if (!out.planar || outer) {
                out.planar = true;
                out.outer_face = outer;
                out.witness.clear();
                for (int o : pick) out.witness.push_back(oriented[o]);
            }
            done = outer;
            return;
        }
        for (int i = from; i < static_cast<int>(cand.size()) && !done; ++i) {
            if (static_cast<int>(cand.size()) - i < n - static_cast<int>(pick.size())) break;
            rows.emplace_back(cand[i].begin(), cand[i].end());
            if (hermite_normal_form(rows).size() == rows.size()) {
                // reversing every member preserves overlaps, so the first keeps its sign
                for (int o = 2 * i; o < 2 * i + (pick.empty() ? 1 : 2) && !done; ++o) {
                    bool ok = true;
                    for (int q : pick) ok = ok && clear[o][q];
                    if (!ok) continue;
                    pick.push_back(o);
                    rec(i + 1);
                    pick.pop_back();
                }
            }
            rows.pop_back();
        }
    };
    rec(0);
    return out;
}

template <class T>
Planarity<T> planarity(const FrequencyTable<T>& t) {
    return planarity(t, default_cycle_cap(t));
}

/// Splits h into edge-disjoint cycle classes, taking at each step the shortest
/// class k (then lexicographically least) with l(k) + l(h - k) = l(h).
template <class T>
std::vector<HomologyClass> cycle_decomposition(const FrequencyTable<T>& t, const HomologyClass& h) {
    using tr = scalar_traits<T>;
    const T l = t.require(h);
    if (tr::lt(t.lmax, l)) throw IncompleteTable("cycle_decomposition: table must be complete up to " + format_scalar(l));
    std::vector<HomologyClass> out;
    std::optional<HomologyClass> piece;
    for (const auto& e : t.entries) {
        if (!tr::lt(e.length, l)) break;
        std::vector<HomologyClass> signs{e.coordinates, negate(e.coordinates)};
        std::sort(signs.begin(), signs.end());
        for (const auto& k : signs) {
            const auto rest = add_classes(h, k, -1);
            if (is_zero_class(rest)) continue;
            const auto* r = t.find(rest);
            if (r && tr::eq(T(e.length + r->length), l)) {
                piece = k;
                break;
            }
        }
        if (piece) break;
    }
    if (!piece) {
        if (!is_cycle_frequency(t, h)) throw DomainError("cycle_decomposition: no splitting found for a non-cycle class");
        return {h};
    }
    for (const auto& part : {*piece, add_classes(h, *piece, -1)}) {
        const auto sub = cycle_decomposition(t, part);
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

/// Edges shared by two oriented face cycles without positive overlap: the
/// cycles of gi + gj, less the pairs of those cycles touching in a vertex.
template <class T>
int shared_edge_count(const FrequencyTable<T>& t, const HomologyClass& gi, const HomologyClass& gj) {
    using tr = scalar_traits<T>;
    const T li = t.require(gi), lj = t.require(gj);
    const auto h = add_classes(gi, gj);
    if (is_zero_class(h)) throw DomainError("shared_edge_count: the two cycles are opposite; their edge count is invisible");
    if (!detail::length_within(t, h, T(li + lj), true)) return 0;
    const auto parts = cycle_decomposition(t, h);
    int contacts = 0;
    for (std::size_t a = 0; a < parts.size(); ++a)
        for (std::size_t b = 0; b < a; ++b) {
            const T sum = t.require(parts[a]) + t.require(parts[b]);
            if (tr::eq(t.require(add_classes(parts[a], parts[b])), sum) &&
                tr::eq(t.require(add_classes(parts[a], parts[b], -1)), sum))
                ++contacts;
        }
    const int k = static_cast<int>(parts.size()) - contacts;
    if (k < 1) throw DomainError("shared_edge_count: more vertex contacts than decomposition cycles");
    return k;
}

struct DualGraph {
    std::vector<HomologyClass> faces;         // faces[0] is the outer face
    std::vector<std::vector<int>> multiplicity;
    int edge_count() const {
        int c = 0;
        for (std::size_t i = 0; i < multiplicity.size(); ++i)
            for (std::size_t j = 0; j < i; ++j) c += multiplicity[i][j];
        return c;
    }
};

/// Faces are the witness cycles and gamma_0 = -sum; multiplicities are shared
/// edge counts.
template <class T>
DualGraph build_dual(const FrequencyTable<T>& t, const std::vector<HomologyClass>& witness) {
    DualGraph d;
    const int n = static_cast<int>(witness.size());
    HomologyClass outer(t.rank, 0);
    for (const auto& g : witness) outer = add_classes(outer, g, -1);
    d.faces.push_back(outer);
    d.faces.insert(d.faces.end(), witness.begin(), witness.end());
    d.multiplicity.assign(n + 1, std::vector<int>(n + 1, 0));
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j < i; ++j) d.multiplicity[i][j] = d.multiplicity[j][i] = shared_edge_count(t, d.faces[i], d.faces[j]);
    return d;
}


/// A combinatorial graph read off a dual, with the face each dual vertex
/// stands for.
template <class T>
struct PrimalGraph {
    MetricGraph<T> graph;                         // unit lengths until recovered
    std::vector<std::pair<int, int>> edge_faces;  // per edge, the dual vertices on its two sides
    bool three_connected = false;                 // otherwise only the 2-isomorphism class is determined
};

/// Embeds the dual, traces its faces and takes the geometric dual of that
/// embedding. Edge e of the result crosses dual edge e.
template <class T = Rational>
PrimalGraph<T> dual_to_primal(const DualGraph& d) {
    const int n = static_cast<int>(d.multiplicity.size());
    MetricGraph<T> dual;
    for (int i = 0; i < n; ++i) dual.add_vertex();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j)
            for (int k = 0; k < d.multiplicity[i][j]; ++k) dual.add_edge(j, i, scalar_traits<T>::from_int(1));
    if (!is_connected(dual)) throw DomainError("dual_to_primal: dual graph is disconnected");
    const auto rot = planar_embedding(dual);
    if (!rot) throw DomainError("dual_to_primal: dual graph is not planar");
    const auto faces = trace_faces(dual, *rot);
    std::vector<int> face_of(dual.bond_count());
    for (int f = 0; f < static_cast<int>(faces.size()); ++f)
        for (BondIndex b : faces[f]) face_of[b] = f;
    PrimalGraph<T> p;
    for (std::size_t f = 0; f < faces.size(); ++f) p.graph.add_vertex();
    for (EdgeIndex e = 0; e < dual.edge_count(); ++e) {
        p.graph.add_edge(face_of[forward_bond(e)], face_of[backward_bond(e)], scalar_traits<T>::from_int(1));
        p.edge_faces.emplace_back(dual.edge(e).u, dual.edge(e).v);
    }
    p.three_connected = is_k_connected(p.graph, 3);
    return p;
}

/// Edge lengths of g0 from 2 l(e) = l(Fa) + l(Fb) - l(Fa + Fb), where Fa and Fb
/// are the oriented faces on either side of e and share only e. face_class[i]
/// is the class of face i, and edge_faces[e] names the two faces at edge e.
template <class T>
MetricGraph<T> recover_edge_lengths(const FrequencyTable<T>& t, const MetricGraph<T>& g0,
                                    const std::vector<HomologyClass>& face_class,
                                    const std::vector<std::pair<int, int>>& edge_faces) {
    using tr = scalar_traits<T>;
    if (static_cast<int>(edge_faces.size()) != g0.edge_count())
        throw DomainError("recover_edge_lengths: one face pair per edge is required");
    std::map<std::pair<int, int>, int> shared;
    for (auto [a, b] : edge_faces) ++shared[std::minmax(a, b)];
    MetricGraph<T> out;
    for (VertexIndex v = 0; v < g0.vertex_count(); ++v) out.add_vertex(g0.vertex_name(v));
    for (EdgeIndex e = 0; e < g0.edge_count(); ++e) {
        const auto [a, b] = edge_faces[e];
        if (a == b || shared[std::minmax(a, b)] != 1)
            throw DomainError("recover_edge_lengths: no two faces share exactly edge " + g0.edge(e).name +
                              "; the graph is not 3-connected");
        const T twice = t.require(face_class[a]) + t.require(face_class[b]) -
                        t.require(add_classes(face_class[a], face_class[b]));
        const T l = twice / tr::from_int(2);
        if (!tr::lt(tr::from_int(0), l))
            throw DomainError("recover_edge_lengths: nonpositive length for edge " + g0.edge(e).name);
        out.add_edge(g0.edge(e).u, g0.edge(e).v, l, g0.edge(e).name);
    }
    return out;
}


template <class T>
struct ReconstructionReport {
    int rank = 0;
    T cycle_cap{};
    std::optional<AlbaneseGram<T>> gram;
    std::optional<Complexity<T>> complexity;
    BlockStructure<T> blocks;
    Planarity<T> planarity;
    std::optional<DualGraph> dual;               // 2-connected planar graphs
    std::optional<PrimalGraph<T>> combinatorial;  // graph read off the dual
    std::optional<MetricGraph<T>> reconstructed;  // lengths recovered; unique when 3-connected
    std::vector<std::string> stages;              // what each stage did, in order

    // filled when the input was a graph
    std::optional<bool> planarity_matches;
    std::optional<bool> blocks_match;
    std::optional<bool> isomorphic;
    std::optional<double> max_length_error;
};

namespace detail {

template <class F>
auto run_stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const IncompleteTable& e) {
        throw IncompleteTable(std::string(name) + ": " + e.what());
    } catch (const DomainError& e) {
        throw DomainError(std::string(name) + ": " + e.what());
    }
}

}  // namespace detail

template <class T>
ReconstructionReport<T> full_pipeline(const FrequencyTable<T>& t) {
    ReconstructionReport<T> r;
    r.rank = t.rank;
    if (t.rank == 0) {
        r.planarity = {true, {}, true};
        r.stages.push_back("rank 0: the graph is a tree; nothing beyond that is visible");
        return r;
    }
    r.cycle_cap = detail::run_stage("cycles", [&] { return default_cycle_cap(t); });
    const auto sets = detail::run_stage("cycles", [&] { return cycle_generator_sets(t, r.cycle_cap, 1); });
    if (sets.empty()) throw DomainError("cycles: no basis of cycles below the cap " + format_scalar(r.cycle_cap));
    r.gram = detail::run_stage("albanese", [&] { return albanese_gram(t, sets.front()); });
    r.complexity = complexity(r.gram->gram);
    r.stages.push_back("albanese: Gram matrix from a basis of cycles");
    r.blocks = detail::run_stage("blocks", [&] { return block_structure(t, r.cycle_cap); });
    r.stages.push_back("blocks: " + std::to_string(r.blocks.tree.block_count()) + " block(s)");
    r.planarity = detail::run_stage("planarity", [&] { return planarity(t, r.cycle_cap); });
    if (!r.planarity.planar) {
        r.stages.push_back("planarity: nonplanar; Gram and block tree only");
        return r;
    }
    r.stages.push_back("planarity: planar");
    if (r.blocks.tree.nodes.size() != 1) {
        r.stages.push_back("dual: several blocks; the graph is not 2-connected, no dual assembled");
        return r;
    }
    if (t.rank == 1) {
        r.stages.push_back("dual: a single cycle; its number of edges is invisible to lengths, no dual assembled");
        return r;
    }
    r.dual = detail::run_stage("dual", [&] { return build_dual(t, r.planarity.witness); });
    r.combinatorial = detail::run_stage("primal", [&] { return dual_to_primal<T>(*r.dual); });
    r.stages.push_back("dual: " + std::to_string(r.dual->faces.size()) + " faces, " +
                       std::to_string(r.dual->edge_count()) + " edges");
    r.stages.push_back(r.combinatorial->three_connected ? "primal: 3-connected, determined uniquely"
                                                        : "primal: not 3-connected, determined up to 2-isomorphism");
    try {
        r.reconstructed = recover_edge_lengths(t, r.combinatorial->graph, r.dual->faces, r.combinatorial->edge_faces);
        r.stages.push_back("lengths: all edge lengths recovered");
    } catch (const DomainError& e) {
        r.stages.push_back(std::string("lengths: not recovered (") + e.what() + ")");
    }
    return r;
}

/// Oracle table of a connected graph, complete up to twice the cycle cap.
template <class T>
FrequencyTable<T> pipeline_table(const MetricGraph<T>& g) {
    T total = scalar_traits<T>::from_int(0);
    for (EdgeIndex e = 0; e < g.edge_count(); ++e) total += g.edge(e).length;
    T lmax = total;
    auto t = oracle_table(g, lmax, std::nullopt, true);
    if (t.rank == 0) return t;
    const T cap = default_cycle_cap(t);  // every cycle has length at most the total
    if (scalar_traits<T>::lt(lmax, cap * scalar_traits<T>::from_int(2)))
        t = oracle_table(g, T(cap * scalar_traits<T>::from_int(2)), std::nullopt, true);
    return t;
}

/// Forward in oracle mode, then the inverse pipeline, then comparison with
/// the combinatorial oracles.
template <class T>
ReconstructionReport<T> full_pipeline(const MetricGraph<T>& g) {
    if (!is_connected(g)) throw DomainError("full_pipeline: graph is disconnected; run each component");
    auto r = full_pipeline(pipeline_table(g));
    r.planarity_matches = r.planarity.planar == is_planar(g);
    bool leafless = true;
    for (VertexIndex v = 0; v < g.vertex_count(); ++v) leafless = leafless && g.degree(v) >= 2;
    if (leafless && r.rank > 0) r.blocks_match = block_trees_isomorphic(r.blocks.tree, biconnected_blocks(g));
    if (r.reconstructed) {
        const auto& h = *r.reconstructed;
        auto map = find_isomorphism(g, h, true);
        r.isomorphic = map.has_value();
        if (!map) map = find_isomorphism(g, h, false);
        if (map) {
            // match edges between the same pair of vertices by sorted length
            std::map<std::pair<int, int>, std::vector<double>> a, b;
            for (EdgeIndex e = 0; e < g.edge_count(); ++e) {
                const auto& x = g.edge(e);
                a[std::minmax((*map)[x.u], (*map)[x.v])].push_back(to_double(x.length));
            }
            for (EdgeIndex e = 0; e < h.edge_count(); ++e) b[std::minmax(h.edge(e).u, h.edge(e).v)].push_back(to_double(h.edge(e).length));
            double err = 0;
            for (auto& [k, v] : a) {
                auto& w = b[k];
                std::sort(v.begin(), v.end());
                std::sort(w.begin(), w.end());
                for (std::size_t i = 0; i < v.size() && i < w.size(); ++i) err = std::max(err, std::abs(v[i] - w[i]));
            }
            r.max_length_error = err;
        }
    }
    return r;
}

}  // namespace qg
