#pragma once

// From coefficient signals to a frequency table: for each homology class h
// (up to sign) the frequency Psi(h) along the ray and the length of the
// minimal periodic orbits in that class.

#include "qgraph/cosine_recovery.hpp"
#include "qgraph/int_linalg.hpp"
#include "qgraph/trace_formula.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <numeric>

namespace qg {

/// Class h with |Psi(h)| = mu within tol, |h_i| <= bound, canonical sign.
inline std::optional<HomologyClass> identify_class(const FluxRay& ray, const mp_float& mu, const mp_float& tol,
                                                   int bound = 64) {
    using boost::multiprecision::abs;
    using boost::multiprecision::pow;
    const int n = ray.rank();
    if (abs(mu) <= tol) return HomologyClass(n, 0);
    if (n == 0) return std::nullopt;
    std::vector<mp_float> x;
    for (const auto& c : ray.basis) x.push_back(c.value());
    x.push_back(-mu);
    const mp_float weight = 1 / (tol * 1000);
    const auto rel = integer_relation(x, weight, bound, mp_float(tol * 100 * (1 + abs(mu))));
    if (!rel || std::abs((*rel)[n]) != 1) return std::nullopt;
    HomologyClass h(n);
    for (int i = 0; i < n; ++i) h[i] = static_cast<int>((*rel)[i] * (*rel)[n]);
    if (abs(abs(ray.flux(h)) - mu) > tol * (1 + abs(mu))) return std::nullopt;
    return canonical_sign(h);
}

/// Snap for the derivative method in rational mode: mu is identified as
/// |Psi(h)| on the class lattice and nu as a rational number.
inline CosineSnap ray_snap(const FluxRay& ray, int identify_digits = 40, std::int64_t max_denominator = 1000000000000) {
    return [ray, identify_digits, max_denominator](const mp_float& mu, const mp_float& nu)
               -> std::optional<std::pair<mp_float, mp_float>> {
        const mp_float tol = boost::multiprecision::pow(mp_float(10), -(identify_digits - 8));
        const auto h = identify_class(ray, mu, tol);
        if (!h) return std::nullopt;
        const auto q = rational_approximation(nu, tol, max_denominator);
        if (!q) return std::nullopt;
        return std::pair{boost::multiprecision::abs(ray.flux(*h)), to_mp(*q)};
    };
}

struct GroupBasis {
    int rank = 0;
    std::vector<mp_float> basis;              // positive basis frequencies
    std::vector<HomologyClass> coordinates;   // one per input frequency: mu = sum c_i basis_i
    bool generic = true;                      // rank matches the expected rank
    bool relation_failure = false;            // more independent frequencies than expected
};

/// Z-basis of the group generated by the frequencies. Q-independent
/// frequencies are picked greedily; every other frequency is a rational
/// combination of them, found by LLL. The Hermite normal form of all
/// coordinates (over a common denominator) is the basis.
inline GroupBasis group_basis(const std::vector<mp_float>& freqs, int expected_rank = -1,
                              const mp_float& tol = mp_float("1e-25"), int bound = 1000) {
    using boost::multiprecision::abs;
    GroupBasis out;
    std::vector<mp_float> indep;
    std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> coef;  // rational coords (num, den)
    const mp_float weight = 1 / (tol * 1000);
    for (const auto& mu : freqs) {
        if (!(mu > 0)) throw DomainError("group_basis: frequencies must be positive");
        std::optional<IntVec> rel;
        if (!indep.empty()) {
            std::vector<mp_float> x = indep;
            x.push_back(mu);
            rel = integer_relation(x, weight, bound, mp_float(tol * (1 + abs(mu))));
            if (rel && rel->back() == 0) rel.reset();
        }
        if (!rel) {
            indep.push_back(mu);
            for (auto& c : coef) c.push_back({0, 1});
            std::vector<std::pair<std::int64_t, std::int64_t>> c(indep.size(), {0, 1});
            c.back() = {1, 1};
            coef.push_back(std::move(c));
            continue;
        }
        const std::int64_t d = -rel->back();
        std::vector<std::pair<std::int64_t, std::int64_t>> c;
        for (std::size_t i = 0; i < indep.size(); ++i) {
            const Rational q((*rel)[i], d);
            c.push_back({q.numerator(), q.denominator()});
        }
        coef.push_back(std::move(c));
    }
    const int r = static_cast<int>(indep.size());
    out.rank = r;
    if (expected_rank >= 0) {
        out.generic = r == expected_rank;
        out.relation_failure = r > expected_rank;
    }
    if (r == 0) return out;
    std::int64_t den = 1;
    for (const auto& c : coef)
        for (const auto& [p, q] : c) den = std::lcm(den, q);
    IntMat rows;
    for (const auto& c : coef) {
        IntVec row;
        for (const auto& [p, q] : c) row.push_back(p * (den / q));
        rows.push_back(std::move(row));
    }
    IntMat h = hermite_normal_form(rows);
    for (auto& row : h) {
        mp_float v = 0;
        for (int i = 0; i < r; ++i) v += row[i] * indep[i];
        v /= den;
        if (v < 0) {
            for (auto& x : row) x = -x;
            v = -v;
        }
        out.basis.push_back(v);
    }
    const IntMat ht = transpose(h);
    for (const auto& row : rows) {
        auto c = solve_integer(ht, row);
        if (!c) throw DomainError("group_basis: coordinates not integral in the Hermite basis");
        out.coordinates.emplace_back(c->begin(), c->end());
    }
    return out;
}

/// A query needed a class whose length the table cannot decide.
struct IncompleteTable : DomainError {
    using DomainError::DomainError;
};

template <class T>
struct FrequencyEntry {
    HomologyClass coordinates;  // canonical sign: first nonzero entry positive
    mp_float frequency = 0;     // |Psi|, 0 when the table carries no ray
    T length{};                 // minimal orbit length
};

template <class T>
struct FrequencyTable {
    int rank = 0;
    std::vector<mp_float> basis;  // basis frequencies; empty without a ray
    T lmax{};                     // every class with length <= lmax is listed
    bool generic = true;
    std::vector<FrequencyEntry<T>> entries;  // ascending length
    /// Oracle mode: minimal length of any class on demand.
    std::function<std::optional<T>(const HomologyClass&)> backend;

    void add(FrequencyEntry<T> e) {
        e.coordinates = canonical_sign(std::move(e.coordinates));
        index_[e.coordinates] = entries.size();
        entries.push_back(std::move(e));
    }
    const FrequencyEntry<T>* find(const HomologyClass& h) const {
        auto it = index_.find(canonical_sign(h));
        return it == index_.end() ? nullptr : &entries[it->second];
    }
    /// l*(h); nullopt means longer than lmax (or no orbit at all).
    std::optional<T> length(const HomologyClass& h) const {
        if (static_cast<int>(h.size()) != rank) throw DomainError("frequency table: class has the wrong rank");
        if (is_zero_class(h)) throw DomainError("frequency table: the zero class has no minimal length");
        if (const auto* e = find(h)) return e->length;
        if (backend) return backend(h);
        return std::nullopt;
    }
    /// l*(h), or IncompleteTable when the table cannot decide it.
    T require(const HomologyClass& h) const {
        if (auto l = length(h)) return *l;
        throw IncompleteTable("frequency table: length of a class beyond lmax = " + format_scalar(lmax) +
                              " is needed; raise lmax");
    }
    void reindex() {
        index_.clear();
        for (std::size_t i = 0; i < entries.size(); ++i) index_[entries[i].coordinates] = i;
    }

private:
    std::map<HomologyClass, std::size_t> index_;
};

namespace detail {

template <class T>
void sort_entries(FrequencyTable<T>& t) {
    std::stable_sort(t.entries.begin(), t.entries.end(), [](const auto& a, const auto& b) {
        if (scalar_traits<T>::lt(a.length, b.length)) return true;
        if (scalar_traits<T>::lt(b.length, a.length)) return false;
        return a.coordinates < b.coordinates;
    });
    t.reindex();
}

}  // namespace detail

/// Oracle mode: lengths straight from the cover search, coordinates in the
/// homology basis of g. With a ray the frequencies are filled in as well.
/// With on_demand, classes beyond lmax are answered by a fresh search.
template <class T>
FrequencyTable<T> oracle_table(const MetricGraph<T>& g, const T& lmax, const std::optional<FluxRay>& ray = std::nullopt,
                               bool on_demand = false) {
    const auto hb = homology_basis(g);
    if (ray && ray->rank() != hb.rank()) throw DomainError("oracle_table: ray rank does not match the graph");
    const auto lt = build_length_table(g, hb, lmax);
    FrequencyTable<T> t;
    t.rank = hb.rank();
    t.lmax = lmax;
    if (ray)
        for (const auto& c : ray->basis) t.basis.push_back(c.value());
    for (const auto& [h, l] : lt.lengths) {
        if (canonical_sign(h) != h) continue;
        t.add({h, ray ? mp_float(boost::multiprecision::abs(ray->flux(h))) : mp_float(0), l});
    }
    detail::sort_entries(t);
    if (on_demand) {
        struct Memo {
            std::mutex lock;
            std::map<HomologyClass, std::optional<T>> known;
        };
        t.backend = [g, hb, memo = std::make_shared<Memo>()](const HomologyClass& h) -> std::optional<T> {
            const auto key = canonical_sign(h);
            {
                std::lock_guard<std::mutex> guard(memo->lock);
                if (auto it = memo->known.find(key); it != memo->known.end()) return it->second;
            }
            std::optional<T> l;
            if (class_component(hb, h)) l = minimal_orbit_length(g, hb, h, 0).length;
            std::lock_guard<std::mutex> guard(memo->lock);
            return memo->known.emplace(key, l).first->second;
        };
    }
    return t;
}

enum class RecoveryMethod { derivative, recurrence };

/// Cosine parameters of one coefficient signal.
template <class T>
CosineFit recover_signal(const CoefficientSignal<T>& s, RecoveryMethod method) {
    if (method == RecoveryMethod::derivative) {
        const auto snap = scalar_traits<T>::exact ? ray_snap(s.ray) : CosineSnap{};
        return recover_cosine_derivative([&s](int k) { return s.derivative(k); }, {}, snap);
    }
    return recover_cosine_recurrence([&s](const mp_float& t) { return s(t); }, s.band_bound);
}

/// Spectral mode: walk the length buckets in increasing order and record each
/// frequency at its first appearance, then assemble the group basis.
template <class T>
FrequencyTable<T> scan_lengths(const std::vector<CoefficientSignal<T>>& signals, const T& lmax,
                               RecoveryMethod method, int expected_rank = -1) {
    using boost::multiprecision::abs;
    std::vector<CosineFit> fits(signals.size());
    parallel_for(static_cast<int>(signals.size()), [&](int i) {
        if (!scalar_traits<T>::lt(lmax, signals[i].length)) fits[i] = recover_signal(signals[i], method);
    });
    const mp_float match_tol("1e-20");
    std::vector<mp_float> freqs;
    std::vector<T> first;
    for (std::size_t i = 0; i < signals.size(); ++i) {
        if (scalar_traits<T>::lt(lmax, signals[i].length)) continue;
        for (const auto& [mu, nu] : fits[i].terms) {
            if (abs(nu) <= match_tol) continue;
            bool known = false;
            for (const auto& f : freqs) known = known || abs(f - mu) <= match_tol * (1 + abs(mu));
            if (known) continue;
            freqs.push_back(mu);
            first.push_back(signals[i].length);
        }
    }
    FrequencyTable<T> t;
    t.lmax = lmax;
    if (freqs.empty()) return t;
    const auto gb = group_basis(freqs, expected_rank);
    t.rank = gb.rank;
    t.basis = gb.basis;
    t.generic = gb.generic;
    for (std::size_t j = 0; j < freqs.size(); ++j) t.add({gb.coordinates[j], freqs[j], first[j]});
    detail::sort_entries(t);
    return t;
}

template <class T>
struct ComponentSplit {
    std::vector<FrequencyTable<T>> tables;  // one per component carrying cycles
    int tree_components = 0;                // components without cycles
};

/// Frequencies mu, mu' belong to one component when mu + mu' or mu - mu' is
/// itself a frequency. Each class of this relation spans a sublattice, which
/// becomes the coordinate lattice of its own table. The partition is only as
/// good as lmax: a link that first shows up beyond lmax is not seen.
template <class T>
ComponentSplit<T> split_components(const FrequencyTable<T>& t, int zero_multiplicity) {
    const int m = static_cast<int>(t.entries.size());
    std::vector<int> parent(m);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> root = [&](int x) { return parent[x] == x ? x : parent[x] = root(parent[x]); };
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
            const auto& ca = t.entries[a].coordinates;
            const auto& cb = t.entries[b].coordinates;
            if (t.find(add_classes(ca, cb)) || t.find(add_classes(ca, cb, -1))) parent[root(a)] = root(b);
        }
    std::map<int, std::vector<int>> groups;
    for (int a = 0; a < m; ++a) groups[root(a)].push_back(a);

    ComponentSplit<T> out;
    IntMat all_rows;
    for (const auto& [r, members] : groups) {
        IntMat rows;
        for (int a : members) rows.emplace_back(t.entries[a].coordinates.begin(), t.entries[a].coordinates.end());
        IntMat h = hermite_normal_form(rows);
        FrequencyTable<T> c;
        c.rank = static_cast<int>(h.size());
        c.lmax = t.lmax;
        c.generic = t.generic;
        if (!t.basis.empty()) {
            for (auto& row : h) {
                mp_float v = 0;
                for (int i = 0; i < t.rank; ++i) v += row[i] * t.basis[i];
                if (v < 0) {
                    for (auto& x : row) x = -x;
                    v = -v;
                }
                c.basis.push_back(v);
            }
        }
        // coordinates in the sublattice: solve sum_k x_k h_k = coords
        IntMat sub;
        std::vector<int> pivots;
        for (int col = 0, k = 0; col < t.rank && k < c.rank; ++col) {
            bool pivot = false;
            for (int i = 0; i < c.rank; ++i) pivot = pivot || h[i][col] != 0;
            if (!pivot) continue;
            IntVec probe(c.rank);
            for (int i = 0; i < c.rank; ++i) probe[i] = h[i][col];
            IntMat trial = sub;
            trial.push_back(probe);
            if (hermite_normal_form(trial).size() == trial.size()) {
                sub = trial;
                pivots.push_back(col);
                ++k;
            }
        }
        for (int a : members) {
            const auto& co = t.entries[a].coordinates;
            IntVec rhs;
            for (int col : pivots) rhs.push_back(co[col]);
            auto x = solve_integer(sub, rhs);
            if (!x) throw DomainError("split_components: inconsistent partition");
            HomologyClass hx(x->begin(), x->end());
            HomologyClass back(t.rank, 0);
            for (int k = 0; k < c.rank; ++k)
                for (int i = 0; i < t.rank; ++i) back[i] += hx[k] * static_cast<int>(h[k][i]);
            if (back != co) throw DomainError("split_components: inconsistent partition");
            c.add({hx, t.entries[a].frequency, t.entries[a].length});
        }
        if (t.backend) {
            c.backend = [backend = t.backend, h, n = t.rank](const HomologyClass& x) {
                HomologyClass back(n, 0);
                for (std::size_t k = 0; k < x.size(); ++k)
                    for (int i = 0; i < n; ++i) back[i] += x[k] * static_cast<int>(h[k][i]);
                return backend(back);
            };
        }
        all_rows.insert(all_rows.end(), h.begin(), h.end());
        detail::sort_entries(c);
        out.tables.push_back(std::move(c));
    }
    if (static_cast<int>(all_rows.size()) != t.rank || (t.rank > 0 && !is_unimodular(all_rows)))
        throw DomainError("split_components: inconsistent partition; the component lattices do not split the group");
    out.tree_components = zero_multiplicity - static_cast<int>(out.tables.size());
    if (out.tree_components < 0)
        throw DomainError("split_components: more frequency components than zero modes");
    return out;
}

}  // namespace qg
