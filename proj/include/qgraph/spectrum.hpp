#pragma once

// Magnetic Laplacian spectra through the bond scattering matrix U(k). Roots of
// the secular equation det(I - U(k)) = 0 are located as zeros of the smallest
// singular value of I - U(k).

#include "qgraph/metric_graph.hpp"
#include "qgraph/parallel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

namespace qg {

/// Constant 1-form per edge, stored as the edge phase phi_e = 2 pi a_e L_e.
struct FluxForm {
    std::vector<double> phase;

    double bond_phase(BondIndex b) const { return bond_sign(b) * phase[edge_of(b)]; }

    /// Psi of a closed walk: 2 pi times the integral of the form along it.
    double flux(std::span<const BondIndex> bonds) const {
        double s = 0;
        for (BondIndex b : bonds) s += bond_phase(b);
        return s;
    }
    double flux_of_chain(std::span<const int> z) const {
        double s = 0;
        for (std::size_t e = 0; e < z.size(); ++e) s += z[e] * phase[e];
        return s;
    }
    /// a_e in inverse length units.
    template <class T>
    double form_value(const MetricGraph<T>& g, EdgeIndex e) const {
        return phase[e] / (2 * std::numbers::pi * to_double(g.length(e)));
    }
};

/// Gauge with a = 0 on spanning-forest edges and Psi(basis cycle i) = s_i.
template <class T>
FluxForm flux_representative(const MetricGraph<T>& g, const HomologyBasis& hb, std::span<const double> basis_fluxes) {
    if (static_cast<int>(basis_fluxes.size()) != hb.rank())
        throw DomainError("flux_representative: expected " + std::to_string(hb.rank()) + " basis fluxes");
    FluxForm f{std::vector<double>(g.edge_count(), 0.0)};
    for (int i = 0; i < hb.rank(); ++i) f.phase[hb.cotree_edges[i]] = basis_fluxes[i];
    return f;
}

template <class T>
FluxForm flux_representative(const MetricGraph<T>& g, std::span<const double> basis_fluxes) {
    return flux_representative(g, homology_basis(g), basis_fluxes);
}

template <class T>
FluxForm zero_flux(const MetricGraph<T>& g) {
    return FluxForm{std::vector<double>(g.edge_count(), 0.0)};
}

/// U(k)_{b'b} = [o(b') = t(b)] (2/deg t(b) - [b' = reverse b]) exp(i(k L_b + theta_b)).
template <class T>
Eigen::MatrixXcd bond_matrix(const MetricGraph<T>& g, const FluxForm& flux, double k) {
    if (!(k > 0)) throw DomainError("bond_matrix: k must be positive");
    const int nb = g.bond_count();
    const auto deg = g.degrees();
    const auto out = g.outgoing();
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(nb, nb);
    for (BondIndex b = 0; b < nb; ++b) {
        const std::complex<double> phase = std::polar(1.0, k * to_double(g.bond_length(b)) + flux.bond_phase(b));
        const VertexIndex v = g.terminal(b);
        const double transmit = 2.0 / deg[v];
        for (BondIndex next : out[v]) u(next, b) = (transmit - (next == reverse(b) ? 1.0 : 0.0)) * phase;
    }
    return u;
}

template <class T>
Eigen::VectorXd secular_singular_values(const MetricGraph<T>& g, const FluxForm& flux, double k) {
    const Eigen::MatrixXcd u = bond_matrix(g, flux, k);
    const Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(u.rows(), u.cols()) - u;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    return svd.singularValues();  // descending
}

/// Smallest singular value of I - U(k).
template <class T>
double secular_gap(const MetricGraph<T>& g, const FluxForm& flux, double k) {
    const auto s = secular_singular_values(g, flux, k);
    return s.size() ? s(s.size() - 1) : 0.0;
}

namespace detail {

/// Golden-section search. The gap is V-shaped at a root, where parabolic
/// steps stall at sqrt(eps); golden sections keep shrinking to `tol`.
template <class F>
std::pair<double, double> golden_minimum(F&& f, double a, double b, double tol) {
    const double r = (std::sqrt(5.0) - 1) / 2;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace detail

struct SpectrumSlice {
    std::vector<double> basis_fluxes;
    std::vector<std::pair<double, int>> roots;  // (k, multiplicity), ascending, k = 0 first when present
    double k_max = 0;
    double tolerance = 0;
    double grid_step = 0;
    bool weyl_ok = true;
    std::vector<std::string> warnings;

    /// Wavenumbers repeated by multiplicity.
    std::vector<double> wavenumbers() const {
        std::vector<double> ks;
        for (const auto& [k, m] : roots) ks.insert(ks.end(), m, k);
        return ks;
    }
    int count() const {
        int n = 0;
        for (const auto& r : roots) n += r.second;
        return n;
    }
    int zero_multiplicity() const { return !roots.empty() && roots[0].first == 0.0 ? roots[0].second : 0; }
};

struct SpectrumOptions {
    double grid_step = 0;            // 0 selects pi / (8 L)
    double refine_tol = 1e-13;       // bracket width for root refinement
    double accept_gap = 1e-7;        // refined minimum below this is a root
    double multiplicity_gap = 1e-6;  // singular values below this count towards multiplicity
    int max_halvings = 4;
};

/// Multiplicity of k = 0: one per component on which the flux of every cycle
/// is a multiple of 2 pi (trees always contribute).
template <class T>
int zero_mode_multiplicity(const MetricGraph<T>& g, const FluxForm& flux) {
    const auto hb = homology_basis(g);
    const auto comps = connected_components(g);
    std::vector<char> trivial(comps.count, 1);
    for (int i = 0; i < hb.rank(); ++i) {
        const double psi = flux.flux(hb.cycles[i].bonds);
        const double r = psi / (2 * std::numbers::pi);
        if (std::abs(r - std::round(r)) > 1e-9) trivial[hb.component_of_axis[i]] = 0;
    }
    int m = 0;
    for (char t : trivial) m += t;
    return m;
}

template <class T>
SpectrumSlice eigen_wavenumbers(const MetricGraph<T>& g, const FluxForm& flux, double k_max,
                                const SpectrumOptions& opt = {}) {
    if (!(k_max > 0)) throw DomainError("eigen_wavenumbers: k_max must be positive");
    const double total = to_double(g.total_length());
    if (!(total > 0)) throw DomainError("eigen_wavenumbers: graph has no edges");
    SpectrumSlice slice;
    slice.k_max = k_max;
    slice.tolerance = opt.accept_gap;
    {
        const auto hb = homology_basis(g);
        for (const auto& c : hb.cycles) slice.basis_fluxes.push_back(flux.flux(c.bonds));
    }
    double step = opt.grid_step > 0 ? opt.grid_step : std::numbers::pi / (8 * total);
    const int zero_mult = zero_mode_multiplicity(g, flux);
    const double kmin = 1e-6;
    auto gap = [&](double k) { return secular_gap(g, flux, k); };

    for (int attempt = 0; attempt <= opt.max_halvings; ++attempt) {
        slice.roots.clear();
        slice.grid_step = step;
        if (zero_mult > 0) slice.roots.push_back({0.0, zero_mult});
        const int npts = static_cast<int>(std::ceil((k_max - kmin) / step)) + 3;
        std::vector<double> ks(npts), gs(npts);
        for (int i = 0; i < npts; ++i) ks[i] = kmin + i * step;
        parallel_for(npts, [&](int i) { gs[i] = gap(ks[i]); });
        std::vector<std::pair<double, int>> found(npts, {-1.0, 0});
        parallel_for(npts, [&](int i) {
            if (i == 0 || i + 1 >= npts) return;
            if (!(gs[i] <= gs[i - 1] && gs[i] <= gs[i + 1])) return;
            if (gs[i] == gs[i - 1] && i > 1 && gs[i - 1] <= gs[i - 2]) return;  // plateau counted once
            const auto [k0, g0] = detail::golden_minimum(gap, ks[i - 1], ks[i + 1], opt.refine_tol);
            if (g0 > opt.accept_gap || k0 > k_max || k0 < kmin) return;
            const auto sv = secular_singular_values(g, flux, k0);
            int mult = 0;
            for (int j = 0; j < sv.size(); ++j) mult += sv(j) < opt.multiplicity_gap;
            found[i] = {k0, std::max(mult, 1)};
        });
        for (const auto& f : found)
            if (f.second > 0) {
                if (slice.roots.size() > (zero_mult > 0 ? 1u : 0u) && std::abs(slice.roots.back().first - f.first) < 1e-9)
                    continue;  // same root reached from adjacent brackets
                slice.roots.push_back(f);
            }
        const double weyl = total * k_max / std::numbers::pi;
        slice.weyl_ok = std::abs(slice.count() - weyl) <= 2.0 * g.edge_count() + 2.0;
        if (slice.weyl_ok) break;
        slice.warnings.push_back("Weyl count off at grid step " + std::to_string(step) + "; halving");
        step /= 2;
    }
    if (!slice.weyl_ok) slice.warnings.push_back("Weyl tripwire still failing after refinement; roots may be missing");
    return slice;
}

/// Sorted 2 pi |n + t| / L over n in Z, first `count` values.
inline std::vector<double> circle_closed_form(double L, double t, int count) {
    if (!(L > 0)) throw DomainError("circle_closed_form: L must be positive");
    std::vector<double> ks;
    const int span = count + 2 + static_cast<int>(std::abs(t));
    for (int n = -span; n <= span; ++n) ks.push_back(2 * std::numbers::pi * std::abs(n + t) / L);
    std::sort(ks.begin(), ks.end());
    ks.resize(std::min<std::size_t>(ks.size(), count));
    return ks;
}

}  // namespace qg
