#pragma once

#include <bsl/error.hpp>
#include <bsl/ifrk.hpp>
#include <bsl/multiplier.hpp>
#include <bsl/profile.hpp>
#include <bsl/spectral_field.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace bsl {

struct CoupledOptions {
    DissipationConfig diss;   ///< default set from nu: vertical dissipation in ω only (Eq. 5)
    bool diss_override = false;
    int N = 2;                 ///< Sobolev order of the ghost energy
    double rtol = 1e-9;
    double atol = 1e-16;
    double h_max = 0.25;
    int n_samples = 200;
};

struct CoupledTrajectory {
    std::vector<double> times;
    std::vector<double> ghost_energy; ///< Eq. 14 analogue with α̂ = ν^{1/3}, C = ν^{-1/3}
    std::vector<double> plain_energy; ///< Σ |ω̂|² + |∂ₓθ̂|²
    SpectralField omega;              ///< final state
    SpectralField theta;
    double max_relative_increase = 0.0; ///< max_i E_i / min_{s<=i} E_s - 1
    IntegrationStats stats;
    int max_shift = 0;
};

namespace detail {

struct CoupledLayout {
    SpectralGrid g;
    std::vector<int> ks; ///< k ≠ 0 columns
    int nj() const { return g.nj(); }
    std::size_t w(std::size_t col, int j) const { return (2 * col) * nj() + std::size_t(j + g.J); }
    std::size_t p(std::size_t col, int j) const { return (2 * col + 1) * nj() + std::size_t(j + g.J); }
    std::size_t size() const { return 2 * ks.size() * std::size_t(nj()); }
};

} // namespace detail

/// Ghost energy Σ_{k≠0} (1+k²+ξ²)^N (AB)² [α̂|ω̂|² + (k²+min((ξ-kt)², C²))|θ̂|²].
inline double coupled_ghost_energy(const SpectralField& omega, const SpectralField& theta, double t, double nu, int N) {
    const auto& g = omega.grid();
    const CutoffConfig cut = CutoffConfig::for_nu(nu);
    const double ah = std::cbrt(nu);
    double e = 0.0;
    for (int k = -g.K; k <= g.K; ++k) {
        if (k == 0) continue;
        for (int j = -g.J; j <= g.J; ++j) {
            const double xi = g.xi(j);
            const FrequencyMode m{k, xi};
            const double M = multiplier_A(t, m) * multiplier_B(t, m, cut);
            const double eta = xi - k * t;
            const double q = double(k) * k + std::min(eta * eta, cut.C * cut.C);
            e += sobolev_weight(k, xi, N) * M * M * (ah * std::norm(omega(k, j)) + q * std::norm(theta(k, j)));
        }
    }
    return e;
}

/// Eq. 5 on the truncated lattice: ω̂' = -L_ω ω̂ + p̂, p̂' = -L_θ p̂ - Σ_j m_j k²/(k²+(ζ-kt)²) ω̂(k,ζ), ζ = ξ - ω_j,
/// with p̂ = ikθ̂. Contributions whose source ζ lies outside the grid are dropped (zero padding).
inline CoupledTrajectory integrate_coupled_linear(const ProfileSpectrum& spec, const SpectralGrid& grid, double nu,
                                                  double t_end, const SpectralField& omega0,
                                                  const SpectralField& theta0, CoupledOptions opt = {}) {
    grid.validate();
    require(nu > 0.0, ErrorKind::Config, "coupled integrator needs nu > 0");
    require(t_end > 0.0, ErrorKind::Config, "t_end must be positive");
    require(omega0.grid() == grid && theta0.grid() == grid, ErrorKind::Domain, "initial data grid mismatch");
    require(grid.K >= 1, ErrorKind::Config, "coupled integrator needs K >= 1");
    if (!opt.diss_override) opt.diss = DissipationConfig{0.0, nu, 0.0, 0.0};
    opt.diss.validate();

    struct Shift {
        int s;
        cplx m;
    };
    std::vector<Shift> shifts;
    CoupledTrajectory out;
    for (const auto& a : spec.atoms) {
        const int s = atom_shift(a, grid.dxi());
        require(std::abs(s) < grid.J, ErrorKind::Truncation,
                "profile convolution support exceeds the ξ-grid (increase J or Ly resolution)");
        shifts.push_back({s, a.mass});
        out.max_shift = std::max(out.max_shift, std::abs(s));
    }
    require(!spec.density, ErrorKind::Config, "coupled integrator supports atomic spectra only");

    detail::CoupledLayout L{grid, {}};
    for (int k = -grid.K; k <= grid.K; ++k)
        if (k != 0) L.ks.push_back(k);

    std::vector<DecaySymbol> sym(L.size());
    CVec y(L.size());
    for (std::size_t c = 0; c < L.ks.size(); ++c) {
        const int k = L.ks[c];
        for (int j = -grid.J; j <= grid.J; ++j) {
            const double xi = grid.xi(j);
            sym[L.w(c, j)] = {opt.diss.nu_x * k * k, opt.diss.nu_y, xi, double(k)};
            sym[L.p(c, j)] = {opt.diss.mu_x * k * k, opt.diss.mu_y, xi, double(k)};
            y[L.w(c, j)] = omega0(k, j);
            y[L.p(c, j)] = cplx(0.0, k) * theta0(k, j);
        }
    }

    auto rhs = [&](double t, const CVec& s, CVec& o) {
        for (std::size_t c = 0; c < L.ks.size(); ++c) {
            const double k = L.ks[c];
            for (int j = -grid.J; j <= grid.J; ++j) {
                o[L.w(c, j)] = s[L.p(c, j)];
                cplx acc{};
                for (const auto& sh : shifts) {
                    const int jz = j - sh.s;
                    if (jz < -grid.J || jz > grid.J) continue;
                    const double eta = grid.xi(jz) - k * t;
                    acc += sh.m * (k * k / (k * k + eta * eta)) * s[L.w(c, jz)];
                }
                o[L.p(c, j)] = -acc;
            }
        }
    };

    SpectralField w(grid), th(grid);
    auto unpack = [&](const CVec& s) {
        w.set_zero();
        th.set_zero();
        for (std::size_t c = 0; c < L.ks.size(); ++c) {
            const int k = L.ks[c];
            for (int j = -grid.J; j <= grid.J; ++j) {
                w(k, j) = s[L.w(c, j)];
                th(k, j) = s[L.p(c, j)] / cplx(0.0, k);
            }
        }
    };
    double running_min = 0.0;
    auto record = [&](double t, const CVec& s) {
        unpack(s);
        const double e = coupled_ghost_energy(w, th, t, nu, opt.N);
        double pe = 0.0;
        for (const auto& v : s) pe += std::norm(v);
        out.times.push_back(t);
        out.ghost_energy.push_back(e);
        out.plain_energy.push_back(pe);
        if (out.times.size() == 1) running_min = e;
        if (running_min > 0.0) out.max_relative_increase = std::max(out.max_relative_increase, e / running_min - 1.0);
        running_min = std::min(running_min, e);
    };
    record(0.0, y);

    std::vector<double> samples;
    for (int i = 1; i <= opt.n_samples; ++i) samples.push_back(t_end * i / opt.n_samples);
    AdaptiveOptions ao;
    ao.rtol = opt.rtol;
    ao.atol = opt.atol;
    ao.h_max = opt.h_max;
    out.stats = integrate_adaptive(
        rhs, std::span<const DecaySymbol>(sym), y, 0.0, t_end, ao,
        [&](double t, const CVec& s, bool) { record(t, s); }, samples);
    unpack(y);
    out.omega = w;
    out.theta = th;
    return out;
}

} // namespace bsl
