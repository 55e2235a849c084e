#pragma once

#include <bsl/error.hpp>
#include <bsl/multiplier.hpp>
#include <bsl/profile.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace bsl {

struct ConditionResult {
    double value = 0.0;
    double threshold = 0.0;
    bool pass = true;
};

struct MainConditionResult : ConditionResult {
    double argmax_xi = 0.0;
    std::size_t grid_points = 0;
    double grid_delta = 0.0; ///< relative change of the sup when the log-grid density doubles
    double grid_xi_min = 1e-3;
    double grid_xi_max = 1e4;
    int grid_per_decade = 0;
};

namespace detail {

/// Σ/∫ |F(T')(w)| ((1+|ξ+w|)/(1+|ξ|) + (1+|ξ|)/(1+|ξ+w|))^N (1 + min(ν^{-2/3}, |w|^{2/3})) at one ξ.
inline double main_integrand_sum(const ProfileSpectrum& s, int N, double nu, double xi) {
    const double cap = std::pow(nu, -2.0 / 3.0);
    auto term = [&](double w, double mass_abs) {
        const double r = (1.0 + std::abs(xi + w)) / (1.0 + std::abs(xi));
        return mass_abs * std::pow(r + 1.0 / r, N) * (1.0 + std::min(cap, std::pow(std::abs(w), 2.0 / 3.0)));
    };
    double v = 0.0;
    for (const auto& a : s.atoms) v += term(a.frequency, std::abs(a.mass));
    if (s.density) {
        const auto& d = *s.density;
        for (std::size_t i = 1; i < d.xi.size(); ++i)
            v += 0.5 * (term(d.xi[i], d.abs_value[i]) + term(d.xi[i - 1], d.abs_value[i - 1])) *
                 (d.xi[i] - d.xi[i - 1]);
    }
    return v;
}

inline std::vector<double> main_grid(const ProfileSpectrum& s, double lo, double hi, int per_decade) {
    std::vector<double> g{0.0};
    const int n = int(std::ceil(std::log10(hi / lo) * per_decade)) + 1;
    for (int i = 0; i < n; ++i) {
        const double x = lo * std::pow(10.0, double(i) / per_decade);
        g.push_back(x);
        g.push_back(-x);
    }
    for (const auto& a : s.atoms) g.push_back(-a.frequency);
    return g;
}

inline std::pair<double, double> main_sup(const ProfileSpectrum& s, int N, double nu, const std::vector<double>& g) {
    double best = 0.0, arg = 0.0;
    for (double xi : g) {
        const double v = main_integrand_sum(s, N, nu, xi);
        if (v > best) {
            best = v;
            arg = xi;
        }
    }
    return {best, arg};
}

inline void check_order(int N, double nu) {
    require(N >= 0, ErrorKind::Config, "Sobolev order N must be >= 0");
    require(nu > 0.0, ErrorKind::Config, "nu must be > 0");
}

} // namespace detail

/// Eq. 27 left side; sup over a log grid in |ξ| ∪ {0} ∪ {-ω_j}. Pass iff value < ν^{1/3}/100.
inline MainConditionResult condition_main(const ProfileSpectrum& s, int N, double nu, int per_decade = 40) {
    detail::check_order(N, nu);
    MainConditionResult r;
    r.threshold = std::cbrt(nu) / 100.0;
    r.grid_per_decade = per_decade;
    if (s.empty()) {
        r.pass = true;
        return r;
    }
    const auto g = detail::main_grid(s, r.grid_xi_min, r.grid_xi_max, per_decade);
    const auto [v, arg] = detail::main_sup(s, N, nu, g);
    const auto g2 = detail::main_grid(s, r.grid_xi_min, r.grid_xi_max, 2 * per_decade);
    const double v2 = detail::main_sup(s, N, nu, g2).first;
    r.value = std::max(v, v2);
    r.argmax_xi = arg;
    r.grid_points = g2.size();
    r.grid_delta = r.value > 0.0 ? std::abs(v2 - v) / r.value : 0.0;
    r.pass = r.value < r.threshold;
    return r;
}

/// Eq. 18 left side ∫(1+|ξ|)^{N+5}|F(T')|. Pass iff value <= 4^{-N}ν^{1/3}.
inline ConditionResult condition_sobolev(const ProfileSpectrum& s, int N, double nu, double tail_tolerance = 1e-3) {
    detail::check_order(N, nu);
    ConditionResult r;
    r.threshold = std::pow(4.0, -N) * std::cbrt(nu);
    auto w = [N](double x) { return std::pow(1.0 + std::abs(x), N + 5); };
    double total = 0.0;
    for (const auto& a : s.atoms) total += w(a.frequency) * std::abs(a.mass);
    if (s.from_samples && !s.atoms.empty()) {
        // weighted mass carried by the top quarter of resolved frequencies
        const double wmax = s.max_abs_frequency();
        double tail = 0.0;
        for (const auto& a : s.atoms)
            if (std::abs(a.frequency) > 0.75 * wmax) tail += w(a.frequency) * std::abs(a.mass);
        require(!(total > 0.0 && tail > tail_tolerance * total), ErrorKind::Divergence,
                "weighted spectral sum does not converge: sampled spectrum decays too slowly");
    }
    if (s.density && s.density->xi.size() >= 2) {
        const auto& d = *s.density;
        double part = 0.0;
        for (std::size_t i = 1; i < d.xi.size(); ++i)
            part += 0.5 * (w(d.xi[i]) * d.abs_value[i] + w(d.xi[i - 1]) * d.abs_value[i - 1]) * (d.xi[i] - d.xi[i - 1]);
        const double edge = std::max(w(d.xi.front()) * d.abs_value.front(), w(d.xi.back()) * d.abs_value.back());
        const double span = d.xi.back() - d.xi.front();
        require(!(part > 0.0 && edge * span > tail_tolerance * part), ErrorKind::Divergence,
                "weighted density does not decay at the truncation radius");
        total += part;
    }
    r.value = total;
    r.pass = r.value <= r.threshold;
    return r;
}

struct KernelReport {
    double max_ratio = 0.0;        ///< max of kernel/(1+|ξ-ζ|)^{N+5}
    double declared_constant = 0.0; ///< √2 (1+3^N)
    bool pass = true;
    double max_sqrt_ratio = 0.0;   ///< sqrt((k²+(ξ-kt)²)/(k²+(ζ-kt)²)) / (√2 (1+d))
    double max_b_ratio = 0.0;      ///< B(ξ)/B(ζ) / (1+d)^4
    double max_branch_ratio = 0.0; ///< Sobolev ratio / ((3/2)^N (1+d^N)) on |ξ| >= 3|ζ|
    bool branch_pass = true;
    std::size_t samples = 0;
    std::size_t branch_samples = 0;
};

/// Samples the Step 4 Schur kernel at ζ = ξ - ω_j for random (t, k, ξ, atom).
inline KernelReport kernel_bound_check(const ProfileSpectrum& s, int N, double nu, std::size_t samples,
                                       std::uint64_t seed = 1) {
    detail::check_order(N, nu);
    KernelReport r;
    r.declared_constant = std::sqrt(2.0) * (1.0 + std::pow(3.0, N));
    if (s.atoms.empty() || samples == 0) return r;
    const CutoffConfig cut = CutoffConfig::for_nu(nu);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.0, 4.0 * cut.C);
    std::uniform_real_distribution<double> ulog(-3.0, 3.0);
    std::uniform_int_distribution<int> uk(1, 8);
    std::uniform_int_distribution<std::size_t> ua(0, s.atoms.size() - 1);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t n = 0; n < samples; ++n) {
        const double t = ut(rng);
        const int k = coin(rng) ? uk(rng) : -uk(rng);
        const double xi = (coin(rng) ? 1.0 : -1.0) * std::pow(10.0, ulog(rng));
        const double w = s.atoms[ua(rng)].frequency;
        const double zeta = xi - w;
        const double d = std::abs(xi - zeta);
        const double qx = double(k) * k + (xi - k * t) * (xi - k * t);
        const double qz = double(k) * k + (zeta - k * t) * (zeta - k * t);
        const double sq = std::sqrt(qx / qz);
        const double br = multiplier_B(t, {k, xi}, cut) / multiplier_B(t, {k, zeta}, cut);
        const double sob = (1.0 + std::pow(std::abs(xi), N)) / (1.0 + std::pow(std::abs(zeta), N));
        const double ratio = sq * br * sob / std::pow(1.0 + d, N + 5);
        r.max_ratio = std::max(r.max_ratio, ratio);
        r.max_sqrt_ratio = std::max(r.max_sqrt_ratio, sq / (std::sqrt(2.0) * (1.0 + d)));
        r.max_b_ratio = std::max(r.max_b_ratio, br / std::pow(1.0 + d, 4));
        if (std::abs(xi) >= 3.0 * std::abs(zeta)) {
            ++r.branch_samples;
            r.max_branch_ratio = std::max(r.max_branch_ratio, sob / (std::pow(1.5, N) * (1.0 + std::pow(d, N))));
        }
        ++r.samples;
    }
    r.pass = r.max_ratio <= r.declared_constant;
    r.branch_pass = r.max_branch_ratio <= 1.0 + 1e-12;
    return r;
}

struct AdmissibilityReport {
    std::string profile_kind;
    std::string description;
    int N = 0;
    double nu = 0.0;
    MainConditionResult main;
    ConditionResult sobolev;
    double alpha_surrogate = 0.0;
    std::string alpha_formula = "min(value_main / 2^N, value_sobolev)";
    std::size_t atoms = 0;
    bool pass() const { return main.pass && sobolev.pass; }
};

inline AdmissibilityReport admit(const TemperatureProfile& p, int N, double nu) {
    detail::check_order(N, nu);
    const auto s = profile_spectrum(p);
    AdmissibilityReport r;
    r.profile_kind = p.kind_name();
    r.description = p.description;
    r.N = N;
    r.nu = nu;
    r.main = condition_main(s, N, nu);
    r.sobolev = condition_sobolev(s, N, nu);
    r.alpha_surrogate = std::min(r.main.value / std::pow(2.0, N), r.sobolev.value);
    r.atoms = s.atoms.size();
    return r;
}

} // namespace bsl
