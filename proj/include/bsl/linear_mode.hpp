#pragma once

#include <bsl/error.hpp>
#include <bsl/ifrk.hpp>
#include <bsl/multiplier.hpp>
#include <bsl/spectral_field.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace bsl {

struct NoShearSystem {
    FrequencyMode mode;
    double alpha = 0.0;
    DissipationConfig diss;
};

struct EigenPair {
    cplx lambda1; ///< larger real part
    cplx lambda2;
};

enum class NoShearClass { stable, exponentially_unstable, marginal };

inline const char* to_string(NoShearClass c) {
    switch (c) {
    case NoShearClass::stable: return "stable";
    case NoShearClass::exponentially_unstable: return "exponentially_unstable";
    case NoShearClass::marginal: return "marginal";
    }
    return "?";
}

using Mat2 = std::array<std::array<cplx, 2>, 2>;

/// Eq. 3 matrix acting on (ω̃, θ̃).
inline Mat2 no_shear_matrix(const NoShearSystem& sys) {
    require(sys.mode.k != 0, ErrorKind::Domain, "no-shear system needs k != 0");
    const double k = sys.mode.k;
    const double q = k * k + sys.mode.xi * sys.mode.xi;
    const cplx I(0.0, 1.0);
    return {{{-sys.diss.nu() * q, I * k}, {I * k * sys.alpha / q, -sys.diss.mu() * q}}};
}

inline EigenPair no_shear_eigenvalues(const NoShearSystem& sys) {
    require(sys.mode.k != 0, ErrorKind::Domain, "no_shear_eigenvalues: k must be nonzero");
    sys.diss.validate();
    const double k = sys.mode.k;
    const double q = k * k + sys.mode.xi * sys.mode.xi;
    const double nu = sys.diss.nu(), mu = sys.diss.mu();
    const double half_diff = 0.5 * (nu - mu) * q;
    const cplx root = std::sqrt(cplx(half_diff * half_diff - sys.alpha * k * k / q, 0.0));
    const cplx center(-0.5 * (nu + mu) * q, 0.0);
    cplx l1 = center + root, l2 = center - root;
    if (l2.real() > l1.real()) std::swap(l1, l2);
    return {l1, l2};
}

inline NoShearClass classify_no_shear(const NoShearSystem& sys) {
    require(sys.diss.one_vanishes(), ErrorKind::Config, "dichotomy requires nu = 0 or mu = 0");
    if (sys.alpha > 0.0) return NoShearClass::stable;
    if (sys.alpha < 0.0) return NoShearClass::exponentially_unstable;
    return NoShearClass::marginal;
}

struct ModeTrajectory {
    FrequencyMode mode;
    std::vector<double> times;
    std::vector<ModeState> states;
    std::vector<double> energy; ///< |ω̃|² + k²|θ̃|² (Schrödinger runs: |u|²)
    std::vector<char> at_sample;
    IntegrationStats stats;

    std::size_t size() const { return times.size(); }
    void push(double t, cplx w, cplx th, double e, bool sample) {
        times.push_back(t);
        states.push_back({w, th, t});
        energy.push_back(e);
        at_sample.push_back(sample ? 1 : 0);
    }
};

struct ModeRunOptions {
    double rtol = 1e-10;
    double atol = 1e-14;
    double h_max = 0.0;
    std::vector<double> samples; ///< forced output times
    bool record_steps = true;    ///< also record every accepted step
};

inline std::vector<double> log_spaced(double a, double b, int n) {
    require(a > 0.0 && b > a && n >= 2, ErrorKind::Config, "log_spaced: need 0 < a < b, n >= 2");
    std::vector<double> v(n);
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i) v[i] = std::exp(la + (lb - la) * i / (n - 1));
    v.back() = b;
    return v;
}

/// Integrates the Eq. 3 system from (ω̃, θ̃)(0) with exact dissipation factors.
inline ModeTrajectory integrate_no_shear(const NoShearSystem& sys, ModeState init, double t_end,
                                         const ModeRunOptions& opt = {}) {
    const Mat2 m = no_shear_matrix(sys);
    require(t_end > 0.0, ErrorKind::Config, "t_end must be positive");
    std::array<DecaySymbol, 2> sym{DecaySymbol{-m[0][0].real()}, DecaySymbol{-m[1][1].real()}};
    auto rhs = [&](double, const CVec& y, CVec& out) {
        out[0] = m[0][1] * y[1];
        out[1] = m[1][0] * y[0];
    };
    ModeTrajectory tr;
    tr.mode = sys.mode;
    const double k2 = double(sys.mode.k) * sys.mode.k;
    CVec y{init.omega, init.theta};
    tr.push(0.0, y[0], y[1], std::norm(y[0]) + k2 * std::norm(y[1]), true);
    AdaptiveOptions ao;
    ao.rtol = opt.rtol;
    ao.atol = opt.atol;
    ao.h_max = opt.h_max;
    tr.stats = integrate_adaptive(
        rhs, std::span<const DecaySymbol>(sym), y, 0.0, t_end, ao,
        [&](double t, const CVec& s, bool smp) {
            if (opt.record_steps || smp || t == t_end)
                tr.push(t, s[0], s[1], std::norm(s[0]) + k2 * std::norm(s[1]), smp);
        },
        opt.samples);
    return tr;
}

struct ExponentReport {
    cplx beta1;
    cplx beta2;
    double c = 0.0;
    bool double_root = false; ///< α = 1/4, log-corrected growth not fitted
    bool v2_marginal = false; ///< α = -2, c = 3/2
    double rate_theta = 0.0;  ///< t^{-1/2+c}, also v₁ - ⟨v₁⟩
    double rate_v1 = 0.0;
    double rate_v2 = 0.0;     ///< t^{-3/2+c}
    double rate_omega = 0.0;  ///< t^{1/2+c}
    std::optional<double> fitted_beta;
    std::optional<TimeInterval> fit_window;
};

inline ExponentReport inviscid_exponents(double alpha) {
    ExponentReport r;
    const cplx root = std::sqrt(cplx(1.0 - 4.0 * alpha, 0.0));
    r.beta1 = 0.5 * (1.0 + root);
    r.beta2 = 0.5 * (1.0 - root);
    r.c = 0.5 * root.real();
    r.double_root = std::abs(1.0 - 4.0 * alpha) < 1e-14;
    r.v2_marginal = std::abs(alpha + 2.0) < 1e-14;
    r.rate_theta = -0.5 + r.c;
    r.rate_v1 = -0.5 + r.c;
    r.rate_v2 = -1.5 + r.c;
    r.rate_omega = 0.5 + r.c;
    return r;
}

/// Oracle for u'' + α/(1+t²) u = 0. States store (u, u') as (omega, theta); energy is |u|².
/// Sampled at n_samples log-spaced times in [t_end·1e-4, t_end] plus every accepted step if requested.
inline ModeTrajectory integrate_schrodinger(double alpha, double t_end, double rtol, cplx u0 = 0.0, cplx up0 = 1.0,
                                            double t0 = 0.0, int n_samples = 400, bool record_steps = false) {
    require(t_end > t0, ErrorKind::Config, "integrate_schrodinger: t_end must exceed t0");
    require(rtol > 0.0, ErrorKind::Config, "rtol must be positive");
    std::array<DecaySymbol, 2> sym{};
    auto rhs = [alpha](double t, const CVec& y, CVec& out) {
        out[0] = y[1];
        out[1] = -alpha / (1.0 + t * t) * y[0];
    };
    ModeTrajectory tr;
    tr.push(t0, u0, up0, std::norm(u0), true);
    std::vector<double> samples;
    const double span = t_end - t0;
    if (n_samples >= 2) {
        for (double s : log_spaced(std::max(1e-4 * span, 1e-12), span, n_samples)) samples.push_back(t0 + s);
    }
    CVec y{u0, up0};
    AdaptiveOptions ao;
    ao.rtol = rtol;
    ao.atol = rtol * 1e-3;
    tr.stats = integrate_adaptive(
        rhs, std::span<const DecaySymbol>(sym), y, t0, t_end, ao,
        [&](double t, const CVec& s, bool smp) {
            if (record_steps || smp) tr.push(t, s[0], s[1], std::norm(s[0]), smp);
        },
        samples);
    return tr;
}

/// Least-squares slope of log|u| against log t over the sample points inside window.
/// Uses the omega slot (u for Schrödinger runs, ω̃ for mode runs).
inline double fit_growth_exponent(const ModeTrajectory& tr, std::optional<TimeInterval> window = std::nullopt) {
    require(!tr.times.empty(), ErrorKind::Fit, "empty trajectory");
    TimeInterval w = window.value_or(TimeInterval{tr.times.back() / 100.0, tr.times.back(), false});
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double t = tr.times[i];
        if (t < w.lo || t > w.hi || !tr.at_sample[i]) continue;
        require(t > 0.0, ErrorKind::Fit, "fit window must lie in t > 0");
        const double a = std::abs(tr.states[i].omega);
        require(a > 0.0 && std::isfinite(a), ErrorKind::Fit, "nonpositive amplitude in fit window");
        const double x = std::log(t), yv = std::log(a);
        sx += x;
        sy += yv;
        sxx += x * x;
        sxy += x * yv;
        ++n;
    }
    require(n >= 2, ErrorKind::Fit, "fewer than two samples in fit window");
    const double den = n * sxx - sx * sx;
    require(den > 0.0, ErrorKind::Fit, "degenerate fit window");
    return (n * sxy - sx * sy) / den;
}

namespace detail {
inline std::array<DecaySymbol, 2> affine_symbols(const FrequencyMode& m, const DissipationConfig& d) {
    const double k = m.k;
    return {DecaySymbol{d.nu_x * k * k, d.nu_y, m.xi, k}, DecaySymbol{d.mu_x * k * k, d.mu_y, m.xi, k}};
}
} // namespace detail

/// Eq. 9 in the variables (ω̃, φ = kθ̃): ω' = -Lω + iφ, φ' = -L_θφ + iα/(1+(ξ/k-t)²) ω.
inline ModeTrajectory integrate_affine_mode(const FrequencyMode& mode, double alpha, const DissipationConfig& diss,
                                            double t_end, ModeState init, const ModeRunOptions& opt = {}) {
    require(mode.k != 0, ErrorKind::Domain, "integrate_affine_mode: k must be nonzero");
    require(t_end > 0.0, ErrorKind::Config, "t_end must be positive");
    diss.validate();
    const double k = mode.k;
    const double s = mode.xi / k;
    const auto sym = detail::affine_symbols(mode, diss);
    auto rhs = [alpha, s](double t, const CVec& y, CVec& out) {
        out[0] = cplx(0.0, 1.0) * y[1];
        out[1] = cplx(0.0, alpha / (1.0 + (s - t) * (s - t))) * y[0];
    };
    ModeTrajectory tr;
    tr.mode = mode;
    CVec y{init.omega, k * init.theta};
    tr.push(0.0, y[0], init.theta, std::norm(y[0]) + std::norm(y[1]), true);
    AdaptiveOptions ao;
    ao.rtol = opt.rtol;
    ao.atol = opt.atol;
    ao.h_max = opt.h_max;
    tr.stats = integrate_adaptive(
        rhs, std::span<const DecaySymbol>(sym), y, 0.0, t_end, ao,
        [&](double t, const CVec& st, bool smp) {
            if (opt.record_steps || smp || t == t_end)
                tr.push(t, st[0], st[1] / k, std::norm(st[0]) + std::norm(st[1]), smp);
        },
        opt.samples);
    return tr;
}

/// Default Eq. 9 dissipation: ν(k² + (ξ-kt)²) on ω̃, none on θ̃.
inline ModeTrajectory integrate_affine_mode(const FrequencyMode& mode, double alpha, double nu, double t_end,
                                            ModeState init = {1.0, 0.0, 0.0}, const ModeRunOptions& opt = {}) {
    require(nu >= 0.0, ErrorKind::Config, "nu must be >= 0");
    return integrate_affine_mode(mode, alpha, DissipationConfig::vorticity_only(nu), t_end, init, opt);
}

/// sup_t of the squared operator norm of the (ω̃, kθ̃) propagator, i.e. the worst-case energy ratio.
inline double affine_propagator_gain(const FrequencyMode& mode, double alpha, const DissipationConfig& diss,
                                     double t_end, double rtol = 1e-9, double h_max = 0.5) {
    require(mode.k != 0, ErrorKind::Domain, "propagator gain: k must be nonzero");
    require(t_end > 0.0, ErrorKind::Config, "t_end must be positive");
    diss.validate();
    const double s = mode.xi / mode.k;
    const auto s2 = detail::affine_symbols(mode, diss);
    std::array<DecaySymbol, 4> sym{s2[0], s2[1], s2[0], s2[1]};
    auto rhs = [alpha, s](double t, const CVec& y, CVec& out) {
        const cplx c(0.0, alpha / (1.0 + (s - t) * (s - t)));
        out[0] = cplx(0.0, 1.0) * y[1];
        out[1] = c * y[0];
        out[2] = cplx(0.0, 1.0) * y[3];
        out[3] = c * y[2];
    };
    CVec y{1.0, 0.0, 0.0, 1.0};
    double gain = 1.0;
    AdaptiveOptions ao;
    ao.rtol = rtol;
    ao.atol = rtol * 1e-4;
    ao.h_max = h_max;
    integrate_adaptive(rhs, std::span<const DecaySymbol>(sym), y, 0.0, t_end, ao,
                       [&](double, const CVec& p, bool) {
                           // columns (p0,p1), (p2,p3); largest eigenvalue of Φ*Φ
                           const double a = std::norm(p[0]) + std::norm(p[1]);
                           const double d = std::norm(p[2]) + std::norm(p[3]);
                           const cplx b = std::conj(p[0]) * p[2] + std::conj(p[1]) * p[3];
                           const double h = 0.5 * (a - d);
                           gain = std::max(gain, 0.5 * (a + d) + std::sqrt(h * h + std::norm(b)));
                       });
    return gain;
}

struct BoundEnvelopes {
    double alpha_hat = 0.0;
    double proof = 0.0;   ///< (1+1/α̂)(1+C²)^{1+α̂} exp(πα̂/(νC⁴)), Step 2c/3
    double display = 0.0; ///< (1+1/α̂)(1+C²) exp(α̂/(νC²)), Eq. 10 as displayed
};

inline BoundEnvelopes mode_bound_envelopes(double alpha, double nu, const CutoffConfig& cut) {
    require(nu > 0.0, ErrorKind::Config, "envelope needs nu > 0");
    cut.validate();
    BoundEnvelopes e;
    e.alpha_hat = std::max(std::abs(alpha), std::cbrt(nu));
    const double a = e.alpha_hat, C2 = cut.C * cut.C;
    e.proof = (1.0 + 1.0 / a) * std::pow(1.0 + C2, 1.0 + a) * std::exp(std::numbers::pi * a / (nu * C2 * C2));
    e.display = (1.0 + 1.0 / a) * (1.0 + C2) * std::exp(a / (nu * C2));
    return e;
}

struct BoundReport {
    double ratio = 0.0;
    BoundEnvelopes envelopes;
    bool pass = false;         ///< against the proof envelope
    bool pass_display = false; ///< against the Eq. 10 display envelope
};

inline BoundReport verify_ratio(double ratio, double alpha, double nu, const CutoffConfig& cut) {
    BoundReport r;
    r.ratio = ratio;
    r.envelopes = mode_bound_envelopes(alpha, nu, cut);
    r.pass = ratio <= r.envelopes.proof;
    r.pass_display = ratio <= r.envelopes.display;
    return r;
}

inline BoundReport verify_mode_bound(const ModeTrajectory& tr, double alpha, double nu, const CutoffConfig& cut) {
    require(!tr.energy.empty(), ErrorKind::Domain, "empty trajectory");
    const double e0 = tr.energy.front();
    require(e0 > 0.0, ErrorKind::Domain, "zero initial energy: ratio undefined");
    double sup = 0.0;
    for (double e : tr.energy) sup = std::max(sup, e);
    return verify_ratio(sup / e0, alpha, nu, cut);
}

/// t ‖v₁,≠‖_{L²} / ‖ω_≠‖_{H¹} with moving-frame Biot–Savart v̂₁ = -i(ξ-kt)ω̂/(k²+(ξ-kt)²).
inline double orr_ratio(const SpectralField& omega, double t) {
    require(t > 0.0, ErrorKind::Domain, "orr_ratio: t must be positive");
    const auto& g = omega.grid();
    double v1 = 0.0, h1 = 0.0;
    for (int k = -g.K; k <= g.K; ++k) {
        if (k == 0) continue;
        for (int j = -g.J; j <= g.J; ++j) {
            const double xi = g.xi(j);
            const double eta = xi - k * t;
            const double a2 = std::norm(omega(k, j));
            v1 += eta * eta / std::pow(double(k) * k + eta * eta, 2) * a2;
            h1 += (1.0 + double(k) * k + xi * xi) * a2;
        }
    }
    require(h1 > 0.0, ErrorKind::Domain, "orr_ratio: zero vorticity");
    return t * std::sqrt(v1) / std::sqrt(h1);
}

} // namespace bsl
