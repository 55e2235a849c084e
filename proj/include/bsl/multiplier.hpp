#pragma once

#include <bsl/error.hpp>
#include <bsl/spectral_field.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>

namespace bsl {

struct FrequencyMode {
    int k = 1;
    double xi = 0.0;
};

struct ModeState {
    cplx omega{};
    cplx theta{};
    double t = 0.0;
};

/// Moving-frame dissipation: ω decays at nu_x k² + nu_y (ξ-kt)², θ at mu_x k² + mu_y (ξ-kt)².
struct DissipationConfig {
    double nu_x = 0.0;
    double nu_y = 0.0;
    double mu_x = 0.0;
    double mu_y = 0.0;

    double nu() const { return nu_y; }
    double mu() const { return mu_y; }
    bool one_vanishes() const { return nu() == 0.0 || mu() == 0.0; }

    void validate() const {
        require(nu_x >= 0.0 && nu_y >= 0.0 && mu_x >= 0.0 && mu_y >= 0.0, ErrorKind::Config,
                "dissipation coefficients must be nonnegative");
    }

    /// Eq. 9 setting: full dissipation in vorticity, none in temperature.
    static DissipationConfig vorticity_only(double nu) { return {nu, nu, 0.0, 0.0}; }
    /// Eq. 19 setting: vertical dissipation in both fields.
    static DissipationConfig vertical(double nu) { return {0.0, nu, 0.0, nu}; }
};

struct CutoffConfig {
    double C = 2.0;

    void validate() const {
        require(C > 1.0 && std::isfinite(C), ErrorKind::Config, "cutoff C must be finite and > 1");
    }
    static CutoffConfig for_nu(double nu) {
        require(nu > 0.0, ErrorKind::Config, "cutoff default needs nu > 0");
        return {std::pow(nu, -1.0 / 3.0)};
    }
};

enum class HConvention { Sqrt, Squared };

struct MultiplierWeights {
    double A = 1.0;
    double B = 1.0;
    double M = 1.0;
    double H = 1.0;
};

struct TimeInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty = true;
    double length() const { return empty ? 0.0 : hi - lo; }
};

namespace detail {
inline double slope_ratio(const FrequencyMode& m) {
    require(m.k != 0, ErrorKind::Domain, "multiplier undefined for k = 0");
    return m.xi / m.k;
}
} // namespace detail

/// A = exp(-2 ∫₀ᵗ dτ / (1 + (ξ/k - τ)²)).
inline double multiplier_A(double t, const FrequencyMode& mode) {
    const double s = detail::slope_ratio(mode);
    require(t >= 0.0, ErrorKind::Domain, "multiplier_A: t must be >= 0");
    return std::exp(-2.0 * (std::atan(s) - std::atan(s - t)));
}

inline TimeInterval resonant_window(const FrequencyMode& mode, const CutoffConfig& cut) {
    const double s = detail::slope_ratio(mode);
    if (s + cut.C < 0.0) return {};
    return {std::max(0.0, s - cut.C), s + cut.C, false};
}

/// Exponent 2∫ over the clipped window, i.e. -log B.
inline double multiplier_B_exponent(double t, const FrequencyMode& mode, const CutoffConfig& cut) {
    const double s = detail::slope_ratio(mode);
    cut.validate();
    require(t >= 0.0, ErrorKind::Domain, "multiplier_B: t must be >= 0");
    const double lo = std::max(0.0, s - cut.C);
    const double hi = std::min(t, s + cut.C);
    if (hi <= lo) return 0.0;
    return 2.0 * (std::asinh(hi - s) - std::asinh(lo - s));
}

inline double multiplier_B(double t, const FrequencyMode& mode, const CutoffConfig& cut) {
    return std::exp(-multiplier_B_exponent(t, mode, cut));
}

inline double multiplier_H(double t, const FrequencyMode& mode, double nu, HConvention conv = HConvention::Sqrt) {
    require(nu > 0.0, ErrorKind::Config, "multiplier_H: nu must be > 0");
    const double k = mode.k;
    const double eta = mode.xi - k * t;
    const double sq = k * k + std::min(eta * eta, std::pow(nu, -2.0 / 3.0));
    return conv == HConvention::Sqrt ? std::sqrt(sq) : sq;
}

inline MultiplierWeights multiplier_weights(double t, const FrequencyMode& mode, double nu,
                                            const CutoffConfig& cut) {
    MultiplierWeights w;
    w.A = multiplier_A(t, mode);
    w.B = multiplier_B(t, mode, cut);
    w.M = w.A * w.B;
    w.H = multiplier_H(t, mode, nu);
    return w;
}

/// Lower bound on M valid for every t ≥ 0: A > e^{-2π}, B ≥ e^{-4 asinh C}.
inline double multiplier_M_floor(const CutoffConfig& cut) {
    return std::exp(-2.0 * std::numbers::pi) * std::exp(-4.0 * std::asinh(cut.C));
}

/// E = |α||ω|² + (k² + min((ξ-kt)², C²))|θ|². With nu given, |α| is replaced by max(|α|, ν^{1/3}).
inline double mode_energy(const ModeState& s, const FrequencyMode& mode, double alpha, const CutoffConfig& cut,
                          std::optional<double> nu_hat = std::nullopt) {
    double a = std::abs(alpha);
    if (nu_hat) a = std::max(a, std::cbrt(*nu_hat));
    const double k = mode.k;
    const double eta = mode.xi - k * s.t;
    return a * std::norm(s.omega) + (k * k + std::min(eta * eta, cut.C * cut.C)) * std::norm(s.theta);
}

inline double sobolev_weight(int k, double xi, int N) {
    return std::pow(1.0 + double(k) * k + xi * xi, N);
}

struct UnitWeight {
    double operator()(double, int, double) const { return 1.0; }
};

/// sqrt(Σ (1+k²+ξ²)^N |w(t,k,ξ) f̂(k,ξ)|²)
template <class Weight = UnitWeight>
double weighted_sobolev_norm(const SpectralField& f, int N, double t = 0.0, Weight&& w = Weight{}) {
    require(N >= 0, ErrorKind::Config, "Sobolev order must be >= 0");
    const auto& g = f.grid();
    double sum = 0.0;
    for (int k = -g.K; k <= g.K; ++k)
        for (int j = -g.J; j <= g.J; ++j) {
            const double xi = g.xi(j);
            const double wv = w(t, k, xi);
            sum += sobolev_weight(k, xi, N) * wv * wv * std::norm(f(k, j));
        }
    return std::sqrt(sum);
}

} // namespace bsl
