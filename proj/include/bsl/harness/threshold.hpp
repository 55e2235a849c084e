#pragma once

#include <bsl/error.hpp>
#include <bsl/linear_mode.hpp>
#include <bsl/multiplier.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace bsl {

struct PanelPoint {
    int k = 1;
    double xi_over_k = 0.0; ///< in units of ν^{-1/3}
};

/// {1, 2, 4} × {0, ½, 1, 2}·ν^{-1/3}: resonant and non-resonant cases of the proof's split.
inline std::vector<PanelPoint> default_panel() {
    std::vector<PanelPoint> p;
    for (int k : {1, 2, 4})
        for (double r : {0.0, 0.5, 1.0, 2.0}) p.push_back({k, r});
    return p;
}

inline std::vector<FrequencyMode> panel_modes(const std::vector<PanelPoint>& panel, double nu) {
    const double C = std::cbrt(1.0 / nu);
    std::vector<FrequencyMode> m;
    for (const auto& p : panel) m.push_back({p.k, p.xi_over_k * C * p.k});
    return m;
}

struct StabilityOptions {
    std::vector<PanelPoint> panel = default_panel();
    double safety = 2.0;
    std::optional<double> horizon; ///< default 4ν^{-1/3} + 20
    double rtol = 1e-9;
    bool use_display_envelope = false;
};

struct StabilityEvaluation {
    double alpha = 0.0;
    double nu = 0.0;
    double sup_gain = 0.0; ///< worst case over the panel and over initial data
    FrequencyMode worst_mode;
    BoundEnvelopes envelopes;
    double threshold = 0.0; ///< safety × envelope
    bool stable = false;
};

inline double stability_horizon(double nu, const StabilityOptions& opt) {
    return opt.horizon ? *opt.horizon : 4.0 * std::cbrt(1.0 / nu) + 20.0;
}

/// Affine-profile mode stability under vorticity-only vertical dissipation (the Thm "good" setting).
inline StabilityEvaluation evaluate_stability(double alpha, double nu, const StabilityOptions& opt = {}) {
    require(nu > 0.0, ErrorKind::Config, "stability predicate needs nu > 0");
    require(!opt.panel.empty(), ErrorKind::Config, "empty mode panel");
    StabilityEvaluation ev;
    ev.alpha = alpha;
    ev.nu = nu;
    const double T = stability_horizon(nu, opt);
    for (const auto& m : panel_modes(opt.panel, nu)) {
        const double g = affine_propagator_gain(m, alpha, DissipationConfig::vorticity_only(nu), T, opt.rtol);
        if (g > ev.sup_gain) {
            ev.sup_gain = g;
            ev.worst_mode = m;
        }
    }
    ev.envelopes = mode_bound_envelopes(alpha, nu, CutoffConfig::for_nu(nu));
    ev.threshold = opt.safety * (opt.use_display_envelope ? ev.envelopes.display : ev.envelopes.proof);
    ev.stable = ev.sup_gain <= ev.threshold;
    return ev;
}

struct ThresholdResult {
    double alpha_star = 0.0;   ///< most negative α found stable (= stable_end)
    double stable_end = 0.0;
    double unstable_end = 0.0; ///< NaN when there is no transition
    bool transition = true;
    int evaluations = 0;
    double certified = 0.0; ///< -ν^{1/3}/100
    bool contains_certified = false;
};

using StabilityPredicate = std::function<bool(double alpha)>;

/// Bisection on α over [lo, hi] (default [-1, 0]); stable at hi, unstable at lo.
inline ThresholdResult threshold_bisect(double nu, const StabilityPredicate& stable, double tol, double lo = -1.0,
                                        double hi = 0.0) {
    require(tol > 0.0 && lo < hi, ErrorKind::Config, "threshold_bisect: need tol > 0 and lo < hi");
    ThresholdResult r;
    r.certified = -std::cbrt(nu) / 100.0;
    const bool s_hi = stable(hi), s_lo = stable(lo);
    r.evaluations = 2;
    if (!s_hi) fail(ErrorKind::Bracket, "threshold_bisect: upper bracket end is not stable");
    if (s_lo) {
        r.transition = false;
        r.alpha_star = r.stable_end = lo;
        r.unstable_end = std::numeric_limits<double>::quiet_NaN();
        r.contains_certified = true;
        return r;
    }
    double a = lo, b = hi; // a unstable, b stable
    while (b - a > tol) {
        const double m = 0.5 * (a + b);
        ++r.evaluations;
        (stable(m) ? b : a) = m;
    }
    r.stable_end = r.alpha_star = b;
    r.unstable_end = a;
    r.contains_certified = r.alpha_star <= r.certified;
    return r;
}

inline ThresholdResult threshold_bisect(double nu, const StabilityOptions& opt, double tol) {
    return threshold_bisect(nu, [&](double a) { return evaluate_stability(a, nu, opt).stable; }, tol);
}

struct ScalingPair {
    double nu = 0.0;
    double alpha_star = 0.0;
};

struct ScalingFit {
    double slope = 0.0;     ///< |α*| ≈ prefactor·ν^slope
    double prefactor = 0.0;
    double intercept = 0.0; ///< log prefactor
    double slope_stderr = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double confidence = 0.95;
    double r2 = 0.0;
    std::size_t n = 0;
};

/// Least squares on (log ν, log|α*|) with a Student-t interval on the slope.
inline ScalingFit scaling_fit(const std::vector<ScalingPair>& pairs, double confidence = 0.95) {
    require(pairs.size() >= 4, ErrorKind::Fit, "scaling_fit needs at least 4 pairs");
    require(confidence > 0.0 && confidence < 1.0, ErrorKind::Config, "confidence must lie in (0, 1)");
    const std::size_t n = pairs.size();
    double sx = 0, sy = 0;
    for (const auto& p : pairs) {
        require(p.alpha_star < 0.0 && std::isfinite(p.alpha_star), ErrorKind::Fit, "scaling_fit: alpha_star must be negative");
        require(p.nu > 0.0, ErrorKind::Fit, "scaling_fit: nu must be positive");
        sx += std::log(p.nu);
        sy += std::log(-p.alpha_star);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& p : pairs) {
        const double dx = std::log(p.nu) - mx, dy = std::log(-p.alpha_star) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    require(sxx > 0.0, ErrorKind::Fit, "scaling_fit: all nu values coincide");
    ScalingFit f;
    f.n = n;
    f.confidence = confidence;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.prefactor = std::exp(f.intercept);
    const double sse = std::max(0.0, syy - f.slope * sxy);
    f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    f.slope_stderr = std::sqrt(sse / double(n - 2) / sxx);
    boost::math::students_t dist(double(n - 2));
    const double q = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - confidence)));
    f.ci_lo = f.slope - q * f.slope_stderr;
    f.ci_hi = f.slope + q * f.slope_stderr;
    return f;
}

} // namespace bsl
