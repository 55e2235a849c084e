#pragma once

#include <bsl/error.hpp>
#include <bsl/spectral_field.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace bsl {

using CVec = std::vector<cplx>;

/// Diagonal decay rate a + b(ξ - κτ)² of one component; its time integral is exact.
struct DecaySymbol {
    double a = 0.0;
    double b = 0.0;
    double xi = 0.0;
    double kappa = 0.0;

    double rate(double t) const {
        const double u = xi - kappa * t;
        return a + b * u * u;
    }
    /// ∫_{t0}^{t1} rate. Written as h(u0²+u0u1+u1²)/3 to avoid the cancellation in (u0³-u1³)/(3κ).
    double integral(double t0, double t1) const {
        const double h = t1 - t0;
        if (b == 0.0) return a * h;
        const double u0 = xi - kappa * t0;
        const double u1 = xi - kappa * t1;
        return a * h + b * h * (u0 * u0 + u0 * u1 + u1 * u1) / 3.0;
    }
};

struct AdaptiveOptions {
    double rtol = 1e-10;
    double atol = 1e-14;
    double h0 = 0.0;      ///< 0 selects a heuristic first step
    double h_max = 0.0;   ///< 0 means unbounded
    double h_min = 1e-14; ///< relative to the span
    long max_steps = 50'000'000;
};

struct IntegrationStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
};

namespace detail {

template <std::size_t S>
struct Tableau {
    std::array<double, S> c;
    std::array<std::array<double, S>, S> a;
    std::array<double, S> b;
    std::array<double, S> e; ///< b - b̂ (zero for fixed-step schemes)
};

inline const Tableau<7>& dormand_prince() {
    static const Tableau<7> t = {
        {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0},
        {{{},
          {1.0 / 5},
          {3.0 / 40, 9.0 / 40},
          {44.0 / 45, -56.0 / 15, 32.0 / 9},
          {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
          {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
          {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}}},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0},
        {35.0 / 384 - 5179.0 / 57600, 0.0, 500.0 / 1113 - 7571.0 / 16695, 125.0 / 192 - 393.0 / 640,
         -2187.0 / 6784 + 92097.0 / 339200, 11.0 / 84 - 187.0 / 2100, -1.0 / 40},
    };
    return t;
}

inline const Tableau<4>& classic_rk4() {
    static const Tableau<4> t = {
        {0.0, 0.5, 0.5, 1.0},
        {{{}, {0.5}, {0.0, 0.5}, {0.0, 0.0, 1.0}}},
        {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6},
        {},
    };
    return t;
}

/// Lawson integrating-factor RK step. Needs nondecreasing c so every factor E(t_j -> t_i) is a decay.
/// k[0] must hold N(t, y) on entry (FSAL); returns the error vector in err when the tableau has one.
template <std::size_t S, class Rhs>
void lawson_step(const Tableau<S>& tab, Rhs& rhs, std::span<const DecaySymbol> sym, const CVec& y, double t,
                 double h, std::array<CVec, S>& k, CVec& ynew, CVec* err, IntegrationStats& st) {
    const std::size_t n = y.size();
    // distinct nodes, including the end point 1
    std::array<double, S + 1> nodes{};
    std::size_t m = 0;
    auto node_of = [&](double c) {
        for (std::size_t q = 0; q < m; ++q)
            if (nodes[q] == c) return q;
        nodes[m] = c;
        return m++;
    };
    std::array<std::size_t, S> idx{};
    for (std::size_t i = 0; i < S; ++i) idx[i] = node_of(tab.c[i]);
    const std::size_t iend = node_of(1.0);

    // log-factors from the step start to each node, per component
    thread_local std::vector<double> L;
    L.assign(m * n, 0.0);
    for (std::size_t q = 0; q < m; ++q) {
        const double tq = t + nodes[q] * h;
        for (std::size_t c = 0; c < n; ++c) L[q * n + c] = sym[c].integral(t, tq);
    }
    auto factor = [&](std::size_t from, std::size_t to, std::size_t c) {
        if (from == to) return 1.0;
        const double tf = t + nodes[from] * h, tt = t + nodes[to] * h;
        return std::exp(-sym[c].integral(tf, tt));
    };

    thread_local CVec Y;
    Y.resize(n);
    for (std::size_t i = 1; i < S; ++i) {
        for (std::size_t c = 0; c < n; ++c) {
            cplx acc = std::exp(-L[idx[i] * n + c]) * y[c];
            for (std::size_t j = 0; j < i; ++j) {
                if (tab.a[i][j] == 0.0) continue;
                acc += h * tab.a[i][j] * factor(idx[j], idx[i], c) * k[j][c];
            }
            Y[c] = acc;
        }
        k[i].resize(n);
        rhs(t + tab.c[i] * h, Y, k[i]);
        ++st.rhs_evals;
    }
    ynew.resize(n);
    if (err) err->assign(n, cplx{});
    for (std::size_t c = 0; c < n; ++c) {
        cplx acc = std::exp(-L[iend * n + c]) * y[c];
        cplx e{};
        for (std::size_t i = 0; i < S; ++i) {
            if (tab.b[i] == 0.0 && tab.e[i] == 0.0) continue;
            const double f = factor(idx[i], iend, c);
            acc += h * tab.b[i] * f * k[i][c];
            e += h * tab.e[i] * f * k[i][c];
        }
        ynew[c] = acc;
        if (err) (*err)[c] = e;
    }
}

} // namespace detail

/// Adaptive Lawson-DP5(4) from t0 to t1. obs(t, y, at_sample) runs after every accepted step;
/// steps are clipped to land exactly on each entry of samples (sorted, within (t0, t1]).
template <class Rhs, class Observer>
IntegrationStats integrate_adaptive(Rhs&& rhs, std::span<const DecaySymbol> sym, CVec& y, double t0, double t1,
                                    const AdaptiveOptions& opt, Observer&& obs,
                                    std::span<const double> samples = {}) {
    require(sym.size() == y.size(), ErrorKind::Integration, "symbol/state size mismatch");
    require(t1 >= t0, ErrorKind::Integration, "integration span must be nonnegative");
    const auto& tab = detail::dormand_prince();
    IntegrationStats st;
    if (t1 == t0) return st;
    const std::size_t n = y.size();
    std::array<CVec, 7> k;
    k[0].resize(n);
    rhs(t0, y, k[0]);
    ++st.rhs_evals;

    const double span = t1 - t0;
    double h = opt.h0 > 0.0 ? opt.h0 : std::min(1e-3 * span, 1e-2);
    const double hmin = opt.h_min * std::max(1.0, span);
    std::size_t next_sample = 0;
    while (next_sample < samples.size() && samples[next_sample] <= t0) ++next_sample;

    double t = t0;
    CVec ynew, err;
    while (t < t1) {
        require(st.accepted + st.rejected < opt.max_steps, ErrorKind::Integration, "step budget exhausted");
        if (opt.h_max > 0.0) h = std::min(h, opt.h_max);
        double target = t1;
        bool hit_sample = false;
        if (next_sample < samples.size() && samples[next_sample] < t1) target = samples[next_sample];
        double hs = h;
        if (t + hs >= target) {
            hs = target - t;
            hit_sample = target != t1 || (next_sample < samples.size() && samples[next_sample] == t1);
        }
        detail::lawson_step(tab, rhs, sym, y, t, hs, k, ynew, &err, st);

        double en = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y[c]), std::abs(ynew[c]));
            const double r = std::abs(err[c]) / sc;
            en += r * r;
        }
        en = std::sqrt(en / std::max<std::size_t>(n, 1));
        if (!std::isfinite(en)) en = 1e10;

        if (en <= 1.0) {
            t = (hs == target - t) ? target : t + hs;
            y.swap(ynew);
            std::swap(k[0], k[6]); // FSAL: last stage is N(t_{n+1}, y_{n+1})
            ++st.accepted;
            if (hit_sample) ++next_sample;
            obs(t, static_cast<const CVec&>(y), hit_sample);
            const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
            const double hn = hs * fac;
            h = hs < h ? std::max(h, hn) : hn; // a step clipped to a sample does not shrink h
        } else {
            ++st.rejected;
            h = hs * std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
            require(h >= hmin, ErrorKind::Integration, "step size underflow");
        }
    }
    return st;
}

template <class Rhs>
IntegrationStats integrate_adaptive(Rhs&& rhs, std::span<const DecaySymbol> sym, CVec& y, double t0, double t1,
                                    const AdaptiveOptions& opt) {
    return integrate_adaptive(std::forward<Rhs>(rhs), sym, y, t0, t1, opt, [](double, const CVec&, bool) {});
}

/// One fixed Lawson-RK4 step in place.
template <class Rhs>
void lawson_rk4_step(Rhs&& rhs, std::span<const DecaySymbol> sym, CVec& y, double t, double h,
                     IntegrationStats* stats = nullptr) {
    const auto& tab = detail::classic_rk4();
    IntegrationStats st;
    std::array<CVec, 4> k;
    k[0].resize(y.size());
    rhs(t, y, k[0]);
    ++st.rhs_evals;
    CVec ynew;
    detail::lawson_step(tab, rhs, sym, y, t, h, k, ynew, nullptr, st);
    y.swap(ynew);
    ++st.accepted;
    if (stats) {
        stats->accepted += st.accepted;
        stats->rhs_evals += st.rhs_evals;
    }
}

} // namespace bsl
