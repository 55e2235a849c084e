#pragma once

#include <bsl/error.hpp>
#include <bsl/spectral_field.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bsl {

/// All profile kinds describe T'(y), the derivative of the background temperature.
struct AffineProfile {
    double slope = 0.0; ///< T(y) = slope·y, so T' ≡ slope
};

struct TrigTerm {
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
};

/// T'(y) = Σ a cos(ωy + φ)
struct TrigonometricProfile {
    std::vector<TrigTerm> terms;
};

/// Samples of T' over one period on a uniform grid with an even number of points.
struct SampledProfile {
    double period = 2.0 * std::numbers::pi;
    std::vector<double> values;
    std::vector<double> positions; ///< optional; must be uniform with spacing period/n
    double prune_relative = 1e-14; ///< DFT atoms below this fraction of the largest mass are dropped
};

struct TemperatureProfile {
    std::variant<AffineProfile, TrigonometricProfile, SampledProfile> kind;
    std::string description;

    static TemperatureProfile affine(double slope) { return {AffineProfile{slope}, "affine"}; }
    static TemperatureProfile cosine(double a, double w = 1.0, double phi = 0.0) {
        return {TrigonometricProfile{{{a, w, phi}}}, "cosine"};
    }
    static TemperatureProfile zero() { return {TrigonometricProfile{}, "zero"}; }

    const char* kind_name() const {
        switch (kind.index()) {
        case 0: return "affine";
        case 1: return "trigonometric";
        default: return "sampled";
        }
    }

    /// T'(y)
    double derivative_at(double y) const;
};

struct SpectralAtom {
    double frequency = 0.0;
    cplx mass{};
};

/// |F(T')| sampled on a uniform ξ-grid (absolutely continuous part).
struct SpectralDensity {
    std::vector<double> xi;
    std::vector<double> abs_value;
};

struct ProfileSpectrum {
    std::vector<SpectralAtom> atoms; ///< sorted by frequency, unique frequencies
    std::optional<SpectralDensity> density;
    bool from_samples = false;

    double total_mass() const {
        double s = 0.0;
        for (const auto& a : atoms) s += std::abs(a.mass);
        if (density) {
            const auto& d = *density;
            for (std::size_t i = 1; i < d.xi.size(); ++i)
                s += 0.5 * (d.abs_value[i] + d.abs_value[i - 1]) * (d.xi[i] - d.xi[i - 1]);
        }
        return s;
    }
    bool empty() const { return atoms.empty() && (!density || density->xi.empty()); }
    double max_abs_frequency() const {
        double m = 0.0;
        for (const auto& a : atoms) m = std::max(m, std::abs(a.frequency));
        return m;
    }
};

namespace detail {
inline void merge_atoms(std::vector<SpectralAtom>& atoms, double tol = 1e-12) {
    std::sort(atoms.begin(), atoms.end(),
              [](const SpectralAtom& a, const SpectralAtom& b) { return a.frequency < b.frequency; });
    std::vector<SpectralAtom> out;
    for (const auto& a : atoms) {
        if (!out.empty() && std::abs(out.back().frequency - a.frequency) <= tol * std::max(1.0, std::abs(a.frequency)))
            out.back().mass += a.mass;
        else
            out.push_back(a);
    }
    std::erase_if(out, [](const SpectralAtom& a) { return a.mass == cplx{}; });
    atoms = std::move(out);
}

inline void validate_sampled(const SampledProfile& s) {
    const std::size_t n = s.values.size();
    require(n >= 2 && n % 2 == 0, ErrorKind::Format, "sampled profile needs an even number of samples");
    require(s.period > 0.0 && std::isfinite(s.period), ErrorKind::Format, "sampled profile period must be positive");
    for (double v : s.values) require(std::isfinite(v), ErrorKind::Format, "sampled profile has non-finite values");
    if (!s.positions.empty()) {
        require(s.positions.size() == n, ErrorKind::Format, "positions and values differ in length");
        const double h = s.period / double(n);
        for (std::size_t i = 1; i < n; ++i)
            require(std::abs(s.positions[i] - s.positions[i - 1] - h) <= 1e-9 * s.period, ErrorKind::Format,
                    "sampled profile grid is not uniform with spacing period/n");
    }
}
} // namespace detail

inline ProfileSpectrum profile_spectrum(const TemperatureProfile& p) {
    ProfileSpectrum s;
    if (const auto* a = std::get_if<AffineProfile>(&p.kind)) {
        require(std::isfinite(a->slope), ErrorKind::Format, "affine slope must be finite");
        if (a->slope != 0.0) s.atoms.push_back({0.0, a->slope});
    } else if (const auto* tr = std::get_if<TrigonometricProfile>(&p.kind)) {
        for (const auto& t : tr->terms) {
            require(std::isfinite(t.amplitude) && std::isfinite(t.frequency) && std::isfinite(t.phase),
                    ErrorKind::Format, "trigonometric terms must be finite");
            const cplx e = std::polar(1.0, t.phase);
            if (t.frequency == 0.0) {
                s.atoms.push_back({0.0, t.amplitude * e.real()});
            } else {
                s.atoms.push_back({t.frequency, 0.5 * t.amplitude * e});
                s.atoms.push_back({-t.frequency, 0.5 * t.amplitude * std::conj(e)});
            }
        }
    } else {
        const auto& sp = std::get<SampledProfile>(p.kind);
        detail::validate_sampled(sp);
        const int n = int(sp.values.size());
        const double y0 = sp.positions.empty() ? 0.0 : sp.positions.front();
        const double dw = 2.0 * std::numbers::pi / sp.period;
        std::vector<SpectralAtom> raw;
        double mmax = 0.0;
        for (int m = -n / 2; m <= n / 2; ++m) {
            cplx c{};
            for (int j = 0; j < n; ++j) c += sp.values[j] * std::polar(1.0, -2.0 * std::numbers::pi * m * j / n);
            c /= double(n);
            if (std::abs(m) == n / 2) c *= 0.5; // Nyquist coefficient split between ±
            const double w = m * dw;
            c *= std::polar(1.0, -w * y0);
            raw.push_back({w, c});
            mmax = std::max(mmax, std::abs(c));
        }
        for (const auto& a : raw)
            if (std::abs(a.mass) > sp.prune_relative * mmax) s.atoms.push_back(a);
        s.from_samples = true;
    }
    detail::merge_atoms(s.atoms);
    return s;
}

inline double TemperatureProfile::derivative_at(double y) const {
    if (const auto* a = std::get_if<AffineProfile>(&kind)) return a->slope;
    if (const auto* tr = std::get_if<TrigonometricProfile>(&kind)) {
        double v = 0.0;
        for (const auto& t : tr->terms) v += t.amplitude * std::cos(t.frequency * y + t.phase);
        return v;
    }
    cplx v{};
    for (const auto& a : profile_spectrum(*this).atoms) v += a.mass * std::polar(1.0, a.frequency * y);
    return v.real();
}

/// Integer lattice shift of an atom on a grid with spacing dxi; throws if off-lattice.
inline int atom_shift(const SpectralAtom& a, double dxi) {
    const double r = a.frequency / dxi;
    const double ri = std::round(r);
    require(std::abs(r - ri) <= 1e-9 * std::max(1.0, std::abs(r)), ErrorKind::Truncation,
            "profile frequency is not on the spectral ξ-lattice (choose Ly as a multiple of its period)");
    return int(ri);
}

} // namespace bsl
