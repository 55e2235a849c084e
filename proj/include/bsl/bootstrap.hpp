#pragma once

#include <bsl/error.hpp>
#include <bsl/multiplier.hpp>
#include <bsl/spectral_field.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

namespace bsl {

/// Instantaneous integrands of every Eq. 21 quantity (H^N-weighted ℓ² sums over the band).
struct LedgerSnapshot {
    double t = 0.0;
    // ω_≠ group
    double w_sup = 0.0;  ///< ‖Mω_≠‖²
    double w_diss = 0.0; ///< ν‖(∂_y - t∂_x)Mω_≠‖²
    double w_ind = 0.0;  ///< ν‖1_{|ξ-kt|≤|k|} Mω_≠‖²
    double w_vel = 0.0;  ///< ‖∇_tΔ_t⁻¹ Mω_≠‖²
    // θ_≠ group, with ℋ
    double th_sup = 0.0;
    double th_diss = 0.0;
    double th_ind = 0.0;
    double th_vel = 0.0;
    // shear averages
    double we_sup = 0.0;  ///< ‖ω_=‖²
    double we_diss = 0.0; ///< ν‖∂_y ω_=‖²
    double te_sup = 0.0;  ///< ‖ℋθ_=‖²
    double te_diss = 0.0; ///< ν‖ℋ∂_y θ_=‖²
    // χ split (χ: |ξ-kt| ≥ |k|), unweighted by M
    double w_chi = 0.0;
    double w_nonchi = 0.0;
    double th_chi = 0.0;
    double th_nonchi = 0.0;
    // plain H^N norms (not squared)
    double omega_hn = 0.0;
    double dx_theta_hn = 0.0;

    static constexpr std::array<std::string_view, 19> names{
        "t",       "w_sup",   "w_diss",  "w_ind",   "w_vel",    "th_sup",   "th_diss",
        "th_ind",  "th_vel",  "we_sup",  "we_diss", "te_sup",   "te_diss",  "w_chi",
        "w_nonchi", "th_chi", "th_nonchi", "omega_hn", "dx_theta_hn"};
    std::array<double, 19> values() const {
        return {t,      w_sup,   w_diss,  w_ind,    w_vel,     th_sup,   th_diss,  th_ind,   th_vel,     we_sup,
                we_diss, te_sup, te_diss, w_chi,    w_nonchi,  th_chi,   th_nonchi, omega_hn, dx_theta_hn};
    }
};

/// Evaluates the snapshot at time t. shear is the Couette rate β in ξ - βkt.
inline LedgerSnapshot bootstrap_norms(const SpectralField& omega, const SpectralField& theta, double t, double nu,
                                      int N, double shear = 1.0) {
    require(nu > 0.0, ErrorKind::Config, "bootstrap norms need nu > 0");
    require(omega.grid() == theta.grid(), ErrorKind::Domain, "field grids differ");
    const auto& g = omega.grid();
    const CutoffConfig cut = CutoffConfig::for_nu(nu);
    LedgerSnapshot s;
    s.t = t;
    double whn = 0.0, thn = 0.0;
    for (int k = -g.K; k <= g.K; ++k) {
        const double kk = double(k) * k;
        for (int j = -g.J; j <= g.J; ++j) {
            const double xi = g.xi(j);
            const double wN = sobolev_weight(k, xi, N);
            const double aw = std::norm(omega(k, j));
            const double at = std::norm(theta(k, j));
            whn += wN * aw;
            thn += wN * kk * at;
            const double eta = xi - shear * k * t;
            const double H2 = kk + std::min(eta * eta, cut.C * cut.C);
            if (k == 0) {
                s.we_sup += wN * aw;
                s.we_diss += nu * wN * xi * xi * aw;
                s.te_sup += wN * H2 * at;
                s.te_diss += nu * wN * H2 * xi * xi * at;
                continue;
            }
            // M depends on ξ/k and the shifted time βt
            const FrequencyMode m{k, xi};
            const double st = shear * t;
            const double M = multiplier_A(st, m) * multiplier_B(st, m, cut);
            const double M2 = M * M;
            const double q = kk + eta * eta;
            const bool inner = std::abs(eta) <= std::abs(k);
            s.w_sup += wN * M2 * aw;
            s.w_diss += nu * wN * eta * eta * M2 * aw;
            if (inner) s.w_ind += nu * wN * M2 * aw;
            s.w_vel += wN * M2 * aw / q;
            s.th_sup += wN * H2 * M2 * at;
            s.th_diss += nu * wN * eta * eta * H2 * M2 * at;
            if (inner) s.th_ind += nu * wN * H2 * M2 * at;
            s.th_vel += wN * H2 * M2 * at / q;
            (inner ? s.w_nonchi : s.w_chi) += wN * aw;
            (inner ? s.th_nonchi : s.th_chi) += wN * at;
        }
    }
    s.omega_hn = std::sqrt(whn);
    s.dx_theta_hn = std::sqrt(thn);
    return s;
}

struct GroupTotals {
    double w_neq = 0.0;
    double th_neq = 0.0;
    double w_eq = 0.0;
    double th_eq = 0.0;
};

/// Running maxima and trapezoid time integrals of the snapshot entries.
class BootstrapLedger {
  public:
    void update(const LedgerSnapshot& s) {
        if (count_ > 0) {
            const double h = s.t - last_.t;
            auto trap = [h](double a, double b) { return 0.5 * h * (a + b); };
            int_.w_diss += trap(last_.w_diss, s.w_diss);
            int_.w_ind += trap(last_.w_ind, s.w_ind);
            int_.w_vel += trap(last_.w_vel, s.w_vel);
            int_.th_diss += trap(last_.th_diss, s.th_diss);
            int_.th_ind += trap(last_.th_ind, s.th_ind);
            int_.th_vel += trap(last_.th_vel, s.th_vel);
            int_.we_diss += trap(last_.we_diss, s.we_diss);
            int_.te_diss += trap(last_.te_diss, s.te_diss);
            int_.w_chi += trap(last_.w_chi, s.w_chi);
            int_.w_nonchi += trap(last_.w_nonchi, s.w_nonchi);
            int_.th_chi += trap(last_.th_chi, s.th_chi);
            int_.th_nonchi += trap(last_.th_nonchi, s.th_nonchi);
        }
        max_.w_sup = std::max(max_.w_sup, s.w_sup);
        max_.th_sup = std::max(max_.th_sup, s.th_sup);
        max_.we_sup = std::max(max_.we_sup, s.we_sup);
        max_.te_sup = std::max(max_.te_sup, s.te_sup);
        max_.omega_hn = std::max(max_.omega_hn, s.omega_hn);
        max_.dx_theta_hn = std::max(max_.dx_theta_hn, s.dx_theta_hn);
        last_ = s;
        ++count_;
    }

    /// Entry-wise ledger: sup terms hold maxima, the rest hold time integrals.
    LedgerSnapshot entries() const {
        LedgerSnapshot e = int_;
        e.t = last_.t;
        e.w_sup = max_.w_sup;
        e.th_sup = max_.th_sup;
        e.we_sup = max_.we_sup;
        e.te_sup = max_.te_sup;
        e.omega_hn = max_.omega_hn;
        e.dx_theta_hn = max_.dx_theta_hn;
        return e;
    }

    GroupTotals totals() const {
        const auto e = entries();
        return {e.w_sup + e.w_diss + e.w_ind + e.w_vel, e.th_sup + e.th_diss + e.th_ind + e.th_vel,
                e.we_sup + e.we_diss, e.te_sup + e.te_diss};
    }

    std::size_t count() const { return count_; }

  private:
    LedgerSnapshot int_{};
    LedgerSnapshot max_{};
    LedgerSnapshot last_{};
    std::size_t count_ = 0;
};

} // namespace bsl
