#pragma once

#include <bsl/bootstrap.hpp>
#include <bsl/error.hpp>
#include <bsl/fft.hpp>
#include <bsl/ifrk.hpp>
#include <bsl/multiplier.hpp>
#include <bsl/profile.hpp>
#include <bsl/spectral_field.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace bsl {

struct Velocity {
    SpectralField v1;
    SpectralField v2;
};

struct SimState {
    SpectralField omega;
    SpectralField theta;
    double t = 0.0;
};

enum class InitKind { random, single_mode };

struct SimConfig {
    double nu = 0.1;
    TemperatureProfile profile = TemperatureProfile::affine(0.0);
    double epsilon = 1e-6;
    SpectralGrid grid{42, 42, 16.0 * std::numbers::pi};
    double dt_max = 0.05;
    double cfl = 0.5;
    double t_end = 50.0;
    int N = 5;
    std::uint64_t seed = 1;
    double shear = 1.0;             ///< β in ξ - βkt; 0 switches the background shear off
    bool thermal_diffusion = true;  ///< μ_y = ν; off is outside the nonlinear theorem's hypotheses
    bool nonlinear = true;
    std::optional<DissipationConfig> diss; ///< overrides nu/thermal_diffusion when set
    InitKind init = InitKind::random;
    int mode_k = 1;
    int mode_j = 0;
    cplx mode_omega = 1.0; ///< single-mode data: ω̂ = ε·mode_omega at (mode_k, mode_j)
    cplx mode_theta = 0.0;
    double blowup_factor = 1e6;
    int diag_every = 1;
    bool keep_series = true;

    DissipationConfig dissipation() const {
        if (diss) return *diss;
        return {0.0, nu, 0.0, thermal_diffusion ? nu : 0.0};
    }

    void validate() const {
        grid.validate();
        require(grid.K >= 1 && grid.J >= 1, ErrorKind::Config, "simulation grid needs K, J >= 1");
        require(nu >= 0.0 && std::isfinite(nu), ErrorKind::Config, "nu must be >= 0");
        require(epsilon >= 0.0 && std::isfinite(epsilon), ErrorKind::Config, "epsilon must be >= 0");
        require(dt_max > 0.0 && cfl > 0.0, ErrorKind::Config, "dt policy must be positive");
        require(t_end > 0.0, ErrorKind::Config, "t_end must be positive");
        require(N >= 0, ErrorKind::Config, "N must be >= 0");
        require(blowup_factor > 1.0, ErrorKind::Config, "blowup factor must exceed 1");
        require(diag_every >= 1, ErrorKind::Config, "diag_every must be >= 1");
        dissipation().validate();
        if (init == InitKind::single_mode)
            require(grid.contains(mode_k, mode_j) && !(mode_k == 0 && mode_j == 0), ErrorKind::Config,
                    "single mode must be a nonzero lattice point inside the band");
    }

    /// ν = 0, missing thermal diffusion, or a dissipation override other than Eq. 19 leave the theorem's setting.
    bool outside_hypotheses() const {
        const auto d = dissipation();
        return nu <= 0.0 || d.mu_y <= 0.0 || d.nu_y <= 0.0 || shear != 1.0;
    }
};

/// (k = 0 column, remainder)
inline std::pair<SpectralField, SpectralField> shear_split(const SpectralField& f) {
    SpectralField avg(f.grid()), fl = f;
    for (int j = -f.grid().J; j <= f.grid().J; ++j) {
        avg(0, j) = f(0, j);
        fl(0, j) = 0.0;
    }
    return {avg, fl};
}

/// v̂₁ = -iη ω̂/(k²+η²), v̂₂ = ik ω̂/(k²+η²), η = ξ - βkt.
inline Velocity biot_savart(const SpectralField& omega, double t, double shear = 1.0) {
    const auto& g = omega.grid();
    require(std::abs(omega(0, 0)) <= 1e-12 * std::max(omega.l2(), 1e-300), ErrorKind::Domain,
            "biot_savart: nonzero mean vorticity");
    Velocity v{SpectralField(g), SpectralField(g)};
    for (int k = -g.K; k <= g.K; ++k)
        for (int j = -g.J; j <= g.J; ++j) {
            if (k == 0 && j == 0) continue;
            const double eta = g.xi(j) - shear * k * t;
            const double q = double(k) * k + eta * eta;
            v.v1(k, j) = cplx(0.0, -eta / q) * omega(k, j);
            v.v2(k, j) = cplx(0.0, k / q) * omega(k, j);
        }
    return v;
}

namespace detail {

/// Product workspace for one grid: v·∇_t f evaluated on the padded grid and truncated to the band.
class TransportKernel {
  public:
    explicit TransportKernel(const SpectralGrid& g)
        : tr_(g), v1_(tr_.buffer()), v2_(tr_.buffer()), fx_(tr_.buffer()), fy_(tr_.buffer()), out_(tr_.buffer()) {}

    const BandTransform& transform() const { return tr_; }

    void load_velocity(const cplx* v1, const cplx* v2) {
        tr_.to_physical(v1, v1_.get());
        tr_.to_physical(v2, v2_.get());
    }
    /// Writes the band of v·∇_t f into out (band layout) using the loaded velocity.
    void transport(const cplx* f, double t, double shear, cplx* out) {
        const auto& g = tr_.grid();
        tr_.to_physical(f, [](int k, int) { return cplx(0.0, k); }, fx_.get());
        tr_.to_physical(f, [&](int k, int j) { return cplx(0.0, g.xi(j) - shear * k * t); }, fy_.get());
        const std::size_t n = tr_.size();
        for (std::size_t i = 0; i < n; ++i)
            out_[i] = cplx(v1_[i].real() * fx_[i].real() + v2_[i].real() * fy_[i].real(), 0.0);
        tr_.to_band(out_.get(), out);
    }
    /// max over the padded grid of |v₁ - βt v₂|/dx + |v₂|/dy, the moving-frame advection CFL rate.
    double advection_rate(double t, double shear) const {
        const auto& g = tr_.grid();
        const double dx = 2.0 * std::numbers::pi / tr_.nx(), dy = g.Ly / tr_.ny();
        double r = 0.0;
        for (std::size_t i = 0; i < tr_.size(); ++i)
            r = std::max(r, std::abs(v1_[i].real() - shear * t * v2_[i].real()) / dx + std::abs(v2_[i].real()) / dy);
        return r;
    }

  private:
    BandTransform tr_;
    FftBuffer v1_, v2_, fx_, fy_, out_;
};

} // namespace detail

/// Dealiased band of v·∇_t f, ∇_t = (∂_x, ∂_y - βt∂_x).
inline SpectralField nonlinear_transport(const SpectralField& f, const Velocity& v, double t, double shear = 1.0) {
    require(f.grid() == v.v1.grid() && f.grid() == v.v2.grid(), ErrorKind::Domain, "transport: grid mismatch");
    detail::TransportKernel ker(f.grid());
    ker.load_velocity(v.v1.data().data(), v.v2.data().data());
    SpectralField out(f.grid());
    ker.transport(f.data().data(), t, shear, out.data().data());
    return out;
}

struct SimVerdict {
    double sup_energy = 0.0;     ///< sup_t ‖ω‖²_{H^N} + ν⁻¹‖∂ₓθ‖²_{H^N}
    double initial_energy = 0.0;
    double bound = 0.0;          ///< 10 ν^{-2/3} ε²
    double scaled_ratio = 0.0;   ///< sup_energy / bound
    double raw_ratio = 0.0;      ///< sup_energy / initial_energy
    double omega_ratio = 0.0;    ///< sup ‖ω‖_{H^N} / (10 ν^{-1/3} ε)
    double dx_theta_ratio = 0.0; ///< sup ‖∂ₓθ‖_{H^N} / (10 ε)
    bool pass = false;
    // ledger groups against 16ε², 16νε², 16ε², 16νε²
    GroupTotals totals;
    GroupTotals bounds;
    bool ledger_pass = false;
};

struct SimResult {
    SimState final_state;
    BootstrapLedger ledger;
    std::vector<LedgerSnapshot> series;
    SimVerdict verdict;
    bool ledger_evaluated = false;
    bool instability_observed = false;
    bool outside_hypotheses = false;
    bool regime_ok = false;        ///< ε < ν²
    bool horizon_exceeded = false; ///< t_end > J·Δξ/K
    double horizon = 0.0;
    long steps = 0;
    double dt_min = 0.0;
    double dt_max_used = 0.0;
    double initial_norm = 0.0;
    double final_norm = 0.0;
    std::vector<std::string> warnings;
};

class Simulator {
  public:
    explicit Simulator(SimConfig cfg) : cfg_(std::move(cfg)), ker_(cfg_.grid) {
        cfg_.validate();
        const auto& g = cfg_.grid;
        spec_ = profile_spectrum(cfg_.profile);
        require(!spec_.density, ErrorKind::Config, "simulator supports atomic profile spectra only");
        for (const auto& a : spec_.atoms) {
            const int s = atom_shift(a, g.dxi());
            require(std::abs(s) < g.J, ErrorKind::Truncation, "profile spectral support exceeds the ξ-band");
            shifts_.push_back({s, a.mass});
            mass_ += std::abs(a.mass);
        }
        const auto d = cfg_.dissipation();
        n_ = g.size();
        sym_.resize(2 * n_);
        for (int k = -g.K; k <= g.K; ++k)
            for (int j = -g.J; j <= g.J; ++j) {
                const std::size_t i = g.index(k, j);
                const double kk = double(k) * k;
                sym_[i] = {d.nu_x * kk, d.nu_y, g.xi(j), cfg_.shear * k};
                sym_[n_ + i] = {d.mu_x * kk, d.mu_y, g.xi(j), cfg_.shear * k};
            }
        v1_.resize(n_);
        v2_.resize(n_);
        tmp_.resize(n_);
    }

    const SimConfig& config() const { return cfg_; }
    const ProfileSpectrum& spectrum() const { return spec_; }

    SimState initial_state() const {
        const auto& g = cfg_.grid;
        SimState s{SpectralField(g), SpectralField(g), 0.0};
        if (cfg_.init == InitKind::single_mode) {
            s.omega.set_real_mode(cfg_.mode_k, cfg_.mode_j, cfg_.epsilon * cfg_.mode_omega);
            s.theta.set_real_mode(cfg_.mode_k, cfg_.mode_j, cfg_.epsilon * cfg_.mode_theta);
            return s;
        }
        std::mt19937_64 rng(cfg_.seed);
        std::normal_distribution<double> nd;
        for (int k = 1; k <= std::min(2, g.K); ++k)
            for (int j = -g.J; j <= g.J; ++j) {
                if (std::abs(g.xi(j)) > 1.5) continue;
                const double env = std::exp(-0.5 * g.xi(j) * g.xi(j));
                const cplx a(nd(rng), nd(rng)), b(nd(rng), nd(rng));
                s.omega.set_real_mode(k, j, a * env);
                s.theta.set_real_mode(k, j, b * env);
            }
        const double wn = weighted_sobolev_norm(s.omega, cfg_.N);
        SpectralField dth(g);
        for (int k = -g.K; k <= g.K; ++k)
            for (int j = -g.J; j <= g.J; ++j) dth(k, j) = cplx(0.0, k) * s.theta(k, j);
        const double tn = weighted_sobolev_norm(dth, cfg_.N);
        const double tscale = cfg_.nu > 0.0 ? std::sqrt(cfg_.nu) : 1.0;
        if (wn > 0.0) s.omega *= cplx(0.5 * cfg_.epsilon / wn);
        if (tn > 0.0) s.theta *= cplx(0.5 * cfg_.epsilon * tscale / tn);
        return s;
    }

    /// Non-stiff part of the right-hand side; the dissipation symbols are integrated exactly.
    void rhs(double t, const CVec& y, CVec& out) {
        const auto& g = cfg_.grid;
        const cplx* w = y.data();
        const cplx* th = y.data() + n_;
        cplx* ow = out.data();
        cplx* ot = out.data() + n_;
        for (int k = -g.K; k <= g.K; ++k)
            for (int j = -g.J; j <= g.J; ++j) {
                const std::size_t i = g.index(k, j);
                if (k == 0) {
                    v1_[i] = j == 0 ? cplx{} : cplx(0.0, -1.0 / g.xi(j)) * w[i];
                    v2_[i] = 0.0;
                } else {
                    const double eta = g.xi(j) - cfg_.shear * k * t;
                    const double q = double(k) * k + eta * eta;
                    v1_[i] = cplx(0.0, -eta / q) * w[i];
                    v2_[i] = cplx(0.0, k / q) * w[i];
                }
            }
        for (int k = -g.K; k <= g.K; ++k)
            for (int j = -g.J; j <= g.J; ++j) {
                const std::size_t i = g.index(k, j);
                ow[i] = cplx(0.0, k) * th[i];
                cplx f{};
                for (const auto& sh : shifts_) {
                    const int jz = j - sh.s;
                    if (jz < -g.J || jz > g.J) continue;
                    f += sh.m * v2_[g.index(k, jz)];
                }
                ot[i] = f;
            }
        if (!cfg_.nonlinear) return;
        ker_.load_velocity(v1_.data(), v2_.data());
        ker_.transport(w, t, cfg_.shear, tmp_.data());
        for (std::size_t i = 0; i < n_; ++i) ow[i] -= tmp_[i];
        ker_.transport(th, t, cfg_.shear, tmp_.data());
        for (std::size_t i = 0; i < n_; ++i) ot[i] -= tmp_[i];
    }

    /// Largest admissible step at this state: advection CFL and the T' coupling strength.
    double cfl_limit(const SimState& s) {
        double lim = std::numeric_limits<double>::infinity();
        if (cfg_.nonlinear) {
            const auto v = velocity_of(s.omega, s.t);
            ker_.load_velocity(v.v1.data().data(), v.v2.data().data());
            const double r = ker_.advection_rate(s.t, cfg_.shear);
            if (r > 0.0) lim = std::min(lim, cfg_.cfl / r);
        }
        if (mass_ > 0.0) lim = std::min(lim, cfg_.cfl / std::sqrt(mass_));
        return lim;
    }

    double choose_dt(const SimState& s) { return std::min(cfg_.dt_max, cfl_limit(s)); }

    /// One Lawson-RK4 step; throws when dt exceeds the CFL limit.
    SimState time_step(const SimState& s, double dt) {
        require(dt > 0.0, ErrorKind::Integration, "time step must be positive");
        require(dt <= cfl_limit(s) * (1.0 + 1e-12), ErrorKind::Integration, "CFL violation: step rejected");
        CVec y = pack(s);
        auto f = [this](double t, const CVec& yy, CVec& o) { rhs(t, yy, o); };
        lawson_rk4_step(f, std::span<const DecaySymbol>(sym_), y, s.t, dt);
        SimState out = unpack(y, s.t + dt);
        return out;
    }

    using StepObserver = std::function<void(const SimState&)>;

    SimResult simulate(const StepObserver& obs = {}) {
        SimResult r;
        const auto& g = cfg_.grid;
        r.outside_hypotheses = cfg_.outside_hypotheses();
        r.regime_ok = cfg_.nu > 0.0 && cfg_.epsilon < cfg_.nu * cfg_.nu;
        r.horizon = g.J * g.dxi() / g.K;
        r.horizon_exceeded = cfg_.t_end > r.horizon;
        if (r.outside_hypotheses) r.warnings.push_back("configuration is outside the nonlinear theorem's hypotheses");
        if (!r.regime_ok) r.warnings.push_back("epsilon >= nu^2: outside the theorem's small-data regime");
        if (r.horizon_exceeded)
            r.warnings.push_back("t_end exceeds J*dxi/K: sheared modes leave the resolved band");
        r.ledger_evaluated = cfg_.nu > 0.0;

        SimState s = initial_state();
        r.initial_norm = std::sqrt(std::norm(s.omega.l2()) + std::norm(s.theta.l2()));
        const double eps2 = cfg_.epsilon * cfg_.epsilon;
        auto energy = [&](const LedgerSnapshot& sn) {
            const double inv = cfg_.nu > 0.0 ? 1.0 / cfg_.nu : 1.0;
            return sn.omega_hn * sn.omega_hn + inv * sn.dx_theta_hn * sn.dx_theta_hn;
        };
        auto diagnose = [&](const SimState& st) {
            LedgerSnapshot sn;
            if (r.ledger_evaluated) {
                sn = bootstrap_norms(st.omega, st.theta, st.t, cfg_.nu, cfg_.N, cfg_.shear);
                r.ledger.update(sn);
            } else {
                sn.t = st.t;
                sn.omega_hn = weighted_sobolev_norm(st.omega, cfg_.N);
                SpectralField dth(g);
                for (int k = -g.K; k <= g.K; ++k)
                    for (int j = -g.J; j <= g.J; ++j) dth(k, j) = cplx(0.0, k) * st.theta(k, j);
                sn.dx_theta_hn = weighted_sobolev_norm(dth, cfg_.N);
            }
            r.verdict.sup_energy = std::max(r.verdict.sup_energy, energy(sn));
            r.verdict.omega_ratio = std::max(r.verdict.omega_ratio, sn.omega_hn);
            r.verdict.dx_theta_ratio = std::max(r.verdict.dx_theta_ratio, sn.dx_theta_hn);
            if (cfg_.keep_series) r.series.push_back(sn);
            if (st.t == 0.0) r.verdict.initial_energy = energy(sn);
        };
        diagnose(s);
        if (obs) obs(s);

        r.dt_min = std::numeric_limits<double>::infinity();
        while (s.t < cfg_.t_end) {
            double dt = choose_dt(s);
            bool last = false;
            if (s.t + dt >= cfg_.t_end * (1.0 - 1e-14)) {
                dt = cfg_.t_end - s.t;
                last = true;
            }
            s = time_step(s, dt);
            if (last) s.t = cfg_.t_end;
            ++r.steps;
            r.dt_min = std::min(r.dt_min, dt);
            r.dt_max_used = std::max(r.dt_max_used, dt);
            require(s.omega.finite() && s.theta.finite(), ErrorKind::Integration, "non-finite state");
            if (r.steps % cfg_.diag_every == 0 || last) diagnose(s);
            if (obs) obs(s);
            const double nrm = std::sqrt(std::norm(s.omega.l2()) + std::norm(s.theta.l2()));
            if (r.initial_norm > 0.0 && nrm > cfg_.blowup_factor * r.initial_norm) {
                r.instability_observed = true;
                if (!(r.steps % cfg_.diag_every == 0 || last)) diagnose(s);
                r.warnings.push_back("instability observed: norm exceeded blow-up factor");
                break;
            }
        }
        r.final_state = s;
        r.final_norm = std::sqrt(std::norm(s.omega.l2()) + std::norm(s.theta.l2()));

        auto& v = r.verdict;
        const double nu = cfg_.nu;
        v.bound = nu > 0.0 ? 10.0 * std::pow(nu, -2.0 / 3.0) * eps2 : std::numeric_limits<double>::infinity();
        v.scaled_ratio = v.bound > 0.0 ? v.sup_energy / v.bound : 0.0;
        v.raw_ratio = v.initial_energy > 0.0 ? v.sup_energy / v.initial_energy : 0.0;
        const double eps = cfg_.epsilon;
        v.omega_ratio = eps > 0.0 && nu > 0.0 ? v.omega_ratio / (10.0 * std::pow(nu, -1.0 / 3.0) * eps) : 0.0;
        v.dx_theta_ratio = eps > 0.0 ? v.dx_theta_ratio / (10.0 * eps) : 0.0;
        v.pass = !r.instability_observed && v.sup_energy <= v.bound;
        if (r.ledger_evaluated) {
            v.totals = r.ledger.totals();
            v.bounds = {16.0 * eps2, 16.0 * nu * eps2, 16.0 * eps2, 16.0 * nu * eps2};
            v.ledger_pass = v.totals.w_neq <= v.bounds.w_neq && v.totals.th_neq <= v.bounds.th_neq &&
                            v.totals.w_eq <= v.bounds.w_eq && v.totals.th_eq <= v.bounds.th_eq;
        }
        return r;
    }

    CVec pack(const SimState& s) const {
        CVec y(2 * n_);
        std::copy(s.omega.data().begin(), s.omega.data().end(), y.begin());
        std::copy(s.theta.data().begin(), s.theta.data().end(), y.begin() + n_);
        return y;
    }
    SimState unpack(const CVec& y, double t) const {
        SimState s{SpectralField(cfg_.grid), SpectralField(cfg_.grid), t};
        std::copy(y.begin(), y.begin() + n_, s.omega.data().begin());
        std::copy(y.begin() + n_, y.end(), s.theta.data().begin());
        return s;
    }

  private:
    Velocity velocity_of(const SpectralField& w, double t) const {
        SpectralField wm = w;
        wm(0, 0) = 0.0;
        return biot_savart(wm, t, cfg_.shear);
    }

    struct Shift {
        int s;
        cplx m;
    };
    SimConfig cfg_;
    detail::TransportKernel ker_;
    ProfileSpectrum spec_;
    std::vector<Shift> shifts_;
    double mass_ = 0.0;
    std::size_t n_ = 0;
    std::vector<DecaySymbol> sym_;
    CVec v1_, v2_, tmp_;
};

inline SimState time_step(const SimState& s, const SimConfig& cfg, double dt) {
    Simulator sim(cfg);
    return sim.time_step(s, dt);
}

inline SimResult simulate(const SimConfig& cfg) {
    Simulator sim(cfg);
    return sim.simulate();
}

inline LedgerSnapshot bootstrap_norms(const SimState& s, const SimConfig& cfg) {
    return bootstrap_norms(s.omega, s.theta, s.t, cfg.nu, cfg.N, cfg.shear);
}

/// One JSON header line, then little-endian f64 (re, im) pairs of ω then θ, row-major over (k, j).
inline void write_snapshot(const std::string& path, const SimState& s) {
    std::ofstream os(path, std::ios::binary);
    require(bool(os), ErrorKind::Io, "cannot open snapshot file " + path);
    const auto& g = s.omega.grid();
    nlohmann::json h = {{"format", "bsl-snapshot"}, {"version", 1},       {"K", g.K},
                        {"J", g.J},                 {"Ly", g.Ly},         {"t", s.t},
                        {"fields", {"omega", "theta"}}, {"dtype", "f64"}, {"endianness", "little"},
                        {"layout", "row-major (k, j), k in [-K,K], j in [-J,J], (re, im) pairs"}};
    os << h.dump() << '\n';
    auto put = [&](double x) {
        std::uint64_t u;
        std::memcpy(&u, &x, sizeof u);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
        os.write(reinterpret_cast<const char*>(b), 8);
    };
    for (const auto* f : {&s.omega, &s.theta})
        for (const auto& c : f->data()) {
            put(c.real());
            put(c.imag());
        }
    require(bool(os), ErrorKind::Io, "failed writing snapshot " + path);
}

inline SimState read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(bool(is), ErrorKind::Io, "cannot open snapshot file " + path);
    std::string line;
    std::getline(is, line);
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
        fail(ErrorKind::Format, std::string("bad snapshot header: ") + e.what());
    }
    require(h.value("format", "") == "bsl-snapshot", ErrorKind::Format, "not a bsl snapshot");
    SpectralGrid g{h.at("K").get<int>(), h.at("J").get<int>(), h.at("Ly").get<double>()};
    SimState s{SpectralField(g), SpectralField(g), h.at("t").get<double>()};
    auto get = [&]() {
        unsigned char b[8];
        is.read(reinterpret_cast<char*>(b), 8);
        require(bool(is), ErrorKind::Format, "truncated snapshot payload");
        std::uint64_t u = 0;
        for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
        double x;
        std::memcpy(&x, &u, sizeof x);
        return x;
    };
    for (auto* f : {&s.omega, &s.theta})
        for (auto& c : f->data()) {
            const double re = get();
            c = cplx(re, get());
        }
    return s;
}

} // namespace bsl
