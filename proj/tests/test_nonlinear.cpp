#include <bsl/linear_mode.hpp>
#include <bsl/nonlinear.hpp>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

using namespace bsl;

namespace {

SpectralField random_field(const SpectralGrid& g, std::uint64_t seed, double scale = 1.0, bool mean_free = true) {
    SpectralField f(g);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    for (int k = 0; k <= g.K; ++k)
        for (int j = -g.J; j <= g.J; ++j) {
            if (k == 0 && j < 0) continue;
            if (k == 0 && j == 0 && mean_free) continue;
            f.set_real_mode(k, j, scale * cplx(nd(rng), nd(rng)) * std::exp(-0.05 * (k * k + j * j)));
        }
    return f;
}

double total_l2(const SimState& s) { return std::hypot(s.omega.l2(), s.theta.l2()); }

/// Full band convolution of v·∇_t f by direct double loop (exact dealiased product).
SpectralField naive_transport(const SpectralField& f, const Velocity& v, double t) {
    const auto& g = f.grid();
    SpectralField out(g);
    for (int k1 = -g.K; k1 <= g.K; ++k1)
        for (int j1 = -g.J; j1 <= g.J; ++j1)
            for (int k2 = -g.K; k2 <= g.K; ++k2)
                for (int j2 = -g.J; j2 <= g.J; ++j2) {
                    const int k = k1 + k2, j = j1 + j2;
                    if (!g.contains(k, j)) continue;
                    const cplx dx(0.0, k2), dy(0.0, g.xi(j2) - k2 * t);
                    out(k, j) += v.v1(k1, j1) * dx * f(k2, j2) + v.v2(k1, j1) * dy * f(k2, j2);
                }
    return out;
}

double max_diff(const SpectralField& a, const SpectralField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

} // namespace

TEST(ShearSplit, Examples) {
    const SpectralGrid g{3, 5, 8.0};
    SpectralField avg(g);
    avg.set_real_mode(0, 2, cplx(1.0, 1.0));
    auto [a, f] = shear_split(avg);
    EXPECT_EQ(max_diff(a, avg), 0.0);
    EXPECT_EQ(f.l2(), 0.0);
    SpectralField one(g);
    one.set_real_mode(1, -1, 2.0);
    std::tie(a, f) = shear_split(one);
    EXPECT_EQ(a.l2(), 0.0);
    EXPECT_EQ(max_diff(f, one), 0.0);
    const auto r = random_field(g, 3);
    std::tie(a, f) = shear_split(r);
    EXPECT_EQ(max_diff(a + f, r), 0.0);
    EXPECT_NEAR(a.l2() * a.l2() + f.l2() * f.l2(), r.l2() * r.l2(), 1e-12 * r.l2() * r.l2());
}

TEST(BiotSavart, Examples) {
    const SpectralGrid g{2, 4, 2.0 * std::numbers::pi};
    SpectralField w(g);
    w(1, 0) = 1.0;
    auto v = biot_savart(w, 0.0);
    EXPECT_LT(std::abs(v.v1(1, 0)), 1e-15);
    EXPECT_LT(std::abs(v.v2(1, 0) - cplx(0, 1)), 1e-15);
    v = biot_savart(w, 10.0);
    EXPECT_LT(std::abs(v.v1(1, 0) - cplx(0, 10.0 / 101.0)), 1e-15);
    EXPECT_LT(std::abs(v.v2(1, 0) - cplx(0, 1.0 / 101.0)), 1e-15);
}

TEST(BiotSavart, DivergenceFreeAndMeanError) {
    const SpectralGrid g{4, 8, 8.0};
    const auto w = random_field(g, 5);
    for (double t : {0.0, 0.7, 13.0}) {
        const auto v = biot_savart(w, t);
        for (int k = -g.K; k <= g.K; ++k)
            for (int j = -g.J; j <= g.J; ++j) {
                const cplx div = cplx(0, k) * v.v1(k, j) + cplx(0, g.xi(j) - k * t) * v.v2(k, j);
                EXPECT_LT(std::abs(div), 1e-14);
            }
    }
    SpectralField m = w;
    m(0, 0) = 1.0;
    try {
        biot_savart(m, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Domain);
    }
}

TEST(Transport, TrivialCases) {
    const SpectralGrid g{3, 6, 8.0};
    const auto f = random_field(g, 1);
    const Velocity zero{SpectralField(g), SpectralField(g)};
    EXPECT_EQ(nonlinear_transport(f, zero, 0.3).l2(), 0.0);
    SpectralField c(g);
    c(0, 0) = 2.0;
    EXPECT_LT(nonlinear_transport(c, biot_savart(random_field(g, 2), 0.3), 0.3).l2(), 1e-15);
    const Velocity wrong{SpectralField({2, 6, 8.0}), SpectralField({2, 6, 8.0})};
    EXPECT_THROW(nonlinear_transport(f, wrong, 0.0), Error);
}

TEST(Transport, TwoModeConvolution) {
    const SpectralGrid g{4, 6, 2.0 * std::numbers::pi};
    SpectralField w(g), f(g);
    w.set_real_mode(1, 2, cplx(0.5, -1.0));
    f.set_real_mode(2, -1, cplx(1.5, 0.25));
    const double t = 0.4;
    const auto v = biot_savart(w, t);
    const auto out = nonlinear_transport(f, v, t);
    // hand convolution: only (±1,±2)+(±2,∓1) pairs contribute
    SpectralField ref(g);
    for (int s1 : {1, -1})
        for (int s2 : {1, -1}) {
            const int k1 = s1, j1 = 2 * s1, k2 = 2 * s2, j2 = -s2;
            const cplx term = v.v1(k1, j1) * cplx(0, k2) * f(k2, j2) + v.v2(k1, j1) * cplx(0, g.xi(j2) - k2 * t) * f(k2, j2);
            ref(k1 + k2, j1 + j2) += term;
        }
    EXPECT_LT(max_diff(out, ref), 1e-12);
}

TEST(Transport, RandomAgainstNaiveConvolutionAndMean) {
    const SpectralGrid g{3, 5, 6.0};
    const auto w = random_field(g, 7), f = random_field(g, 8, 1.0, false);
    for (double t : {0.0, 1.3}) {
        const auto v = biot_savart(w, t);
        const auto out = nonlinear_transport(f, v, t);
        EXPECT_LT(max_diff(out, naive_transport(f, v, t)), 1e-12);
        EXPECT_LT(std::abs(out(0, 0)), 1e-14);
        EXPECT_LT(out.hermitian_defect(), 1e-13);
    }
}

TEST(TimeStep, ZeroStaysZero) {
    SimConfig c;
    c.nu = 0.05;
    c.epsilon = 0.0;
    c.grid = {6, 8, 16.0 * std::numbers::pi};
    c.profile = TemperatureProfile::cosine(0.01, 0.5);
    c.t_end = 2.0;
    c.N = 2;
    const auto r = simulate(c);
    EXPECT_EQ(r.final_state.omega.l2(), 0.0);
    EXPECT_EQ(r.final_state.theta.l2(), 0.0);
    const auto e = r.ledger.entries();
    for (std::size_t i = 1; i < e.values().size(); ++i) EXPECT_EQ(e.values()[i], 0.0);
}

TEST(TimeStep, LinearRegimeMatchesAffineMode) {
    SimConfig c;
    c.nu = 0.02;
    c.epsilon = 1e-8;
    c.profile = TemperatureProfile::affine(-0.3);
    c.grid = {4, 48, 16.0 * std::numbers::pi};
    c.init = InitKind::single_mode;
    c.mode_k = 1;
    c.mode_j = 4;
    c.mode_theta = cplx(0.0, 0.5);
    c.dt_max = 0.01;
    c.t_end = 10.0;
    c.N = 1;
    c.keep_series = false;
    Simulator sim(c);
    std::vector<SimState> states;
    sim.simulate([&](const SimState& s) {
        if (std::fmod(s.t + 1e-9, 1.0) < 2e-9) states.push_back(s);
    });
    const FrequencyMode m{1, c.grid.xi(4)};
    ModeRunOptions o;
    o.rtol = 1e-11;
    for (int i = 1; i <= 10; ++i) o.samples.push_back(i);
    const auto tr = integrate_affine_mode(m, -0.3, DissipationConfig::vertical(c.nu), 10.0,
                                          {c.epsilon, c.epsilon * c.mode_theta, 0.0}, o);
    ASSERT_GE(states.size(), 10u);
    for (const auto& s : states) {
        for (std::size_t q = 0; q < tr.size(); ++q) {
            if (!tr.at_sample[q] || std::abs(tr.times[q] - s.t) > 1e-9) continue;
            const cplx a = s.omega(1, 4), b = tr.states[q].omega;
            const cplx ta = s.theta(1, 4), tb = tr.states[q].theta;
            EXPECT_LT(std::abs(a - b) / std::abs(b), 1e-4) << s.t;
            EXPECT_LT(std::abs(ta - tb) / std::abs(tb), 1e-4) << s.t;
        }
    }
}

TEST(TimeStep, RichardsonOrder) {
    SimConfig c;
    c.nu = 0.05;
    c.epsilon = 0.5;
    c.profile = TemperatureProfile::cosine(0.2, 0.5);
    c.grid = {6, 12, 16.0 * std::numbers::pi};
    c.N = 1;
    c.cfl = 10.0;
    Simulator sim(c);
    SimState s = sim.initial_state();
    s = sim.time_step(s, 0.05);
    auto err = [&](double h) {
        const auto one = sim.time_step(s, h);
        const auto two = sim.time_step(sim.time_step(s, h / 2), h / 2);
        return total_l2({one.omega - two.omega, one.theta - two.theta, 0.0});
    };
    const double r = err(0.2) / err(0.1);
    EXPECT_NEAR(r, 32.0, 0.25 * 32.0) << r;
}

TEST(TimeStep, CflViolationRejected) {
    SimConfig c;
    c.nu = 0.05;
    c.epsilon = 1.0;
    c.profile = TemperatureProfile::affine(-4.0);
    c.grid = {4, 8, 16.0 * std::numbers::pi};
    c.N = 0;
    Simulator sim(c);
    const auto s = sim.initial_state();
    try {
        sim.time_step(s, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Integration);
    }
}

TEST(TimeStep, HermitianPreserved) {
    SimConfig c;
    c.nu = 0.05;
    c.epsilon = 0.3;
    c.profile = TemperatureProfile::cosine(0.05, 0.25, 0.4);
    c.grid = {5, 10, 16.0 * std::numbers::pi};
    c.N = 1;
    Simulator sim(c);
    auto s = sim.initial_state();
    for (int i = 0; i < 20; ++i) s = sim.time_step(s, 0.02);
    EXPECT_LT(s.omega.hermitian_defect(), 1e-13 * std::max(1.0, s.omega.l2()));
    EXPECT_LT(s.theta.hermitian_defect(), 1e-13 * std::max(1.0, s.theta.l2()));
}

TEST(TimeStep, EulerEnstrophyConserved) {
    // truncated inviscid system conserves ‖ω‖; drift is pure time error and must vanish with dt
    auto drift = [](double dt) {
        SimConfig c;
        c.nu = 0.0;
        c.diss = DissipationConfig{};
        c.epsilon = 1.0;
        c.profile = TemperatureProfile::zero();
        c.grid = {12, 12, 2.0 * std::numbers::pi};
        c.N = 0;
        c.cfl = 0.3;
        c.dt_max = dt;
        Simulator sim(c);
        SimState s{random_field(c.grid, 12, 0.5), SpectralField(c.grid), 0.0};
        const double e0 = s.omega.l2();
        while (s.t < 1.0 - 1e-12) s = sim.time_step(s, std::min(sim.choose_dt(s), 1.0 - s.t));
        EXPECT_EQ(s.theta.l2(), 0.0);
        return std::abs(s.omega.l2() - e0) / e0;
    };
    const double coarse = drift(0.005), fine = drift(0.0025);
    EXPECT_LT(fine, 1e-8);
    EXPECT_GT(coarse / fine, 8.0);
}

TEST(TimeStep, ShearAverageFeedbackMatchesPhysicalAverage) {
    SimConfig c;
    c.nu = 0.1;
    c.profile = TemperatureProfile::zero();
    c.grid = {2, 5, 2.0 * std::numbers::pi};
    c.N = 0;
    Simulator sim(c);
    const auto& g = c.grid;
    const SimState s{random_field(g, 21), random_field(g, 22), 0.6};
    CVec y = sim.pack(s), out(y.size());
    sim.rhs(s.t, y, out);
    const auto d = sim.unpack(out, s.t);
    // physical-space x-average of v·∇_t θ by direct evaluation of the Fourier series
    const auto v = biot_savart(s.omega, s.t);
    const int nx = 4 * g.K + 1, ny = 4 * g.J + 1;
    std::vector<cplx> avg(ny);
    auto eval = [&](const SpectralField& f, double x, double yy, auto mult) {
        cplx r{};
        for (int k = -g.K; k <= g.K; ++k)
            for (int j = -g.J; j <= g.J; ++j) r += mult(k, j) * f(k, j) * std::polar(1.0, k * x + g.xi(j) * yy);
        return r.real();
    };
    auto one = [](int, int) { return cplx(1.0); };
    auto ddx = [](int k, int) { return cplx(0.0, k); };
    auto ddy = [&](int k, int j) { return cplx(0.0, g.xi(j) - k * s.t); };
    for (int b = 0; b < ny; ++b) {
        const double yy = g.Ly * b / ny;
        double acc = 0.0;
        for (int a = 0; a < nx; ++a) {
            const double x = 2.0 * std::numbers::pi * a / nx;
            acc += eval(v.v1, x, yy, one) * eval(s.theta, x, yy, ddx) + eval(v.v2, x, yy, one) * eval(s.theta, x, yy, ddy);
        }
        avg[b] = acc / nx;
    }
    for (int j = -g.J; j <= g.J; ++j) {
        cplx coef{};
        for (int b = 0; b < ny; ++b) coef += avg[b] * std::polar(1.0, -g.xi(j) * g.Ly * b / ny);
        coef /= double(ny);
        EXPECT_LT(std::abs(d.theta(0, j) + coef), 1e-12) << j;
    }
}

TEST(Simulate, LinearizationFactorFour) {
    auto deviation = [](double eps) {
        SimConfig c;
        c.nu = 0.1;
        c.epsilon = eps;
        c.profile = TemperatureProfile::affine(std::cbrt(0.1) / 200.0);
        c.grid = {8, 12, 16.0 * std::numbers::pi};
        c.N = 2;
        SimConfig l = c;
        l.nonlinear = false;
        Simulator sn(c), sl(l);
        auto x = sn.initial_state(), y = sl.initial_state();
        double dmax = 0.0;
        while (x.t < 5.0 - 1e-12) {
            const double dt = std::min({sn.choose_dt(x), sl.choose_dt(y), 5.0 - x.t});
            x = sn.time_step(x, dt);
            y = sl.time_step(y, dt);
            dmax = std::max(dmax, total_l2({x.omega - y.omega, x.theta - y.theta, 0.0}));
        }
        return dmax;
    };
    const double r = deviation(1e-3) / deviation(5e-4);
    EXPECT_NEAR(r, 4.0, 0.8);
}

TEST(Simulate, FlagsAndNoShearGrowth) {
    // ν = 0, shear off, α = -1: Rayleigh–Bénard growth at Re λ₁ of the no-shear system
    SimConfig c;
    c.nu = 0.0;
    c.diss = DissipationConfig{};
    c.shear = 0.0;
    c.epsilon = 1e-10;
    c.profile = TemperatureProfile::affine(-1.0);
    c.grid = {2, 8, 16.0 * std::numbers::pi};
    c.init = InitKind::single_mode;
    c.mode_k = 1;
    c.mode_j = 3;
    c.t_end = 8.0;
    c.N = 0;
    c.dt_max = 0.01;
    Simulator sim(c);
    std::vector<std::pair<double, double>> amp;
    const auto r = sim.simulate([&](const SimState& s) { amp.emplace_back(s.t, total_l2(s)); });
    EXPECT_TRUE(r.outside_hypotheses);
    EXPECT_FALSE(r.regime_ok);
    EXPECT_FALSE(r.ledger_evaluated);
    const double lam = no_shear_eigenvalues({{1, c.grid.xi(3)}, -1.0, {}}).lambda1.real();
    const auto& a = amp[amp.size() / 2];
    const auto& b = amp.back();
    const double rate = std::log(b.second / a.second) / (b.first - a.first);
    EXPECT_NEAR(rate / lam, 1.0, 0.05);
}

TEST(Simulate, BlowUpEarlyExit) {
    SimConfig c = {};
    c.nu = 0.0;
    c.diss = DissipationConfig{};
    c.shear = 0.0;
    c.epsilon = 1e-6;
    c.profile = TemperatureProfile::affine(-1.0);
    c.grid = {2, 8, 16.0 * std::numbers::pi};
    c.init = InitKind::single_mode;
    c.t_end = 100.0;
    c.N = 0;
    c.blowup_factor = 1e3;
    const auto r = simulate(c);
    EXPECT_TRUE(r.instability_observed);
    EXPECT_LT(r.final_state.t, 100.0);
    EXPECT_FALSE(r.verdict.pass);
}

TEST(Bootstrap, ZeroAndSingleMode) {
    const SpectralGrid g{2, 4, 2.0 * std::numbers::pi};
    const auto z = bootstrap_norms(SpectralField(g), SpectralField(g), 0.0, 1e-2, 3);
    for (double v : z.values()) EXPECT_EQ(v, 0.0);
    SpectralField w(g);
    w(1, 0) = 1.0;
    const double nu = 1e-2;
    const int N = 3;
    const auto s = bootstrap_norms(w, SpectralField(g), 0.0, nu, N);
    EXPECT_DOUBLE_EQ(s.w_ind, nu * std::pow(2.0, N));
    EXPECT_DOUBLE_EQ(s.w_sup, std::pow(2.0, N));
}

TEST(Bootstrap, MatchesBruteForce) {
    const SpectralGrid g{3, 6, 5.0};
    const auto w = random_field(g, 31), th = random_field(g, 32);
    const double nu = 3e-3, t = 2.3;
    const int N = 2;
    const auto s = bootstrap_norms(w, th, t, nu, N);
    const double C = std::cbrt(1.0 / nu);
    double ref[12] = {};
    for (int k = -g.K; k <= g.K; ++k)
        for (int j = -g.J; j <= g.J; ++j) {
            const double xi = j * 2.0 * std::numbers::pi / 5.0;
            const double wt = std::pow(1.0 + k * k + xi * xi, N);
            const double e = xi - k * t;
            const double h2 = k * k + std::min(e * e, C * C);
            const double a = std::norm(w(k, j)), b = std::norm(th(k, j));
            if (k == 0) {
                ref[8] += wt * a;
                ref[9] += nu * xi * xi * wt * a;
                ref[10] += wt * h2 * b;
                ref[11] += nu * xi * xi * wt * h2 * b;
                continue;
            }
            const double s0 = xi / k;
            const double A = std::exp(-2.0 * (std::atan(s0) - std::atan(s0 - t)));
            const double lo = std::max(0.0, s0 - C), hi = std::min(t, s0 + C);
            const double B = hi > lo ? std::exp(-2.0 * (std::asinh(hi - s0) - std::asinh(lo - s0))) : 1.0;
            const double M2 = A * A * B * B;
            const double ind = std::abs(e) <= std::abs(k) ? 1.0 : 0.0;
            const double q = k * k + e * e;
            ref[0] += wt * M2 * a;
            ref[1] += nu * e * e * wt * M2 * a;
            ref[2] += nu * ind * wt * M2 * a;
            ref[3] += wt * M2 * a / q;
            ref[4] += wt * h2 * M2 * b;
            ref[5] += nu * e * e * wt * h2 * M2 * b;
            ref[6] += nu * ind * wt * h2 * M2 * b;
            ref[7] += wt * h2 * M2 * b / q;
        }
    const double got[12] = {s.w_sup, s.w_diss, s.w_ind, s.w_vel, s.th_sup, s.th_diss,
                            s.th_ind, s.th_vel, s.we_sup, s.we_diss, s.te_sup, s.te_diss};
    for (int i = 0; i < 12; ++i) EXPECT_NEAR(got[i], ref[i], 1e-12 * std::max(1.0, std::abs(ref[i]))) << i;
}

TEST(Bootstrap, LedgerEntriesNondecreasing) {
    SimConfig c;
    c.nu = 0.1;
    c.epsilon = 1e-5;
    c.profile = TemperatureProfile::affine(0.01);
    c.grid = {4, 8, 16.0 * std::numbers::pi};
    c.t_end = 3.0;
    c.N = 1;
    Simulator sim(c);
    BootstrapLedger led;
    std::vector<double> prev;
    sim.simulate([&](const SimState& s) {
        led.update(bootstrap_norms(s, c));
        const auto v = led.entries().values();
        std::vector<double> cur(v.begin() + 1, v.end());
        for (std::size_t i = 0; i < cur.size() && !prev.empty(); ++i) EXPECT_GE(cur[i], prev[i]);
        for (double x : cur) EXPECT_GE(x, 0.0);
        prev = cur;
    });
}

TEST(Snapshot, RoundTrip) {
    const SpectralGrid g{3, 4, 7.5};
    const SimState s{random_field(g, 41), random_field(g, 42), 1.25};
    const auto path = (std::filesystem::temp_directory_path() / "bsl_snapshot_test.bin").string();
    write_snapshot(path, s);
    const auto r = read_snapshot(path);
    EXPECT_EQ(r.t, s.t);
    EXPECT_TRUE(r.omega.grid() == g);
    EXPECT_EQ(max_diff(r.omega, s.omega), 0.0);
    EXPECT_EQ(max_diff(r.theta, s.theta), 0.0);
    std::filesystem::remove(path);
}
