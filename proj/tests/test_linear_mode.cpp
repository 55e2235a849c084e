#include <bsl/linear_mode.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

using namespace bsl;

namespace {

std::pair<cplx, cplx> eigen_oracle(const NoShearSystem& sys) {
    const Mat2 m = no_shear_matrix(sys);
    Eigen::Matrix2cd a;
    a << m[0][0], m[0][1], m[1][0], m[1][1];
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(a);
    cplx l1 = es.eigenvalues()(0), l2 = es.eigenvalues()(1);
    if (l2.real() > l1.real()) std::swap(l1, l2);
    return {l1, l2};
}

} // namespace

TEST(NoShear, Examples) {
    auto e = no_shear_eigenvalues({{1, 0.0}, 1.0, {}});
    EXPECT_NEAR(std::abs(e.lambda1 - cplx(0, 1)) * std::abs(e.lambda1 + cplx(0, 1)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(e.lambda1 + e.lambda2), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(e.lambda1.imag()), 1.0, 1e-15);
    e = no_shear_eigenvalues({{1, 0.0}, -1.0, {}});
    EXPECT_NEAR(e.lambda1.real(), 1.0, 1e-15);
    EXPECT_NEAR(e.lambda2.real(), -1.0, 1e-15);
    e = no_shear_eigenvalues({{1, 0.0}, -1.0, DissipationConfig{0.0, 0.1, 0.0, 0.0}});
    EXPECT_NEAR(e.lambda1.real(), 0.9512492, 1e-7);
    EXPECT_NEAR(e.lambda1.real(), eigen_oracle({{1, 0.0}, -1.0, DissipationConfig{0.0, 0.1, 0.0, 0.0}}).first.real(), 1e-14);
}

TEST(NoShear, RandomizedAgainstEigenSolver) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ux(-5.0, 5.0), ua(-3.0, 3.0), un(0.0, 1.0);
    std::uniform_int_distribution<int> uk(1, 6);
    for (int i = 0; i < 500; ++i) {
        const double c = un(rng);
        DissipationConfig d = (i % 2) ? DissipationConfig{0.0, c, 0.0, 0.0} : DissipationConfig{0.0, 0.0, 0.0, c};
        const NoShearSystem sys{{uk(rng) * (i % 3 ? 1 : -1), ux(rng)}, ua(rng), d};
        const auto e = no_shear_eigenvalues(sys);
        const auto [o1, o2] = eigen_oracle(sys);
        // conjugate pairs share the real part, so compare as unordered pairs
        const double same = std::max(std::abs(e.lambda1 - o1), std::abs(e.lambda2 - o2));
        const double swapped = std::max(std::abs(e.lambda1 - o2), std::abs(e.lambda2 - o1));
        EXPECT_LT(std::min(same, swapped), 1e-12);
        if (sys.alpha < 0.0) {
            EXPECT_GT(e.lambda1.real(), 0.0);
        }
        if (sys.alpha > 0.0 && c == 0.0) {
            EXPECT_LT(std::abs(e.lambda1.real()), 1e-12);
        }
    }
}

TEST(NoShear, InviscidStableIsPurelyImaginary) {
    for (double a : {0.01, 0.5, 3.0})
        for (double xi : {0.0, 1.3, -4.0}) {
            const auto e = no_shear_eigenvalues({{2, xi}, a, {}});
            EXPECT_LT(std::abs(e.lambda1.real()), 1e-12);
            EXPECT_LT(std::abs(e.lambda2.real()), 1e-12);
        }
}

TEST(NoShear, Classification) {
    EXPECT_EQ(classify_no_shear({{1, 0.0}, 1.0, {}}), NoShearClass::stable);
    EXPECT_EQ(classify_no_shear({{1, 0.0}, -1e-6, {}}), NoShearClass::exponentially_unstable);
    EXPECT_EQ(classify_no_shear({{1, 0.0}, 0.0, {}}), NoShearClass::marginal);
    EXPECT_THROW(classify_no_shear({{1, 0.0}, 1.0, {0.0, 0.1, 0.0, 0.1}}), Error);
    EXPECT_THROW(no_shear_eigenvalues({{0, 1.0}, 1.0, {}}), Error);
}

TEST(NoShear, TimeIntegrationGrowthRate) {
    const NoShearSystem sys{{1, 0.5}, -0.8, DissipationConfig{0.0, 0.05, 0.0, 0.0}};
    const double rate = no_shear_eigenvalues(sys).lambda1.real();
    ModeRunOptions o;
    o.rtol = 1e-11;
    const auto tr = integrate_no_shear(sys, {1.0, 0.3, 0.0}, 20.0, o);
    const double measured = 0.5 * (std::log(tr.energy.back()) - std::log(tr.energy[tr.size() / 2])) /
                            (tr.times.back() - tr.times[tr.size() / 2]);
    EXPECT_NEAR(measured / rate, 1.0, 1e-2);
}

TEST(Exponents, ExamplesAndVieta) {
    auto r = inviscid_exponents(0.0);
    EXPECT_DOUBLE_EQ(r.beta1.real(), 1.0);
    EXPECT_DOUBLE_EQ(r.beta2.real(), 0.0);
    EXPECT_DOUBLE_EQ(r.c, 0.5);
    r = inviscid_exponents(-2.0);
    EXPECT_DOUBLE_EQ(r.beta1.real(), 2.0);
    EXPECT_DOUBLE_EQ(r.beta2.real(), -1.0);
    EXPECT_DOUBLE_EQ(r.c, 1.5);
    EXPECT_TRUE(r.v2_marginal);
    EXPECT_DOUBLE_EQ(r.rate_v2, 0.0);
    r = inviscid_exponents(0.25);
    EXPECT_TRUE(r.double_root);
    EXPECT_DOUBLE_EQ(r.beta1.real(), 0.5);
    EXPECT_DOUBLE_EQ(r.beta2.real(), 0.5);
    for (double a : {-7.3, -0.1, 0.1, 0.24, 0.26, 1.0, 40.0}) {
        const auto e = inviscid_exponents(a);
        EXPECT_LT(std::abs(e.beta1 + e.beta2 - 1.0), 1e-14);
        EXPECT_LT(std::abs(e.beta1 * e.beta2 - a), 1e-13 * std::max(1.0, std::abs(a)));
    }
}

TEST(Schrodinger, FreeSolutions) {
    auto tr = integrate_schrodinger(0.0, 50.0, 1e-12, 1.0, 0.0);
    for (const auto& s : tr.states) EXPECT_NEAR(std::abs(s.omega - 1.0), 0.0, 1e-12);
    tr = integrate_schrodinger(0.0, 50.0, 1e-12, 0.0, 1.0);
    for (std::size_t i = 0; i < tr.size(); ++i) EXPECT_NEAR(tr.states[i].omega.real(), tr.times[i], 1e-10 * (1 + tr.times[i]));
}

TEST(Schrodinger, GrowthExponents) {
    for (double a : {-6.0, -2.0}) {
        const auto tr = integrate_schrodinger(a, 1e4, 1e-11, 1.0, 0.0);
        const double b = fit_growth_exponent(tr, TimeInterval{100.0, 1e4, false});
        EXPECT_NEAR(b / inviscid_exponents(a).beta1.real(), 1.0, 0.02);
    }
}

TEST(FitGrowth, ExactPowerLaws) {
    ModeTrajectory tr;
    for (double t : log_spaced(1.0, 1e3, 50)) tr.push(t, t * t, 0.0, t * t * t * t, true);
    EXPECT_NEAR(fit_growth_exponent(tr, TimeInterval{1.0, 1e3, false}), 2.0, 1e-6);
    ModeTrajectory c;
    for (double t : log_spaced(1.0, 1e3, 50)) c.push(t, 3.0, 0.0, 9.0, true);
    EXPECT_NEAR(fit_growth_exponent(c, TimeInterval{1.0, 1e3, false}), 0.0, 1e-12);
    ModeTrajectory z;
    for (double t : log_spaced(1.0, 1e3, 50)) z.push(t, 0.0, 0.0, 0.0, true);
    try {
        fit_growth_exponent(z, TimeInterval{1.0, 1e3, false});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Fit);
    }
}

TEST(AffineMode, PureDecayClosedForm) {
    const FrequencyMode m{2, 3.0};
    const double nu = 1e-2, T = 7.0;
    ModeRunOptions o;
    o.rtol = 1e-12;
    const auto tr = integrate_affine_mode(m, 0.0, nu, T, {cplx(1.0, 0.5), 0.0, 0.0}, o);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double t = tr.times[i], k = m.k;
        const double ex = nu * (k * k * t + (std::pow(m.xi, 3) - std::pow(m.xi - k * t, 3)) / (3.0 * k));
        EXPECT_NEAR(std::abs(tr.states[i].omega - cplx(1.0, 0.5) * std::exp(-ex)), 0.0, 1e-12);
        EXPECT_EQ(tr.states[i].theta, cplx(0.0));
    }
}

TEST(AffineMode, InviscidMatchesSchrodingerShifted) {
    for (double alpha : {-0.7, 0.4}) {
        const FrequencyMode m{2, 5.0};
        const double s = m.xi / m.k, T = 30.0;
        const cplx w0(1.0, 0.2), th0(0.1, -0.3);
        ModeRunOptions o;
        o.rtol = 1e-12;
        o.atol = 1e-16;
        o.samples = {10.0, 20.0};
        const auto tr = integrate_affine_mode(m, alpha, DissipationConfig{}, T, {w0, th0, 0.0}, o);
        // u(τ) = ω̃(τ + s), u' = iφ = i k θ̃
        const auto sc = integrate_schrodinger(alpha, T - s, 1e-12, w0, cplx(0.0, 1.0) * double(m.k) * th0, -s, 2, true);
        const cplx a = tr.states.back().omega, b = sc.states.back().omega;
        EXPECT_LT(std::abs(a - b) / std::abs(b), 1e-6);
    }
}

TEST(AffineMode, StepOneEnergyBound) {
    // E = α|ω|² + (k²+(ξ-kt)²)|θ|² obeys E(t) ≤ (1+(t-s)²)/(1+max(0,-s)²) E(0), s = ξ/k
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ux(-6.0, 6.0), ua(0.01, 2.0);
    for (int i = 0; i < 20; ++i) {
        const FrequencyMode m{1 + int(rng() % 3), ux(rng)};
        const double alpha = ua(rng), nu = (i % 2) ? 0.0 : 1e-3;
        ModeRunOptions o;
        o.rtol = 1e-11;
        const auto tr = integrate_affine_mode(m, alpha, nu, 15.0, {cplx(0.3, 0.1), cplx(0.5, 0.0), 0.0}, o);
        const double k = m.k, s = m.xi / k;
        auto E = [&](std::size_t q) {
            const double eta = m.xi - k * tr.times[q];
            return alpha * std::norm(tr.states[q].omega) + (k * k + eta * eta) * std::norm(tr.states[q].theta);
        };
        const double e0 = E(0);
        for (std::size_t q = 0; q < tr.size(); ++q) {
            const double t = tr.times[q], a = std::max(0.0, -s);
            EXPECT_LE(E(q), (1.0 + (t - s) * (t - s)) / (1.0 + a * a) * e0 * (1 + 1e-8));
        }
    }
}

TEST(AffineMode, LiteralEq11FailsForNegativeSlopeRatio) {
    // θ-dominated data, s = -1, t = 1: E grows by (1+4)/(1+1) = 2.5 > 1+t² = 2
    const FrequencyMode m{1, -1.0};
    ModeRunOptions o;
    o.rtol = 1e-12;
    const auto tr = integrate_affine_mode(m, 1e-8, 0.0, 1.0, {0.0, 1.0, 0.0}, o);
    const double eta1 = m.xi - tr.times.back();
    const double e1 = 1e-8 * std::norm(tr.states.back().omega) + (1 + eta1 * eta1) * std::norm(tr.states.back().theta);
    const double e0 = 2.0;
    EXPECT_NEAR(e1 / e0, 2.5, 1e-6);
}

TEST(ModeBound, ZeroInitialDataRejected) {
    const auto tr = integrate_affine_mode({1, 0.0}, 0.1, 1e-2, 1.0, {0.0, 0.0, 0.0});
    try {
        verify_mode_bound(tr, 0.1, 1e-2, CutoffConfig::for_nu(1e-2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Domain);
    }
}

TEST(ModeBound, PureDecayPasses) {
    const auto tr = integrate_affine_mode({1, 2.0}, 0.0, 1e-2, 30.0);
    const auto r = verify_mode_bound(tr, 0.0, 1e-2, CutoffConfig::for_nu(1e-2));
    EXPECT_LE(r.ratio, 1.0 + 1e-12);
    EXPECT_TRUE(r.pass);
}

TEST(ModeBound, TheoremGoodDeskScale) {
    for (double nu : {1e-2, 1e-3}) {
        const double C = std::cbrt(1.0 / nu);
        for (double sign : {-1.0, 1.0}) {
            const double alpha = sign * std::cbrt(nu) / 100.0;
            for (double r : {0.0, 1.0}) {
                const FrequencyMode m{1, r * C};
                const auto tr = integrate_affine_mode(m, alpha, nu, 4 * C + 20);
                const auto b = verify_mode_bound(tr, alpha, nu, CutoffConfig::for_nu(nu));
                EXPECT_TRUE(b.pass) << nu << " " << alpha << " " << r << " ratio " << b.ratio;
                const double g = affine_propagator_gain(m, alpha, DissipationConfig::vorticity_only(nu), 4 * C + 20);
                EXPECT_GE(g * (1 + 1e-6), b.ratio);
            }
        }
    }
}

TEST(Orr, SingleModeValue) {
    const SpectralGrid g{2, 8, 2.0 * std::numbers::pi};
    SpectralField w(g);
    w.set_real_mode(1, 0, 1.0);
    EXPECT_NEAR(orr_ratio(w, 10.0), 10.0 * (10.0 / 101.0) / std::sqrt(2.0), 1e-14);
    EXPECT_LE(orr_ratio(w, 10.0), 1.0);
}

TEST(Orr, BoundedAndNonResonantSmall) {
    const SpectralGrid g{3, 24, 4.0 * std::numbers::pi};
    SpectralField w(g);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    for (int k = 1; k <= 3; ++k)
        for (int j = -24; j <= 24; ++j) w.set_real_mode(k, j, cplx(nd(rng), nd(rng)));
    for (double t = 1.0; t <= 100.0; t += 0.5) EXPECT_LE(orr_ratio(w, t), 1.1);
    SpectralField far(g);
    far.set_real_mode(1, 24, 1.0); // ξ = 12, t = 0.1
    EXPECT_LT(orr_ratio(far, 0.1), 1e-2);
    EXPECT_THROW(orr_ratio(SpectralField(g), 1.0), Error);
}
