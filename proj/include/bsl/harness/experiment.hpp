#pragma once

#include <bsl/admissibility.hpp>
#include <bsl/coupled.hpp>
#include <bsl/error.hpp>
#include <bsl/harness/config.hpp>
#include <bsl/harness/table.hpp>
#include <bsl/harness/threshold.hpp>
#include <bsl/linear_mode.hpp>
#include <bsl/nonlinear.hpp>

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#ifndef BSL_VERSION
#define BSL_VERSION "unknown"
#endif

namespace bsl {

enum class Command { eigen, exponents, mode, coupled, admit, simulate, threshold, scaling };

inline const std::vector<std::pair<std::string, Command>>& command_names() {
    static const std::vector<std::pair<std::string, Command>> v{
        {"eigen", Command::eigen},       {"exponents", Command::exponents}, {"mode", Command::mode},
        {"coupled", Command::coupled},   {"admit", Command::admit},         {"simulate", Command::simulate},
        {"threshold", Command::threshold}, {"scaling", Command::scaling}};
    return v;
}

inline Command parse_command(const std::string& s) {
    for (const auto& [n, c] : command_names())
        if (n == s) return c;
    fail(ErrorKind::Config, "unknown command '" + s + "'");
}

inline std::string to_string(Command c) {
    for (const auto& [n, cc] : command_names())
        if (cc == c) return n;
    return "?";
}

struct ExperimentConfig {
    Command command = Command::eigen;
    json params = json::object();
    std::filesystem::path out_dir;     ///< empty: nothing written
    std::filesystem::path config_dir;  ///< base for relative file references in params
    unsigned jobs = 1;
    std::uint64_t seed = 1;
    ExportFormat format = ExportFormat::csv;
};

struct SweepResult {
    Command command = Command::eigen;
    Table table;
    std::vector<std::pair<std::string, Table>> extra; ///< per-point series, written next to the main table
    json summary = json::object();
    std::vector<std::string> failures;
    bool numerical_failure = false;
    bool instability = false; ///< only set by commands that assert stability
    json provenance = json::object();
};

/// Seeds are stored in numeric table columns, so they must be exact doubles.
inline constexpr std::uint64_t max_exact_seed = (std::uint64_t(1) << 53) - 1;

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(index), std::uint32_t(index >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return ((std::uint64_t(out[0]) << 32) | out[1]) & max_exact_seed;
}

/// FNV-1a over the canonical (key-sorted) JSON dump.
inline std::string config_hash(const json& j) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string utc_timestamp() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Runs f(i) for i < n on a work queue of `jobs` threads. Results are stored by index.
template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
    jobs = std::max(1u, std::min<unsigned>(jobs, unsigned(std::max<std::size_t>(n, 1))));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) f(i);
        });
    for (auto& t : pool) t.join();
}

namespace detail {

struct PointOutput {
    PointOutput() = default;
    PointOutput(std::vector<Cell> r) : row(std::move(r)) {}

    std::vector<Cell> row;
    std::vector<std::pair<std::string, Table>> extra;
    bool instability = false;
};

using PointFn = std::function<PointOutput(std::size_t index)>;

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }
inline Cell flag(bool b) { return std::string(b ? "true" : "false"); }

/// Evaluates every point; failures become rows with NaN cells and the error in "status".
inline void run_points(SweepResult& res, std::vector<std::string> columns, std::size_t n, unsigned jobs,
                       const PointFn& fn) {
    columns.push_back("status");
    res.table.columns = columns;
    std::vector<PointOutput> out(n);
    std::vector<std::string> err(n);
    std::vector<char> numerical(n, 0);
    parallel_for(n, jobs, [&](std::size_t i) {
        try {
            out[i] = fn(i);
            require(out[i].row.size() + 1 == columns.size(), ErrorKind::Format, "internal: row width mismatch");
        } catch (const Error& e) {
            err[i] = std::string(to_string(e.kind())) + ": " + e.what();
            numerical[i] = e.kind() != ErrorKind::Config && e.kind() != ErrorKind::Format && e.kind() != ErrorKind::Io;
        } catch (const std::exception& e) {
            err[i] = std::string("error: ") + e.what();
            numerical[i] = 1;
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        if (err[i].empty()) {
            auto row = std::move(out[i].row);
            row.emplace_back(std::string("ok"));
            res.table.rows.push_back(std::move(row));
            for (auto& e : out[i].extra) res.extra.push_back(std::move(e));
            res.instability = res.instability || out[i].instability;
        } else {
            std::vector<Cell> row(columns.size() - 1, Cell(nan()));
            row.emplace_back(err[i]);
            res.table.rows.push_back(std::move(row));
            res.failures.push_back("point " + std::to_string(i) + ": " + err[i]);
            res.numerical_failure = res.numerical_failure || numerical[i];
        }
    }
}

template <class... L>
std::size_t product_size(const L&... lists) {
    return (std::size_t(1) * ... * lists.size());
}

/// Row-major unravel of a Cartesian product index.
inline std::vector<std::size_t> unravel(std::size_t i, const std::vector<std::size_t>& dims) {
    std::vector<std::size_t> idx(dims.size());
    for (std::size_t d = dims.size(); d-- > 0;) {
        idx[d] = i % dims[d];
        i /= dims[d];
    }
    return idx;
}

inline Table mode_series(const ModeTrajectory& tr) {
    Table t;
    t.columns = {"t", "re_omega", "im_omega", "re_theta", "im_theta", "E"};
    for (std::size_t i = 0; i < tr.size(); ++i)
        t.rows.push_back({tr.times[i], tr.states[i].omega.real(), tr.states[i].omega.imag(), tr.states[i].theta.real(),
                          tr.states[i].theta.imag(), tr.energy[i]});
    return t;
}

inline Table ledger_series(const std::vector<LedgerSnapshot>& s) {
    Table t;
    for (auto n : LedgerSnapshot::names) t.columns.emplace_back(n);
    for (const auto& sn : s) {
        std::vector<Cell> row;
        for (double v : sn.values()) row.emplace_back(v);
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Gaussian data on 1 <= |k| <= k_max, |ξ| <= xi_max, Hermitian by construction.
inline void random_fields(SpectralField& w, SpectralField& th, std::uint64_t seed, int k_max, double xi_max) {
    const auto& g = w.grid();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    for (int k = 1; k <= std::min(k_max, g.K); ++k)
        for (int j = -g.J; j <= g.J; ++j) {
            if (std::abs(g.xi(j)) > xi_max) continue;
            const cplx a(nd(rng), nd(rng)), b(nd(rng), nd(rng));
            w.set_real_mode(k, j, a);
            th.set_real_mode(k, j, b);
        }
}

inline SweepResult run_eigen(const ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    const auto al = config_list<double>(p, "alpha", {-1.0, 0.0, 1.0});
    const auto ks = config_list<int>(p, "k", {1});
    const auto xs = config_list<double>(p, "xi", {0.0});
    const auto nus = config_list<double>(p, "nu", {0.0});
    const auto mus = config_list<double>(p, "mu", {0.0});
    const std::vector<std::size_t> dims{al.size(), ks.size(), xs.size(), nus.size(), mus.size()};
    SweepResult r;
    run_points(r, {"alpha", "k", "xi", "nu", "mu", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2", "class"},
               product_size(al, ks, xs, nus, mus), cfg.jobs, [&](std::size_t i) {
                   const auto x = unravel(i, dims);
                   NoShearSystem sys{{ks[x[1]], xs[x[2]]}, al[x[0]], {0.0, nus[x[3]], 0.0, mus[x[4]]}};
                   const auto e = no_shear_eigenvalues(sys);
                   const auto c = classify_no_shear(sys);
                   return PointOutput{{sys.alpha, double(sys.mode.k), sys.mode.xi, nus[x[3]], mus[x[4]], e.lambda1.real(),
                                       e.lambda1.imag(), e.lambda2.real(), e.lambda2.imag(), std::string(to_string(c))}};
               });
    return r;
}

inline SweepResult run_exponents(const ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    const auto al = config_list<double>(p, "alpha", {-6.0, -2.0, -0.5, 0.2});
    const double t_end = config_get(p, "t_end", 1e4);
    const double rtol = config_get(p, "rtol", 1e-11);
    const double w_lo = config_get(p, "window.lo", t_end / 100.0);
    const double w_hi = config_get(p, "window.hi", t_end);
    const cplx u0(config_get(p, "u0", 0.0), 0.0), up0(config_get(p, "up0", 1.0), 0.0);
    SweepResult r;
    run_points(r, {"alpha", "re_beta1", "im_beta1", "re_beta2", "im_beta2", "c", "predicted", "fitted", "rel_error",
                   "double_root", "v2_marginal"},
               al.size(), cfg.jobs, [&](std::size_t i) {
                   const auto e = inviscid_exponents(al[i]);
                   double fitted = nan(), rel = nan();
                   if (!e.double_root) {
                       const auto tr = integrate_schrodinger(al[i], t_end, rtol, u0, up0);
                       fitted = fit_growth_exponent(tr, TimeInterval{w_lo, w_hi, false});
                       rel = std::abs(fitted - e.beta1.real()) / std::abs(e.beta1.real());
                   }
                   return PointOutput{{al[i], e.beta1.real(), e.beta1.imag(), e.beta2.real(), e.beta2.imag(), e.c,
                                       e.beta1.real(), fitted, rel, flag(e.double_root), flag(e.v2_marginal)}};
               });
    return r;
}

inline SweepResult run_mode(const ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    const auto al = config_list<double>(p, "alpha", {0.0});
    const auto nus = config_list<double>(p, "nu", {1e-2});
    const bool panel = config_get(p, "panel", !config_find(p, "k"));
    const auto ks = config_list<int>(p, "k", {1});
    const auto xs = config_list<double>(p, "xi", {0.0});
    const std::size_t nmodes = panel ? default_panel().size() : ks.size() * xs.size();
    const std::vector<std::size_t> dims{al.size(), nus.size(), nmodes};
    const std::size_t n = product_size(al, nus) * nmodes;
    const bool series = config_get(p, "trajectories", n <= 16);
    const double rtol = config_get(p, "rtol", 1e-9);
    const std::optional<double> t_fixed =
        config_find(p, "t_end") ? std::optional<double>(config_require<double>(p, "t_end")) : std::nullopt;
    SweepResult r;
    run_points(r, {"alpha", "nu", "k", "xi", "t_end", "ratio", "gain", "envelope_proof", "envelope_display", "pass",
                   "pass_display"},
               n, cfg.jobs, [&](std::size_t i) {
                   const auto x = unravel(i, dims);
                   const double alpha = al[x[0]], nu = nus[x[1]];
                   require(nu > 0.0, ErrorKind::Config, "mode: nu must be positive");
                   FrequencyMode m;
                   if (panel) {
                       m = panel_modes(default_panel(), nu)[x[2]];
                   } else {
                       m = {ks[x[2] / xs.size()], xs[x[2] % xs.size()]};
                   }
                   const double T = t_fixed.value_or(4.0 * std::cbrt(1.0 / nu) + 20.0);
                   ModeRunOptions o;
                   o.rtol = rtol;
                   o.record_steps = series;
                   const auto tr = integrate_affine_mode(m, alpha, nu, T, {1.0, 0.0, 0.0}, o);
                   const auto cut = CutoffConfig::for_nu(nu);
                   const auto b = verify_mode_bound(tr, alpha, nu, cut);
                   const double gain = affine_propagator_gain(m, alpha, DissipationConfig::vorticity_only(nu), T, rtol);
                   const auto g = verify_ratio(gain, alpha, nu, cut);
                   PointOutput out{{alpha, nu, double(m.k), m.xi, T, b.ratio, gain, g.envelopes.proof, g.envelopes.display,
                                    flag(b.pass && g.pass), flag(b.pass_display && g.pass_display)}};
                   if (series) out.extra.emplace_back("mode_" + std::to_string(i) + ".csv", mode_series(tr));
                   return out;
               });
    return r;
}

/// Explicit "seeds" list, else "count" seeds derived from the base seed (the base seed itself when count = 1).
inline std::vector<std::uint64_t> seed_list(const ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    std::vector<std::uint64_t> seeds = config_list<std::uint64_t>(p, "seeds", {});
    if (!config_find(p, "seeds")) {
        const int count = config_get(p, "count", 1);
        require(count >= 0, ErrorKind::Config, "count must be nonnegative");
        for (int i = 0; i < count; ++i) seeds.push_back(count == 1 ? cfg.seed : derive_seed(cfg.seed, i));
    }
    for (auto s : seeds) require(s <= max_exact_seed, ErrorKind::Config, "seeds must not exceed 2^53 - 1");
    return seeds;
}

inline SweepResult run_coupled(const ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    const double nu = config_get(p, "nu", 1e-2);
    require(nu > 0.0, ErrorKind::Config, "coupled: nu must be positive");
    const int N = config_get(p, "N", 2);
    const TemperatureProfile prof = config_find(p, "profile") ? profile_from_json(*config_find(p, "profile"), cfg.config_dir)
                                                              : TemperatureProfile::zero();
    const SpectralGrid grid = grid_from_json(p, {2, 64, 16.0 * std::numbers::pi});
    const double t_end = config_get(p, "t_end", 3.0 * std::cbrt(1.0 / nu));
    const double tol = config_get(p, "tolerance", 1e-3);
    const auto seeds = seed_list(cfg);
    const auto spec = profile_spectrum(prof);
    CoupledOptions opt;
    opt.N = N;
    opt.rtol = config_get(p, "rtol", opt.rtol);
    opt.n_samples = config_get(p, "samples", opt.n_samples);
    SweepResult r;
    run_points(r, {"seed", "nu", "N", "t_end", "ghost_initial", "ghost_final", "max_relative_increase", "non_increasing",
                   "plain_initial", "plain_final", "steps"},
               seeds.size(), cfg.jobs, [&](std::size_t i) {
                   SpectralField w(grid), th(grid);
                   random_fields(w, th, seeds[i], grid.K, config_get(p, "xi_max", 2.0));
                   const auto tr = integrate_coupled_linear(spec, grid, nu, t_end, w, th, opt);
                   Table s;
                   s.columns = {"t", "ghost_energy", "plain_energy"};
                   for (std::size_t q = 0; q < tr.times.size(); ++q)
                       s.rows.push_back({tr.times[q], tr.ghost_energy[q], tr.plain_energy[q]});
                   PointOutput out{{double(seeds[i]), nu, double(N), t_end, tr.ghost_energy.front(), tr.ghost_energy.back(),
                                    tr.max_relative_increase, flag(tr.max_relative_increase <= tol),
                                    tr.plain_energy.front(), tr.plain_energy.back(), double(tr.stats.accepted)}};
                   out.extra.emplace_back("coupled_" + std::to_string(seeds[i]) + ".csv", std::move(s));
                   return out;
               });
    return r;
}

inline SweepResult run_admit(const ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    std::vector<TemperatureProfile> profs;
    if (const json* ps = config_find(p, "profiles"); ps && ps->is_array())
        for (const auto& e : *ps) profs.push_back(profile_from_json(e, cfg.config_dir));
    else if (const json* pr = config_find(p, "profile"))
        profs.push_back(profile_from_json(*pr, cfg.config_dir));
    else
        fail(ErrorKind::Config, "admit: need 'profile' or 'profiles'");
    const auto Ns = config_list<int>(p, "N", {2});
    const auto nus = config_list<double>(p, "nu", {1e-2});
    const std::vector<std::size_t> dims{profs.size(), Ns.size(), nus.size()};
    SweepResult r;
    run_points(r, {"profile", "N", "nu", "main_value", "main_threshold", "main_pass", "main_argmax_xi", "main_grid_delta",
                   "sobolev_value", "sobolev_threshold", "sobolev_pass", "alpha_surrogate", "atoms", "pass"},
               product_size(profs, Ns, nus), cfg.jobs, [&](std::size_t i) {
                   const auto x = unravel(i, dims);
                   const auto a = admit(profs[x[0]], Ns[x[1]], nus[x[2]]);
                   return PointOutput{{profile_to_json(profs[x[0]]).dump(), double(a.N), a.nu, a.main.value,
                                       a.main.threshold, flag(a.main.pass), a.main.argmax_xi, a.main.grid_delta,
                                       a.sobolev.value, a.sobolev.threshold, flag(a.sobolev.pass), a.alpha_surrogate,
                                       double(a.atoms), flag(a.pass())}};
               });
    return r;
}

inline SweepResult run_simulate(const ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    SimConfig base = sim_config_from_json(p, cfg.config_dir);
    const auto seeds = seed_list(cfg);
    const bool snapshot = config_get(p, "snapshot", false);
    SweepResult r;
    run_points(r, {"seed", "nu", "epsilon", "t_end", "sup_energy", "bound", "scaled_ratio", "raw_ratio", "omega_ratio",
                   "dx_theta_ratio", "verdict_pass", "ledger_pass", "w_neq", "th_neq", "w_eq", "th_eq", "instability",
                   "outside_hypotheses", "regime_ok", "horizon_exceeded", "steps"},
               seeds.size(), cfg.jobs, [&](std::size_t i) {
                   SimConfig c = base;
                   c.seed = seeds[i];
                   Simulator sim(c);
                   const auto res = sim.simulate();
                   const auto& v = res.verdict;
                   PointOutput out{{double(c.seed), c.nu, c.epsilon, c.t_end, v.sup_energy, v.bound, v.scaled_ratio,
                                    v.raw_ratio, v.omega_ratio, v.dx_theta_ratio, flag(v.pass), flag(v.ledger_pass),
                                    v.totals.w_neq, v.totals.th_neq, v.totals.w_eq, v.totals.th_eq,
                                    flag(res.instability_observed), flag(res.outside_hypotheses), flag(res.regime_ok),
                                    flag(res.horizon_exceeded), double(res.steps)}};
                   out.instability = res.instability_observed;
                   out.extra.emplace_back("simulate_" + std::to_string(c.seed) + ".csv", ledger_series(res.series));
                   if (snapshot && !cfg.out_dir.empty())
                       write_snapshot((cfg.out_dir / ("snapshot_" + std::to_string(c.seed) + ".bin")).string(),
                                      res.final_state);
                   return out;
               });
    return r;
}

inline StabilityOptions stability_options(const json& p) {
    StabilityOptions o;
    o.safety = config_get(p, "safety", o.safety);
    o.rtol = config_get(p, "rtol", o.rtol);
    o.use_display_envelope = config_get<std::string>(p, "envelope", "proof") == "display";
    if (config_find(p, "horizon")) o.horizon = config_require<double>(p, "horizon");
    if (const json* pn = config_find(p, "panel"); pn && pn->is_array()) {
        o.panel.clear();
        for (const auto& e : *pn) o.panel.push_back({config_require<int>(e, "k"), config_require<double>(e, "xi_over_k")});
    }
    return o;
}

inline std::vector<std::vector<Cell>> threshold_rows(const std::vector<double>& nus, const StabilityOptions& o,
                                                     double tol, unsigned jobs, SweepResult& r) {
    run_points(r, {"nu", "alpha_star", "stable_end", "unstable_end", "transition", "certified", "certified_stable",
                   "contains_certified", "evaluations"},
               nus.size(), jobs, [&](std::size_t i) {
                   const double nu = nus[i];
                   const auto t = threshold_bisect(nu, o, tol);
                   const bool cert = evaluate_stability(t.certified, nu, o).stable;
                   return PointOutput{{nu, t.alpha_star, t.stable_end, t.unstable_end, flag(t.transition), t.certified,
                                       flag(cert), flag(t.contains_certified), double(t.evaluations + 1)}};
               });
    return r.table.rows;
}

inline SweepResult run_threshold(const ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    SweepResult r;
    threshold_rows(config_list<double>(p, "nu", {1e-2, 1e-3, 1e-4}), stability_options(p), config_get(p, "tol", 1e-4),
                   cfg.jobs, r);
    return r;
}

inline SweepResult run_scaling(const ExperimentConfig& cfg) {
    const auto& p = cfg.params;
    SweepResult r;
    std::vector<ScalingPair> pairs;
    if (const json* pr = config_find(p, "pairs"); pr && pr->is_array()) {
        r.table.columns = {"nu", "alpha_star", "status"};
        for (const auto& e : *pr) {
            require(e.is_array() && e.size() == 2, ErrorKind::Config, "scaling: pairs are [nu, alpha_star]");
            pairs.push_back({e[0].get<double>(), e[1].get<double>()});
            r.table.rows.push_back({pairs.back().nu, pairs.back().alpha_star, std::string("given")});
        }
    } else {
        threshold_rows(config_list<double>(p, "nu", {1e-2, 3e-3, 1e-3, 3e-4, 1e-4}), stability_options(p),
                       config_get(p, "tol", 1e-4), cfg.jobs, r);
        for (std::size_t i = 0; i < r.table.size(); ++i)
            if (r.table.text(i, "status") == "ok" && r.table.text(i, "transition") == "true")
                pairs.push_back({r.table.number(i, "nu"), r.table.number(i, "alpha_star")});
    }
    Table fit;
    fit.columns = {"n", "slope", "slope_stderr", "ci_lo", "ci_hi", "confidence", "prefactor", "r2", "status"};
    try {
        const auto f = scaling_fit(pairs, config_get(p, "confidence", 0.95));
        fit.rows.push_back({double(f.n), f.slope, f.slope_stderr, f.ci_lo, f.ci_hi, f.confidence, f.prefactor, f.r2,
                            std::string("ok")});
        r.summary["slope"] = f.slope;
        r.summary["ci"] = {f.ci_lo, f.ci_hi};
    } catch (const Error& e) {
        fit.rows.push_back({double(pairs.size()), nan(), nan(), nan(), nan(), nan(), nan(), nan(),
                            std::string(to_string(e.kind())) + ": " + e.what()});
        r.failures.push_back(std::string("fit: ") + e.what());
        r.numerical_failure = true;
    }
    r.extra.emplace_back("scaling_fit.csv", std::move(fit));
    return r;
}

} // namespace detail

inline SweepResult run_experiment(const ExperimentConfig& cfg) {
    const auto start = utc_timestamp();
    if (!cfg.out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.out_dir, ec);
        require(!ec, ErrorKind::Io, "cannot create output directory " + cfg.out_dir.string());
    }
    SweepResult r;
    switch (cfg.command) {
    case Command::eigen: r = detail::run_eigen(cfg); break;
    case Command::exponents: r = detail::run_exponents(cfg); break;
    case Command::mode: r = detail::run_mode(cfg); break;
    case Command::coupled: r = detail::run_coupled(cfg); break;
    case Command::admit: r = detail::run_admit(cfg); break;
    case Command::simulate: r = detail::run_simulate(cfg); break;
    case Command::threshold: r = detail::run_threshold(cfg); break;
    case Command::scaling: r = detail::run_scaling(cfg); break;
    }
    r.command = cfg.command;
    r.provenance = {{"command", to_string(cfg.command)},
                    {"config_hash", config_hash(cfg.params)},
                    {"code_version", BSL_VERSION},
                    {"seed", cfg.seed},
                    {"jobs", cfg.jobs},
                    {"rows", r.table.size()},
                    {"failures", r.failures},
                    {"started", start},
                    {"finished", utc_timestamp()},
                    {"summary", r.summary}};
    return r;
}

/// Main table as <command>.csv (or .json), per-point series alongside, provenance.json last.
inline void write_result(const SweepResult& r, const std::filesystem::path& dir, ExportFormat fmt = ExportFormat::csv) {
    const std::string ext = fmt == ExportFormat::csv ? ".csv" : ".json";
    export_table(r.table, dir / (to_string(r.command) + ext), fmt);
    for (const auto& [name, t] : r.extra) {
        std::filesystem::path f = dir / name;
        if (fmt == ExportFormat::json) f.replace_extension(".json");
        export_table(t, f, fmt);
    }
    write_file_atomic(dir / "provenance.json", r.provenance.dump(2) + "\n");
}

} // namespace bsl
