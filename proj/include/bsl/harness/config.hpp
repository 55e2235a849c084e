#pragma once

#include <bsl/error.hpp>
#include <bsl/nonlinear.hpp>
#include <bsl/profile.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace bsl {

using json = nlohmann::json;

inline json load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    require(bool(is), ErrorKind::Config, "cannot open config " + path.string());
    try {
        return json::parse(is, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, "config " + path.string() + ": " + e.what());
    }
}

/// Looks up "a.b.c" as a flat key first, then as a nested path.
inline const json* config_find(const json& j, const std::string& key) {
    if (!j.is_object()) return nullptr;
    if (auto it = j.find(key); it != j.end()) return &*it;
    const json* cur = &j;
    std::size_t pos = 0;
    while (pos <= key.size()) {
        const std::size_t dot = key.find('.', pos);
        const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (!cur->is_object()) return nullptr;
        auto it = cur->find(part);
        if (it == cur->end()) return nullptr;
        cur = &*it;
        if (dot == std::string::npos) return cur;
        pos = dot + 1;
    }
    return nullptr;
}

template <class T>
T config_get(const json& j, const std::string& key, const T& fallback) {
    const json* v = config_find(j, key);
    if (!v || v->is_null()) return fallback;
    try {
        return v->get<T>();
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, "config key '" + key + "': " + e.what());
    }
}

template <class T>
T config_require(const json& j, const std::string& key) {
    const json* v = config_find(j, key);
    require(v && !v->is_null(), ErrorKind::Config, "missing config key '" + key + "'");
    try {
        return v->get<T>();
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, "config key '" + key + "': " + e.what());
    }
}

/// Scalar or array value, as a list.
template <class T>
std::vector<T> config_list(const json& j, const std::string& key, std::vector<T> fallback = {}) {
    const json* v = config_find(j, key);
    if (!v || v->is_null()) return fallback;
    try {
        if (v->is_array()) return v->get<std::vector<T>>();
        return {v->get<T>()};
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, "config key '" + key + "': " + e.what());
    }
}

inline std::vector<double> read_profile_samples(const std::filesystem::path& path) {
    std::ifstream is(path);
    require(bool(is), ErrorKind::Format, "cannot open profile samples " + path.string());
    std::vector<double> v;
    std::string tok;
    while (is >> tok) {
        if (tok.empty() || tok[0] == '#') {
            std::getline(is, tok);
            continue;
        }
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            require(used == tok.size(), ErrorKind::Format, "bad sample '" + tok + "'");
        } catch (const std::logic_error&) {
            fail(ErrorKind::Format, "bad sample '" + tok + "' in " + path.string());
        }
    }
    return v;
}

/// Accepts a number (affine slope) or an object with "kind": affine | cosine | trig | sampled.
inline TemperatureProfile profile_from_json(const json& p, const std::filesystem::path& base = {}) {
    if (p.is_number()) return TemperatureProfile::affine(p.get<double>());
    require(p.is_object(), ErrorKind::Config, "profile must be a number or an object");
    const std::string kind = config_get<std::string>(p, "kind", "affine");
    if (kind == "affine") return TemperatureProfile::affine(config_require<double>(p, "slope"));
    if (kind == "cosine")
        return TemperatureProfile::cosine(config_require<double>(p, "amplitude"), config_get(p, "frequency", 1.0),
                                          config_get(p, "phase", 0.0));
    if (kind == "trig" || kind == "trigonometric") {
        TrigonometricProfile t;
        const json* terms = config_find(p, "terms");
        require(terms && terms->is_array(), ErrorKind::Config, "trig profile needs a 'terms' array");
        for (const auto& e : *terms)
            t.terms.push_back({config_require<double>(e, "amplitude"), config_get(e, "frequency", 1.0),
                               config_get(e, "phase", 0.0)});
        return {t, "trigonometric"};
    }
    if (kind == "sampled") {
        SampledProfile s;
        s.period = config_get(p, "period", s.period);
        s.prune_relative = config_get(p, "prune_relative", s.prune_relative);
        if (const json* f = config_find(p, "file")) {
            std::filesystem::path fp = f->get<std::string>();
            if (fp.is_relative() && !base.empty()) fp = base / fp;
            s.values = read_profile_samples(fp);
        } else {
            s.values = config_require<std::vector<double>>(p, "values");
        }
        s.positions = config_get(p, "positions", std::vector<double>{});
        detail::validate_sampled(s);
        return {s, "sampled"};
    }
    fail(ErrorKind::Config, "unknown profile kind '" + kind + "'");
}

inline json profile_to_json(const TemperatureProfile& p) {
    if (auto* a = std::get_if<AffineProfile>(&p.kind)) return {{"kind", "affine"}, {"slope", a->slope}};
    if (auto* t = std::get_if<TrigonometricProfile>(&p.kind)) {
        json terms = json::array();
        for (const auto& e : t->terms)
            terms.push_back({{"amplitude", e.amplitude}, {"frequency", e.frequency}, {"phase", e.phase}});
        return {{"kind", "trig"}, {"terms", terms}};
    }
    const auto& s = std::get<SampledProfile>(p.kind);
    return {{"kind", "sampled"}, {"period", s.period}, {"values", s.values}};
}

inline SpectralGrid grid_from_json(const json& j, SpectralGrid fallback) {
    SpectralGrid g{config_get(j, "grid.K", fallback.K), config_get(j, "grid.J", fallback.J),
                   config_get(j, "grid.Ly", fallback.Ly)};
    g.validate();
    return g;
}

/// Keys: nu, epsilon, profile, grid.K, grid.J, grid.Ly, t_end, N, dt.cfl, dt.max, seed, plus optional extras.
inline SimConfig sim_config_from_json(const json& j, const std::filesystem::path& base = {}) {
    SimConfig c;
    c.nu = config_get(j, "nu", c.nu);
    c.epsilon = config_get(j, "epsilon", c.epsilon);
    if (const json* p = config_find(j, "profile")) c.profile = profile_from_json(*p, base);
    c.grid = grid_from_json(j, c.grid);
    c.t_end = config_get(j, "t_end", c.t_end);
    c.N = config_get(j, "N", c.N);
    c.cfl = config_get(j, "dt.cfl", c.cfl);
    c.dt_max = config_get(j, "dt.max", c.dt_max);
    c.seed = config_get<std::uint64_t>(j, "seed", c.seed);
    c.shear = config_get(j, "shear", c.shear);
    c.thermal_diffusion = config_get(j, "thermal_diffusion", c.thermal_diffusion);
    c.nonlinear = config_get(j, "nonlinear", c.nonlinear);
    c.blowup_factor = config_get(j, "blowup_factor", c.blowup_factor);
    c.diag_every = config_get(j, "diag_every", c.diag_every);
    if (const json* d = config_find(j, "dissipation"))
        c.diss = DissipationConfig{config_get(*d, "nu_x", 0.0), config_get(*d, "nu_y", 0.0),
                                   config_get(*d, "mu_x", 0.0), config_get(*d, "mu_y", 0.0)};
    if (const json* in = config_find(j, "init"); in && in->is_object()) {
        if (config_get<std::string>(*in, "kind", "random") == "single_mode") {
            c.init = InitKind::single_mode;
            c.mode_k = config_get(*in, "k", c.mode_k);
            c.mode_j = config_get(*in, "j", c.mode_j);
            c.mode_omega = {config_get(*in, "omega_re", 1.0), config_get(*in, "omega_im", 0.0)};
            c.mode_theta = {config_get(*in, "theta_re", 0.0), config_get(*in, "theta_im", 0.0)};
        }
    }
    c.validate();
    return c;
}

} // namespace bsl
