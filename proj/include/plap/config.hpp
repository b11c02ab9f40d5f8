#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "plap/params.hpp"
#include "plap/report.hpp"

namespace plap {

/// Bad configuration or command line; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PsiKind { constant, cosine, custom_samples };

struct PsiSpec {
    PsiKind kind = PsiKind::constant;
    double amplitude = 0.5;        // cosine: 1 + amplitude cos(mode N θ)
    int mode = 1;
    std::vector<double> samples;   // custom-samples: equispaced over one period
};

struct GridSpec {
    int n_theta = 128;
    int n_y = 256;
    std::optional<double> y_max;
};

struct DiskSpec {
    int n_r = 16;
    int n_t = 16;
    int degree = 8;
};

struct Tolerances {
    double profile_ode = 1e-8;
    double harmonicity_order = 1.9;
    double energy = 1e-6;
    double manufactured_order = 1.8;
    double neumann = 0.02;
    double regularity_max_principle = 1e-8;
    double tauq_margin = 1e-8;
};

struct RunConfig {
    double p = 4.0;
    int N = 3;
    RootBranch branch = RootBranch::larger;
    GridSpec grid;
    std::optional<double> beta;
    double M = 1.0;
    PsiSpec psi;
    Tolerances tolerances;
    std::optional<int> profile_nodes;
    std::vector<int> manufactured_sizes = {32, 64, 128, 256};
    DiskSpec disk;
    int random_points = 1000;
    std::string output_dir = "out";

    ProblemParams params() const { return make_params(p, N, branch, beta); }
    std::size_t nodes() const { return profile_nodes ? std::size_t(*profile_nodes) : (p > 4.0 ? 1024 : 512); }
};

namespace detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw UsageError((where.empty() ? std::string("config") : where) + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw UsageError("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
}

template <class T>
T get_field(const json& j, const char* key, const std::string& path, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError("field '" + path + "' has the wrong type");
    }
}

inline void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw UsageError("field '" + field + "' " + what);
}

inline const char* psi_name(PsiKind k) {
    switch (k) {
        case PsiKind::constant: return "constant";
        case PsiKind::cosine: return "cosine";
        default: return "custom-samples";
    }
}

}  // namespace detail

inline json to_json(const RunConfig& c) {
    json j;
    j["p"] = c.p;
    j["N"] = c.N;
    j["branch"] = to_string(c.branch);
    j["grid"] = {{"n_theta", c.grid.n_theta}, {"n_y", c.grid.n_y}};
    j["grid"]["y_max"] = c.grid.y_max ? json(*c.grid.y_max) : json(nullptr);
    j["beta"] = c.beta ? json(*c.beta) : json(nullptr);
    j["M"] = c.M;
    json ps;
    ps["kind"] = detail::psi_name(c.psi.kind);
    json params = json::object();
    if (c.psi.kind == PsiKind::cosine) params = {{"amplitude", c.psi.amplitude}, {"mode", c.psi.mode}};
    if (c.psi.kind == PsiKind::custom_samples) params["samples"] = c.psi.samples;
    ps["params"] = params;
    j["psi"] = ps;
    const auto& t = c.tolerances;
    j["tolerances"] = {{"profile_ode", t.profile_ode},
                       {"harmonicity_order", t.harmonicity_order},
                       {"energy", t.energy},
                       {"manufactured_order", t.manufactured_order},
                       {"neumann", t.neumann},
                       {"regularity_max_principle", t.regularity_max_principle},
                       {"tauq_margin", t.tauq_margin}};
    j["profile_nodes"] = c.profile_nodes ? json(*c.profile_nodes) : json(nullptr);
    j["manufactured_sizes"] = c.manufactured_sizes;
    j["disk"] = {{"n_r", c.disk.n_r}, {"n_t", c.disk.n_t}, {"degree", c.disk.degree}};
    j["random_points"] = c.random_points;
    j["output_dir"] = c.output_dir;
    return j;
}

inline RunConfig config_from_json(const json& j) {
    using detail::get_field;
    using detail::require;
    detail::check_keys(j, "", {"p", "N", "branch", "grid", "beta", "M", "psi", "tolerances", "profile_nodes",
                               "manufactured_sizes", "disk", "random_points", "output_dir"});
    RunConfig c;
    require(j.contains("p"), "p", "is required");
    require(j.contains("N"), "N", "is required");
    c.p = get_field<double>(j, "p", "p", c.p);
    require(c.p > 2.0 && std::isfinite(c.p), "p", "must be a finite number > 2");
    require(j["N"].is_number_integer(), "N", "must be an integer");
    c.N = get_field<int>(j, "N", "N", c.N);
    require(c.N >= 1, "N", "must be >= 1");

    const auto br = get_field<std::string>(j, "branch", "branch", "larger");
    require(br == "larger" || br == "smaller", "branch", "must be 'larger' or 'smaller'");
    c.branch = br == "larger" ? RootBranch::larger : RootBranch::smaller;

    if (j.contains("grid")) {
        const auto& g = j["grid"];
        detail::check_keys(g, "grid", {"n_theta", "n_y", "y_max"});
        c.grid.n_theta = get_field<int>(g, "n_theta", "grid.n_theta", c.grid.n_theta);
        c.grid.n_y = get_field<int>(g, "n_y", "grid.n_y", c.grid.n_y);
        if (g.contains("y_max") && !g["y_max"].is_null()) c.grid.y_max = get_field<double>(g, "y_max", "grid.y_max", 0.0);
    }
    require(c.grid.n_theta >= 64, "grid.n_theta", "must be >= 64");
    require(c.grid.n_y >= 64, "grid.n_y", "must be >= 64");
    require(!c.grid.y_max || *c.grid.y_max > 0.0, "grid.y_max", "must be > 0");

    if (j.contains("beta") && !j["beta"].is_null()) c.beta = get_field<double>(j, "beta", "beta", 0.0);
    c.M = get_field<double>(j, "M", "M", c.M);
    require(c.M != 0.0 && std::isfinite(c.M), "M", "must be finite and nonzero");

    if (j.contains("psi")) {
        const auto& ps = j["psi"];
        detail::check_keys(ps, "psi", {"kind", "params"});
        const auto kind = get_field<std::string>(ps, "kind", "psi.kind", "constant");
        const json params = ps.contains("params") ? ps["params"] : json::object();
        if (kind == "constant") {
            c.psi.kind = PsiKind::constant;
            detail::check_keys(params, "psi.params", {});
        } else if (kind == "cosine") {
            c.psi.kind = PsiKind::cosine;
            detail::check_keys(params, "psi.params", {"amplitude", "mode"});
            c.psi.amplitude = get_field<double>(params, "amplitude", "psi.params.amplitude", c.psi.amplitude);
            c.psi.mode = get_field<int>(params, "mode", "psi.params.mode", c.psi.mode);
            require(c.psi.mode >= 1, "psi.params.mode", "must be >= 1");
        } else if (kind == "custom-samples") {
            c.psi.kind = PsiKind::custom_samples;
            detail::check_keys(params, "psi.params", {"samples"});
            c.psi.samples = get_field<std::vector<double>>(params, "samples", "psi.params.samples", {});
            require(c.psi.samples.size() >= 4 && c.psi.samples.size() % 2 == 0, "psi.params.samples",
                    "needs an even number (>= 4) of samples");
        } else {
            throw UsageError("field 'psi.kind' must be constant, cosine or custom-samples");
        }
    }

    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        detail::check_keys(t, "tolerances", {"profile_ode", "harmonicity_order", "energy", "manufactured_order",
                                             "neumann", "regularity_max_principle", "tauq_margin"});
        auto& T = c.tolerances;
        T.profile_ode = get_field<double>(t, "profile_ode", "tolerances.profile_ode", T.profile_ode);
        T.harmonicity_order = get_field<double>(t, "harmonicity_order", "tolerances.harmonicity_order", T.harmonicity_order);
        T.energy = get_field<double>(t, "energy", "tolerances.energy", T.energy);
        T.manufactured_order =
            get_field<double>(t, "manufactured_order", "tolerances.manufactured_order", T.manufactured_order);
        T.neumann = get_field<double>(t, "neumann", "tolerances.neumann", T.neumann);
        T.regularity_max_principle = get_field<double>(t, "regularity_max_principle",
                                                       "tolerances.regularity_max_principle", T.regularity_max_principle);
        T.tauq_margin = get_field<double>(t, "tauq_margin", "tolerances.tauq_margin", T.tauq_margin);
        for (const auto& [k, v] : t.items()) require(v.get<double>() > 0.0, "tolerances." + k, "must be > 0");
    }

    if (j.contains("profile_nodes") && !j["profile_nodes"].is_null()) {
        c.profile_nodes = get_field<int>(j, "profile_nodes", "profile_nodes", 0);
        require(*c.profile_nodes >= 64 && *c.profile_nodes % 2 == 0, "profile_nodes", "must be even and >= 64");
    }
    c.manufactured_sizes = get_field<std::vector<int>>(j, "manufactured_sizes", "manufactured_sizes", c.manufactured_sizes);
    require(c.manufactured_sizes.size() >= 2, "manufactured_sizes", "needs at least two grids");
    for (int n : c.manufactured_sizes) require(n >= 32, "manufactured_sizes", "entries must be >= 32");

    if (j.contains("disk")) {
        const auto& d = j["disk"];
        detail::check_keys(d, "disk", {"n_r", "n_t", "degree"});
        c.disk.n_r = get_field<int>(d, "n_r", "disk.n_r", c.disk.n_r);
        c.disk.n_t = get_field<int>(d, "n_t", "disk.n_t", c.disk.n_t);
        c.disk.degree = get_field<int>(d, "degree", "disk.degree", c.disk.degree);
    }
    require(c.disk.n_r >= 1, "disk.n_r", "must be >= 1");
    require(c.disk.n_t >= 2, "disk.n_t", "must be >= 2");
    require(c.disk.degree >= 2, "disk.degree", "must be >= 2");

    c.random_points = get_field<int>(j, "random_points", "random_points", c.random_points);
    require(c.random_points >= 1, "random_points", "must be >= 1");
    c.output_dir = get_field<std::string>(j, "output_dir", "output_dir", c.output_dir);
    require(!c.output_dir.empty(), "output_dir", "must not be empty");

    try {
        (void)c.params();
    } catch (const DomainError& e) {
        throw UsageError(std::string("field 'beta': ") + e.what());
    } catch (const ConstructionError& e) {
        throw UsageError(std::string("field 'p': ") + e.what());
    }
    return c;
}

inline RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("malformed JSON: ") + e.what());
    }
    return config_from_json(j);
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace plap
