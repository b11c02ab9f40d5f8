#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "plap/pipeline.hpp"

using namespace plap;

namespace {

struct Criterion {
    int id;
    std::string name;
    double max_seconds;  // 0: no runtime bound
    std::function<CheckReport()> run;
};

CheckReport merge(std::string name, const std::vector<CheckReport>& parts) {
    CheckReport out{std::move(name), true, {}, {}};
    for (const auto& p : parts) {
        out.pass = out.pass && p.pass;
        for (const auto& [k, v] : p.metrics) out.metric(p.name + "." + k, v);
        if (!p.pass && out.detail.empty()) out.detail = p.name + (p.detail.empty() ? "" : ": " + p.detail);
    }
    return out;
}

const CoefficientField& field(double p, int N) {
    static std::vector<std::pair<std::pair<double, int>, std::unique_ptr<CoefficientField>>> cache;
    for (const auto& [key, f] : cache)
        if (key.first == p && key.second == N) return *f;
    cache.emplace_back(std::make_pair(p, N),
                       std::make_unique<CoefficientField>(profile_ode(make_params(p, N), p > 4.0 ? 1024 : 512, 1e-8)));
    return *cache.back().second;
}

int smallest_n_with_k2(double p) {
    int N = 1;
    while (solve_exponent(p, N) < 2.0) ++N;
    return N;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "exponent_closed_forms", 1.0, [] { return check_exponents(); }},
        {2, "profile_exactness", 10.0, [] { return check_profile_exactness(); }},
        {3, "p_harmonicity", 30.0, [] {
             return check_p_harmonicity(profile_ode(make_params(4.0, 3), 512, 1e-8), 1.9);
         }},
        {4, "symbolic_suite", 1.0, [] { return merge("symbolic_suite", {verify_det_identity(), verify_sign_chain()}); }},
        {5, "sign_lemma", 0.0, [] {
             std::vector<CheckReport> parts;
             for (double p : {4.0, 5.0, 6.0}) {
                 const int N = smallest_n_with_k2(p);
                 const auto& A = field(p, N);
                 auto r = verify_tauq_sign(A.params(), A.profile(), 1e-8);
                 r.name = "p" + std::to_string(int(p)) + "_N" + std::to_string(N);
                 parts.push_back(r);
             }
             return merge("sign_lemma", parts);
         }},
        {6, "eigenstructure", 0.0, [] {
             return merge("eigenstructure", {check_coefficients(field(4.0, 3), 1000, 20261015),
                                             check_coefficients(field(6.0, 3), 1000, 20261016)});
         }},
        {7, "energy_change_of_variables", 0.0, [] { return check_energy(field(4.0, 3), 1e-6); }},
        {8, "solver_convergence", 60.0, [] {
             const auto& A = field(4.0, 3);
             return manufactured_check(manufactured_convergence(A, {32, 64, 128, 256}, default_manufactured(3)), 1.8);
         }},
        {9, "neumann_experiment", 0.0, [] {
             const auto& A = field(4.0, 3);
             const auto run = solve_neumann(A, make_strip_grid(A.params(), 128, 256), [](double) { return 1.0; }, 1.0);
             return neumann_check(run, 0.02);
         }},
        {10, "regularity", 0.0, [] {
             const auto& A = field(4.0, 3);
             return regularity_probe(A, {make_strip_grid(A.params(), 64, 128), make_strip_grid(A.params(), 128, 256)},
                                     [](double) { return 1.0; }, 1.0, 1e-8);
         }},
        {11, "nonlinear_cross_check", 0.0, [] { return check_nonlinear(field(4.0, 2).profile(), make_disk_grid(16, 16, 8)); }},
        {12, "coercivity_fredholm", 0.0, [] { return check_fredholm(field(4.0, 3), 32, 64); }},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        CheckReport r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r = CheckReport{c.name, false, {}, e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool timely = c.max_seconds <= 0.0 || secs < c.max_seconds;
        const bool ok = r.pass && timely;
        failures += !ok;
        std::printf("%s %2d %s (%.2f s)", ok ? "PASS" : "FAIL", c.id, c.name.c_str(), secs);
        if (!timely) std::printf(" [runtime bound %.0f s exceeded]", c.max_seconds);
        if (!r.detail.empty()) std::printf(" [%s]", r.detail.c_str());
        std::printf("\n");
        for (const auto& [k, v] : r.metrics) std::printf("       %s = %.6g\n", k.c_str(), v);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
