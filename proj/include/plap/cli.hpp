#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "plap/amv.hpp"
#include "plap/config.hpp"
#include "plap/perturbation.hpp"
#include "plap/pipeline.hpp"

namespace plap {

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c = {"profile", "coeffs", "verify", "solve", "report-all"};
    return c;
}

/// 17 significant digits, round-trips exactly.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
        out << '\n';
    }
}

inline AngularData psi_function(const PsiSpec& ps, const ProblemParams& pp) {
    switch (ps.kind) {
        case PsiKind::cosine: {
            const double a = ps.amplitude, m = ps.mode * pp.N;
            return [a, m](double t) { return 1.0 + a * std::cos(m * t); };
        }
        case PsiKind::custom_samples: {
            const auto f = std::make_shared<TrigInterpolant>(ps.samples, pp.period());
            return [f](double t) { return (*f)(t); };
        }
        default:
            return [](double) { return 1.0; };
    }
}

class Pipeline {
public:
    Pipeline(RunConfig cfg, std::uint64_t seed, std::ostream& log)
        : cfg_(std::move(cfg)), seed_(seed), log_(log), pp_(cfg_.params()) {
        try {
            (void)make_strip_grid(pp_, cfg_.grid.n_theta, cfg_.grid.n_y, cfg_.grid.y_max);
        } catch (const std::exception& e) {
            throw UsageError(std::string("field 'grid.y_max': ") + e.what());
        }
    }

    /// 0 when every check passes, 1 otherwise. Throws UsageError for an unknown command.
    int run(const std::string& command) {
        const std::filesystem::path dir = cfg_.output_dir;
        std::filesystem::create_directories(dir);
        if (command == "profile") profile(dir);
        else if (command == "coeffs") coeffs(dir);
        else if (command == "verify") verify();
        else if (command == "solve") solve(dir, false);
        else if (command == "report-all") {
            profile(dir);
            coeffs(dir);
            verify();
            solve(dir, true);
        } else
            throw UsageError("unknown command '" + command + "'");

        json rep;
        rep["command"] = command;
        rep["seed"] = seed_;
        rep["config"] = to_json(cfg_);
        rep["parameters"] = {{"k", pp_.k},         {"lambda", pp_.lambda},          {"alpha_space", pp_.alpha_space},
                             {"alpha_strip", pp_.alpha_strip}, {"beta", pp_.beta}, {"period", pp_.period()}};
        rep["pass"] = all_pass(reports_);
        rep["checks"] = to_json(reports_);
        std::ofstream out(dir / "report.json", std::ios::binary);
        out << rep.dump(2) << '\n';
        return all_pass(reports_) ? 0 : 1;
    }

    const std::vector<CheckReport>& reports() const { return reports_; }

private:
    void add(CheckReport r) {
        log_ << (r.pass ? "PASS " : "FAIL ") << r.name;
        if (!r.detail.empty()) log_ << ": " << r.detail;
        log_ << '\n';
        reports_.push_back(std::move(r));
    }

    /// An exception thrown by f becomes a failed report.
    template <class F>
    void guarded(const std::string& name, F&& f) {
        try {
            add(f());
        } catch (const std::exception& e) {
            CheckReport r{name, false, {}, e.what()};
            r.metric("error", 1.0);
            add(std::move(r));
        }
    }

    const CoefficientField& field() {
        if (!field_) field_ = std::make_unique<CoefficientField>(profile_ode(pp_, cfg_.nodes(), cfg_.tolerances.profile_ode));
        return *field_;
    }

    void profile(const std::filesystem::path& dir) {
        guarded("profile", [&] {
            const auto& prof = field().profile();
            std::vector<std::vector<double>> rows;
            for (std::size_t j = 0; j < prof.size(); ++j) rows.push_back({prof.theta_grid()[j], prof.a()[j], prof.a_theta()[j]});
            write_csv(dir / "profile.csv", {"theta", "a", "a_theta"}, rows);
            auto r = check_profile(prof, cfg_.tolerances.profile_ode);
            r.metric("k", pp_.k).metric("exponent_residual", exponent_residual(pp_.p, pp_.N, pp_.k));
            return r;
        });
        guarded("p_harmonicity", [&] { return check_p_harmonicity(field().profile(), cfg_.tolerances.harmonicity_order); });
    }

    void coeffs(const std::filesystem::path& dir) {
        guarded("coefficients", [&] {
            const auto& A = field();
            const auto bd = boundary_q_tau(pp_, A.profile());
            std::vector<std::vector<double>> rows;
            for (std::size_t j = 0; j < bd.theta_grid.size(); ++j) {
                const double t = bd.theta_grid[j];
                const auto M = A(1.0, t);
                const auto e = eigen_pair(A, 1.0, t);
                rows.push_back({t, bd.q[j], bd.tau[j], M(0, 0), M(0, 1), M(1, 1), e.mu_minus, e.mu_plus});
            }
            write_csv(dir / "coeffs.csv", {"theta", "q", "tau", "A_rr", "A_rtheta", "A_thetatheta", "mu_minus", "mu_plus"},
                      rows);
            return check_coefficients(A, cfg_.random_points, seed_);
        });
        if (pp_.k >= 2.0)
            guarded("tauq_sign", [&] { return verify_tauq_sign(pp_, field().profile(), cfg_.tolerances.tauq_margin); });
    }

    void verify() {
        guarded("exponent_closed_forms", [] { return check_exponents(); });
        guarded("profile_exactness", [] { return check_profile_exactness(); });
        guarded("det_identity", [] { return verify_det_identity(); });
        guarded("sign_chain", [] { return verify_sign_chain(); });
        guarded("energy_change_of_variables", [&] { return check_energy(field(), cfg_.tolerances.energy); });
        guarded("coercivity_fredholm", [&] {
            return check_fredholm(field(), std::max(32, cfg_.grid.n_theta / 4), std::max(32, cfg_.grid.n_y / 4));
        });
    }

    void solve(const std::filesystem::path& dir, bool full) {
        const auto& A = field();
        const auto psi0 = psi_function(cfg_.psi, pp_);
        const auto grid = make_strip_grid(pp_, cfg_.grid.n_theta, cfg_.grid.n_y, cfg_.grid.y_max);
        std::optional<NeumannRun> run;
        guarded("neumann_experiment", [&] {
            run = solve_neumann(A, grid, psi0, cfg_.M);
            const auto& v = run->solution.field;
            std::vector<std::vector<double>> rows, avg;
            for (int j = 0; j < grid.n_y; ++j) {
                for (int i = 0; i < grid.n_theta; ++i) rows.push_back({grid.theta(i), grid.y(j), v.at(i, j)});
                avg.push_back({grid.r(j), v.circle_average(j)});
            }
            write_csv(dir / "solution.csv", {"theta", "y", "v"}, rows);
            write_csv(dir / "circle_averages.csv", {"r", "gbar"}, avg);
            auto r = neumann_check(*run, cfg_.tolerances.neumann);
            const auto [gamma, mu] = fit_decay(v, 0.5, 0.5 * grid.y_max);
            r.metric("decay_rate", gamma).metric("far_field_mean", mu);
            return r;
        });
        if (!full) return;
        guarded("manufactured_convergence", [&] {
            return manufactured_check(manufactured_convergence(A, cfg_.manufactured_sizes, default_manufactured(pp_.N)),
                                      cfg_.tolerances.manufactured_order);
        });
        guarded("regularity", [&] {
            const std::vector<StripGrid> grids = {
                make_strip_grid(pp_, cfg_.grid.n_theta / 2, cfg_.grid.n_y / 2, cfg_.grid.y_max), grid};
            return regularity_probe(A, grids, psi0, cfg_.M, cfg_.tolerances.regularity_max_principle);
        });
        guarded("nonlinear_cross_check", [&] {
            return check_nonlinear(A.profile(), make_disk_grid(cfg_.disk.n_r, cfg_.disk.n_t, cfg_.disk.degree));
        });
        guarded("amv_probe", [&] {
            auto r = amv_probe(quasiradial_field(A.profile()), pp_.p, {0.5, 0.3}, {0.16, 0.08, 0.04, 0.02, 0.01});
            r.name = "amv_probe";
            return r;
        });
        if (run)
            guarded("perturbation", [&] {
                return perturbation_experiment(A, run->solution.field, make_disk_grid(8, 24, 6), {1e-2, 1e-3});
            });
    }

    RunConfig cfg_;
    std::uint64_t seed_;
    std::ostream& log_;
    ProblemParams pp_;
    std::unique_ptr<CoefficientField> field_;
    std::vector<CheckReport> reports_;
};

}  // namespace plap
