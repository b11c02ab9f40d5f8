#pragma once

#include <cmath>
#include <vector>

#include "plap/disk.hpp"
#include "plap/solver.hpp"
#include "plap/trig_interp.hpp"

namespace plap {

/// p-harmonic extensions of f + εv(1,·) against the strip solution v: the difference quotient
/// (û_ε - û_0)/ε should reproduce v, and its boundary-mean-minus-centre gap should match v's.
inline CheckReport perturbation_experiment(const CoefficientField& A, const SolutionField& v, const DiskGrid& g,
                                           const std::vector<double>& eps, double r_min = 0.25, double tol = 0.05) {
    const auto& sg = v.grid;
    std::vector<double> trace(sg.n_theta);
    for (int i = 0; i < sg.n_theta; ++i) trace[i] = v.at(i, 0);
    const TrigInterpolant vb(trace, sg.period);
    const auto& prof = A.profile();
    const double p = A.params().p;
    const auto base = solve_p_laplace_dirichlet([&](double t) { return prof.value(t); }, p, g);
    const double base_gap = boundary_mean_minus_center(base);

    double vmax = 0.0;
    for (int idx = 0; idx < sg.size(); ++idx) vmax = std::max(vmax, std::abs(v.values[idx]));
    double v_gap = 0.0;
    for (int i = 0; i < sg.n_theta; ++i) v_gap += v.at(i, 0);
    v_gap = v_gap / sg.n_theta - v.circle_average(sg.n_y - 1);

    CheckReport rep{"perturbation", true, {}, {}};
    rep.metric("v_boundary_mean_minus_center", v_gap);
    std::vector<double> diffs;
    for (std::size_t s = 0; s < eps.size(); ++s) {
        const double e = eps[s];
        const auto pert = solve_p_laplace_dirichlet([&](double t) { return prof.value(t) + e * vb(t); }, p, g);
        double d = 0.0;
        for (int j = 0; j < sg.n_y && sg.r(j) >= r_min; ++j)
            for (int i = 0; i < sg.n_theta; ++i) {
                const double w = (pert.value(sg.r(j), sg.theta(i)) - base.value(sg.r(j), sg.theta(i))) / e;
                d = std::max(d, std::abs(w - v.at(i, j)));
            }
        diffs.push_back(d / vmax);
        const std::string tag = "_" + std::to_string(s);
        rep.metric("epsilon" + tag, e)
            .metric("quotient_vs_v" + tag, d / vmax)
            .metric("quotient_gap" + tag, (boundary_mean_minus_center(pert) - base_gap) / e);
    }
    rep.pass = !diffs.empty() && diffs.back() < tol;
    if (!rep.pass) rep.detail = "difference quotient does not reproduce the linearized solution";
    return rep;
}

}  // namespace plap
