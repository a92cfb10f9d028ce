#pragma once

#include <cstddef>
#include <vector>

#include "blowup/report.hpp"

namespace blowup {

/// min(m^{1-p} u, u^p) for u >= 0, 0 otherwise.
double f_m(double u, int m, double p);

/// (g/2) exp(-1/(eta_star - r)) inside the ball, 0 outside.
double bump_u0(double r, double eta_star, double g);

/// ((1-p) t + u0_sup^{1-p})^{1/(1-p)}.
double supersolution_bound(double t, double u0_sup, double p);

/// min{1/2, g^{1-p}/(1-p) (1 - 2^{p-1})}.
double default_horizon(double g, double p);

/// Smallest admissible outer radius 4 eta_star + 4 sqrt(T).
double min_outer_radius(double eta_star, double T);

struct RadialEvolution {
    std::vector<double> r;
    std::vector<double> t;
    std::vector<double> u;  // t-major
    int m = 1;
    double p = 0.5;
    int n = 3;
    double g = 1.0;
    double eta_star = 1.0;
    double error_estimate = 0.0;  // max |u_h - u_2h| / 3 on shared nodes
    std::size_t substeps = 1;     // per output step

    std::size_t nr() const { return r.size(); }
    std::size_t nt() const { return t.size(); }
    double at(std::size_t it, std::size_t ir) const { return u[it * r.size() + ir]; }
    double u0_sup() const;
};

/// IMEX BDF2 method of lines on a uniform grid [0, R] with u(R) = 0.
/// Diffusion is implicit, the reaction extrapolated; t_steps output steps
/// on [0, T], each split so the substep stays below m^{p-1}/2.
RadialEvolution solve_cpplus(int m, double p, int n, double eta_star, double g, double T,
                             const std::vector<double>& r_grid, std::size_t t_steps, bool estimate_error = true);

/// Sign, supersolution and far-field checks for one evolution.
CheckReport evolution_report(const RadialEvolution& ev, double abs_tol = 1e-12);

/// Pointwise non-decrease in m across evolutions sharing a grid.
CheckReport comparison_report(const std::vector<RadialEvolution>& evolutions, double abs_tol = 1e-12);

struct ProbeNode {
    double r;
    double t;
};

/// u^{(m)} - ((1-p)t)^{1/(1-p)} at the grid nodes nearest each probe.
CheckReport lower_bound_probe(const std::vector<RadialEvolution>& evolutions, double p,
                              const std::vector<ProbeNode>& probes);

/// |u_N - u_2N| / |u_2N - u_4N| at probe nodes (max norm over the probes).
double scheme_convergence_ratio(int m, double p, int n, double eta_star, double g, double T, double R,
                                std::size_t nr, std::size_t nt, const std::vector<ProbeNode>& probes);

}  // namespace blowup
