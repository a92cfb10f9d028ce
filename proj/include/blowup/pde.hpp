#pragma once

#include <cstddef>
#include <vector>

#include "blowup/ivp.hpp"
#include "blowup/report.hpp"

namespace blowup {

/// `shifted`: u = w(r / s^{1/2}) s^{1/(1-p)} with s = t + t_offset.
/// `literal`: same with an extra (1-p) inside the power, ((1-p) s)^{1/(1-p)}.
enum class GlobalForm { shifted, literal };

/// u sampled on r_grid x t_grid, stored t-major.
struct RadialField {
    std::vector<double> r;
    std::vector<double> t;
    std::vector<double> u;
    double t_offset = 0.0;
    double p = 0.5;
    int n = 3;
    double abs_tol = 1e-12;
    GlobalForm form = GlobalForm::shifted;

    std::size_t nr() const { return r.size(); }
    std::size_t nt() const { return t.size(); }
    double at(std::size_t it, std::size_t ir) const { return u[it * r.size() + ir]; }
    double& at(std::size_t it, std::size_t ir) { return u[it * r.size() + ir]; }
};

std::vector<double> linspace(double a, double b, std::size_t count);

RadialField reconstruct(const SolutionTrace& trace, const std::vector<double>& r_grid,
                        const std::vector<double>& t_grid, double t_offset,
                        GlobalForm form = GlobalForm::shifted);

/// Spatially homogeneous maximal solution ((1-p)(t + t_offset))^{1/(1-p)}.
double maximal_solution(double t, double t_offset, double p);

/// Excludes nodes with |r / sqrt(t + t_offset) - z| < half_width for any z.
struct ZeroMask {
    std::vector<double> eta_zeros;
    double half_width = 0.0;
};

struct ResidualResult {
    double max = 0.0;
    double r_at = 0.0;
    double t_at = 0.0;
    std::size_t nodes = 0;
};

/// max |u_t - u_rr - (n-1)/r u_r - u|u|^{p-1}| over interior nodes,
/// second-order differences, n u_rr at r = 0.
ResidualResult pde_residual(const RadialField& field, const ZeroMask* mask = nullptr);

CheckReport apriori_check(const RadialField& field);

/// Number of time rows on which u takes both signs.
std::size_t two_signed_rows(const RadialField& field);

/// Trapezoid approximation of int |u(r, t_i)|^q r^{n-1} dr.
double radial_lq_norm(const RadialField& field, std::size_t it, double q);

}  // namespace blowup
