#include "blowup/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blowup/errors.hpp"

namespace blowup {

std::vector<double> linspace(double a, double b, std::size_t count) {
    if (count < 2) throw GridError("linspace needs at least two points");
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = a + (b - a) * static_cast<double>(i) / (count - 1);
    v.back() = b;
    return v;
}

namespace {

void check_grid(const std::vector<double>& g, const char* name) {
    if (g.empty()) throw GridError(std::string(name) + " grid is empty");
    if (g.front() < 0.0) throw GridError(std::string(name) + " grid must be non-negative");
    for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1])) throw GridError(std::string(name) + " grid must be increasing");
}

double scale_power(double s, double p, GlobalForm form) {
    const double base = form == GlobalForm::literal ? (1.0 - p) * s : s;
    return std::exp(std::log(base) / (1.0 - p));
}

}  // namespace

double maximal_solution(double t, double t_offset, double p) {
    check_exponent(p);
    const double s = t + t_offset;
    if (s <= 0.0) return 0.0;
    return std::exp(std::log((1.0 - p) * s) / (1.0 - p));
}

RadialField reconstruct(const SolutionTrace& trace, const std::vector<double>& r_grid,
                        const std::vector<double>& t_grid, double t_offset, GlobalForm form) {
    check_grid(r_grid, "r");
    check_grid(t_grid, "t");
    if (!(t_offset >= 0.0)) throw ParameterError("t_offset must be non-negative");
    const Params& P = trace.params();
    RadialField f;
    f.r = r_grid;
    f.t = t_grid;
    f.t_offset = t_offset;
    f.p = P.p;
    f.n = P.n;
    f.abs_tol = P.abs_tol;
    f.form = form;
    f.u.assign(r_grid.size() * t_grid.size(), 0.0);
    for (std::size_t it = 0; it < t_grid.size(); ++it) {
        const double s = t_grid[it] + t_offset;
        if (s <= 0.0) continue;
        const double root = std::sqrt(s);
        if (r_grid.back() / root > trace.eta_max()) throw RangeError("field needs eta beyond the trace range");
        const double amp = scale_power(s, P.p, form);
        for (std::size_t ir = 0; ir < r_grid.size(); ++ir) f.at(it, ir) = trace.eval_w(r_grid[ir] / root) * amp;
    }
    return f;
}

ResidualResult pde_residual(const RadialField& field, const ZeroMask* mask) {
    const std::size_t nr = field.nr(), nt = field.nt();
    if (nr < 3 || nt < 3) throw GridError("residual needs at least 3 nodes in r and t");
    if (field.u.size() != nr * nt) throw GridError("field size does not match its grids");
    const double p = field.p;
    const int n = field.n;
    ResidualResult res;
    for (std::size_t it = 1; it + 1 < nt; ++it) {
        const double k1 = field.t[it] - field.t[it - 1], k2 = field.t[it + 1] - field.t[it];
        const double s = field.t[it] + field.t_offset;
        for (std::size_t ir = 0; ir + 1 < nr; ++ir) {
            if (mask && s > 0.0) {
                const double eta = field.r[ir] / std::sqrt(s);
                bool skip = false;
                for (double z : mask->eta_zeros)
                    if (std::fabs(eta - z) < mask->half_width) skip = true;
                if (skip) continue;
            }
            const double u = field.at(it, ir);
            const double ut = -k2 / (k1 * (k1 + k2)) * field.at(it - 1, ir) + (k2 - k1) / (k1 * k2) * u +
                              k1 / (k2 * (k1 + k2)) * field.at(it + 1, ir);
            double lap;
            if (ir == 0) {
                const double h = field.r[1] - field.r[0];
                if (field.r[0] != 0.0) continue;
                lap = n * 2.0 * (field.at(it, 1) - u) / (h * h);
            } else {
                const double h1 = field.r[ir] - field.r[ir - 1], h2 = field.r[ir + 1] - field.r[ir];
                const double um = field.at(it, ir - 1), up = field.at(it, ir + 1);
                const double urr = 2.0 * ((up - u) / h2 - (u - um) / h1) / (h1 + h2);
                const double ur = -h2 / (h1 * (h1 + h2)) * um + (h2 - h1) / (h1 * h2) * u + h1 / (h2 * (h1 + h2)) * up;
                lap = urr + (n - 1) / field.r[ir] * ur;
            }
            const double react = u == 0.0 ? 0.0 : std::copysign(std::pow(std::fabs(u), p), u);
            const double v = std::fabs(ut - lap - react);
            ++res.nodes;
            if (v > res.max) {
                res.max = v;
                res.r_at = field.r[ir];
                res.t_at = field.t[it];
            }
        }
    }
    return res;
}

CheckReport apriori_check(const RadialField& field) {
    double worst = std::numeric_limits<double>::infinity();
    double r_at = 0.0, t_at = 0.0;
    for (std::size_t it = 0; it < field.nt(); ++it) {
        const double bound = maximal_solution(field.t[it], field.t_offset, field.p);
        for (std::size_t ir = 0; ir < field.nr(); ++ir) {
            const double m = bound - std::fabs(field.at(it, ir));
            if (m < worst) {
                worst = m;
                r_at = field.r[ir];
                t_at = field.t[it];
            }
        }
    }
    CheckReport rep;
    rep.check_name = "apriori_bound";
    rep.params = {{"p", field.p}, {"n", field.n}, {"t_offset", field.t_offset}, {"abs_tol", field.abs_tol}};
    rep.pass = worst >= -field.abs_tol;
    rep.measured = worst;
    rep.bound = 0.0;
    rep.tolerance = field.abs_tol;
    rep.details = {{"worst_r", r_at}, {"worst_t", t_at}};
    return rep;
}

std::size_t two_signed_rows(const RadialField& field) {
    std::size_t rows = 0;
    for (std::size_t it = 0; it < field.nt(); ++it) {
        bool pos = false, neg = false;
        for (std::size_t ir = 0; ir < field.nr(); ++ir) {
            pos = pos || field.at(it, ir) > 0.0;
            neg = neg || field.at(it, ir) < 0.0;
        }
        if (pos && neg) ++rows;
    }
    return rows;
}

double radial_lq_norm(const RadialField& field, std::size_t it, double q) {
    if (it >= field.nt()) throw GridError("time index out of range");
    double sum = 0.0;
    for (std::size_t ir = 0; ir + 1 < field.nr(); ++ir) {
        auto g = [&](std::size_t j) { return std::pow(std::fabs(field.at(it, j)), q) * std::pow(field.r[j], field.n - 1); };
        sum += 0.5 * (field.r[ir + 1] - field.r[ir]) * (g(ir) + g(ir + 1));
    }
    return sum;
}

}  // namespace blowup
