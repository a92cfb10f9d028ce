#include "blowup/cpplus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "blowup/errors.hpp"
#include "blowup/model.hpp"

namespace blowup {

double f_m(double u, int m, double p) {
    if (m < 1) throw ParameterError("m must be >= 1");
    if (u <= 0.0) return 0.0;
    const double lin = std::pow(static_cast<double>(m), 1.0 - p) * u;
    return std::min(lin, std::pow(u, p));
}

double bump_u0(double r, double eta_star, double g) {
    if (!(eta_star > 0.0) || !(g > 0.0)) throw ParameterError("bump needs eta_star > 0 and g > 0");
    if (r >= eta_star) return 0.0;
    return 0.5 * g * std::exp(-1.0 / (eta_star - r));
}

double supersolution_bound(double t, double u0_sup, double p) {
    check_exponent(p);
    const double base = (1.0 - p) * t + std::pow(u0_sup, 1.0 - p);
    return std::exp(std::log(base) / (1.0 - p));
}

double default_horizon(double g, double p) {
    check_exponent(p);
    return std::min(0.5, std::pow(g, 1.0 - p) / (1.0 - p) * (1.0 - std::pow(0.5, 1.0 - p)));
}

double min_outer_radius(double eta_star, double T) { return 4.0 * eta_star + 4.0 * std::sqrt(T); }

double RadialEvolution::u0_sup() const {
    double s = 0.0;
    for (std::size_t ir = 0; ir < nr(); ++ir) s = std::max(s, u[ir]);
    return s;
}

namespace {

// Solves a tridiagonal system in place (Thomas); sub/diag/sup have length N.
void thomas(std::vector<double> sub, std::vector<double> diag, const std::vector<double>& sup, std::vector<double>& rhs) {
    const std::size_t N = diag.size();
    for (std::size_t i = 1; i < N; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[N - 1] /= diag[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

struct Laplacian {
    // L u_i = lo_i u_{i-1} + mid_i u_i + hi_i u_{i+1}, unknowns i = 0..N-1, u_N = 0
    std::vector<double> lo, mid, hi;
};

Laplacian radial_laplacian(const std::vector<double>& r, int n) {
    const std::size_t N = r.size() - 1;
    const double h = r[1] - r[0];
    Laplacian L;
    L.lo.assign(N, 0.0);
    L.mid.assign(N, 0.0);
    L.hi.assign(N, 0.0);
    L.mid[0] = -2.0 * n / (h * h);
    L.hi[0] = 2.0 * n / (h * h);
    for (std::size_t i = 1; i < N; ++i) {
        const double c = (n - 1) / (2.0 * h * r[i]);
        L.lo[i] = 1.0 / (h * h) - c;
        L.mid[i] = -2.0 / (h * h);
        L.hi[i] = 1.0 / (h * h) + c;
    }
    return L;
}

void check_uniform(const std::vector<double>& r) {
    if (r.size() < 4) throw GridError("radial grid needs at least 4 nodes");
    if (r.front() != 0.0) throw GridError("radial grid must start at r = 0");
    const double h = (r.back() - r.front()) / (r.size() - 1);
    for (std::size_t i = 1; i < r.size(); ++i)
        if (std::fabs(r[i] - r[i - 1] - h) > 1e-9 * h) throw GridError("radial grid must be uniform");
}

RadialEvolution run(int m, double p, int n, double eta_star, double g, double T, const std::vector<double>& r,
                    std::size_t t_steps) {
    RadialEvolution ev;
    ev.r = r;
    ev.m = m;
    ev.p = p;
    ev.n = n;
    ev.g = g;
    ev.eta_star = eta_star;
    const std::size_t nr = r.size(), N = nr - 1;
    const double dt = T / static_cast<double>(t_steps);
    const double tau_max = 0.5 * std::pow(static_cast<double>(m), p - 1.0);
    ev.substeps = static_cast<std::size_t>(std::ceil(dt / tau_max - 1e-12));
    ev.substeps = std::max<std::size_t>(ev.substeps, 1);
    const double tau = dt / static_cast<double>(ev.substeps);
    ev.t.resize(t_steps + 1);
    for (std::size_t k = 0; k <= t_steps; ++k) ev.t[k] = T * static_cast<double>(k) / static_cast<double>(t_steps);
    ev.u.assign(nr * (t_steps + 1), 0.0);

    std::vector<double> u(N), u_prev(N), f_cur(N), f_prev(N), rhs(N);
    for (std::size_t i = 0; i < N; ++i) u[i] = g > 0.0 ? bump_u0(r[i], eta_star, g) : 0.0;
    std::copy(u.begin(), u.end(), ev.u.begin());

    const Laplacian L = radial_laplacian(r, n);
    auto system = [&](double a, double b, std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup) {
        // (a I - b L)
        sub.resize(N);
        diag.resize(N);
        sup.resize(N);
        for (std::size_t i = 0; i < N; ++i) {
            sub[i] = -b * L.lo[i];
            diag[i] = a - b * L.mid[i];
            sup[i] = -b * L.hi[i];
        }
    };
    std::vector<double> e_sub, e_diag, e_sup, b_sub, b_diag, b_sup;
    system(1.0, tau, e_sub, e_diag, e_sup);
    system(3.0, 2.0 * tau, b_sub, b_diag, b_sup);

    bool first = true;
    for (std::size_t k = 1; k <= t_steps; ++k) {
        for (std::size_t s = 0; s < ev.substeps; ++s) {
            for (std::size_t i = 0; i < N; ++i) f_cur[i] = f_m(u[i], m, p);
            if (first) {
                for (std::size_t i = 0; i < N; ++i) rhs[i] = u[i] + tau * f_cur[i];
                u_prev = u;
                thomas(e_sub, e_diag, e_sup, rhs);
                first = false;
            } else {
                for (std::size_t i = 0; i < N; ++i)
                    rhs[i] = 4.0 * u[i] - u_prev[i] + 2.0 * tau * (2.0 * f_cur[i] - f_prev[i]);
                u_prev = u;
                thomas(b_sub, b_diag, b_sup, rhs);
            }
            f_prev = f_cur;
            u = rhs;
            for (double v : u)
                if (!std::isfinite(v)) throw NumericalError("non-finite value in the regularized evolution");
        }
        std::copy(u.begin(), u.end(), ev.u.begin() + static_cast<std::ptrdiff_t>(k * nr));
    }
    return ev;
}

}  // namespace

RadialEvolution solve_cpplus(int m, double p, int n, double eta_star, double g, double T,
                             const std::vector<double>& r_grid, std::size_t t_steps, bool estimate_error) {
    check_exponent(p);
    if (m < 1) throw ParameterError("m must be >= 1");
    if (n < 1) throw ParameterError("n must be >= 1");
    if (!(eta_star > 0.0)) throw ParameterError("eta_star must be positive");
    if (!(g >= 0.0)) throw ParameterError("g must be non-negative");
    if (!(T > 0.0)) throw ParameterError("T must be positive");
    if (t_steps < 2) throw GridError("need at least two time steps");
    check_uniform(r_grid);
    if (r_grid.back() < min_outer_radius(eta_star, T) * (1.0 - 1e-12))
        throw GridError("outer radius below 4 eta_star + 4 sqrt(T)");
    RadialEvolution ev = run(m, p, n, eta_star, g, T, r_grid, t_steps);
    const std::size_t intervals = r_grid.size() - 1;
    if (estimate_error && intervals % 2 == 0 && t_steps % 2 == 0) {
        std::vector<double> rc;
        for (std::size_t i = 0; i < r_grid.size(); i += 2) rc.push_back(r_grid[i]);
        const RadialEvolution coarse = run(m, p, n, eta_star, g, T, rc, t_steps / 2);
        double est = 0.0;
        for (std::size_t k = 0; k < coarse.nt(); ++k)
            for (std::size_t i = 0; i < coarse.nr(); ++i)
                est = std::max(est, std::fabs(ev.at(2 * k, 2 * i) - coarse.at(k, i)) / 3.0);
        ev.error_estimate = est;
    } else if (estimate_error) {
        ev.error_estimate = std::numeric_limits<double>::quiet_NaN();
    }
    return ev;
}

CheckReport evolution_report(const RadialEvolution& ev, double abs_tol) {
    const double u0 = ev.u0_sup();
    const double tol = abs_tol + 10.0 * (std::isfinite(ev.error_estimate) ? ev.error_estimate : 0.0);
    double min_u = std::numeric_limits<double>::infinity();
    double worst_margin = std::numeric_limits<double>::infinity();
    double far = 0.0;
    const std::size_t far_start = static_cast<std::size_t>(std::floor(0.9 * (ev.nr() - 1)));
    for (std::size_t k = 0; k < ev.nt(); ++k) {
        const double bound = u0 > 0.0 ? supersolution_bound(ev.t[k], u0, ev.p) : 0.0;
        for (std::size_t i = 0; i < ev.nr(); ++i) {
            const double v = ev.at(k, i);
            min_u = std::min(min_u, v);
            worst_margin = std::min(worst_margin, bound - v);
            if (i >= far_start) far = std::max(far, std::fabs(v));
        }
    }
    const double far_limit = 1e-8 * u0;
    CheckReport r;
    r.check_name = "regularized_evolution";
    r.params = {{"m", ev.m}, {"p", ev.p}, {"n", ev.n}, {"g", ev.g}, {"eta_star", ev.eta_star}};
    r.pass = min_u >= -abs_tol && worst_margin >= -tol && far <= far_limit;
    r.measured = worst_margin;
    r.bound = 0.0;
    r.tolerance = tol;
    r.details = {{"min_u", min_u},
                 {"far_field_max", far},
                 {"far_field_limit", far_limit},
                 {"error_estimate", std::isfinite(ev.error_estimate) ? nlohmann::json(ev.error_estimate) : nlohmann::json()},
                 {"substeps", ev.substeps}};
    return r;
}

namespace {

void check_shared(const std::vector<RadialEvolution>& evs) {
    if (evs.empty()) throw GridError("no evolutions");
    for (std::size_t j = 1; j < evs.size(); ++j) {
        if (evs[j].r != evs[0].r || evs[j].t != evs[0].t) throw GridError("evolutions do not share grids");
        if (!(evs[j].m > evs[j - 1].m)) throw GridError("evolutions must have increasing m");
    }
}

}  // namespace

CheckReport comparison_report(const std::vector<RadialEvolution>& evs, double abs_tol) {
    check_shared(evs);
    double worst = std::numeric_limits<double>::infinity();
    double tol_used = abs_tol;
    for (std::size_t j = 1; j < evs.size(); ++j) {
        const double e0 = std::isfinite(evs[j - 1].error_estimate) ? evs[j - 1].error_estimate : 0.0;
        const double e1 = std::isfinite(evs[j].error_estimate) ? evs[j].error_estimate : 0.0;
        const double tol = abs_tol + 10.0 * (e0 + e1);
        tol_used = std::max(tol_used, tol);
        for (std::size_t i = 0; i < evs[j].u.size(); ++i) {
            worst = std::min(worst, evs[j].u[i] - evs[j - 1].u[i]);
        }
    }
    CheckReport r;
    r.check_name = "comparison_sequence";
    auto ms = nlohmann::json::array();
    for (const auto& e : evs) ms.push_back(e.m);
    r.params = {{"m", ms}, {"p", evs[0].p}, {"n", evs[0].n}};
    r.pass = evs.size() < 2 || worst >= -tol_used;
    r.measured = evs.size() < 2 ? 0.0 : worst;
    r.bound = 0.0;
    r.tolerance = tol_used;
    return r;
}

CheckReport lower_bound_probe(const std::vector<RadialEvolution>& evs, double p, const std::vector<ProbeNode>& probes) {
    check_shared(evs);
    check_exponent(p);
    const auto& r = evs[0].r;
    const auto& t = evs[0].t;
    auto nearest = [](const std::vector<double>& g, double x) {
        auto it = std::lower_bound(g.begin(), g.end(), x);
        if (it == g.end()) return g.size() - 1;
        std::size_t i = static_cast<std::size_t>(it - g.begin());
        if (i > 0 && x - g[i - 1] < g[i] - x) --i;
        return i;
    };
    bool monotone = true;
    double best = -std::numeric_limits<double>::infinity();
    double tol = 0.0;
    for (const auto& e : evs) tol = std::max(tol, 10.0 * (std::isfinite(e.error_estimate) ? e.error_estimate : 0.0));
    auto rows = nlohmann::json::array();
    for (const auto& pr : probes) {
        const std::size_t ir = nearest(r, pr.r), it = nearest(t, pr.t);
        const double bound = t[it] > 0.0 ? std::exp(std::log((1.0 - p) * t[it]) / (1.0 - p)) : 0.0;
        auto margins = nlohmann::json::array();
        double prev = -std::numeric_limits<double>::infinity();
        for (const auto& e : evs) {
            const double m = e.at(it, ir) - bound;
            margins.push_back(m);
            if (m < prev - tol) monotone = false;
            prev = std::max(prev, m);
            best = std::max(best, m);
        }
        rows.push_back({{"r", r[ir]}, {"t", t[it]}, {"bound", bound}, {"margins", margins}});
    }
    CheckReport rep;
    rep.check_name = "lower_bound_probe";
    auto ms = nlohmann::json::array();
    for (const auto& e : evs) ms.push_back(e.m);
    rep.params = {{"m", ms}, {"p", p}, {"n", evs[0].n}};
    rep.pass = monotone;
    rep.measured = best;
    rep.bound = 0.0;
    rep.tolerance = tol;
    rep.details = {{"probes", rows}, {"monotone_in_m", monotone}};
    return rep;
}

double scheme_convergence_ratio(int m, double p, int n, double eta_star, double g, double T, double R, std::size_t nr,
                                std::size_t nt, const std::vector<ProbeNode>& probes) {
    std::vector<RadialEvolution> levels;
    for (std::size_t k = 0; k < 3; ++k) {
        const std::size_t f = std::size_t{1} << k;
        std::vector<double> r(f * (nr - 1) + 1);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = R * static_cast<double>(i) / static_cast<double>(r.size() - 1);
        levels.push_back(solve_cpplus(m, p, n, eta_star, g, T, r, f * nt, false));
    }
    double d1 = 0.0, d2 = 0.0;
    const double h = R / static_cast<double>(nr - 1), dt = T / static_cast<double>(nt);
    for (const auto& pr : probes) {
        const std::size_t ir = static_cast<std::size_t>(std::lround(pr.r / h));
        const std::size_t it = static_cast<std::size_t>(std::lround(pr.t / dt));
        const double a = levels[0].at(it, ir), b = levels[1].at(2 * it, 2 * ir), c = levels[2].at(4 * it, 4 * ir);
        d1 = std::max(d1, std::fabs(a - b));
        d2 = std::max(d2, std::fabs(b - c));
    }
    return d1 / d2;
}

}  // namespace blowup
