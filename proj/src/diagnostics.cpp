#include "blowup/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "blowup/errors.hpp"

namespace blowup {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool strict_sign_change(double a, double b) { return (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0); }

// Root in (0,1) of the cubic Hermite through (v0, d0), (v1, d1) over length h.
double hermite_root(double v0, double d0, double v1, double d1, double h) {
    auto val = [&](double s) {
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * v0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * v1 + (s3 - s2) * h * d1;
    };
    double lo = 0.0, hi = 1.0;
    const bool up = v0 < 0.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((val(mid) < 0.0) == up)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double hermite_slope(double v0, double d0, double v1, double d1, double h, double s) {
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * v0 + (3 * s2 - 4 * s + 1) * h * d0 + (-6 * s2 + 6 * s) * v1 + (3 * s2 - 2 * s) * h * d1) /
           h;
}

struct LineFit {
    double slope, intercept;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double N = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= N;
    my /= N;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double s = sxy / sxx;
    return {s, my - s * mx};
}

}  // namespace

// ---------------------------------------------------------------- energy

EnergyTrace energy_trace(const SolutionTrace& trace) {
    const Params& P = trace.params();
    const double p = P.p;
    const double inv = 1.0 / (1.0 - p);
    EnergyTrace et;
    const std::size_t N = trace.size();
    et.etas = trace.etas();
    et.F.resize(N);
    for (std::size_t i = 0; i < N; ++i) et.F[i] = detail::V(trace.ws()[i], trace.wps()[i], p, inv);
    et.min_value = *std::min_element(et.F.begin() + 1, et.F.end());
    for (std::size_t i = 1; i < N; ++i) et.max_increase = std::max(et.max_increase, et.F[i] - et.F[i - 1]);
    const std::size_t start = N - std::max<std::size_t>(1, N / 10);
    double sum = 0.0;
    for (std::size_t i = start; i < N; ++i) sum += et.F[i];
    et.F_inf_estimate = sum / static_cast<double>(N - start);

    // F' = -((n-1)/eta + eta/2) w'^2 against a three-point difference
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 2; i + 1 < N; ++i) {
        const double eta = et.etas[i], wp = trace.wps()[i];
        const double exact = -((P.n - 1) / eta + 0.5 * eta) * wp * wp;
        const double h1 = eta - et.etas[i - 1], h2 = et.etas[i + 1] - eta;
        const double fd = -h2 / (h1 * (h1 + h2)) * et.F[i - 1] + (h2 - h1) / (h1 * h2) * et.F[i] +
                          h1 / (h2 * (h1 + h2)) * et.F[i + 1];
        worst = std::max(worst, std::fabs(fd - exact));
        scale = std::max(scale, std::fabs(exact));
    }
    et.derivative_mismatch = scale > 0.0 ? worst / scale : worst;
    return et;
}

CheckReport energy_report(const EnergyTrace& et, const SolutionTrace& trace) {
    const Params& P = trace.params();
    const double V0 = eval_V(P.alpha, 0.0, P.p);
    const double tol = 10.0 * P.abs_tol;
    double max_F = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < et.F.size(); ++i) max_F = std::max(max_F, et.F[i]);
    const bool constant = trace.method() == MethodTag::constant;
    const bool monotone = et.max_increase <= tol;
    const bool lower = et.min_value >= 0.0;
    const bool upper = constant || max_F < V0;
    CheckReport r;
    r.check_name = "energy_decay";
    r.params = params_json(P);
    r.pass = monotone && lower && upper;
    r.measured = et.max_increase;
    r.bound = 0.0;
    r.tolerance = tol;
    r.details = {{"F0", V0},
                 {"min_F", et.min_value},
                 {"max_F_after_start", max_F},
                 {"F_inf_estimate", et.F_inf_estimate},
                 {"derivative_mismatch", et.derivative_mismatch},
                 {"samples", et.F.size()},
                 {"resolved_until", trace.resolved_until()}};
    return r;
}

// ---------------------------------------------------------------- tail bounds

double decay_sup_factor(double p) {
    check_exponent(p);
    const double a = 2.0 * p / (1.0 - p) + 2.0;
    return std::exp(0.5 * a * std::log(8.0 * a / 3.0) - 0.5 * a);
}

TailBound tail_bound(const SolutionTrace& trace) {
    const Params& P = trace.params();
    const auto k = energy_constants(P.p);
    TailBound tb;
    tb.sup_factor = decay_sup_factor(P.p);
    tb.all_eta_constant = 0.5 * k.M_h * tb.sup_factor + 4.0 * std::exp(P.p * std::log1p(-P.p) / (1.0 - P.p));
    const double scaled_cap = 4.0 * k.M_h;
    const auto& et = trace.etas();
    const auto& wp = trace.wps();
    // beyond the resolved samples |w'| eta <= sqrt(2 F_tail) eta_max
    const double tail = trace.fully_resolved() ? 0.0 : trace.tail_wp_bound() * trace.eta_max();
    tb.max_scaled_wp = tail;
    std::ptrdiff_t last_bad = -1;
    for (std::size_t i = 0; i < et.size(); ++i) {
        const double s = std::fabs(wp[i]) * et[i];
        tb.max_scaled_wp = std::max(tb.max_scaled_wp, s);
        if (s > scaled_cap) last_bad = static_cast<std::ptrdiff_t>(i);
    }
    tb.all_eta_ok = tb.max_scaled_wp <= tb.all_eta_constant;
    if (tail <= scaled_cap && last_bad + 1 < static_cast<std::ptrdiff_t>(et.size())) {
        tb.found = true;
        tb.eta_alpha = et[static_cast<std::size_t>(last_bad + 1)];
    }
    return tb;
}

CheckReport tail_bound_report(const SolutionTrace& trace, double eta_alpha_limit) {
    const Params& P = trace.params();
    if (trace.eta_max() < 20.0) throw ParameterError("tail bound report needs eta_max >= 20");
    const auto tb = tail_bound(trace);
    CheckReport r;
    r.check_name = "tail_bound";
    r.params = params_json(P);
    r.pass = tb.found && tb.eta_alpha <= eta_alpha_limit && tb.all_eta_ok;
    r.measured = tb.found ? tb.eta_alpha : std::numeric_limits<double>::infinity();
    r.bound = eta_alpha_limit;
    r.tolerance = 0.0;
    r.details = {{"scaled_wp_cap", 4.0 * energy_constants(P.p).M_h},
                 {"max_scaled_wp", tb.max_scaled_wp},
                 {"all_eta_constant", tb.all_eta_constant},
                 {"all_eta_ok", tb.all_eta_ok},
                 {"sup_factor", tb.sup_factor}};
    return r;
}

// ---------------------------------------------------------------- zeros

ZeroCensus zero_census(const SolutionTrace& trace, WindowMode mode) {
    const Params& P = trace.params();
    ZeroCensus c;
    const auto& et = trace.etas();
    const auto& w = trace.ws();
    const auto& wp = trace.wps();
    double local_amp = std::fabs(wp[0]);
    for (std::size_t i = 0; i + 1 < et.size(); ++i) {
        local_amp = std::max(local_amp, std::fabs(wp[i]));
        if (!strict_sign_change(w[i], w[i + 1])) continue;
        const double h = et[i + 1] - et[i];
        const double s = hermite_root(w[i], wp[i], w[i + 1], wp[i + 1], h);
        const double slope = hermite_slope(w[i], wp[i], w[i + 1], wp[i + 1], h, s);
        const double z = et[i] + s * h;
        local_amp = std::max(local_amp, std::fabs(wp[i + 1]));
        const double floor = 1e-6 * local_amp;
        c.records.push_back({z, slope, crossing_window(z, slope, P.p, P.n, mode)});
        c.slope_floors.push_back(floor);
        if (!(std::fabs(slope) > floor)) ++c.floor_violations;
        if (c.records.size() >= 2) {
            const double prev = c.records[c.records.size() - 2].slope;
            if (!((prev > 0.0 && slope < 0.0) || (prev < 0.0 && slope > 0.0))) c.alternating = false;
        }
        local_amp = 0.0;
    }
    return c;
}

CheckReport census_report(const ZeroCensus& census, const SolutionTrace& trace, std::size_t min_zeros) {
    CheckReport r;
    r.check_name = "zero_census";
    r.params = params_json(trace.params());
    r.pass = census.records.size() >= min_zeros && census.alternating && census.floor_violations == 0;
    r.measured = static_cast<double>(census.records.size());
    r.bound = static_cast<double>(min_zeros);
    r.tolerance = 0.0;
    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < census.records.size(); ++i)
        if (census.slope_floors[i] > 0.0)
            min_ratio = std::min(min_ratio, std::fabs(census.records[i].slope) / census.slope_floors[i]);
    r.details = {{"zeros", census.records.size()},
                 {"alternating", census.alternating},
                 {"floor_violations", census.floor_violations},
                 {"min_slope_over_floor", std::isfinite(min_ratio) ? nlohmann::json(min_ratio) : nlohmann::json()},
                 {"resolved_until", trace.resolved_until()}};
    if (!census.records.empty()) {
        r.details["first_zero"] = census.records.front().eta_zero;
        r.details["last_zero"] = census.records.back().eta_zero;
    }
    return r;
}

// ---------------------------------------------------------------- decay

DecayFit decay_fit(const SolutionTrace& trace, double eta_lo, double eta_hi) {
    if (!(eta_lo >= 1.0) || !(eta_hi > eta_lo) || eta_hi > trace.eta_max())
        throw WindowError("fit window must lie in [1, eta_max]");
    const Params& P = trace.params();
    DecayFit fit;
    fit.eta_lo = eta_lo;
    fit.eta_hi = eta_hi;
    fit.conjectured_constant = std::exp(std::log(16.0) / (1.0 - P.p));
    const auto& et = trace.etas();
    const auto& wp = trace.wps();
    const auto& wpp = trace.wpps();
    std::vector<double> lx, ly, dx, dy;
    for (std::size_t i = 0; i + 1 < et.size(); ++i) {
        if (et[i + 1] < eta_lo) continue;
        if (et[i] > eta_hi) break;
        const double h = et[i + 1] - et[i];
        if (strict_sign_change(wp[i], wp[i + 1])) {
            const double s = hermite_root(wp[i], wpp[i], wp[i + 1], wpp[i + 1], h);
            const double eta = et[i] + s * h;
            const double v = std::fabs(trace.eval_on(i, eta).w);
            if (eta >= eta_lo && eta <= eta_hi && v > 0.0) {
                lx.push_back(std::log(eta));
                ly.push_back(std::log(v));
                fit.covered_until = eta;
            }
        }
        if (strict_sign_change(wpp[i], wpp[i + 1])) {
            // w''' is not stored; linear root of w''
            const double s = wpp[i] / (wpp[i] - wpp[i + 1]);
            const double eta = et[i] + s * h;
            const double v = std::fabs(trace.eval_on(i, eta).wp);
            if (eta >= eta_lo && eta <= eta_hi && v > 0.0) {
                dx.push_back(std::log(eta));
                dy.push_back(std::log(v));
            }
        }
    }
    fit.peak_count = lx.size();
    fit.wp_peak_count = dx.size();
    if (lx.size() < 3) throw WindowError("fewer than 3 peaks of |w| in the fit window");
    const auto f = least_squares(lx, ly);
    fit.exponent = -f.slope;
    fit.constant = std::exp(f.intercept);
    if (dx.size() >= 3) {
        const auto g = least_squares(dx, dy);
        fit.wp_exponent = -g.slope;
        fit.wp_constant = std::exp(g.intercept);
    } else {
        fit.wp_exponent = fit.wp_constant = kNaN;
    }
    return fit;
}

CheckReport decay_report(const DecayFit& fit, const SolutionTrace& trace, double slack) {
    const double p = trace.params().p;
    const double target = 2.0 / (1.0 - p);
    CheckReport r;
    r.check_name = "decay_exponent";
    r.params = params_json(trace.params());
    r.pass = fit.exponent >= target - slack;
    r.measured = fit.exponent;
    r.bound = target;
    r.tolerance = slack;
    r.details = {{"window", {fit.eta_lo, fit.eta_hi}},
                 {"constant", fit.constant},
                 {"peak_count", fit.peak_count},
                 {"wp_exponent", std::isfinite(fit.wp_exponent) ? nlohmann::json(fit.wp_exponent) : nlohmann::json()},
                 {"wp_target", (1.0 + p) / (1.0 - p)},
                 {"covered_until", fit.covered_until},
                 {"conjectured_constant", fit.conjectured_constant}};
    return r;
}

// ---------------------------------------------------------------- sigma

std::vector<double> sigma_sequence(double p, int M) {
    check_exponent(p);
    if (M < 1) throw ParameterError("M must be >= 1");
    const double cap = 2.0 * (1.0 + p) / (1.0 - p) + 1.0;
    std::vector<double> s{0.0};
    for (int m = 1; m < M; ++m) s.push_back(std::min(2.0 * s.back() * p / (1.0 + p) + 2.0, cap));
    return s;
}

double sigma_closed_form(double p, int m) {
    check_exponent(p);
    if (m < 1) throw ParameterError("m must be >= 1");
    if (m == 1) return 0.0;
    return 2.0 * (1.0 + p) / (1.0 - p) - 4.0 * p / (1.0 - p) * std::pow(2.0 * p / (1.0 + p), m - 2);
}

double sigma_limit(double p) {
    check_exponent(p);
    return 2.0 * (1.0 + p) / (1.0 - p);
}

// ---------------------------------------------------------------- continuity

double trace_distance(const SolutionTrace& a, const SolutionTrace& b) {
    std::vector<double> grid;
    grid.reserve(a.size() + b.size());
    std::merge(a.etas().begin(), a.etas().end(), b.etas().begin(), b.etas().end(), std::back_inserter(grid));
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const double top = std::min(a.eta_max(), b.eta_max());
    double d = 0.0;
    for (double eta : grid) {
        if (eta > top) break;
        const auto u = a.eval(eta), v = b.eval(eta);
        d = std::max({d, std::fabs(u.w - v.w), std::fabs(u.wp - v.wp)});
    }
    return d;
}

ContinuityTable continuity_experiment(const Params& base, const std::vector<double>& deltas,
                                      const IntegratorOptions& opts) {
    validate(base);
    const double e = equilibrium_amplitude(base.p);
    if (!(base.alpha > 0.0 && base.alpha < e)) throw ParameterError("alpha must lie in (0, equilibrium)");
    for (double d : deltas)
        if (!(d >= 0.0) || !(base.alpha + d < e)) throw ParameterError("alpha + delta must stay below equilibrium");
    ContinuityTable table;
    table.eta1 = std::sqrt(base.alpha / (2.0 * std::fabs(energy_constants(base.p).m_h)));
    const SolutionTrace ref = integrate(base, opts);
    table.tail_envelope = ref.fully_resolved() ? 0.0 : std::max(ref.tail_w_bound(), ref.tail_wp_bound());
    table.rows.resize(deltas.size());
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < deltas.size(); start += workers) {
        std::vector<std::future<std::pair<double, double>>> jobs;
        for (std::size_t i = start; i < std::min(deltas.size(), start + workers); ++i) {
            jobs.push_back(std::async(std::launch::async, [&, i] {
                Params q = base;
                q.alpha = base.alpha + deltas[i];
                const SolutionTrace t = integrate(q, opts);
                const double env = t.fully_resolved() ? 0.0 : std::max(t.tail_w_bound(), t.tail_wp_bound());
                return std::make_pair(trace_distance(ref, t), env);
            }));
        }
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            const auto [dist, env] = jobs[j].get();
            table.rows[start + j] = {deltas[start + j], dist};
            table.tail_envelope = std::max(table.tail_envelope, env);
        }
    }
    return table;
}

CheckReport continuity_report(const ContinuityTable& table, const Params& base, double final_limit) {
    std::vector<ContinuityRow> rows = table.rows;
    std::sort(rows.begin(), rows.end(), [](auto a, auto b) { return a.delta > b.delta; });
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].distance > rows[i - 1].distance) monotone = false;
    const double last = rows.empty() ? 0.0 : rows.back().distance;
    CheckReport r;
    r.check_name = "continuous_dependence";
    r.params = params_json(base);
    r.pass = monotone && last < final_limit;
    r.measured = last;
    r.bound = final_limit;
    r.tolerance = 0.0;
    auto arr = nlohmann::json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        nlohmann::json row = {{"delta", rows[i].delta}, {"distance", rows[i].distance}};
        if (i > 0 && rows[i].distance > 0.0 && rows[i - 1].distance > 0.0 && rows[i].delta > 0.0)
            row["local_order"] = std::log(rows[i - 1].distance / rows[i].distance) /
                                 std::log(rows[i - 1].delta / rows[i].delta);
        arr.push_back(row);
    }
    r.details = {{"monotone", monotone},
                 {"eta1", table.eta1},
                 {"tail_envelope", table.tail_envelope},
                 {"holder_reference_order", 1.0 - base.p},
                 {"rows", arr}};
    return r;
}

}  // namespace blowup
