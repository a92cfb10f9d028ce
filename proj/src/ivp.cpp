#include "blowup/ivp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "blowup/errors.hpp"
#include "blowup/quadrature.hpp"

namespace blowup {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ulp(double x) {
    const double a = std::fabs(x);
    return std::nextafter(a, kInf) - a;
}

double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

struct Hermite5 {
    double b0, b1, b2, b3, b4, b5;
    double d0, d1, d2, d3, d4, d5;
};

Hermite5 hermite5(double s) {
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    Hermite5 r;
    r.b0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    r.b1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    r.b2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    r.b3 = 0.5 * (s3 - 2.0 * s4 + s5);
    r.b4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    r.b5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    r.d0 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    r.d1 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    r.d2 = 0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4);
    r.d3 = 0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4);
    r.d4 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    r.d5 = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;
    return r;
}

// Cubic Hermite through (w0, d0) at 0 and (w1, d1) at h, in s = x/h.
struct Cubic {
    double w0, d0, w1, d1, h;
    double value(double s) const {
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * w0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * w1 +
               (s3 - s2) * h * d1;
    }
    double slope(double s) const {
        const double s2 = s * s;
        return ((6 * s2 - 6 * s) * w0 + (3 * s2 - 4 * s + 1) * h * d0 + (-6 * s2 + 6 * s) * w1 +
                (3 * s2 - 2 * s) * h * d1) /
               h;
    }
};

// Root of the cubic on (0,1), given a strict sign change of the endpoints.
double cubic_root(const Cubic& c) {
    double lo = 0.0, hi = 1.0;
    const bool up = c.w0 < 0.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double v = c.value(mid);
        if ((v < 0.0) == up)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

bool strict_sign_change(double a, double b) { return (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0); }

}  // namespace

std::string to_string(MethodTag tag) {
    switch (tag) {
        case MethodTag::picard: return "picard";
        case MethodTag::rk_continuation: return "rk_continuation";
        case MethodTag::constant: return "constant";
    }
    return "unknown";
}

std::string to_string(WindowMode mode) { return mode == WindowMode::offset ? "offset" : "literal"; }

WindowMode parse_window_mode(const std::string& s) {
    if (s == "offset") return WindowMode::offset;
    if (s == "literal") return WindowMode::literal;
    throw ParameterError("unknown window mode: " + s);
}

double crossing_window(double eta_bar, double beta, double p, int n, WindowMode mode) {
    const auto k = energy_constants(p);
    const double e = equilibrium_amplitude(p);
    const double b = std::fabs(beta);
    const double c = -4.0 * std::log(6.0 / 7.0);
    const double fourth = b > 0.0 ? e / b : kInf;
    if (mode == WindowMode::literal) {
        const double first = n == 1 ? kInf : std::pow(8.0 / 7.0, 1.0 / (n - 1)) * eta_bar;
        return std::min({first, std::sqrt(eta_bar * eta_bar + c), eta_bar - b / (4.0 * k.m_h), fourth});
    }
    // increments written without cancellation against eta_bar
    const double first = n == 1 ? kInf : std::expm1(std::log(8.0 / 7.0) / (n - 1)) * eta_bar;
    const double second = c / (std::sqrt(eta_bar * eta_bar + c) + eta_bar);
    const double third = b / (4.0 * std::fabs(k.m_h));
    return std::min({first, second, third, fourth});
}

// ---------------------------------------------------------------- trace

SolutionTrace::SolutionTrace(Params params, MethodTag method, std::vector<double> etas, std::vector<double> ws,
                             std::vector<double> wps, std::vector<double> wpps, std::vector<ZeroEvent> zeros,
                             double tail_energy)
    : params_(params),
      method_(method),
      etas_(std::move(etas)),
      ws_(std::move(ws)),
      wps_(std::move(wps)),
      wpps_(std::move(wpps)),
      zeros_(std::move(zeros)),
      tail_energy_(std::max(tail_energy, 0.0)) {
    check_exponent(params_.p);
    if (etas_.size() < 2 || ws_.size() != etas_.size() || wps_.size() != etas_.size() ||
        wpps_.size() != etas_.size())
        throw ParameterError("trace needs at least two samples of equal-length channels");
    if (etas_.front() != 0.0) throw ParameterError("trace must start at eta = 0");
    for (std::size_t i = 1; i < etas_.size(); ++i)
        if (!(etas_[i] > etas_[i - 1])) throw ParameterError("trace samples must be strictly increasing");
    if (etas_.back() > params_.eta_max) params_.eta_max = etas_.back();
}

double SolutionTrace::tail_wp_bound() const { return std::sqrt(2.0 * tail_energy_); }

double SolutionTrace::tail_w_bound() const {
    const auto k = energy_constants(params_.p);
    return level_half_width(std::min(tail_energy_, k.c_star), params_.p);
}

std::size_t SolutionTrace::interval(double eta) const {
    auto it = std::upper_bound(etas_.begin(), etas_.end(), eta);
    std::size_t i = it == etas_.begin() ? 0 : static_cast<std::size_t>(it - etas_.begin()) - 1;
    return std::min(i, etas_.size() - 2);
}

PhasePoint SolutionTrace::eval_on(std::size_t i, double eta) const {
    const double h = etas_[i + 1] - etas_[i];
    const double s = (eta - etas_[i]) / h;
    const auto b = hermite5(s);
    const double w = ws_[i] * b.b0 + h * wps_[i] * b.b1 + h * h * wpps_[i] * b.b2 + ws_[i + 1] * b.b5 +
                     h * wps_[i + 1] * b.b4 + h * h * wpps_[i + 1] * b.b3;
    const double wp = (ws_[i] * b.d0 + h * wps_[i] * b.d1 + h * h * wpps_[i] * b.d2 + ws_[i + 1] * b.d5 +
                       h * wps_[i + 1] * b.d4 + h * h * wpps_[i + 1] * b.d3) /
                      h;
    return {w, wp};
}

PhasePoint SolutionTrace::eval(double eta) const {
    if (!(eta >= 0.0) || eta > params_.eta_max) throw RangeError("eta outside the trace range");
    if (eta > etas_.back()) return {0.0, 0.0};
    if (eta == etas_.back()) return {ws_.back(), wps_.back()};
    return eval_on(interval(eta), eta);
}

SolutionTrace SolutionTrace::negated() const {
    auto neg = [](std::vector<double> v) {
        for (auto& x : v) x = -x;
        return v;
    };
    Params q = params_;
    q.alpha = -q.alpha;
    std::vector<ZeroEvent> z = zeros_;
    for (auto& e : z) e.slope = -e.slope;
    return SolutionTrace(q, method_, etas_, neg(ws_), neg(wps_), neg(wpps_), std::move(z), tail_energy_);
}

// ---------------------------------------------------------------- local solver

double local_epsilon(double alpha, double p) {
    const double e = equilibrium_amplitude(p);
    if (!(alpha > 0.0 && alpha < e)) throw DomainError("local_epsilon needs 0 < alpha < equilibrium amplitude");
    const auto k = energy_constants(p);
    const double a = 0.5 * alpha, b = 1.5 * alpha;
    double sup = std::max(std::fabs(eval_H(a, p)), std::fabs(eval_H(b, p)));
    if (k.w_min_arg >= a && k.w_min_arg <= b) sup = std::max(sup, k.M_h);
    const double first = sup > 0.0 ? std::sqrt(alpha / sup) : kInf;
    const double second = 1.0 / std::sqrt(1.0 / (1.0 - p) + p * std::pow(a, p - 1.0));
    return std::min(first, second);
}

namespace {

constexpr int kPanelOrder = 8;

// Applies T on panels [b_k, b_{k+1}] given H(w) at the Gauss nodes.
struct PanelSweep {
    const GaussLegendre& gl;
    int n;
    double alpha;
    std::vector<double> node_T, node_J;  // per node
    std::vector<double> end_T, end_J;    // per panel end

    void run(const std::vector<double>& bounds, const std::vector<double>& Hv) {
        const int q = gl.size();
        const std::size_t P = bounds.size() - 1;
        node_T.assign(P * q, 0.0);
        node_J.assign(P * q, 0.0);
        end_T.assign(P, 0.0);
        end_J.assign(P, 0.0);
        double Ja = 0.0, Wa = 0.0;
        std::vector<double> f(q), J(q);
        for (std::size_t k = 0; k < P; ++k) {
            const double a = bounds[k], b = bounds[k + 1], h = 0.5 * (b - a);
            std::array<double, 64> t{};
            for (int i = 0; i < q; ++i) {
                t[i] = a + h * (gl.x[i] + 1.0);
                f[i] = Hv[k * q + i] * ipow(t[i], n - 1) * std::exp(0.25 * (t[i] * t[i] - b * b));
            }
            const double carry = a > 0.0 ? Ja * ipow(a, n - 1) * std::exp(0.25 * (a * a - b * b)) : 0.0;
            double Cb = 0.0;
            for (int i = 0; i < q; ++i) Cb += gl.w[i] * f[i];
            for (int j = 0; j < q; ++j) {
                double C = 0.0;
                for (int i = 0; i < q; ++i) C += gl.cum(j, i) * f[i];
                J[j] = (carry + h * C) / (ipow(t[j], n - 1) * std::exp(0.25 * (t[j] * t[j] - b * b)));
            }
            const double Jb = (carry + h * Cb) / ipow(b, n - 1);
            double Wb = Wa;
            for (int i = 0; i < q; ++i) Wb += h * gl.w[i] * J[i];
            for (int j = 0; j < q; ++j) {
                double C = 0.0;
                for (int i = 0; i < q; ++i) C += gl.cum(j, i) * J[i];
                node_T[k * q + j] = alpha + Wa + h * C;
                node_J[k * q + j] = J[j];
            }
            end_T[k] = alpha + Wb;
            end_J[k] = Jb;
            Ja = Jb;
            Wa = Wb;
        }
    }
};

}  // namespace

LocalTrace picard_solve(const Params& params, int quad_points) {
    validate(params);
    const double eps = local_epsilon(params.alpha, params.p);
    return picard_solve_on(params, eps, quad_points);
}

LocalTrace picard_solve_on(const Params& params, double eps, int quad_points) {
    validate(params);
    if (quad_points < 16) throw ParameterError("quad_points must be >= 16");
    if (!(eps > 0.0)) throw ParameterError("interval length must be positive");
    const double p = params.p, inv = 1.0 / (1.0 - p), alpha = params.alpha;
    const GaussLegendre gl(kPanelOrder);
    const int q = gl.size();
    std::vector<double> bounds(quad_points + 1);
    for (int k = 0; k <= quad_points; ++k) bounds[k] = eps * k / quad_points;

    PanelSweep sweep{gl, params.n, alpha, {}, {}, {}, {}};
    std::vector<double> w(static_cast<std::size_t>(quad_points) * q, alpha), w_end(quad_points, alpha);
    std::vector<double> Hv(w.size());
    LocalTrace out;
    out.params = params;
    out.epsilon = eps;
    double prev_diff = -1.0;
    const double ratio_floor = 100.0 * std::numeric_limits<double>::epsilon() * std::max(std::fabs(alpha), 1e-300);
    for (int it = 1; it <= 200; ++it) {
        for (std::size_t i = 0; i < w.size(); ++i) Hv[i] = detail::H(w[i], p, inv);
        sweep.run(bounds, Hv);
        double diff = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) diff = std::max(diff, std::fabs(sweep.node_T[i] - w[i]));
        for (int k = 0; k < quad_points; ++k) diff = std::max(diff, std::fabs(sweep.end_T[k] - w_end[k]));
        if (prev_diff > ratio_floor) out.contraction_ratios.push_back(diff / prev_diff);
        w = sweep.node_T;
        w_end = sweep.end_T;
        prev_diff = diff;
        out.iterations = it;
        if (diff < params.abs_tol) {
            out.etas.push_back(0.0);
            out.ws.push_back(alpha);
            out.wps.push_back(0.0);
            for (int k = 0; k < quad_points; ++k) {
                for (int j = 0; j < q; ++j) {
                    out.etas.push_back(bounds[k] + 0.5 * (bounds[k + 1] - bounds[k]) * (gl.x[j] + 1.0));
                    out.ws.push_back(sweep.node_T[k * q + j]);
                    out.wps.push_back(sweep.node_J[k * q + j]);
                }
                out.etas.push_back(bounds[k + 1]);
                out.ws.push_back(sweep.end_T[k]);
                out.wps.push_back(sweep.end_J[k]);
            }
            return out;
        }
    }
    throw NumericalError("Picard iteration did not converge in 200 iterations");
}

// ---------------------------------------------------------------- continuation

PhasePoint rhs(PhasePoint pt, double eta, const Params& params) {
    check_exponent(params.p);
    if (eta < 0.0) throw DomainError("eta must be non-negative");
    const double Hw = eval_H(pt.w, params.p);
    if (eta == 0.0) {
        if (pt.wp != 0.0) throw DomainError("singular term undefined at eta = 0 with w' != 0");
        return {0.0, Hw / params.n};
    }
    return {pt.wp, Hw - ((params.n - 1) / eta + 0.5 * eta) * pt.wp};
}

namespace {

SolutionTrace constant_trace(const Params& params) {
    const double a = params.alpha;
    const double F = eval_V(a, 0.0, params.p);
    return SolutionTrace(params, MethodTag::constant, {0.0, params.eta_max}, {a, a}, {0.0, 0.0}, {0.0, 0.0}, {},
                         F);
}

}  // namespace

SolutionTrace integrate(const Params& params, const IntegratorOptions& opts) {
    validate(params);
    const double p = params.p, inv = 1.0 / (1.0 - p), alpha = params.alpha;
    const int n = params.n;
    const double e = equilibrium_amplitude(p);
    if (alpha == 0.0 || std::fabs(alpha) == e) return constant_trace(params);
    if (!(opts.resolution_floor > 0.0)) throw ParameterError("resolution floor must be positive");

    // Series start: w = alpha + a2 eta^2 + a4 eta^4.
    const double eps_loc = local_epsilon(std::fabs(alpha), p);
    const double eta_s = std::min({eps_loc / 4.0, 1e-3, 0.5 * params.eta_max});
    const double Ha = detail::H(alpha, p, inv);
    const double a2 = Ha / (2.0 * n);
    const double a4 = a2 * (detail::dH(alpha, p, inv) - 1.0) / (4.0 * (n + 2.0));

    std::vector<double> etas{0.0}, ws{alpha}, wps{0.0}, wpps{Ha / n};
    const std::size_t reserve = std::min<std::size_t>(opts.max_steps + 2, 1u << 16);
    etas.reserve(reserve);
    ws.reserve(reserve);
    wps.reserve(reserve);
    wpps.reserve(reserve);
    std::vector<ZeroEvent> zeros;

    const double s2 = eta_s * eta_s;
    std::array<double, 2> y{alpha + a2 * s2 + a4 * s2 * s2, 2.0 * a2 * eta_s + 4.0 * a4 * s2 * eta_s};
    double t = eta_s;

    auto f = [&](double tt, const std::array<double, 2>& yy) -> std::array<double, 2> {
        return {yy[1], detail::H(yy[0], p, inv) - ((n - 1) / tt + 0.5 * tt) * yy[1]};
    };
    std::array<double, 2> k1 = f(t, y);
    etas.push_back(t);
    ws.push_back(y[0]);
    wps.push_back(y[1]);
    wpps.push_back(k1[1]);

    const double V0 = detail::V(alpha, 0.0, p, inv);
    const double F_quiet = 0.5 * opts.resolution_floor * opts.resolution_floor;
    const double rtol = params.rel_tol, floor_scale = rtol * opts.resolution_floor;

    // Dormand-Prince 5(4)
    constexpr double c2 = 1. / 5, c3 = 3. / 10, c4 = 4. / 5, c5 = 8. / 9;
    constexpr double a21 = 1. / 5, a31 = 3. / 40, a32 = 9. / 40, a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
    constexpr double a51 = 19372. / 6561, a52 = -25360. / 2187, a53 = 64448. / 6561, a54 = -212. / 729;
    constexpr double a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247, a64 = 49. / 176,
                     a65 = -5103. / 18656;
    constexpr double a71 = 35. / 384, a73 = 500. / 1113, a74 = 125. / 192, a75 = -2187. / 6784, a76 = 11. / 84;
    constexpr double e1 = 71. / 57600, e3 = -71. / 16695, e4 = 71. / 1920, e5 = -17253. / 339200,
                     e6 = 22. / 525, e7 = -1. / 40;

    double h = eta_s;
    std::size_t steps = 0;
    while (t < params.eta_max && steps < opts.max_steps) {
        bool last = false;
        if (t + h >= params.eta_max * (1.0 - 1e-14)) {
            h = params.eta_max - t;
            last = true;
        }
        std::array<double, 2> yt, k2, k3, k4, k5, k6, k7, yn;
        for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * a21 * k1[i];
        k2 = f(t + c2 * h, yt);
        for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = f(t + c3 * h, yt);
        for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = f(t + c4 * h, yt);
        for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = f(t + c5 * h, yt);
        for (int i = 0; i < 2; ++i)
            yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const double t_new = last ? params.eta_max : t + h;
        k6 = f(t_new, yt);
        for (int i = 0; i < 2; ++i)
            yn[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        k7 = f(t_new, yn);

        // Error relative to the local oscillation amplitude implied by the energy.
        const double F = std::max(detail::V(y[0], y[1], p, inv), 0.0);
        const double amp[2] = {std::pow((1.0 + p) * F, 1.0 / (1.0 + p)), std::sqrt(2.0 * F)};
        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double ei =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = floor_scale + rtol * std::max({std::fabs(y[i]), std::fabs(yn[i]), amp[i]});
            err = std::max(err, std::fabs(ei) / sc);
        }
        if (!std::isfinite(err)) {
            h *= 0.25;
            continue;
        }
        if (err <= 1.0) {
            if (strict_sign_change(y[0], yn[0])) {
                const Cubic c{y[0], y[1], yn[0], yn[1], t_new - t};
                const double s = cubic_root(c);
                const double zc = t + s * (t_new - t);
                const double beta = c.slope(s);
                const double window = crossing_window(zc, beta, p, n, opts.window_mode);
                // The step holding the zero integrates a |w|^p cusp, whose O(h^{1+p}) error the
                // embedded estimate does not see; bound it by rel_tol |beta| as well.
                const double holder = std::pow(rtol * std::pow(std::fabs(beta), 1.0 - p), 1.0 / (1.0 + p));
                const double cap = std::max(std::min(opts.window_cap_fraction * window, holder), 64.0 * ulp(zc));
                if (t_new - t > 1.01 * cap) {
                    const double lead = zc - t;
                    h = lead > cap ? lead - 0.5 * cap : 0.99 * cap;
                    continue;
                }
                zeros.push_back({zc, beta});
            }
            const double Fn = detail::V(yn[0], yn[1], p, inv);
            if (Fn >= V0 + params.abs_tol)
                throw NumericalError("energy left the initial level set: integration diverged");
            t = t_new;
            y = yn;
            k1 = k7;
            etas.push_back(t);
            ws.push_back(y[0]);
            wps.push_back(y[1]);
            wpps.push_back(k7[1]);
            ++steps;
            if (Fn <= F_quiet) break;
        }
        const double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
        h *= err <= 1.0 ? std::clamp(fac, 0.2, 5.0) : std::clamp(fac, 0.2, 1.0);
        if (h < 16.0 * ulp(t)) throw NumericalError("step size underflow");
    }
    const double F_end = std::max(detail::V(y[0], y[1], p, inv), 0.0);
    return SolutionTrace(params, MethodTag::rk_continuation, std::move(etas), std::move(ws), std::move(wps),
                         std::move(wpps), std::move(zeros), F_end);
}

// ---------------------------------------------------------------- oracles

std::vector<double> derivative_oracle(const SolutionTrace& trace, const std::vector<double>& query) {
    const Params& P = trace.params();
    const double p = P.p, inv = 1.0 / (1.0 - p);
    const int n = P.n;
    for (double q : query)
        if (!(q > 0.0) || q > trace.eta_max()) throw RangeError("oracle point outside (0, eta_max]");
    std::vector<std::size_t> order(query.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return query[a] < query[b]; });
    std::vector<double> out(query.size(), 0.0);
    if (query.empty()) return out;

    const auto& et = trace.etas();
    const double horizon = trace.resolved_until();
    // J(b) from J(a): J(a)(a/b)^{n-1} e^{(a^2-b^2)/4} + int_a^b H(w(s)) (s/b)^{n-1} e^{(s^2-b^2)/4} ds
    auto advance = [&](double Ja, double a, double b, std::size_t iv, bool resolved) {
        const double carry = a > 0.0 ? Ja * ipow(a / b, n - 1) * std::exp(0.25 * (a - b) * (a + b)) : 0.0;
        if (!resolved) return carry;
        auto g = [&](double s) {
            const double w = trace.eval_on(iv, s).w;
            return detail::H(w, p, inv) * ipow(s / b, n - 1) * std::exp(0.25 * (s - b) * (s + b));
        };
        const auto r = integrate_gk(g, a, b, 1e-16 + 1e-14 * (b - a), 1e-13);
        if (!r.converged) throw NumericalError("oracle quadrature did not converge");
        return carry + r.value;
    };

    double Ja = 0.0, a = 0.0;
    std::size_t k = 0;
    std::size_t iv = 0;
    while (k < order.size()) {
        const double qk = query[order[k]];
        const bool resolved = a < horizon;
        double b;
        if (resolved) {
            while (iv + 1 < et.size() - 1 && et[iv + 1] <= a) ++iv;
            b = et[iv + 1];
        } else {
            b = std::min(trace.eta_max(), a + 0.5);
        }
        if (qk <= b) {
            out[order[k]] = advance(Ja, a, qk, iv, resolved);
            ++k;
            continue;
        }
        Ja = advance(Ja, a, b, iv, resolved);
        a = b;
    }
    return out;
}

double derivative_oracle(const SolutionTrace& trace, double eta) {
    return derivative_oracle(trace, std::vector<double>{eta}).front();
}

double residual(const SolutionTrace& trace, const std::vector<double>& check_etas) {
    if (check_etas.empty()) return 0.0;
    const Params& P = trace.params();
    const double p = P.p, inv = 1.0 / (1.0 - p);
    double top = 0.0;
    for (double c : check_etas) {
        if (!(c > 0.0) || c > trace.eta_max()) throw RangeError("check point outside (0, eta_max]");
        top = std::max(top, c);
    }
    std::vector<double> bounds;
    for (double x : trace.etas())
        if (x <= top) bounds.push_back(x);
    for (double c : check_etas) bounds.push_back(c);
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
    // Keep panels short so the scaled exponentials stay representable.
    std::vector<double> panels{bounds.front()};
    for (std::size_t i = 1; i < bounds.size(); ++i) {
        const double a = panels.back(), b = bounds[i];
        const int pieces = static_cast<int>(std::ceil((b - a) / 0.5));
        for (int j = 1; j < pieces; ++j) panels.push_back(a + (b - a) * j / pieces);
        panels.push_back(b);
    }
    const GaussLegendre gl(kPanelOrder);
    const int q = gl.size();
    std::vector<double> Hv((panels.size() - 1) * q);
    for (std::size_t k = 0; k + 1 < panels.size(); ++k) {
        const double a = panels[k], b = panels[k + 1];
        const std::size_t iv = trace.interval(0.5 * (a + b));
        for (int i = 0; i < q; ++i) {
            const double s = a + 0.5 * (b - a) * (gl.x[i] + 1.0);
            const double w = s > trace.resolved_until() ? 0.0 : trace.eval_on(iv, s).w;
            Hv[k * q + i] = detail::H(w, p, inv);
        }
    }
    PanelSweep sweep{gl, P.n, P.alpha, {}, {}, {}, {}};
    sweep.run(panels, Hv);
    double worst = 0.0;
    for (double c : check_etas) {
        const auto it = std::lower_bound(panels.begin() + 1, panels.end(), c);
        const std::size_t k = static_cast<std::size_t>(it - panels.begin()) - 1;
        worst = std::max(worst, std::fabs(trace.eval_w(c) - sweep.end_T[k]));
    }
    return worst;
}

}  // namespace blowup
