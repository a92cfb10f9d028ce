#include "blowup/model.hpp"

#include <string>

#include "blowup/errors.hpp"

namespace blowup {

void check_exponent(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ParameterError("p must lie in (0,1), got " + std::to_string(p));
}

void validate(const Params& params) {
    check_exponent(params.p);
    if (params.n < 1) throw ParameterError("n must be >= 1");
    if (!std::isfinite(params.alpha)) throw ParameterError("alpha must be finite");
    const double e = equilibrium_amplitude(params.p);
    if (std::fabs(params.alpha) > e)
        throw ParameterError("|alpha| exceeds the equilibrium amplitude " + std::to_string(e));
    if (!(params.rel_tol > 0.0) || !(params.abs_tol > 0.0))
        throw ParameterError("tolerances must be positive");
    if (!(params.eta_max > 0.0) || !std::isfinite(params.eta_max))
        throw ParameterError("eta_max must be positive");
}

double eval_H(double w, double p) {
    check_exponent(p);
    return detail::H(w, p, 1.0 / (1.0 - p));
}

double equilibrium_amplitude(double p) {
    check_exponent(p);
    return std::exp(std::log1p(-p) / (1.0 - p));
}

EnergyConstants energy_constants(double p) {
    check_exponent(p);
    const double w_star = std::exp(std::log(p * (1.0 - p)) / (1.0 - p));
    const double m = detail::H(w_star, p, 1.0 / (1.0 - p));
    const double c_star = std::exp(2.0 * std::log1p(-p) / (1.0 - p)) / (2.0 * (1.0 + p));
    return {m, std::fabs(m), c_star, w_star};
}

double eval_V(double w, double wp, double p) {
    check_exponent(p);
    return detail::V(w, wp, p, 1.0 / (1.0 - p));
}

double potential(double w, double p) { return eval_V(w, 0.0, p); }

double level_half_width(double c, double p) {
    const auto k = energy_constants(p);
    if (!(c >= 0.0 && c <= k.c_star)) throw ParameterError("level outside [0, c_star]");
    const double e = equilibrium_amplitude(p);
    if (c == k.c_star) return e;
    // potential is increasing on [0, e]
    double lo = 0.0, hi = e;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (potential(mid, p) < c)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

bool in_omega(PhasePoint pt, double c, double p) {
    const auto k = energy_constants(p);
    if (!(c >= 0.0 && c <= k.c_star)) throw ParameterError("level outside [0, c_star]");
    if (!(eval_V(pt.w, pt.wp, p) < c)) return false;
    return std::fabs(pt.w) < level_half_width(c, p);
}

}  // namespace blowup
