#pragma once

#include <cmath>

namespace blowup {

/// Problem parameters and solver tolerances for one run.
struct Params {
    double p = 0.5;
    int n = 3;
    double alpha = 0.2;
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    double eta_max = 50.0;
};

struct PhasePoint {
    double w = 0.0;
    double wp = 0.0;
};

struct EnergyConstants {
    double m_h;        // min of H on [0, e]
    double M_h;        // max of |H| on [0, e]
    double c_star;     // V(e, 0)
    double w_min_arg;  // argmin of H
};

/// Throws ParameterError unless 0 < p < 1.
void check_exponent(double p);

/// Throws ParameterError on any invariant violation. Negative alpha is
/// accepted (odd extension); only |alpha| is bounded by the equilibrium.
void validate(const Params& params);

double eval_H(double w, double p);
double equilibrium_amplitude(double p);
EnergyConstants energy_constants(double p);
double eval_V(double w, double wp, double p);

/// V(w, 0).
double potential(double w, double p);

/// Unique root of potential(w) = c on [0, e] for 0 <= c <= c_star.
double level_half_width(double c, double p);

bool in_omega(PhasePoint pt, double c, double p);

namespace detail {

// Unchecked kernels for inner loops; callers validate p once.
inline double H(double w, double p, double inv_1mp) {
    if (w == 0.0) return 0.0;
    return w * inv_1mp - std::copysign(std::pow(std::fabs(w), p), w);
}

inline double dH(double w, double p, double inv_1mp) {
    return inv_1mp - p * std::pow(std::fabs(w), p - 1.0);
}

inline double V(double w, double wp, double p, double inv_1mp) {
    const double a = std::fabs(w);
    return 0.5 * wp * wp - 0.5 * w * w * inv_1mp + std::pow(a, 1.0 + p) / (1.0 + p);
}

}  // namespace detail

}  // namespace blowup
