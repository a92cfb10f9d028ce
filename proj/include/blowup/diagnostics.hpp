#pragma once

#include <cstddef>
#include <vector>

#include "blowup/ivp.hpp"
#include "blowup/report.hpp"

namespace blowup {

struct EnergyTrace {
    std::vector<double> etas;
    std::vector<double> F;
    double F_inf_estimate = 0.0;  // mean over the last 10% of samples
    double max_increase = 0.0;    // largest F[i+1] - F[i]
    double min_value = 0.0;
    /// max |FD F' - closed form| / max |closed form| over interior nodes
    double derivative_mismatch = 0.0;
};

EnergyTrace energy_trace(const SolutionTrace& trace);

/// Non-increase within 10 abs_tol and F in [0, V(alpha, 0)) for eta > 0.
CheckReport energy_report(const EnergyTrace& et, const SolutionTrace& trace);

struct TailBound {
    bool found = false;
    double eta_alpha = 0.0;        // first sample after which |w'| eta <= 4 M_H
    double max_scaled_wp = 0.0;    // max |w'| eta over the whole trace
    double sup_factor = 0.0;       // sup_s s^a e^{-3 s^2 / 16}
    double all_eta_constant = 0.0; // (M_H/2) sup_factor + 4 (1-p)^{p/(1-p)}
    bool all_eta_ok = false;
};

/// Closed form of sup_{s>0} s^a e^{-3 s^2/16} with a = 2p/(1-p) + 2.
double decay_sup_factor(double p);

TailBound tail_bound(const SolutionTrace& trace);
CheckReport tail_bound_report(const SolutionTrace& trace, double eta_alpha_limit = 20.0);

struct ZeroRecord {
    double eta_zero;
    double slope;
    double window;
};

struct ZeroCensus {
    std::vector<ZeroRecord> records;
    std::vector<double> slope_floors;  // per record
    std::size_t floor_violations = 0;
    bool alternating = true;
};

/// Strict sign changes of w between samples, refined on the cubic Hermite
/// interpolant. The slope floor of each zero is 1e-6 times the largest |w'|
/// over the preceding half oscillation.
ZeroCensus zero_census(const SolutionTrace& trace, WindowMode mode = WindowMode::offset);
CheckReport census_report(const ZeroCensus& census, const SolutionTrace& trace, std::size_t min_zeros = 3);

struct DecayFit {
    double eta_lo = 0.0, eta_hi = 0.0;
    double exponent = 0.0;
    double constant = 0.0;
    std::size_t peak_count = 0;
    double wp_exponent = 0.0;
    double wp_constant = 0.0;
    std::size_t wp_peak_count = 0;
    double covered_until = 0.0;         // last eta with resolved samples in the window
    double conjectured_constant = 0.0;  // 16^{1/(1-p)}, reported only
};

/// Log-log least squares of the |w| peak envelope over [eta_lo, eta_hi].
DecayFit decay_fit(const SolutionTrace& trace, double eta_lo, double eta_hi);
CheckReport decay_report(const DecayFit& fit, const SolutionTrace& trace, double slack = 0.5);

std::vector<double> sigma_sequence(double p, int M);
double sigma_closed_form(double p, int m);
double sigma_limit(double p);

struct ContinuityRow {
    double delta;
    double distance;
};

struct ContinuityTable {
    std::vector<ContinuityRow> rows;
    double eta1 = 0.0;
    double tail_envelope = 0.0;  // largest certified tail bound among the runs
};

/// Integrates at alpha and alpha + delta for each delta; `base` supplies
/// p, n, alpha, eta_max and tolerances.
ContinuityTable continuity_experiment(const Params& base, const std::vector<double>& deltas,
                                      const IntegratorOptions& opts = {});
/// sup over the union of both sample sets of max(|w1 - w2|, |w1' - w2'|).
double trace_distance(const SolutionTrace& a, const SolutionTrace& b);
CheckReport continuity_report(const ContinuityTable& table, const Params& base, double final_limit = 1e-3);

}  // namespace blowup
