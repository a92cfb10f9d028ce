#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "blowup/model.hpp"

namespace blowup {

enum class MethodTag { picard, rk_continuation, constant };

/// Reading of the transversal-crossing window. `offset` treats the first
/// three entries as increments above the crossing point, `literal` uses
/// them as printed.
enum class WindowMode { offset, literal };

std::string to_string(MethodTag tag);
std::string to_string(WindowMode mode);
WindowMode parse_window_mode(const std::string& s);

/// Length of the window after a zero at eta_bar with slope beta over which
/// the slope stays within [beta/2, beta].
double crossing_window(double eta_bar, double beta, double p, int n, WindowMode mode = WindowMode::offset);

struct IntegratorOptions {
    /// Accepted-step budget. The profile's zeros accumulate very quickly in
    /// the far tail, so every run is bounded.
    std::size_t max_steps = 2'000'000;
    /// Stop once the energy certifies |w'| below this amplitude.
    double resolution_floor = 1e-30;
    WindowMode window_mode = WindowMode::offset;
    double window_cap_fraction = 1e-2;
};

struct ZeroEvent {
    double eta;
    double slope;
};

/// Sampled profile with a piecewise quintic Hermite interpolant.
///
/// Samples cover [0, resolved_until()]. Past that point the energy
/// F = V(w, w') is below tail_energy(), so |w'| <= tail_wp_bound() and
/// |w| <= tail_w_bound() up to eta_max; eval() returns (0, 0) there.
class SolutionTrace {
public:
    SolutionTrace(Params params, MethodTag method, std::vector<double> etas, std::vector<double> ws,
                  std::vector<double> wps, std::vector<double> wpps, std::vector<ZeroEvent> zeros = {},
                  double tail_energy = 0.0);

    const Params& params() const { return params_; }
    MethodTag method() const { return method_; }
    const std::vector<double>& etas() const { return etas_; }
    const std::vector<double>& ws() const { return ws_; }
    const std::vector<double>& wps() const { return wps_; }
    const std::vector<double>& wpps() const { return wpps_; }
    const std::vector<ZeroEvent>& zeros() const { return zeros_; }
    std::size_t size() const { return etas_.size(); }

    double eta_max() const { return params_.eta_max; }
    double resolved_until() const { return etas_.back(); }
    bool fully_resolved() const { return etas_.back() >= params_.eta_max; }
    double tail_energy() const { return tail_energy_; }
    double tail_w_bound() const;
    double tail_wp_bound() const;

    /// Throws RangeError outside [0, eta_max].
    PhasePoint eval(double eta) const;
    double eval_w(double eta) const { return eval(eta).w; }

    /// Index i with etas[i] <= eta < etas[i+1] (clamped).
    std::size_t interval(double eta) const;
    /// Interpolant on interval i without range checks.
    PhasePoint eval_on(std::size_t i, double eta) const;

    SolutionTrace negated() const;

private:
    Params params_;
    MethodTag method_;
    std::vector<double> etas_, ws_, wps_, wpps_;
    std::vector<ZeroEvent> zeros_;
    double tail_energy_;
};

struct LocalTrace {
    Params params;
    MethodTag method = MethodTag::picard;
    double epsilon = 0.0;
    std::vector<double> etas, ws, wps;
    int iterations = 0;
    std::vector<double> contraction_ratios;
};

double local_epsilon(double alpha, double p);

/// Fixed-point iteration of the integral operator on [0, local_epsilon]
/// with `quad_points` Gauss-Legendre panels.
LocalTrace picard_solve(const Params& params, int quad_points);

/// Same iteration on a caller-chosen interval [0, eps]; only requires
/// 0 <= alpha <= e.
LocalTrace picard_solve_on(const Params& params, double eps, int quad_points);

PhasePoint rhs(PhasePoint pt, double eta, const Params& params);

SolutionTrace integrate(const Params& params, const IntegratorOptions& opts = {});

/// w'(eta) recomputed from the integral form using only the trace's w.
double derivative_oracle(const SolutionTrace& trace, double eta);
/// Batched version; one sweep over the trace.
std::vector<double> derivative_oracle(const SolutionTrace& trace, const std::vector<double>& etas);

/// max over check_etas of |w - T[w]|.
double residual(const SolutionTrace& trace, const std::vector<double>& check_etas);

}  // namespace blowup
