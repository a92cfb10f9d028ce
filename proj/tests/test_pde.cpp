#include <cmath>

#include "doctest.h"

#include "blowup/diagnostics.hpp"
#include "blowup/errors.hpp"
#include "blowup/pde.hpp"

using namespace blowup;

namespace {

Params reference_params() {
    Params P;
    P.p = 0.5;
    P.n = 3;
    P.alpha = 0.2;
    P.eta_max = 50.0;
    return P;
}

const SolutionTrace& reference_trace() {
    static const SolutionTrace tr = integrate(reference_params());
    return tr;
}

SolutionTrace constant_trace(double alpha) {
    Params P = reference_params();
    P.alpha = alpha;
    return integrate(P);
}

ZeroMask mask_for(const SolutionTrace& tr, double half_width) {
    ZeroMask m;
    for (const auto& z : tr.zeros()) m.eta_zeros.push_back(z.eta);
    m.half_width = half_width;
    return m;
}

}  // namespace

TEST_CASE("linspace") {
    const auto x = linspace(0.0, 1.0, 5);
    REQUIRE(x.size() == 5);
    CHECK(x.front() == 0.0);
    CHECK(x.back() == 1.0);
    CHECK(x[2] == 0.5);
}

TEST_CASE("reconstruct trivial profiles") {
    const auto r = linspace(0.0, 5.0, 21), t = linspace(0.0, 1.0, 11);
    const auto z = reconstruct(constant_trace(0.0), r, t, 0.0);
    for (double u : z.u) CHECK(u == 0.0);
    CHECK(pde_residual(z).max == 0.0);
    const auto a0 = apriori_check(z);
    CHECK(a0.pass);
    CHECK(a0.measured == doctest::Approx(0.0));  // bound is 0 at t = 0

    const double e = equilibrium_amplitude(0.5);
    const auto c = reconstruct(constant_trace(e), linspace(0.0, 5.0, 21), linspace(0.5, 1.0, 11), 0.0);
    for (std::size_t it = 0; it < c.nt(); ++it)
        for (std::size_t ir = 0; ir < c.nr(); ++ir)
            CHECK(c.at(it, ir) == doctest::Approx(maximal_solution(c.t[it], 0.0, 0.5)).epsilon(1e-14));
    const auto ac = apriori_check(c);
    CHECK(ac.pass);
    CHECK(std::fabs(ac.measured) < 1e-14);
}

TEST_CASE("maximal solution residual is time truncation only") {
    // exact homogeneous solution: spatial terms vanish, u_t is differenced
    const auto r = linspace(0.0, 5.0, 11);
    const auto half = constant_trace(equilibrium_amplitude(0.5));
    // ((1-p) s)^2 with p = 1/2 is quadratic in s: second-order differences are exact
    CHECK(pde_residual(reconstruct(half, r, linspace(0.0, 1.0, 21), 1.0)).max < 1e-12);

    Params P = reference_params();
    P.p = 0.25;
    P.alpha = equilibrium_amplitude(P.p);
    const auto quarter = integrate(P);
    const auto coarse = pde_residual(reconstruct(quarter, r, linspace(0.0, 1.0, 21), 1.0));
    const auto fine = pde_residual(reconstruct(quarter, r, linspace(0.0, 1.0, 41), 1.0));
    CHECK(coarse.max < 1e-3);
    CHECK(coarse.max / fine.max == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("reconstruct reference profile") {
    const auto& tr = reference_trace();
    const auto r = linspace(0.0, 10.0, 101), t = linspace(0.0, 1.0, 101);
    const auto f0 = reconstruct(tr, r, linspace(0.0, 1.0, 11), 0.0);
    // u(0, 1) = w(0)
    CHECK(f0.at(10, 0) == doctest::Approx(0.2).epsilon(1e-15));
    for (std::size_t ir = 0; ir < f0.nr(); ++ir) CHECK(f0.at(0, ir) == 0.0);

    const auto f = reconstruct(tr, r, t, 1.0);
    CHECK(apriori_check(f).pass);
    CHECK(two_signed_rows(f) == f.nt());
    // u(r, t) = w(r / sqrt(s)) s^2 with s = t + 1
    CHECK(f.at(50, 30) == doctest::Approx(tr.eval(3.0 / std::sqrt(1.5)).w * 1.5 * 1.5).epsilon(1e-14));

    const auto neg = reconstruct(tr.negated(), r, t, 1.0);
    for (std::size_t i = 0; i < f.u.size(); ++i) REQUIRE(neg.u[i] == -f.u[i]);

    // the profile is outside the trace range for small s
    CHECK_THROWS_AS(reconstruct(tr, linspace(0.0, 10.0, 11), linspace(0.001, 1.0, 5), 0.0), RangeError);
}

TEST_CASE("residual refinement away from zeros") {
    const auto& tr = reference_trace();
    const auto mask = mask_for(tr, 0.25);
    const auto coarse = reconstruct(tr, linspace(0.0, 10.0, 101), linspace(0.0, 1.0, 101), 1.0);
    const auto fine = reconstruct(tr, linspace(0.0, 10.0, 201), linspace(0.0, 1.0, 201), 1.0);
    const auto a = pde_residual(coarse, &mask), b = pde_residual(fine, &mask);
    CHECK(a.nodes > 0);
    CHECK(a.max / b.max >= 3.0);
    CHECK(a.max / b.max <= 5.0);
}

TEST_CASE("literal global form fails the equation") {
    const auto& tr = reference_trace();
    const auto mask = mask_for(tr, 0.25);
    const auto r = linspace(0.0, 10.0, 201), t = linspace(0.0, 1.0, 201);
    const auto shifted = pde_residual(reconstruct(tr, r, t, 1.0), &mask);
    const auto literal = pde_residual(reconstruct(tr, r, t, 1.0, GlobalForm::literal), &mask);
    CHECK(literal.max > 100.0 * shifted.max);
}

TEST_CASE("grid errors") {
    const auto& tr = reference_trace();
    CHECK_THROWS_AS(pde_residual(reconstruct(tr, linspace(0.0, 1.0, 2), linspace(0.0, 1.0, 5), 1.0)), GridError);
    CHECK_THROWS_AS(pde_residual(reconstruct(tr, linspace(0.0, 1.0, 5), linspace(0.0, 1.0, 2), 1.0)), GridError);
}

TEST_CASE("radial Lq norm is stable under refinement") {
    const auto& tr = reference_trace();
    // q above (1 - p) n / 2 = 3/4
    const double q = 2.0;
    const auto a = reconstruct(tr, linspace(0.0, 40.0, 2001), {0.0, 1.0}, 1.0);
    const auto b = reconstruct(tr, linspace(0.0, 40.0, 4001), {0.0, 1.0}, 1.0);
    const double na = radial_lq_norm(a, 1, q), nb = radial_lq_norm(b, 1, q);
    CHECK(std::isfinite(na));
    CHECK(na > 0.0);
    CHECK(std::fabs(na - nb) < 1e-3 * nb);
}
