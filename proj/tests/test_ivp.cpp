#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"

#include "blowup/errors.hpp"
#include "blowup/ivp.hpp"
#include "blowup/quadrature.hpp"

using namespace blowup;

namespace {

Params reference_params() {
    Params P;
    P.p = 0.5;
    P.n = 3;
    P.alpha = 0.2;
    P.rel_tol = 1e-8;
    P.eta_max = 50.0;
    return P;
}

const SolutionTrace& reference_trace() {
    static const SolutionTrace tr = integrate(reference_params());
    return tr;
}

}  // namespace

TEST_CASE("local epsilon") {
    CHECK(local_epsilon(0.125, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(local_epsilon(1e-12, 0.5) < local_epsilon(1e-6, 0.5));
    CHECK(local_epsilon(1e-24, 0.5) < 1e-5);
    CHECK_THROWS_AS(local_epsilon(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(local_epsilon(0.25, 0.5), DomainError);
    CHECK_THROWS_AS(local_epsilon(0.3, 0.5), DomainError);
}

TEST_CASE("picard solve on the contraction set") {
    Params P = reference_params();
    P.alpha = 0.125;
    const auto lt = picard_solve(P, 16);
    CHECK(lt.method == MethodTag::picard);
    CHECK(lt.epsilon == doctest::Approx(0.5));
    REQUIRE(!lt.contraction_ratios.empty());
    for (double r : lt.contraction_ratios) CHECK(r <= 0.5 + P.abs_tol);
    for (double w : lt.ws) {
        CHECK(w >= P.alpha / 2.0);
        CHECK(w <= 1.5 * P.alpha);
    }
    CHECK(lt.ws.front() == P.alpha);
    CHECK(lt.wps.front() == 0.0);

    // agreement with the continuation solver at the end of the interval
    const auto tr = integrate(P);
    const auto end = tr.eval(lt.epsilon);
    CHECK(std::fabs(lt.ws.back() - end.w) < 1e-9);
    CHECK(std::fabs(lt.wps.back() - end.wp) < 1e-9);
}

TEST_CASE("picard solve at the equilibrium is the identity") {
    Params P = reference_params();
    P.alpha = equilibrium_amplitude(P.p);
    const auto lt = picard_solve_on(P, 0.5, 16);
    CHECK(lt.iterations == 1);
    for (double w : lt.ws) CHECK(w == doctest::Approx(P.alpha).epsilon(1e-14));
    CHECK_THROWS_AS(picard_solve(P, 16), DomainError);
}

TEST_CASE("rhs") {
    const Params P = reference_params();
    const auto a = rhs({P.alpha, 0.0}, 0.0, P);
    CHECK(a.w == 0.0);
    CHECK(a.wp == doctest::Approx(eval_H(P.alpha, P.p) / P.n).epsilon(1e-15));
    const double e = equilibrium_amplitude(P.p);
    const auto b = rhs({e, 0.0}, 3.7, P);
    CHECK(b.w == 0.0);
    CHECK(std::fabs(b.wp) < 1e-15);
    const auto c = rhs({0.0, 0.3}, 2.0, P);
    CHECK(c.w == 0.3);
    CHECK(c.wp == doctest::Approx(-(2.0 / 2.0 + 1.0) * 0.3).epsilon(1e-15));
    CHECK_THROWS_AS(rhs({0.1, 0.2}, 0.0, P), DomainError);
}

TEST_CASE("crossing window") {
    const double p = 0.5;
    const double mh = -1.0 / 8.0;
    // small slope: the |beta| / (4 |m_H|) entry is binding
    const double eta_bar = 5.0, beta = 1e-3;
    const double expected = beta / (4.0 * std::fabs(mh));
    CHECK(crossing_window(eta_bar, beta, p, 3) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(crossing_window(eta_bar, -beta, p, 3) == doctest::Approx(expected).epsilon(1e-12));
    // literal reading adds eta_bar back to the first three entries
    CHECK(crossing_window(eta_bar, beta, p, 3, WindowMode::literal) ==
          doctest::Approx(std::min(eta_bar + expected, 0.25 / beta)).epsilon(1e-12));
    // large slope: e / |beta| wins
    CHECK(crossing_window(3.0, 10.0, p, 3) == doctest::Approx(0.025).epsilon(1e-12));
    // n = 1 drops the first entry
    const double w1 = crossing_window(1.0, 0.5, p, 1);
    const double second = std::sqrt(1.0 - 4.0 * std::log(6.0 / 7.0)) - 1.0;
    CHECK(w1 == doctest::Approx(std::min({second, 0.5 / (4.0 * 0.125), 0.25 / 0.5})).epsilon(1e-12));
    const double w3 = crossing_window(1.0, 0.5, p, 3);
    CHECK(w3 == doctest::Approx(std::min(w1, std::sqrt(8.0 / 7.0) - 1.0)).epsilon(1e-12));
    CHECK(parse_window_mode("literal") == WindowMode::literal);
    CHECK(parse_window_mode("offset") == WindowMode::offset);
    CHECK_THROWS_AS(parse_window_mode("other"), ParameterError);
}

TEST_CASE("integrate trivial amplitudes") {
    Params P = reference_params();
    P.alpha = 0.0;
    const auto z = integrate(P);
    CHECK(z.method() == MethodTag::constant);
    for (double eta : {0.0, 1.0, 17.5, 50.0}) {
        CHECK(z.eval(eta).w == 0.0);
        CHECK(z.eval(eta).wp == 0.0);
    }
    P.alpha = equilibrium_amplitude(P.p);
    const auto c = integrate(P);
    for (double eta : {0.0, 3.0, 50.0}) CHECK(c.eval(eta).w == P.alpha);
    CHECK(residual(z, {1.0, 5.0, 10.0}) == 0.0);
    CHECK(residual(c, {1.0, 5.0, 10.0}) < 1e-14);
    CHECK(derivative_oracle(c, 4.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_THROWS_AS(z.eval(50.5), RangeError);
    CHECK_THROWS_AS(z.eval(-1e-3), RangeError);
}

TEST_CASE("reference trace invariants") {
    const auto& tr = reference_trace();
    const Params& P = tr.params();
    const double e = equilibrium_amplitude(P.p);
    const double V0 = eval_V(P.alpha, 0.0, P.p);
    CHECK(tr.method() == MethodTag::rk_continuation);
    CHECK(tr.ws()[0] == P.alpha);
    CHECK(tr.wps()[0] == 0.0);
    for (std::size_t i = 1; i < tr.size(); ++i) {
        REQUIRE(tr.etas()[i] > tr.etas()[i - 1]);
        REQUIRE(std::fabs(tr.ws()[i]) <= e);
        REQUIRE(eval_V(tr.ws()[i], tr.wps()[i], P.p) < V0);
        REQUIRE(in_omega({tr.ws()[i], tr.wps()[i]}, V0, P.p));
    }
    const auto end = tr.eval(50.0);
    CHECK(std::fabs(end.w) < 1e-2);
    CHECK(std::fabs(end.wp) < 1e-2);
    if (!tr.fully_resolved()) {
        CHECK(tr.tail_w_bound() < 1e-2);
        CHECK(tr.tail_wp_bound() < 1e-2);
    }
    CHECK(tr.zeros().size() >= 3);
}

TEST_CASE("oracle agreement and integral residual") {
    const auto& tr = reference_trace();
    const double rel_tol = tr.params().rel_tol;
    const double w5 = tr.eval(5.0).wp;
    CHECK(std::fabs(derivative_oracle(tr, 5.0) - w5) <= 10.0 * rel_tol * std::max(1.0, std::fabs(w5)));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, tr.resolved_until());
    std::vector<double> q(20);
    for (auto& x : q) x = U(rng);
    const auto orc = derivative_oracle(tr, q);
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double wp = tr.eval(q[i]).wp;
        CHECK(std::fabs(orc[i] - wp) <= 10.0 * rel_tol * std::max(1.0, std::fabs(wp)));
    }
    CHECK(residual(tr, {1.0, 5.0, 10.0}) < 1e-6);

    // near the origin the oracle follows the series H(alpha) eta / n
    const double H0 = eval_H(0.2, 0.5);
    for (double eta : {1e-3, 1e-2}) {
        const double o = derivative_oracle(tr, eta);
        CHECK(std::fabs(o - H0 * eta / 3.0) < 10.0 * std::fabs(H0) * eta * eta * eta);
    }
}

TEST_CASE("odd symmetry") {
    Params P = reference_params();
    P.eta_max = 12.0;
    const auto a = integrate(P);
    P.alpha = -P.alpha;
    const auto b = integrate(P);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a.etas()[i] == b.etas()[i]);
        REQUIRE(std::fabs(a.ws()[i] + b.ws()[i]) <= P.abs_tol);
        REQUIRE(std::fabs(a.wps()[i] + b.wps()[i]) <= P.abs_tol);
    }
    const auto c = a.negated();
    CHECK(c.eval(3.3).w == -a.eval(3.3).w);
}

TEST_CASE("fourth order behaviour under tolerance halving") {
    Params P = reference_params();
    P.eta_max = 8.0;
    P.rel_tol = 1e-11;
    const double ref = integrate(P).eval(5.0).w;
    P.rel_tol = 1e-7;
    const double coarse = integrate(P).eval(5.0).w;
    P.rel_tol = 5e-8;
    const double fine = integrate(P).eval(5.0).w;
    const double fine_error = std::fabs(fine - ref);
    CHECK(std::fabs(coarse - fine) < 16.0 * std::max(fine_error, 1e-14));
}

TEST_CASE("dense output accuracy between samples") {
    const auto& tr = reference_trace();
    Params P = tr.params();
    P.eta_max = 6.0;
    P.rel_tol = 1e-12;
    const auto fine = integrate(P);
    double worst = 0.0;
    for (double eta = 0.05; eta < 6.0; eta += 0.0731)
        worst = std::max(worst, std::fabs(tr.eval(eta).w - fine.eval(eta).w));
    CHECK(worst < 1e-7);
}

TEST_CASE("watson asymptote") {
    for (int n : {1, 2, 3}) {
        const double eta = 20.0;
        // scaled integrand keeps the exponential in range
        auto f = [&](double s) { return std::exp((s * s - eta * eta) / 4.0) * std::pow(s, n - 1); };
        const auto q = integrate_gk(f, 0.0, eta, 1e-14, 1e-12);
        REQUIRE(q.converged);
        const double ratio = q.value / (2.0 * std::pow(eta, n - 2));
        CHECK(std::fabs(ratio - 1.0) < 0.02);
    }
}

TEST_CASE("step budget exhaustion leaves a certified tail") {
    Params P = reference_params();
    IntegratorOptions o;
    o.max_steps = 2000;
    const auto tr = integrate(P, o);
    CHECK_FALSE(tr.fully_resolved());
    CHECK(tr.resolved_until() < P.eta_max);
    const auto last = tr.eval(tr.resolved_until());
    const double F = eval_V(last.w, last.wp, P.p);
    CHECK(tr.tail_wp_bound() >= std::sqrt(2.0 * F) * (1.0 - 1e-12));
    CHECK(tr.tail_w_bound() >= std::fabs(last.w) * (1.0 - 1e-12));
}
