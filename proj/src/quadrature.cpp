#include "blowup/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "blowup/errors.hpp"

namespace blowup {

namespace {

// P_0..P_{k} at x
void legendre_all(int k, double x, std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(k) + 1, 0.0);
    out[0] = 1.0;
    if (k >= 1) out[1] = x;
    for (int j = 2; j <= k; ++j) out[j] = ((2.0 * j - 1.0) * x * out[j - 1] - (j - 1.0) * out[j - 2]) / j;
}

}  // namespace

GaussLegendre::GaussLegendre(int q) {
    if (q < 1) throw ParameterError("Gauss-Legendre order must be positive");
    x.resize(q);
    w.resize(q);
    for (int i = 0; i < q; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int j = 2; j <= q; ++j) {
                const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            if (q == 1) {
                p1 = z;
                p0 = 1.0;
            }
            dp = q * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::fabs(dz) < 1e-16) break;
        }
        x[q - 1 - i] = z;
        w[q - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }

    // Lagrange basis in Legendre coefficients: c_ki = w_i P_k(x_i) (2k+1)/2.
    // Antiderivative from -1: int P_0 = x + 1, int P_k = (P_{k+1} - P_{k-1})/(2k+1).
    cumulative.assign(static_cast<std::size_t>(q) * q, 0.0);
    std::vector<std::vector<double>> Pn(q);
    for (int i = 0; i < q; ++i) legendre_all(q, x[i], Pn[i]);
    for (int j = 0; j < q; ++j) {
        std::vector<double> anti(q);
        anti[0] = x[j] + 1.0;
        for (int k = 1; k < q; ++k) anti[k] = (Pn[j][k + 1] - Pn[j][k - 1]) / (2.0 * k + 1.0);
        for (int i = 0; i < q; ++i) {
            double s = 0.0;
            for (int k = 0; k < q; ++k) s += w[i] * Pn[i][k] * (2.0 * k + 1.0) / 2.0 * anti[k];
            cumulative[static_cast<std::size_t>(j) * q + i] = s;
        }
    }
}

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

void gk15(const std::function<double(double)>& f, double a, double b, double& val, double& err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double rk = fc * kWgk[7];
    double rg = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double s = f(c - dx) + f(c + dx);
        rk += kWgk[j] * s;
        if (j % 2 == 1) rg += kWg[j / 2] * s;
    }
    val = rk * h;
    err = std::fabs((rk - rg) * h);
}

void gk_rec(const std::function<double(double)>& f, double a, double b, double tol, int depth, QuadResult& acc) {
    double v, e;
    gk15(f, a, b, v, e);
    if (e <= tol || depth <= 0 || b - a <= 8.0 * std::numeric_limits<double>::epsilon() * std::fabs(b)) {
        acc.value += v;
        acc.error += e;
        return;
    }
    const double m = 0.5 * (a + b);
    gk_rec(f, a, m, 0.5 * tol, depth - 1, acc);
    gk_rec(f, m, b, 0.5 * tol, depth - 1, acc);
}

}  // namespace

QuadResult integrate_gk(const std::function<double(double)>& f, double a, double b, double abs_tol, double rel_tol,
                        int max_depth) {
    QuadResult r{0.0, 0.0, true};
    if (b == a) return r;
    double v, e;
    gk15(f, a, b, v, e);
    const double tol = std::max(abs_tol, rel_tol * std::fabs(v));
    if (e <= tol) return {v, e, true};
    gk_rec(f, a, b, tol, max_depth, r);
    r.converged = r.error <= tol;
    return r;
}

}  // namespace blowup
