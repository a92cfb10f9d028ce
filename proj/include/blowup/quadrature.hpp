#pragma once

#include <functional>
#include <vector>

namespace blowup {

/// Gauss-Legendre rule on [-1, 1] with its spectral integration matrix:
/// cumulative(j, i) = integral from -1 to x_j of the i-th Lagrange basis.
struct GaussLegendre {
    std::vector<double> x;
    std::vector<double> w;
    std::vector<double> cumulative;  // row-major q x q

    explicit GaussLegendre(int q);
    int size() const { return static_cast<int>(x.size()); }
    double cum(int j, int i) const { return cumulative[static_cast<std::size_t>(j) * x.size() + i]; }
};

struct QuadResult {
    double value;
    double error;
    bool converged;
};

/// Adaptive Gauss-Kronrod (7/15) on [a, b] with bisection.
QuadResult integrate_gk(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        double rel_tol, int max_depth = 50);

}  // namespace blowup
