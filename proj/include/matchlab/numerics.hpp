#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace matchlab {

struct Quadrature {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre rule, nodes by Newton iteration on P_n.
Quadrature gauss_legendre(int n);

// integral of f over [a, b] with an n-point Gauss-Legendre rule.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int n = 32);

// integral of f over [a, b] split into geometrically growing panels
// (ratio 2), n-point Gauss-Legendre on each. Suited to ~1/s integrands.
double integrate_log_panels(const std::function<double(double)>& f, double a, double b,
                            int points_per_panel = 24);

// Wilson score interval for a binomial proportion at ~95% (z = 1.96).
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials);

// mean and standard error of a sample
std::pair<double, double> mean_se(const std::vector<double>& xs);

}  // namespace matchlab
