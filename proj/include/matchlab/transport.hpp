#pragma once

#include <functional>
#include <span>
#include <vector>

#include "matchlab/assignment.hpp"
#include "matchlab/geometry.hpp"
#include "matchlab/potential.hpp"

namespace matchlab {

// A permutation coupling two equal-size families. For solve_assignment the
// cost is the plain matrix total; for point-cloud couplings it is the mean
// squared distance (1/n) sum d(X_i, Y_sigma(i))^2, i.e. W_2^2.
struct Matching {
  std::vector<int> perm;
  double cost = 0.0;
};

// Exact minimum-cost assignment of a square matrix (row-major, n*n).
// Ties broken toward the lexicographically smallest permutation among
// swap-reachable optima.
Matching solve_assignment(std::span<const double> cost, std::size_t n);

// W_2^2 between the empirical measures of X and Y (|X| = |Y|).
Matching bipartite_cost(const Domain& domain, std::span<const Point> X,
                        std::span<const Point> Y);

// W_2^2 between (1/n) sum delta_X and (1/(qn)) sum delta_Y with |Y| = q|X|,
// computed exactly by replicating each X_i q times.
double replicated_cost(const Domain& domain, std::span<const Point> X,
                       std::span<const Point> Y, int q);

// Interpolation schedule theta: [0,1] -> [0,1], increasing, theta(0)=0,
// theta(1)=1.
struct FlowSchedule {
  std::function<double(double)> theta;
  std::function<double(double)> theta_prime;
  static FlowSchedule linear();     // theta(t) = t
  static FlowSchedule quadratic();  // theta(t) = 1 - (1-t)^2
};

// Upper bound on W_2^2(u0 m, u1 m):
//   integral of |grad f|^2 * (integral of theta'^2 / (u0(1-theta)+u1 theta) dt) dm
// with -lapl f = u1 - u0 (checked spectrally). Quadrature: regular grid of
// grid_points cells in space, Gauss-Legendre in time.
double bb_cost_bound(const PotentialField& f, const DensityField& u0,
                     const DensityField& u1, const FlowSchedule& schedule,
                     std::size_t grid_points, int time_quad = 32);

// One pathline of the interpolation vector field
// v_t = theta'(t) grad f / (u0 (1-theta) + u1 theta), integrated with a
// fixed-step 4th order scheme; action accumulates integral of |v_t|^2 dt.
struct FlowTrajectory {
  Point start;
  Point arrival;
  std::vector<Point> positions;  // steps + 1 entries
  double action = 0.0;
};

FlowTrajectory dm_flow_map(const PotentialField& f, const DensityField& u0,
                           const DensityField& u1, const FlowSchedule& schedule,
                           Point start, int steps);

// Push m quadrature points through exp(grad f) and price the coupling:
//   quadrature_cost  = (1/m) sum |grad f(g_j)|^2  (exact cost of the
//                      exponential coupling from the quadrature measure)
//   assignment_cost  = replicated matching cost of the pushed cloud
//                      against the target points (end-to-end surrogate)
struct ExpCouplingCost {
  double quadrature_cost = 0.0;
  double assignment_cost = 0.0;
};

ExpCouplingCost exp_pushforward_cost(const Domain& domain, const PotentialField& f,
                                     std::span<const Point> target, std::size_t m);

using VectorField = std::function<Vec2(Point)>;
using TimeVectorField = std::function<Vec2(double, Point)>;

// Distance between exp_p(X(p)) and the time-1 flow of Y_t from p, with the
// explicit flat-space budget 4 xi |X|(p) + 8 |grad X|_inf |X|(p).
// xi bounds the relative perturbation |Y_t - X| <= xi |X|.
struct FlowExpGap {
  double gap = 0.0;
  double budget = 0.0;
};

FlowExpGap flow_vs_exp_gap(const Domain& domain, const VectorField& X,
                           const TimeVectorField& Y, double grad_inf_norm, double xi,
                           Point p, int steps);

// ||d(f, g)||_{L^2} over paired images of the same quadrature points;
// dominates the empirical W_2 between the pushed clouds.
double pushforward_distance_bound(const Domain& domain, std::span<const Point> fx,
                                  std::span<const Point> gx);

}  // namespace matchlab
