#include "matchlab/transport.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "matchlab/numerics.hpp"

namespace matchlab {

namespace {

// big instances store squared distances as float to halve the footprint;
// totals are recomputed from the points in double afterwards
constexpr std::size_t kFloatMatrixThreshold = 3000;

template <class T>
Matching solve_points(const Domain& domain, std::span<const Point> rows_pts,
                      std::span<const Point> cols_pts, int rows_rep) {
  const std::size_t n = cols_pts.size();
  std::vector<T> m(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    const Point& x = rows_pts[r / rows_rep];
    for (std::size_t j = 0; j < n; ++j)
      m[r * n + j] = static_cast<T>(domain.distance2(x, cols_pts[j]));
  }
  auto cost = [&m, n](int i, int j) -> double { return m[static_cast<std::size_t>(i) * n + j]; };
  Matching match;
  lapjv(static_cast<int>(n), cost, match.perm);
  canonicalize_assignment(static_cast<int>(n), cost, match.perm);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    total += domain.distance2(rows_pts[r / rows_rep], cols_pts[match.perm[r]]);
  match.cost = total / static_cast<double>(n);
  return match;
}

}  // namespace

Matching solve_assignment(std::span<const double> cost, std::size_t n) {
  if (n == 0 || cost.size() != n * n)
    throw std::invalid_argument("solve_assignment: cost must be a square n*n matrix");
  for (double c : cost)
    if (!std::isfinite(c)) throw std::invalid_argument("solve_assignment: non-finite entry");
  auto at = [cost, n](int i, int j) -> double { return cost[static_cast<std::size_t>(i) * n + j]; };
  Matching match;
  match.cost = lapjv(static_cast<int>(n), at, match.perm);
  canonicalize_assignment(static_cast<int>(n), at, match.perm);
  return match;
}

Matching bipartite_cost(const Domain& domain, std::span<const Point> X,
                        std::span<const Point> Y) {
  if (X.empty() || X.size() != Y.size())
    throw std::invalid_argument("bipartite_cost: families must have equal size >= 1");
  if (X.size() >= kFloatMatrixThreshold)
    return solve_points<float>(domain, X, Y, 1);
  return solve_points<double>(domain, X, Y, 1);
}

double replicated_cost(const Domain& domain, std::span<const Point> X,
                       std::span<const Point> Y, int q) {
  if (q < 1 || X.empty() || Y.size() != X.size() * static_cast<std::size_t>(q))
    throw std::invalid_argument("replicated_cost: |Y| must equal q*|X| with q >= 1");
  if (Y.size() >= kFloatMatrixThreshold)
    return solve_points<float>(domain, X, Y, q).cost;
  return solve_points<double>(domain, X, Y, q).cost;
}

FlowSchedule FlowSchedule::linear() {
  return {[](double t) { return t; }, [](double) { return 1.0; }};
}

FlowSchedule FlowSchedule::quadratic() {
  return {[](double t) { return 1.0 - (1.0 - t) * (1.0 - t); },
          [](double t) { return 2.0 * (1.0 - t); }};
}

double bb_cost_bound(const PotentialField& f, const DensityField& u0,
                     const DensityField& u1, const FlowSchedule& schedule,
                     std::size_t grid_points, int time_quad) {
  const auto& modes = f.lattice().modes();
  for (std::size_t k = 0; k < modes.size(); ++k) {
    double lhs = modes[k].lambda * f.coeffs()[k];
    double rhs = u1.coeffs()[k] - u0.coeffs()[k];
    if (std::fabs(lhs - rhs) > 1e-8)
      throw std::invalid_argument("bb_cost_bound: -lapl f != u1 - u0 (coefficient mismatch)");
  }
  Domain domain(f.lattice().kind());
  std::vector<Point> grid = uniform_grid(domain, grid_points);
  double acc = 0.0;
  for (const Point& g : grid) {
    double a = u0.value(g);
    double b = u1.value(g);
    if (a <= 0.0 || b <= 0.0)
      throw std::domain_error("bb_cost_bound: nonpositive density on quadrature grid");
    double grad2 = f.gradient(g).norm2();
    double inner = integrate_gl(
        [&](double t) {
          double th = schedule.theta(t);
          double tp = schedule.theta_prime(t);
          return tp * tp / (a * (1.0 - th) + b * th);
        },
        0.0, 1.0, time_quad);
    acc += grad2 * inner;
  }
  return acc / static_cast<double>(grid.size());
}

namespace {

struct RawState {
  double x, y, action;
};

// reflection-extended evaluation of the interpolation field at a raw point
Vec2 dm_velocity(const Domain& domain, const PotentialField& f, const DensityField& u0,
                 const DensityField& u1, const FlowSchedule& schedule, double t,
                 const RawState& s) {
  double sx, sy;
  Point p = domain.fold_signed(s.x, s.y, &sx, &sy);
  double th = schedule.theta(t);
  double denom = u0.value(p) * (1.0 - th) + u1.value(p) * th;
  if (denom <= 0.0)
    throw std::runtime_error("dm_flow_map: nonpositive density at t=" + std::to_string(t) +
                             ", point (" + std::to_string(p.x) + "," + std::to_string(p.y) + ")");
  Vec2 g = f.gradient(p);
  return {sx * g.x * schedule.theta_prime(t) / denom, sy * g.y * schedule.theta_prime(t) / denom};
}

}  // namespace

FlowTrajectory dm_flow_map(const PotentialField& f, const DensityField& u0,
                           const DensityField& u1, const FlowSchedule& schedule,
                           Point start, int steps) {
  if (steps < 16) throw std::invalid_argument("dm_flow_map: steps must be >= 16");
  Domain domain(f.lattice().kind());
  FlowTrajectory traj;
  traj.start = start;
  traj.positions.reserve(steps + 1);
  traj.positions.push_back(start);

  RawState s{start.x, start.y, 0.0};
  double h = 1.0 / steps;
  auto deriv = [&](double t, const RawState& st) -> RawState {
    Vec2 v = dm_velocity(domain, f, u0, u1, schedule, t, st);
    return {v.x, v.y, v.norm2()};
  };
  for (int i = 0; i < steps; ++i) {
    double t = i * h;
    RawState k1 = deriv(t, s);
    RawState k2 = deriv(t + 0.5 * h, {s.x + 0.5 * h * k1.x, s.y + 0.5 * h * k1.y, 0});
    RawState k3 = deriv(t + 0.5 * h, {s.x + 0.5 * h * k2.x, s.y + 0.5 * h * k2.y, 0});
    RawState k4 = deriv(t + h, {s.x + h * k3.x, s.y + h * k3.y, 0});
    s.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    s.action += h / 6.0 * (k1.action + 2.0 * k2.action + 2.0 * k3.action + k4.action);
    traj.positions.push_back(domain.fold(s.x, s.y));
  }
  traj.arrival = traj.positions.back();
  traj.action = s.action;
  return traj;
}

ExpCouplingCost exp_pushforward_cost(const Domain& domain, const PotentialField& f,
                                     std::span<const Point> target, std::size_t m) {
  if (target.empty() || m < target.size() || m % target.size() != 0)
    throw std::invalid_argument(
        "exp_pushforward_cost: m must be a positive multiple of |target|");
  std::vector<Point> grid = uniform_grid(domain, m);
  std::vector<Point> pushed;
  pushed.reserve(m);
  ExpCouplingCost out;
  for (const Point& g : grid) {
    Vec2 v = f.gradient(g);
    if (v.norm2() >= 0.25)
      throw std::invalid_argument("exp_pushforward_cost: |grad f| >= 1/2 on the grid");
    out.quadrature_cost += v.norm2();
    pushed.push_back(domain.exp_map(g, v));
  }
  out.quadrature_cost /= static_cast<double>(m);
  int q = static_cast<int>(m / target.size());
  out.assignment_cost = replicated_cost(domain, target, pushed, q);
  return out;
}

FlowExpGap flow_vs_exp_gap(const Domain& domain, const VectorField& X,
                           const TimeVectorField& Y, double grad_inf_norm, double xi,
                           Point p, int steps) {
  if (steps < 16) throw std::invalid_argument("flow_vs_exp_gap: steps must be >= 16");
  if (xi < 0.0 || xi >= 1.0) throw std::invalid_argument("flow_vs_exp_gap: need 0 <= xi < 1");
  Vec2 xp = X(p);
  if (xp.norm2() >= 0.25)
    throw std::invalid_argument("flow_vs_exp_gap: |X(p)| must be < 1/2");

  double rx = p.x, ry = p.y;
  double h = 1.0 / steps;
  auto eval = [&](double t, double ax, double ay) -> Vec2 {
    double sx, sy;
    Point q = domain.fold_signed(ax, ay, &sx, &sy);
    Vec2 w = Y(t, q);
    return {sx * w.x, sy * w.y};
  };
  for (int i = 0; i < steps; ++i) {
    double t = i * h;
    Vec2 k1 = eval(t, rx, ry);
    Vec2 k2 = eval(t + 0.5 * h, rx + 0.5 * h * k1.x, ry + 0.5 * h * k1.y);
    Vec2 k3 = eval(t + 0.5 * h, rx + 0.5 * h * k2.x, ry + 0.5 * h * k2.y);
    Vec2 k4 = eval(t + h, rx + h * k3.x, ry + h * k3.y);
    rx += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    ry += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
  }
  Point flow_end = domain.fold(rx, ry);
  Point exp_end = domain.exp_map(p, xp);

  FlowExpGap out;
  out.gap = domain.distance(exp_end, flow_end);
  out.budget = (4.0 * xi + 8.0 * grad_inf_norm) * xp.norm();
  return out;
}

double pushforward_distance_bound(const Domain& domain, std::span<const Point> fx,
                                  std::span<const Point> gx) {
  if (fx.size() != gx.size())
    throw std::invalid_argument("pushforward_distance_bound: size mismatch");
  if (fx.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < fx.size(); ++i) acc += domain.distance2(fx[i], gx[i]);
  return std::sqrt(acc / static_cast<double>(fx.size()));
}

}  // namespace matchlab
