#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "matchlab/geometry.hpp"

namespace matchlab {

// Requested evaluation time is below what the mode cutoff supports.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(double t, double bound)
      : std::runtime_error("spectral cutoff insufficient for requested time"),
        time(t),
        error_bound(bound) {}
  double time;
  double error_bound;
};

// One Laplacian eigenfunction. Torus: norm * cos/sin(2*pi*(k1 x + k2 y)),
// lambda = 4 pi^2 |k|^2, one cos and one sin mode per {k,-k} pair.
// Square/Interval: Neumann product-cosine basis, lambda = pi^2 |k|^2.
struct Mode {
  int k1 = 0;
  int k2 = 0;
  bool sin_phase = false;  // torus only
  double lambda = 0.0;
  double norm = 1.0;
};

// Truncated eigenbasis of the (Neumann) Laplacian on a flat model domain.
// Modes are sorted by eigenvalue; the constant mode k=0 is implicit and
// never stored. Immutable after construction.
class FrequencyLattice {
 public:
  // Cutoff rule: smallest kmax with exp(-lambda_max * min_time) * N_tail <= tol,
  // where N_tail counts the modes discarded below frequency 2*kmax.
  static FrequencyLattice build(DomainKind kind, double min_time, double tol = 1e-12);

  DomainKind kind() const { return kind_; }
  double min_time() const { return min_time_; }
  double tol() const { return tol_; }
  int kmax() const { return kmax_; }
  double lambda_max() const { return lambda_max_; }
  std::size_t tail_count() const { return tail_count_; }
  const std::vector<Mode>& modes() const { return modes_; }

  // d^{dx1} d^{dx2} phi_k at x (termwise-differentiable basis).
  double eval_mode(const Mode& m, Point x, int dx1 = 0, int dx2 = 0) const;

  // Throws TruncationError if exp(-lambda_max t) * tail_count > tol.
  void check_time(double t) const;

 private:
  DomainKind kind_ = DomainKind::Torus2;
  double min_time_ = 0.0;
  double tol_ = 0.0;
  int kmax_ = 0;
  double lambda_max_ = 0.0;
  std::size_t tail_count_ = 0;
  std::vector<Mode> modes_;
};

// Spectral backend: p_t(x,y) = 1 + sum_k exp(-lambda_k t) phi_k(x) phi_k(y).
double heat_kernel(const FrequencyLattice& lat, double t, Point x, Point y);

// Method-of-images backend (plane Gaussians over the isometry orbit of x).
// Supported for 0 < t <= 1.
double heat_kernel_images(const Domain& domain, double t, Point x, Point y);

// Time-averaged kernel q_t = sum_{k != 0} exp(-lambda_k t)/lambda_k phi phi
// and its gradient in the second slot.
double q_kernel(const FrequencyLattice& lat, double t, Point x, Point y);
Vec2 q_grad(const FrequencyLattice& lat, double t, Point x, Point y);

// integral of (p_t(x,x) - 1) dm(x) = sum_{k != 0} exp(-lambda_k t).
double trace_deficit(const FrequencyLattice& lat, double t);

// sum_{k != 0} exp(-2 lambda_k t) / lambda_k; equals the double Dirichlet
// integral of q_t and the time integral of the trace deficit from 2t.
double q_energy_sum(const FrequencyLattice& lat, double t);

// Norm of the order-N derivative tensor of p_t (resp. q_t) in the second
// slot: Euclidean for N=1, operator norm for N=2, Frobenius for N=3.
double heat_kernel_deriv_norm(const FrequencyLattice& lat, double t, Point x, Point y, int N);
double q_deriv_norm(const FrequencyLattice& lat, double t, Point x, Point y, int N);

// Fitted constants for the off-diagonal decay and derivative envelopes.
// Diagnostics: the envelopes' implicit constants are not specified, so we
// report the smallest constants observed on the sampled grid.
struct KernelBoundFit {
  double a_hat = 0.0;                     // exponent base, > 1
  double c0_hat = 0.0;                    // p_t <= c0/t * a^{-d^2/t}
  std::array<double, 3> c_deriv{};        // |grad^N p| <= c_N (t^{-N/2} + d^N/t^N) p
  std::array<double, 3> c_qderiv{};       // |grad^N q| <= c'_N / (d^N + t^{N/2})
  std::size_t t_samples = 0;
  std::size_t point_samples = 0;
};

KernelBoundFit verify_kernel_bounds(const FrequencyLattice& lat,
                                    std::span<const double> times,
                                    std::span<const Point> points);

}  // namespace matchlab
