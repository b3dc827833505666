#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "matchlab/geometry.hpp"
#include "matchlab/heatkernel.hpp"

namespace matchlab {

struct SymMat2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;
  double trace() const { return xx + yy; }
  // operator norm = largest absolute eigenvalue (exact 2x2 formula)
  double op_norm() const;
  SymMat2 operator-(const SymMat2& o) const { return {xx - o.xx, xy - o.xy, yy - o.yy}; }
};

struct ThirdDeriv {
  double xxx = 0.0, xxy = 0.0, xyy = 0.0, yyy = 0.0;
};

// Zero-mean spectral field: the smoothed random potential f^{n,t} built
// from sample points, or any linear combination of such fields.
// Coefficients are aligned with the lattice's mode array (no k=0 entry).
class PotentialField {
 public:
  PotentialField(std::shared_ptr<const FrequencyLattice> lattice,
                 std::vector<double> coeffs, std::size_t n, double t);

  // c_k = exp(-lambda_k t)/lambda_k * (1/n) sum_i phi_k(X_i).
  // Evaluating the field equals averaging q_t(X_i, .) over the points.
  static PotentialField build(std::shared_ptr<const FrequencyLattice> lattice,
                              std::span<const Point> points, double t);

  const FrequencyLattice& lattice() const { return *lattice_; }
  std::shared_ptr<const FrequencyLattice> lattice_ptr() const { return lattice_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  std::size_t sample_size() const { return n_; }
  double time() const { return t_; }

  double value(Point y) const;
  Vec2 gradient(Point y) const;
  SymMat2 hessian(Point y) const;
  ThirdDeriv third(Point y) const;

  // Parseval: sum_k lambda_k c_k^2
  double dirichlet_energy() const;

  // computable Lipschitz bound of |grad^2 f| via the coefficient l1 sum
  double hessian_lipschitz_bound() const;

  // f1 - f0 for fields on the same lattice and time
  PotentialField operator-(const PotentialField& o) const;

 private:
  std::shared_ptr<const FrequencyLattice> lattice_;
  std::vector<double> coeffs_;
  std::size_t n_;
  double t_;
};

// Density u with spectral coefficients lambda_k c_k and constant part 1;
// for a field built from points this is the heat-smoothed empirical density.
class DensityField {
 public:
  DensityField(std::shared_ptr<const FrequencyLattice> lattice, std::vector<double> coeffs);
  static DensityField uniform(std::shared_ptr<const FrequencyLattice> lattice);

  const std::vector<double>& coeffs() const { return coeffs_; }
  double value(Point y) const;

 private:
  std::shared_ptr<const FrequencyLattice> lattice_;
  std::vector<double> coeffs_;  // aligned with modes; constant part is 1
};

DensityField density_from_potential(const PotentialField& f);

// Exact E[dirichlet_energy] for n i.i.d. uniform points:
// (1/n) sum_{k != 0} exp(-2 lambda_k t)/lambda_k.
double expected_energy_closed_form(const FrequencyLattice& lat, std::size_t n, double t);

struct EventCheckConfig {
  double xi = 0.0;            // flatness threshold, in (0,1) for the paper's event
  double spacing = 0.0;       // grid spacing; 0 = derive from (xi, Lipschitz bound)
  std::size_t max_grid_per_axis = 4096;
};

struct SupHessianResult {
  double grid_max = 0.0;      // max operator norm of grad^2 f over the grid
  double certified = 0.0;     // grid max + covering radius * Lipschitz bound
  bool event_ok = false;      // certified < xi (sound one-sided membership test)
  double spacing = 0.0;
  std::size_t grid_points = 0;
};

// Certified sup of the Hessian operator norm by grid scan plus a Lipschitz
// increment; conservative, so event_ok = true implies membership.
SupHessianResult certified_sup_hessian(const PotentialField& f, const EventCheckConfig& cfg);

}  // namespace matchlab
