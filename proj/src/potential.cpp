#include "matchlab/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace matchlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kPi = 3.141592653589793238462643383279;
}  // namespace

double SymMat2::op_norm() const {
  double mean = 0.5 * (xx + yy);
  double r = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
  return std::fabs(mean) + r;
}

PotentialField::PotentialField(std::shared_ptr<const FrequencyLattice> lattice,
                               std::vector<double> coeffs, std::size_t n, double t)
    : lattice_(std::move(lattice)), coeffs_(std::move(coeffs)), n_(n), t_(t) {
  if (!lattice_) throw std::invalid_argument("PotentialField: null lattice");
  if (coeffs_.size() != lattice_->modes().size())
    throw std::invalid_argument("PotentialField: coefficient count mismatch");
}

PotentialField PotentialField::build(std::shared_ptr<const FrequencyLattice> lattice,
                                     std::span<const Point> points, double t) {
  if (points.empty()) throw std::invalid_argument("build_potential: empty point list");
  if (!lattice) throw std::invalid_argument("build_potential: null lattice");
  lattice->check_time(t);
  const auto& modes = lattice->modes();
  std::vector<double> coeffs(modes.size(), 0.0);
  double inv_n = 1.0 / static_cast<double>(points.size());
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const Mode& m = modes[k];
    double s = 0.0;
    for (const Point& p : points) s += lattice->eval_mode(m, p);
    coeffs[k] = std::exp(-m.lambda * t) / m.lambda * s * inv_n;
  }
  return PotentialField(std::move(lattice), std::move(coeffs), points.size(), t);
}

double PotentialField::value(Point y) const {
  const auto& modes = lattice_->modes();
  double s = 0.0;
  for (std::size_t k = 0; k < modes.size(); ++k)
    if (coeffs_[k] != 0.0) s += coeffs_[k] * lattice_->eval_mode(modes[k], y);
  return s;
}

Vec2 PotentialField::gradient(Point y) const {
  const auto& modes = lattice_->modes();
  Vec2 g;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (coeffs_[k] == 0.0) continue;
    g.x += coeffs_[k] * lattice_->eval_mode(modes[k], y, 1, 0);
    g.y += coeffs_[k] * lattice_->eval_mode(modes[k], y, 0, 1);
  }
  return g;
}

SymMat2 PotentialField::hessian(Point y) const {
  const auto& modes = lattice_->modes();
  SymMat2 h;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (coeffs_[k] == 0.0) continue;
    h.xx += coeffs_[k] * lattice_->eval_mode(modes[k], y, 2, 0);
    h.xy += coeffs_[k] * lattice_->eval_mode(modes[k], y, 1, 1);
    h.yy += coeffs_[k] * lattice_->eval_mode(modes[k], y, 0, 2);
  }
  return h;
}

ThirdDeriv PotentialField::third(Point y) const {
  const auto& modes = lattice_->modes();
  ThirdDeriv d;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (coeffs_[k] == 0.0) continue;
    d.xxx += coeffs_[k] * lattice_->eval_mode(modes[k], y, 3, 0);
    d.xxy += coeffs_[k] * lattice_->eval_mode(modes[k], y, 2, 1);
    d.xyy += coeffs_[k] * lattice_->eval_mode(modes[k], y, 1, 2);
    d.yyy += coeffs_[k] * lattice_->eval_mode(modes[k], y, 0, 3);
  }
  return d;
}

double PotentialField::dirichlet_energy() const {
  const auto& modes = lattice_->modes();
  double s = 0.0;
  for (std::size_t k = 0; k < modes.size(); ++k)
    s += modes[k].lambda * coeffs_[k] * coeffs_[k];
  return s;
}

double PotentialField::hessian_lipschitz_bound() const {
  const auto& modes = lattice_->modes();
  double scale = lattice_->kind() == DomainKind::Torus2 ? kTwoPi : kPi;
  double s = 0.0;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const Mode& m = modes[k];
    double knorm = std::sqrt(static_cast<double>(m.k1) * m.k1 +
                             static_cast<double>(m.k2) * m.k2);
    double w = scale * knorm;
    s += std::fabs(coeffs_[k]) * m.norm * w * w * w;
  }
  return s;
}

PotentialField PotentialField::operator-(const PotentialField& o) const {
  if (lattice_ != o.lattice_ || t_ != o.t_)
    throw std::invalid_argument("PotentialField: mismatched lattice or time");
  std::vector<double> c(coeffs_.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = coeffs_[k] - o.coeffs_[k];
  return PotentialField(lattice_, std::move(c), n_, t_);
}

DensityField::DensityField(std::shared_ptr<const FrequencyLattice> lattice,
                           std::vector<double> coeffs)
    : lattice_(std::move(lattice)), coeffs_(std::move(coeffs)) {
  if (!lattice_) throw std::invalid_argument("DensityField: null lattice");
  if (coeffs_.size() != lattice_->modes().size())
    throw std::invalid_argument("DensityField: coefficient count mismatch");
}

DensityField DensityField::uniform(std::shared_ptr<const FrequencyLattice> lattice) {
  std::vector<double> zero(lattice->modes().size(), 0.0);
  return DensityField(std::move(lattice), std::move(zero));
}

double DensityField::value(Point y) const {
  const auto& modes = lattice_->modes();
  double s = 1.0;
  for (std::size_t k = 0; k < modes.size(); ++k)
    if (coeffs_[k] != 0.0) s += coeffs_[k] * lattice_->eval_mode(modes[k], y);
  return s;
}

DensityField density_from_potential(const PotentialField& f) {
  const auto& modes = f.lattice().modes();
  std::vector<double> c(modes.size());
  for (std::size_t k = 0; k < modes.size(); ++k) c[k] = modes[k].lambda * f.coeffs()[k];
  return DensityField(f.lattice_ptr(), std::move(c));
}

double expected_energy_closed_form(const FrequencyLattice& lat, std::size_t n, double t) {
  if (n == 0) throw std::invalid_argument("expected_energy_closed_form: n must be >= 1");
  return q_energy_sum(lat, t) / static_cast<double>(n);
}

SupHessianResult certified_sup_hessian(const PotentialField& f, const EventCheckConfig& cfg) {
  if (!(cfg.xi > 0.0)) throw std::invalid_argument("certified_sup_hessian: xi must be > 0");
  const Domain domain(f.lattice().kind());
  const double dim = domain.dim();
  const double lip = f.hessian_lipschitz_bound();

  double spacing = cfg.spacing;
  if (spacing <= 0.0) {
    // covering radius * Lipschitz <= xi/4 leaves half the net budget as margin
    spacing = lip > 0.0 ? cfg.xi / (2.0 * lip * std::sqrt(dim)) : 0.125;
    spacing = std::min(spacing, 0.125);
  }
  std::size_t per_axis = static_cast<std::size_t>(std::ceil(1.0 / spacing));
  if (per_axis < 2) per_axis = 2;
  if (per_axis > cfg.max_grid_per_axis) {
    double required = 1.0 / static_cast<double>(cfg.max_grid_per_axis);
    throw std::invalid_argument(
        "certified_sup_hessian: grid spacing " + std::to_string(spacing) +
        " requires more than max_grid_per_axis cells; required spacing >= " +
        std::to_string(required) + " or a larger grid budget");
  }
  double h = 1.0 / static_cast<double>(per_axis);
  double covering = 0.5 * h * std::sqrt(dim);
  if (cfg.spacing > 0.0 && covering * lip > 0.5 * cfg.xi) {
    double required = cfg.xi / (lip * std::sqrt(dim));
    throw std::invalid_argument(
        "certified_sup_hessian: spacing too coarse for xi; need spacing <= " +
        std::to_string(required));
  }

  SupHessianResult res;
  res.spacing = h;
  std::size_t ny = domain.dim() == 2 ? per_axis : 1;
  for (std::size_t i = 0; i < per_axis; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      Point p{(i + 0.5) * h, domain.dim() == 2 ? (j + 0.5) * h : 0.0};
      res.grid_max = std::max(res.grid_max, f.hessian(p).op_norm());
      ++res.grid_points;
    }
  }
  res.certified = res.grid_max + covering * lip;
  res.event_ok = res.certified < cfg.xi;
  return res;
}

}  // namespace matchlab
