#include "matchlab/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace matchlab {

double Vec2::norm() const { return std::sqrt(x * x + y * y); }

namespace {

double mod1(double u) {
  double v = u - std::floor(u);
  return v < 1.0 ? v : 0.0;  // floor rounding can land exactly on 1
}

// Period-2 triangle wave: the 1D fold under reflections across integers.
double fold_reflect(double u, double* sign) {
  double v = u - 2.0 * std::floor(u / 2.0);  // v in [0,2)
  if (v <= 1.0) {
    if (sign) *sign = 1.0;
    return v;
  }
  if (sign) *sign = -1.0;
  return 2.0 - v;
}

}  // namespace

Point Domain::fold(double px, double py) const {
  if (!std::isfinite(px) || !std::isfinite(py))
    throw std::invalid_argument("fold: non-finite coordinate");
  switch (kind_) {
    case DomainKind::Torus2:
      return {mod1(px), mod1(py)};
    case DomainKind::Square2:
      return {fold_reflect(px, nullptr), fold_reflect(py, nullptr)};
    case DomainKind::Interval1:
      return {fold_reflect(px, nullptr), 0.0};
  }
  throw std::logic_error("unreachable");
}

Point Domain::fold_signed(double px, double py, double* sx, double* sy) const {
  if (!std::isfinite(px) || !std::isfinite(py))
    throw std::invalid_argument("fold: non-finite coordinate");
  switch (kind_) {
    case DomainKind::Torus2:
      if (sx) *sx = 1.0;
      if (sy) *sy = 1.0;
      return {mod1(px), mod1(py)};
    case DomainKind::Square2: {
      Point p;
      p.x = fold_reflect(px, sx);
      p.y = fold_reflect(py, sy);
      return p;
    }
    case DomainKind::Interval1: {
      Point p;
      p.x = fold_reflect(px, sx);
      if (sy) *sy = 1.0;
      return p;
    }
  }
  throw std::logic_error("unreachable");
}

double Domain::distance2(Point p, Point q) const {
  switch (kind_) {
    case DomainKind::Torus2: {
      double dx = std::fabs(p.x - q.x);
      double dy = std::fabs(p.y - q.y);
      dx = std::min(dx, 1.0 - dx);
      dy = std::min(dy, 1.0 - dy);
      return dx * dx + dy * dy;
    }
    case DomainKind::Square2: {
      double dx = p.x - q.x, dy = p.y - q.y;
      return dx * dx + dy * dy;
    }
    case DomainKind::Interval1: {
      double dx = p.x - q.x;
      return dx * dx;
    }
  }
  throw std::logic_error("unreachable");
}

double Domain::distance(Point p, Point q) const { return std::sqrt(distance2(p, q)); }

Point Domain::exp_map(Point p, Vec2 v) const {
  if (v.norm2() >= 0.25)
    throw std::invalid_argument("exp_map: |v| must be < 1/2");
  return fold(p.x + v.x, p.y + v.y);
}

std::vector<Point> Domain::sample_uniform(CounterRng& rng, std::size_t n) const {
  if (n == 0) throw std::invalid_argument("sample_uniform: n must be >= 1");
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point p;
    p.x = rng.uniform();
    p.y = dim() == 2 ? rng.uniform() : 0.0;
    pts.push_back(p);
  }
  return pts;
}

std::vector<Point> Domain::sample_uniform(std::uint64_t seed, std::uint64_t stream,
                                          std::size_t n) const {
  CounterRng rng(seed, stream);
  return sample_uniform(rng, n);
}

IsometryOrbit Domain::orbit_images(Point x, double radius) const {
  if (kind_ != DomainKind::Square2)
    throw std::invalid_argument("orbit_images: Square2 only");
  if (radius <= 0.0) throw std::invalid_argument("orbit_images: radius must be > 0");
  IsometryOrbit orbit;
  orbit.base = x;
  // 1D orbit of u under reflections across integers: {2m + u, 2m - u}.
  auto axis_images = [radius](double u, std::vector<double>* out) {
    int mlo = static_cast<int>(std::floor((-radius - 1.0) / 2.0)) - 1;
    int mhi = static_cast<int>(std::ceil((radius + 1.0) / 2.0)) + 1;
    for (int m = mlo; m <= mhi; ++m) {
      out->push_back(2.0 * m + u);
      out->push_back(2.0 * m - u);
    }
  };
  std::vector<double> xs, ys;
  axis_images(x.x, &xs);
  axis_images(x.y, &ys);
  auto cell_gap = [](double u) {  // distance from u to [0,1]
    if (u < 0.0) return -u;
    if (u > 1.0) return u - 1.0;
    return 0.0;
  };
  for (double ix : xs) {
    double gx = cell_gap(ix);
    if (gx > radius) continue;
    for (double iy : ys) {
      double gy = cell_gap(iy);
      if (gx * gx + gy * gy > radius * radius) continue;
      orbit.images.push_back({ix, iy});
    }
  }
  return orbit;
}

std::vector<Point> uniform_grid(const Domain& domain, std::size_t m) {
  if (m == 0) throw std::invalid_argument("uniform_grid: m must be >= 1");
  std::vector<Point> pts;
  pts.reserve(m);
  if (domain.dim() == 1) {
    for (std::size_t i = 0; i < m; ++i)
      pts.push_back({(i + 0.5) / static_cast<double>(m), 0.0});
    return pts;
  }
  std::size_t rows = static_cast<std::size_t>(std::sqrt(static_cast<double>(m)));
  while (rows > 1 && m % rows != 0) --rows;
  std::size_t cols = m / rows;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      pts.push_back({(i + 0.5) / static_cast<double>(rows),
                     (j + 0.5) / static_cast<double>(cols)});
  return pts;
}

}  // namespace matchlab
