#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "matchlab/rng.hpp"

namespace matchlab {

enum class DomainKind { Torus2, Square2, Interval1 };

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator-() const { return {-x, -y}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const;
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

// A point folded into the fundamental cell: [0,1)^2 on the torus,
// [0,1]^2 on the square, [0,1] on the interval (second coordinate 0).
struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Orbit of a point under the reflection group of the square; images are
// raw plane coordinates, not folded.
struct IsometryOrbit {
  Point base;
  std::vector<Vec2> images;
};

// One of the flat model geometries. All operations are pure; the volume
// measure of each domain is a probability.
class Domain {
 public:
  explicit Domain(DomainKind kind) : kind_(kind) {}

  DomainKind kind() const { return kind_; }
  int dim() const { return kind_ == DomainKind::Interval1 ? 1 : 2; }

  // Canonicalize a raw point into the fundamental cell.
  // Throws std::invalid_argument on non-finite input.
  Point fold(double px, double py = 0.0) const;
  Point fold(Vec2 raw) const { return fold(raw.x, raw.y); }

  // Like fold, also reporting the sign of d(fold)/d(coordinate) per axis.
  // Needed to evaluate reflection-extended vector fields at raw points.
  Point fold_signed(double px, double py, double* sx, double* sy) const;

  // Geodesic distance: 9-shift minimum on the torus, Euclidean otherwise.
  double distance(Point p, Point q) const;
  double distance2(Point p, Point q) const;

  // exp_p(v) on a flat domain: fold(p + v). Requires |v| < 1/2.
  Point exp_map(Point p, Vec2 v) const;

  // n i.i.d. uniform points, deterministic given the generator state.
  std::vector<Point> sample_uniform(CounterRng& rng, std::size_t n) const;
  std::vector<Point> sample_uniform(std::uint64_t seed, std::uint64_t stream,
                                    std::size_t n) const;

  // Square2 only: reflection-group images of x that can lie within
  // `radius` of some point of the cell.
  IsometryOrbit orbit_images(Point x, double radius) const;

 private:
  DomainKind kind_;
};

// Regular quadrature grid of m = rows*cols cell midpoints (rows*cols chosen
// as the most balanced factorization of m). Interval1 uses m midpoints.
std::vector<Point> uniform_grid(const Domain& domain, std::size_t m);

}  // namespace matchlab
