#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "matchlab/geometry.hpp"

using namespace matchlab;

TEST_CASE("torus fold wraps mod 1") {
  Domain d(DomainKind::Torus2);
  Point p = d.fold(1.3, -0.25);
  CHECK(p.x == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(p.y == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("square fold reflects across integer lines") {
  Domain d(DomainKind::Square2);
  Point p = d.fold(1.2, 0.4);
  CHECK(p.x == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(p.y == doctest::Approx(0.4).epsilon(1e-14));

  Point q = d.fold(-0.1, 2.3);
  CHECK(q.x == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(q.y == doctest::Approx(0.3).epsilon(1e-13));
}

TEST_CASE("fold rejects non-finite input") {
  for (DomainKind k : {DomainKind::Torus2, DomainKind::Square2, DomainKind::Interval1}) {
    Domain d(k);
    CHECK_THROWS_AS(d.fold(std::numeric_limits<double>::infinity(), 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(d.fold(0.0, std::nan("")), std::invalid_argument);
  }
}

TEST_CASE("fold is idempotent") {
  CounterRng rng(11, 0);
  for (DomainKind k : {DomainKind::Torus2, DomainKind::Square2, DomainKind::Interval1}) {
    Domain d(k);
    for (int i = 0; i < 50; ++i) {
      double rx = 20.0 * (rng.uniform() - 0.5);
      double ry = d.dim() == 2 ? 20.0 * (rng.uniform() - 0.5) : 0.0;
      Point p = d.fold(rx, ry);
      Point q = d.fold(p.x, p.y);
      CHECK(p.x == doctest::Approx(q.x).epsilon(1e-14));
      CHECK(p.y == doctest::Approx(q.y).epsilon(1e-14));
      CHECK(p.x >= 0.0);
      CHECK(p.x <= 1.0);
      if (k == DomainKind::Torus2) CHECK(p.x < 1.0);
    }
  }
}

TEST_CASE("torus distance takes the wrap-around shortcut") {
  Domain d(DomainKind::Torus2);
  CHECK(d.distance({0.1, 0.5}, {0.9, 0.5}) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("square distance is Euclidean") {
  Domain d(DomainKind::Square2);
  CHECK(d.distance({0.0, 0.0}, {1.0, 1.0}) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("distance metric axioms on random triples") {
  for (DomainKind k : {DomainKind::Torus2, DomainKind::Square2, DomainKind::Interval1}) {
    Domain d(k);
    CounterRng rng(5, static_cast<int>(k));
    for (int i = 0; i < 200; ++i) {
      std::vector<Point> tri = d.sample_uniform(rng, 3);
      Point a = tri[0], b = tri[1], c = tri[2];
      CHECK(d.distance(a, a) == 0.0);
      CHECK(d.distance(a, b) == doctest::Approx(d.distance(b, a)).epsilon(1e-15));
      CHECK(d.distance(a, c) <= d.distance(a, b) + d.distance(b, c) + 1e-12);
      CHECK(d.distance(a, b) >= 0.0);
      CHECK(d.distance2(a, b) ==
            doctest::Approx(d.distance(a, b) * d.distance(a, b)).epsilon(1e-13));
    }
  }
}

TEST_CASE("torus exp_map wraps") {
  Domain d(DomainKind::Torus2);
  Point p = d.exp_map({0.95, 0.5}, {0.1, 0.0});
  CHECK(p.x == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("square exp_map reflects at the boundary") {
  Domain d(DomainKind::Square2);
  Point p = d.exp_map({0.98, 0.5}, {0.05, 0.0});
  CHECK(p.x == doctest::Approx(0.97).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("exp_map with zero vector is the identity") {
  for (DomainKind k : {DomainKind::Torus2, DomainKind::Square2, DomainKind::Interval1}) {
    Domain d(k);
    CounterRng rng(6, 0);
    std::vector<Point> pts = d.sample_uniform(rng, 10);
    for (const Point& p : pts) {
      Point q = d.exp_map(p, {0.0, 0.0});
      CHECK(q.x == p.x);
      CHECK(q.y == p.y);
    }
  }
}

TEST_CASE("exp_map rejects large vectors") {
  Domain d(DomainKind::Torus2);
  CHECK_THROWS_AS(d.exp_map({0.5, 0.5}, {0.5, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(d.exp_map({0.5, 0.5}, {0.4, 0.4}), std::invalid_argument);
}

TEST_CASE("exp_map inverts with -v while the segment stays interior") {
  for (DomainKind k : {DomainKind::Torus2, DomainKind::Square2, DomainKind::Interval1}) {
    Domain d(k);
    CounterRng rng(7, 1);
    for (int i = 0; i < 100; ++i) {
      // points and steps kept away from the boundary so no reflection occurs
      double margin = 0.15;
      Point p{margin + (1 - 2 * margin) * rng.uniform(),
              d.dim() == 2 ? margin + (1 - 2 * margin) * rng.uniform() : 0.0};
      Vec2 v{0.1 * (rng.uniform() - 0.5), d.dim() == 2 ? 0.1 * (rng.uniform() - 0.5) : 0.0};
      Point q = d.exp_map(p, v);
      Point back = d.exp_map(q, -v);
      CHECK(back.x == doctest::Approx(p.x).epsilon(1e-13));
      CHECK(back.y == doctest::Approx(p.y).epsilon(1e-13));
    }
  }
}

TEST_CASE("sample_uniform is deterministic and validates n") {
  Domain d(DomainKind::Torus2);
  auto a = d.sample_uniform(42, 3, 3);
  auto b = d.sample_uniform(42, 3, 3);
  REQUIRE(a.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
  }
  CHECK_THROWS_AS(d.sample_uniform(42, 3, 0), std::invalid_argument);
}

TEST_CASE("sample_uniform passes a CLT check on the mean") {
  for (DomainKind k : {DomainKind::Torus2, DomainKind::Square2, DomainKind::Interval1}) {
    Domain d(k);
    const std::size_t n = 100000;
    auto pts = d.sample_uniform(1234, 0, n);
    double mx = 0.0;
    for (const Point& p : pts) mx += p.x;
    mx /= static_cast<double>(n);
    double tol = 3.0 / std::sqrt(12.0 * static_cast<double>(n));
    CHECK(std::fabs(mx - 0.5) < tol);
  }
}

TEST_CASE("distinct streams give distinct samples") {
  Domain d(DomainKind::Torus2);
  auto a = d.sample_uniform(42, 0, 4);
  auto b = d.sample_uniform(42, 1, 4);
  bool any_diff = false;
  for (int i = 0; i < 4; ++i) any_diff = any_diff || a[i].x != b[i].x;
  CHECK(any_diff);
}

TEST_CASE("orbit_images contains the base point and folds back") {
  Domain d(DomainKind::Square2);
  Point x{0.3, 0.4};

  IsometryOrbit small = d.orbit_images(x, 0.01);
  bool has_self = false;
  for (const Vec2& im : small.images)
    if (std::fabs(im.x - x.x) < 1e-15 && std::fabs(im.y - x.y) < 1e-15) has_self = true;
  CHECK(has_self);

  IsometryOrbit big = d.orbit_images(x, 3.0);
  auto contains = [&](double ix, double iy) {
    for (const Vec2& im : big.images)
      if (std::fabs(im.x - ix) < 1e-12 && std::fabs(im.y - iy) < 1e-12) return true;
    return false;
  };
  CHECK(contains(-0.3, 0.4));
  CHECK(contains(0.3, -0.4));
  CHECK(contains(1.7, 0.4));

  for (const Vec2& im : big.images) {
    Point f = d.fold(im.x, im.y);
    CHECK(f.x == doctest::Approx(x.x).epsilon(1e-12));
    CHECK(f.y == doctest::Approx(x.y).epsilon(1e-12));
  }
}

TEST_CASE("orbit image count tracks the disk area") {
  Domain d(DomainKind::Square2);
  double radius = 10.0;
  IsometryOrbit orb = d.orbit_images({0.37, 0.61}, radius);
  // orbit density is one image per unit area (4 per 2x2 period cell);
  // the reachable region is the radius-r neighborhood of the unit cell
  double area = 3.141592653589793 * radius * radius + 4 * radius + 1;
  double ratio = static_cast<double>(orb.images.size()) / area;
  CHECK(ratio > 0.9);
  CHECK(ratio < 1.1);
}

TEST_CASE("uniform_grid midpoints stay inside and average to one half") {
  for (DomainKind k : {DomainKind::Torus2, DomainKind::Interval1}) {
    Domain d(k);
    auto g = uniform_grid(d, 36);
    REQUIRE(g.size() == 36);
    double mx = 0.0;
    for (const Point& p : g) {
      CHECK(p.x > 0.0);
      CHECK(p.x < 1.0);
      mx += p.x;
    }
    CHECK(mx / 36.0 == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("counter rng produces stable moments") {
  CounterRng rng(99, 7);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double g = rng.gaussian();
    s += g;
    s2 += g * g;
  }
  CHECK(std::fabs(s / n) < 0.01);
  CHECK(std::fabs(s2 / n - 1.0) < 0.02);

  CounterRng u(99, 8);
  for (int i = 0; i < 1000; ++i) {
    double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}
