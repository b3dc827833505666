#include "matchlab/heatkernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace matchlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kPi = 3.141592653589793238462643383279;

double lambda_scale(DomainKind kind) {
  // lambda = scale^2 * |k|^2
  return kind == DomainKind::Torus2 ? kTwoPi : kPi;
}

// d^m/du^m of cos(u) evaluated as a phase-shifted cosine
double cos_shift(double u, int m) {
  switch (m & 3) {
    case 0: return std::cos(u);
    case 1: return -std::sin(u);
    case 2: return -std::cos(u);
    default: return std::sin(u);
  }
}

double sin_shift(double u, int m) {
  switch (m & 3) {
    case 0: return std::sin(u);
    case 1: return std::cos(u);
    case 2: return -std::sin(u);
    default: return -std::cos(u);
  }
}

double int_pow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

std::size_t tail_estimate(int kmax) {
  // overestimate of the mode count below frequency 2*kmax
  double m = 2.0 * kmax + 1.0;
  return static_cast<std::size_t>(4.0 * m * m);
}

}  // namespace

FrequencyLattice FrequencyLattice::build(DomainKind kind, double min_time, double tol) {
  if (!(min_time > 0.0)) throw std::invalid_argument("FrequencyLattice: min_time must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("FrequencyLattice: tol must be > 0");
  FrequencyLattice lat;
  lat.kind_ = kind;
  lat.min_time_ = min_time;
  lat.tol_ = tol;

  double ls = lambda_scale(kind);
  int kmax = 1;
  while (std::exp(-ls * ls * kmax * kmax * min_time) *
             static_cast<double>(tail_estimate(kmax)) > tol) {
    ++kmax;
    if (kmax > 100000) throw std::invalid_argument("FrequencyLattice: cutoff too large");
  }
  lat.kmax_ = kmax;
  lat.lambda_max_ = ls * ls * kmax * kmax;
  lat.tail_count_ = tail_estimate(kmax);

  long long k2max = static_cast<long long>(kmax) * kmax;
  switch (kind) {
    case DomainKind::Torus2:
      // one cos and one sin mode per {k, -k} pair
      for (int k1 = 0; k1 <= kmax; ++k1) {
        int lo = (k1 == 0) ? 1 : -kmax;
        for (int k2 = lo; k2 <= kmax; ++k2) {
          long long r2 = static_cast<long long>(k1) * k1 + static_cast<long long>(k2) * k2;
          if (r2 == 0 || r2 > k2max) continue;
          double lambda = ls * ls * static_cast<double>(r2);
          lat.modes_.push_back({k1, k2, false, lambda, std::sqrt(2.0)});
          lat.modes_.push_back({k1, k2, true, lambda, std::sqrt(2.0)});
        }
      }
      break;
    case DomainKind::Square2:
      for (int k1 = 0; k1 <= kmax; ++k1)
        for (int k2 = 0; k2 <= kmax; ++k2) {
          long long r2 = static_cast<long long>(k1) * k1 + static_cast<long long>(k2) * k2;
          if (r2 == 0 || r2 > k2max) continue;
          double norm = (k1 > 0 ? std::sqrt(2.0) : 1.0) * (k2 > 0 ? std::sqrt(2.0) : 1.0);
          lat.modes_.push_back({k1, k2, false, ls * ls * static_cast<double>(r2), norm});
        }
      break;
    case DomainKind::Interval1:
      for (int k = 1; k <= kmax; ++k)
        lat.modes_.push_back({k, 0, false, ls * ls * static_cast<double>(k) * k,
                              std::sqrt(2.0)});
      break;
  }
  std::sort(lat.modes_.begin(), lat.modes_.end(), [](const Mode& a, const Mode& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.k1 != b.k1) return a.k1 < b.k1;
    if (a.k2 != b.k2) return a.k2 < b.k2;
    return a.sin_phase < b.sin_phase;
  });
  return lat;
}

double FrequencyLattice::eval_mode(const Mode& m, Point x, int dx1, int dx2) const {
  if (kind_ == DomainKind::Torus2) {
    double w1 = kTwoPi * m.k1, w2 = kTwoPi * m.k2;
    double theta = w1 * x.x + w2 * x.y;
    int order = dx1 + dx2;
    double factor = m.norm * int_pow(w1, dx1) * int_pow(w2, dx2);
    return factor * (m.sin_phase ? sin_shift(theta, order) : cos_shift(theta, order));
  }
  // Neumann product-cosine basis
  double w1 = kPi * m.k1;
  double a = int_pow(w1, dx1) * cos_shift(w1 * x.x, dx1);
  if (kind_ == DomainKind::Interval1) return m.norm * a;
  double w2 = kPi * m.k2;
  double b = int_pow(w2, dx2) * cos_shift(w2 * x.y, dx2);
  return m.norm * a * b;
}

void FrequencyLattice::check_time(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("time must be > 0");
  double bound = std::exp(-lambda_max_ * t) * static_cast<double>(tail_count_);
  if (bound > tol_) throw TruncationError(t, bound);
}

namespace {

// summation weights stop contributing below this relative floor
constexpr double kTermFloor = 1e-18;

}  // namespace

double heat_kernel(const FrequencyLattice& lat, double t, Point x, Point y) {
  lat.check_time(t);
  double s = 1.0;
  for (const Mode& m : lat.modes()) {
    double w = std::exp(-m.lambda * t);
    if (w < kTermFloor) break;
    // grouping the mode product keeps the sum bit-symmetric in (x, y)
    s += w * (lat.eval_mode(m, x) * lat.eval_mode(m, y));
  }
  return s;
}

double heat_kernel_images(const Domain& domain, double t, Point x, Point y) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_kernel_images: time must be > 0");
  if (t > 1.0)
    throw std::invalid_argument("heat_kernel_images: supported range is 0 < t <= 1");
  const double reach = std::sqrt(4.0 * t * 45.0);  // exp(-45) tail per Gaussian
  switch (domain.kind()) {
    case DomainKind::Torus2: {
      int range = static_cast<int>(std::ceil(reach)) + 1;
      double dx = x.x - y.x, dy = x.y - y.y;
      double s = 0.0;
      for (int m1 = -range; m1 <= range; ++m1)
        for (int m2 = -range; m2 <= range; ++m2) {
          double rx = dx + m1, ry = dy + m2;
          s += std::exp(-(rx * rx + ry * ry) / (4.0 * t));
        }
      return s / (4.0 * kPi * t);
    }
    case DomainKind::Square2: {
      IsometryOrbit orbit = domain.orbit_images(x, reach + 2.0);
      double s = 0.0;
      for (const Vec2& img : orbit.images) {
        double rx = img.x - y.x, ry = img.y - y.y;
        s += std::exp(-(rx * rx + ry * ry) / (4.0 * t));
      }
      return s / (4.0 * kPi * t);
    }
    case DomainKind::Interval1: {
      int mlo = static_cast<int>(std::floor((-reach - 1.0) / 2.0)) - 1;
      int mhi = static_cast<int>(std::ceil((reach + 1.0) / 2.0)) + 1;
      double s = 0.0;
      for (int m = mlo; m <= mhi; ++m) {
        double r1 = 2.0 * m + x.x - y.x;
        double r2 = 2.0 * m - x.x - y.x;
        s += std::exp(-r1 * r1 / (4.0 * t)) + std::exp(-r2 * r2 / (4.0 * t));
      }
      return s / std::sqrt(4.0 * kPi * t);
    }
  }
  throw std::logic_error("unreachable");
}

double q_kernel(const FrequencyLattice& lat, double t, Point x, Point y) {
  lat.check_time(t);
  double s = 0.0;
  for (const Mode& m : lat.modes()) {
    double w = std::exp(-m.lambda * t) / m.lambda;
    if (w < kTermFloor) break;
    s += w * (lat.eval_mode(m, x) * lat.eval_mode(m, y));
  }
  return s;
}

Vec2 q_grad(const FrequencyLattice& lat, double t, Point x, Point y) {
  lat.check_time(t);
  Vec2 g;
  for (const Mode& m : lat.modes()) {
    double w = std::exp(-m.lambda * t) / m.lambda;
    if (w * m.lambda < kTermFloor) break;  // derivative terms carry a lambda^{1/2}-ish factor
    double phix = w * lat.eval_mode(m, x);
    g.x += phix * lat.eval_mode(m, y, 1, 0);
    g.y += phix * lat.eval_mode(m, y, 0, 1);
  }
  return g;
}

double trace_deficit(const FrequencyLattice& lat, double t) {
  lat.check_time(t);
  double s = 0.0;
  for (const Mode& m : lat.modes()) {
    double w = std::exp(-m.lambda * t);
    if (w < kTermFloor) break;
    s += w;
  }
  return s;
}

double q_energy_sum(const FrequencyLattice& lat, double t) {
  lat.check_time(t);
  double s = 0.0;
  for (const Mode& m : lat.modes()) {
    double w = std::exp(-2.0 * m.lambda * t) / m.lambda;
    if (w < kTermFloor) break;
    s += w;
  }
  return s;
}

namespace {

double tensor_norm_2d(int N, const double* comp) {
  // comp holds the distinct partials ordered by d/dx count descending
  if (N == 1) return std::sqrt(comp[0] * comp[0] + comp[1] * comp[1]);
  if (N == 2) {
    // operator norm of a symmetric 2x2
    double mean = 0.5 * (comp[0] + comp[2]);
    double r = std::sqrt(0.25 * (comp[0] - comp[2]) * (comp[0] - comp[2]) + comp[1] * comp[1]);
    return std::fabs(mean) + r;
  }
  // N == 3: Frobenius with multiplicities 1,3,3,1
  return std::sqrt(comp[0] * comp[0] + 3.0 * comp[1] * comp[1] + 3.0 * comp[2] * comp[2] +
                   comp[3] * comp[3]);
}

double deriv_norm_impl(const FrequencyLattice& lat, double t, Point x, Point y, int N,
                       bool q_weight) {
  if (N < 1 || N > 3) throw std::invalid_argument("derivative order must be in {1,2,3}");
  lat.check_time(t);
  double comp[4] = {0, 0, 0, 0};
  bool interval = lat.kind() == DomainKind::Interval1;
  for (const Mode& m : lat.modes()) {
    double w = std::exp(-m.lambda * t);
    if (q_weight) w /= m.lambda;
    if (w * std::pow(m.lambda, 0.5 * N) < kTermFloor) break;
    double phix = w * lat.eval_mode(m, x);
    for (int a = 0; a <= N; ++a) {
      if (interval && a != N) continue;
      comp[N - a] += phix * lat.eval_mode(m, y, a, N - a);
    }
  }
  return tensor_norm_2d(N, comp);
}

}  // namespace

double heat_kernel_deriv_norm(const FrequencyLattice& lat, double t, Point x, Point y, int N) {
  return deriv_norm_impl(lat, t, x, y, N, false);
}

double q_deriv_norm(const FrequencyLattice& lat, double t, Point x, Point y, int N) {
  return deriv_norm_impl(lat, t, x, y, N, true);
}

KernelBoundFit verify_kernel_bounds(const FrequencyLattice& lat,
                                    std::span<const double> times,
                                    std::span<const Point> points) {
  if (times.empty() || points.empty())
    throw std::invalid_argument("verify_kernel_bounds: empty sample grid");
  Domain domain(lat.kind());
  KernelBoundFit fit;
  fit.t_samples = times.size();
  fit.point_samples = points.size();

  // near-diagonal constant first, then the tightest decay base that keeps
  // c0/t * a^{-d^2/t} above every off-diagonal sample
  double c0 = 0.0;
  double a_hat = 1e9;
  for (double t : times) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i; j < points.size(); ++j) {
        Point x = points[i], y = points[j];
        double d = domain.distance(x, y);
        double s = d * d / t;
        double p = heat_kernel(lat, t, x, y);
        if (p <= 0.0) continue;  // truncated series can graze zero far off-diagonal
        if (s <= 1.0) c0 = std::max(c0, p * t);

        for (int N = 1; N <= 3; ++N) {
          double dn = heat_kernel_deriv_norm(lat, t, x, y, N);
          double env = (std::pow(t, -0.5 * N) + std::pow(d, N) / std::pow(t, N)) * p;
          fit.c_deriv[N - 1] = std::max(fit.c_deriv[N - 1], dn / env);
          double qn = q_deriv_norm(lat, t, x, y, N);
          fit.c_qderiv[N - 1] =
              std::max(fit.c_qderiv[N - 1], qn * (std::pow(d, N) + std::pow(t, 0.5 * N)));
        }
      }
    }
  }
  for (double t : times) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) {
        double d = domain.distance(points[i], points[j]);
        double s = d * d / t;
        if (s <= 1.0) continue;
        double p = heat_kernel(lat, t, points[i], points[j]);
        if (p <= 0.0 || p * t >= c0) continue;
        a_hat = std::min(a_hat, std::pow(c0 / (p * t), 1.0 / s));
      }
    }
  }
  fit.c0_hat = c0;
  fit.a_hat = a_hat < 1e9 ? a_hat : 1.0 + 1e-9;
  return fit;
}

}  // namespace matchlab
