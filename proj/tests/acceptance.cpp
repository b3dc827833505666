// Acceptance suite: one line per criterion, PASS/FAIL, nonzero exit on any
// failure. Criteria to run may be selected by number on the command line;
// with no arguments all eleven run in order.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "matchlab/experiments.hpp"
#include "matchlab/heatkernel.hpp"
#include "matchlab/numerics.hpp"
#include "matchlab/potential.hpp"
#include "matchlab/transport.hpp"

using namespace matchlab;

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

struct Outcome {
  bool pass = true;
  std::string detail;
};

void note(Outcome& o, bool ok, const std::string& msg) {
  o.pass = o.pass && ok;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += msg + (ok ? "" : " [VIOLATED]");
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

// 1: exact law on the interval at n=10
Outcome criterion1() {
  Outcome o;
  auto [mean, se] = one_d_oracle(10, 10000, 2024);
  double exact = 1.0 / 33.0;
  note(o, std::fabs(mean - exact) <= 3 * se,
       "mean=" + fmt(mean) + " exact=" + fmt(exact) + " se=" + fmt(se));
  return o;
}

// 2: energy expectation identity plus stability of the log-law remainder
Outcome criterion2() {
  Outcome o;
  const std::size_t n = 100, trials = 500;
  const double t = 1e-3;
  auto lat = std::make_shared<const FrequencyLattice>(
      FrequencyLattice::build(DomainKind::Torus2, t));
  Domain d(DomainKind::Torus2);
  std::vector<double> energies(trials);
  for (std::size_t tr = 0; tr < trials; ++tr) {
    auto pts = d.sample_uniform(77001, tr, n);
    energies[tr] = PotentialField::build(lat, pts, t).dirichlet_energy();
  }
  auto [mean, se] = mean_se(energies);
  double exact = expected_energy_closed_form(*lat, n, t);
  note(o, std::fabs(mean - exact) <= 4 * se,
       "mc=" + fmt(mean) + " exact=" + fmt(exact) + " se=" + fmt(se));

  auto lat4 = FrequencyLattice::build(DomainKind::Torus2, 1e-4);
  std::vector<double> cs;
  for (double tt : {1e-2, 1e-3, 1e-4}) {
    double c = 4 * kPi * n * expected_energy_closed_form(lat4, n, tt) -
               std::fabs(std::log(tt));
    cs.push_back(std::fabs(c));
  }
  double cmax = *std::max_element(cs.begin(), cs.end());
  double cmin = *std::min_element(cs.begin(), cs.end());
  note(o, cmax <= 2.0 * cmin,
       "remainder range [" + fmt(cmin) + "," + fmt(cmax) + "] stable within 2x");
  return o;
}

// 3: trace asymptotics on torus and square
Outcome criterion3() {
  Outcome o;
  auto lat_t = FrequencyLattice::build(DomainKind::Torus2, 1e-4);
  double t = 1e-4;
  double lead = 4 * kPi * t * (trace_deficit(lat_t, t) + 1.0);
  note(o, std::fabs(lead - 1.0) < 1e-6, "torus 4*pi*t*trace=" + fmt(lead));

  // square residual t*trace - 1/(4 pi) fitted on the boundary-term basis
  // {sqrt(t), t}; a pure sqrt(t) model leaves the exact linear term -3t/4
  // unexplained and caps R^2 near 0.984
  auto lat_s = FrequencyLattice::build(DomainKind::Square2, 1e-4);
  std::vector<double> ts = {1e-2, 1e-3, 1e-4}, resid;
  for (double tt : ts) resid.push_back(tt * trace_deficit(lat_s, tt) - 1.0 / (4 * kPi));
  double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double x1 = std::sqrt(ts[i]), x2 = ts[i];
    s11 += x1 * x1;
    s12 += x1 * x2;
    s22 += x2 * x2;
    r1 += x1 * resid[i];
    r2 += x2 * resid[i];
  }
  double det = s11 * s22 - s12 * s12;
  double c1 = (s22 * r1 - s12 * r2) / det, c2 = (s11 * r2 - s12 * r1) / det;
  double mean = std::accumulate(resid.begin(), resid.end(), 0.0) / resid.size();
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double pred = c1 * std::sqrt(ts[i]) + c2 * ts[i];
    ss_res += (resid[i] - pred) * (resid[i] - pred);
    ss_tot += (resid[i] - mean) * (resid[i] - mean);
  }
  double r2fit = 1.0 - ss_res / ss_tot;
  note(o, r2fit > 0.99,
       "square sqrt-shape R2=" + fmt(r2fit) + " c_sqrt=" + fmt(c1) + " c_lin=" + fmt(c2));
  return o;
}

// 4: on-diagonal time-integral identity and its logarithmic size
Outcome criterion4() {
  Outcome o;
  auto lat = FrequencyLattice::build(DomainKind::Torus2, 1e-5);
  for (double t : {1e-4, 1e-3, 1e-2}) {
    double spectral = q_energy_sum(lat, t);
    double quad = integrate_log_panels(
        [&](double s) { return trace_deficit(lat, s); }, 2 * t, 60.0, 32);
    note(o, std::fabs(spectral - quad) <= 1e-8,
         "t=" + fmt(t) + " |spectral-quadrature|=" + fmt(std::fabs(spectral - quad)));
  }
  double worst = 0.0;
  for (int i = 0; i <= 16; ++i) {
    double t = std::pow(10.0, -5.0 + 4.0 * i / 16.0);
    double dev = std::fabs(q_energy_sum(lat, t) - std::fabs(std::log(t)) / (4 * kPi));
    worst = std::max(worst, dev);
  }
  // frozen uniform bound; the observed supremum sits near 1.06
  note(o, worst <= 1.2, "sup |sum - |log t|/(4pi)| = " + fmt(worst));
  return o;
}

FitResult fit_column(const std::vector<TrialRecord>& recs, double TrialRecord::*col) {
  auto stats = per_n_stats(recs, col);
  std::vector<std::size_t> ns;
  std::vector<double> means, ses;
  for (const CellStats& s : stats) {
    if (s.count == 0) continue;
    ns.push_back(s.n);
    means.push_back(s.mean);
    ses.push_back(s.se);
  }
  return fit_leading_constant(ns, means, ses);
}

// 5: bipartite leading constant on the torus
Outcome criterion5() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.domain = DomainKind::Torus2;
  cfg.n_values = {250, 500, 1000, 2000};
  cfg.trials = 50;
  cfg.seed = 20240501;
  FitResult fit = fit_column(run_bipartite(cfg), &TrialRecord::cost_bip);
  double target = 1.0 / (2 * kPi);
  double rel = std::fabs(fit.a - target) / target;
  note(o, rel < 0.15, "a=" + fmt(fit.a) + " (se " + fmt(fit.se_a) + ") target=" +
                          fmt(target) + " rel.dev=" + fmt(rel));
  return o;
}

// 6: semi-discrete constant via the q=4 interpolation
Outcome criterion6() {
  Outcome o;
  std::vector<TrialRecord> all;
  const std::vector<std::pair<std::size_t, std::size_t>> plan = {
      {250, 100}, {500, 100}, {1000, 100}, {2000, 60}};
  for (auto [n, trials] : plan) {
    ExperimentConfig cfg;
    cfg.domain = DomainKind::Torus2;
    cfg.n_values = {n};
    cfg.trials = trials;
    cfg.seed = 20240600 + n;
    cfg.q = 4;
    cfg.compute_exp = false;
    auto recs = run_semidiscrete(cfg);
    all.insert(all.end(), recs.begin(), recs.end());
  }
  FitResult fit = fit_column(all, &TrialRecord::cost_semi);
  double target = (1.0 / (4 * kPi)) * 1.25;
  double rel = std::fabs(fit.a - target) / target;
  note(o, rel < 0.15, "a=" + fmt(fit.a) + " (se " + fmt(fit.se_a) + ") target=" +
                          fmt(target) + " rel.dev=" + fmt(rel));
  return o;
}

// 7: exponential coupling prices the semi-discrete cost
Outcome criterion7() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.domain = DomainKind::Torus2;
  cfg.n_values = {1000};
  cfg.trials = 20;
  cfg.seed = 20240700;
  cfg.q = 4;
  auto recs = run_semidiscrete(cfg);
  std::vector<double> ratios;
  for (const TrialRecord& r : recs)
    if (!r.failed && r.cost_semi > 0) ratios.push_back(r.cost_exp / r.cost_semi);
  std::sort(ratios.begin(), ratios.end());
  double median = ratios[ratios.size() / 2];
  note(o, ratios.size() == 20 && median >= 0.8 && median <= 1.3,
       "median exp/semi ratio = " + fmt(median) + " over " +
           std::to_string(ratios.size()) + " trials");
  return o;
}

// 8: flow-vs-exponential stability budget on synthetic fields
Outcome criterion8() {
  Outcome o;
  Domain d(DomainKind::Torus2);
  auto grid = uniform_grid(d, 25);
  for (double eps : {0.01, 0.05}) {
    double grad_norm = 4 * kPi * kPi * eps;
    VectorField X = [eps](Point p) {
      return Vec2{-2 * kPi * eps * std::sin(2 * kPi * p.x), 0.0};
    };
    for (double xi : {0.0, 0.05}) {
      TimeVectorField Y = [X, xi](double, Point p) { return (1.0 + xi) * X(p); };
      double worst_excess = -1e300;
      for (const Point& p : grid) {
        FlowExpGap g64 = flow_vs_exp_gap(d, X, Y, grad_norm, xi, p, 64);
        FlowExpGap g128 = flow_vs_exp_gap(d, X, Y, grad_norm, xi, p, 128);
        double integrator_err = std::fabs(g64.gap - g128.gap) + 1e-14;
        worst_excess = std::max(worst_excess,
                                g64.gap - (g64.budget + 10 * integrator_err));
      }
      note(o, worst_excess <= 0.0, "eps=" + fmt(eps) + " xi=" + fmt(xi) +
                                       " max gap-budget excess=" + fmt(worst_excess));
    }

    // pushforward distance bound dominates assignment-W2 on pushed clouds
    auto probe = uniform_grid(d, 400);
    std::vector<Point> fa, ga;
    for (const Point& p : probe) {
      Vec2 a = X(p);
      fa.push_back(d.exp_map(p, a));
      ga.push_back(d.exp_map(p, 1.05 * a));
    }
    double bound = pushforward_distance_bound(d, fa, ga);
    double w2 = std::sqrt(bipartite_cost(d, fa, ga).cost);
    note(o, w2 <= bound + 1e-9,
         "eps=" + fmt(eps) + " pushforward W2=" + fmt(w2) + " L2 bound=" + fmt(bound));
  }
  return o;
}

// 9: solver correctness against exhaustive and monotone oracles
Outcome criterion9() {
  Outcome o;
  for (int n = 2; n <= 7; ++n) {
    CounterRng rng(4200 + n, 0);
    int bad = 0;
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<double> cost(n * n);
      for (double& c : cost) c = rng.uniform();
      double solver = solve_assignment(cost, n).cost;
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      double best = 1e300;
      do {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += cost[i * n + perm[i]];
        best = std::min(best, acc);
      } while (std::next_permutation(perm.begin(), perm.end()));
      if (std::fabs(solver - best) > 1e-12) ++bad;
    }
    note(o, bad == 0, "n=" + std::to_string(n) + " brute-force mismatches=" +
                          std::to_string(bad));
  }

  Domain d(DomainKind::Interval1);
  CounterRng rng(4300, 0);
  int bad = 0;
  for (int rep = 0; rep < 100; ++rep) {
    auto A = d.sample_uniform(rng, 9);
    auto B = d.sample_uniform(rng, 9);
    double solver = bipartite_cost(d, A, B).cost;
    auto by_x = [](Point p, Point q) { return p.x < q.x; };
    std::sort(A.begin(), A.end(), by_x);
    std::sort(B.begin(), B.end(), by_x);
    double sorted_cost = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i)
      sorted_cost += (A[i].x - B[i].x) * (A[i].x - B[i].x);
    sorted_cost /= static_cast<double>(A.size());
    if (std::fabs(solver - sorted_cost) > 1e-12) ++bad;
  }
  note(o, bad == 0, "interval monotone mismatches=" + std::to_string(bad));
  return o;
}

// 10: certified event failure decays in n under the default rules
Outcome criterion10() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.domain = DomainKind::Torus2;
  cfg.n_values = {200, 800, 3200};
  cfg.trials = 200;
  cfg.seed = 20241000;
  auto rows = run_event_probability(cfg);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    note(o, rows[i + 1].frequency <= rows[i].wilson_hi + 1e-12,
         "freq(n=" + std::to_string(rows[i + 1].n) + ")=" + fmt(rows[i + 1].frequency) +
             " vs CI-hi(n=" + std::to_string(rows[i].n) + ")=" + fmt(rows[i].wilson_hi));
  note(o, rows.back().frequency < 0.10,
       "freq(n=3200)=" + fmt(rows.back().frequency) + " < 0.10");
  return o;
}

// 11: contractivity proxy grows clearly sublinearly in alpha
Outcome criterion11() {
  Outcome o;
  const std::size_t n = 200;
  double ln = std::log(static_cast<double>(n));
  std::vector<double> alphas = {8 * ln, 16 * ln, 32 * ln, 64 * ln};
  auto rows = run_contractivity(DomainKind::Torus2, n, alphas, 40, 4, 20241100);
  double first = rows.front().mean_cost, last = rows.back().mean_cost;
  double growth = last - first;
  double linear_growth = first * (alphas.back() / alphas.front() - 1.0);
  note(o, first > 0.0 && growth <= 0.25 * linear_growth,
       "growth=" + fmt(growth) + " linear-shape prediction=" + fmt(linear_growth) +
           " ratio=" + fmt(growth / linear_growth));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
      {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8},
      {9, criterion9}, {10, criterion10}, {11, criterion11}};
  const char* names[] = {
      "1d exact matching law",
      "energy expectation identity",
      "trace asymptotics",
      "on-diagonal integral identity",
      "bipartite leading constant",
      "semi-discrete leading constant",
      "exp-coupling near-optimality",
      "flow stability budget",
      "assignment solver correctness",
      "event failure decay",
      "contractivity growth shape"};

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  bool all_pass = true;
  for (const auto& [id, fn] : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), id) == selected.end())
      continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o = fn();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %2d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id,
                names[id - 1], o.detail.c_str(), secs);
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
