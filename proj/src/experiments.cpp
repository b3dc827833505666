#include "matchlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "matchlab/heatkernel.hpp"
#include "matchlab/numerics.hpp"
#include "matchlab/potential.hpp"
#include "matchlab/transport.hpp"

namespace matchlab {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto loop = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int nthreads = std::min<std::size_t>(workers, count);
  pool.reserve(nthreads);
  for (int w = 0; w < nthreads; ++w) pool.emplace_back(loop);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

double now_ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

// one immutable lattice per n, shared read-only across worker threads
struct CellContext {
  std::size_t n = 0;
  double t = 0.0;
  double xi = 0.0;
  std::shared_ptr<const FrequencyLattice> lattice;
};

std::vector<CellContext> build_cells(const ExperimentConfig& cfg) {
  if (cfg.n_values.empty())
    throw std::invalid_argument("experiment: n_values must be non-empty");
  if (cfg.trials == 0) throw std::invalid_argument("experiment: trials must be >= 1");
  std::vector<CellContext> cells;
  cells.reserve(cfg.n_values.size());
  for (std::size_t n : cfg.n_values) {
    if (n == 0) throw std::invalid_argument("experiment: n must be >= 1");
    CellContext c;
    c.n = n;
    c.t = gamma_rule_time(cfg, n);
    c.xi = xi_rule(cfg, n);
    c.lattice = std::make_shared<FrequencyLattice>(
        FrequencyLattice::build(cfg.domain, c.t));
    cells.push_back(std::move(c));
  }
  return cells;
}

}  // namespace

double gamma_rule_time(const ExperimentConfig& cfg, std::size_t n) {
  if (cfg.explicit_t > 0.0) return cfg.explicit_t;
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("experiment: gamma must be > 0");
  double ln = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
  return cfg.gamma * ln * ln * ln / static_cast<double>(n);
}

double xi_rule(const ExperimentConfig& cfg, std::size_t n) {
  if (cfg.xi > 0.0) return cfg.xi;
  return 1.0 / std::log(static_cast<double>(std::max<std::size_t>(n, 3)));
}

std::vector<TrialRecord> run_bipartite(const ExperimentConfig& cfg) {
  std::vector<CellContext> cells = build_cells(cfg);
  const Domain domain(cfg.domain);
  std::vector<TrialRecord> records(cells.size() * cfg.trials);

  parallel_for(records.size(), cfg.workers, [&](std::size_t idx) {
    const CellContext& cell = cells[idx / cfg.trials];
    std::size_t trial = idx % cfg.trials;
    auto t0 = std::chrono::steady_clock::now();
    TrialRecord& rec = records[idx];
    rec = TrialRecord{};
    rec.trial = trial;
    rec.n = cell.n;
    rec.t = cell.t;
    rec.seed = idx;
    rec.energy = rec.sup_hess = rec.cost_bip = rec.cost_semi = rec.cost_exp = kNan;
    try {
      CounterRng rng(cfg.seed, idx);
      std::vector<Point> X = domain.sample_uniform(rng, cell.n);
      std::vector<Point> Y = domain.sample_uniform(rng, cell.n);

      PotentialField f0 = PotentialField::build(cell.lattice, X, cell.t);
      PotentialField f1 = PotentialField::build(cell.lattice, Y, cell.t);
      PotentialField f = f1 - f0;
      rec.energy = f.dirichlet_energy();

      EventCheckConfig ev;
      ev.xi = cell.xi;
      SupHessianResult s0 = certified_sup_hessian(f0, ev);
      SupHessianResult s1 = certified_sup_hessian(f1, ev);
      rec.sup_hess = std::max(s0.certified, s1.certified);
      rec.event_ok = s0.event_ok && s1.event_ok;

      if (cell.n <= cfg.max_assignment) rec.cost_bip = bipartite_cost(domain, X, Y).cost;
    } catch (const std::exception&) {
      rec.failed = true;
    }
    rec.wall_ms = now_ms_since(t0);
  });
  return records;
}

std::vector<TrialRecord> run_semidiscrete(const ExperimentConfig& cfg) {
  if (cfg.q < 1) throw std::invalid_argument("experiment: q must be >= 1");
  std::vector<CellContext> cells = build_cells(cfg);
  const Domain domain(cfg.domain);
  std::vector<TrialRecord> records(cells.size() * cfg.trials);

  parallel_for(records.size(), cfg.workers, [&](std::size_t idx) {
    const CellContext& cell = cells[idx / cfg.trials];
    std::size_t trial = idx % cfg.trials;
    auto t0 = std::chrono::steady_clock::now();
    TrialRecord& rec = records[idx];
    rec = TrialRecord{};
    rec.trial = trial;
    rec.n = cell.n;
    rec.t = cell.t;
    rec.seed = idx;
    rec.energy = rec.sup_hess = rec.cost_bip = rec.cost_semi = rec.cost_exp = kNan;
    try {
      CounterRng rng(cfg.seed, idx);
      std::size_t qn = cell.n * static_cast<std::size_t>(cfg.q);
      std::vector<Point> X = domain.sample_uniform(rng, cell.n);
      std::vector<Point> Y = domain.sample_uniform(rng, qn);

      PotentialField f = PotentialField::build(cell.lattice, X, cell.t);
      rec.energy = f.dirichlet_energy();

      EventCheckConfig ev;
      ev.xi = cell.xi;
      SupHessianResult s = certified_sup_hessian(f, ev);
      rec.sup_hess = s.certified;
      rec.event_ok = s.event_ok;

      if (qn <= cfg.max_assignment) {
        rec.cost_semi = replicated_cost(domain, X, Y, cfg.q);
        if (cfg.compute_exp)
          rec.cost_exp = exp_pushforward_cost(domain, f, X, qn).assignment_cost;
      }
    } catch (const std::exception&) {
      rec.failed = true;
    }
    rec.wall_ms = now_ms_since(t0);
  });
  return records;
}

std::vector<EventRow> run_event_probability(const ExperimentConfig& cfg) {
  std::vector<CellContext> cells = build_cells(cfg);
  const Domain domain(cfg.domain);
  std::vector<EventRow> rows(cells.size());

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const CellContext& cell = cells[c];
    std::vector<std::uint8_t> fail(cfg.trials, 0);
    // substream = trial index, shared across n (common random numbers)
    parallel_for(cfg.trials, cfg.workers, [&](std::size_t trial) {
      CounterRng rng(cfg.seed, trial);
      std::vector<Point> X = domain.sample_uniform(rng, cell.n);
      PotentialField f = PotentialField::build(cell.lattice, X, cell.t);
      EventCheckConfig ev;
      ev.xi = cell.xi;
      fail[trial] = certified_sup_hessian(f, ev).event_ok ? 0 : 1;
    });
    EventRow& row = rows[c];
    row.n = cell.n;
    row.t = cell.t;
    row.trials = cfg.trials;
    for (std::uint8_t f : fail) row.failures += f;
    row.frequency = static_cast<double>(row.failures) / static_cast<double>(cfg.trials);
    auto [lo, hi] = wilson_interval(row.failures, cfg.trials);
    row.wilson_lo = lo;
    row.wilson_hi = hi;
  }
  return rows;
}

std::vector<ContractivityRow> run_contractivity(DomainKind kind, std::size_t n,
                                                std::span<const double> alphas,
                                                std::size_t trials, int m,
                                                std::uint64_t seed,
                                                std::size_t max_assignment) {
  if (n == 0 || trials == 0 || m < 1)
    throw std::invalid_argument("run_contractivity: need n, trials, m >= 1");
  if (n * static_cast<std::size_t>(m) > max_assignment)
    throw std::invalid_argument(
        "run_contractivity: assignment size " + std::to_string(n * m) +
        " exceeds budget " + std::to_string(max_assignment) +
        "; raise max_assignment to at least " + std::to_string(n * m));
  const Domain domain(kind);
  std::vector<ContractivityRow> rows;
  rows.reserve(alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    double alpha = alphas[a];
    if (!(alpha > 0.0)) throw std::invalid_argument("run_contractivity: alpha must be > 0");
    double t = alpha / static_cast<double>(n);
    double sigma = std::sqrt(2.0 * t);
    std::vector<double> costs(trials);
    for (std::size_t trial = 0; trial < trials; ++trial) {
      // the point family is shared across alphas; the jitter stream is
      // offset so different alphas stay independent
      CounterRng rng_pts(seed, trial);
      std::vector<Point> X = domain.sample_uniform(rng_pts, n);
      CounterRng rng_jit(seed, (a + 1) * 1000003ull + trial);
      std::vector<Point> Y;
      Y.reserve(n * m);
      for (const Point& p : X) {
        for (int r = 0; r < m; ++r) {
          double gx = p.x + sigma * rng_jit.gaussian();
          double gy = domain.dim() == 2 ? p.y + sigma * rng_jit.gaussian() : 0.0;
          Y.push_back(domain.fold(gx, gy));
        }
      }
      costs[trial] = replicated_cost(domain, X, Y, m);
    }
    auto [mean, se] = mean_se(costs);
    rows.push_back({alpha, t, mean, se});
  }
  return rows;
}

std::pair<double, double> one_d_oracle(std::size_t n, std::size_t trials,
                                       std::uint64_t seed) {
  if (n == 0 || trials == 0)
    throw std::invalid_argument("one_d_oracle: need n, trials >= 1");
  std::vector<double> costs(trials);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    CounterRng rng(seed, trial);
    std::vector<double> u(n), v(n);
    for (double& x : u) x = rng.uniform();
    for (double& x : v) x = rng.uniform();
    std::sort(u.begin(), u.end());
    std::sort(v.begin(), v.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (u[i] - v[i]) * (u[i] - v[i]);
    costs[trial] = acc / static_cast<double>(n);
  }
  return mean_se(costs);
}

FitResult fit_leading_constant(std::span<const std::size_t> ns,
                               std::span<const double> means,
                               std::span<const double> ses) {
  const std::size_t m = ns.size();
  if (means.size() != m || ses.size() != m)
    throw std::invalid_argument("fit_leading_constant: rows not aligned");
  {
    std::vector<std::size_t> distinct(ns.begin(), ns.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3)
      throw std::invalid_argument("fit_leading_constant: need >= 3 distinct n values");
  }
  bool all_positive = true;
  for (double s : ses)
    if (!(s > 0.0)) all_positive = false;

  double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double n = static_cast<double>(ns[i]);
    double x1 = std::log(n) / n;
    double x2 = 1.0 / n;
    double w = all_positive ? 1.0 / (ses[i] * ses[i]) : 1.0;
    s11 += w * x1 * x1;
    s12 += w * x1 * x2;
    s22 += w * x2 * x2;
    r1 += w * x1 * means[i];
    r2 += w * x2 * means[i];
  }
  double det = s11 * s22 - s12 * s12;
  if (!(std::fabs(det) > 0.0))
    throw std::invalid_argument("fit_leading_constant: singular design (collinear n values)");

  FitResult fit;
  fit.a = (s22 * r1 - s12 * r2) / det;
  fit.b = (s11 * r2 - s12 * r1) / det;
  // with weights 1/se^2 the inverse normal matrix is the coefficient covariance
  if (all_positive) {
    fit.se_a = std::sqrt(s22 / det);
    fit.se_b = std::sqrt(s11 / det);
  }

  double wsum = 0, ybar = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double w = all_positive ? 1.0 / (ses[i] * ses[i]) : 1.0;
    wsum += w;
    ybar += w * means[i];
  }
  ybar /= wsum;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double n = static_cast<double>(ns[i]);
    double w = all_positive ? 1.0 / (ses[i] * ses[i]) : 1.0;
    double pred = fit.a * std::log(n) / n + fit.b / n;
    ss_res += w * (means[i] - pred) * (means[i] - pred);
    ss_tot += w * (means[i] - ybar) * (means[i] - ybar);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

namespace {

const char* kCsvHeader =
    "trial,n,t,seed,energy,sup_hess,event_ok,cost_bip,cost_semi,cost_exp,wall_ms";

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void write_csv(const std::string& path, std::span<const TrialRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out << kCsvHeader << "\n";
  for (const TrialRecord& r : records) {
    out << r.trial << ',' << r.n << ',' << fmt_double(r.t) << ',' << r.seed << ','
        << fmt_double(r.energy) << ',' << fmt_double(r.sup_hess) << ','
        << (r.event_ok ? 1 : 0) << ',' << fmt_double(r.cost_bip) << ','
        << fmt_double(r.cost_semi) << ',' << fmt_double(r.cost_exp) << ','
        << fmt_double(r.wall_ms) << "\n";
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

std::vector<TrialRecord> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader)
    throw std::runtime_error("read_csv: unexpected header in " + path);

  std::vector<TrialRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() != 11)
      throw std::runtime_error("read_csv: line " + std::to_string(lineno) +
                               ": expected 11 columns, got " + std::to_string(cols.size()));
    TrialRecord r;
    try {
      r.trial = std::stoull(cols[0]);
      r.n = std::stoull(cols[1]);
      r.t = std::stod(cols[2]);
      r.seed = std::stoull(cols[3]);
      r.energy = std::stod(cols[4]);
      r.sup_hess = std::stod(cols[5]);
      r.event_ok = std::stoi(cols[6]) != 0;
      r.cost_bip = std::stod(cols[7]);
      r.cost_semi = std::stod(cols[8]);
      r.cost_exp = std::stod(cols[9]);
      r.wall_ms = std::stod(cols[10]);
    } catch (const std::exception&) {
      throw std::runtime_error("read_csv: line " + std::to_string(lineno) +
                               ": malformed value");
    }
    records.push_back(r);
  }
  return records;
}

std::vector<CellStats> per_n_stats(std::span<const TrialRecord> records,
                                   double TrialRecord::*field) {
  std::vector<std::size_t> ns;
  for (const TrialRecord& r : records)
    if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
  std::sort(ns.begin(), ns.end());

  std::vector<CellStats> out;
  out.reserve(ns.size());
  for (std::size_t n : ns) {
    std::vector<double> vals;
    for (const TrialRecord& r : records) {
      if (r.n != n || r.failed) continue;
      double v = r.*field;
      if (std::isnan(v)) continue;
      vals.push_back(v);
    }
    CellStats cs;
    cs.n = n;
    cs.count = vals.size();
    if (!vals.empty()) {
      auto [mean, se] = mean_se(vals);
      cs.mean = mean;
      cs.se = se;
    }
    out.push_back(cs);
  }
  return out;
}

}  // namespace matchlab
