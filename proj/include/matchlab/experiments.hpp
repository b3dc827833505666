#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matchlab/geometry.hpp"

namespace matchlab {

// Reproducible description of one Monte Carlo batch. Records are a pure
// function of (config, trial index); worker count never changes results.
struct ExperimentConfig {
  DomainKind domain = DomainKind::Torus2;
  std::vector<std::size_t> n_values;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  // smoothing time: explicit_t if > 0, otherwise gamma * log(n)^3 / n
  double explicit_t = 0.0;
  double gamma = 1.0;
  int q = 1;           // replication ratio for semi-discrete runs
  double xi = 0.0;     // flatness threshold; 0 = 1/log(n) rule
  std::size_t max_assignment = 20000;
  bool compute_exp = true;  // semi-discrete runs: also price the exp coupling
  int workers = 1;
};

struct TrialRecord {
  std::size_t trial = 0;  // global trial index within the batch
  std::size_t n = 0;
  double t = 0.0;
  std::uint64_t seed = 0;  // substream id
  double energy = 0.0;
  double sup_hess = 0.0;
  bool event_ok = false;
  double cost_bip = 0.0;
  double cost_semi = 0.0;
  double cost_exp = 0.0;
  double wall_ms = 0.0;
  bool failed = false;
};

double gamma_rule_time(const ExperimentConfig& cfg, std::size_t n);
double xi_rule(const ExperimentConfig& cfg, std::size_t n);

// Two n-point families per trial; cost_bip is their matching cost, the
// potential is built from the density difference, the event is the
// intersection over both families' potentials.
std::vector<TrialRecord> run_bipartite(const ExperimentConfig& cfg);

// One n-point family matched against q*n fresh uniform points (replicated
// assignment), plus the exponential-coupling surrogate and the energy.
std::vector<TrialRecord> run_semidiscrete(const ExperimentConfig& cfg);

struct EventRow {
  std::size_t n = 0;
  double t = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;       // certified event test failed
  double frequency = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
};

// Empirical failure frequency of the certified flatness event per n.
// Trial substreams are shared across n for variance reduction.
std::vector<EventRow> run_event_probability(const ExperimentConfig& cfg);

struct ContractivityRow {
  double alpha = 0.0;
  double t = 0.0;
  double mean_cost = 0.0;
  double se = 0.0;
};

// Proxy for W_2^2(mu^n, mu^{n,t}) at t = alpha/n: each X_i replicated m
// times is matched against m heat-evolved samples X_i + sqrt(2t) G folded.
std::vector<ContractivityRow> run_contractivity(DomainKind kind, std::size_t n,
                                                std::span<const double> alphas,
                                                std::size_t trials, int m,
                                                std::uint64_t seed,
                                                std::size_t max_assignment = 20000);

// Sorted matching cost on the interval; returns (mean, standard error).
// The exact expectation is 1/(3(n+1)).
std::pair<double, double> one_d_oracle(std::size_t n, std::size_t trials,
                                       std::uint64_t seed);

struct FitResult {
  double a = 0.0;  // coefficient of log(n)/n
  double b = 0.0;  // coefficient of 1/n
  double se_a = 0.0;
  double se_b = 0.0;
  double r2 = 0.0;
};

// Weighted least squares of per-n means on the basis {log n / n, 1/n},
// weights 1/SE^2 (zero SEs treated as equal weights).
FitResult fit_leading_constant(std::span<const std::size_t> ns,
                               std::span<const double> means,
                               std::span<const double> ses);

// CSV schema (fixed): trial,n,t,seed,energy,sup_hess,event_ok,cost_bip,
// cost_semi,cost_exp,wall_ms
void write_csv(const std::string& path, std::span<const TrialRecord> records);
std::vector<TrialRecord> read_csv(const std::string& path);

// Aggregation helper: per-n mean and SE of one observable, skipping failed
// trials. Accessor picks the column.
struct CellStats {
  std::size_t n = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double se = 0.0;
};
std::vector<CellStats> per_n_stats(std::span<const TrialRecord> records,
                                   double TrialRecord::*field);

}  // namespace matchlab
