#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phi4/dynamics.hpp"
#include "phi4/phase_geometry.hpp"
#include "phi4/stats.hpp"

namespace phi4 {

struct LogProbability {
  double log_p = 0.0;
  double err = 0.0;
  /// Zero events: log_p is the rule-of-three bound log(3/n).
  bool upper_bound = false;
};

LogProbability binomial_log_probability(std::uint64_t events, std::uint64_t trials);

struct RateInput {
  int N = 0;
  LogProbability prob;
};

struct RateRow {
  int N = 0;
  double rate = 0.0;
  double err = 0.0;
  bool upper_bound = false;
};

struct RateReport {
  std::vector<RateRow> rows;
  /// Weighted mean of the normalised rates (the surface-order constant -c).
  Estimate constant;
  double chi2 = 0.0;
  /// Largest |r_i - r_j| / sqrt(e_i^2 + e_j^2) over pairs.
  double max_pair_z = 0.0;
  bool pairwise_consistent = false;
  bool inconclusive = false;
};

/// Normalises log P by N^{dim-1}; pairs are consistent when max_pair_z <= pair_z.
RateReport ldp_rate(const std::vector<RateInput>& inputs, int dim, double pair_z = 2.0);

struct UmbrellaWindow {
  double kappa = 0.0;
  double centre = 0.0;
  std::vector<double> m;
};

struct WhamResult {
  double volume = 1.0;
  std::vector<double> free_energy;
  /// Pooled samples and their unbiased log weights (log-sum-exp = 0).
  std::vector<double> m;
  std::vector<double> log_weight;
  int iterations = 0;
};

/// Binless WHAM with bias U_i(m) = kappa_i volume / 2 (m - centre_i)^2.
WhamResult wham(const std::vector<UmbrellaWindow>& windows, double volume, double tol = 1e-10, int max_iter = 100000);
double wham_log_probability(const WhamResult& w, const std::function<bool(double)>& event);
/// log of the unbiased probability mass of each bin [edges[i], edges[i+1]).
std::vector<double> wham_log_histogram(const WhamResult& w, const std::vector<double>& edges);

struct UmbrellaPlan {
  SimConfig base;
  std::vector<double> centres;
  double kappa = 1.0;
  std::uint64_t steps_per_exchange = 10;
  std::uint64_t exchanges = 1000;
  std::uint64_t burn_in_exchanges = 100;
  bool replica_exchange = true;
  /// Start each window from an axis-0 strip of the plus phase whose width matches
  /// the centre; otherwise from the constant field equal to the centre.
  bool strip_start = true;
};

struct UmbrellaRun {
  std::vector<UmbrellaWindow> windows;
  double exchange_acceptance = 0.0;
};

/// Umbrella sampling of m_N with one chain per centre; neighbouring windows swap
/// configurations with the Metropolis rule. One m sample per exchange round.
UmbrellaRun run_umbrella(const UmbrellaPlan& plan, std::uint64_t seed);

struct UmbrellaSummary {
  /// log P(|m_N| < threshold).
  LogProbability prob;
  /// Poincare quotient of chi_m(m_N).
  Estimate poincare;
  WhamResult fit;
};

/// WHAM on half-line windows (m >= 0, law even in m) with a delete-one-block
/// jackknife over `groups` contiguous stretches of every window's series.
UmbrellaSummary summarise_umbrella(const std::vector<UmbrellaWindow>& windows, double volume, double threshold,
                                   double chi_scale, std::size_t groups = 10);

struct PeierlsPoint {
  std::size_t size = 0;
  LogProbability prob;
};

struct PeierlsFit {
  std::vector<PeierlsPoint> points;
  LineFit fit;
  bool upper_bound_only = false;
  bool negative_at_3sigma = false;
};

/// Weighted fit of log P(all of B bad) against |B| (points with size 0 or an upper bound are not fitted).
PeierlsFit peierls_decay(const std::vector<PeierlsPoint>& points);
/// Sets of `size` blocks pairwise at *-distance >= 2 along axis 0.
std::vector<std::size_t> separated_block_set(const BlockPartition& part, std::size_t size);
/// Fraction of translates of `blocks` on which every block is bad, and the translate count.
std::pair<std::size_t, std::size_t> count_all_bad(const PhaseLabel& label, const std::vector<std::size_t>& blocks);
/// log of the mean of per-sample event fractions with a batch-mean error; a zero mean
/// gives the rule-of-three bound over `trials_per_sample` * samples.
LogProbability log_probability_from_fractions(const std::vector<double>& fractions, double trials_per_sample,
                                              std::size_t batches = 20);

struct QMoment {
  double exponent = 0.0;
  double err = 0.0;
  bool defined = false;
  bool heavy_tail = false;
};

/// log<prod cosh>/(|B1|+|B2|+|B3|) from per-sample log products, jackknife over groups.
QMoment q_moment_estimate(const std::vector<double>& log_products, std::size_t total_blocks, std::size_t groups = 20);

/// Quintic smoothstep test function: odd, non-decreasing, equal to +-1 outside (-m, m).
double chi_m(double x, double m) noexcept;
double chi_m_derivative(double x, double m) noexcept;

struct GapEstimate {
  double lambda = 0.0;
  double err = 0.0;
  double tau_int = 0.0;
  bool inconclusive = false;
  std::string reason;
};

/// Rate of exponential decay of the autocovariance of chi_m(m_N) fitted over lags [tau, 5 tau].
GapEstimate spectral_gap_estimate(const std::vector<double>& m_series, double dt, double chi_scale,
                                  std::size_t batches = 20, std::uint64_t seed = 7);

/// <chi'(m)^2> / (volume <chi(m)^2>) under the WHAM density: the Poincare quotient of chi_m(m_N).
double poincare_quotient(const WhamResult& w, double chi_scale);
/// Same quotient from plain stationary samples.
double poincare_quotient(const std::vector<double>& m_samples, double volume, double chi_scale);

std::string hist_csv(const std::vector<double>& edges, const std::vector<double>& counts);
std::string rate_vs_n_csv(const RateReport& r);
struct SlopeRow {
  double beta = 0.0;
  double slope = 0.0;
  double err = 0.0;
};
std::string slope_vs_beta_csv(const std::vector<SlopeRow>& rows);
struct GapRow {
  int N = 0;
  double gap = 0.0;
  double err = 0.0;
  std::string method;
};
std::string gap_vs_n_csv(const std::vector<GapRow>& rows);

}  // namespace phi4
