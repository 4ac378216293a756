#pragma once

#include <span>
#include <string>
#include <vector>

#include "phi4/gff.hpp"
#include "phi4/stats.hpp"

namespace phi4 {

/// Cutoff scales 0 = k_0 < k_1 < ... < k_m = K.
struct ScaleGrid {
  std::vector<double> knots;

  /// k_j = K 2^{(j-m)/per_octave} for j = 1..m, plus k_0 = 0.
  static ScaleGrid geometric(double K, int m, int per_octave = 1);
  std::size_t intervals() const noexcept { return knots.empty() ? 0 : knots.size() - 1; }
  void validate() const;
};

/// d/dk rho_k(n)^2 / <n>^2.
double jay_squared(double norm, double k, const ModelParams& params);
/// int_{k_j}^{k_{j+1}} J_k(n)^2 dk, exact: (rho_{k_{j+1}}^2 - rho_{k_j}^2)(n) / <n>^2.
std::vector<double> interval_weights(const TorusGrid& grid, const ModelParams& params, double k_lo, double k_hi);
/// rho_k^2 / <n>^2 including the k = 0 convention (zero mode only).
std::vector<double> scale_propagator(const TorusGrid& grid, const ModelParams& params, double k);
double running_tadpole(const TorusGrid& grid, const ModelParams& params, double k);

struct ScaleFlow {
  TorusGrid grid;
  ScaleGrid scales;
  /// <1>_{k_j} per knot (only when requested).
  std::vector<SpectralField> lollipop;
  /// <1>_K.
  SpectralField endpoint;
  /// Fourier coefficients of <30>_K.
  SpectralField trident;
  std::vector<double> tadpoles;
  /// Fourier increments <1>_{k_{j+1}} - <1>_{k_j} at a single probe mode (for independence tests).
  std::vector<Complex> probe_increments;
};

struct ScaleFlowOptions {
  bool keep_lollipop = false;
  std::size_t probe_mode = 0;
};

/// Weight and tadpole tables shared by every member of an ensemble.
class ScaleFlowSampler {
 public:
  ScaleFlowSampler(const TorusGrid& grid, const ModelParams& params, const ScaleGrid& scales);
  ScaleFlow sample(Rng& rng, const ScaleFlowOptions& options = {}) const;

 private:
  TorusGrid grid_;
  ScaleGrid scales_;
  std::vector<double> var0_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> tadpoles_;
};

ScaleFlow sample_scale_flow(const TorusGrid& grid, const ModelParams& params, const ScaleGrid& scales, Rng& rng,
                            const ScaleFlowOptions& options = {});

/// Empirical E|F<30>_K(n)|^2 with a batch-mean error.
Estimate trident_fourier_variance(std::span<const ScaleFlow> ensemble, std::size_t mode, std::size_t batches = 20);
/// Same, from a bare list of sampled coefficients.
Estimate trident_fourier_variance(std::span<const Complex> coeffs, std::size_t batches = 20);

/// Exact E|F<30>_K(n)|^2 of the discretised accumulation on this grid.
double trident_variance_prediction(const TorusGrid& grid, const ModelParams& params, const ScaleGrid& scales,
                                   std::span<const std::size_t> modes, std::vector<double>* out = nullptr);

struct LadderRow {
  double K = 0.0;
  double norm = 0.0;
  double bracket = 0.0;
  double variance = 0.0;
  double err = 0.0;
};

std::string variance_ladder_csv(std::span<const LadderRow> rows);

}  // namespace phi4
