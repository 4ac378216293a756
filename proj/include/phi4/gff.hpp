#pragma once

#include <limits>
#include <string>
#include <vector>

#include "phi4/rng.hpp"
#include "phi4/torus.hpp"

namespace phi4 {

inline constexpr double kNoCutoff = std::numeric_limits<double>::infinity();

struct ModelParams {
  double beta = 1.0;
  double eta = 1.0;
  /// UV cutoff; kNoCutoff keeps every grid frequency.
  double K = kNoCutoff;
  CutoffProfile profile{};

  void validate() const;
};

struct RenormConstants {
  double tadpole = 0.0;
  double sunset = 0.0;
  double gamma = 0.0;
  double lattice_mass = 0.0;
};

/// <n>^2 = eta + 4 pi^2 |n|^2.
double bracket_squared(double norm, double eta) noexcept;

/// rho_K(n)^2 / <n>^2 per mode.
std::vector<double> propagator_weights(const TorusGrid& grid, const ModelParams& params);

double tadpole(const TorusGrid& grid, const ModelParams& params);
double sunset(const TorusGrid& grid, const ModelParams& params);
double gamma(const TorusGrid& grid, const ModelParams& params);

/// N^{-2d} sum_{n1+n2+n3=0} w(n1) w(n2) w(n3) for an arbitrary weight table,
/// zero-padded so the constraint is exact (no wrap-around).
double constrained_triple_sum(const TorusGrid& grid, const std::vector<double>& weights);

/// Eigenvalue of -Delta^eps on mode n: (4/eps^2) sum_i sin^2(pi eps n_i).
double lattice_eigenvalue(const TorusGrid& grid, std::size_t mode) noexcept;
double lattice_green_zero(const TorusGrid& grid, double eta);
/// Sunset of the lattice propagator: eps^d sum_x G(x)^3 (momentum conserved mod the lattice).
double lattice_sunset(const TorusGrid& grid, double eta);
/// delta m^2 = (12/beta) G(0) + (2/beta^2) gamma_lat with gamma_lat = -48 lattice_sunset; 2D drops gamma_lat.
double lattice_mass_counterterm(const TorusGrid& grid, const ModelParams& params);

RenormConstants renorm_constants(const TorusGrid& grid, const ModelParams& params);
std::string renorm_csv_header();
std::string renorm_csv_row(const TorusGrid& grid, const ModelParams& params, const RenormConstants& rc);

/// E|F phi(n)|^2 = N^d rho_K^2 / <n>^2.
std::vector<double> continuum_mode_variances(const TorusGrid& grid, const ModelParams& params);
/// N^d / (lambda_n + eta): the lattice Gaussian measure.
std::vector<double> lattice_mode_variances(const TorusGrid& grid, double eta);

/// Hermitian Gaussian coefficients with the given per-mode variances E|c(n)|^2.
SpectralField sample_spectral(const TorusGrid& grid, const std::vector<double>& variances, Rng& rng);
Field sample_gff(const TorusGrid& grid, const ModelParams& params, Rng& rng);
Field sample_lattice_gff(const TorusGrid& grid, double eta, Rng& rng);

/// E[phi(x) phi(x + r)] as a function of the site offset r.
Field two_point_kernel(const TorusGrid& grid, const std::vector<double>& mode_variances);

Field wick_power(const Field& field, int p, double tadpole);
double wick_power(double phi, int p, double tadpole);

}  // namespace phi4
