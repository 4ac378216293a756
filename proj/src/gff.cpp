#include "phi4/gff.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "phi4/error.hpp"

namespace phi4 {

void ModelParams::validate() const {
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (!(K > 0.0)) throw ConfigError("cutoff K must be positive (use inf for no cutoff)");
}

double bracket_squared(double norm, double eta) noexcept {
  return eta + 4.0 * std::numbers::pi * std::numbers::pi * norm * norm;
}

std::vector<double> propagator_weights(const TorusGrid& grid, const ModelParams& params) {
  std::vector<double> w(grid.num_modes());
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double r = grid.frequency_norm(k);
    const double rho = params.profile.at_scale(r, params.K);
    w[k] = rho * rho / bracket_squared(r, params.eta);
  }
  return w;
}

double tadpole(const TorusGrid& grid, const ModelParams& params) {
  params.validate();
  double s = 0.0;
  for (double w : propagator_weights(grid, params)) s += w;
  return s / grid.volume();
}

double constrained_triple_sum(const TorusGrid& grid, const std::vector<double>& weights) {
  if (weights.size() != grid.num_modes()) throw UsageError("weight table size mismatch");
  const int d = grid.dim();
  const int m = grid.sites_per_axis();
  const int p = 2 * m;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= p;
  std::vector<Complex> buf(total, 0.0);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] == 0.0) continue;
    const auto j = grid.mode_labels(k);
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a) idx = idx * p + ((j[a] % p) + p) % p;
    buf[idx] = weights[k];
  }
  dft_inplace(buf, d, p, +1);
  Complex s = 0.0;
  for (const auto& v : buf) s += v * v * v;
  const double res = s.real() / static_cast<double>(total) / (grid.volume() * grid.volume());
  if (!std::isfinite(res)) throw NumericError("triple sum overflowed");
  return res;
}

double sunset(const TorusGrid& grid, const ModelParams& params) {
  params.validate();
  return constrained_triple_sum(grid, propagator_weights(grid, params));
}

double gamma(const TorusGrid& grid, const ModelParams& params) { return -48.0 * sunset(grid, params); }

double lattice_eigenvalue(const TorusGrid& grid, std::size_t mode) noexcept {
  const auto n = grid.frequency(mode);
  const double eps = grid.spacing();
  double s = 0.0;
  for (int a = 0; a < grid.dim(); ++a) {
    const double v = std::sin(std::numbers::pi * eps * n[a]);
    s += v * v;
  }
  return 4.0 * s / (eps * eps);
}

double lattice_green_zero(const TorusGrid& grid, double eta) {
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  double s = 0.0;
  for (std::size_t k = 0; k < grid.num_modes(); ++k) s += 1.0 / (lattice_eigenvalue(grid, k) + eta);
  return s / grid.volume();
}

double lattice_sunset(const TorusGrid& grid, double eta) {
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  SpectralField g(grid);
  for (std::size_t k = 0; k < grid.num_modes(); ++k) g.coeffs[k] = 1.0 / (lattice_eigenvalue(grid, k) + eta);
  const Field green = fft_inverse(g);
  double s = 0.0;
  for (double v : green.values) s += v * v * v;
  return s * grid.cell_volume();
}

double lattice_mass_counterterm(const TorusGrid& grid, const ModelParams& params) {
  params.validate();
  double dm = 12.0 / params.beta * lattice_green_zero(grid, params.eta);
  if (grid.dim() == 3) dm += 2.0 / (params.beta * params.beta) * (-48.0 * lattice_sunset(grid, params.eta));
  return dm;
}

RenormConstants renorm_constants(const TorusGrid& grid, const ModelParams& params) {
  RenormConstants rc;
  rc.tadpole = tadpole(grid, params);
  rc.sunset = sunset(grid, params);
  rc.gamma = -48.0 * rc.sunset;
  rc.lattice_mass = lattice_mass_counterterm(grid, params);
  return rc;
}

std::string renorm_csv_header() { return "dim,N,eps,eta,K,tadpole,sunset,gamma,lattice_mass"; }

std::string renorm_csv_row(const TorusGrid& grid, const ModelParams& params, const RenormConstants& rc) {
  std::ostringstream os;
  os.precision(17);
  os << grid.dim() << ',' << grid.side() << ',' << grid.spacing() << ',' << params.eta << ',';
  if (std::isinf(params.K))
    os << "inf";
  else
    os << params.K;
  os << ',' << rc.tadpole << ',' << rc.sunset << ',' << rc.gamma << ',' << rc.lattice_mass;
  return os.str();
}

std::vector<double> continuum_mode_variances(const TorusGrid& grid, const ModelParams& params) {
  auto v = propagator_weights(grid, params);
  for (auto& x : v) x *= grid.volume();
  return v;
}

std::vector<double> lattice_mode_variances(const TorusGrid& grid, double eta) {
  std::vector<double> v(grid.num_modes());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = grid.volume() / (lattice_eigenvalue(grid, k) + eta);
  return v;
}

SpectralField sample_spectral(const TorusGrid& grid, const std::vector<double>& variances, Rng& rng) {
  if (variances.size() != grid.num_modes()) throw UsageError("variance table size mismatch");
  std::normal_distribution<double> gauss;
  SpectralField out(grid);
  for (std::size_t k = 0; k < grid.num_modes(); ++k) {
    const std::size_t c = grid.conjugate_mode(k);
    if (c < k) continue;
    if (c == k) {
      out.coeffs[k] = std::sqrt(variances[k]) * gauss(rng);
    } else {
      const double s = std::sqrt(0.5 * variances[k]);
      const double re = gauss(rng);
      const double im = gauss(rng);
      out.coeffs[k] = Complex(s * re, s * im);
      out.coeffs[c] = std::conj(out.coeffs[k]);
    }
  }
  return out;
}

Field sample_gff(const TorusGrid& grid, const ModelParams& params, Rng& rng) {
  params.validate();
  return fft_inverse(sample_spectral(grid, continuum_mode_variances(grid, params), rng));
}

Field sample_lattice_gff(const TorusGrid& grid, double eta, Rng& rng) {
  return fft_inverse(sample_spectral(grid, lattice_mode_variances(grid, eta), rng));
}

Field two_point_kernel(const TorusGrid& grid, const std::vector<double>& mode_variances) {
  if (mode_variances.size() != grid.num_modes()) throw UsageError("variance table size mismatch");
  SpectralField s(grid);
  for (std::size_t k = 0; k < s.coeffs.size(); ++k) s.coeffs[k] = mode_variances[k] / grid.volume();
  return fft_inverse(s);
}

double wick_power(double phi, int p, double t) {
  switch (p) {
    case 2:
      return phi * phi - t;
    case 3:
      return phi * phi * phi - 3.0 * t * phi;
    case 4: {
      const double q = phi * phi;
      return q * q - 6.0 * t * q + 3.0 * t * t;
    }
    default:
      throw UsageError("Wick power must be 2, 3 or 4");
  }
}

Field wick_power(const Field& field, int p, double t) {
  if (p < 2 || p > 4) throw UsageError("Wick power must be 2, 3 or 4");
  if (t < 0.0) throw UsageError("tadpole must be non-negative");
  Field out(field.grid);
  for (std::size_t i = 0; i < out.values.size(); ++i) out[i] = wick_power(field[i], p, t);
  return out;
}

}  // namespace phi4
