#include "phi4/diagrams.hpp"

#include <cmath>
#include <sstream>

#include "phi4/error.hpp"

namespace phi4 {

ScaleGrid ScaleGrid::geometric(double K, int m, int per_octave) {
  if (!(K > 0.0) || std::isinf(K)) throw ConfigError("scale grid needs a finite K > 0");
  if (m < 1 || per_octave < 1) throw ConfigError("scale grid needs m >= 1 and per_octave >= 1");
  ScaleGrid g;
  g.knots.push_back(0.0);
  for (int j = 1; j <= m; ++j) g.knots.push_back(K * std::exp2(static_cast<double>(j - m) / per_octave));
  return g;
}

void ScaleGrid::validate() const {
  if (knots.size() < 2 || knots.front() != 0.0) throw ConfigError("scale grid must start at 0 with m >= 1");
  for (std::size_t j = 1; j < knots.size(); ++j)
    if (!(knots[j] > knots[j - 1])) throw ConfigError("scale grid knots must increase strictly");
}

double jay_squared(double norm, double k, const ModelParams& params) {
  return params.profile.scale_derivative_squared(norm, k) / bracket_squared(norm, params.eta);
}

std::vector<double> scale_propagator(const TorusGrid& grid, const ModelParams& params, double k) {
  std::vector<double> w(grid.num_modes());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double r = grid.frequency_norm(i);
    const double rho = params.profile.at_scale(r, k);
    w[i] = rho * rho / bracket_squared(r, params.eta);
  }
  return w;
}

std::vector<double> interval_weights(const TorusGrid& grid, const ModelParams& params, double k_lo, double k_hi) {
  auto hi = scale_propagator(grid, params, k_hi);
  const auto lo = scale_propagator(grid, params, k_lo);
  for (std::size_t i = 0; i < hi.size(); ++i) {
    const double d = hi[i] - lo[i];
    if (d < -1e-14 * std::abs(hi[i])) throw InvariantViolation("negative covariance increment");
    hi[i] = std::max(d, 0.0);
  }
  return hi;
}

double running_tadpole(const TorusGrid& grid, const ModelParams& params, double k) {
  double s = 0.0;
  for (double w : scale_propagator(grid, params, k)) s += w;
  return s / grid.volume();
}

namespace {

bool all_zero(const std::vector<double>& v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

}  // namespace

ScaleFlowSampler::ScaleFlowSampler(const TorusGrid& grid, const ModelParams& params, const ScaleGrid& scales)
    : grid_(grid), scales_(scales) {
  scales.validate();
  const std::size_t m = scales.intervals();
  // <1>_0 carries only the zero mode, since rho_0 = 1 at n = 0.
  var0_ = scale_propagator(grid, params, 0.0);
  for (auto& v : var0_) v *= grid.volume();
  for (std::size_t j = 0; j <= m; ++j) tadpoles_.push_back(running_tadpole(grid, params, scales.knots[j]));
  for (std::size_t j = 0; j < m; ++j) weights_.push_back(interval_weights(grid, params, scales.knots[j], scales.knots[j + 1]));
}

ScaleFlow ScaleFlowSampler::sample(Rng& rng, const ScaleFlowOptions& options) const {
  const std::size_t m = scales_.intervals();
  const double vol = grid_.volume();
  SpectralField one = sample_spectral(grid_, var0_, rng);

  ScaleFlow flow{grid_, scales_, {}, SpectralField(grid_), SpectralField(grid_), tadpoles_, {}};
  for (std::size_t j = 0; j < m; ++j) {
    if (options.keep_lollipop) flow.lollipop.push_back(one);
    const auto& w = weights_[j];
    if (all_zero(w)) {
      flow.probe_increments.push_back(0.0);
      continue;
    }

    // Left-point contribution w_j(n) F<3>_{k_j}(n).
    const Field phys = fft_inverse(one);
    Field cube(grid_);
    const double t = tadpoles_[j];
    for (std::size_t i = 0; i < cube.values.size(); ++i) cube[i] = wick_power(phys[i], 3, t);
    const SpectralField c3 = fft_forward(cube);
    for (std::size_t i = 0; i < w.size(); ++i) flow.trident.coeffs[i] += w[i] * c3.coeffs[i];

    std::vector<double> var = w;
    for (auto& v : var) v *= vol;
    const SpectralField inc = sample_spectral(grid_, var, rng);
    for (std::size_t i = 0; i < one.coeffs.size(); ++i) one.coeffs[i] += inc.coeffs[i];
    flow.probe_increments.push_back(inc.coeffs[options.probe_mode]);
  }
  if (options.keep_lollipop) flow.lollipop.push_back(one);
  flow.endpoint = std::move(one);
  return flow;
}

ScaleFlow sample_scale_flow(const TorusGrid& grid, const ModelParams& params, const ScaleGrid& scales, Rng& rng,
                            const ScaleFlowOptions& options) {
  return ScaleFlowSampler(grid, params, scales).sample(rng, options);
}

Estimate trident_fourier_variance(std::span<const Complex> coeffs, std::size_t batches) {
  if (coeffs.empty()) throw UsageError("empty ensemble");
  std::vector<double> sq(coeffs.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::norm(coeffs[i]);
  return batch_mean(sq, std::min(batches, sq.size()));
}

Estimate trident_fourier_variance(std::span<const ScaleFlow> ensemble, std::size_t mode, std::size_t batches) {
  if (ensemble.empty()) throw UsageError("empty ensemble");
  std::vector<Complex> c(ensemble.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = ensemble[i].trident.coeffs.at(mode);
  return trident_fourier_variance(c, batches);
}

double trident_variance_prediction(const TorusGrid& grid, const ModelParams& params, const ScaleGrid& scales,
                                   std::span<const std::size_t> modes, std::vector<double>* out) {
  scales.validate();
  const std::size_t m = scales.intervals();
  const double vol = grid.volume();
  // E[F<3>_{k}(n) conj F<3>_{k'}(n)] = 6 N^d F[C_{min(k,k')}^3](n), F on the lattice.
  std::vector<std::vector<double>> w(m);
  std::vector<std::vector<double>> s(m);
  for (std::size_t j = 0; j < m; ++j) {
    w[j] = interval_weights(grid, params, scales.knots[j], scales.knots[j + 1]);
    if (all_zero(w[j])) continue;
    SpectralField c(grid);
    const auto prop = scale_propagator(grid, params, scales.knots[j]);
    for (std::size_t i = 0; i < prop.size(); ++i) c.coeffs[i] = prop[i];
    Field cov = fft_inverse(c);
    for (auto& v : cov.values) v = v * v * v;
    const auto f = fft_forward(cov);
    s[j].resize(modes.size());
    for (std::size_t q = 0; q < modes.size(); ++q) s[j][q] = 6.0 * vol * f.coeffs[modes[q]].real();
  }
  std::vector<double> res(modes.size(), 0.0);
  for (std::size_t q = 0; q < modes.size(); ++q) {
    double v = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      if (s[a].empty()) continue;
      const double wa = w[a][modes[q]];
      if (wa == 0.0) continue;
      for (std::size_t b = 0; b < m; ++b) {
        if (s[b].empty()) continue;
        const double wb = w[b][modes[q]];
        if (wb == 0.0) continue;
        v += wa * wb * s[std::min(a, b)][q];
      }
    }
    res[q] = v;
  }
  if (out) *out = res;
  return res.empty() ? 0.0 : res.front();
}

std::string variance_ladder_csv(std::span<const LadderRow> rows) {
  std::ostringstream os;
  os.precision(17);
  os << "K,n_norm,bracket,variance,stderr\n";
  for (const auto& r : rows) os << r.K << ',' << r.norm << ',' << r.bracket << ',' << r.variance << ',' << r.err << '\n';
  return os.str();
}

}  // namespace phi4
