#include "phi4/dynamics.hpp"
#include "phi4/stats.hpp"

#include <cmath>
#include <sstream>

#include "phi4/checkpoint.hpp"
#include "phi4/error.hpp"

namespace phi4 {

void SimConfig::validate() const {
  (void)grid();
  params.validate();
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (thin < 1) throw ConfigError("thin must be >= 1");
  if (burn_in > n_steps) throw ConfigError("burn_in exceeds n_steps");
  if (umbrella_kappa < 0.0) throw ConfigError("umbrella stiffness must be non-negative");
  if (scheme == Scheme::Lattice) {
    const double eps = 1.0 / eps_inv;
    const double bound = safety * eps * eps / (2.0 * dim);
    if (dt > bound) {
      std::ostringstream os;
      os << "dt = " << dt << " exceeds the explicit stability bound " << bound;
      throw ConfigError(os.str());
    }
  }
}

Field lattice_laplacian(const Field& phi) {
  const auto& g = phi.grid;
  const double inv = 1.0 / (g.spacing() * g.spacing());
  Field out(g);
  for (std::size_t s = 0; s < g.num_sites(); ++s) {
    const auto c = g.site_coords(s);
    double acc = -2.0 * g.dim() * phi[s];
    for (int a = 0; a < g.dim(); ++a) {
      auto lo = c;
      auto hi = c;
      lo[a] -= 1;
      hi[a] += 1;
      acc += phi[g.site_index(lo)] + phi[g.site_index(hi)];
    }
    out[s] = acc * inv;
  }
  return out;
}

Dynamics::Dynamics(const SimConfig& config) : config_(config), grid_(config.grid()) {
  config_.validate();
  const auto& p = config_.params;
  const bool phi4 = config_.model == DriftModel::Phi4;
  const std::size_t n = grid_.num_sites();
  const int d = grid_.dim();

  nbr_.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto c = grid_.site_coords(s);
    for (int a = 0; a < d; ++a) {
      auto lo = c;
      auto hi = c;
      lo[a] -= 1;
      hi[a] += 1;
      nbr_[s][2 * a] = grid_.site_index(lo);
      nbr_[s][2 * a + 1] = grid_.site_index(hi);
    }
  }

  if (config_.scheme == Scheme::Lattice) {
    if (phi4) {
      counterterm_ = lattice_mass_counterterm(grid_, p);
      linear_ = 4.0 + counterterm_;
      cubic_ = 4.0 / p.beta;
    } else {
      linear_ = -p.eta;
    }
    if (config_.linear_override) linear_ = *config_.linear_override;
    return;
  }

  if (phi4) {
    const double t = tadpole(grid_, p);
    galerkin_mass_ = 4.0 + p.eta + 12.0 / p.beta * t;
    if (d == 3) galerkin_mass_ += 2.0 * gamma(grid_, p) / (p.beta * p.beta);
    cubic_ = 4.0 / p.beta;
  }
  const double h = config_.dt;
  rho_.resize(n);
  lin_decay_.resize(n);
  phi1_.resize(n);
  noise_sd_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double r = grid_.frequency_norm(k);
    const double L = bracket_squared(r, p.eta);
    rho_[k] = p.profile.at_scale(r, p.K);
    lin_decay_[k] = std::exp(-h * L);
    phi1_[k] = -std::expm1(-h * L) / L;
    noise_sd_[k] = std::sqrt(-std::expm1(-2.0 * h * L) / (L * grid_.cell_volume()));
  }
}

void Dynamics::step(Field& phi, std::uint64_t step_index) const {
  std::vector<double> white;
  if (config_.noise) {
    Rng rng = make_rng(config_.seed, step_index);
    std::normal_distribution<double> gauss;
    white.resize(grid_.num_sites());
    for (auto& w : white) w = gauss(rng);
  }
  step_with_noise(phi, white);
}

void Dynamics::step_with_noise(Field& phi, std::span<const double> white) const {
  if (!(phi.grid == grid_)) throw UsageError("field grid does not match the dynamics");
  if (config_.noise && white.size() != grid_.num_sites()) throw UsageError("noise vector size mismatch");
  if (config_.scheme == Scheme::Lattice)
    lattice_step(phi, white);
  else
    galerkin_step(phi, white);
}

void Dynamics::lattice_step(Field& phi, std::span<const double> white) const {
  const std::size_t n = grid_.num_sites();
  const int d2 = 2 * grid_.dim();
  const double inv_e2 = 1.0 / (grid_.spacing() * grid_.spacing());
  const double dt = config_.dt;
  const double amp = std::sqrt(2.0 * dt / grid_.cell_volume());
  double bias = 0.0;
  if (config_.umbrella_kappa > 0.0) bias = -config_.umbrella_kappa * (magnetisation(phi) - config_.umbrella_centre);

  std::vector<double> next(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double v = phi[s];
    double lap = -d2 * v;
    for (int k = 0; k < d2; ++k) lap += phi[nbr_[s][k]];
    const double drift = lap * inv_e2 + linear_ * v - cubic_ * v * v * v + bias;
    next[s] = v + dt * drift;
    if (config_.noise) next[s] += amp * white[s];
  }
  phi.values = std::move(next);
}

void Dynamics::galerkin_step(Field& phi, std::span<const double> white) const {
  const std::size_t n = grid_.num_sites();
  SpectralField state = fft_forward(phi);
  SpectralField nl(grid_);
  if (cubic_ != 0.0 || galerkin_mass_ != 0.0) {
    SpectralField filtered(grid_);
    for (std::size_t k = 0; k < n; ++k) filtered.coeffs[k] = rho_[k] * state.coeffs[k];
    Field psi = fft_inverse(filtered);
    for (auto& v : psi.values) v = -cubic_ * v * v * v;
    nl = fft_forward(psi);
    for (std::size_t k = 0; k < n; ++k)
      nl.coeffs[k] = rho_[k] * nl.coeffs[k] + galerkin_mass_ * rho_[k] * rho_[k] * state.coeffs[k];
  }
  if (config_.umbrella_kappa > 0.0)
    nl.coeffs[0] += -config_.umbrella_kappa * (magnetisation(phi) - config_.umbrella_centre) * grid_.volume();

  SpectralField noise(grid_);
  if (config_.noise) noise = fft_forward(Field(grid_, std::vector<double>(white.begin(), white.end())));
  for (std::size_t k = 0; k < n; ++k) {
    Complex c = lin_decay_[k] * state.coeffs[k] + phi1_[k] * nl.coeffs[k];
    if (config_.noise) c += noise_sd_[k] * noise.coeffs[k];
    state.coeffs[k] = c;
  }
  phi = fft_inverse(state);
}

double Dynamics::energy_density(const Field& phi) const {
  const double inv_e2 = 1.0 / (grid_.spacing() * grid_.spacing());
  const double beta = config_.params.beta;
  const bool phi4 = config_.model == DriftModel::Phi4;
  KahanSum s;
  for (std::size_t x = 0; x < grid_.num_sites(); ++x) {
    const double v = phi[x];
    double grad = 0.0;
    for (int a = 0; a < grid_.dim(); ++a) {
      const double dv = phi[nbr_[x][2 * a + 1]] - v;
      grad += dv * dv;
    }
    double e = 0.5 * grad * inv_e2;
    if (phi4) {
      const double q = v * v - beta;
      e += q * q / beta - 0.5 * counterterm_ * v * v;
    } else {
      e += 0.5 * config_.params.eta * v * v;
    }
    s.add(e);
  }
  return s.value() / static_cast<double>(grid_.num_sites());
}

Field Dynamics::initial_field() const {
  const double r = std::sqrt(config_.params.beta);
  switch (config_.initial) {
    case InitialState::Plus:
      return Field(grid_, r);
    case InitialState::Minus:
      return Field(grid_, -r);
    case InitialState::Gff: {
      Rng rng = make_rng(config_.seed, ~std::uint64_t{0});
      return sample_lattice_gff(grid_, config_.params.eta, rng);
    }
    case InitialState::Zero:
    default:
      return Field(grid_, 0.0);
  }
}

RunResult run(const SimConfig& config, Field state, std::uint64_t start_step, const StateObserver& observer) {
  const Dynamics dyn(config);
  if (!(state.grid == dyn.grid())) throw ConfigError("initial state grid does not match the configuration");
  RunResult res{{}, state, start_step, {}};
  for (std::uint64_t s = start_step + 1; s <= config.n_steps; ++s) {
    dyn.step(state, s);
    if (!state.all_finite()) throw DivergenceError(s, res.last_checkpoint);
    TrajectoryRecord rec;
    if (config.checkpoint_every > 0 && !config.checkpoint_path.empty() && s % config.checkpoint_every == 0) {
      write_checkpoint(config.checkpoint_path, make_checkpoint(config, state, s));
      res.last_checkpoint = config.checkpoint_path;
      rec.checkpoint = config.checkpoint_path;
    }
    if (s > config.burn_in && (s - config.burn_in) % config.thin == 0) {
      rec.step = s;
      rec.time = static_cast<double>(s) * config.dt;
      rec.magnetisation = magnetisation(state);
      rec.energy_density = dyn.energy_density(state);
      rec.finite = std::isfinite(rec.magnetisation) && std::isfinite(rec.energy_density);
      if (observer) observer(state, rec);
      res.records.push_back(rec);
    }
  }
  res.final_step = std::max(start_step, config.n_steps);
  res.final_state = std::move(state);
  return res;
}

RunResult run(const SimConfig& config, const StateObserver& observer) {
  const Dynamics dyn(config);
  return run(config, dyn.initial_field(), 0, observer);
}

std::string trajectory_csv_header() { return "step,time,m_N,energy_density"; }

std::string trajectory_csv_row(const TrajectoryRecord& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.step << ',' << r.time << ',' << r.magnetisation << ',' << r.energy_density;
  return os.str();
}

}  // namespace phi4
