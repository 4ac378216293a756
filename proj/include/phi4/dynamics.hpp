#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phi4/gff.hpp"
#include "phi4/observables.hpp"

namespace phi4 {

enum class Scheme : std::uint8_t { Lattice = 0, Galerkin = 1 };
/// Phi4: the renormalised double well. Gaussian: cubic and counterterms off,
/// linear coefficient -eta, so the invariant law is the free field.
enum class DriftModel { Phi4, Gaussian };
enum class InitialState { Zero, Plus, Minus, Gff };

struct SimConfig {
  int dim = 2;
  int side = 8;
  int eps_inv = 1;
  ModelParams params{};
  Scheme scheme = Scheme::Lattice;
  DriftModel model = DriftModel::Phi4;
  double dt = 0.01;
  std::uint64_t n_steps = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t thin = 1;
  std::uint64_t seed = 1;
  std::uint64_t checkpoint_every = 0;
  std::string checkpoint_path;
  double safety = 0.8;
  bool noise = true;
  InitialState initial = InitialState::Zero;
  /// Replaces the lattice linear coefficient (4 + dm^2 or -eta).
  std::optional<double> linear_override;
  /// Umbrella bias kappa N^d / 2 (m - centre)^2 on the magnetisation.
  double umbrella_kappa = 0.0;
  double umbrella_centre = 0.0;

  TorusGrid grid() const { return TorusGrid(dim, side, eps_inv); }
  void validate() const;
};

struct TrajectoryRecord {
  std::uint64_t step = 0;
  double time = 0.0;
  double magnetisation = 0.0;
  double energy_density = 0.0;
  bool finite = true;
  std::string checkpoint;
};

class Dynamics {
 public:
  explicit Dynamics(const SimConfig& config);

  const SimConfig& config() const noexcept { return config_; }
  const TorusGrid& grid() const noexcept { return grid_; }
  /// Lattice: coefficient c in dPhi = [Delta Phi + c Phi - b Phi^3] dt.
  double linear_coefficient() const noexcept { return linear_; }
  double cubic_coefficient() const noexcept { return cubic_; }
  /// Galerkin: coefficient of rho_K^2 Phi in the nonlinearity.
  double galerkin_mass() const noexcept { return galerkin_mass_; }
  /// dm^2 used by the lattice scheme (0 for the Gaussian model).
  double counterterm() const noexcept { return counterterm_; }

  /// One step with noise drawn from stream (seed, step_index).
  void step(Field& phi, std::uint64_t step_index) const;
  /// One step with explicit per-site standard normals (ignored if noise is off).
  void step_with_noise(Field& phi, std::span<const double> white) const;

  double energy_density(const Field& phi) const;
  Field initial_field() const;

 private:
  void lattice_step(Field& phi, std::span<const double> white) const;
  void galerkin_step(Field& phi, std::span<const double> white) const;

  SimConfig config_;
  TorusGrid grid_;
  double linear_ = 0.0;
  double cubic_ = 0.0;
  double galerkin_mass_ = 0.0;
  double counterterm_ = 0.0;
  std::vector<double> rho_;
  std::vector<double> lin_decay_;
  std::vector<double> phi1_;
  std::vector<double> noise_sd_;
  std::vector<std::array<std::size_t, 6>> nbr_;
};

/// Lattice Laplacian Delta^eps with periodic boundary conditions.
Field lattice_laplacian(const Field& phi);

using StateObserver = std::function<void(const Field&, const TrajectoryRecord&)>;

struct RunResult {
  std::vector<TrajectoryRecord> records;
  Field final_state;
  std::uint64_t final_step = 0;
  std::string last_checkpoint;
};

/// Advances steps start_step+1 .. config.n_steps from `state`.
RunResult run(const SimConfig& config, Field state, std::uint64_t start_step = 0,
              const StateObserver& observer = {});
RunResult run(const SimConfig& config, const StateObserver& observer = {});

std::string trajectory_csv_header();
std::string trajectory_csv_row(const TrajectoryRecord& r);

}  // namespace phi4
