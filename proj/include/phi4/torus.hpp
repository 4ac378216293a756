#pragma once

// Discrete torus geometry shared by every other module.
//
// Sites are cell-centred: site k on an axis sits at (k + 1/2) * eps, so the
// unit block [a, a+1) holds exactly 1/eps sites per axis and reflections about
// integer planes map sites to sites. Storage is row-major with axis 0 slowest.
//
// Fourier convention (unnormalised forward, 1/N^d inverse):
//   F f(n) = eps^d sum_x f(x) e_{-n}(x),   f(x) = N^{-d} sum_n F f(n) e_n(x),
// with e_n(x) = exp(2 pi i n.x) and x measured from the first cell centre.
// Frequencies n = j / N with j in {-floor(M/2), ..., ceil(M/2)-1} per axis
// (M = N / eps sites per axis), stored in FFT order (j >= 0 first).

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace phi4 {

using Complex = std::complex<double>;
/// Frequency or position vector; unused trailing components are zero in 2D.
using Vec3 = std::array<double, 3>;
using Index3 = std::array<int, 3>;

class TorusGrid {
 public:
  /// Validating factory: `side` and `1/spacing` must be positive integers.
  static TorusGrid make(int dim, double side, double spacing);

  TorusGrid(int dim, int side, int eps_inv);

  int dim() const noexcept { return dim_; }
  int side() const noexcept { return side_; }
  int eps_inv() const noexcept { return eps_inv_; }
  double spacing() const noexcept { return 1.0 / eps_inv_; }
  int sites_per_axis() const noexcept { return side_ * eps_inv_; }
  std::size_t num_sites() const noexcept { return num_sites_; }
  std::size_t num_modes() const noexcept { return num_sites_; }
  /// eps^d, the volume element of one site.
  double cell_volume() const noexcept { return cell_volume_; }
  /// N^d.
  double volume() const noexcept { return volume_; }

  Index3 site_coords(std::size_t site) const noexcept;
  /// Wraps each coordinate modulo M.
  std::size_t site_index(Index3 coords) const noexcept;
  Vec3 site_position(std::size_t site) const noexcept;

  /// Integer label j of FFT slot `slot` on one axis.
  int frequency_label(int slot) const noexcept;
  Index3 mode_labels(std::size_t mode) const noexcept;
  /// n = j / N.
  Vec3 frequency(std::size_t mode) const noexcept;
  double frequency_norm(std::size_t mode) const noexcept;
  /// Mode index of -n (same slot for self-conjugate modes).
  std::size_t conjugate_mode(std::size_t mode) const noexcept;
  /// Mode with the given integer labels; throws UsageError when not on the grid.
  std::size_t mode_index(Index3 labels) const;

  bool operator==(const TorusGrid& other) const noexcept {
    return dim_ == other.dim_ && side_ == other.side_ && eps_inv_ == other.eps_inv_;
  }

 private:
  int dim_;
  int side_;
  int eps_inv_;
  std::size_t num_sites_;
  double cell_volume_;
  double volume_;
};

struct Field {
  TorusGrid grid;
  std::vector<double> values;

  explicit Field(const TorusGrid& g, double fill = 0.0) : grid(g), values(g.num_sites(), fill) {}
  Field(const TorusGrid& g, std::vector<double> v);

  double& operator[](std::size_t i) noexcept { return values[i]; }
  double operator[](std::size_t i) const noexcept { return values[i]; }
  bool all_finite() const noexcept;
};

struct SpectralField {
  TorusGrid grid;
  std::vector<Complex> coeffs;

  explicit SpectralField(const TorusGrid& g) : grid(g), coeffs(g.num_modes()) {}
};

Field make_plane_wave(const TorusGrid& grid, Index3 labels, double amplitude, double phase = 0.0);

SpectralField fft_forward(const Field& field);
/// Real part of the inverse transform; the imaginary part is discarded.
Field fft_inverse(const SpectralField& spectral);

/// Raw unnormalised DFTs on a d-dimensional cube of side `size` (row-major).
/// sign = -1 computes sum_x f(x) e^{-2 pi i j.x / size}; sign = +1 the inverse.
void dft_inplace(std::vector<Complex>& data, int dim, int size, int sign);

using Symbol = std::function<double(const Vec3& n)>;

std::vector<double> tabulate_symbol(const TorusGrid& grid, const Symbol& symbol);
/// coeffs(n) *= table[n]; throws NumericError on a NaN entry.
SpectralField apply_multiplier(const SpectralField& spectral, std::span<const double> table);
SpectralField apply_multiplier(const SpectralField& spectral, const Symbol& symbol);

/// ∫ f g dx (unnormalised), computed on sites.
double inner_product(const Field& f, const Field& g);

/// Smooth radial bump rho: 1 on [0, plateau], 0 on [outer, inf), with the
/// exp(-1/t) / (exp(-1/t) + exp(-1/(1-t))) transition in between.
class CutoffProfile {
 public:
  CutoffProfile(double plateau = 0.5, double outer = 1.0);

  double plateau() const noexcept { return plateau_; }
  double outer() const noexcept { return outer_; }

  double operator()(double r) const noexcept;
  double derivative(double r) const noexcept;

  /// rho_K(n) = rho(|n| / K) with rho_0 = 1 at n = 0 and 0 elsewhere, rho_inf = 1.
  double at_scale(double norm, double K) const noexcept;
  /// d/dk rho_k(n)^2 >= 0.
  double scale_derivative_squared(double norm, double k) const noexcept;

 private:
  double plateau_;
  double outer_;
};

/// Unit-cube blocks of the torus with nearest-neighbour and *-ball tables.
class BlockPartition {
 public:
  explicit BlockPartition(const TorusGrid& grid);

  const TorusGrid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return grid_.dim(); }
  int side() const noexcept { return grid_.side(); }
  std::size_t num_blocks() const noexcept { return num_blocks_; }
  /// eps^{-d}.
  std::size_t sites_per_block() const noexcept { return sites_per_block_; }

  Index3 block_coords(std::size_t block) const noexcept;
  std::size_t block_index(Index3 coords) const noexcept;
  std::size_t block_of_site(std::size_t site) const noexcept { return site_block_[site]; }
  std::span<const std::size_t> sites_of(std::size_t block) const noexcept;

  /// Face neighbours (2d entries: -e0, +e0, -e1, +e1, ...).
  std::span<const std::size_t> neighbours(std::size_t block) const noexcept;
  /// *-ball: the block and its *-neighbours (3^d entries, block itself first).
  std::span<const std::size_t> star_ball(std::size_t block) const noexcept;
  /// Unordered nearest-neighbour pairs inside the *-ball (54 in 3D, 12 in 2D).
  std::span<const std::pair<std::size_t, std::size_t>> star_ball_pairs(std::size_t block) const noexcept;
  bool are_neighbours(std::size_t a, std::size_t b) const noexcept;
  bool are_star_neighbours(std::size_t a, std::size_t b) const noexcept;

  std::size_t ball_size() const noexcept { return ball_size_; }
  std::size_t pairs_per_ball() const noexcept { return pairs_per_ball_; }

 private:
  TorusGrid grid_;
  std::size_t num_blocks_;
  std::size_t sites_per_block_;
  std::size_t ball_size_;
  std::size_t pairs_per_ball_;
  std::vector<std::size_t> site_block_;
  std::vector<std::size_t> block_sites_;
  std::vector<std::size_t> nn_;
  std::vector<std::size_t> ball_;
  std::vector<std::pair<std::size_t, std::size_t>> ball_pairs_;
};

BlockPartition make_blocks(const TorusGrid& grid);

}  // namespace phi4
