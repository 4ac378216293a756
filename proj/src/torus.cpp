#include "phi4/torus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "phi4/error.hpp"

namespace phi4 {

namespace {

bool is_positive_integer(double x) { return x >= 1.0 && std::abs(x - std::round(x)) < 1e-9; }

int wrap(int k, int m) noexcept {
  const int r = k % m;
  return r < 0 ? r + m : r;
}

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, int size, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(dim, size, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::array<int, 3> n{size, size, size};
    const std::size_t total = ipow(static_cast<std::size_t>(size), dim);
    auto* buf = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(dim, n.data(), buf, buf, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (plan == nullptr) throw NumericError("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace

TorusGrid TorusGrid::make(int dim, double side, double spacing) {
  if (dim != 2 && dim != 3) throw ConfigError("torus dimension must be 2 or 3");
  if (!is_positive_integer(side)) throw ConfigError("torus side length must be a positive integer");
  if (!(spacing > 0.0) || !is_positive_integer(1.0 / spacing))
    throw ConfigError("lattice spacing must be 1/k for a positive integer k");
  return TorusGrid(dim, static_cast<int>(std::lround(side)), static_cast<int>(std::lround(1.0 / spacing)));
}

TorusGrid::TorusGrid(int dim, int side, int eps_inv) : dim_(dim), side_(side), eps_inv_(eps_inv) {
  if (dim != 2 && dim != 3) throw ConfigError("torus dimension must be 2 or 3");
  if (side < 1 || eps_inv < 1) throw ConfigError("side and 1/eps must be positive integers");
  num_sites_ = ipow(static_cast<std::size_t>(side) * eps_inv, dim);
  cell_volume_ = std::pow(1.0 / eps_inv, dim);
  volume_ = std::pow(static_cast<double>(side), dim);
}

Index3 TorusGrid::site_coords(std::size_t site) const noexcept {
  const auto m = static_cast<std::size_t>(sites_per_axis());
  Index3 c{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    c[a] = static_cast<int>(site % m);
    site /= m;
  }
  return c;
}

std::size_t TorusGrid::site_index(Index3 coords) const noexcept {
  const int m = sites_per_axis();
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a) idx = idx * m + wrap(coords[a], m);
  return idx;
}

Vec3 TorusGrid::site_position(std::size_t site) const noexcept {
  const auto c = site_coords(site);
  Vec3 x{0, 0, 0};
  for (int a = 0; a < dim_; ++a) x[a] = (c[a] + 0.5) * spacing();
  return x;
}

int TorusGrid::frequency_label(int slot) const noexcept {
  const int m = sites_per_axis();
  return slot < (m + 1) / 2 ? slot : slot - m;
}

Index3 TorusGrid::mode_labels(std::size_t mode) const noexcept {
  auto c = site_coords(mode);
  for (int a = 0; a < dim_; ++a) c[a] = frequency_label(c[a]);
  return c;
}

Vec3 TorusGrid::frequency(std::size_t mode) const noexcept {
  const auto j = mode_labels(mode);
  Vec3 n{0, 0, 0};
  for (int a = 0; a < dim_; ++a) n[a] = static_cast<double>(j[a]) / side_;
  return n;
}

double TorusGrid::frequency_norm(std::size_t mode) const noexcept {
  const auto n = frequency(mode);
  return std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
}

std::size_t TorusGrid::conjugate_mode(std::size_t mode) const noexcept {
  auto c = site_coords(mode);
  for (int a = 0; a < dim_; ++a) c[a] = -c[a];
  return site_index(c);
}

std::size_t TorusGrid::mode_index(Index3 labels) const {
  const int m = sites_per_axis();
  for (int a = 0; a < dim_; ++a)
    if (labels[a] < -(m / 2) || labels[a] > (m + 1) / 2 - 1)
      throw UsageError("frequency label outside the truncated lattice");
  return site_index(labels);
}

Field::Field(const TorusGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.num_sites()) throw UsageError("field size does not match grid");
}

bool Field::all_finite() const noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

Field make_plane_wave(const TorusGrid& grid, Index3 labels, double amplitude, double phase) {
  Field f(grid);
  const int m = grid.sites_per_axis();
  for (std::size_t s = 0; s < grid.num_sites(); ++s) {
    const auto c = grid.site_coords(s);
    double arg = phase;
    for (int a = 0; a < grid.dim(); ++a) arg += 2.0 * std::numbers::pi * labels[a] * c[a] / m;
    f[s] = amplitude * std::cos(arg);
  }
  return f;
}

void dft_inplace(std::vector<Complex>& data, int dim, int size, int sign) {
  if (data.size() != ipow(static_cast<std::size_t>(size), dim)) throw UsageError("DFT buffer size mismatch");
  auto plan = PlanCache::instance().get(dim, size, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

SpectralField fft_forward(const Field& field) {
  const auto& g = field.grid;
  SpectralField out(g);
  for (std::size_t i = 0; i < g.num_sites(); ++i) out.coeffs[i] = field.values[i];
  dft_inplace(out.coeffs, g.dim(), g.sites_per_axis(), -1);
  const double w = g.cell_volume();
  for (auto& c : out.coeffs) c *= w;
  return out;
}

Field fft_inverse(const SpectralField& spectral) {
  const auto& g = spectral.grid;
  std::vector<Complex> buf = spectral.coeffs;
  dft_inplace(buf, g.dim(), g.sites_per_axis(), +1);
  Field out(g);
  const double w = 1.0 / g.volume();
  for (std::size_t i = 0; i < g.num_sites(); ++i) out.values[i] = buf[i].real() * w;
  return out;
}

std::vector<double> tabulate_symbol(const TorusGrid& grid, const Symbol& symbol) {
  std::vector<double> table(grid.num_modes());
  for (std::size_t k = 0; k < grid.num_modes(); ++k) table[k] = symbol(grid.frequency(k));
  return table;
}

SpectralField apply_multiplier(const SpectralField& spectral, std::span<const double> table) {
  if (table.size() != spectral.coeffs.size()) throw UsageError("multiplier table size mismatch");
  SpectralField out(spectral.grid);
  for (std::size_t k = 0; k < table.size(); ++k) {
    if (std::isnan(table[k])) throw NumericError("multiplier symbol is NaN");
    out.coeffs[k] = spectral.coeffs[k] * table[k];
  }
  return out;
}

SpectralField apply_multiplier(const SpectralField& spectral, const Symbol& symbol) {
  const auto table = tabulate_symbol(spectral.grid, symbol);
  return apply_multiplier(spectral, table);
}

double inner_product(const Field& f, const Field& g) {
  if (!(f.grid == g.grid)) throw UsageError("inner product of fields on different grids");
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) s += f.values[i] * g.values[i];
  return s * f.grid.cell_volume();
}

// ---------------------------------------------------------------------------

CutoffProfile::CutoffProfile(double plateau, double outer) : plateau_(plateau), outer_(outer) {
  if (!(plateau > 0.0) || !(outer > plateau)) throw ConfigError("cutoff profile needs 0 < plateau < outer");
}

namespace {

// Smooth step s(t) = 1 / (1 + exp(1/t - 1/(1-t))) on (0,1).
double smooth_step(double t) noexcept {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double u = 1.0 / t - 1.0 / (1.0 - t);
  if (u > 700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(u));
}

double smooth_step_derivative(double t) noexcept {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double s = smooth_step(t);
  return s * (1.0 - s) * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t)));
}

}  // namespace

double CutoffProfile::operator()(double r) const noexcept {
  if (r <= plateau_) return 1.0;
  if (r >= outer_) return 0.0;
  return 1.0 - smooth_step((r - plateau_) / (outer_ - plateau_));
}

double CutoffProfile::derivative(double r) const noexcept {
  if (r <= plateau_ || r >= outer_) return 0.0;
  return -smooth_step_derivative((r - plateau_) / (outer_ - plateau_)) / (outer_ - plateau_);
}

double CutoffProfile::at_scale(double norm, double K) const noexcept {
  if (std::isinf(K)) return 1.0;
  if (K <= 0.0) return norm == 0.0 ? 1.0 : 0.0;
  return (*this)(norm / K);
}

double CutoffProfile::scale_derivative_squared(double norm, double k) const noexcept {
  if (k <= 0.0 || std::isinf(k) || norm == 0.0) return 0.0;
  const double r = norm / k;
  // d/dk rho(|n|/k)^2 = 2 rho rho' * (-|n| / k^2)
  return std::max(0.0, -2.0 * (*this)(r) * derivative(r) * norm / (k * k));
}

// ---------------------------------------------------------------------------

BlockPartition::BlockPartition(const TorusGrid& grid) : grid_(grid) {
  const int d = grid.dim();
  const int n = grid.side();
  if (n < 3) throw ConfigError("block partition needs side >= 3 so *-balls are distinct");
  num_blocks_ = ipow(static_cast<std::size_t>(n), d);
  sites_per_block_ = ipow(static_cast<std::size_t>(grid.eps_inv()), d);
  ball_size_ = ipow(3, d);

  site_block_.resize(grid.num_sites());
  std::vector<std::size_t> fill(num_blocks_, 0);
  block_sites_.resize(grid.num_sites());
  for (std::size_t s = 0; s < grid.num_sites(); ++s) {
    auto c = grid.site_coords(s);
    for (int a = 0; a < d; ++a) c[a] /= grid.eps_inv();
    const auto b = block_index(c);
    site_block_[s] = b;
    block_sites_[b * sites_per_block_ + fill[b]++] = s;
  }

  // Offsets of the *-ball, centre first.
  std::vector<Index3> offsets{{0, 0, 0}};
  const int zmax = d == 3 ? 1 : 0;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -zmax; k <= zmax; ++k)
        if (i != 0 || j != 0 || k != 0) offsets.push_back({i, j, k});

  std::vector<std::pair<int, int>> offset_pairs;
  for (std::size_t p = 0; p < offsets.size(); ++p)
    for (std::size_t q = p + 1; q < offsets.size(); ++q) {
      int l1 = 0;
      for (int a = 0; a < 3; ++a) l1 += std::abs(offsets[p][a] - offsets[q][a]);
      if (l1 == 1) offset_pairs.emplace_back(static_cast<int>(p), static_cast<int>(q));
    }
  pairs_per_ball_ = offset_pairs.size();

  nn_.resize(num_blocks_ * 2 * d);
  ball_.resize(num_blocks_ * ball_size_);
  ball_pairs_.resize(num_blocks_ * pairs_per_ball_);
  for (std::size_t b = 0; b < num_blocks_; ++b) {
    const auto c = block_coords(b);
    for (int a = 0; a < d; ++a) {
      auto lo = c;
      auto hi = c;
      lo[a] -= 1;
      hi[a] += 1;
      nn_[b * 2 * d + 2 * a] = block_index(lo);
      nn_[b * 2 * d + 2 * a + 1] = block_index(hi);
    }
    for (std::size_t o = 0; o < offsets.size(); ++o) {
      Index3 cc{c[0] + offsets[o][0], c[1] + offsets[o][1], c[2] + offsets[o][2]};
      ball_[b * ball_size_ + o] = block_index(cc);
    }
    for (std::size_t p = 0; p < offset_pairs.size(); ++p)
      ball_pairs_[b * pairs_per_ball_ + p] = {ball_[b * ball_size_ + offset_pairs[p].first],
                                              ball_[b * ball_size_ + offset_pairs[p].second]};
  }
}

Index3 BlockPartition::block_coords(std::size_t block) const noexcept {
  const auto n = static_cast<std::size_t>(grid_.side());
  Index3 c{0, 0, 0};
  for (int a = grid_.dim() - 1; a >= 0; --a) {
    c[a] = static_cast<int>(block % n);
    block /= n;
  }
  return c;
}

std::size_t BlockPartition::block_index(Index3 coords) const noexcept {
  const int n = grid_.side();
  std::size_t idx = 0;
  for (int a = 0; a < grid_.dim(); ++a) idx = idx * n + wrap(coords[a], n);
  return idx;
}

std::span<const std::size_t> BlockPartition::sites_of(std::size_t block) const noexcept {
  return {block_sites_.data() + block * sites_per_block_, sites_per_block_};
}

std::span<const std::size_t> BlockPartition::neighbours(std::size_t block) const noexcept {
  const std::size_t k = 2 * grid_.dim();
  return {nn_.data() + block * k, k};
}

std::span<const std::size_t> BlockPartition::star_ball(std::size_t block) const noexcept {
  return {ball_.data() + block * ball_size_, ball_size_};
}

std::span<const std::pair<std::size_t, std::size_t>> BlockPartition::star_ball_pairs(
    std::size_t block) const noexcept {
  return {ball_pairs_.data() + block * pairs_per_ball_, pairs_per_ball_};
}

bool BlockPartition::are_neighbours(std::size_t a, std::size_t b) const noexcept {
  const auto nb = neighbours(a);
  return std::find(nb.begin(), nb.end(), b) != nb.end();
}

bool BlockPartition::are_star_neighbours(std::size_t a, std::size_t b) const noexcept {
  if (a == b) return false;
  const auto ball = star_ball(a);
  return std::find(ball.begin(), ball.end(), b) != ball.end();
}

BlockPartition make_blocks(const TorusGrid& grid) { return BlockPartition(grid); }

}  // namespace phi4
