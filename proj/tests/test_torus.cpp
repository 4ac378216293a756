#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "phi4/error.hpp"
#include "phi4/torus.hpp"

using namespace phi4;

namespace {

// Naive O(M^2d) transform with the same normalisation as fft_forward.
std::vector<Complex> naive_forward(const Field& f) {
  const auto& g = f.grid;
  const int m = g.sites_per_axis();
  std::vector<Complex> out(g.num_modes());
  for (std::size_t k = 0; k < g.num_modes(); ++k) {
    const auto j = g.mode_labels(k);
    Complex acc = 0.0;
    for (std::size_t s = 0; s < g.num_sites(); ++s) {
      const auto c = g.site_coords(s);
      double arg = 0.0;
      for (int a = 0; a < g.dim(); ++a) arg -= 2.0 * std::numbers::pi * j[a] * c[a] / m;
      acc += f[s] * std::polar(1.0, arg);
    }
    out[k] = acc * g.cell_volume();
  }
  return out;
}

Field random_field(const TorusGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Field f(g);
  for (auto& v : f.values) v = n(rng);
  return f;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(TorusGrid::make(2, 4.5, 1.0), ConfigError);
  CHECK_THROWS_AS(TorusGrid::make(2, 4, 0.3), ConfigError);
  CHECK_THROWS_AS(TorusGrid::make(4, 4, 1.0), ConfigError);
  const auto g = TorusGrid::make(3, 4, 0.5);
  CHECK(g.sites_per_axis() == 8);
  CHECK(g.num_sites() == 512);
  CHECK(g.cell_volume() == doctest::Approx(0.125));
  CHECK(g.volume() == doctest::Approx(64.0));
}

TEST_CASE("frequency labels and conjugates") {
  const TorusGrid g(2, 3, 2);  // M = 6
  std::vector<int> labels;
  for (int s = 0; s < 6; ++s) labels.push_back(g.frequency_label(s));
  CHECK(labels == std::vector<int>{0, 1, 2, -3, -2, -1});
  for (std::size_t k = 0; k < g.num_modes(); ++k) {
    const auto c = g.conjugate_mode(k);
    const auto a = g.mode_labels(k);
    const auto b = g.mode_labels(c);
    for (int d = 0; d < 2; ++d) {
      const int sum = a[d] + b[d];
      CHECK((sum == 0 || sum == -6));
    }
    CHECK(g.conjugate_mode(c) == k);
    CHECK(g.mode_index(a) == k);
  }
  CHECK(g.frequency_norm(g.mode_index({1, 0, 0})) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(g.mode_index({3, 0, 0}), UsageError);
}

TEST_CASE("fft matches the naive transform") {
  for (const TorusGrid g : {TorusGrid(2, 3, 2), TorusGrid(3, 2, 2), TorusGrid(2, 5, 1)}) {
    const Field f = random_field(g, 11);
    const auto fast = fft_forward(f);
    const auto slow = naive_forward(f);
    for (std::size_t k = 0; k < g.num_modes(); ++k) CHECK(std::abs(fast.coeffs[k] - slow[k]) < 1e-10);
  }
}

TEST_CASE("round trip and Parseval") {
  const TorusGrid g(3, 4, 2);
  const Field f = random_field(g, 3);
  const auto F = fft_forward(f);
  const Field back = fft_inverse(F);
  double err = 0.0;
  for (std::size_t s = 0; s < g.num_sites(); ++s) err = std::max(err, std::abs(back[s] - f[s]));
  CHECK(err < 1e-12);
  double spec = 0.0;
  for (const auto& c : F.coeffs) spec += std::norm(c);
  CHECK(inner_product(f, f) == doctest::Approx(spec / g.volume()).epsilon(1e-12));
}

TEST_CASE("plane wave coefficients") {
  const TorusGrid g(2, 4, 2);
  const Field w = make_plane_wave(g, {1, 2, 0}, 3.0);
  const auto F = fft_forward(w);
  const auto k = g.mode_index({1, 2, 0});
  CHECK(F.coeffs[k].real() == doctest::Approx(0.5 * 3.0 * g.volume()));
  CHECK(std::abs(F.coeffs[g.conjugate_mode(k)] - F.coeffs[k]) < 1e-10);
  double rest = 0.0;
  for (std::size_t m = 0; m < g.num_modes(); ++m)
    if (m != k && m != g.conjugate_mode(k)) rest += std::abs(F.coeffs[m]);
  CHECK(rest < 1e-9);
  // constant c has coefficient c N^d at the zero mode
  const auto C = fft_forward(Field(g, 2.0));
  CHECK(C.coeffs[0].real() == doctest::Approx(2.0 * g.volume()));
}

TEST_CASE("multipliers") {
  const TorusGrid g(2, 4, 1);
  const Field f = random_field(g, 5);
  const auto F = fft_forward(f);
  const auto id = apply_multiplier(F, [](const Vec3&) { return 1.0; });
  for (std::size_t k = 0; k < g.num_modes(); ++k) CHECK(std::abs(id.coeffs[k] - F.coeffs[k]) < 1e-14);
  std::vector<double> bad(g.num_modes(), 1.0);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(apply_multiplier(F, bad), NumericError);
  const auto tab = tabulate_symbol(g, [](const Vec3& n) { return n[0] * n[0] + n[1] * n[1]; });
  CHECK(tab[g.mode_index({1, 1, 0})] == doctest::Approx(2.0 / 16.0));
}

TEST_CASE("cutoff profile") {
  const CutoffProfile rho;
  CHECK(rho(0.0) == 1.0);
  CHECK(rho(0.5) == 1.0);
  CHECK(rho(1.0) == 0.0);
  CHECK(rho(2.0) == 0.0);
  double prev = 1.0;
  for (int i = 0; i <= 200; ++i) {
    const double r = 0.5 + 0.5 * i / 200.0;
    const double v = rho(r);
    CHECK(v <= prev + 1e-15);
    CHECK(v >= 0.0);
    prev = v;
  }
  CHECK(rho(0.75) == doctest::Approx(0.5));
  for (double r : {0.55, 0.7, 0.8, 0.95}) {
    const double h = 1e-6;
    CHECK(rho.derivative(r) == doctest::Approx((rho(r + h) - rho(r - h)) / (2 * h)).epsilon(1e-5));
  }
  CHECK(rho.at_scale(0.0, 0.0) == 1.0);
  CHECK(rho.at_scale(0.1, 0.0) == 0.0);
  CHECK(rho.at_scale(1e6, INFINITY) == 1.0);
  const double n = 3.0, k = 4.5, h = 1e-6;
  const auto sq = [&](double kk) { double v = rho.at_scale(n, kk); return v * v; };
  CHECK(rho.scale_derivative_squared(n, k) == doctest::Approx((sq(k + h) - sq(k - h)) / (2 * h)).epsilon(1e-5));
}

TEST_CASE("block partition tables") {
  CHECK_THROWS_AS(BlockPartition(TorusGrid(2, 2, 1)), ConfigError);
  const BlockPartition p3(TorusGrid(3, 4, 2));
  CHECK(p3.num_blocks() == 64);
  CHECK(p3.sites_per_block() == 8);
  CHECK(p3.ball_size() == 27);
  CHECK(p3.pairs_per_ball() == 54);
  const BlockPartition p2(TorusGrid(2, 5, 3));
  CHECK(p2.ball_size() == 9);
  CHECK(p2.pairs_per_ball() == 12);
  for (const BlockPartition* p : {&p3, &p2}) {
    std::vector<int> seen(p->grid().num_sites(), 0);
    for (std::size_t b = 0; b < p->num_blocks(); ++b) {
      CHECK(p->star_ball(b)[0] == b);
      for (auto s : p->sites_of(b)) {
        ++seen[s];
        CHECK(p->block_of_site(s) == b);
      }
      for (auto nb : p->neighbours(b)) {
        CHECK(p->are_neighbours(b, nb));
        CHECK(p->are_neighbours(nb, b));
      }
      for (auto nb : p->star_ball(b)) CHECK(p->are_star_neighbours(b, nb) == (nb != b));
      for (auto [a, c] : p->star_ball_pairs(b)) CHECK(p->are_neighbours(a, c));
    }
    for (int c : seen) CHECK(c == 1);
  }
}
