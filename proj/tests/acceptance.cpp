// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance [--out DIR] [name ...]
//
// With names, only those criteria run. Fixture CSVs land in DIR (default
// ./fixtures). Exit status is 0 only when every selected criterion passes.

#include <chrono>
#include <deque>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "phi4/diagrams.hpp"
#include "phi4/dynamics.hpp"
#include "phi4/error.hpp"
#include "phi4/gff.hpp"
#include "phi4/ldp_stats.hpp"
#include "phi4/observables.hpp"
#include "phi4/phase_geometry.hpp"
#include "phi4/reflection.hpp"
#include "phi4/stats.hpp"

using namespace phi4;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path g_out = "fixtures";

void write_fixture(const std::string& name, const std::string& text) {
  fs::create_directories(g_out);
  std::ofstream f(g_out / name);
  if (!f) throw FormatError("cannot write fixture " + name);
  f << text;
}

template <class... T>
std::string fmt(const T&... parts) {
  std::ostringstream s;
  s.precision(4);
  (s << ... << parts);
  return s.str();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---------------------------------------------------------------------------

Outcome renorm_oracles() {
  struct Case {
    int dim, N, eps_inv;
    double eta, K;
  };
  const Case cases[] = {{3, 4, 2, 1.0, 2.0}, {3, 4, 2, 0.5, kNoCutoff}, {3, 8, 1, 0.3, 1.5},
                        {3, 8, 1, 1.0, kNoCutoff}, {2, 8, 1, 0.7, 1.0}, {2, 4, 2, 1.0, kNoCutoff}};
  double worst = 0.0;
  for (const auto& c : cases) {
    const TorusGrid g(c.dim, c.N, c.eps_inv);
    const ModelParams p{1.0, c.eta, c.K};
    const double t = oracle::tadpole(c.dim, c.N, c.eps_inv, c.eta, c.K);
    const double s = oracle::sunset(c.dim, c.N, c.eps_inv, c.eta, c.K);
    const auto G = oracle::lattice_green(g, c.eta);
    worst = std::max({worst, rel_err(tadpole(g, p), t), rel_err(sunset(g, p), s), rel_err(gamma(g, p), -48.0 * s),
                      rel_err(lattice_green_zero(g, c.eta), G[0])});
  }
  return {worst <= 1e-10, fmt("max relative error ", worst, " over 6 grids (tol 1e-10)")};
}

// Shared GFF ensemble for the law and Wick criteria.
struct GffEnsemble {
  TorusGrid grid{3, 4, 2};
  ModelParams params{1.0, 1.0, 1.2};
  std::vector<double> sum_sq, sum_q4;
  std::vector<std::vector<double>> wick_means{3};
  std::vector<double> point_values;
  std::size_t samples = 10000;
};

const GffEnsemble& gff_ensemble() {
  static const GffEnsemble ens = [] {
    GffEnsemble e;
    const auto& g = e.grid;
    e.sum_sq.assign(g.num_modes(), 0.0);
    e.sum_q4.assign(g.num_modes(), 0.0);
    const double t = tadpole(g, e.params);
    for (std::size_t s = 0; s < e.samples; ++s) {
      auto rng = make_rng(2718, s);
      const Field phi = sample_gff(g, e.params, rng);
      const auto f = fft_forward(phi);
      for (std::size_t n = 0; n < g.num_modes(); ++n) {
        const double a = std::norm(f.coeffs[n]);
        e.sum_sq[n] += a;
        e.sum_q4[n] += a * a;
      }
      for (int p = 2; p <= 4; ++p) e.wick_means[p - 2].push_back(magnetisation(wick_power(phi, p, t)));
      e.point_values.push_back(phi[0]);
    }
    return e;
  }();
  return ens;
}

Outcome gff_law() {
  const auto& e = gff_ensemble();
  const auto theory = continuum_mode_variances(e.grid, e.params);
  const double n = static_cast<double>(e.samples);
  double worst_z = 0.0;
  std::size_t zero_modes = 0, zero_bad = 0;
  std::ostringstream csv;
  csv << "mode,n_norm,theory,empirical,stderr\n";
  for (std::size_t m = 0; m < theory.size(); ++m) {
    const double mean = e.sum_sq[m] / n;
    const double var = std::max(e.sum_q4[m] / n - mean * mean, 0.0);
    const double se = std::sqrt(var / (n - 1.0));
    csv << m << ',' << e.grid.frequency_norm(m) << ',' << theory[m] << ',' << mean << ',' << se << '\n';
    if (theory[m] == 0.0) {
      ++zero_modes;
      if (e.sum_sq[m] > 1e-20 * n) ++zero_bad;
      continue;
    }
    worst_z = std::max(worst_z, std::abs(mean - theory[m]) / se);
  }
  write_fixture("gff_modes.csv", csv.str());
  return {worst_z < 4.0 && zero_bad == 0,
          fmt("max |z| ", worst_z, " over ", theory.size() - zero_modes, " modes (tol 4); ", zero_modes,
              " cut-off modes, ", zero_bad, " nonzero")};
}

Outcome wick_centring() {
  const auto& e = gff_ensemble();
  std::string detail;
  bool ok = true;
  for (int p = 2; p <= 4; ++p) {
    const auto est = mean_estimate(e.wick_means[p - 2]);
    const double z = std::abs(est.value) / est.err;
    ok = ok && z < 4.0;
    detail += fmt(":phi^", p, ": z=", z, "  ");
  }
  // histogram of phi(0) for the plotting fixtures
  const double sd = std::sqrt(tadpole(e.grid, e.params));
  std::vector<double> edges, counts(40, 0.0);
  for (int i = 0; i <= 40; ++i) edges.push_back(-5.0 * sd + 0.25 * sd * i);
  for (double v : e.point_values) {
    const auto k = static_cast<long>(std::floor((v - edges[0]) / (0.25 * sd)));
    if (k >= 0 && k < 40) counts[static_cast<std::size_t>(k)] += 1.0;
  }
  write_fixture("hist.csv", hist_csv(edges, counts));
  return {ok, detail + "(tol 4)"};
}

Outcome trident_decay() {
  const TorusGrid g(3, 4, 16);
  const int labels[] = {4, 8, 16};
  struct Run {
    double K;
    int m;
  };
  std::vector<LadderRow> ladder;
  std::vector<LineFit> fits;
  std::string detail;
  for (const Run r : {Run{8.0, 24}, Run{16.0, 28}}) {
    const ModelParams p{1.0, 0.25, r.K};
    const auto sg = ScaleGrid::geometric(r.K, r.m, 4);
    std::vector<std::vector<std::size_t>> modes;
    for (int j : labels) modes.push_back({g.mode_index({j, 0, 0}), g.mode_index({0, j, 0}), g.mode_index({0, 0, j})});
    std::vector<std::vector<Complex>> coeffs(modes.size());
    const ScaleFlowSampler sampler(g, p, sg);
    for (std::size_t s = 0; s < 200; ++s) {
      auto rng = make_rng(31415 + static_cast<std::uint64_t>(r.K), s);
      const auto flow = sampler.sample(rng);
      for (std::size_t q = 0; q < modes.size(); ++q)
        for (auto md : modes[q]) coeffs[q].push_back(flow.trident.coeffs[md]);
    }
    std::vector<double> x, y, sig;
    for (std::size_t q = 0; q < modes.size(); ++q) {
      const auto est = trident_fourier_variance(coeffs[q], 20);
      const double norm = g.frequency_norm(modes[q][0]);
      const double br = std::sqrt(bracket_squared(norm, p.eta));
      ladder.push_back({r.K, norm, br, est.value, est.err});
      x.push_back(std::log(br));
      y.push_back(std::log(est.value));
      sig.push_back(est.err / est.value);
    }
    fits.push_back(fit_line(x, y, sig));
    const auto& f = fits.back();
    detail += fmt("K=", r.K, " slope ", f.slope, "+-", f.slope_err, "  ");
  }
  write_fixture("variance_ladder.csv", variance_ladder_csv(ladder));
  const double z = std::abs(fits[0].slope - fits[1].slope) / std::hypot(fits[0].slope_err, fits[1].slope_err);
  bool ok = z < 3.0;
  for (const auto& f : fits) ok = ok && f.slope >= -4.5 && f.slope <= -3.5;
  return {ok, detail + fmt("doubling z=", z, " (window [-4.5,-3.5], z<3)")};
}

Outcome linear_dynamics() {
  std::string detail;
  bool ok = true;
  double worst_z = 0.0;
  for (Scheme scheme : {Scheme::Lattice, Scheme::Galerkin}) {
    SimConfig c;
    c.dim = 2;
    c.side = 4;
    c.eps_inv = 2;
    c.params = ModelParams{2.0, 1.0};
    c.scheme = scheme;
    c.model = DriftModel::Gaussian;
    c.dt = 0.05;
    c.seed = 99;
    c.n_steps = 400000;
    c.burn_in = 2000;
    c.thin = 5;
    const auto g = c.grid();
    std::vector<std::vector<double>> series(g.num_modes());
    run(c, [&](const Field& phi, const TrajectoryRecord&) {
      const auto f = fft_forward(phi);
      for (std::size_t n = 0; n < g.num_modes(); ++n) series[n].push_back(std::norm(f.coeffs[n]));
    });
    for (std::size_t n = 0; n < g.num_modes(); ++n) {
      double expect;
      if (scheme == Scheme::Lattice) {
        const double L = lattice_eigenvalue(g, n) + c.params.eta;
        expect = 2.0 * g.volume() / (L * (2.0 - c.dt * L));
      } else {
        expect = g.volume() / bracket_squared(g.frequency_norm(n), c.params.eta);
      }
      const auto e = batch_mean(series[n], 40);
      worst_z = std::max(worst_z, std::abs(e.value - expect) / e.err);
    }
  }
  ok = worst_z < 4.0;
  detail += fmt("mode variances max |z| ", worst_z, " over 2x64 modes (tol 4); ");
  for (Scheme scheme : {Scheme::Galerkin, Scheme::Lattice}) {
    SimConfig c;
    c.dim = 2;
    c.side = 4;
    c.eps_inv = 1;
    c.params = ModelParams{2.0, 0.5};
    c.scheme = scheme;
    c.model = DriftModel::Gaussian;
    // the Galerkin step is exact on this linear law, so it can take long steps
    c.dt = scheme == Scheme::Lattice ? 0.05 : 0.5;
    c.seed = 5;
    c.n_steps = scheme == Scheme::Lattice ? 4000000 : 400000;
    c.burn_in = 1000;
    c.thin = scheme == Scheme::Lattice ? 5 : 1;
    std::vector<double> ms;
    const auto res = run(c);
    for (const auto& r : res.records) ms.push_back(r.magnetisation);
    double sd = 0.0;
    for (double v : ms) sd += v * v;
    sd = std::sqrt(sd / static_cast<double>(ms.size()));
    const auto gap = spectral_gap_estimate(ms, c.dt * static_cast<double>(c.thin), 20.0 * sd);
    const double rel = std::abs(gap.lambda - c.params.eta) / c.params.eta;
    ok = ok && !gap.inconclusive && rel <= 0.10;
    detail += fmt(scheme == Scheme::Lattice ? "lattice" : "galerkin", " rate ", gap.lambda, "+-", gap.err,
                  " vs eta ", c.params.eta, " (", 100.0 * rel, "%)", gap.inconclusive ? " " + gap.reason : "", "; ");
  }
  return {ok, detail + "(tol 10%)"};
}

Outcome badset_bounds() {
  std::size_t violations = 0, bad = 0, configs = 0;
  std::string detail;
  for (double beta : {2.0, 6.0}) {
    SimConfig c;
    c.dim = 3;
    c.side = 4;
    c.eps_inv = 2;
    c.params = ModelParams{beta, 1.0};
    c.dt = 0.02;
    c.seed = 17 + static_cast<std::uint64_t>(beta);
    c.initial = InitialState::Plus;
    c.burn_in = 2000;
    c.thin = 20;
    c.n_steps = c.burn_in + 1000 * c.thin;
    const auto g = c.grid();
    auto part = std::make_shared<const BlockPartition>(g);
    const double t = lattice_green_zero(g, c.params.eta);
    std::size_t n = 0;
    std::vector<std::size_t> bad_by_delta(2, 0);
    run(c, [&](const Field& phi, const TrajectoryRecord&) {
      ++n;
      const auto bf = block_average(part, phi, t);
      int k = 0;
      for (double delta : {0.25, 0.5}) {
        const auto label = phase_label(classify_blocks(bf, beta, delta), part, beta);
        const auto rep = verify_badset_inequalities(label, bf, beta, delta);
        violations += rep.violations;
        bad_by_delta[k++] += rep.frustrated + rep.interface;
      }
    });
    configs += n;
    bad += bad_by_delta[0] + bad_by_delta[1];
    detail += fmt("beta=", beta, ": ", n, " configs, bad blocks checked ", bad_by_delta[0], "/", bad_by_delta[1], "; ");
  }
  return {violations == 0 && configs >= 2000 && bad > 0, detail + fmt("violations ", violations)};
}

Outcome geometry_invariants() {
  std::string detail;
  bool ok = true;
  // bad-set partition against a brute *-ball recomputation
  auto part = std::make_shared<const BlockPartition>(TorusGrid(3, 4, 1));
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u;
  std::size_t mismatches = 0;
  auto close = [&](std::size_t a, std::size_t b) {
    const auto ca = part->block_coords(a), cb = part->block_coords(b);
    for (int d = 0; d < 3; ++d) {
      const int diff = std::abs(ca[d] - cb[d]);
      if (std::min(diff, 4 - diff) > 1) return false;
    }
    return true;
  };
  for (int trial = 0; trial < 10000; ++trial) {
    const double pn = 0.05 * (trial % 6);
    std::vector<Valued> v(part->num_blocks());
    for (auto& x : v) {
      const double r = u(rng);
      x = r < pn ? Valued::Neutral : (r < 0.5 + 0.5 * pn + 0.3 * (trial % 2) ? Valued::Plus : Valued::Minus);
    }
    const auto label = phase_label(v, part, 2.0);
    const auto kinds = partition_bad(label);
    for (std::size_t b = 0; b < part->num_blocks(); ++b) {
      bool uniform = v[b] != Valued::Neutral, neutral = false;
      for (std::size_t c = 0; c < part->num_blocks(); ++c)
        if (close(b, c)) {
          uniform = uniform && v[c] == v[b];
          neutral = neutral || v[c] == Valued::Neutral;
        }
      const BadKind expect = uniform ? BadKind::Good : (neutral ? BadKind::Frustrated : BadKind::Interface);
      if (label.is_bad(b) == uniform || kinds[b] != expect) ++mismatches;
    }
  }
  ok = ok && mismatches == 0;
  detail += fmt("labelling mismatches ", mismatches, "/10000 labellings; ");

  const BlockPartition p3(TorusGrid(3, 4, 1)), p2(TorusGrid(2, 4, 1));
  ok = ok && p3.ball_size() == 27 && p2.ball_size() == 9 && p3.star_ball(5).size() == 27;
  detail += fmt("ball sizes ", p3.ball_size(), "/", p2.ball_size(), "; ");

  const TorusGrid rg(3, 4, 2);
  Field f(rg);
  std::normal_distribution<double> nd;
  for (auto& x : f.values) x = nd(rng);
  std::size_t non_involutive = 0;
  for (int axis = 0; axis < 3; ++axis)
    for (int off = 0; off < 4; ++off) {
      const Hyperplane h{axis, off};
      if (reflect(reflect(f, h), h).values != f.values) ++non_involutive;
    }
  ok = ok && non_involutive == 0;
  detail += fmt("non-involutive reflections ", non_involutive, "/12; ");

  const BlockPartition p8(TorusGrid(3, 8, 1));
  auto box = [&](std::array<int, 3> lo, std::array<int, 3> hi, std::vector<std::int8_t>& s) {
    for (std::size_t b = 0; b < p8.num_blocks(); ++b) {
      const auto c = p8.block_coords(b);
      bool in = true;
      for (int d = 0; d < 3; ++d) in = in && c[d] >= lo[d] && c[d] < hi[d];
      if (in) s[b] = 1;
    }
  };
  bool areas = true;
  for (int l : {1, 2, 3}) {
    std::vector<std::int8_t> s(p8.num_blocks(), -1);
    box({0, 0, 0}, {l, l, l}, s);
    areas = areas && boundary_area(p8, s) == static_cast<std::size_t>(6 * l * l);
  }
  ok = ok && areas;
  detail += fmt("cube areas ", areas ? "6l^2" : "WRONG", "; ");

  // structured family: boxes and disjoint unions that do not wrap around the torus
  double worst = 0.0;
  const double bound = std::pow(6.0, -1.5) * (1.0 + 1e-4);
  for (int a = 1; a <= 4; ++a)
    for (int b = a; b <= 4; ++b)
      for (int c = b; c <= 4; ++c) {
        std::vector<std::int8_t> s(p8.num_blocks(), -1);
        box({0, 0, 0}, {a, b, c}, s);
        worst = std::max(worst, isoperimetric_check(p8, s).ratio);
        box({5, 5, 5}, {5 + std::min(a, 2), 5 + std::min(b, 2), 5 + std::min(c, 2)}, s);
        worst = std::max(worst, isoperimetric_check(p8, s).ratio);
      }
  ok = ok && worst <= bound;
  detail += fmt("max isoperimetric ratio ", worst, " (bound ", bound, ")");
  return {ok, detail};
}

Outcome chessboard() {
  SimConfig c;
  c.dim = 2;
  c.side = 4;
  c.eps_inv = 1;
  c.params = ModelParams{3.0, 1.0};
  c.dt = 0.05;
  c.seed = 4242;
  c.initial = InitialState::Plus;
  c.burn_in = 5000;
  c.thin = 10;
  c.n_steps = c.burn_in + 100000 * c.thin;
  const auto g = c.grid();
  auto part = std::make_shared<const BlockPartition>(g);
  const double beta = c.params.beta;
  const double t = lattice_green_zero(g, c.params.eta);
  // log e^{Q1(B)}
  auto log_f = [part, beta, t](const Field& phi, std::size_t b) {
    double w2 = 0.0;
    for (auto s : part->sites_of(b)) w2 += phi[s] * phi[s] - t;
    w2 *= phi.grid.cell_volume();
    return (beta - w2) / std::sqrt(beta);
  };
  ChessboardAccumulator acc(part, {0, 1}, log_f);
  run(c, [&](const Field& phi, const TrajectoryRecord&) { acc.add(phi); });
  const auto rep = acc.report();
  const bool ok = !rep.inconclusive && rep.margin <= 3.0 * rep.margin_err;
  return {ok, fmt("log-margin ", rep.margin, " +- ", rep.margin_err, " over ", rep.samples, " samples, min ESS ",
                  rep.min_ess, rep.inconclusive ? " (inconclusive)" : "")};
}

// Umbrella ladder shared by the surface-order and gap criteria.
struct LadderPoint {
  int N;
  UmbrellaSummary summary;
  double acceptance;
};

constexpr double kLdpBeta = 6.0;
constexpr double kLdpZeta = 0.5;
constexpr double kChiScale = 0.5;

LadderPoint umbrella_point(int N) {
  UmbrellaPlan plan;
  plan.base.dim = 2;
  plan.base.side = N;
  plan.base.eps_inv = 1;
  plan.base.params = ModelParams{kLdpBeta, 1.0};
  plan.base.dt = 0.05;
  plan.kappa = 8.0;
  plan.exchanges = 4000;
  plan.burn_in_exchanges = 400;
  plan.steps_per_exchange = 10;
  const double root = std::sqrt(kLdpBeta);
  const std::size_t nw = 6 * static_cast<std::size_t>(N);
  for (std::size_t i = 0; i < nw; ++i) plan.centres.push_back(1.3 * root * i / static_cast<double>(nw - 1));
  const auto ur = run_umbrella(plan, 1000 + static_cast<std::uint64_t>(N));
  const double vol = static_cast<double>(N) * N;
  return {N, summarise_umbrella(ur.windows, vol, kLdpZeta * root, kChiScale * root), ur.exchange_acceptance};
}

std::deque<LadderPoint>& ladder() {
  // deque: references handed out stay valid as points are added
  static std::deque<LadderPoint> pts;
  return pts;
}

const LadderPoint& ladder_point(int N) {
  for (const auto& p : ladder())
    if (p.N == N) return p;
  ladder().push_back(umbrella_point(N));
  return ladder().back();
}

Outcome surface_order() {
  std::vector<RateInput> in;
  std::vector<double> edges;
  for (int i = 0; i <= 40; ++i) edges.push_back(0.04 * i * std::sqrt(kLdpBeta));
  std::ostringstream hist;
  hist << "N,m_lo,m_hi,log_p\n";
  for (int N : {8, 12, 16}) {
    const auto& p = ladder_point(N);
    in.push_back({N, p.summary.prob});
    const auto h = wham_log_histogram(p.summary.fit, edges);
    hist.precision(10);
    for (std::size_t i = 0; i < h.size(); ++i) hist << N << ',' << edges[i] << ',' << edges[i + 1] << ',' << h[i] << '\n';
  }
  write_fixture("umbrella_log_hist.csv", hist.str());
  const auto rep = ldp_rate(in, 2, 2.0);
  write_fixture("rate_vs_N.csv", rate_vs_n_csv(rep));
  std::string detail = "rates";
  for (const auto& r : rep.rows) detail += fmt(" N=", r.N, ":", r.rate, "+-", r.err);
  detail += fmt(", max pair z ", rep.max_pair_z, " (tol 2); ");

  // Peierls slope of log P(all of B bad) against |B|
  std::vector<SlopeRow> slopes;
  std::vector<PeierlsFit> fits;
  for (double beta : {3.0, 6.0}) {
    SimConfig c;
    c.dim = 2;
    c.side = 16;
    c.eps_inv = 1;
    c.params = ModelParams{beta, 1.0};
    c.dt = 0.05;
    c.seed = 606 + static_cast<std::uint64_t>(beta);
    c.initial = InitialState::Plus;
    c.burn_in = 4000;
    c.thin = 10;
    c.n_steps = c.burn_in + 20000 * c.thin;
    const auto g = c.grid();
    auto part = std::make_shared<const BlockPartition>(g);
    const double t = lattice_green_zero(g, c.params.eta);
    const std::size_t sizes = 4;
    std::vector<std::vector<std::size_t>> sets;
    for (std::size_t k = 1; k <= sizes; ++k) sets.push_back(separated_block_set(*part, k));
    std::vector<std::vector<double>> frac(sizes);
    std::size_t translates = 0;
    run(c, [&](const Field& phi, const TrajectoryRecord&) {
      const auto bf = block_average(part, phi, t);
      const auto label = phase_label(classify_blocks(bf, beta, 0.5), part, beta);
      for (std::size_t k = 0; k < sizes; ++k) {
        const auto [ev, tr] = count_all_bad(label, sets[k]);
        frac[k].push_back(static_cast<double>(ev) / static_cast<double>(tr));
        translates = tr;
      }
    });
    std::vector<PeierlsPoint> pts;
    for (std::size_t k = 0; k < sizes; ++k)
      pts.push_back({k + 1, log_probability_from_fractions(frac[k], static_cast<double>(translates))});
    fits.push_back(peierls_decay(pts));
    slopes.push_back({beta, fits.back().fit.slope, fits.back().fit.slope_err});
    detail += fmt("beta=", beta, " slope ", fits.back().fit.slope, "+-", fits.back().fit.slope_err, "; ");
  }
  write_fixture("slope_vs_beta.csv", slope_vs_beta_csv(slopes));
  const bool peierls = fits[0].negative_at_3sigma && fits[1].negative_at_3sigma &&
                       std::abs(fits[1].fit.slope) >= std::abs(fits[0].fit.slope);
  const bool ok = rep.pairwise_consistent && !rep.inconclusive && peierls;
  return {ok, detail + (peierls ? "Peierls trend holds" : "Peierls trend FAILS")};
}

Outcome gap_decay() {
  const auto& a = ladder_point(8);
  const auto& b = ladder_point(16);
  std::vector<GapRow> rows;
  for (const auto* p : {&a, &b}) rows.push_back({p->N, p->summary.poincare.value, p->summary.poincare.err, "poincare"});
  write_fixture("gap_vs_N.csv", gap_vs_n_csv(rows));
  // errors are carried on the log scale
  const double la = std::log(a.summary.poincare.value), lb = std::log(b.summary.poincare.value);
  const double ea = a.summary.poincare.err / a.summary.poincare.value;
  const double eb = b.summary.poincare.err / b.summary.poincare.value;
  const double z = (la - lb) / std::hypot(ea, eb);
  return {z > 3.0, fmt("log lambda N=8 ", la, "+-", ea, ", N=16 ", lb, "+-", eb, ", z=", z, " (tol 3)")};
}

Outcome synthetic_recovery() {
  std::string detail;
  bool ok = true;
  auto within = [&](const std::string& what, double got, double want, double tol) {
    const double e = rel_err(got, want);
    ok = ok && e <= tol;
    detail += fmt(what, " ", 100.0 * e, "%; ");
  };
  std::mt19937_64 rng(123);
  std::normal_distribution<double> nd;

  // planted AR(1) gap
  {
    const double r = 0.05, phi = std::exp(-r);
    std::vector<double> x(2000000);
    double v = nd(rng) / std::sqrt(1.0 - phi * phi);
    for (auto& e : x) e = v = phi * v + nd(rng);
    const auto g = spectral_gap_estimate(x, 1.0, 20.0 / std::sqrt(1.0 - phi * phi));
    within("AR(1) gap", g.lambda, r, 0.10);
    const double tau = integrated_autocorrelation_time(autocovariance(x, 2000));
    within("tau_int", tau, 0.5 * (1.0 + phi) / (1.0 - phi), 0.10);
  }
  // planted Gaussian tail through umbrella windows and WHAM
  {
    const double a = 1.0, V = 50.0, kappa = 8.0;
    std::vector<UmbrellaWindow> windows;
    for (int i = 0; i < 10; ++i) {
      const double c = 0.12 * i;
      std::normal_distribution<double> g(kappa * c / (a + kappa), 1.0 / std::sqrt((a + kappa) * V));
      UmbrellaWindow w{kappa, c, {}};
      for (int s = 0; s < 20000; ++s) w.m.push_back(g(rng));
      windows.push_back(std::move(w));
    }
    const double sd = 1.0 / std::sqrt(a * V);
    const auto fit = wham(windows, V);
    const double tail = wham_log_probability(fit, [](double m) { return m > 0.6; }) -
                        wham_log_probability(fit, [](double m) { return m > 0.0; }) + std::log(0.5);
    within("WHAM tail log P", tail, std::log(0.5 * std::erfc(0.6 / (sd * std::sqrt(2.0)))), 0.05);
    const auto su = summarise_umbrella(windows, V, 0.1, 10.0);
    within("jackknifed log P", su.prob.log_p, std::log(std::erf(0.1 / (sd * std::sqrt(2.0)))), 0.05);
    // linear chi: quotient of a Gaussian is 1 / (V sd^2) = a
    within("Poincare quotient", su.poincare.value, a, 0.10);
  }
  // planted Peierls decay
  {
    const double slope = 0.7;
    std::vector<PeierlsPoint> pts;
    for (std::size_t k = 1; k <= 4; ++k) {
      std::bernoulli_distribution b(std::exp(-slope * k));
      std::uint64_t hits = 0;
      for (int i = 0; i < 400000; ++i) hits += b(rng);
      pts.push_back({k, binomial_log_probability(hits, 400000)});
    }
    within("Peierls slope", -peierls_decay(pts).fit.slope, slope, 0.05);
  }
  // planted surface-order rates
  {
    std::vector<RateInput> in;
    for (int N : {8, 12, 16}) {
      std::bernoulli_distribution b(std::exp(-0.4 * N));
      std::uint64_t hits = 0;
      for (int i = 0; i < 2000000; ++i) hits += b(rng);
      in.push_back({N, binomial_log_probability(hits, 2000000)});
    }
    within("rate constant", -ldp_rate(in, 2).constant.value, 0.4, 0.05);
  }
  // planted log-normal exponential moment
  {
    const double mu = 0.4, s = 0.5;
    std::normal_distribution<double> g(mu, s);
    std::vector<double> logs(100000);
    for (auto& v : logs) v = 3.0 * g(rng);
    within("q-moment", q_moment_estimate(logs, 3).exponent, mu + 1.5 * s * s, 0.05);
  }
  return {ok, detail + "(tol 5-10%)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"renorm_oracles", renorm_oracles},     {"gff_law", gff_law},
      {"wick_centring", wick_centring},       {"trident_decay", trident_decay},
      {"linear_dynamics", linear_dynamics},   {"badset_bounds", badset_bounds},
      {"geometry_invariants", geometry_invariants}, {"chessboard", chessboard},
      {"surface_order", surface_order},       {"gap_decay", gap_decay},
      {"synthetic_recovery", synthetic_recovery}};
  std::vector<std::string> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" && i + 1 < argc)
      g_out = argv[++i];
    else
      wanted.push_back(a);
  }
  for (const auto& w : wanted) {
    bool known = false;
    for (const auto& c : checks) known = known || c.first == w;
    if (!known) {
      std::cerr << "unknown criterion " << w << "\n";
      return 2;
    }
  }
  int failures = 0;
  for (const auto& [name, fn] : checks) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << fmt(secs) << " s]" << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
