#include "phi4/ldp_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "phi4/error.hpp"

namespace phi4 {

LogProbability binomial_log_probability(std::uint64_t events, std::uint64_t trials) {
  if (trials == 0) throw UsageError("binomial estimate with zero trials");
  if (events > trials) throw UsageError("more events than trials");
  LogProbability r;
  if (events == 0) {
    r.log_p = std::log(3.0 / static_cast<double>(trials));
    r.upper_bound = true;
    return r;
  }
  const double p = static_cast<double>(events) / static_cast<double>(trials);
  r.log_p = std::log(p);
  r.err = std::sqrt((1.0 - p) / static_cast<double>(events));
  return r;
}

RateReport ldp_rate(const std::vector<RateInput>& inputs, int dim, double pair_z) {
  if (dim != 2 && dim != 3) throw UsageError("dimension must be 2 or 3");
  RateReport rep;
  std::vector<double> vals;
  std::vector<double> errs;
  for (const auto& in : inputs) {
    const double scale = std::pow(static_cast<double>(in.N), dim - 1);
    RateRow row{in.N, in.prob.log_p / scale, in.prob.err / scale, in.prob.upper_bound};
    rep.rows.push_back(row);
    if (!row.upper_bound) {
      vals.push_back(row.rate);
      errs.push_back(row.err);
    }
  }
  if (vals.empty()) {
    rep.inconclusive = true;
    return rep;
  }
  double sw = 0.0;
  double swx = 0.0;
  bool exact = false;
  for (std::size_t i = 0; i < vals.size(); ++i) exact = exact || errs[i] == 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double w = exact ? 1.0 : 1.0 / (errs[i] * errs[i]);
    sw += w;
    swx += w * vals[i];
  }
  rep.constant.value = swx / sw;
  rep.constant.err = exact ? 0.0 : std::sqrt(1.0 / sw);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (errs[i] > 0.0) rep.chi2 += std::pow((vals[i] - rep.constant.value) / errs[i], 2);
    for (std::size_t j = i + 1; j < vals.size(); ++j) {
      const double e = std::hypot(errs[i], errs[j]);
      const double diff = std::abs(vals[i] - vals[j]);
      const double z = e > 0.0 ? diff / e : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
      rep.max_pair_z = std::max(rep.max_pair_z, z);
    }
  }
  rep.pairwise_consistent = vals.size() == inputs.size() && rep.max_pair_z <= pair_z;
  return rep;
}

namespace {

double bias(double kappa, double centre, double volume, double m) noexcept {
  const double d = m - centre;
  return 0.5 * kappa * volume * d * d;
}

// Newton's method on the convex binless objective
//   F(f) = sum_n c_n log sum_i N_i exp(f_i - u_i(m_n)) - sum_i N_i f_i,
// with f_0 = 0 fixing the gauge. Points carry multiplicities c_n = exp(log_mult_n).
int wham_newton(const std::vector<UmbrellaWindow>& windows, double volume, const std::vector<double>& log_n,
                const std::vector<double>& pts, const std::vector<double>& log_mult, std::vector<double>& f,
                double tol, int max_iter) {
  const std::size_t nw = windows.size();
  std::vector<double> terms(nw);
  auto objective = [&](const std::vector<double>& ff) {
    KahanSum s;
    for (std::size_t n = 0; n < pts.size(); ++n) {
      for (std::size_t i = 0; i < nw; ++i)
        terms[i] = log_n[i] + ff[i] - bias(windows[i].kappa, windows[i].centre, volume, pts[n]);
      s.add(std::exp(log_mult[n]) * log_sum_exp(terms));
    }
    for (std::size_t i = 0; i < nw; ++i) s.add(-std::exp(log_n[i]) * ff[i]);
    return s.value();
  };
  if (nw == 1) {
    f.assign(1, 0.0);
    return 0;
  }
  const auto k = static_cast<Eigen::Index>(nw - 1);
  int it = 0;
  double cur = objective(f);
  for (; it < max_iter; ++it) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(k);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, k);
    std::vector<double> p(nw);
    std::vector<Eigen::Index> active;
    for (std::size_t n = 0; n < pts.size(); ++n) {
      for (std::size_t i = 0; i < nw; ++i)
        terms[i] = log_n[i] + f[i] - bias(windows[i].kappa, windows[i].centre, volume, pts[n]);
      const double ld = log_sum_exp(terms);
      const double c = std::exp(log_mult[n]);
      // Each sample only carries weight in a few neighbouring windows.
      active.clear();
      for (std::size_t i = 1; i < nw; ++i) {
        p[i] = std::exp(terms[i] - ld);
        if (p[i] > 1e-18) active.push_back(static_cast<Eigen::Index>(i - 1));
      }
      for (const auto a : active) {
        const double pa = p[a + 1];
        g(a) += c * pa;
        h(a, a) += c * pa;
        for (const auto b : active) h(a, b) -= c * pa * p[b + 1];
      }
    }
    for (Eigen::Index a = 0; a < k; ++a) {
      g(a) -= std::exp(log_n[a + 1]);
      h(a, a) += 1e-12 * (1.0 + std::abs(h(a, a)));
    }
    const Eigen::VectorXd step = h.ldlt().solve(-g);
    double t = 1.0;
    std::vector<double> trial(nw);
    double next = cur;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      trial[0] = 0.0;
      for (Eigen::Index a = 0; a < k; ++a) trial[a + 1] = f[a + 1] + t * step(a);
      next = objective(trial);
      if (next <= cur + 1e-4 * t * g.dot(step)) break;
    }
    const double change = t * step.cwiseAbs().maxCoeff();
    f = trial;
    cur = next;
    if (!(change > tol)) {
      ++it;
      break;
    }
  }
  return it;
}

}  // namespace

WhamResult wham(const std::vector<UmbrellaWindow>& windows, double volume, double tol, int max_iter) {
  if (windows.empty()) throw UsageError("WHAM needs at least one window");
  const std::size_t nw = windows.size();
  std::vector<double> log_n(nw);
  std::vector<double> pooled;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < nw; ++i) {
    if (windows[i].m.empty()) throw UsageError("WHAM window without samples");
    log_n[i] = std::log(static_cast<double>(windows[i].m.size()));
    for (double v : windows[i].m) {
      pooled.push_back(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }

  // Warm start on a fine histogram, then polish on the raw samples.
  std::vector<double> f(nw, 0.0);
  {
    const std::size_t nbins = 2048;
    const double width = (hi - lo) / nbins + 1e-300;
    std::vector<double> counts(nbins, 0.0);
    for (double v : pooled) counts[std::min(nbins - 1, static_cast<std::size_t>((v - lo) / width))] += 1.0;
    std::vector<double> pts;
    std::vector<double> lm;
    for (std::size_t b = 0; b < nbins; ++b)
      if (counts[b] > 0) {
        pts.push_back(lo + (b + 0.5) * width);
        lm.push_back(std::log(counts[b]));
      }
    wham_newton(windows, volume, log_n, pts, lm, f, 1e-6, max_iter);
  }

  WhamResult res;
  res.volume = volume;
  res.m = pooled;
  const std::vector<double> zeros(pooled.size(), 0.0);
  res.iterations = wham_newton(windows, volume, log_n, pooled, zeros, f, tol, max_iter);
  res.free_energy = f;
  res.log_weight.resize(pooled.size());
  std::vector<double> terms(nw);
  for (std::size_t n = 0; n < pooled.size(); ++n) {
    for (std::size_t i = 0; i < nw; ++i)
      terms[i] = log_n[i] + f[i] - bias(windows[i].kappa, windows[i].centre, volume, pooled[n]);
    res.log_weight[n] = -log_sum_exp(terms);
  }
  const double z = log_sum_exp(res.log_weight);
  for (auto& v : res.log_weight) v -= z;
  return res;
}

double wham_log_probability(const WhamResult& w, const std::function<bool(double)>& event) {
  std::vector<double> sel;
  for (std::size_t n = 0; n < w.m.size(); ++n)
    if (event(w.m[n])) sel.push_back(w.log_weight[n]);
  return log_sum_exp(sel);
}

std::vector<double> wham_log_histogram(const WhamResult& w, const std::vector<double>& edges) {
  if (edges.size() < 2) throw UsageError("histogram needs at least two edges");
  std::vector<std::vector<double>> per(edges.size() - 1);
  for (std::size_t n = 0; n < w.m.size(); ++n) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), w.m[n]);
    if (it == edges.begin() || it == edges.end()) continue;
    per[static_cast<std::size_t>(it - edges.begin()) - 1].push_back(w.log_weight[n]);
  }
  std::vector<double> out(per.size());
  for (std::size_t b = 0; b < per.size(); ++b) out[b] = log_sum_exp(per[b]);
  return out;
}

namespace {

Field strip_state(const TorusGrid& g, double beta, double centre) {
  const double r = std::sqrt(beta);
  const int m = g.sites_per_axis();
  const double frac = std::clamp(0.5 * (1.0 + centre / r), 0.0, 1.0);
  const int width = static_cast<int>(std::lround(frac * m));
  Field f(g);
  for (std::size_t s = 0; s < g.num_sites(); ++s) f[s] = g.site_coords(s)[0] < width ? r : -r;
  return f;
}

}  // namespace

UmbrellaRun run_umbrella(const UmbrellaPlan& plan, std::uint64_t seed) {
  const std::size_t nw = plan.centres.size();
  if (nw == 0) throw UsageError("umbrella plan without windows");
  std::vector<Dynamics> dyn;
  std::vector<Field> state;
  std::vector<std::uint64_t> step(nw, 0);
  dyn.reserve(nw);
  for (std::size_t i = 0; i < nw; ++i) {
    SimConfig c = plan.base;
    c.umbrella_kappa = plan.kappa;
    c.umbrella_centre = plan.centres[i];
    c.seed = seed * 1000003ULL + i;
    dyn.emplace_back(c);
    state.push_back(plan.strip_start ? strip_state(dyn.back().grid(), plan.base.params.beta, plan.centres[i])
                                     : Field(dyn.back().grid(), plan.centres[i]));
  }
  const double volume = dyn.front().grid().volume();
  Rng xrng = make_rng(seed, 1ULL << 62);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  UmbrellaRun out;
  out.windows.resize(nw);
  for (std::size_t i = 0; i < nw; ++i) out.windows[i] = {plan.kappa, plan.centres[i], {}};
  std::uint64_t tried = 0;
  std::uint64_t accepted = 0;
  for (std::uint64_t round = 0; round < plan.exchanges; ++round) {
    for (std::size_t i = 0; i < nw; ++i)
      for (std::uint64_t s = 0; s < plan.steps_per_exchange; ++s) {
        dyn[i].step(state[i], ++step[i]);
        if (!state[i].all_finite()) throw DivergenceError(step[i], "");
      }
    if (plan.replica_exchange && nw > 1) {
      for (std::size_t i = round % 2; i + 1 < nw; i += 2) {
        const double mi = magnetisation(state[i]);
        const double mj = magnetisation(state[i + 1]);
        const double ci = plan.centres[i];
        const double cj = plan.centres[i + 1];
        const double delta = bias(plan.kappa, ci, volume, mj) + bias(plan.kappa, cj, volume, mi) -
                             bias(plan.kappa, ci, volume, mi) - bias(plan.kappa, cj, volume, mj);
        ++tried;
        if (delta <= 0.0 || unif(xrng) < std::exp(-delta)) {
          std::swap(state[i], state[i + 1]);
          ++accepted;
        }
      }
    }
    if (round >= plan.burn_in_exchanges)
      for (std::size_t i = 0; i < nw; ++i) out.windows[i].m.push_back(magnetisation(state[i]));
  }
  out.exchange_acceptance = tried ? static_cast<double>(accepted) / static_cast<double>(tried) : 0.0;
  return out;
}

UmbrellaSummary summarise_umbrella(const std::vector<UmbrellaWindow>& windows, double volume, double threshold,
                                   double chi_scale, std::size_t groups) {
  if (groups < 2) throw UsageError("jackknife needs at least two groups");
  for (const auto& w : windows)
    if (w.m.size() < groups) throw UsageError("umbrella window shorter than the jackknife group count");
  auto log_p = [threshold](const WhamResult& w) {
    return wham_log_probability(w, [threshold](double m) { return m >= 0.0 && m < threshold; }) -
           wham_log_probability(w, [](double m) { return m >= 0.0; });
  };
  std::vector<double> lp(groups + 1);
  std::vector<double> pq(groups + 1);
  UmbrellaSummary out;
  for (std::size_t g = 0; g <= groups; ++g) {
    std::vector<UmbrellaWindow> sub = windows;
    if (g < groups)
      for (auto& w : sub) {
        const std::size_t len = w.m.size() / groups;
        const auto first = w.m.begin() + static_cast<std::ptrdiff_t>(g * len);
        w.m.erase(first, first + static_cast<std::ptrdiff_t>(len));
      }
    auto fit = wham(sub, volume);
    lp[g] = log_p(fit);
    // chi^2 and chi'^2 are even: average over the well-sampled half-line only
    WhamResult half;
    half.volume = fit.volume;
    for (std::size_t n = 0; n < fit.m.size(); ++n)
      if (fit.m[n] >= 0.0) {
        half.m.push_back(fit.m[n]);
        half.log_weight.push_back(fit.log_weight[n]);
      }
    pq[g] = poincare_quotient(half, chi_scale);
    if (g == groups) out.fit = std::move(fit);
  }
  const auto jl = jackknife(groups, [&](std::size_t g) { return lp[g]; });
  // the quotient spans many decades; resample its logarithm
  const auto jq = jackknife(groups, [&](std::size_t g) { return std::log(pq[g]); });
  out.prob = LogProbability{jl.value, jl.err, false};
  out.poincare = Estimate{std::exp(jq.value), std::exp(jq.value) * jq.err};
  return out;
}

PeierlsFit peierls_decay(const std::vector<PeierlsPoint>& points) {
  PeierlsFit out;
  out.points = points;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> e;
  for (const auto& p : points) {
    if (p.size == 0 || p.prob.upper_bound) continue;
    x.push_back(static_cast<double>(p.size));
    y.push_back(p.prob.log_p);
    e.push_back(p.prob.err);
  }
  if (x.size() < 2) {
    out.upper_bound_only = true;
    return out;
  }
  const bool weighted = std::all_of(e.begin(), e.end(), [](double v) { return v > 0.0; });
  out.fit = weighted ? fit_line(x, y, e) : fit_line(x, y);
  out.negative_at_3sigma = out.fit.slope + 3.0 * out.fit.slope_err < 0.0;
  return out;
}

std::vector<std::size_t> separated_block_set(const BlockPartition& part, std::size_t size) {
  if (2 * size > static_cast<std::size_t>(part.side()))
    throw UsageError("torus too small for the separated block set");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size; ++i) out.push_back(part.block_index({static_cast<int>(2 * i), 0, 0}));
  return out;
}

std::pair<std::size_t, std::size_t> count_all_bad(const PhaseLabel& label, const std::vector<std::size_t>& blocks) {
  const auto& part = *label.partition;
  std::size_t events = 0;
  for (std::size_t t = 0; t < part.num_blocks(); ++t) {
    const auto shift = part.block_coords(t);
    bool all = true;
    for (auto b : blocks) {
      auto c = part.block_coords(b);
      for (int a = 0; a < part.dim(); ++a) c[a] += shift[a];
      if (!label.is_bad(part.block_index(c))) {
        all = false;
        break;
      }
    }
    if (all) ++events;
  }
  return {events, part.num_blocks()};
}

LogProbability log_probability_from_fractions(const std::vector<double>& fractions, double trials_per_sample,
                                              std::size_t batches) {
  const auto est = batch_mean(fractions, std::min(batches, fractions.size()));
  LogProbability r;
  if (est.value <= 0.0) {
    r.log_p = std::log(3.0 / (trials_per_sample * static_cast<double>(fractions.size())));
    r.upper_bound = true;
    return r;
  }
  r.log_p = std::log(est.value);
  r.err = est.err / est.value;
  return r;
}

QMoment q_moment_estimate(const std::vector<double>& log_products, std::size_t total_blocks, std::size_t groups) {
  QMoment q;
  if (total_blocks == 0) return q;
  if (log_products.size() < groups) throw UsageError("not enough samples for the jackknife");
  q.defined = true;
  const std::size_t len = log_products.size() / groups;
  const std::size_t used = len * groups;
  const double scale = 1.0 / static_cast<double>(total_blocks);
  const auto est = jackknife(groups, [&](std::size_t leave) {
    std::vector<double> y;
    y.reserve(used);
    for (std::size_t s = 0; s < used; ++s)
      if (leave >= groups || s / len != leave) y.push_back(log_products[s]);
    return log_mean_exp(y) * scale;
  });
  q.exponent = est.value;
  q.err = est.err;
  const double mx = *std::max_element(log_products.begin(), log_products.end());
  double s = 0.0;
  double s2 = 0.0;
  for (double v : log_products) {
    const double w = std::exp(v - mx);
    s += w;
    s2 += w * w;
  }
  q.heavy_tail = s * s / s2 < 100.0;
  return q;
}

double chi_m(double x, double m) noexcept {
  const double t = std::clamp((x + m) / (2.0 * m), 0.0, 1.0);
  const double s = t * t * t * (t * (6.0 * t - 15.0) + 10.0);
  return -1.0 + 2.0 * s;
}

double chi_m_derivative(double x, double m) noexcept {
  const double t = (x + m) / (2.0 * m);
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t) / m;
}

namespace {

bool fit_decay(const std::vector<double>& acov, std::size_t lo, std::size_t hi, double dt, double& lambda) {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma;
  for (std::size_t t = lo; t <= hi; ++t) {
    if (!(acov[t] > 0.0)) return false;
    x.push_back(static_cast<double>(t) * dt);
    y.push_back(std::log(acov[t]));
    // the noise in c(t) is roughly lag-independent, so log c(t) has error ~ 1/c(t)
    sigma.push_back(acov[0] / acov[t]);
  }
  lambda = -fit_line(x, y, sigma).slope;
  return true;
}

}  // namespace

GapEstimate spectral_gap_estimate(const std::vector<double>& m_series, double dt, double chi_scale,
                                  std::size_t batches, std::uint64_t seed) {
  GapEstimate g;
  if (m_series.size() < 100) {
    g.inconclusive = true;
    g.reason = "series too short";
    return g;
  }
  std::vector<double> y(m_series.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = chi_m(m_series[i], chi_scale);
  const std::size_t max_lag = y.size() / 4;
  std::vector<double> acov;
  try {
    acov = autocovariance(y, max_lag);
    g.tau_int = integrated_autocorrelation_time(acov);
  } catch (const NumericError&) {
    g.inconclusive = true;
    g.reason = "no variance in chi_m(m_N)";
    return g;
  }
  if (static_cast<double>(y.size()) < 50.0 * g.tau_int) {
    g.inconclusive = true;
    g.reason = "series shorter than 50 autocorrelation times";
    return g;
  }
  const auto lo = static_cast<std::size_t>(std::max(1.0, std::round(g.tau_int)));
  const auto hi = std::min(max_lag, std::max(lo + 2, static_cast<std::size_t>(std::round(5.0 * g.tau_int))));
  if (!fit_decay(acov, lo, hi, dt, g.lambda)) {
    g.inconclusive = true;
    g.reason = "autocovariance not positive over the fit window";
    return g;
  }

  const std::size_t len = y.size() / batches;
  if (len <= hi + 1) {
    g.err = std::numeric_limits<double>::infinity();
    return g;
  }
  const double mu = mean(y);
  std::vector<std::vector<double>> per(batches, std::vector<double>(hi + 1, 0.0));
  for (std::size_t b = 0; b < batches; ++b)
    for (std::size_t t = 0; t <= hi; ++t) {
      double s = 0.0;
      for (std::size_t i = b * len; i + t < (b + 1) * len; ++i) s += (y[i] - mu) * (y[i + t] - mu);
      per[b][t] = s / static_cast<double>(len - t);
    }
  Rng rng = make_rng(seed, 0);
  std::uniform_int_distribution<std::size_t> pick(0, batches - 1);
  std::vector<double> lams;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> c(hi + 1, 0.0);
    for (std::size_t k = 0; k < batches; ++k) {
      const auto& src = per[pick(rng)];
      for (std::size_t t = 0; t <= hi; ++t) c[t] += src[t];
    }
    double lam = 0.0;
    if (fit_decay(c, lo, hi, dt, lam)) lams.push_back(lam);
  }
  if (lams.size() < 100) {
    g.inconclusive = true;
    g.reason = "bootstrap fits failed";
    return g;
  }
  const auto e = mean_estimate(lams);
  g.err = e.err * std::sqrt(static_cast<double>(lams.size()));
  return g;
}

double poincare_quotient(const WhamResult& w, double chi_scale) {
  std::vector<double> num;
  std::vector<double> den;
  for (std::size_t n = 0; n < w.m.size(); ++n) {
    const double d = chi_m_derivative(w.m[n], chi_scale);
    const double c = chi_m(w.m[n], chi_scale);
    if (d > 0.0) num.push_back(w.log_weight[n] + 2.0 * std::log(d));
    if (c != 0.0) den.push_back(w.log_weight[n] + 2.0 * std::log(std::abs(c)));
  }
  return std::exp(log_sum_exp(num) - log_sum_exp(den)) / w.volume;
}

double poincare_quotient(const std::vector<double>& m_samples, double volume, double chi_scale) {
  KahanSum num;
  KahanSum c1;
  KahanSum c2;
  for (double m : m_samples) {
    const double d = chi_m_derivative(m, chi_scale);
    const double c = chi_m(m, chi_scale);
    num.add(d * d);
    c1.add(c);
    c2.add(c * c);
  }
  const double n = static_cast<double>(m_samples.size());
  const double var = c2.value() / n - std::pow(c1.value() / n, 2);
  return num.value() / n / (volume * var);
}

std::string hist_csv(const std::vector<double>& edges, const std::vector<double>& counts) {
  if (edges.size() != counts.size() + 1) throw UsageError("histogram edges/counts mismatch");
  std::ostringstream os;
  os.precision(17);
  os << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < counts.size(); ++i) os << edges[i] << ',' << edges[i + 1] << ',' << counts[i] << '\n';
  return os.str();
}

std::string rate_vs_n_csv(const RateReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "N,rate,stderr,upper_bound\n";
  for (const auto& row : r.rows) os << row.N << ',' << row.rate << ',' << row.err << ',' << (row.upper_bound ? 1 : 0) << '\n';
  return os.str();
}

std::string slope_vs_beta_csv(const std::vector<SlopeRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "beta,slope,stderr\n";
  for (const auto& r : rows) os << r.beta << ',' << r.slope << ',' << r.err << '\n';
  return os.str();
}

std::string gap_vs_n_csv(const std::vector<GapRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "N,gap,stderr,method\n";
  for (const auto& r : rows) os << r.N << ',' << r.gap << ',' << r.err << ',' << r.method << '\n';
  return os.str();
}

}  // namespace phi4
