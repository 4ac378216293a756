#include "phi4/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phi4/error.hpp"
#include "phi4/torus.hpp"

namespace phi4 {

double mean(std::span<const double> x) {
  if (x.empty()) throw UsageError("mean of an empty sample");
  KahanSum s;
  for (double v : x) s.add(v);
  return s.value() / static_cast<double>(x.size());
}

Estimate mean_estimate(std::span<const double> x) {
  const double m = mean(x);
  if (x.size() < 2) return {m, std::numeric_limits<double>::infinity()};
  KahanSum s;
  for (double v : x) s.add((v - m) * (v - m));
  const double var = s.value() / static_cast<double>(x.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(x.size()))};
}

std::vector<double> batch_averages(std::span<const double> x, std::size_t batches) {
  if (batches == 0 || x.size() < batches) throw UsageError("not enough samples for the requested batches");
  const std::size_t len = x.size() / batches;
  std::vector<double> out(batches);
  for (std::size_t b = 0; b < batches; ++b) out[b] = mean(x.subspan(b * len, len));
  return out;
}

Estimate batch_mean(std::span<const double> x, std::size_t batches) {
  const auto b = batch_averages(x, batches);
  return mean_estimate(b);
}

Estimate jackknife(std::size_t groups, const std::function<double(std::size_t)>& estimator) {
  if (groups < 2) throw UsageError("jackknife needs at least two groups");
  const double full = estimator(groups);
  std::vector<double> loo(groups);
  for (std::size_t g = 0; g < groups; ++g) loo[g] = estimator(g);
  const double m = mean(loo);
  double s = 0.0;
  for (double v : loo) s += (v - m) * (v - m);
  const double n = static_cast<double>(groups);
  return {full, std::sqrt((n - 1.0) / n * s)};
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double mx = *std::max_element(x.begin(), x.end());
  if (std::isinf(mx)) return mx;
  KahanSum s;
  for (double v : x) s.add(std::exp(v - mx));
  return mx + std::log(s.value());
}

double log_mean_exp(std::span<const double> x) {
  if (x.empty()) throw UsageError("log-mean-exp of an empty sample");
  return log_sum_exp(x) - std::log(static_cast<double>(x.size()));
}

LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> sigma) {
  const std::size_t n = x.size();
  if (n != y.size() || (!sigma.empty() && sigma.size() != n)) throw UsageError("fit_line: length mismatch");
  if (n < 2) throw UsageError("fit_line needs at least two points");
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (!(det > 0.0)) throw NumericError("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = (sw * sxy - sx * sy) / det;
  f.intercept = (sxx * sy - sx * sxy) / det;
  double scale = 1.0;
  if (sigma.empty()) {
    if (n > 2) {
      double rss = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        rss += r * r;
      }
      scale = rss / static_cast<double>(n - 2);
    } else {
      scale = 0.0;
    }
  }
  f.slope_err = std::sqrt(scale * sw / det);
  f.intercept_err = std::sqrt(scale * sxx / det);
  return f;
}

std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (n < 2) throw UsageError("autocovariance needs at least two samples");
  max_lag = std::min(max_lag, n - 1);
  const double m = mean(x);
  std::size_t p = 1;
  while (p < 2 * n) p <<= 1;
  std::vector<Complex> buf(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) buf[i] = x[i] - m;
  dft_inplace(buf, 1, static_cast<int>(p), -1);
  for (auto& c : buf) c = std::norm(c);
  dft_inplace(buf, 1, static_cast<int>(p), +1);
  std::vector<double> out(max_lag + 1);
  for (std::size_t t = 0; t <= max_lag; ++t) out[t] = buf[t].real() / static_cast<double>(p) / static_cast<double>(n);
  return out;
}

double integrated_autocorrelation_time(std::span<const double> acov) {
  if (acov.empty() || !(acov[0] > 0.0)) throw NumericError("autocovariance has no variance");
  double tau = 0.5;
  for (std::size_t t = 1; t < acov.size(); ++t) {
    tau += acov[t] / acov[0];
    if (static_cast<double>(t) >= 6.0 * tau) break;
  }
  return std::max(tau, 0.5);
}

}  // namespace phi4
