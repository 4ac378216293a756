#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace phi4 {

struct Estimate {
  double value = 0.0;
  double err = 0.0;
};

class KahanSum {
 public:
  void add(double x) noexcept {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const noexcept { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

double mean(std::span<const double> x);
/// Mean with the iid standard error.
Estimate mean_estimate(std::span<const double> x);
/// Contiguous batch averages; trailing samples beyond batches*floor(n/batches) are dropped.
std::vector<double> batch_averages(std::span<const double> x, std::size_t batches);
Estimate batch_mean(std::span<const double> x, std::size_t batches = 20);

/// Delete-one-group jackknife. `estimator(g)` evaluates the statistic with group g
/// removed; `estimator(groups)` (an out-of-range index) must return the full estimate.
Estimate jackknife(std::size_t groups, const std::function<double(std::size_t)>& estimator);

/// log(mean(exp(x))) computed stably.
double log_mean_exp(std::span<const double> x);
double log_sum_exp(std::span<const double> x);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_err = 0.0;
  double intercept_err = 0.0;
};

/// Least squares y = a + b x. With sigma given, weights 1/sigma^2 and parameter
/// errors from the covariance; otherwise errors from the residual scatter.
LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> sigma = {});

/// Autocovariance c(0..max_lag) of a series about its mean, via zero-padded FFT.
std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag);
/// tau_int = 1/2 + sum_{t>=1} rho(t) with Sokal's self-consistent window (c = 6).
double integrated_autocorrelation_time(std::span<const double> acov);

}  // namespace phi4
