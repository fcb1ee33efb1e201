#include "tbrw/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tbrw {

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t mid = xs.size() / 2;
  if (xs.size() % 2 == 1) return xs[mid];
  return 0.5 * (xs[mid - 1] + xs[mid]);
}

double median_of_u64(std::vector<std::uint64_t> xs) {
  std::vector<double> d(xs.begin(), xs.end());
  return median_of(std::move(d));
}

Interval mean_ci(const std::vector<double>& xs, double z) {
  const double m = mean_of(xs);
  if (xs.size() < 2) return {m, m};
  const double se = sample_stddev(xs) / std::sqrt(static_cast<double>(xs.size()));
  return {m - z * se, m + z * se};
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                         double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double dkw_epsilon(std::size_t n, double delta) {
  if (n == 0) return 1.0;
  return std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
}

double SurvivalCurve::at(std::uint64_t t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 1.0;
  return survival[static_cast<std::size_t>(it - times.begin()) - 1];
}

SurvivalCurve kaplan_meier(const std::vector<CensoredValue>& values) {
  SurvivalCurve curve;
  curve.n_total = values.size();
  std::vector<CensoredValue> sorted = values;
  std::sort(sorted.begin(), sorted.end(),
            [](const CensoredValue& a, const CensoredValue& b) {
              if (a.value != b.value) return a.value < b.value;
              return a.censored < b.censored;  // events before censorings
            });
  double s = 1.0;
  std::size_t at_risk = sorted.size();
  std::size_t i = 0;
  while (i < sorted.size()) {
    const std::uint64_t t = sorted[i].value;
    std::size_t events = 0, censored = 0;
    while (i < sorted.size() && sorted[i].value == t) {
      if (sorted[i].censored)
        ++censored;
      else
        ++events;
      ++i;
    }
    if (events > 0) {
      s *= 1.0 - static_cast<double>(events) / static_cast<double>(at_risk);
      curve.times.push_back(t);
      curve.survival.push_back(s);
    }
    at_risk -= events + censored;
    curve.n_censored += censored;
  }
  return curve;
}

LinearFit least_squares(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("least_squares: need >= 2 paired points");
  const auto n = static_cast<double>(x.size());
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.n = x.size();
  if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate x");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += e * e;
  }
  fit.r2 = syy == 0.0 ? 1.0 : 1.0 - rss / syy;
  if (x.size() > 2)
    fit.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);
  return fit;
}

std::optional<TailFit> fit_tail(const std::vector<CensoredValue>& values,
                                std::size_t min_points) {
  const SurvivalCurve km = kaplan_meier(values);
  if (km.times.empty()) return std::nullopt;

  // Fit window: from the top decade of probability mass (S <= 0.1, lowered
  // if fewer than min_points uncensored observations lie above) down to the
  // 25-survivor level, where log S(t) is still tame. The curve is evaluated
  // on a log-spaced grid so extreme order statistics do not dominate the
  // regression.
  const double n = static_cast<double>(km.n_total);
  std::uint64_t t_lo = 0, t_hi = 0;
  std::size_t above_lo = 0;
  for (std::size_t i = 0; i < km.times.size(); ++i) {
    if (t_lo == 0 && km.survival[i] <= 0.1) t_lo = km.times[i];
    if (km.survival[i] * n >= 25.0) t_hi = km.times[i];
  }
  if (t_lo == 0) return std::nullopt;
  std::size_t uncensored_total = 0;
  for (const auto& v : values) {
    if (v.censored) continue;
    ++uncensored_total;
    if (v.value > t_lo) ++above_lo;
  }
  if (uncensored_total < min_points) return std::nullopt;
  if (above_lo < min_points) {
    // Lower the threshold until min_points uncensored exceedances remain.
    std::vector<std::uint64_t> unc;
    for (const auto& v : values)
      if (!v.censored) unc.push_back(v.value);
    std::sort(unc.begin(), unc.end());
    t_lo = unc[unc.size() - min_points] > 0 ? unc[unc.size() - min_points] - 1
                                            : 0;
  }
  if (t_hi <= t_lo + 1 || t_lo == 0) return std::nullopt;

  const double log_lo = std::log(static_cast<double>(t_lo));
  const double log_hi = std::log(static_cast<double>(t_hi));
  const std::size_t grid = 30;
  std::vector<double> lx, ly;
  double last_t = -1.0;
  for (std::size_t g = 0; g < grid; ++g) {
    const double lt =
        log_lo + (log_hi - log_lo) * static_cast<double>(g) /
                     static_cast<double>(grid - 1);
    const double t = std::floor(std::exp(lt));
    if (t <= last_t) continue;
    last_t = t;
    const double s = km.at(static_cast<std::uint64_t>(t));
    if (s <= 0.0) continue;
    lx.push_back(std::log(t));
    ly.push_back(std::log(s));
  }
  if (lx.size() < 5) return std::nullopt;
  const LinearFit fit = least_squares(lx, ly);
  return TailFit{fit.slope, fit.slope_stderr, t_lo, lx.size()};
}

}  // namespace tbrw
