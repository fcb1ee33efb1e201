#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tbrw/walker.hpp"

namespace tbrw {

/// z for a two-sided 99% normal interval.
inline constexpr double kZ99 = 2.5758293035489004;

double mean_of(const std::vector<double>& xs);
double sample_stddev(const std::vector<double>& xs);
/// Median of a copy; for even sizes the midpoint of the central pair.
double median_of(std::vector<double> xs);
double median_of_u64(std::vector<std::uint64_t> xs);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Normal-approximation interval for a mean over replicas.
Interval mean_ci(const std::vector<double>& xs, double z = kZ99);

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                         double z = kZ99);

/// One-sided Dvoretzky-Kiefer-Wolfowitz band half-width at level delta.
double dkw_epsilon(std::size_t n, double delta);

/// Kaplan-Meier product-limit survival over right-censored values.
/// Step function: survival(t) for t in [time[i], time[i+1]).
struct SurvivalCurve {
  std::vector<std::uint64_t> times;     // distinct uncensored event times
  std::vector<double> survival;         // value just after each event time
  std::size_t n_total = 0;
  std::size_t n_censored = 0;

  double at(std::uint64_t t) const;     // 1.0 before the first event
};

SurvivalCurve kaplan_meier(const std::vector<CensoredValue>& values);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  std::size_t n = 0;
};

LinearFit least_squares(const std::vector<double>& x,
                        const std::vector<double>& y);

/// Tail exponent from a log-log least-squares fit of the Kaplan-Meier
/// survival above a threshold. The threshold keeps the top decade of
/// uncensored values (at least min_points of them); fitting needs at least
/// min_points uncensored exceedances, otherwise no fit is returned.
struct TailFit {
  double exponent = 0.0;  // slope of log S(t) vs log t (negative for decay)
  double stderr_ = 0.0;
  std::uint64_t threshold = 0;
  std::size_t points = 0;
};

std::optional<TailFit> fit_tail(const std::vector<CensoredValue>& values,
                                std::size_t min_points = 30);

}  // namespace tbrw
