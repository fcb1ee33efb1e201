#include "tbrw/env.hpp"

#include <cmath>
#include <stdexcept>

namespace tbrw {

namespace {

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t sum = a + b;
  return sum < a ? kXiCap : (sum > kXiCap ? kXiCap : sum);
}

std::uint64_t saturate_double(double x) {
  if (!(x >= 0.0)) return 0;
  if (x >= static_cast<double>(kXiCap)) return kXiCap;
  return static_cast<std::uint64_t>(x);
}

/// base^e for integer e, saturating at kXiCap.
std::uint64_t ipow_sat(std::uint64_t base, std::uint64_t e) {
  std::uint64_t result = 1;
  while (e > 0) {
    if (e & 1) {
      if (base != 0 && result > kXiCap / base) return kXiCap;
      result *= base;
    }
    e >>= 1;
    if (e > 0) {
      // e still has a set bit, so an overflowing square saturates the result.
      if (base > 1 && base > kXiCap / base) return kXiCap;
      base *= base;
    }
  }
  return result;
}

std::uint64_t sample_geometric(double mean, Rng& g) {
  if (mean <= 0.0) return 0;
  const double q = mean / (1.0 + mean);
  const double u = g.u01_open();
  return saturate_double(std::floor(std::log(u) / std::log(q)));
}

std::uint64_t sample_poisson(double lambda, Rng& g) {
  // Knuth's product method; adequate for desk-scale lambda.
  const double limit = std::exp(-lambda);
  std::uint64_t k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= g.u01_open();
  } while (p > limit);
  return k - 1;
}

std::uint64_t sample_power_law(double alpha, double delta, Rng& g) {
  const double u = g.u01_open();
  if (u >= std::min(1.0, delta)) return 0;  // survival at x=1 is min(1,delta)
  // Largest integer x with delta / x^alpha > u.
  const double x = std::pow(delta / u, 1.0 / alpha);
  if (x >= static_cast<double>(kXiCap)) return kXiCap;
  return static_cast<std::uint64_t>(std::ceil(x)) - 1;
}

std::uint64_t sample_table(const std::vector<double>& pmf, Rng& g) {
  double u = g.u01();
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    if (u < pmf[k]) return k;
    u -= pmf[k];
  }
  return pmf.empty() ? 0 : pmf.size() - 1;
}

double schedule_p(const BernoulliScheduleEnv& e, std::uint64_t index) {
  const double base = static_cast<double>(index == 0 ? 1 : index);
  return std::min(1.0, e.scale * std::pow(base, -e.power));
}

double table_moment(const std::vector<double>& pmf, double r) {
  double m = 0.0;
  for (std::size_t k = 1; k < pmf.size(); ++k)
    m += pmf[k] * std::pow(static_cast<double>(k), r);
  return m;
}

/// E[xi^r] for the families with convergent series, by direct summation.
double series_moment_geometric(double mean, double r) {
  if (mean <= 0.0) return 0.0;
  const double q = mean / (1.0 + mean);
  double m = 0.0, w = 1.0 / (1.0 + mean);
  for (std::uint64_t k = 1; k <= 1u << 20; ++k) {
    w *= q;
    const double term = w * std::pow(static_cast<double>(k), r);
    m += term;
    if (term < 1e-16 * (m + 1e-300) && k > 16) break;
  }
  return m;
}

double series_moment_poisson(double lambda, double r) {
  double m = 0.0, w = std::exp(-lambda);
  for (std::uint64_t k = 1; k <= 1u << 20; ++k) {
    w *= lambda / static_cast<double>(k);
    const double term = w * std::pow(static_cast<double>(k), r);
    m += term;
    if (term < 1e-16 * (m + 1e-300) && k > 2 * lambda + 16) break;
  }
  return m;
}

/// E[xi^r] = sum_{x>=1} (x^r - (x-1)^r) * min(1, delta/x^alpha); converges
/// for r < alpha. Partial sum plus an integral estimate of the tail.
double power_law_moment(double alpha, double delta, double r) {
  double m = 0.0;
  const std::uint64_t cutoff = 1u << 22;
  double prev = 0.0;
  for (std::uint64_t x = 1; x <= cutoff; ++x) {
    const double xr = std::pow(static_cast<double>(x), r);
    m += (xr - prev) * std::min(1.0, delta * std::pow(static_cast<double>(x),
                                                      -alpha));
    prev = xr;
  }
  // Tail: integral of r*delta*x^{r-1-alpha} from cutoff.
  m += r * delta * std::pow(static_cast<double>(cutoff), r - alpha) /
       (alpha - r);
  return m;
}

ConditionFinding holds(double constant, std::string witness = {}) {
  return {Verdict::Holds, constant, std::move(witness)};
}
ConditionFinding fails(std::string witness = {}) {
  return {Verdict::Fails, std::nullopt, std::move(witness)};
}
ConditionFinding unknown() { return {Verdict::Unknown, std::nullopt, {}}; }

}  // namespace

void EnvironmentSpec::validate() const {
  std::visit(
      [](const auto& fam) {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, ConstantEnv>) {
          if (fam.value > kXiCap)
            throw std::invalid_argument("constant: value exceeds cap");
        } else if constexpr (std::is_same_v<T, BernoulliEnv>) {
          if (!(fam.p >= 0.0 && fam.p <= 1.0))
            throw std::invalid_argument("bernoulli: p must be in [0,1]");
        } else if constexpr (std::is_same_v<T, GeometricEnv>) {
          if (!(fam.mean > 0.0) || !std::isfinite(fam.mean))
            throw std::invalid_argument("geometric: mean must be positive");
        } else if constexpr (std::is_same_v<T, PoissonEnv>) {
          if (!(fam.lambda > 0.0) || !std::isfinite(fam.lambda))
            throw std::invalid_argument("poisson: lambda must be positive");
        } else if constexpr (std::is_same_v<T, PowerLawTailEnv>) {
          if (!(fam.alpha > 0.0 && fam.alpha < 1.0))
            throw std::invalid_argument(
                "power_law_tail: alpha must be in (0,1)");
          if (!(fam.delta > 0.0) || !std::isfinite(fam.delta))
            throw std::invalid_argument(
                "power_law_tail: delta must be positive");
        } else if constexpr (std::is_same_v<T, PolynomialEnv>) {
          if (!(fam.exponent > 0.0) || !std::isfinite(fam.exponent))
            throw std::invalid_argument("polynomial: exponent must be positive");
          if (fam.stride == 0)
            throw std::invalid_argument("polynomial: stride must be >= 1");
        } else if constexpr (std::is_same_v<T, TableEnv>) {
          if (fam.pmf.empty())
            throw std::invalid_argument("table: pmf must be non-empty");
          double total = 0.0;
          for (double p : fam.pmf) {
            if (!(p >= 0.0)) throw std::invalid_argument("table: negative mass");
            total += p;
          }
          if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument("table: pmf must sum to 1");
        } else if constexpr (std::is_same_v<T, BernoulliScheduleEnv>) {
          if (!(fam.scale > 0.0) || !std::isfinite(fam.scale))
            throw std::invalid_argument(
                "bernoulli_schedule: scale must be positive");
          if (!(fam.power > 0.0) || !std::isfinite(fam.power))
            throw std::invalid_argument(
                "bernoulli_schedule: power must be positive");
        }
      },
      family);
}

std::string EnvironmentSpec::family_name() const {
  return std::visit(
      [](const auto& fam) -> std::string {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, ConstantEnv>) return "constant";
        if constexpr (std::is_same_v<T, BernoulliEnv>) return "bernoulli";
        if constexpr (std::is_same_v<T, GeometricEnv>) return "geometric";
        if constexpr (std::is_same_v<T, PoissonEnv>) return "poisson";
        if constexpr (std::is_same_v<T, PowerLawTailEnv>)
          return "power_law_tail";
        if constexpr (std::is_same_v<T, PolynomialEnv>) return "polynomial";
        if constexpr (std::is_same_v<T, TableEnv>) return "table";
        if constexpr (std::is_same_v<T, BernoulliScheduleEnv>)
          return "bernoulli_schedule";
      },
      family);
}

std::optional<double> EnvironmentSpec::mean() const {
  return std::visit(
      [](const auto& fam) -> std::optional<double> {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, ConstantEnv>)
          return static_cast<double>(fam.value);
        else if constexpr (std::is_same_v<T, BernoulliEnv>)
          return fam.p;
        else if constexpr (std::is_same_v<T, GeometricEnv>)
          return fam.mean;
        else if constexpr (std::is_same_v<T, PoissonEnv>)
          return fam.lambda;
        else if constexpr (std::is_same_v<T, TableEnv>)
          return table_moment(fam.pmf, 1.0);
        else
          return std::nullopt;  // infinite or index-dependent
      },
      family);
}

std::optional<double> EnvironmentSpec::stddev() const {
  return std::visit(
      [](const auto& fam) -> std::optional<double> {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, ConstantEnv>)
          return 0.0;
        else if constexpr (std::is_same_v<T, BernoulliEnv>)
          return std::sqrt(fam.p * (1.0 - fam.p));
        else if constexpr (std::is_same_v<T, GeometricEnv>)
          return std::sqrt(fam.mean * (1.0 + fam.mean));
        else if constexpr (std::is_same_v<T, PoissonEnv>)
          return std::sqrt(fam.lambda);
        else if constexpr (std::is_same_v<T, TableEnv>) {
          const double m1 = table_moment(fam.pmf, 1.0);
          const double m2 = table_moment(fam.pmf, 2.0);
          return std::sqrt(std::max(0.0, m2 - m1 * m1));
        } else
          return std::nullopt;
      },
      family);
}

std::uint64_t sample_xi(const EnvironmentSpec& spec, std::uint64_t index,
                        const RandomStream& stream) {
  spec.validate();
  Rng g = stream.at(index);
  return std::visit(
      [&](const auto& fam) -> std::uint64_t {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, ConstantEnv>)
          return fam.value;
        else if constexpr (std::is_same_v<T, BernoulliEnv>)
          return g.bernoulli(fam.p) ? 1 : 0;
        else if constexpr (std::is_same_v<T, GeometricEnv>)
          return sample_geometric(fam.mean, g);
        else if constexpr (std::is_same_v<T, PoissonEnv>)
          return sample_poisson(fam.lambda, g);
        else if constexpr (std::is_same_v<T, PowerLawTailEnv>)
          return sample_power_law(fam.alpha, fam.delta, g);
        else if constexpr (std::is_same_v<T, PolynomialEnv>) {
          const std::uint64_t epoch = index / fam.stride;
          if (fam.exponent == std::floor(fam.exponent) && fam.exponent < 64.0)
            return ipow_sat(epoch,
                            static_cast<std::uint64_t>(fam.exponent));
          return saturate_double(
              std::floor(std::pow(static_cast<double>(epoch), fam.exponent)));
        } else if constexpr (std::is_same_v<T, TableEnv>)
          return sample_table(fam.pmf, g);
        else if constexpr (std::is_same_v<T, BernoulliScheduleEnv>)
          return g.bernoulli(schedule_p(fam, index)) ? 1 : 0;
      },
      spec.family);
}

std::vector<std::uint64_t> partial_sums(const EnvironmentSpec& spec,
                                        std::uint64_t count,
                                        const RandomStream& stream) {
  std::vector<std::uint64_t> sums;
  sums.reserve(count);
  std::uint64_t acc = 0;
  for (std::uint64_t n = 1; n <= count; ++n) {
    acc = sat_add(acc, sample_xi(spec, n, stream));
    sums.push_back(acc);
  }
  return sums;
}

ConditionFinding moment_condition(const EnvironmentSpec& spec, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("moment order must be positive");
  return std::visit(
      [&](const auto& fam) -> ConditionFinding {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, ConstantEnv>)
          return holds(std::pow(static_cast<double>(fam.value), r));
        else if constexpr (std::is_same_v<T, BernoulliEnv>)
          return holds(fam.p);
        else if constexpr (std::is_same_v<T, GeometricEnv>)
          return holds(series_moment_geometric(fam.mean, r));
        else if constexpr (std::is_same_v<T, PoissonEnv>)
          return holds(series_moment_poisson(fam.lambda, r));
        else if constexpr (std::is_same_v<T, PowerLawTailEnv>) {
          if (r < fam.alpha)
            return holds(power_law_moment(fam.alpha, fam.delta, r));
          return fails("E[xi^r] = infinity for r >= alpha");
        } else if constexpr (std::is_same_v<T, PolynomialEnv>)
          return fails("E[xi_n^r] is unbounded in n");
        else if constexpr (std::is_same_v<T, TableEnv>)
          return unknown();
        else if constexpr (std::is_same_v<T, BernoulliScheduleEnv>)
          return holds(1.0, "E[xi_n^r] = p_n <= 1");
      },
      spec.family);
}

ConditionReport classify_conditions(const EnvironmentSpec& spec) {
  spec.validate();
  ConditionReport rep;
  rep.moment1 = moment_condition(spec, 1.0);
  rep.moment2 = moment_condition(spec, 2.0);
  std::visit(
      [&](const auto& fam) {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, ConstantEnv>) {
          if (fam.value >= 1) {
            rep.ue = holds(1.0);
            rep.cond_s = holds(static_cast<double>(fam.value), "g(n) = n");
          } else {
            rep.ue = fails("xi_n = 0 deterministically");
            rep.cond_s = holds(1.0, "g(n) = n (partial sums are zero)");
          }
          rep.cond_i = fails("S_n = O(n); no function of summable inverse fits below");
        } else if constexpr (std::is_same_v<T, BernoulliEnv>) {
          if (fam.p > 0.0)
            rep.ue = holds(fam.p);
          else
            rep.ue = fails("P(xi >= 1) = 0");
          rep.cond_s = holds(fam.p > 0.0 ? fam.p : 1.0, "g(n) = n (strong law)");
          rep.cond_i = fails("S_n = O(n); no function of summable inverse fits below");
        } else if constexpr (std::is_same_v<T, GeometricEnv>) {
          rep.ue = holds(fam.mean / (1.0 + fam.mean));
          rep.cond_s = holds(fam.mean, "g(n) = n (strong law)");
          rep.cond_i = fails("S_n = O(n); no function of summable inverse fits below");
        } else if constexpr (std::is_same_v<T, PoissonEnv>) {
          rep.ue = holds(1.0 - std::exp(-fam.lambda));
          rep.cond_s = holds(fam.lambda, "g(n) = n (strong law)");
          rep.cond_i = fails("S_n = O(n); no function of summable inverse fits below");
        } else if constexpr (std::is_same_v<T, PowerLawTailEnv>) {
          rep.ue = holds(std::min(1.0, fam.delta));
          rep.cond_s = fails("S_n grows like n^{1/alpha} >> any non-summable-inverse g");
          const double beta = (fam.alpha + 1.0) / 2.0;
          rep.cond_i = holds(
              1.0, "f(i) = i^{1/beta}, beta = " + std::to_string(beta));
        } else if constexpr (std::is_same_v<T, PolynomialEnv>) {
          rep.ue = fails("xi at epoch 0 is deterministically 0");
          rep.cond_s = fails("S_n grows like n^{1+a}");
          rep.cond_i = holds(
              1.0, "f(n) = n^{1 + a/2}, a = " + std::to_string(fam.exponent));
        } else if constexpr (std::is_same_v<T, TableEnv>) {
          rep.ue = unknown();
          rep.moment1 = unknown();
          rep.moment2 = unknown();
          rep.cond_s = unknown();
          rep.cond_i = unknown();
        } else if constexpr (std::is_same_v<T, BernoulliScheduleEnv>) {
          rep.ue = fails("P(xi_n >= 1) -> 0");
          rep.cond_s = holds(1.0, "g(n) = n (S_n/n -> 0)");
          rep.cond_i = fails("S_n = o(n); no function of summable inverse fits below");
        }
      },
      spec.family);
  return rep;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Holds:
      return "holds";
    case Verdict::Fails:
      return "fails";
    default:
      return "unknown";
  }
}

void to_json(nlohmann::json& j, const EnvironmentSpec& spec) {
  j = nlohmann::json{{"family", spec.family_name()}};
  std::visit(
      [&](const auto& fam) {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, ConstantEnv>)
          j["c"] = fam.value;
        else if constexpr (std::is_same_v<T, BernoulliEnv>)
          j["p"] = fam.p;
        else if constexpr (std::is_same_v<T, GeometricEnv>)
          j["mean"] = fam.mean;
        else if constexpr (std::is_same_v<T, PoissonEnv>)
          j["lambda"] = fam.lambda;
        else if constexpr (std::is_same_v<T, PowerLawTailEnv>) {
          j["alpha"] = fam.alpha;
          j["delta"] = fam.delta;
        } else if constexpr (std::is_same_v<T, PolynomialEnv>) {
          j["a"] = fam.exponent;
          j["stride"] = fam.stride;
        } else if constexpr (std::is_same_v<T, TableEnv>)
          j["pmf"] = fam.pmf;
        else if constexpr (std::is_same_v<T, BernoulliScheduleEnv>) {
          j["scale"] = fam.scale;
          j["power"] = fam.power;
        }
      },
      spec.family);
}

void from_json(const nlohmann::json& j, EnvironmentSpec& spec) {
  const std::string name = j.at("family").get<std::string>();
  if (name == "constant")
    spec.family = ConstantEnv{j.at("c").get<std::uint64_t>()};
  else if (name == "bernoulli")
    spec.family = BernoulliEnv{j.at("p").get<double>()};
  else if (name == "geometric")
    spec.family = GeometricEnv{j.at("mean").get<double>()};
  else if (name == "poisson")
    spec.family = PoissonEnv{j.at("lambda").get<double>()};
  else if (name == "power_law_tail")
    spec.family = PowerLawTailEnv{j.at("alpha").get<double>(),
                                  j.at("delta").get<double>()};
  else if (name == "polynomial")
    spec.family = PolynomialEnv{j.at("a").get<double>(),
                                j.value("stride", std::uint64_t{1})};
  else if (name == "table")
    spec.family = TableEnv{j.at("pmf").get<std::vector<double>>()};
  else if (name == "bernoulli_schedule")
    spec.family = BernoulliScheduleEnv{j.value("scale", 1.0),
                                       j.value("power", 2.0)};
  else
    throw std::invalid_argument("unknown environment family: " + name);
  spec.validate();
}

void to_json(nlohmann::json& j, const ConditionFinding& f) {
  j = nlohmann::json{{"verdict", verdict_name(f.verdict)}};
  if (f.constant) j["constant"] = *f.constant;
  if (!f.witness.empty()) j["witness"] = f.witness;
}

void to_json(nlohmann::json& j, const ConditionReport& r) {
  j = nlohmann::json{{"ue", r.ue},
                     {"moment_1", r.moment1},
                     {"moment_2", r.moment2},
                     {"s", r.cond_s},
                     {"i", r.cond_i}};
}

}  // namespace tbrw
