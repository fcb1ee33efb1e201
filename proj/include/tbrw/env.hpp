#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tbrw/rng.hpp"
#include "json.hpp"

namespace tbrw {

/// Draws saturate here instead of overflowing. The heavy-tailed families can
/// in principle produce astronomically large values; at desk scale the cap is
/// hit with probability < 1e-9 per draw and leaves statistics unaffected.
inline constexpr std::uint64_t kXiCap = (std::uint64_t{1} << 62) - 1;

struct ConstantEnv {
  std::uint64_t value = 1;
  bool operator==(const ConstantEnv&) const = default;
};

struct BernoulliEnv {
  double p = 0.5;
  bool operator==(const BernoulliEnv&) const = default;
};

/// Geometric on {0,1,2,...} parameterized by its mean:
/// P(xi = j) = (1/(1+mean)) * (mean/(1+mean))^j.
struct GeometricEnv {
  double mean = 1.0;
  bool operator==(const GeometricEnv&) const = default;
};

struct PoissonEnv {
  double lambda = 1.0;
  bool operator==(const PoissonEnv&) const = default;
};

/// Discrete Pareto-type law, the minimal law with survival
/// P(xi >= x) = min(1, delta / x^alpha) for integer x >= 1.
struct PowerLawTailEnv {
  double alpha = 0.5;
  double delta = 1.0;
  bool operator==(const PowerLawTailEnv&) const = default;
};

/// Deterministic schedule xi_{stride*j} = floor(j^exponent). The stride is
/// the growth period of the process the environment feeds; indices that are
/// not multiples of the stride fall in the same epoch (integer division).
struct PolynomialEnv {
  double exponent = 1.0;
  std::uint64_t stride = 1;
  bool operator==(const PolynomialEnv&) const = default;
};

/// Explicit pmf over {0, 1, ..., pmf.size()-1}, i.i.d. across indices.
struct TableEnv {
  std::vector<double> pmf;
  bool operator==(const TableEnv&) const = default;
};

/// Independent, non-identically-distributed schedule
/// xi_n ~ Ber(min(1, scale / max(n,1)^power)).
struct BernoulliScheduleEnv {
  double scale = 1.0;
  double power = 2.0;
  bool operator==(const BernoulliScheduleEnv&) const = default;
};

using EnvFamily =
    std::variant<ConstantEnv, BernoulliEnv, GeometricEnv, PoissonEnv,
                 PowerLawTailEnv, PolynomialEnv, TableEnv,
                 BernoulliScheduleEnv>;

/// A distribution family for the environment process feeding tree growth.
/// Draws at distinct indices are independent (v1 ships independent
/// environments only).
struct EnvironmentSpec {
  EnvFamily family = BernoulliEnv{};

  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;

  std::string family_name() const;

  /// Marginal mean when it exists, is finite and index-free.
  std::optional<double> mean() const;
  /// Marginal standard deviation under the same caveats.
  std::optional<double> stddev() const;

  bool operator==(const EnvironmentSpec&) const = default;
};

/// One draw from the family's marginal at `index`. Pure function of
/// (spec, stream key, index): independent across indices and invariant under
/// call order. Values saturate at kXiCap.
std::uint64_t sample_xi(const EnvironmentSpec& spec, std::uint64_t index,
                        const RandomStream& stream);

/// Prefix sums S_n = sum_{j=1..n} xi_j for n = 1..count, drawn from the same
/// per-index stream as sample_xi (so this is exactly the prefix sum of those
/// draws). Saturating.
std::vector<std::uint64_t> partial_sums(const EnvironmentSpec& spec,
                                        std::uint64_t count,
                                        const RandomStream& stream);

enum class Verdict { Holds, Fails, Unknown };

struct ConditionFinding {
  Verdict verdict = Verdict::Unknown;
  /// kappa for the ellipticity condition, the moment bound M for moment
  /// conditions, the constant c for the growth conditions.
  std::optional<double> constant;
  /// Witness function, when one backs the verdict (e.g. "f(i) = i^{1/beta}").
  std::string witness;
};

/// Analytic classification of a family against the environment conditions:
/// uniform ellipticity (UE), moment bounds (M)_r, slow growth (S: partial
/// sums bounded above by a function of non-summable inverse) and fast growth
/// (I: partial sums bounded below by a function of summable inverse).
struct ConditionReport {
  ConditionFinding ue;
  ConditionFinding moment1;
  ConditionFinding moment2;
  ConditionFinding cond_s;
  ConditionFinding cond_i;
};

ConditionReport classify_conditions(const EnvironmentSpec& spec);

/// The moment condition at an arbitrary order r > 0.
ConditionFinding moment_condition(const EnvironmentSpec& spec, double r);

std::string verdict_name(Verdict v);

void to_json(nlohmann::json& j, const EnvironmentSpec& spec);
void from_json(const nlohmann::json& j, EnvironmentSpec& spec);
void to_json(nlohmann::json& j, const ConditionFinding& f);
void to_json(nlohmann::json& j, const ConditionReport& r);

}  // namespace tbrw
