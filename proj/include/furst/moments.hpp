#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "furst/circle.hpp"
#include "furst/density.hpp"

namespace furst {

namespace weights {
struct Constant {
  double value = 1;
};
/// a(n) = n on Z; negative n is rejected.
struct Linear {};
/// a(n) = 1/n on Z for n >= 1 (logarithmic averages).
struct Logarithmic {};
/// a(g) = exp(-rate * |g|_1).
struct ExponentialDecay {
  double rate = 0;
};
/// Values listed for the elements of a window; undefined outside it.
struct Table {
  Box window;
  std::vector<double> values;
};
}  // namespace weights

namespace normalizers {
struct Constant {
  double value = 1;
};
/// b(N) = mean of the first coordinate over F_N; pairs with weights::Linear
/// ((N+1)/2 on [1, N]).
struct Mean {};
/// b(N) = ln(N) / N; pairs with weights::Logarithmic.
struct LogOverN {};
struct Table {
  std::map<std::uint64_t, double> values;
};
}  // namespace normalizers

using WeightRule =
    std::variant<weights::Constant, weights::Linear, weights::Logarithmic, weights::ExponentialDecay, weights::Table>;
using NormalizerRule = std::variant<normalizers::Constant, normalizers::Mean, normalizers::LogOverN, normalizers::Table>;

/// ((F_N), a, b) with (1 / (b(N)|F_N|)) sum_{g in F_N} a(g) -> 1.
struct AveragingScheme {
  FolnerSpec folner;
  WeightRule weight = weights::Constant{};
  NormalizerRule normalizer = normalizers::Constant{};

  static AveragingScheme uniform(const FolnerSpec& f) { return {f, weights::Constant{1}, normalizers::Constant{1}}; }
  /// a = b = 1 on an interval Folner sequence of Z.
  bool is_unweighted_integer_scheme() const;
  double weight_at(const GroupElement& g) const;
  double normalizer_at(std::uint64_t n) const;
};

/// Disk-valued function G -> {|z| <= 1}.
class FunctionSpec {
 public:
  struct Exponential {
    RealParam theta;
  };
  struct Indicator {
    SetSpec set;
  };
  struct RandomDisk {
    std::uint64_t seed = 0;
  };
  struct Constant {
    std::complex<double> value;
  };
  struct Product {
    std::vector<FunctionSpec> factors;
  };
  struct Conjugate {
    std::shared_ptr<const FunctionSpec> inner;
  };
  using Rule = std::variant<Exponential, Indicator, RandomDisk, Constant, Product, Conjugate>;

  /// e^{2 pi i theta n} on Z.
  static FunctionSpec exponential(const RealParam& theta);
  static FunctionSpec indicator(const SetSpec& set);
  /// Deterministic pseudo-random point of the unit disk per group element.
  static FunctionSpec random_disk(const GroupSpec& group, std::uint64_t seed);
  /// Throws if |value| > 1.
  static FunctionSpec constant(const GroupSpec& group, std::complex<double> value);
  static FunctionSpec product(std::vector<FunctionSpec> factors);
  static FunctionSpec conjugate(const FunctionSpec& f);

  const GroupSpec& group() const noexcept { return group_; }
  const Rule& rule() const noexcept { return rule_; }
  bool is_indicator() const noexcept { return std::holds_alternative<Indicator>(rule_); }
  std::complex<double> operator()(const GroupElement& g) const;

 private:
  FunctionSpec(GroupSpec group, Rule rule) : group_(group), rule_(std::move(rule)) {}
  GroupSpec group_;
  Rule rule_;
};

struct MomentFactor {
  std::size_t function = 0;  // index into the family
  bool conjugate = false;
  GroupElement shift;
};

/// Nonempty list of factors f~_i(g_i g).
class MomentQuery {
 public:
  explicit MomentQuery(std::vector<MomentFactor> factors);
  const std::vector<MomentFactor>& factors() const noexcept { return factors_; }
  std::string str() const;

 private:
  std::vector<MomentFactor> factors_;
};

struct Normalization {
  double value = 0;
  std::optional<Rational> exact;  // when weights and normalizer are rational
};

/// (1 / (b(N)|F_N|)) sum_{g in F_N} a(g). Throws "degenerate normalizer" for b(N) = 0.
Normalization scheme_normalization(const AveragingScheme& s, std::uint64_t n);

struct Moment {
  std::complex<double> value;
  std::optional<Rational> exact;  // all-indicator families with rational weights
};

/// (1 / (b(N)|F_N|)) sum_{g in F_N} a(g) prod_i f~_i(g_i g), with compensated
/// summation. All-indicator queries under constant integer weights are
/// counted exactly instead.
Moment weighted_moment(const std::vector<FunctionSpec>& family, const MomentQuery& q, const AveragingScheme& s,
                       std::uint64_t n);

struct PatternResult {
  std::vector<bool> conjugates;
  std::vector<std::complex<double>> values;  // per schedule index
  double oscillation = 0;                    // over the schedule tail
};

struct AccordanceQuery {
  MomentQuery query;
  std::vector<PatternResult> patterns;
  double oscillation = 0;  // max over patterns
  bool accordant = false;
};

struct AccordanceReport {
  std::vector<AccordanceQuery> queries;
  bool accordant = false;
};

/// Cauchy oscillation of every query (and, for queries with at most
/// conj_depth factors, every conjugation pattern) over the last half of the
/// schedule.
AccordanceReport accordance_check(const std::vector<FunctionSpec>& family, const std::vector<MomentQuery>& queries,
                                  const AveragingScheme& s, const Schedule& schedule, double eps, int conj_depth = 3);

/// Closed-form limit of an exponential moment under the unweighted Z scheme:
/// e^{2 pi i sum s_i theta_i g_i} if sum s_i theta_i is an integer, else 0,
/// with s_i = -1 for conjugated factors. The integrality test is exact in
/// 128-bit fixed point.
std::complex<double> exponential_oracle(const std::vector<RealParam>& thetas, const MomentQuery& q,
                                        const AveragingScheme& s);

}  // namespace furst
