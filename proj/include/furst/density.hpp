#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "furst/folner.hpp"
#include "furst/rational.hpp"
#include "furst/set_spec.hpp"

namespace furst {

/// Shifts (g_1, ..., g_r), r >= 1; the set g_1^{-1}E ∩ ... ∩ g_r^{-1}E.
class CorrelationQuery {
 public:
  explicit CorrelationQuery(std::vector<GroupElement> shifts);
  static CorrelationQuery integers(std::initializer_list<std::int64_t> shifts);

  const std::vector<GroupElement>& shifts() const noexcept { return shifts_; }
  std::string str() const;

 private:
  std::vector<GroupElement> shifts_;
};

using Schedule = std::vector<std::uint64_t>;

/// {2^lo, ..., 2^hi}.
Schedule dyadic_schedule(int lo, int hi);
/// Throws unless nonempty and strictly increasing.
void validate_schedule(const Schedule& schedule);

/// Window needed to evaluate the given shifts over every F_N in the schedule.
Box query_window(const FolnerSpec& f, const Schedule& schedule, const std::vector<GroupElement>& shifts);

/// |{h in F_N : g_i*h in E for all i}| over a pre-materialized window.
std::uint64_t intersection_count(const IndicatorWindow& window, const CorrelationQuery& q, const FolnerSpec& f,
                                 std::uint64_t n);
std::uint64_t intersection_count(const SetSpec& set, const CorrelationQuery& q, const FolnerSpec& f, std::uint64_t n);

Rational density_at(const IndicatorWindow& window, const CorrelationQuery& q, const FolnerSpec& f, std::uint64_t n);
Rational density_at(const SetSpec& set, const CorrelationQuery& q, const FolnerSpec& f, std::uint64_t n);

struct DensityRow {
  std::uint64_t n = 0;
  std::uint64_t count = 0;
  std::uint64_t size = 0;
  Rational ratio;
};

/// One query evaluated along a schedule.
std::vector<DensityRow> density_rows(const IndicatorWindow& window, const CorrelationQuery& q, const FolnerSpec& f,
                                     const Schedule& schedule);

struct UpperDensity {
  Rational estimate;
  std::vector<std::uint64_t> attaining;  // every N within tau of the estimate
  std::vector<DensityRow> rows;
};

/// Finite-scale limsup surrogate: the maximum density over the schedule.
UpperDensity upper_density(const SetSpec& set, const FolnerSpec& f, const Schedule& schedule, double tau = 1e-3);

struct Subsequence {
  std::vector<std::uint64_t> indices;  // ascending
  Rational target;                     // upper-density estimate of the first query
  std::vector<Rational> oscillation;   // per query, over the chosen indices
};

/// Subset S of the schedule on which every query's density oscillates by at
/// most eps and the first query stays within eps of its upper-density estimate.
/// Greedy from the largest index down. Throws no_convergence if |S| < 2.
Subsequence extract_subsequence(const SetSpec& set, const std::vector<CorrelationQuery>& queries, const FolnerSpec& f,
                                const Schedule& schedule, double eps);
Subsequence extract_subsequence(const std::vector<std::vector<DensityRow>>& rows_per_query, double eps);

struct DensityReport {
  CorrelationQuery query;
  std::vector<DensityRow> rows;
  Rational limsup_estimate;
  std::vector<std::uint64_t> attaining;
  std::optional<Subsequence> subsequence;
};

/// Max - min over the rows' ratios.
Rational oscillation(const std::vector<DensityRow>& rows);

}  // namespace furst
