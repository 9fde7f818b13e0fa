#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "furst/density.hpp"

namespace furst {

/// Finite set of constraints x(h_i) = eps_i on {0,1}^G; the empty cylinder is
/// the whole space. Constraints are kept sorted by element, elements distinct.
class CylinderSpec {
 public:
  using Constraint = std::pair<GroupElement, bool>;

  CylinderSpec() = default;
  explicit CylinderSpec(std::vector<Constraint> constraints);
  /// The one-constraint cylinder A = {x : x(e) = 1}.
  static CylinderSpec base(const GroupSpec& group);

  const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
  bool empty() const noexcept { return constraints_.empty(); }
  bool constrains(const GroupElement& h) const;
  /// Throws "constraint clash" if h is already constrained.
  CylinderSpec with(const GroupElement& h, bool polarity) const;
  /// Constraints {h_i * g -> eps_i}: the cylinder pulled back along the shift by g.
  CylinderSpec translate(const GroupElement& g) const;
  CylinderSpec flipped() const;
  std::string str() const;

  friend bool operator==(const CylinderSpec&, const CylinderSpec&) = default;

 private:
  std::vector<Constraint> constraints_;
};

/// |{x in F_N : 1_E(h_i * x) = eps_i for all i}|.
std::uint64_t cylinder_count(const IndicatorWindow& window, const CylinderSpec& c, const FolnerSpec& f,
                             std::uint64_t n);
Rational cylinder_measure(const IndicatorWindow& window, const CylinderSpec& c, const FolnerSpec& f, std::uint64_t n);
Rational cylinder_measure(const SetSpec& set, const CylinderSpec& c, const FolnerSpec& f, std::uint64_t n);

struct AdditivityResult {
  bool holds = false;
  Rational residual;  // nu(C) - nu(C + {h->0}) - nu(C + {h->1})
};

AdditivityResult additivity_check(const SetSpec& set, const CylinderSpec& c, const GroupElement& h,
                                  const FolnerSpec& f, std::uint64_t n);

/// |nu_N(C.g) - nu_N(C)|. Checked against the Folner defect bound before returning.
Rational invariance_defect(const SetSpec& set, const CylinderSpec& c, const GroupElement& g, const FolnerSpec& f,
                           std::uint64_t n);

struct MeasureRow {
  CylinderSpec cylinder;
  std::vector<std::uint64_t> counts;  // per schedule index
  std::vector<Rational> values;
  Rational oscillation;
};

struct ReportOptions {
  std::int64_t radius = 1;
  int max_depth = 1;
  Schedule schedule;
  std::uint64_t cylinder_cap = 100000;
  double eps = 0.05;     // subsequence tolerance
  double tau = 1e-3;     // upper-density attainment tolerance
  bool patterns = false; // record observed patterns on the support ball
};

/// Empirical cylinder measures over all cylinders supported in the radius ball
/// with at most max_depth constraints.
struct MeasureTable {
  SetSpec source;
  FolnerSpec folner;
  Schedule schedule;
  std::vector<GroupElement> support;
  std::vector<MeasureRow> rows;
  Rational base_measure;                  // nu_N(A) at the final N
  Rational upper_density_estimate;
  std::vector<std::uint64_t> attaining;
  std::optional<Subsequence> subsequence; // empty if none exists at eps
  std::string subsequence_error;
  /// Distinct restrictions of S_x(omega) to the support ball at the final N,
  /// as bit patterns (bit j = support[j]); only with ReportOptions::patterns.
  std::vector<std::uint64_t> observed_patterns;

  const MeasureRow* find(const CylinderSpec& c) const;
};

AdditivityResult additivity_check(const MeasureTable& table, const CylinderSpec& c, const GroupElement& h,
                                  std::uint64_t n);

/// Number of cylinders furstenberg_report would tabulate.
std::uint64_t cylinder_total(std::size_t support_size, int max_depth);

MeasureTable furstenberg_report(const SetSpec& set, const FolnerSpec& f, const ReportOptions& options);

}  // namespace furst
