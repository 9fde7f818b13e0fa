#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "furst/density.hpp"

namespace furst {

using ShiftTuple = std::vector<GroupElement>;

/// Sorted, duplicate-free form of a shift tuple. Intersections are symmetric
/// and idempotent, so every permutation or repetition maps to the same key.
ShiftTuple canonical_tuple(ShiftTuple tuple);
std::string tuple_str(const ShiftTuple& tuple);

struct SpectrumEntry {
  std::vector<std::uint64_t> counts;  // per schedule index
  Rational density;                   // at the final N
  Rational oscillation;               // over the schedule
};

/// Densities d(g_1^{-1}E ∩ ... ∩ g_r^{-1}E) for every canonical tuple of at
/// most max_depth elements of the support ball of the given radius.
struct CorrelationSpectrum {
  GroupSpec group;
  int max_depth = 1;
  std::int64_t radius = 0;
  Schedule schedule;
  std::map<ShiftTuple, SpectrumEntry> entries;

  /// Looks up any permutation/duplication of a stored tuple.
  const SpectrumEntry& at(const ShiftTuple& tuple) const;
};

CorrelationSpectrum correlation_spectrum(const SetSpec& set, const FolnerSpec& f, int max_depth, std::int64_t radius,
                                         const Schedule& schedule, std::uint64_t cap = 1000000);

/// CSV export: tuple,numerator,denominator,oscillation_numerator,oscillation_denominator
std::string spectrum_csv(const CorrelationSpectrum& spectrum);

enum class Verdict { consistent, distinguished, inconclusive };
std::string to_string(Verdict v);

struct Comparison {
  Verdict verdict = Verdict::inconclusive;
  Rational max_discrepancy;
  ShiftTuple max_tuple;
  /// DISTINGUISHED: first tuple beyond eps in nearest-first order
  /// (fewest shifts, then smallest sup-norms, then lexicographic).
  /// CONSISTENT: the tuple attaining max_discrepancy.
  ShiftTuple witness;
  Rational witness_discrepancy;
  std::vector<ShiftTuple> inconclusive;  // oscillation above eps on either side
  std::size_t compared = 0;
};

/// Finite fragment of the spectrum-equality criterion. DISTINGUISHED is
/// conclusive at this scale; CONSISTENT only says no tuple up to
/// (max_depth, radius) separates the pairs.
Comparison compare_spectra(const CorrelationSpectrum& a, const CorrelationSpectrum& b, double eps);

struct SetWithFolner {
  SetSpec set;
  FolnerSpec folner;
};

Comparison compare_pairs(const SetWithFolner& first, const SetWithFolner& second, int max_depth, std::int64_t radius,
                         const Schedule& schedule, double eps);

}  // namespace furst
