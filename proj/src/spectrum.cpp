#include "furst/spectrum.hpp"

#include <algorithm>

#include "furst/error.hpp"

namespace furst {

ShiftTuple canonical_tuple(ShiftTuple tuple) {
  std::sort(tuple.begin(), tuple.end());
  tuple.erase(std::unique(tuple.begin(), tuple.end()), tuple.end());
  return tuple;
}

std::string tuple_str(const ShiftTuple& tuple) {
  std::string s = "(";
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (i) s += ' ';
    s += tuple[i].str();
  }
  return s + ")";
}

const SpectrumEntry& CorrelationSpectrum::at(const ShiftTuple& tuple) const {
  const auto it = entries.find(canonical_tuple(tuple));
  if (it == entries.end()) throw Error(ErrorKind::domain, "tuple " + tuple_str(tuple) + " not in spectrum");
  return it->second;
}

CorrelationSpectrum correlation_spectrum(const SetSpec& set, const FolnerSpec& f, int max_depth, std::int64_t radius,
                                         const Schedule& schedule, std::uint64_t cap) {
  if (max_depth < 1 || radius < 0) throw Error(ErrorKind::domain, "depth must be >= 1 and radius >= 0");
  if (!(set.group() == f.group())) throw Error(ErrorKind::group_mismatch, "group mismatch");
  validate_schedule(schedule);
  const auto ball = support_ball(f.group(), radius);
  // Tuples are subsets, so the count is the cylinder count with one polarity.
  std::uint64_t tuples = 0;
  {
    std::uint64_t binom = 1;
    for (int r = 1; r <= max_depth && static_cast<std::size_t>(r) <= ball.size(); ++r) {
      binom = binom * (ball.size() - static_cast<std::size_t>(r) + 1) / static_cast<std::uint64_t>(r);
      tuples += binom;
      if (tuples > cap) throw Error(ErrorKind::cap_exceeded, "spectrum cap exceeded");
    }
  }

  CorrelationSpectrum out{f.group(), max_depth, radius, schedule, {}};
  const IndicatorWindow w = indicator_window(set, query_window(f, schedule, ball));
  const std::size_t m = ball.size();
  for (int r = 1; r <= max_depth && static_cast<std::size_t>(r) <= m; ++r) {
    std::vector<std::size_t> pick(static_cast<std::size_t>(r));
    for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
    while (true) {
      ShiftTuple t;
      for (auto i : pick) t.push_back(ball[i]);
      const auto rows = density_rows(w, CorrelationQuery(t), f, schedule);
      SpectrumEntry e;
      for (const auto& row : rows) e.counts.push_back(row.count);
      e.density = rows.back().ratio;
      e.oscillation = oscillation(rows);
      out.entries.emplace(std::move(t), std::move(e));

      std::size_t i = pick.size();
      while (i-- > 0 && pick[i] == m - pick.size() + i) {
      }
      if (i == static_cast<std::size_t>(-1)) break;
      ++pick[i];
      for (std::size_t j = i + 1; j < pick.size(); ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return out;
}

std::string spectrum_csv(const CorrelationSpectrum& spectrum) {
  std::string out = "tuple,numerator,denominator,oscillation_numerator,oscillation_denominator\n";
  for (const auto& [t, e] : spectrum.entries) {
    out += "\"" + tuple_str(t) + "\"," + std::to_string(e.density.num()) + "," + std::to_string(e.density.den()) +
           "," + std::to_string(e.oscillation.num()) + "," + std::to_string(e.oscillation.den()) + "\n";
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::consistent: return "CONSISTENT";
    case Verdict::distinguished: return "DISTINGUISHED";
    case Verdict::inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

namespace {

bool nearer(const ShiftTuple& a, const ShiftTuple& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  auto norms = [](const ShiftTuple& t) {
    std::vector<std::int64_t> n;
    for (const auto& g : t) n.push_back(sup_norm(g));
    std::sort(n.begin(), n.end());
    return n;
  };
  const auto na = norms(a);
  const auto nb = norms(b);
  if (na != nb) return na < nb;
  return a < b;
}

}  // namespace

Comparison compare_spectra(const CorrelationSpectrum& a, const CorrelationSpectrum& b, double eps) {
  if (!(eps > 0)) throw Error(ErrorKind::domain, "eps must be positive");
  if (!(a.group == b.group)) throw Error(ErrorKind::group_mismatch, "group mismatch");
  if (a.max_depth != b.max_depth || a.radius != b.radius) {
    throw Error(ErrorKind::domain, "spectra must share depth and radius");
  }
  Comparison c;
  std::optional<ShiftTuple> first_witness;
  for (const auto& [t, ea] : a.entries) {
    const auto& eb = b.at(t);
    if (ea.oscillation.to_double() > eps || eb.oscillation.to_double() > eps) {
      c.inconclusive.push_back(t);
      continue;
    }
    ++c.compared;
    const Rational d = abs(ea.density - eb.density);
    if (c.compared == 1 || d > c.max_discrepancy) {
      c.max_discrepancy = d;
      c.max_tuple = t;
    }
    if (d.to_double() > eps && (!first_witness || nearer(t, *first_witness))) first_witness = t;
  }
  if (c.compared == 0) {
    c.verdict = Verdict::inconclusive;
  } else if (first_witness) {
    c.verdict = Verdict::distinguished;
    c.witness = *first_witness;
    c.witness_discrepancy = abs(a.at(c.witness).density - b.at(c.witness).density);
  } else {
    c.verdict = Verdict::consistent;
    c.witness = c.max_tuple;
    c.witness_discrepancy = c.max_discrepancy;
  }
  return c;
}

Comparison compare_pairs(const SetWithFolner& first, const SetWithFolner& second, int max_depth, std::int64_t radius,
                         const Schedule& schedule, double eps) {
  if (!(eps > 0)) throw Error(ErrorKind::domain, "eps must be positive");
  const auto a = correlation_spectrum(first.set, first.folner, max_depth, radius, schedule);
  const auto b = correlation_spectrum(second.set, second.folner, max_depth, radius, schedule);
  return compare_spectra(a, b, eps);
}

}  // namespace furst
