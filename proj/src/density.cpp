#include "furst/density.hpp"

#include <algorithm>

#include "furst/error.hpp"
#include "furst/row_kernel.hpp"

namespace furst {

CorrelationQuery::CorrelationQuery(std::vector<GroupElement> shifts) : shifts_(std::move(shifts)) {
  if (shifts_.empty()) throw Error(ErrorKind::domain, "correlation query needs at least one shift");
  for (const auto& g : shifts_) {
    if (!(g.group() == shifts_.front().group())) throw Error(ErrorKind::group_mismatch, "group mismatch");
  }
}

CorrelationQuery CorrelationQuery::integers(std::initializer_list<std::int64_t> shifts) {
  std::vector<GroupElement> v;
  for (auto s : shifts) v.push_back(GroupElement::integer(s));
  return CorrelationQuery(std::move(v));
}

std::string CorrelationQuery::str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shifts_.size(); ++i) {
    if (i) s += ' ';
    s += shifts_[i].str();
  }
  return s + "]";
}

Schedule dyadic_schedule(int lo, int hi) {
  if (lo < 0 || hi > 62 || lo > hi) throw Error(ErrorKind::domain, "bad dyadic schedule bounds");
  Schedule s;
  for (int k = lo; k <= hi; ++k) s.push_back(std::uint64_t{1} << k);
  return s;
}

void validate_schedule(const Schedule& schedule) {
  if (schedule.empty()) throw Error(ErrorKind::domain, "empty schedule");
  if (schedule.front() == 0) throw Error(ErrorKind::domain, "empty Følner index");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i] <= schedule[i - 1]) throw Error(ErrorKind::domain, "schedule must be strictly increasing");
  }
}

Box query_window(const FolnerSpec& f, const Schedule& schedule, const std::vector<GroupElement>& shifts) {
  Box out = Box::empty_box(f.group());
  for (auto n : schedule) out = hull(out, shifted_hull(f, n, shifts));
  return out;
}

std::uint64_t intersection_count(const IndicatorWindow& window, const CorrelationQuery& q, const FolnerSpec& f,
                                 std::uint64_t n) {
  if (!(window.box.group == f.group()) || !(q.shifts().front().group() == f.group())) {
    throw Error(ErrorKind::group_mismatch, "group mismatch");
  }
  std::vector<BitRun> runs(q.shifts().size());
  std::uint64_t total = 0;
  for_each_row(f.set_box(n), q.shifts(), window.box,
               [&](std::span<const std::size_t> offsets, std::size_t length, const GroupElement&) {
                 for (std::size_t i = 0; i < runs.size(); ++i) runs[i] = BitRun{&window.bits, offsets[i], false};
                 total += count_joint(runs, length);
               });
  return total;
}

std::uint64_t intersection_count(const SetSpec& set, const CorrelationQuery& q, const FolnerSpec& f, std::uint64_t n) {
  if (!(set.group() == f.group())) throw Error(ErrorKind::group_mismatch, "group mismatch");
  const IndicatorWindow w = indicator_window(set, shifted_hull(f, n, q.shifts()));
  return intersection_count(w, q, f, n);
}

Rational density_at(const IndicatorWindow& window, const CorrelationQuery& q, const FolnerSpec& f, std::uint64_t n) {
  const auto count = intersection_count(window, q, f, n);
  return Rational(static_cast<std::int64_t>(count), static_cast<std::int64_t>(f.set_box(n).size()));
}

Rational density_at(const SetSpec& set, const CorrelationQuery& q, const FolnerSpec& f, std::uint64_t n) {
  const auto count = intersection_count(set, q, f, n);
  return Rational(static_cast<std::int64_t>(count), static_cast<std::int64_t>(f.set_box(n).size()));
}

std::vector<DensityRow> density_rows(const IndicatorWindow& window, const CorrelationQuery& q, const FolnerSpec& f,
                                     const Schedule& schedule) {
  std::vector<DensityRow> rows;
  rows.reserve(schedule.size());
  for (auto n : schedule) {
    const auto count = intersection_count(window, q, f, n);
    const auto size = f.set_box(n).size();
    rows.push_back({n, count, size, Rational(static_cast<std::int64_t>(count), static_cast<std::int64_t>(size))});
  }
  return rows;
}

Rational oscillation(const std::vector<DensityRow>& rows) {
  if (rows.empty()) return Rational(0);
  auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(),
                                      [](const DensityRow& a, const DensityRow& b) { return a.ratio < b.ratio; });
  return hi->ratio - lo->ratio;
}

UpperDensity upper_density(const SetSpec& set, const FolnerSpec& f, const Schedule& schedule, double tau) {
  validate_schedule(schedule);
  const std::vector<GroupElement> shifts{identity(f.group())};
  const IndicatorWindow w = indicator_window(set, query_window(f, schedule, shifts));
  UpperDensity out;
  out.rows = density_rows(w, CorrelationQuery(shifts), f, schedule);
  out.estimate = std::max_element(out.rows.begin(), out.rows.end(), [](const auto& a, const auto& b) {
                   return a.ratio < b.ratio;
                 })->ratio;
  for (const auto& row : out.rows) {
    if ((out.estimate - row.ratio).to_double() <= tau) out.attaining.push_back(row.n);
  }
  return out;
}

Subsequence extract_subsequence(const std::vector<std::vector<DensityRow>>& rows_per_query, double eps) {
  if (!(eps > 0)) throw Error(ErrorKind::domain, "eps must be positive");
  if (rows_per_query.empty()) throw Error(ErrorKind::domain, "no queries");
  const auto& first = rows_per_query.front();
  const std::size_t len = first.size();
  Subsequence out;
  out.target = std::max_element(first.begin(), first.end(), [](const auto& a, const auto& b) {
                 return a.ratio < b.ratio;
               })->ratio;

  std::vector<Rational> lo(rows_per_query.size()), hi(rows_per_query.size());
  std::vector<std::size_t> chosen;
  for (std::size_t k = len; k-- > 0;) {
    if (abs(first[k].ratio - out.target).to_double() > eps) continue;
    bool fits = true;
    for (std::size_t q = 0; q < rows_per_query.size() && fits; ++q) {
      const Rational v = rows_per_query[q][k].ratio;
      if (chosen.empty()) continue;
      const Rational new_lo = std::min(lo[q], v);
      const Rational new_hi = std::max(hi[q], v);
      fits = (new_hi - new_lo).to_double() <= eps;
    }
    if (!fits) continue;
    for (std::size_t q = 0; q < rows_per_query.size(); ++q) {
      const Rational v = rows_per_query[q][k].ratio;
      lo[q] = chosen.empty() ? v : std::min(lo[q], v);
      hi[q] = chosen.empty() ? v : std::max(hi[q], v);
    }
    chosen.push_back(k);
  }
  if (chosen.size() < 2) throw Error(ErrorKind::no_convergence, "no convergent subsequence at tolerance eps");
  std::reverse(chosen.begin(), chosen.end());
  for (auto k : chosen) out.indices.push_back(first[k].n);
  for (std::size_t q = 0; q < rows_per_query.size(); ++q) out.oscillation.push_back(hi[q] - lo[q]);
  return out;
}

Subsequence extract_subsequence(const SetSpec& set, const std::vector<CorrelationQuery>& queries, const FolnerSpec& f,
                                const Schedule& schedule, double eps) {
  validate_schedule(schedule);
  if (queries.empty()) throw Error(ErrorKind::domain, "no queries");
  std::vector<GroupElement> all;
  for (const auto& q : queries) all.insert(all.end(), q.shifts().begin(), q.shifts().end());
  const IndicatorWindow w = indicator_window(set, query_window(f, schedule, all));
  std::vector<std::vector<DensityRow>> rows;
  for (const auto& q : queries) rows.push_back(density_rows(w, q, f, schedule));
  // The target is the first query's upper-density estimate over the full schedule.
  return extract_subsequence(rows, eps);
}

}  // namespace furst
