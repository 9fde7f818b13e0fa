#include "furst/cylinder.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "furst/error.hpp"
#include "furst/row_kernel.hpp"

namespace furst {

CylinderSpec::CylinderSpec(std::vector<Constraint> constraints) : constraints_(std::move(constraints)) {
  std::sort(constraints_.begin(), constraints_.end(),
            [](const Constraint& a, const Constraint& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    if (!(constraints_[i].first.group() == constraints_.front().first.group())) {
      throw Error(ErrorKind::group_mismatch, "group mismatch");
    }
    if (i > 0 && constraints_[i].first == constraints_[i - 1].first) {
      throw Error(ErrorKind::domain, "constraint clash");
    }
  }
}

CylinderSpec CylinderSpec::base(const GroupSpec& group) { return CylinderSpec({{identity(group), true}}); }

bool CylinderSpec::constrains(const GroupElement& h) const {
  return std::any_of(constraints_.begin(), constraints_.end(), [&](const Constraint& c) { return c.first == h; });
}

CylinderSpec CylinderSpec::with(const GroupElement& h, bool polarity) const {
  if (constrains(h)) throw Error(ErrorKind::domain, "constraint clash");
  auto next = constraints_;
  next.emplace_back(h, polarity);
  return CylinderSpec(std::move(next));
}

CylinderSpec CylinderSpec::translate(const GroupElement& g) const {
  std::vector<Constraint> next;
  next.reserve(constraints_.size());
  for (const auto& [h, eps] : constraints_) next.emplace_back(mul(h, g), eps);
  return CylinderSpec(std::move(next));
}

CylinderSpec CylinderSpec::flipped() const {
  auto next = constraints_;
  for (auto& c : next) c.second = !c.second;
  return CylinderSpec(std::move(next));
}

std::string CylinderSpec::str() const {
  std::string s = "{";
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    if (i) s += ", ";
    s += constraints_[i].first.str() + "->" + (constraints_[i].second ? "1" : "0");
  }
  return s + "}";
}

std::uint64_t cylinder_count(const IndicatorWindow& window, const CylinderSpec& c, const FolnerSpec& f,
                             std::uint64_t n) {
  const Box fn = f.set_box(n);
  if (c.empty()) return fn.size();
  std::vector<GroupElement> shifts;
  for (const auto& con : c.constraints()) {
    if (!(con.first.group() == f.group())) throw Error(ErrorKind::group_mismatch, "group mismatch");
    shifts.push_back(con.first);
  }
  std::vector<BitRun> runs(shifts.size());
  std::uint64_t total = 0;
  for_each_row(fn, shifts, window.box, [&](std::span<const std::size_t> offsets, std::size_t length, const GroupElement&) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      runs[i] = BitRun{&window.bits, offsets[i], !c.constraints()[i].second};
    }
    total += count_joint(runs, length);
  });
  return total;
}

namespace {

std::vector<GroupElement> support_of(const CylinderSpec& c) {
  std::vector<GroupElement> out;
  for (const auto& con : c.constraints()) out.push_back(con.first);
  return out;
}

IndicatorWindow window_for(const SetSpec& set, const FolnerSpec& f, std::uint64_t n,
                           const std::vector<GroupElement>& shifts) {
  if (!(set.group() == f.group())) throw Error(ErrorKind::group_mismatch, "group mismatch");
  return indicator_window(set, shifted_hull(f, n, shifts.empty() ? std::vector{identity(f.group())} : shifts));
}

Rational ratio(std::uint64_t count, std::uint64_t size) {
  return Rational(static_cast<std::int64_t>(count), static_cast<std::int64_t>(size));
}

}  // namespace

Rational cylinder_measure(const IndicatorWindow& window, const CylinderSpec& c, const FolnerSpec& f, std::uint64_t n) {
  return ratio(cylinder_count(window, c, f, n), f.set_box(n).size());
}

Rational cylinder_measure(const SetSpec& set, const CylinderSpec& c, const FolnerSpec& f, std::uint64_t n) {
  const IndicatorWindow w = window_for(set, f, n, support_of(c));
  return cylinder_measure(w, c, f, n);
}

AdditivityResult additivity_check(const SetSpec& set, const CylinderSpec& c, const GroupElement& h,
                                  const FolnerSpec& f, std::uint64_t n) {
  if (c.constrains(h)) throw Error(ErrorKind::domain, "constraint clash");
  auto shifts = support_of(c);
  shifts.push_back(h);
  const IndicatorWindow w = window_for(set, f, n, shifts);
  const auto whole = static_cast<std::int64_t>(cylinder_count(w, c, f, n));
  const auto zero = static_cast<std::int64_t>(cylinder_count(w, c.with(h, false), f, n));
  const auto one = static_cast<std::int64_t>(cylinder_count(w, c.with(h, true), f, n));
  const Rational residual(whole - zero - one, static_cast<std::int64_t>(f.set_box(n).size()));
  return {residual == Rational(0), residual};
}

AdditivityResult additivity_check(const MeasureTable& table, const CylinderSpec& c, const GroupElement& h,
                                  std::uint64_t n) {
  return additivity_check(table.source, c, h, table.folner, n);
}

Rational invariance_defect(const SetSpec& set, const CylinderSpec& c, const GroupElement& g, const FolnerSpec& f,
                           std::uint64_t n) {
  const CylinderSpec moved = c.translate(g);
  auto shifts = support_of(c);
  const auto more = support_of(moved);
  shifts.insert(shifts.end(), more.begin(), more.end());
  const IndicatorWindow w = window_for(set, f, n, shifts);
  const Rational defect = abs(cylinder_measure(w, moved, f, n) - cylinder_measure(w, c, f, n));
  if (defect > folner_defect(f, n, g).ratio()) {
    throw std::logic_error("invariance defect exceeds the Følner defect for " + c.str());
  }
  return defect;
}

const MeasureRow* MeasureTable::find(const CylinderSpec& c) const {
  for (const auto& row : rows) {
    if (row.cylinder == c) return &row;
  }
  return nullptr;
}

std::uint64_t cylinder_total(std::size_t support_size, int max_depth) {
  // 1 (whole space) + sum_r C(m, r) 2^r, saturating.
  const std::uint64_t cap = std::uint64_t{1} << 62;
  std::uint64_t total = 1;
  std::uint64_t binom = 1;
  for (int r = 1; r <= max_depth && static_cast<std::size_t>(r) <= support_size; ++r) {
    binom = binom * (support_size - static_cast<std::size_t>(r) + 1) / static_cast<std::uint64_t>(r);
    if (binom > cap >> r) return cap;
    total += binom << r;
    if (total > cap) return cap;
  }
  return total;
}

MeasureTable furstenberg_report(const SetSpec& set, const FolnerSpec& f, const ReportOptions& opt) {
  if (opt.radius < 1 || opt.max_depth < 1) throw Error(ErrorKind::domain, "radius and depth must be >= 1");
  validate_schedule(opt.schedule);
  if (!(set.group() == f.group())) throw Error(ErrorKind::group_mismatch, "group mismatch");

  MeasureTable table{set, f, opt.schedule, support_ball(f.group(), opt.radius), {}, {}, {}, {}, {}, {}, {}};
  const auto& support = table.support;
  const std::uint64_t total = cylinder_total(support.size(), opt.max_depth);
  if (total > opt.cylinder_cap) {
    throw Error(ErrorKind::cap_exceeded,
                "cylinder cap exceeded: " + std::to_string(total) + " > " + std::to_string(opt.cylinder_cap));
  }
  const IndicatorWindow w = indicator_window(set, query_window(f, opt.schedule, support));

  auto add_row = [&](CylinderSpec c) {
    MeasureRow row{std::move(c), {}, {}, {}};
    for (auto n : opt.schedule) {
      const auto count = cylinder_count(w, row.cylinder, f, n);
      row.counts.push_back(count);
      row.values.push_back(ratio(count, f.set_box(n).size()));
    }
    const auto [lo, hi] = std::minmax_element(row.values.begin(), row.values.end());
    row.oscillation = *hi - *lo;
    table.rows.push_back(std::move(row));
  };

  add_row(CylinderSpec());
  const std::size_t m = support.size();
  for (int r = 1; r <= opt.max_depth && static_cast<std::size_t>(r) <= m; ++r) {
    // Subsets in lexicographic index order, then polarity vectors 0 before 1.
    std::vector<std::size_t> pick(static_cast<std::size_t>(r));
    for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
    while (true) {
      for (std::uint32_t mask = 0; mask < (1u << r); ++mask) {
        std::vector<CylinderSpec::Constraint> cons;
        for (std::size_t i = 0; i < pick.size(); ++i) {
          cons.emplace_back(support[pick[i]], (mask >> (pick.size() - 1 - i)) & 1u);
        }
        add_row(CylinderSpec(std::move(cons)));
      }
      std::size_t i = pick.size();
      while (i-- > 0 && pick[i] == m - pick.size() + i) {
      }
      if (i == static_cast<std::size_t>(-1)) break;
      ++pick[i];
      for (std::size_t j = i + 1; j < pick.size(); ++j) pick[j] = pick[j - 1] + 1;
    }
  }

  // Condition (1): nu(A) against the upper density.
  const std::vector<GroupElement> base{identity(f.group())};
  const auto base_rows = density_rows(w, CorrelationQuery(base), f, opt.schedule);
  table.base_measure = base_rows.back().ratio;
  table.upper_density_estimate =
      std::max_element(base_rows.begin(), base_rows.end(), [](const auto& a, const auto& b) {
        return a.ratio < b.ratio;
      })->ratio;
  for (const auto& row : base_rows) {
    if ((table.upper_density_estimate - row.ratio).to_double() <= opt.tau) table.attaining.push_back(row.n);
  }
  try {
    table.subsequence = extract_subsequence({base_rows}, opt.eps);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::no_convergence) throw;
    table.subsequence_error = e.what();
  }

  if (opt.patterns) {
    if (support.size() > 64) throw Error(ErrorKind::cap_exceeded, "pattern support larger than 64 elements");
    std::set<std::uint64_t> seen;
    for_each_element(f.set_box(opt.schedule.back()), [&](const GroupElement& x) {
      std::uint64_t pat = 0;
      for (std::size_t j = 0; j < support.size(); ++j) {
        if (w.test(mul(support[j], x))) pat |= std::uint64_t{1} << j;
      }
      seen.insert(pat);
    });
    table.observed_patterns.assign(seen.begin(), seen.end());
  }
  return table;
}

}  // namespace furst
