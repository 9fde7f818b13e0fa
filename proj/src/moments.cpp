#include "furst/moments.hpp"

#include <cmath>
#include <numbers>

#include "furst/error.hpp"
#include "furst/row_kernel.hpp"

namespace furst {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0;
  double comp_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::optional<std::int64_t> as_integer(double v) {
  if (std::floor(v) == v && std::abs(v) < 2147483648.0) return static_cast<std::int64_t>(v);
  return std::nullopt;
}

std::complex<double> unit(CirclePoint phase) {
  return std::polar(1.0, 2 * std::numbers::pi * phase.to_double());
}

bool rational_weights(const AveragingScheme& s) {
  const auto* w = std::get_if<weights::Constant>(&s.weight);
  const auto* b = std::get_if<normalizers::Constant>(&s.normalizer);
  return w && b && as_integer(w->value) && as_integer(b->value);
}

}  // namespace

bool AveragingScheme::is_unweighted_integer_scheme() const {
  const auto* w = std::get_if<weights::Constant>(&weight);
  const auto* b = std::get_if<normalizers::Constant>(&normalizer);
  return w && b && w->value == 1 && b->value == 1 && folner.shape() == FolnerShape::interval;
}

double AveragingScheme::weight_at(const GroupElement& g) const {
  return std::visit(overloaded{
                        [](const weights::Constant& c) { return c.value; },
                        [&](const weights::Linear&) {
                          if (g.group().kind() != GroupKind::integers) {
                            throw Error(ErrorKind::unsupported, "linear weight requires Z");
                          }
                          if (g[0] < 0) throw Error(ErrorKind::domain, "negative weight");
                          return static_cast<double>(g[0]);
                        },
                        [&](const weights::Logarithmic&) {
                          if (g.group().kind() != GroupKind::integers || g[0] < 1) {
                            throw Error(ErrorKind::domain, "logarithmic weight needs n >= 1 on Z");
                          }
                          return 1.0 / static_cast<double>(g[0]);
                        },
                        [&](const weights::ExponentialDecay& e) {
                          double norm1 = 0;
                          for (std::size_t i = 0; i < g.rank(); ++i) norm1 += std::abs(static_cast<double>(g[i]));
                          return std::exp(-e.rate * norm1);
                        },
                        [&](const weights::Table& t) {
                          if (!t.window.contains(g)) throw Error(ErrorKind::window_exceeded, "window exceeded");
                          return t.values.at(static_cast<std::size_t>(t.window.index_of(g)));
                        },
                    },
                    weight);
}

double AveragingScheme::normalizer_at(std::uint64_t n) const {
  return std::visit(overloaded{
                        [](const normalizers::Constant& c) { return c.value; },
                        [&](const normalizers::Mean&) {
                          const Box b = folner.set_box(n);
                          return (static_cast<double>(b.lo[0]) + static_cast<double>(b.hi[0])) / 2;
                        },
                        [&](const normalizers::LogOverN&) {
                          return std::log(static_cast<double>(n)) / static_cast<double>(n);
                        },
                        [&](const normalizers::Table& t) {
                          const auto it = t.values.find(n);
                          if (it == t.values.end()) {
                            throw Error(ErrorKind::domain, "normalizer table has no entry for N=" + std::to_string(n));
                          }
                          return it->second;
                        },
                    },
                    normalizer);
}

FunctionSpec FunctionSpec::exponential(const RealParam& theta) {
  return FunctionSpec(GroupSpec::integers(), Exponential{theta});
}

FunctionSpec FunctionSpec::indicator(const SetSpec& set) { return FunctionSpec(set.group(), Indicator{set}); }

FunctionSpec FunctionSpec::random_disk(const GroupSpec& group, std::uint64_t seed) {
  return FunctionSpec(group, RandomDisk{seed});
}

FunctionSpec FunctionSpec::constant(const GroupSpec& group, std::complex<double> value) {
  if (std::abs(value) > 1 + 1e-15) throw Error(ErrorKind::domain, "function value outside the unit disk");
  return FunctionSpec(group, Constant{value});
}

FunctionSpec FunctionSpec::product(std::vector<FunctionSpec> factors) {
  if (factors.empty()) throw Error(ErrorKind::domain, "empty product");
  const GroupSpec g = factors.front().group();
  for (const auto& f : factors) {
    if (!(f.group() == g)) throw Error(ErrorKind::group_mismatch, "group mismatch");
  }
  return FunctionSpec(g, Product{std::move(factors)});
}

FunctionSpec FunctionSpec::conjugate(const FunctionSpec& f) {
  return FunctionSpec(f.group(), Conjugate{std::make_shared<const FunctionSpec>(f)});
}

std::complex<double> FunctionSpec::operator()(const GroupElement& g) const {
  if (!(g.group() == group_)) throw Error(ErrorKind::group_mismatch, "group mismatch");
  return std::visit(overloaded{
                        [&](const Exponential& e) { return unit(g[0] * e.theta.point()); },
                        [&](const Indicator& i) { return std::complex<double>(i.set.contains(g) ? 1.0 : 0.0); },
                        [&](const RandomDisk& r) {
                          std::uint64_t h = splitmix64(r.seed);
                          for (std::size_t i = 0; i < g.rank(); ++i) {
                            h = splitmix64(h ^ static_cast<std::uint64_t>(g[i]));
                          }
                          const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
                          const double v = static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53;
                          return std::polar(std::sqrt(u), 2 * std::numbers::pi * v);
                        },
                        [](const Constant& c) { return c.value; },
                        [&](const Product& p) {
                          std::complex<double> z = 1;
                          for (const auto& f : p.factors) z *= f(g);
                          return z;
                        },
                        [&](const Conjugate& c) { return std::conj((*c.inner)(g)); },
                    },
                    rule_);
}

MomentQuery::MomentQuery(std::vector<MomentFactor> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw Error(ErrorKind::domain, "moment query needs at least one factor");
}

std::string MomentQuery::str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) s += ' ';
    s += (factors_[i].conjugate ? "~f" : "f") + std::to_string(factors_[i].function) + "@" + factors_[i].shift.str();
  }
  return s + "]";
}

Normalization scheme_normalization(const AveragingScheme& s, std::uint64_t n) {
  const double b = s.normalizer_at(n);
  if (b == 0) throw Error(ErrorKind::domain, "degenerate normalizer");
  const Box fn = s.folner.set_box(n);
  const std::uint64_t size = fn.size();

  // Exact routes: integer constant or linear weights against an integer
  // constant or mean normalizer.
  std::optional<__int128> weight_sum;
  if (const auto* c = std::get_if<weights::Constant>(&s.weight)) {
    if (auto v = as_integer(c->value)) weight_sum = static_cast<__int128>(*v) * size;
  } else if (std::holds_alternative<weights::Linear>(s.weight) && fn.group.kind() == GroupKind::integers &&
             fn.lo[0] >= 0) {
    weight_sum = (static_cast<__int128>(fn.lo[0]) + fn.hi[0]) * static_cast<__int128>(size) / 2;
  }
  std::optional<std::pair<__int128, __int128>> b_exact;  // numerator, denominator
  if (const auto* c = std::get_if<normalizers::Constant>(&s.normalizer)) {
    if (auto v = as_integer(c->value)) b_exact = std::pair<__int128, __int128>{*v, 1};
  } else if (std::holds_alternative<normalizers::Mean>(s.normalizer)) {
    b_exact = std::pair<__int128, __int128>{static_cast<__int128>(fn.lo[0]) + fn.hi[0], 2};
  }
  if (weight_sum && b_exact) {
    const __int128 num = *weight_sum * b_exact->second;
    const __int128 den = b_exact->first * static_cast<__int128>(size);
    const __int128 lim = static_cast<__int128>(INT64_MAX);
    if (num <= lim && num >= -lim && den <= lim && den >= -lim) {
      const Rational r(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
      return {r.to_double(), r};
    }
  }

  CompensatedSum sum;
  for_each_element(fn, [&](const GroupElement& g) { sum.add(s.weight_at(g)); });
  return {sum.value() / (b * static_cast<double>(size)), std::nullopt};
}

namespace {

Box moment_window(const MomentQuery& q, const FolnerSpec& f, const Schedule& schedule) {
  std::vector<GroupElement> shifts;
  for (const auto& fac : q.factors()) shifts.push_back(fac.shift);
  return query_window(f, schedule, shifts);
}

void validate_query(const std::vector<FunctionSpec>& family, const MomentQuery& q, const AveragingScheme& s) {
  for (const auto& fac : q.factors()) {
    if (fac.function >= family.size()) throw Error(ErrorKind::domain, "index out of range");
    if (!(fac.shift.group() == s.folner.group()) || !(family[fac.function].group() == s.folner.group())) {
      throw Error(ErrorKind::group_mismatch, "group mismatch");
    }
  }
}

/// Function values cached over one window, evaluated once per family member.
class FamilyWindow {
 public:
  FamilyWindow(const std::vector<FunctionSpec>& family, const Box& box) : family_(family), box_(box) {}

  const Box& box() const noexcept { return box_; }

  const std::vector<std::complex<double>>& values(std::size_t index) {
    auto it = values_.find(index);
    if (it != values_.end()) return it->second;
    std::vector<std::complex<double>> v;
    v.reserve(static_cast<std::size_t>(box_.size()));
    const auto& f = family_[index];
    if (const auto* e = std::get_if<FunctionSpec::Exponential>(&f.rule())) {
      CirclePoint phase = box_.lo[0] * e->theta.point();
      for (std::uint64_t i = 0; i < box_.size(); ++i) {
        v.push_back(unit(phase));
        phase = phase + e->theta.point();
      }
    } else {
      for_each_element(box_, [&](const GroupElement& g) { v.push_back(f(g)); });
    }
    return values_.emplace(index, std::move(v)).first->second;
  }

  const IndicatorWindow& bits(std::size_t index) {
    auto it = bits_.find(index);
    if (it != bits_.end()) return it->second;
    const auto& ind = std::get<FunctionSpec::Indicator>(family_[index].rule());
    return bits_.emplace(index, indicator_window(ind.set, box_)).first->second;
  }

 private:
  const std::vector<FunctionSpec>& family_;
  Box box_;
  std::map<std::size_t, std::vector<std::complex<double>>> values_;
  std::map<std::size_t, IndicatorWindow> bits_;
};

Moment moment_on(FamilyWindow& fw, const std::vector<FunctionSpec>& family, const MomentQuery& q,
                 const AveragingScheme& s, std::uint64_t n) {
  const double b = s.normalizer_at(n);
  if (b == 0) throw Error(ErrorKind::domain, "degenerate normalizer");
  const Box fn = s.folner.set_box(n);
  const auto size = fn.size();
  std::vector<GroupElement> shifts;
  for (const auto& fac : q.factors()) shifts.push_back(fac.shift);

  const bool all_indicators = std::all_of(q.factors().begin(), q.factors().end(), [&](const MomentFactor& fac) {
    return family[fac.function].is_indicator();
  });
  if (all_indicators && rational_weights(s)) {
    std::vector<BitRun> runs(shifts.size());
    std::uint64_t count = 0;
    for_each_row(fn, shifts, fw.box(), [&](std::span<const std::size_t> offsets, std::size_t length, const GroupElement&) {
      for (std::size_t i = 0; i < runs.size(); ++i) {
        runs[i] = BitRun{&fw.bits(q.factors()[i].function).bits, offsets[i], false};
      }
      count += count_joint(runs, length);
    });
    const auto a = *as_integer(std::get<weights::Constant>(s.weight).value);
    const auto bn = *as_integer(std::get<normalizers::Constant>(s.normalizer).value);
    const Rational r = Rational(a) * Rational(static_cast<std::int64_t>(count)) /
                       (Rational(bn) * Rational(static_cast<std::int64_t>(size)));
    return {std::complex<double>(r.to_double(), 0.0), r};
  }

  std::vector<const std::vector<std::complex<double>>*> vals;
  for (const auto& fac : q.factors()) vals.push_back(&fw.values(fac.function));
  const auto* constant_weight = std::get_if<weights::Constant>(&s.weight);
  const std::size_t last = fn.group.rank() - 1;
  CompensatedSum re, im;
  for_each_row(fn, shifts, fw.box(), [&](std::span<const std::size_t> offsets, std::size_t length,
                                         const GroupElement& row_start) {
    GroupElement h = row_start;
    for (std::size_t j = 0; j < length; ++j) {
      std::complex<double> z = constant_weight ? constant_weight->value : s.weight_at(h);
      for (std::size_t i = 0; i < vals.size(); ++i) {
        const auto v = (*vals[i])[offsets[i] + j];
        z *= q.factors()[i].conjugate ? std::conj(v) : v;
      }
      re.add(z.real());
      im.add(z.imag());
      ++h[last];
    }
  });
  const double scale = b * static_cast<double>(size);
  return {std::complex<double>(re.value() / scale, im.value() / scale), std::nullopt};
}

}  // namespace

Moment weighted_moment(const std::vector<FunctionSpec>& family, const MomentQuery& q, const AveragingScheme& s,
                       std::uint64_t n) {
  validate_query(family, q, s);
  FamilyWindow fw(family, moment_window(q, s.folner, {n}));
  return moment_on(fw, family, q, s, n);
}

AccordanceReport accordance_check(const std::vector<FunctionSpec>& family, const std::vector<MomentQuery>& queries,
                                  const AveragingScheme& s, const Schedule& schedule, double eps, int conj_depth) {
  if (!(eps > 0)) throw Error(ErrorKind::domain, "eps must be positive");
  validate_schedule(schedule);
  AccordanceReport report;
  report.accordant = true;
  const std::size_t tail = schedule.size() < 2 ? schedule.size() : std::max<std::size_t>(2, (schedule.size() + 1) / 2);
  for (const auto& q : queries) {
    validate_query(family, q, s);
    FamilyWindow fw(family, moment_window(q, s.folner, schedule));
    AccordanceQuery aq{q, {}, 0, false};
    const std::size_t r = q.factors().size();
    std::vector<std::vector<bool>> patterns;
    if (r <= static_cast<std::size_t>(conj_depth)) {
      for (std::uint32_t mask = 0; mask < (1u << r); ++mask) {
        std::vector<bool> p(r);
        for (std::size_t i = 0; i < r; ++i) p[i] = (mask >> (r - 1 - i)) & 1u;
        patterns.push_back(std::move(p));
      }
    } else {
      std::vector<bool> p;
      for (const auto& fac : q.factors()) p.push_back(fac.conjugate);
      patterns.push_back(std::move(p));
    }
    for (const auto& p : patterns) {
      auto factors = q.factors();
      for (std::size_t i = 0; i < r; ++i) factors[i].conjugate = p[i];
      const MomentQuery pq(std::move(factors));
      PatternResult pr{p, {}, 0};
      for (auto n : schedule) pr.values.push_back(moment_on(fw, family, pq, s, n).value);
      for (std::size_t i = schedule.size() - tail; i < schedule.size(); ++i) {
        for (std::size_t j = i + 1; j < schedule.size(); ++j) {
          pr.oscillation = std::max(pr.oscillation, std::abs(pr.values[i] - pr.values[j]));
        }
      }
      aq.oscillation = std::max(aq.oscillation, pr.oscillation);
      aq.patterns.push_back(std::move(pr));
    }
    aq.accordant = aq.oscillation <= eps;
    report.accordant = report.accordant && aq.accordant;
    report.queries.push_back(std::move(aq));
  }
  return report;
}

std::complex<double> exponential_oracle(const std::vector<RealParam>& thetas, const MomentQuery& q,
                                        const AveragingScheme& s) {
  if (!s.is_unweighted_integer_scheme()) throw Error(ErrorKind::domain, "oracle undefined");
  CirclePoint frequency{};
  CirclePoint phase{};
  for (const auto& fac : q.factors()) {
    if (fac.function >= thetas.size()) throw Error(ErrorKind::domain, "index out of range");
    if (fac.shift.group().kind() != GroupKind::integers) throw Error(ErrorKind::domain, "oracle undefined");
    const CirclePoint theta = thetas[fac.function].point();
    const std::int64_t sign = fac.conjugate ? -1 : 1;
    frequency = frequency + sign * theta;
    phase = phase + (sign * fac.shift[0]) * theta;
  }
  if (frequency.raw != 0) return {0.0, 0.0};
  return unit(phase);
}

}  // namespace furst
