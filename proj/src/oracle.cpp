#include "furst/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "furst/error.hpp"

namespace furst {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr u128 kMax = ~u128{0};

/// Closed integer interval [lo, hi] of fixed-point circle positions.
struct Arc {
  u128 lo;
  u128 hi;
};

/// {y : y + shift*alpha in [0, beta)} cut at 0 into at most two arcs.
std::vector<Arc> pulled_back_arc(std::int64_t shift, const systems::Rotation& r) {
  const u128 start = (CirclePoint{} - shift * r.alpha.point()).raw;
  const u128 last = r.beta.point().raw - 1;  // arc covers [start, start + last]
  if (start <= kMax - last) return {{start, start + last}};
  return {{start, kMax}, {0, start + last}};
}

std::vector<Arc> intersect(const std::vector<Arc>& a, const std::vector<Arc>& b) {
  std::vector<Arc> out;
  for (const auto& x : a) {
    for (const auto& y : b) {
      const u128 lo = std::max(x.lo, y.lo);
      const u128 hi = std::min(x.hi, y.hi);
      if (lo <= hi) out.push_back({lo, hi});
    }
  }
  std::sort(out.begin(), out.end(), [](const Arc& p, const Arc& q) { return p.lo < q.lo; });
  return out;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int sample_row(std::mt19937_64& rng, const Eigen::RowVectorXd& row) {
  const double u = uniform01(rng);
  double acc = 0;
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    acc += row(i);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(row.size() - 1);
}

std::vector<std::int64_t> to_integers(const CorrelationQuery& q) {
  std::vector<std::int64_t> out;
  for (const auto& g : q.shifts()) {
    if (g.group().kind() != GroupKind::integers) throw Error(ErrorKind::unsupported, "oracle systems act on Z only");
    out.push_back(g[0]);
  }
  return out;
}

}  // namespace

OracleSystem OracleSystem::rotation(const RealParam& alpha, const RealParam& beta) {
  if (!(alpha.value() > 0 && alpha.value() < 1)) throw Error(ErrorKind::domain, "rotation alpha must lie in (0,1)");
  if (!(beta.value() > 0 && beta.value() <= 1)) throw Error(ErrorKind::domain, "rotation beta must lie in (0,1]");
  if (!alpha.surd()) {
    if (auto q = small_denominator(alpha.point(), 10000)) {
      throw Error(ErrorKind::domain, "rotation alpha is rational (denominator " + std::to_string(*q) + ")");
    }
  }
  return OracleSystem(systems::Rotation{alpha, beta});
}

Eigen::RowVectorXd stationary_distribution(const Eigen::MatrixXd& transition) {
  const Eigen::Index k = transition.rows();
  // (P^T - I) pi^T = 0 with the last equation replaced by sum(pi) = 1.
  Eigen::MatrixXd a = transition.transpose() - Eigen::MatrixXd::Identity(k, k);
  a.row(k - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs(k - 1) = 1;
  const Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  return pi.transpose();
}

OracleSystem OracleSystem::markov(const Eigen::MatrixXd& transition, std::vector<int> accept,
                                  std::optional<Eigen::RowVectorXd> stationary) {
  const Eigen::Index k = transition.rows();
  if (k < 1 || transition.cols() != k) throw Error(ErrorKind::domain, "transition matrix must be square");
  for (Eigen::Index i = 0; i < k; ++i) {
    if ((transition.row(i).array() < 0).any()) throw Error(ErrorKind::domain, "transition entries must be >= 0");
    if (std::abs(transition.row(i).sum() - 1) > 1e-12) throw Error(ErrorKind::domain, "transition rows must sum to 1");
  }
  std::sort(accept.begin(), accept.end());
  accept.erase(std::unique(accept.begin(), accept.end()), accept.end());
  for (int s : accept) {
    if (s < 0 || s >= k) throw Error(ErrorKind::domain, "accept state out of range");
  }
  Eigen::RowVectorXd pi = stationary ? *stationary : stationary_distribution(transition);
  if (pi.size() != k) throw Error(ErrorKind::domain, "stationary vector has wrong length");
  if ((pi.array() <= 0).any()) throw Error(ErrorKind::domain, "stationary entries must be positive");
  if ((pi * transition - pi).cwiseAbs().maxCoeff() > 1e-12) throw Error(ErrorKind::domain, "pi P != pi");
  return OracleSystem(systems::Markov{transition, pi, std::move(accept)});
}

OracleSystem OracleSystem::periodic(std::vector<bool> pattern) {
  if (pattern.empty()) throw Error(ErrorKind::domain, "periodic pattern must be nonempty");
  return OracleSystem(systems::Periodic{std::move(pattern)});
}

std::string OracleSystem::str() const {
  return std::visit(overloaded{
                        [](const systems::Rotation& r) {
                          return "rotation(alpha=" + r.alpha.text() + ", beta=" + r.beta.text() + ")";
                        },
                        [](const systems::Markov& m) {
                          return "markov(" + std::to_string(m.transition.rows()) + " states)";
                        },
                        [](const systems::Periodic& p) {
                          std::string s = "periodic(";
                          for (bool b : p.pattern) s += b ? '1' : '0';
                          return s + ")";
                        },
                    },
                    kind_);
}

MeasureValue exact_measure(const OracleSystem& sys, const std::vector<std::int64_t>& raw_shifts) {
  if (raw_shifts.empty()) throw Error(ErrorKind::domain, "empty shift list");
  std::vector<std::int64_t> shifts = raw_shifts;
  std::sort(shifts.begin(), shifts.end());
  shifts.erase(std::unique(shifts.begin(), shifts.end()), shifts.end());

  return std::visit(
      overloaded{
          [&](const systems::Rotation& r) -> MeasureValue {
            if (r.beta.is_one()) return {1.0, Rational(1)};
            std::vector<Arc> acc{{0, kMax}};
            for (auto h : shifts) acc = intersect(acc, pulled_back_arc(h, r));
            long double length = 0;
            for (const auto& a : acc) length += static_cast<long double>(a.hi - a.lo) + 1.0L;
            return {static_cast<double>(std::ldexp(length, -128)), std::nullopt};
          },
          [&](const systems::Markov& m) -> MeasureValue {
            const Eigen::Index k = m.transition.rows();
            Eigen::RowVectorXd mask = Eigen::RowVectorXd::Zero(k);
            for (int s : m.accept) mask(s) = 1;
            Eigen::RowVectorXd v = m.stationary.cwiseProduct(mask);
            for (std::size_t i = 1; i < shifts.size(); ++i) {
              for (std::int64_t step = shifts[i - 1]; step < shifts[i]; ++step) v = v * m.transition;
              v = v.cwiseProduct(mask);
            }
            return {v.sum(), std::nullopt};
          },
          [&](const systems::Periodic& p) -> MeasureValue {
            const auto period = static_cast<std::int64_t>(p.pattern.size());
            std::int64_t hits = 0;
            for (std::int64_t t = 0; t < period; ++t) {
              bool all = true;
              for (auto h : shifts) all = all && p.pattern[static_cast<std::size_t>(((t + h) % period + period) % period)];
              hits += all;
            }
            const Rational exact(hits, period);
            return {exact.to_double(), exact};
          },
      },
      sys.kind());
}

SetSpec OrbitHandle::set() const { return SetSpec::bitmask(window, "orbit:" + system.str()); }

OrbitHandle orbit_set(const OracleSystem& sys, const OrbitStart& start, std::int64_t lo, std::int64_t hi,
                      std::uint64_t cap) {
  const Box box = Box::interval(lo, hi);
  if (box.size() > cap) throw Error(ErrorKind::cap_exceeded, "window cap exceeded");
  IndicatorWindow w{box, BitVector(static_cast<std::size_t>(box.size()))};
  const std::size_t n = w.bits.size();
  std::visit(overloaded{
                 [&](const systems::Rotation& r) {
                   w = indicator_window(SetSpec::rotation(r.alpha, r.beta, start.point), box);
                 },
                 [&](const systems::Markov& m) {
                   if (n == 0) return;
                   std::mt19937_64 rng(start.seed);
                   std::vector<bool> accepted(static_cast<std::size_t>(m.transition.rows()), false);
                   for (int s : m.accept) accepted[static_cast<std::size_t>(s)] = true;
                   int state = sample_row(rng, m.stationary);
                   for (std::size_t i = 0; i < n; ++i) {
                     if (i > 0) state = sample_row(rng, m.transition.row(state));
                     if (accepted[static_cast<std::size_t>(state)]) w.bits.set(i);
                   }
                 },
                 [&](const systems::Periodic& p) {
                   const auto period = static_cast<std::int64_t>(p.pattern.size());
                   for (std::size_t i = 0; i < n; ++i) {
                     const std::int64_t t = start.residue + lo + static_cast<std::int64_t>(i);
                     if (p.pattern[static_cast<std::size_t>((t % period + period) % period)]) w.bits.set(i);
                   }
                 },
             },
             sys.kind());
  return OrbitHandle{sys, start, std::make_shared<const IndicatorWindow>(std::move(w))};
}

CorrespondenceReport verify_correspondence(const OracleSystem& sys, const OrbitStart& start,
                                           const std::vector<CorrelationQuery>& queries, const FolnerSpec& f,
                                           const Schedule& schedule, const CorrespondenceOptions& opt) {
  if (f.group().kind() != GroupKind::integers) throw Error(ErrorKind::unsupported, "oracle systems act on Z only");
  validate_schedule(schedule);
  std::vector<GroupElement> all;
  for (const auto& q : queries) all.insert(all.end(), q.shifts().begin(), q.shifts().end());
  const Box window = query_window(f, schedule, all);
  const OrbitHandle orbit = orbit_set(sys, start, window.lo[0], window.hi[0], opt.window_cap);
  const IndicatorWindow& w = *orbit.window;

  CorrespondenceReport report;
  report.pass = true;
  report.note = "full schedule used: oracle systems are uniquely ergodic or mixing";
  const std::uint64_t final_n = schedule.back();
  for (const auto& q : queries) {
    CorrespondenceQuery cq;
    cq.shifts = to_integers(q);
    cq.measure = exact_measure(sys, cq.shifts);
    for (const auto& row : density_rows(w, q, f, schedule)) {
      cq.rows.push_back({row.n, row.ratio, std::abs(row.ratio.to_double() - cq.measure.value)});
    }
    cq.final_deviation = cq.rows.back().deviation;

    std::visit(overloaded{
                   [&](const systems::Rotation&) {
                     cq.tolerance = opt.rotation_tolerance;
                     cq.pass = cq.final_deviation <= cq.tolerance;
                   },
                   [&](const systems::Markov&) {
                     // Batch means over consecutive blocks of F_N.
                     const Box fn = f.set_box(final_n);
                     const std::size_t batches = std::max<std::size_t>(2, std::min<std::size_t>(opt.batches, final_n));
                     std::vector<double> means;
                     std::vector<BitRun> runs(cq.shifts.size());
                     const std::uint64_t base_len = final_n / batches;
                     for (std::size_t b = 0; b < batches; ++b) {
                       const std::uint64_t begin = b * base_len;
                       const std::uint64_t len = b + 1 == batches ? final_n - begin : base_len;
                       for (std::size_t i = 0; i < runs.size(); ++i) {
                         const std::int64_t first = fn.lo[0] + static_cast<std::int64_t>(begin) + cq.shifts[i];
                         runs[i] = BitRun{&w.bits, static_cast<std::size_t>(first - w.box.lo[0]), false};
                       }
                       means.push_back(static_cast<double>(count_joint(runs, len)) / static_cast<double>(len));
                     }
                     double mean = 0;
                     for (double m : means) mean += m;
                     mean /= static_cast<double>(means.size());
                     double var = 0;
                     for (double m : means) var += (m - mean) * (m - mean);
                     var /= static_cast<double>(means.size() - 1);
                     cq.sigma = std::sqrt(var / static_cast<double>(means.size()));
                     cq.tolerance = std::max(opt.markov_sigmas * cq.sigma, 1.0 / static_cast<double>(final_n));
                     cq.pass = cq.final_deviation <= cq.tolerance;
                   },
                   [&](const systems::Periodic& p) {
                     const auto period = p.pattern.size();
                     if (final_n % period == 0) {
                       cq.tolerance = 0;
                       cq.pass = cq.rows.back().density == *cq.measure.exact;
                     } else {
                       cq.tolerance = static_cast<double>(period) / static_cast<double>(final_n);
                       cq.pass = cq.final_deviation <= cq.tolerance;
                     }
                   },
               },
               sys.kind());
    report.pass = report.pass && cq.pass;
    report.queries.push_back(std::move(cq));
  }
  return report;
}

}  // namespace furst
