// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Each criterion recomputes its expected values with a direct, independent
// method (membership loops, closed forms) before comparing.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <bit>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include "furst/correlation_kernel.hpp"
#include "furst/cylinder.hpp"
#include "furst/error.hpp"
#include "furst/moments.hpp"
#include "furst/oracle.hpp"
#include "furst/spectrum.hpp"

using namespace furst;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const GroupSpec Z = GroupSpec::integers();
const GroupSpec Z2 = GroupSpec::lattice(2);
const GroupSpec H3 = GroupSpec::heisenberg();

GroupElement pick(std::mt19937_64& rng, const std::vector<GroupElement>& xs) { return xs[rng() % xs.size()]; }

SetSpec random_bitmask(std::mt19937_64& rng, const Box& box) {
  IndicatorWindow w{box, BitVector(static_cast<std::size_t>(box.size()))};
  const double p = std::uniform_real_distribution<>(0.2, 0.8)(rng);
  std::bernoulli_distribution coin(p);
  for (std::size_t i = 0; i < w.bits.size(); ++i) w.bits.set(i, coin(rng));
  return SetSpec::bitmask(std::move(w));
}

// A random instance: group, Folner sequence, N, and a set defined wherever the
// given shifts can reach.
struct Instance {
  FolnerSpec f = FolnerSpec::interval(1);
  std::uint64_t n = 1;
  std::vector<GroupElement> ball;
};

Instance random_instance(std::mt19937_64& rng, int which, std::uint64_t h3_max) {
  Instance in;
  auto coord = [&](std::int64_t r) { return std::uniform_int_distribution<std::int64_t>(-r, r)(rng); };
  switch (which % 3) {
    case 0:
      in.f = FolnerSpec::interval(coord(20));
      in.n = 1 + rng() % 1024;
      in.ball = support_ball(Z, 4);
      break;
    case 1:
      in.f = FolnerSpec::box(GroupElement(Z2, {coord(5), coord(5)}));
      in.n = 1 + rng() % 40;
      in.ball = support_ball(Z2, 2);
      break;
    default:
      in.f = FolnerSpec::heisenberg_box();
      in.n = 1 + rng() % h3_max;
      in.ball = word_ball(H3, 2);
      break;
  }
  return in;
}

SetSpec random_set(std::mt19937_64& rng, const Instance& in, const std::vector<GroupElement>& shifts) {
  const auto& g = in.f.group();
  switch (rng() % 3) {
    case 0:
      if (g == Z) return SetSpec::rotation(RealParam::parse("golden"), RealParam::parse("0.4"), RealParam::parse("0.1"));
      return SetSpec::componentwise(g, Coords{}, [&] {
        Coords m{};
        for (std::size_t i = 0; i < g.rank(); ++i) m[i] = 1 + static_cast<std::int64_t>(rng() % 3);
        return m;
      }());
    case 1:
      if (g == Z) return SetSpec::dyadic_blocks();
      [[fallthrough]];
    default:
      return random_bitmask(rng, shifted_hull(in.f, in.n, shifts));
  }
}

CylinderSpec random_cylinder(std::mt19937_64& rng, const std::vector<GroupElement>& ball, std::size_t max_depth) {
  CylinderSpec c;
  const std::size_t depth = rng() % (max_depth + 1);
  while (c.constraints().size() < depth) {
    const auto h = pick(rng, ball);
    if (!c.constrains(h)) c = c.with(h, rng() & 1u);
  }
  return c;
}

// |{x in F_N : 1_E(h_i x) = eps_i}| by membership tests.
std::uint64_t naive_cylinder(const SetSpec& e, const CylinderSpec& c, const FolnerSpec& f, std::uint64_t n) {
  std::uint64_t count = 0;
  for_each_element(f.set_box(n), [&](const GroupElement& x) {
    bool ok = true;
    for (const auto& [h, eps] : c.constraints()) ok = ok && e.contains(mul(h, x)) == eps;
    count += ok;
  });
  return count;
}

std::vector<GroupElement> cylinder_support(const CylinderSpec& c) {
  std::vector<GroupElement> s;
  for (const auto& [h, eps] : c.constraints()) s.push_back(h);
  return s;
}

// 1. Rotation coding: 129 queries, densities at 10^6 against exact measures.
Outcome correspondence_identity() {
  const auto start = Clock::now();
  const auto golden = RealParam::parse("golden");
  const auto half = RealParam::parse("0.5");
  const auto set = SetSpec::rotation(golden, half, RealParam::parse("0"));
  const auto sys = OracleSystem::rotation(golden, half);
  const auto f = FolnerSpec::interval(1);
  const std::uint64_t n = 1000000;
  const auto window = indicator_window(set, Box::interval(1, static_cast<std::int64_t>(n) + 8));

  std::vector<std::vector<std::int64_t>> queries;
  for (std::int64_t a = 0; a <= 8; ++a) {
    queries.push_back({a});
    for (std::int64_t b = a + 1; b <= 8; ++b) {
      queries.push_back({a, b});
      for (std::int64_t c = b + 1; c <= 8; ++c) queries.push_back({a, b, c});
    }
  }
  double worst = 0;
  for (const auto& q : queries) {
    std::vector<GroupElement> shifts;
    for (auto s : q) shifts.push_back(GroupElement::integer(s));
    const double d = density_at(window, CorrelationQuery(shifts), f, n).to_double();
    worst = std::max(worst, std::abs(d - exact_measure(sys, q).value));
  }
  const double t = seconds_since(start);
  return {queries.size() == 129 && worst <= 5e-3 && t < 30,
          fmt("%zu queries, max deviation %.2e (tol 5e-3), %.2f s (limit 30 s)", queries.size(), worst, t)};
}

// 2. nu(C) = nu(C + {h->0}) + nu(C + {h->1}), exactly.
Outcome additivity() {
  std::mt19937_64 rng(2002);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto in = random_instance(rng, i, 8);
    const auto c = random_cylinder(rng, in.ball, 3);
    GroupElement h = pick(rng, in.ball);
    while (c.constrains(h)) h = pick(rng, in.ball);
    auto reach = cylinder_support(c);
    reach.push_back(h);
    const auto e = random_set(rng, in, reach);
    const auto r = additivity_check(e, c, h, in.f, in.n);
    const auto whole = naive_cylinder(e, c, in.f, in.n);
    const auto split = naive_cylinder(e, c.with(h, false), in.f, in.n) + naive_cylinder(e, c.with(h, true), in.f, in.n);
    if (!r.holds || r.residual != Rational(0) || whole != split) ++bad;
  }
  return {bad == 0, fmt("1000 instances on Z, Z^2, H3; %d with nonzero residual", bad)};
}

// 3. |nu_N(C.g) - nu_N(C)| <= |F_N ^ gF_N| / |F_N|, exactly.
Outcome invariance_bound() {
  std::mt19937_64 rng(3003);
  int bad = 0, h3 = 0;
  std::uint64_t h3_largest = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto in = random_instance(rng, i, 32);
    const auto c = random_cylinder(rng, in.ball, 3);
    const auto g = pick(rng, in.ball);
    auto reach = cylinder_support(c);
    for (const auto& [hc, eps] : c.constraints()) reach.push_back(mul(hc, g));
    const auto e = random_set(rng, in, reach);
    Rational defect;
    try {
      defect = invariance_defect(e, c, g, in.f, in.n);
    } catch (const Error&) {
      ++bad;
      continue;
    }
    const auto fd = folner_defect(in.f, in.n, g);
    const auto size = static_cast<std::int64_t>(fd.size);
    const auto a = static_cast<std::int64_t>(naive_cylinder(e, c.translate(g), in.f, in.n));
    const auto b = static_cast<std::int64_t>(naive_cylinder(e, c, in.f, in.n));
    if (defect != Rational(std::abs(a - b), size) || defect > fd.ratio()) ++bad;
    if (in.f.group() == H3) {
      ++h3;
      h3_largest = std::max(h3_largest, in.n);
    }
  }
  return {bad == 0 && h3 > 0,
          fmt("1000 instances (%d on H3, N up to %llu); %d violations", h3,
              static_cast<unsigned long long>(h3_largest), bad)};
}

// 4. FFT pair correlations against direct counting.
Outcome kernel_equivalence() {
  std::mt19937_64 rng(4004);
  int bad = 0, unverified = 0;
  for (int i = 0; i < 1000; ++i) {
    const bool planar = i % 4 == 3;
    const auto f = planar ? FolnerSpec::box(GroupElement(Z2, {0, 0})) : FolnerSpec::interval(1);
    const std::uint64_t n = planar ? 1 + rng() % 64 : 1 + rng() % 4096;
    const std::int64_t radius = static_cast<std::int64_t>(rng() % (planar ? 6 : 17));
    const auto ball = support_ball(f.group(), radius);
    const auto e = random_bitmask(rng, shifted_hull(f, n, ball));
    const auto fft = pair_correlation_fft(e, f, n, radius, rng());
    if (!fft.fft_verified) ++unverified;
    std::map<GroupElement, std::uint64_t> got(fft.counts.begin(), fft.counts.end());
    bool ok = got.size() == ball.size();
    const auto box = f.set_box(n);
    for (const auto& s : ball) {
      std::uint64_t count = 0;
      for_each_element(box, [&](const GroupElement& h) { count += e.contains(h) && e.contains(mul(s, h)); });
      ok = ok && got.count(s) && got[s] == count;
    }
    bad += !ok;
  }
  return {bad == 0 && unverified == 0,
          fmt("1000 instances, N <= 4096 elements; %d mismatches, %d FFT fallbacks", bad, unverified)};
}

// 5. Spectrum comparison at depth 3, radius 8.
Outcome spectrum_criterion() {
  const auto f = FolnerSpec::interval(1);
  const Schedule sch{1536, 3072, 6144, 12288};
  const auto same = compare_pairs({SetSpec::congruence(0, 2), f}, {SetSpec::congruence(1, 2), f}, 3, 8, sch, 1e-9);
  const auto diff = compare_pairs({SetSpec::congruence(0, 2), f}, {SetSpec::congruence(0, 3), f}, 3, 8, sch, 1e-9);
  const bool ok = same.verdict == Verdict::consistent && same.max_discrepancy == Rational(0) &&
                  same.inconclusive.empty() && diff.verdict == Verdict::distinguished &&
                  diff.witness_discrepancy == Rational(1, 6) && diff.witness == ShiftTuple{GroupElement::integer(0)};
  return {ok, "evens/odds " + to_string(same.verdict) + " (max " + same.max_discrepancy.str() + ", " +
                  std::to_string(same.compared) + " tuples); evens/threes " + to_string(diff.verdict) + " witness " +
                  tuple_str(diff.witness) + " = " + diff.witness_discrepancy.str()};
}

// 6. Upper density of the dyadic blocks along 2^4 .. 2^24.
Outcome dyadic_blocks() {
  const auto f = FolnerSpec::interval(1);
  const auto sch = dyadic_schedule(4, 24);
  // Direct count over [1, 2^24] with the defining intervals [4^j, 2*4^j).
  std::vector<Rational> brute;
  {
    std::uint64_t count = 0, next_block = 1;
    bool inside = false;
    std::size_t k = 0;
    for (std::uint64_t m = 1; m <= sch.back(); ++m) {
      if (m == next_block) {
        inside = !inside;
        next_block *= 2;
      }
      count += inside;
      if (m == sch[k]) {
        brute.emplace_back(static_cast<std::int64_t>(count), static_cast<std::int64_t>(m));
        ++k;
      }
    }
  }
  const Rational brute_max = *std::max_element(brute.begin(), brute.end());
  const bool oracle_ok = std::abs(brute_max.to_double() - 2.0 / 3) <= 1e-3;

  const auto ud = upper_density(SetSpec::dyadic_blocks(), f, sch, 1e-3);
  bool rows_ok = ud.rows.size() == brute.size();
  for (std::size_t i = 0; rows_ok && i < brute.size(); ++i) rows_ok = ud.rows[i].ratio == brute[i];
  bool attain_odd = !ud.attaining.empty() && ud.attaining.back() == (std::uint64_t{1} << 23);
  for (auto n : ud.attaining) attain_odd = attain_odd && std::countr_zero(n) % 2 == 1;

  const auto sub = extract_subsequence(SetSpec::dyadic_blocks(), {CorrelationQuery::integers({0})}, f, sch, 0.05);
  std::vector<std::uint64_t> odd;
  for (int k = 5; k <= 23; k += 2) odd.push_back(std::uint64_t{1} << k);
  const bool sub_ok = sub.indices == odd;

  const double est = ud.estimate.to_double();
  return {oracle_ok && rows_ok && std::abs(est - 2.0 / 3) <= 1e-3 && ud.estimate == brute_max && attain_odd && sub_ok,
          fmt("estimate %.6f (brute force %.6f), %zu attaining N all odd powers: %s, subsequence = odd powers 2^5..2^23: %s",
              est, brute_max.to_double(), ud.attaining.size(), attain_odd ? "yes" : "no", sub_ok ? "yes" : "no")};
}

// 7. Exponential moments at 10^6 against the closed form; linear normalization.
Outcome exponential_moments() {
  std::mt19937_64 rng(7007);
  const auto scheme = AveragingScheme::uniform(FolnerSpec::interval(1));
  auto theta = [&] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15f", std::uniform_real_distribution<>(0, 1)(rng));
    return RealParam::parse(buf);
  };
  double worst = 0;
  int cancelling = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<RealParam> thetas;
    std::vector<MomentFactor> fs;
    while (true) {
      thetas.clear();
      fs.clear();
      const int r = 1 + static_cast<int>(rng() % 3);
      long double big = 0;
      for (int j = 0; j < r; ++j) {
        thetas.push_back(theta());
        const bool conj = rng() & 1u;
        fs.push_back({static_cast<std::size_t>(j), conj, GroupElement::integer(static_cast<std::int64_t>(rng() % 17) - 8)});
        big += (conj ? -1 : 1) * thetas.back().value();
      }
      if (i % 3 == 0) break;  // cancelling pair appended below
      const long double frac = big - std::floor(big);
      if (std::min(frac, 1 - frac) >= 0.01L) break;
    }
    if (i % 3 == 0) {
      thetas.push_back(thetas[0]);
      fs.push_back({thetas.size() - 1, !fs[0].conjugate, GroupElement::integer(static_cast<std::int64_t>(rng() % 17) - 8)});
      ++cancelling;
    }
    std::vector<FunctionSpec> fam;
    for (const auto& t : thetas) fam.push_back(FunctionSpec::exponential(t));
    const MomentQuery q(fs);
    worst = std::max(worst, std::abs(weighted_moment(fam, q, scheme, 1000000).value - exponential_oracle(thetas, q, scheme)));
  }
  // Closed-form check: sum_{n<=N} n / (N (N+1)/2) = 1 at every N.
  const AveragingScheme lin{FolnerSpec::interval(1), weights::Linear{}, normalizers::Mean{}};
  int inexact = 0;
  for (std::uint64_t n = 1; n <= 5000; ++n) {
    const auto v = scheme_normalization(lin, n);
    inexact += !(v.exact && *v.exact == Rational(1));
  }
  for (const auto n : dyadic_schedule(13, 24)) {
    const auto v = scheme_normalization(lin, n);
    inexact += !(v.exact && *v.exact == Rational(1));
  }
  return {worst <= 1e-3 && inexact == 0,
          fmt("100 instances (%d with cancelling pairs), max |moment - oracle| %.2e (tol 1e-3); linear normalization "
              "exactly 1 at %d of %d N",
              cancelling, worst, 5000 + 12 - inexact, 5000 + 12)};
}

// 8. Markov orbit, pair gaps up to 4, 4 sigma band, reproducible.
Outcome markov_statistical() {
  Eigen::MatrixXd p(2, 2);
  p << 0.7, 0.3, 0.4, 0.6;
  const auto sys = OracleSystem::markov(p, {0});
  OrbitStart start;
  start.seed = 42;
  const auto f = FolnerSpec::interval(1);
  std::vector<CorrelationQuery> qs;
  for (std::int64_t gap = 0; gap <= 4; ++gap) qs.push_back(gap == 0 ? CorrelationQuery::integers({0})
                                                                     : CorrelationQuery::integers({0, gap}));
  const Schedule sch{100000};
  const auto a = verify_correspondence(sys, start, qs, f, sch);
  const auto b = verify_correspondence(sys, start, qs, f, sch);
  bool identical = a.queries.size() == b.queries.size();
  double worst_sigmas = 0;
  for (std::size_t i = 0; identical && i < a.queries.size(); ++i) {
    identical = a.queries[i].rows.back().density == b.queries[i].rows.back().density &&
                a.queries[i].sigma == b.queries[i].sigma;
    worst_sigmas = std::max(worst_sigmas, a.queries[i].final_deviation / a.queries[i].sigma);
  }
  const auto o1 = orbit_set(sys, start, 0, 100000);
  const auto o2 = orbit_set(sys, start, 0, 100000);
  identical = identical && o1.window->bits == o2.window->bits;
  return {a.pass && identical,
          fmt("5 queries (gaps 0..4), worst deviation %.2f sigma (band 4), re-run bit-identical: %s", worst_sigmas,
              identical ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"AC1 correspondence identity", correspondence_identity},
      {"AC2 additivity", additivity},
      {"AC3 invariance defect bound", invariance_bound},
      {"AC4 kernel equivalence", kernel_equivalence},
      {"AC5 spectrum criterion", spectrum_criterion},
      {"AC6 dyadic blocks", dyadic_blocks},
      {"AC7 exponential moments", exponential_moments},
      {"AC8 Markov orbit", markov_statistical},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s: %s - %s [%.1f s]\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
