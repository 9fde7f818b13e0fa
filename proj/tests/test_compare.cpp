#include <doctest.h>

#include <random>
#include <set>

#include "furst/error.hpp"
#include "furst/oracle.hpp"
#include "furst/spectrum.hpp"

using namespace furst;

namespace {

const GroupSpec Z = GroupSpec::integers();
const auto I1 = FolnerSpec::interval(1);
const auto golden = RealParam::parse("golden");
const auto half = RealParam::parse("0.5");

GroupElement z(std::int64_t n) { return GroupElement::integer(n); }

ShiftTuple zt(std::initializer_list<std::int64_t> xs) {
  ShiftTuple t;
  for (auto x : xs) t.push_back(z(x));
  return t;
}

SetSpec random_set(std::mt19937_64& rng, const Box& box) {
  IndicatorWindow w{box, BitVector(static_cast<std::size_t>(box.size()))};
  for (std::size_t i = 0; i < w.bits.size(); ++i) w.bits.set(i, rng() & 1u);
  return SetSpec::bitmask(std::move(w));
}

// |{h in F_N : g_i h in E for all i}| by direct membership tests.
std::uint64_t naive_count(const SetSpec& e, const ShiftTuple& t, const FolnerSpec& f, std::uint64_t n) {
  std::uint64_t c = 0;
  for (const auto& h : folner_set(f, n)) {
    bool all = true;
    for (const auto& g : t) all = all && e.contains(mul(g, h));
    c += all;
  }
  return c;
}

}  // namespace

TEST_SUITE("iso-compare") {
  TEST_CASE("evens spectrum") {
    const auto s = correlation_spectrum(SetSpec::congruence(0, 2), I1, 2, 2, {1000});
    // 5 singletons and 10 pairs from {-2..2}.
    CHECK(s.entries.size() == 15);
    CHECK(s.at(zt({0})).density == Rational(1, 2));
    CHECK(s.at(zt({0, 1})).density == Rational(0));
    CHECK(s.at(zt({0, 2})).density == Rational(1, 2));
    CHECK(s.at(zt({1})).density == Rational(1, 2));
    CHECK(s.at(zt({-2, 1})).density == Rational(0));
    for (const auto& [t, e] : s.entries) CHECK(e.oscillation == Rational(0));
  }

  TEST_CASE("evens and odds have identical spectra") {
    const Schedule sch{10, 100, 1000};
    const auto a = correlation_spectrum(SetSpec::congruence(0, 2), I1, 3, 4, sch);
    const auto b = correlation_spectrum(SetSpec::congruence(1, 2), I1, 3, 4, sch);
    for (const auto& [t, e] : a.entries) CHECK(e.density == b.at(t).density);
    const auto c = compare_spectra(a, b, 1e-9);
    CHECK(c.verdict == Verdict::consistent);
    CHECK(c.max_discrepancy == Rational(0));
  }

  TEST_CASE("spectrum against direct counting") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
      const auto e = random_set(rng, Box::interval(-10, 80));
      const auto s = correlation_spectrum(e, I1, 3, 3, {20, 50, 64});
      CHECK(s.entries.size() == 7 + 21 + 35);
      for (const auto& [t, entry] : s.entries) {
        REQUIRE(entry.counts.size() == 3);
        REQUIRE(entry.counts[0] == naive_count(e, t, I1, 20));
        REQUIRE(entry.counts[2] == naive_count(e, t, I1, 64));
        REQUIRE(entry.density == Rational(static_cast<std::int64_t>(entry.counts[2]), 64));
      }
    }
    const GroupSpec H3 = GroupSpec::heisenberg();
    const auto hb = FolnerSpec::heisenberg_box();
    const auto e = random_set(rng, Box{H3, {-3, -3, -60}, {10, 10, 120}});
    const auto s = correlation_spectrum(e, hb, 2, 1, {4, 6});
    for (const auto& [t, entry] : s.entries) REQUIRE(entry.counts[1] == naive_count(e, t, hb, 6));
  }

  TEST_CASE("rotation spectrum matches the oracle") {
    const auto s = correlation_spectrum(SetSpec::rotation(golden, half, RealParam::parse("0")), I1, 3, 3, {1000000});
    const auto sys = OracleSystem::rotation(golden, half);
    for (const auto& [t, e] : s.entries) {
      std::vector<std::int64_t> shifts;
      for (const auto& g : t) shifts.push_back(g[0]);
      CHECK(std::abs(e.density.to_double() - exact_measure(sys, shifts).value) <= 5e-3);
    }
  }

  TEST_CASE("canonicalization") {
    CHECK(canonical_tuple(zt({2, 0, 2, -1})) == zt({-1, 0, 2}));
    const auto s = correlation_spectrum(SetSpec::congruence(1, 3), I1, 3, 2, {999});
    CHECK(s.at(zt({2, 0})).density == s.at(zt({0, 2})).density);
    CHECK(s.at(zt({0, 2, 0, 2})).density == s.at(zt({0, 2})).density);
    CHECK(s.at(zt({1, -1, 1})).density == s.at(zt({-1, 1})).density);
    CHECK_THROWS_AS(s.at(zt({5})), Error);
  }

  TEST_CASE("evens vs multiples of three") {
    Schedule sch;
    for (std::uint64_t n = 6; n <= 6000; n *= 10) sch.push_back(n);
    const auto c = compare_pairs({SetSpec::congruence(0, 2), I1}, {SetSpec::congruence(0, 3), I1}, 3, 8, sch, 1e-9);
    CHECK(c.verdict == Verdict::distinguished);
    CHECK(c.witness == zt({0}));
    CHECK(c.witness_discrepancy == Rational(1, 6));
    CHECK(c.max_discrepancy == Rational(1, 2));
    CHECK(c.inconclusive.empty());
  }

  TEST_CASE("two generic points of one rotation") {
    const auto c = compare_pairs({SetSpec::rotation(golden, half, RealParam::parse("0")), I1},
                                 {SetSpec::rotation(golden, half, RealParam::parse("0.3")), I1}, 2, 2, {1000000}, 1e-2);
    CHECK(c.verdict == Verdict::consistent);
    CHECK(c.max_discrepancy.to_double() <= 1e-2);
  }

  TEST_CASE("orbit pulls from one rotation are consistent") {
    const auto sys = OracleSystem::rotation(golden, RealParam::parse("0.3"));
    const auto a = orbit_set(sys, {RealParam::parse("0.1"), 0, 0}, -10, 200010);
    const auto b = orbit_set(sys, {RealParam::parse("0.65"), 0, 0}, -10, 200010);
    // Each side is within the verify bound of the oracle, so the pair is within twice that.
    const double eps = 2 * CorrespondenceOptions{}.rotation_tolerance;
    const auto c = compare_pairs({a.set(), I1}, {b.set(), I1}, 2, 3, {200000}, eps);
    CHECK(c.verdict == Verdict::consistent);
  }

  TEST_CASE("reflexivity and symmetry") {
    std::mt19937_64 rng(3);
    const Schedule sch{100, 200, 300};
    for (int trial = 0; trial < 10; ++trial) {
      const SetWithFolner p{random_set(rng, Box::interval(-5, 310)), I1};
      const SetWithFolner q{random_set(rng, Box::interval(-5, 310)), I1};
      const auto self = compare_pairs(p, p, 2, 3, sch, 0.5);
      CHECK(self.verdict == Verdict::consistent);
      CHECK(self.max_discrepancy == Rational(0));
      const auto pq = compare_pairs(p, q, 2, 3, sch, 0.5);
      const auto qp = compare_pairs(q, p, 2, 3, sch, 0.5);
      CHECK(pq.max_discrepancy == qp.max_discrepancy);
      CHECK(pq.verdict == qp.verdict);
    }
  }

  TEST_CASE("oscillating tuples are inconclusive") {
    const auto d = SetWithFolner{SetSpec::dyadic_blocks(), I1};
    const auto c = compare_pairs(d, d, 1, 1, dyadic_schedule(4, 12), 0.05);
    CHECK(c.verdict == Verdict::inconclusive);
    CHECK(c.inconclusive.size() == 3);
    CHECK(c.compared == 0);
  }

  TEST_CASE("errors") {
    const auto a = correlation_spectrum(SetSpec::congruence(0, 2), I1, 1, 1, {10});
    const auto b = correlation_spectrum(SetSpec::congruence(0, 2), I1, 2, 1, {10});
    CHECK_THROWS_AS(compare_spectra(a, b, 0.1), Error);
    CHECK_THROWS_AS(compare_spectra(a, a, 0), Error);
    try {
      correlation_spectrum(SetSpec::congruence(0, 2), I1, 3, 8, {10}, 100);
      FAIL("cap ignored");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::cap_exceeded);
    }
  }

  TEST_CASE("CSV export") {
    const auto s = correlation_spectrum(SetSpec::congruence(0, 2), I1, 2, 1, {10});
    const auto csv = spectrum_csv(s);
    CHECK(csv.rfind("tuple,numerator,denominator,oscillation_numerator,oscillation_denominator\n", 0) == 0);
    CHECK(csv.find("\"(-1 1)\",1,2,0,1\n") != std::string::npos);
    CHECK(csv.find("\"(0 1)\",0,1,0,1\n") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 6);
  }
}
