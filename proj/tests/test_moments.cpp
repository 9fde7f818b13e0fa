#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "furst/error.hpp"
#include "furst/moments.hpp"

using namespace furst;
using cd = std::complex<double>;

namespace {

const GroupSpec Z = GroupSpec::integers();
const auto I1 = FolnerSpec::interval(1);
const auto uniform = AveragingScheme::uniform(I1);
constexpr double two_pi = 2 * std::numbers::pi;

GroupElement z(std::int64_t n) { return GroupElement::integer(n); }

MomentFactor fac(std::size_t i, bool conj, std::int64_t shift) { return {i, conj, z(shift)}; }

std::string error_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "no error";
}

RealParam random_theta(std::mt19937_64& rng) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15f", std::uniform_real_distribution<>(0, 1)(rng));
  return RealParam::parse(buf);
}

}  // namespace

TEST_SUITE("weighted-moments") {
  TEST_CASE("normalization examples") {
    for (std::uint64_t n : {1, 7, 1000, 123457}) {
      const auto u = scheme_normalization(uniform, n);
      REQUIRE(u.exact);
      CHECK(*u.exact == Rational(1));
      const AveragingScheme two{I1, weights::Constant{2}, normalizers::Constant{2}};
      CHECK(*scheme_normalization(two, n).exact == Rational(1));
      const AveragingScheme lin{I1, weights::Linear{}, normalizers::Mean{}};
      const auto l = scheme_normalization(lin, n);
      REQUIRE(l.exact);
      CHECK(*l.exact == Rational(1));
    }
    const auto h = scheme_normalization(AveragingScheme::uniform(FolnerSpec::heisenberg_box()), 5);
    CHECK(*h.exact == Rational(1));
    // Off-center linear weights: mean of [11, 10+N] is 10 + (N+1)/2.
    const AveragingScheme shifted{FolnerSpec::interval(11), weights::Linear{}, normalizers::Mean{}};
    CHECK(*scheme_normalization(shifted, 100).exact == Rational(1));
  }

  TEST_CASE("normalization against direct sums") {
    const AveragingScheme logs{I1, weights::Logarithmic{}, normalizers::LogOverN{}};
    for (std::uint64_t n : {10, 1000, 1000000}) {
      long double h = 0;
      for (std::uint64_t k = n; k >= 1; --k) h += 1.0L / static_cast<long double>(k);
      const double want = static_cast<double>(h / std::log(static_cast<long double>(n)));
      CHECK(scheme_normalization(logs, n).value == doctest::Approx(want).epsilon(1e-13));
    }
    const GroupSpec Z2 = GroupSpec::lattice(2);
    const AveragingScheme decay{FolnerSpec::box(GroupElement(Z2, {-3, -3})), weights::ExponentialDecay{0.25},
                                normalizers::Table{{{7, 0.5}}}};
    double sum = 0;
    for (int a = -3; a <= 3; ++a) {
      for (int b = -3; b <= 3; ++b) sum += std::exp(-0.25 * (std::abs(a) + std::abs(b)));
    }
    CHECK(scheme_normalization(decay, 7).value == doctest::Approx(sum / (0.5 * 49)).epsilon(1e-14));
    CHECK(error_of([&] { scheme_normalization(decay, 8); }) == "normalizer table has no entry for N=8");
  }

  TEST_CASE("degenerate normalizer") {
    const AveragingScheme zero{I1, weights::Constant{1}, normalizers::Constant{0}};
    CHECK(error_of([&] { scheme_normalization(zero, 10); }) == "degenerate normalizer");
    const std::vector<FunctionSpec> fam{FunctionSpec::constant(Z, 1)};
    CHECK(error_of([&] { weighted_moment(fam, MomentQuery({fac(0, false, 0)}), zero, 10); }) ==
          "degenerate normalizer");
  }

  TEST_CASE("indicator moments reduce to densities") {
    const std::vector<FunctionSpec> evens{FunctionSpec::indicator(SetSpec::congruence(0, 2))};
    const auto m = weighted_moment(evens, MomentQuery({fac(0, false, 0)}), uniform, 1000);
    REQUIRE(m.exact);
    CHECK(*m.exact == Rational(1, 2));
    CHECK(m.value == cd(0.5, 0));

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
      IndicatorWindow w{Box::interval(-20, 600), BitVector(621)};
      for (std::size_t i = 0; i < 621; ++i) w.bits.set(i, rng() % 3 == 0);
      const auto set = SetSpec::bitmask(std::move(w));
      std::vector<MomentFactor> fs;
      std::vector<GroupElement> shifts;
      for (int i = 0, r = 1 + static_cast<int>(rng() % 4); i < r; ++i) {
        const auto s = static_cast<std::int64_t>(rng() % 41) - 20;
        fs.push_back(fac(0, false, s));
        shifts.push_back(z(s));
      }
      const std::uint64_t n = 1 + rng() % 580;
      const auto mo = weighted_moment({FunctionSpec::indicator(set)}, MomentQuery(fs), uniform, n);
      REQUIRE(mo.exact);
      REQUIRE(*mo.exact == density_at(set, CorrelationQuery(shifts), I1, n));
    }
  }

  TEST_CASE("exponential moments") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
      const auto theta = random_theta(rng);
      const std::int64_t h = static_cast<std::int64_t>(rng() % 17) - 8;
      const std::vector<FunctionSpec> fam{FunctionSpec::exponential(theta)};
      const auto m = weighted_moment(fam, MomentQuery({fac(0, false, 0), fac(0, true, h)}), uniform, 1000000);
      const cd want = std::polar(1.0, -two_pi * static_cast<double>(theta.value()) * static_cast<double>(h));
      CHECK(std::abs(m.value - want) <= 1e-3);
    }
    const auto golden = RealParam::parse("golden");
    const double t = static_cast<double>(golden.value());
    for (std::uint64_t n : {1000, 1000000}) {
      const auto m = weighted_moment({FunctionSpec::exponential(golden)}, MomentQuery({fac(0, false, 0)}), uniform, n);
      CHECK(std::abs(m.value) <= 2 / (static_cast<double>(n) * std::abs(1.0 - std::polar(1.0, two_pi * t))));
    }
  }

  TEST_CASE("modulus bound and conjugation symmetry") {
    std::mt19937_64 rng(29);
    const std::vector<AveragingScheme> schemes{
        uniform,
        {I1, weights::Linear{}, normalizers::Mean{}},
        {I1, weights::Logarithmic{}, normalizers::LogOverN{}},
        {FolnerSpec::interval(-50), weights::ExponentialDecay{0.01}, normalizers::Constant{0.3}},
    };
    for (int trial = 0; trial < 60; ++trial) {
      const std::vector<FunctionSpec> fam{
          FunctionSpec::exponential(random_theta(rng)),
          FunctionSpec::random_disk(Z, rng()),
          FunctionSpec::indicator(SetSpec::congruence(0, 3)),
          FunctionSpec::product({FunctionSpec::random_disk(Z, rng()), FunctionSpec::constant(Z, cd(0.6, -0.8))}),
      };
      std::vector<MomentFactor> fs, conj_fs;
      for (int i = 0, r = 1 + static_cast<int>(rng() % 4); i < r; ++i) {
        fs.push_back(fac(rng() % fam.size(), rng() & 1u, static_cast<std::int64_t>(rng() % 11) - 5));
        conj_fs.push_back(fs.back());
        conj_fs.back().conjugate = !fs.back().conjugate;
      }
      const auto& s = schemes[static_cast<std::size_t>(trial) % schemes.size()];
      const std::uint64_t n = 100 + rng() % 5000;
      const auto m = weighted_moment(fam, MomentQuery(fs), s, n);
      CHECK(std::abs(m.value) <= scheme_normalization(s, n).value * (1 + 1e-12));
      const auto c = weighted_moment(fam, MomentQuery(conj_fs), s, n);
      CHECK(c.value == std::conj(m.value));
    }
  }

  TEST_CASE("exponential oracle") {
    const auto theta = RealParam::parse("0.3");
    CHECK(std::abs(exponential_oracle({theta}, MomentQuery({fac(0, false, 0), fac(0, true, 5)}), uniform) -
                   std::polar(1.0, -two_pi * 1.5)) < 1e-15);
    CHECK(exponential_oracle({RealParam::parse("1")}, MomentQuery({fac(0, false, 0)}), uniform) == cd(1, 0));
    CHECK(exponential_oracle({RealParam::parse("golden")}, MomentQuery({fac(0, false, 0)}), uniform) == cd(0, 0));
    // 0.25 + 0.25 + 0.5 = 1 is an integer.
    const std::vector<RealParam> quarters{RealParam::parse("0.25"), RealParam::parse("0.5")};
    const auto q = MomentQuery({fac(0, false, 1), fac(0, false, 2), fac(1, false, 3)});
    CHECK(std::abs(exponential_oracle(quarters, q, uniform) - std::polar(1.0, two_pi * (0.25 + 0.5 + 1.5))) < 1e-15);

    const AveragingScheme lin{I1, weights::Linear{}, normalizers::Mean{}};
    CHECK(error_of([&] { exponential_oracle({theta}, MomentQuery({fac(0, false, 0)}), lin); }) == "oracle undefined");
    CHECK(error_of([&] { exponential_oracle({theta}, MomentQuery({fac(0, false, 0)}), {I1, weights::Constant{1}, normalizers::Constant{2}}); }) == "oracle undefined");
  }

  TEST_CASE("empirical exponential moments approach the oracle at rate 1/N") {
    std::mt19937_64 rng(31);
    const std::uint64_t n = 20000;
    for (int trial = 0; trial < 100; ++trial) {
      const int r = 1 + static_cast<int>(rng() % 3);
      std::vector<RealParam> thetas;
      std::vector<MomentFactor> fs;
      long double big_theta = 0;
      for (int i = 0; i < r; ++i) {
        thetas.push_back(random_theta(rng));
        const bool conj = rng() & 1u;
        fs.push_back(fac(static_cast<std::size_t>(i), conj, static_cast<std::int64_t>(rng() % 9) - 4));
        big_theta += (conj ? -1 : 1) * thetas.back().value();
      }
      if (trial % 4 == 0) {
        // Force a cancelling pair.
        thetas.push_back(thetas[0]);
        fs.push_back(fac(thetas.size() - 1, !fs[0].conjugate, static_cast<std::int64_t>(rng() % 9) - 4));
        big_theta += (fs.back().conjugate ? -1 : 1) * thetas[0].value();
      }
      std::vector<FunctionSpec> fam;
      for (const auto& t : thetas) fam.push_back(FunctionSpec::exponential(t));
      const MomentQuery q(fs);
      const cd emp = weighted_moment(fam, q, uniform, n).value;
      const cd lim = exponential_oracle(thetas, q, uniform);
      // Geometric sum: |(1/N) sum_{k<N} w^k| <= 1 / (N |sin(pi Theta)|).
      const double frac = static_cast<double>(big_theta - std::floor(big_theta));
      const double s = std::abs(std::sin(std::numbers::pi * frac));
      const double bound = s < 1e-9 ? 1e-9 : 1 / (static_cast<double>(n) * s) + 1e-9;
      REQUIRE(std::abs(emp - lim) <= bound);
    }
  }

  TEST_CASE("accordance") {
    const std::vector<FunctionSpec> exps{FunctionSpec::exponential(RealParam::parse("golden")),
                                         FunctionSpec::exponential(RealParam::parse("0.2"))};
    const std::vector<MomentQuery> qs{MomentQuery({fac(0, false, 0)}), MomentQuery({fac(0, false, 0), fac(1, false, 1)}),
                                      MomentQuery({fac(0, false, 0), fac(0, false, 2), fac(1, true, 1)})};
    const auto a = accordance_check(exps, qs, uniform, dyadic_schedule(14, 20), 1e-3);
    CHECK(a.accordant);
    CHECK(a.queries[0].patterns.size() == 2);
    CHECK(a.queries[2].patterns.size() == 8);
    for (const auto& q : a.queries) CHECK(q.oscillation <= 1e-3);

    const auto shallow = accordance_check(exps, qs, uniform, dyadic_schedule(10, 12), 1, 1);
    CHECK(shallow.queries[1].patterns.size() == 1);

    const std::vector<FunctionSpec> dy{FunctionSpec::indicator(SetSpec::dyadic_blocks())};
    const auto d = accordance_check(dy, {MomentQuery({fac(0, false, 0)})}, uniform, dyadic_schedule(4, 20), 0.05);
    CHECK(!d.accordant);
    CHECK(d.queries[0].oscillation == doctest::Approx(1.0 / 3).epsilon(0.01));

    const std::vector<FunctionSpec> one{FunctionSpec::constant(Z, 1)};
    const auto c = accordance_check(one, {MomentQuery({fac(0, false, 0), fac(0, true, 3)})}, uniform,
                                    dyadic_schedule(3, 10), 1e-12);
    CHECK(c.accordant);
    for (const auto& p : c.queries[0].patterns) {
      for (const auto& v : p.values) CHECK(v == cd(1, 0));
    }
    CHECK(error_of([&] { accordance_check(one, {MomentQuery({fac(0, false, 0)})}, uniform, {10}, 0); }) ==
          "eps must be positive");
  }

  TEST_CASE("random disk functions") {
    const auto f = FunctionSpec::random_disk(Z, 99);
    const auto g = FunctionSpec::random_disk(Z, 99);
    const auto h = FunctionSpec::random_disk(Z, 100);
    cd mean = 0;
    int differ = 0;
    for (std::int64_t n = -50000; n < 50000; ++n) {
      const cd v = f(z(n));
      REQUIRE(std::abs(v) <= 1);
      REQUIRE(v == g(z(n)));
      differ += v != h(z(n));
      mean += v;
    }
    CHECK(differ == 100000);
    // Uniform on the disk: mean 0, per-coordinate variance 1/4.
    CHECK(std::abs(mean / 100000.0) <= 4 * std::sqrt(0.5 / 100000));
  }

  TEST_CASE("argument errors") {
    const std::vector<FunctionSpec> fam{FunctionSpec::constant(Z, 1)};
    CHECK(error_of([&] { weighted_moment(fam, MomentQuery({fac(1, false, 0)}), uniform, 10); }) ==
          "index out of range");
    CHECK(error_of([&] { MomentQuery({}); }) == "moment query needs at least one factor");
    CHECK(error_of([&] { FunctionSpec::constant(Z, cd(0.8, 0.7)); }) == "function value outside the unit disk");
    const GroupSpec H3 = GroupSpec::heisenberg();
    CHECK(error_of([&] {
            FunctionSpec::product({FunctionSpec::constant(Z, 1), FunctionSpec::constant(H3, 1)});
          }) == "group mismatch");
    const AveragingScheme neg{FolnerSpec::interval(-5), weights::Linear{}, normalizers::Mean{}};
    CHECK(error_of([&] { weighted_moment(fam, MomentQuery({fac(0, false, 0)}), neg, 10); }) == "negative weight");
  }
}
