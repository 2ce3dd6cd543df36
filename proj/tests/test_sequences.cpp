#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cantor/sequence.hpp"

using namespace cantor;

namespace {

SchedulePtr tiny_schedule() {
  // l = (2), b = (3), X_1 = (0,1); then a second governing tuple
  return std::make_shared<ConstructionSchedule>(
      "test:tiny", [](std::size_t i) -> std::optional<ScheduleTupleSpec> {
        if (i == 1)
          return ScheduleTupleSpec{Int(2), 3, 3, Rat(1, 2), 1, 1,
                                   BlockRule::explicit_block(Block({0, 1}))};
        if (i == 2)
          return ScheduleTupleSpec{Int(3), 5, 5, Rat(1, 3), 1, 1,
                                   BlockRule::explicit_block(Block({0, 1, 2}))};
        return std::nullopt;
      });
}

}  // namespace

TEST_CASE("constant sequences answer at any position") {
  auto q = BasicSequence::constant(5);
  CHECK(q.at(Int("1000000000")) == 5);
  auto cur = q.cursor();
  CHECK(cur.next().value_i == 5);
}

TEST_CASE("gamma sequences follow the schedule regions") {
  auto q = BasicSequence::gamma(tiny_schedule());
  // L_1 = 2*2 = 4, then the next tuple governs
  for (int n = 1; n <= 4; ++n) CHECK(q.at(n) == 3);
  CHECK(q.at(5) == 5);
  CHECK(q.at(13) == 5);  // L_2 = 4 + 9 = 13
  CHECK_THROWS_AS(q.at(14), SequenceError);

  auto cur = q.cursor();
  for (int n = 1; n <= 4; ++n) CHECK(cur.next().value_i == 3);
  CHECK(cur.next().value_i == 5);
}

TEST_CASE("xi transform worked example") {
  // P = constant 6, c = (2,1,2), d = 4: (xi_1..xi_4) = (6,3,48,3)
  auto p = BasicSequence::constant(6);
  auto q = BasicSequence::xi(p, {Rat(2), Rat(1), Rat(2)}, Int(4));
  CHECK(q.at(1) == 6);
  CHECK(q.at(2) == 3);
  CHECK(q.at(3) == 48);  // n = 3 falls in the 2^n p_n branch
  CHECK(q.at(4) == 3);
  CHECK(q.at(7) == Int(128) * 6);  // 2^7 * 6

  auto cur = q.cursor();
  CHECK(cur.next().value_i == 6);
  CHECK(cur.next().value_i == 3);
  CHECK(cur.next().value_i == 48);
  CHECK(cur.next().value_i == 3);
}

TEST_CASE("xi transform with d = t has no doubling branch") {
  auto q = BasicSequence::xi(BasicSequence::constant(6), {Rat(1), Rat(1), Rat(1)}, Int(3));
  for (int n = 1; n <= 9; ++n) CHECK(q.at(n) == 6);
  CHECK_THROWS_AS(
      BasicSequence::xi(BasicSequence::constant(6), {Rat(1), Rat(1), Rat(1)}, Int(2)),
      SequenceError);
}

TEST_CASE("xi transform enforces divisibility") {
  auto q = BasicSequence::xi(BasicSequence::constant(5), {Rat(2), Rat(1)}, Int(3));
  CHECK_THROWS_AS(q.at(3), SequenceError);  // n = 3 = 0 mod 3 needs 2 | 5
  auto cur = BasicSequence::xi(BasicSequence::constant(5), {Rat(2), Rat(1)}, Int(3)).cursor();
  cur.next();
  cur.next();
  CHECK_THROWS_AS(cur.next(), SequenceError);
}

TEST_CASE("xi clamps small values to 2") {
  // p/c = 6/4 < 2 at residue 0
  auto q = BasicSequence::xi(BasicSequence::constant(6), {Rat(6), Rat(1)}, Int(2));
  CHECK(q.at(2) == 2);  // max(2, 6/6) = 2... residue 0 uses c_0 = 6
  CHECK(q.at(1) == 6);
}

TEST_CASE("huge xi values saturate the streaming view") {
  // residue 0 keeps p_n = 6, residue 1 doubles: 2^n * 6
  auto q = BasicSequence::xi(BasicSequence::constant(6), {Rat(1)}, Int(2));
  auto cur = q.cursor();
  for (int n = 1; n <= 1200; ++n) {
    QView v = cur.next();
    if (n % 2 == 0) {
      CHECK(v.value_i == 6);
    } else if (n > 62) {
      CHECK_FALSE(v.fits_i64);
      if (n > 1030) CHECK(std::isinf(v.value_d));  // past double range
    }
  }
  CHECK(q.at(11) == Int(2048) * 6);
  CHECK_THROWS_AS(q.at(Int("100000000001")), GuardError);  // odd: the 2^n branch
}

TEST_CASE("lambda subsequences index into the base sequence") {
  auto q = BasicSequence::from_list({}, {Int(2), Int(3)});  // 2,3,2,3,...
  auto odd = BasicSequence::lambda(q, IndexSequence::arithmetic(2, 1));
  CHECK(odd.at(1) == 2);  // q_1
  CHECK(odd.at(2) == 2);  // q_3
  auto even = BasicSequence::lambda(q, IndexSequence::arithmetic(2, 0));
  CHECK(even.at(1) == 3);  // q_2 (index 0 dropped)
  auto id = BasicSequence::lambda(q, IndexSequence::identity());
  for (int n = 1; n <= 6; ++n) CHECK(id.at(n) == q.at(n));
}

TEST_CASE("lambda commutes with indexing") {
  std::mt19937_64 rng(7);
  std::vector<Int> values;
  for (int i = 0; i < 64; ++i) values.emplace_back(2 + rng() % 9);
  auto q = BasicSequence::from_list(values, {Int(4)});
  for (std::uint64_t m = 1; m <= 4; ++m) {
    for (std::uint64_t r = 0; r < m; ++r) {
      auto idx = IndexSequence::arithmetic(m, r);
      auto sub = BasicSequence::lambda(q, idx);
      auto cur = sub.cursor();
      for (std::uint64_t t = 1; t <= 20; ++t) {
        Int direct = q.at(idx.at(t));
        CHECK(sub.at(Int(static_cast<unsigned long>(t))) == direct);
        CHECK(cur.next().value_i == direct);
      }
    }
  }
}

TEST_CASE("index streams reject bad shapes") {
  CHECK_THROWS_AS(IndexSequence::from_list({Int(3), Int(2)}), SequenceError);
  CHECK_THROWS_AS(IndexSequence::from_list({Int(0)}), SequenceError);
  CHECK_THROWS_AS(IndexSequence::arithmetic(2, 2), SequenceError);
}

TEST_CASE("partial sums match the worked examples") {
  auto two = BasicSequence::constant(2);
  CHECK(qnk_partial(two, 4, 1).value == doctest::Approx(2.0));
  CHECK(qnk_partial(two, 0, 3).value == 0.0);

  auto alt = BasicSequence::from_list({}, {Int(3), Int(2)});
  CHECK(qnk_partial_exact(alt, 4, 1) == Rat(5, 3));
  CHECK(qnk_partial(alt, 4, 1).value == doctest::Approx(5.0 / 3.0));

  // odd positions of (3,2,3,2,...) are all 3
  CHECK(qnk_ap_partial_exact(alt, 5, 1, 2, 1) == Rat(1));
  CHECK(qnk_ap_partial(alt, 5, 1, 2, 1).value == doctest::Approx(1.0));

  CHECK(qnk_ap_partial_exact(two, 5, 2, 2, 1) == Rat(3, 4));
}

TEST_CASE("r = 0 progressions skip the undefined q_0 term") {
  auto two = BasicSequence::constant(2);
  // starts at s = m, 2m, ... <= n
  CHECK(qnk_ap_partial_exact(two, 6, 1, 2, 0) == Rat(3, 2));
  CHECK(qnk_ap_partial_exact(two, 6, 1, 1, 0) == qnk_partial_exact(two, 6, 1));
}

TEST_CASE("float and exact partial sums agree to 1e-12 relative") {
  std::mt19937_64 rng(99);
  std::vector<Int> values;
  for (int i = 0; i < 512; ++i) values.emplace_back(2 + rng() % 30);
  auto q = BasicSequence::from_list(values, {Int(7), Int(11)});
  for (int k : {1, 2, 3}) {
    Rat exact = qnk_partial_exact(q, 3000, k);
    double approx = qnk_partial(q, 3000, k).value;
    CHECK(std::abs(approx - exact.get_d()) <= 1e-12 * exact.get_d());
  }
}

TEST_CASE("partial sums are monotone in n and antitone in k") {
  auto q = BasicSequence::from_list({}, {Int(3), Int(5), Int(2)});
  double prev = 0;
  for (std::uint64_t n = 1; n <= 40; ++n) {
    double v = qnk_partial(q, n, 2).value;
    CHECK(v >= prev);
    prev = v;
  }
  for (int k = 1; k < 4; ++k)
    CHECK(qnk_partial(q, 50, k + 1).value < qnk_partial(q, 50, k).value);
}

TEST_CASE("xi tails beyond double range are reported, not dropped silently") {
  auto q = BasicSequence::xi(BasicSequence::constant(4), {Rat(2)}, Int(2));
  auto sum = qnk_partial(q, 4000, 1);
  CHECK(sum.value > 0);
  CHECK(sum.neglected_bound >= 0);
  CHECK(sum.neglected_bound < 1e-200);  // the 2^n p_n terms vanish fast
  CHECK(sum.terms == 4000);
}

TEST_CASE("divergence probes separate divergent and damped sequences") {
  auto two = BasicSequence::constant(2);
  auto probe = divergence_probe(two, 1, 1, 0, DivergenceVariant::type_i, 4096);
  REQUIRE(probe.size() > 3);
  CHECK(probe.back().value == doctest::Approx(2048.0));

  // all-ones coefficient: odd residues carry 2^n p_n, a bounded geometric tail
  auto damped = BasicSequence::xi(BasicSequence::constant(2), {Rat(1)}, Int(2));
  auto dp = divergence_probe(damped, 1, 2, 1, DivergenceVariant::type_ii, 4096);
  CHECK(dp.back().value < 1.0);

  auto dpI = divergence_probe(damped, 1, 2, 0, DivergenceVariant::type_i, 4096);
  CHECK(dpI.back().value == doctest::Approx(1024.0));
}

TEST_CASE("two cursors over one sequence see identical prefixes") {
  auto q = BasicSequence::xi(BasicSequence::from_list({}, {Int(6), Int(12)}), {Rat(3), Rat(2)},
                             Int(3));
  auto c1 = q.cursor();
  auto c2 = q.cursor();
  for (int i = 0; i < 200; ++i) {
    QView a = c1.next();
    QView b = c2.next();
    CHECK(a.value_d == b.value_d);
    CHECK(a.value_i == b.value_i);
  }
}
