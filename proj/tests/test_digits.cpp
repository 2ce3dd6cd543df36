#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cantor/digit_stream.hpp"

using namespace cantor;

namespace {

SchedulePtr two_block_schedule() {
  // l = (2,1), X_1 = (0,1), X_2 = (2,2): digits (0,1,0,1,2,2), then exhausted
  return std::make_shared<ConstructionSchedule>(
      "test:two-block", [](std::size_t i) -> std::optional<ScheduleTupleSpec> {
        if (i == 1)
          return ScheduleTupleSpec{Int(2), 2, 2, Rat(1, 2), 1, 1,
                                   BlockRule::explicit_block(Block({0, 1}))};
        if (i == 2)
          return ScheduleTupleSpec{Int(2), 3, 3, Rat(1, 3), 1, 1,
                                   BlockRule::explicit_block(Block({2, 2}))};
        return std::nullopt;
      });
}

SchedulePtr cbw_schedule() {
  // X_i = C(b_i, w): small bases, streams and random access must agree
  return std::make_shared<ConstructionSchedule>(
      "test:cbw", [](std::size_t i) -> std::optional<ScheduleTupleSpec> {
        if (i > 6) return std::nullopt;
        Digit b = static_cast<Digit>(i + 1);
        return ScheduleTupleSpec{Int(2 + i), b, b, Rat(1, static_cast<unsigned long>(i + 1)),
                                 1, 1, BlockRule::cbw(b, 3)};
      });
}

std::vector<Digit> take(const DigitStream& s, std::size_t n) {
  auto cur = s.cursor();
  std::vector<Digit> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(cur.next());
  return out;
}

}  // namespace

TEST_CASE("eta streams concatenate schedule blocks") {
  auto x = DigitStream::eta(two_block_schedule());
  auto cur = x.cursor();
  std::vector<Digit> got;
  for (int i = 0; i < 8; ++i) got.push_back(cur.next());
  CHECK(got == std::vector<Digit>{0, 1, 0, 1, 2, 2, 2, 2});
  CHECK_THROWS_AS(cur.next(), SequenceError);  // schedule exhausted
  CHECK(x.integer_part() == 0);
}

TEST_CASE("eta streams agree with random access") {
  auto sched = cbw_schedule();
  auto x = DigitStream::eta(sched);
  auto cur = x.cursor();
  // L_6 = sum (2+i) * 3 * b^3
  std::uint64_t total = 0;
  for (std::size_t i = 1; i <= 6; ++i) total += to_u64(sched->tuple(i).length);
  for (std::uint64_t n = 1; n <= total; ++n) {
    Digit streamed = cur.next();
    REQUIRE(eta_digit_at(*sched, Int(static_cast<unsigned long>(n))) == streamed);
  }
}

TEST_CASE("eta random access edge positions") {
  auto sched = cbw_schedule();
  for (std::size_t i = 1; i <= 6; ++i) {
    const ScheduleTuple& t = sched->tuple(i);
    // first digit of a region is 0, last digit is b-1 (C(b,w) runs 00..0 to b-1..b-1)
    Int l_prev = t.cum_len - t.length;
    CHECK(eta_digit_at(*sched, l_prev + 1) == 0);
    CHECK(eta_digit_at(*sched, t.cum_len) == t.b - 1);
  }
}

TEST_CASE("zero-repetition tuples are skipped") {
  auto sched = std::make_shared<ConstructionSchedule>(
      "test:zeros", [](std::size_t i) -> std::optional<ScheduleTupleSpec> {
        if (i < 3)
          return ScheduleTupleSpec{Int(0), 2, 2, Rat(1, i), 1, 1,
                                   BlockRule::explicit_block(Block({0}))};
        return ScheduleTupleSpec{Int(1), 2, 2, Rat(1, static_cast<unsigned long>(i)), 1, 1,
                                 BlockRule::cbw(2, 2)};
      });
  auto x = DigitStream::eta(sched);
  CHECK(take(x, 8) == std::vector<Digit>{0, 0, 0, 1, 1, 0, 1, 1});
  CHECK(eta_digit_at(*sched, Int(4)) == 1);
}

TEST_CASE("psi damps digits to the governing base") {
  // the counterexample shape: P = 3,3,3..., Q = 3,2,3,2..., x = 0.(2,1) repeating
  auto p = BasicSequence::constant(3);
  auto q = BasicSequence::from_list({}, {Int(3), Int(2)});
  auto x = DigitStream::from_digits({}, {2, 1});
  auto damped = DigitStream::psi(x, p, q);
  auto cur = damped.cursor();
  std::vector<Digit> got;
  for (int i = 0; i < 8; ++i) got.push_back(cur.next());
  CHECK(got == std::vector<Digit>{2, 1, 2, 1, 2, 1, 2, 1});
  // every emitted digit equals q_n - 1: the raw tail is non-canonical and the
  // diagnostics must say so, with zero hypothesis witnesses
  const PsiDiagnostics* diag = cur.psi_diagnostics();
  REQUIRE(diag != nullptr);
  CHECK(diag->hypothesis_witnesses == 0);
  CHECK(diag->longest_max_run == 8);
  CHECK(diag->clipped == 0);
}

TEST_CASE("psi is the identity when digits already fit") {
  auto p = BasicSequence::constant(4);
  auto q = BasicSequence::constant(9);
  auto x = DigitStream::from_digits({}, {3, 0, 2, 1});
  auto same = DigitStream::psi(x, p, q);
  CHECK(take(same, 12) == take(x, 12));
}

TEST_CASE("psi damping is monotone and within range") {
  std::mt19937_64 rng(5);
  std::vector<Int> qv;
  for (int i = 0; i < 300; ++i) qv.emplace_back(2 + rng() % 6);
  auto p = BasicSequence::constant(8);
  auto q = BasicSequence::from_list(qv, {Int(9)});
  auto x = DigitStream::random_uniform(77, p);
  auto damped = DigitStream::psi(x, p, q);
  auto raw = x.cursor();
  auto out = damped.cursor();
  for (int n = 1; n <= 300; ++n) {
    Digit e = raw.next();
    Digit f = out.next();
    Int qn = q.at(n);
    CHECK(f <= e);
    CHECK(Int(f) <= qn - 1);
  }
}

TEST_CASE("upsilon extraction follows the index stream") {
  auto x = DigitStream::from_digits({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, {0});
  auto odd = DigitStream::upsilon(x, IndexSequence::arithmetic(2, 1));
  CHECK(take(odd, 5) == std::vector<Digit>{0, 2, 4, 6, 8});
  auto even = DigitStream::upsilon(x, IndexSequence::arithmetic(2, 0));
  CHECK(take(even, 5) == std::vector<Digit>{1, 3, 5, 7, 9});
  auto same = DigitStream::upsilon(x, IndexSequence::identity());
  CHECK(take(same, 10) == take(x, 10));
}

TEST_CASE("extraction commutes with psi") {
  // min() applied digit-wise commutes with taking a subsequence
  std::mt19937_64 rng(11);
  std::vector<Int> pv, qv;
  for (int i = 0; i < 400; ++i) {
    pv.emplace_back(3 + rng() % 9);
    qv.emplace_back(2 + rng() % 9);
  }
  auto p = BasicSequence::from_list(pv, {Int(12)});
  auto q = BasicSequence::from_list(qv, {Int(13)});
  auto x = DigitStream::random_uniform(123, p);
  for (std::uint64_t m : {2ull, 3ull}) {
    for (std::uint64_t r = 0; r < m; ++r) {
      auto idx = IndexSequence::arithmetic(m, r);
      auto left = DigitStream::upsilon(DigitStream::psi(x, p, q), idx);
      auto right = DigitStream::psi(DigitStream::upsilon(x, idx),
                                    BasicSequence::lambda(p, idx), BasicSequence::lambda(q, idx));
      CHECK(take(left, 100) == take(right, 100));
    }
  }
}

TEST_CASE("prefix evaluation matches hand arithmetic") {
  auto q32 = BasicSequence::from_list({}, {Int(3), Int(2)});
  auto x = DigitStream::from_digits({2, 1});
  CHECK(evaluate_prefix(x, q32, 2) == Rat(5, 6));

  auto periodic = DigitStream::from_digits({}, {2, 1});
  CHECK(evaluate_prefix(periodic, q32, 4) == Rat(35, 36));

  // prefix values increase toward the limit and stay below E_0 + 1
  Rat prev(0);
  for (std::uint64_t n = 1; n <= 12; ++n) {
    Rat v = evaluate_prefix(periodic, q32, n);
    CHECK(v >= prev);
    CHECK(v < 1);
    prev = v;
  }
}

TEST_CASE("periodic closed forms reproduce the worked values") {
  auto periodic21 = DigitStream::from_digits({}, {2, 1});
  CHECK(periodic_stream_value(periodic21, BasicSequence::constant(3)) == Rat(7, 8));
  CHECK(periodic_stream_value(periodic21, BasicSequence::from_list({}, {Int(3), Int(2)})) ==
        Rat(1));
}

TEST_CASE("rational expansions are canonical") {
  auto three = BasicSequence::constant(3);
  auto x = DigitStream::rational(Rat(7, 8), three);
  CHECK(x.integer_part() == 0);
  CHECK(take(x, 6) == std::vector<Digit>{2, 1, 2, 1, 2, 1});

  // value 1 w.r.t. the alternating sequence: expansion is 1.000..., never 0.(q_n - 1)
  auto q32 = BasicSequence::from_list({}, {Int(3), Int(2)});
  auto one = DigitStream::rational(Rat(1), q32);
  CHECK(one.integer_part() == 1);
  CHECK(take(one, 8) == std::vector<Digit>{0, 0, 0, 0, 0, 0, 0, 0});

  // round trip through exact prefix evaluation
  auto y = DigitStream::rational(Rat(5, 7), BasicSequence::constant(10));
  Rat tail_bound = Rat(1, Int(10000));
  Rat approx = evaluate_prefix(y, BasicSequence::constant(10), 4);
  CHECK(approx <= Rat(5, 7));
  CHECK(Rat(5, 7) - approx <= tail_bound);
}

TEST_CASE("evaluation guards trip on oversized requests") {
  auto q = BasicSequence::constant(3);
  auto x = DigitStream::from_digits({}, {1});
  CHECK_THROWS_AS(evaluate_prefix(x, q, 200000), GuardError);
}

TEST_CASE("random streams are reproducible and in range") {
  std::vector<Int> qv;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) qv.emplace_back(2 + rng() % 40);
  auto q = BasicSequence::from_list(qv, {Int(50)});
  auto a = DigitStream::random_uniform(42, q);
  auto b = DigitStream::random_uniform(42, q);
  auto c = DigitStream::random_uniform(43, q);
  auto va = take(a, 500), vb = take(b, 500), vc = take(c, 500);
  CHECK(va == vb);
  CHECK(va != vc);
  for (std::size_t i = 0; i < va.size(); ++i) {
    CHECK(va[i] >= 0);
    CHECK(Int(va[i]) < q.at(Int(static_cast<unsigned long>(i + 1))));
  }
}
