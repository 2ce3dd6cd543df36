#include "cantor/digit_stream.hpp"

#include <cassert>
#include <limits>
#include <random>

namespace cantor {

namespace {

std::string join_digits(const std::vector<Digit>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

// Deterministic bounded draw: 64-bit Mersenne Twister output, masked and
// rejected. Reproducible across platforms, unlike uniform_int_distribution.
struct SeededDraw {
  std::mt19937_64 rng;
  explicit SeededDraw(std::uint64_t seed) : rng(seed) {}

  std::uint64_t below(std::uint64_t bound) {
    assert(bound >= 1);
    if (bound == 1) return 0;
    std::uint64_t mask = ~std::uint64_t{0} >> __builtin_clzll(bound - 1);
    std::uint64_t v;
    do {
      v = rng() & mask;
    } while (v >= bound);
    return v;
  }
};

}  // namespace

struct DigitStream::Source {
  enum class Kind { eta, psi, upsilon, explicit_digits, rational, random } kind;
  std::string descriptor;
  Int integer_part = 0;

  SchedulePtr sched;                          // eta
  std::shared_ptr<const DigitStream> inner;   // psi / upsilon
  std::optional<BasicSequence> p, q;          // psi (p informational), rational/random (q)
  IndexSequence indices = IndexSequence::identity();  // upsilon
  std::vector<Digit> prefix, period;          // explicit_digits
  Rat value;                                  // rational
  std::uint64_t seed = 0;                     // random
};

DigitStream::DigitStream(std::shared_ptr<const Source> src) : src_(std::move(src)) {}

DigitStream DigitStream::eta(SchedulePtr schedule) {
  if (!schedule) throw SequenceError("eta stream needs a schedule");
  auto s = std::make_shared<Source>();
  s->kind = Source::Kind::eta;
  s->sched = std::move(schedule);
  s->descriptor = "eta:(" + s->sched->descriptor() + ")";
  return DigitStream(s);
}

DigitStream DigitStream::psi(DigitStream inner, BasicSequence p, BasicSequence q) {
  auto s = std::make_shared<Source>();
  s->kind = Source::Kind::psi;
  s->inner = std::make_shared<DigitStream>(std::move(inner));
  s->integer_part = s->inner->integer_part();
  s->p = std::move(p);
  s->q = std::move(q);
  s->descriptor = "psi:x=(" + s->inner->descriptor() + ");p=(" + s->p->descriptor() + ");q=(" +
                  s->q->descriptor() + ")";
  return DigitStream(s);
}

DigitStream DigitStream::upsilon(DigitStream inner, IndexSequence indices) {
  auto s = std::make_shared<Source>();
  s->kind = Source::Kind::upsilon;
  s->inner = std::make_shared<DigitStream>(std::move(inner));
  s->indices = indices;
  s->descriptor = "upsilon:x=(" + s->inner->descriptor() + ");" + indices.to_string();
  return DigitStream(s);
}

DigitStream DigitStream::from_digits(std::vector<Digit> prefix, std::vector<Digit> period) {
  for (Digit d : prefix)
    if (d < 0) throw SequenceError("digits must be non-negative");
  for (Digit d : period)
    if (d < 0) throw SequenceError("digits must be non-negative");
  auto s = std::make_shared<Source>();
  s->kind = Source::Kind::explicit_digits;
  s->prefix = std::move(prefix);
  s->period = std::move(period);
  s->descriptor = "digits:" + join_digits(s->prefix);
  if (!s->period.empty()) s->descriptor += ";period=" + join_digits(s->period);
  return DigitStream(s);
}

DigitStream DigitStream::rational(Rat value, BasicSequence q) {
  auto s = std::make_shared<Source>();
  s->kind = Source::Kind::rational;
  s->value = std::move(value);
  s->value.canonicalize();
  Int e0 = floor_div(s->value.get_num(), s->value.get_den());
  s->integer_part = e0;
  s->q = std::move(q);
  s->descriptor = "rational:" + rat_to_string(s->value);
  return DigitStream(s);
}

DigitStream DigitStream::random_uniform(std::uint64_t seed, BasicSequence q) {
  auto s = std::make_shared<Source>();
  s->kind = Source::Kind::random;
  s->seed = seed;
  s->q = std::move(q);
  s->descriptor = "random:seed=" + std::to_string(seed);
  return DigitStream(s);
}

Int DigitStream::integer_part() const { return src_->integer_part; }
const std::string& DigitStream::descriptor() const { return src_->descriptor; }

SchedulePtr DigitStream::boundary_schedule() const {
  const Source* s = src_.get();
  while (s) {
    if (s->kind == Source::Kind::eta) return s->sched;
    if (s->kind == Source::Kind::psi) {
      s = s->inner->src_.get();
      continue;
    }
    break;
  }
  return nullptr;
}

// --------------------------------- cursors ----------------------------------

namespace {

struct DigitCursorImpl {
  virtual ~DigitCursorImpl() = default;
  virtual Digit next() = 0;
  virtual const PsiDiagnostics* psi_diagnostics() const { return nullptr; }
};

struct EtaCursor : DigitCursorImpl {
  SchedulePtr sched;
  std::size_t region = 0;
  Int copies_left = 0;            // copies of X_i still to emit (after the current one)
  std::uint64_t in_copy_left = 0; // digits left in the current copy
  const Block* stored = nullptr;
  std::unique_ptr<CbwOdometer> odometer;
  std::uint64_t block_len = 0;

  explicit EtaCursor(SchedulePtr s) : sched(std::move(s)) {}

  void start_region() {
    while (true) {
      ++region;
      const ScheduleTuple& t = sched->tuple(region);  // throws when exhausted
      if (sgn(t.length) == 0) continue;
      if (!fits_i64(t.block_len))
        throw GuardError("block X_" + std::to_string(region) +
                         " too long to stream digit-by-digit");
      block_len = to_u64(t.block_len);
      copies_left = t.l - 1;
      in_copy_left = block_len;
      if (t.block.is_cbw()) {
        stored = nullptr;
        odometer = std::make_unique<CbwOdometer>(t.block.cbw_base, t.block.cbw_width);
      } else {
        stored = &*t.block.stored;
        odometer.reset();
      }
      return;
    }
  }

  Digit next() override {
    while (in_copy_left == 0) {
      if (region >= 1 && sgn(copies_left) > 0) {
        copies_left -= 1;
        in_copy_left = block_len;
        if (odometer) odometer->reset();
      } else {
        start_region();
      }
    }
    --in_copy_left;
    if (odometer) return odometer->next();
    return stored->digits[block_len - in_copy_left - 1];
  }
};

struct PsiCursor : DigitCursorImpl {
  std::unique_ptr<DigitCursorImpl> inner;
  BasicSequence::Cursor q_cursor;
  PsiDiagnostics diag;
  std::uint64_t n = 0;

  PsiCursor(std::unique_ptr<DigitCursorImpl> in, const BasicSequence& q)
      : inner(std::move(in)), q_cursor(q.cursor()) {}

  Digit next() override {
    ++n;
    Digit e = inner->next();
    QView q = q_cursor.next();
    Digit out;
    bool at_max;
    if (q.fits_i64) {
      Digit qm1 = q.value_i - 1;
      if (e > qm1) {
        out = qm1;
        ++diag.clipped;
        diag.last_clip_position = n;
      } else {
        out = e;
      }
      at_max = (out == qm1);
      if (e < qm1) ++diag.hypothesis_witnesses;
    } else {
      out = e;  // q_n - 1 dwarfs any machine digit
      at_max = false;
      ++diag.hypothesis_witnesses;
    }
    if (at_max) {
      ++diag.current_max_run;
      diag.longest_max_run = std::max(diag.longest_max_run, diag.current_max_run);
    } else {
      diag.current_max_run = 0;
    }
    return out;
  }

  const PsiDiagnostics* psi_diagnostics() const override { return &diag; }
};

struct UpsilonCursor : DigitCursorImpl {
  std::unique_ptr<DigitCursorImpl> inner;
  IndexSequence indices;
  std::uint64_t t = 0;
  std::uint64_t consumed = 0;

  UpsilonCursor(std::unique_ptr<DigitCursorImpl> in, IndexSequence idx)
      : inner(std::move(in)), indices(idx) {}

  Digit next() override {
    std::uint64_t target = to_u64(indices.at(++t), "extraction index");
    Digit d = 0;
    while (consumed < target) {
      d = inner->next();
      ++consumed;
    }
    return d;
  }
};

struct ExplicitDigitCursor : DigitCursorImpl {
  const std::vector<Digit> prefix, period;
  std::uint64_t pos = 0;

  ExplicitDigitCursor(std::vector<Digit> pre, std::vector<Digit> per)
      : prefix(std::move(pre)), period(std::move(per)) {}

  Digit next() override {
    std::uint64_t i = pos++;
    if (i < prefix.size()) return prefix[i];
    if (period.empty()) throw SequenceError("digit stream exhausted at position " +
                                            std::to_string(i + 1));
    return period[(i - prefix.size()) % period.size()];
  }
};

// Greedy digit extraction: with x_0 = {x}, E_n = floor(q_n x_{n-1}) and
// x_n = q_n x_{n-1} - E_n. Produces the canonical expansion (terminating
// rationals end in zeros, not in a (q_n - 1) tail).
struct RationalCursor : DigitCursorImpl {
  BasicSequence q;
  Rat frac;
  std::uint64_t n = 0;

  RationalCursor(const Rat& value, const BasicSequence& qq) : q(qq) {
    Int e0 = floor_div(value.get_num(), value.get_den());
    frac = value - Rat(e0);
  }

  Digit next() override {
    ++n;
    Int qn = q.at(Int(static_cast<unsigned long>(n)));
    Rat scaled = frac * Rat(qn);
    Int digit = floor_div(scaled.get_num(), scaled.get_den());
    frac = scaled - Rat(digit);
    return to_i64(digit, "expansion digit");
  }
};

struct RandomCursor : DigitCursorImpl {
  SeededDraw draw;
  BasicSequence::Cursor q_cursor;

  RandomCursor(std::uint64_t seed, const BasicSequence& q) : draw(seed), q_cursor(q.cursor()) {}

  Digit next() override {
    QView q = q_cursor.next();
    if (!q.fits_i64)
      throw GuardError("random digits over a base beyond 64-bit range are not supported");
    return static_cast<Digit>(draw.below(static_cast<std::uint64_t>(q.value_i)));
  }
};

}  // namespace

struct DigitStream::Cursor::State {
  std::unique_ptr<DigitCursorImpl> impl;
};

DigitStream::Cursor::Cursor(const DigitStream& stream) : state_(std::make_shared<State>()) {
  struct Builder {
    static std::unique_ptr<DigitCursorImpl> build(const DigitStream& s) {
      const auto& src = *s.src_;
      using K = DigitStream::Source::Kind;
      switch (src.kind) {
        case K::eta:
          return std::make_unique<EtaCursor>(src.sched);
        case K::psi:
          return std::make_unique<PsiCursor>(build(*src.inner), *src.q);
        case K::upsilon:
          return std::make_unique<UpsilonCursor>(build(*src.inner), src.indices);
        case K::explicit_digits:
          return std::make_unique<ExplicitDigitCursor>(src.prefix, src.period);
        case K::rational:
          return std::make_unique<RationalCursor>(src.value, *src.q);
        case K::random:
          return std::make_unique<RandomCursor>(src.seed, *src.q);
      }
      throw SequenceError("unreachable stream kind");
    }
  };
  state_->impl = Builder::build(stream);
}

Digit DigitStream::Cursor::next() {
  ++pos_;
  return state_->impl->next();
}

const PsiDiagnostics* DigitStream::Cursor::psi_diagnostics() const {
  return state_->impl->psi_diagnostics();
}

// ------------------------------ exact evaluation -----------------------------

Rat evaluate_prefix(const DigitStream& x, const BasicSequence& q, std::uint64_t n,
                    std::uint64_t factor_guard) {
  if (n > factor_guard)
    throw GuardError("prefix length " + std::to_string(n) + " over the evaluation guard of " +
                     std::to_string(factor_guard) + " factors");
  constexpr std::size_t kDenominatorBitGuard = std::size_t{1} << 26;
  auto cur = x.cursor();
  // accumulate E_1/q_1 + ... as a single fraction num/den with den = q_1...q_j
  Int num = 0, den = 1;
  for (std::uint64_t j = 1; j <= n; ++j) {
    Int qj = q.at(Int(static_cast<unsigned long>(j)));
    Digit ej = cur.next();
    if (ej < 0 || Int(ej) >= qj)
      throw SequenceError("digit out of range at position " + std::to_string(j));
    num = num * qj + ej;
    den *= qj;
    if (mpz_sizeinbase(den.get_mpz_t(), 2) > kDenominatorBitGuard)
      throw GuardError("prefix denominator exceeded the bit-size guard");
  }
  Rat out(num, den);
  out.canonicalize();
  return Rat(x.integer_part()) + out;
}

const std::vector<Digit>* DigitStream::explicit_prefix() const {
  if (src_->kind != Source::Kind::explicit_digits) return nullptr;
  return &src_->prefix;
}

const std::vector<Digit>* DigitStream::explicit_period() const {
  if (src_->kind != Source::Kind::explicit_digits) return nullptr;
  return &src_->period;
}

Rat periodic_stream_value(const DigitStream& x, const BasicSequence& q) {
  const std::vector<Digit>* dig_prefix = x.explicit_prefix();
  const std::vector<Digit>* dig_period = x.explicit_period();
  const std::vector<Int>* seq_prefix = q.explicit_prefix();
  const std::vector<Int>* seq_period = q.explicit_period();
  if (!dig_prefix || !dig_period || dig_period->empty())
    throw GuardError("closed-form evaluation needs an explicit periodic digit stream");
  if (!seq_prefix || !seq_period || seq_period->empty())
    throw GuardError("closed-form evaluation needs a constant or periodic sequence");

  // Joint shape: after position S both the digits and the bases repeat with
  // period T, so the tail solves T(x) = A + T(x)/P.
  std::uint64_t s = std::max(dig_prefix->size(), seq_prefix->size());
  Int period_lcm;
  mpz_lcm_ui(period_lcm.get_mpz_t(), Int(static_cast<unsigned long>(dig_period->size())).get_mpz_t(),
             static_cast<unsigned long>(seq_period->size()));
  std::uint64_t t = to_u64(period_lcm, "joint period");
  if (s + t > 1000000) throw GuardError("joint period too long for closed-form evaluation");

  Rat head = evaluate_prefix(x, q, s);
  Int head_den = 1;  // q_1 ... q_S
  for (std::uint64_t j = 1; j <= s; ++j) head_den *= q.at(Int(static_cast<unsigned long>(j)));

  auto cur = x.cursor();
  for (std::uint64_t j = 0; j < s; ++j) cur.next();
  Int num = 0, den = 1;  // A = sum over one joint period, relative to position S
  for (std::uint64_t j = 1; j <= t; ++j) {
    Int qj = q.at(Int(static_cast<unsigned long>(s + j)));
    Digit ej = cur.next();
    if (ej < 0 || Int(ej) >= qj)
      throw SequenceError("digit out of range at position " + std::to_string(s + j));
    num = num * qj + ej;
    den *= qj;
  }
  // tail = A * P / (P - 1) with P = q_{S+1} ... q_{S+T}
  Rat tail(num, den - 1);
  tail.canonicalize();
  Rat scaled = tail / Rat(head_den);
  return head + scaled;
}

}  // namespace cantor
