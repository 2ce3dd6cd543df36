#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cantor/core.hpp"
#include "cantor/schedule.hpp"
#include "cantor/sequence.hpp"

namespace cantor {

// Running ledger a psi cursor keeps about the digits it has transformed.
// `hypothesis_witnesses` counts positions with E_n < q_n - 1 (the condition
// the O(1) counting stability rests on); `max_digit_run` tracks the longest
// prefix-run of emitted digits equal to q_n - 1. A long run means the raw
// digits may not be the canonical expansion of the transformed value; the
// stream reports this and never rewrites digits on its own.
struct PsiDiagnostics {
  std::uint64_t hypothesis_witnesses = 0;
  std::uint64_t clipped = 0;
  std::uint64_t last_clip_position = 0;
  std::uint64_t current_max_run = 0;
  std::uint64_t longest_max_run = 0;
};

// Lazy digit stream of a Q-Cantor expansion: digits E_1, E_2, ... plus an
// integer part E_0. Descriptors are immutable and shareable; every consumer
// pulls through its own cursor.
class DigitStream {
 public:
  // digits X_1^{l_1} X_2^{l_2} ... of a construction schedule
  static DigitStream eta(SchedulePtr schedule);
  // digit-wise min(E_n, q_n - 1), re-declared w.r.t. q
  static DigitStream psi(DigitStream inner, BasicSequence p, BasicSequence q);
  // extracted subsequence E_{m_1} E_{m_2} ... w.r.t. the matching lambda sequence
  static DigitStream upsilon(DigitStream inner, IndexSequence indices);
  // explicit digits, optionally followed by a repeating period
  static DigitStream from_digits(std::vector<Digit> prefix, std::vector<Digit> period = {});
  // the Q-Cantor expansion of an exact rational (greedy digit extraction)
  static DigitStream rational(Rat value, BasicSequence q);
  // E_n uniform on [0, q_n - 1] from a seeded deterministic generator
  static DigitStream random_uniform(std::uint64_t seed, BasicSequence q);

  Int integer_part() const;
  const std::string& descriptor() const;

  // Schedule whose copy boundaries are meaningful checkpoint positions for
  // this stream: the eta schedule itself, seen through any psi wrappers
  // (psi preserves positions). Null otherwise.
  SchedulePtr boundary_schedule() const;

  // For explicit digit streams: prefix and period (period empty = finite).
  const std::vector<Digit>* explicit_prefix() const;
  const std::vector<Digit>* explicit_period() const;

  class Cursor {
   public:
    explicit Cursor(const DigitStream& stream);
    Digit next();
    std::uint64_t position() const { return pos_; }
    const PsiDiagnostics* psi_diagnostics() const;

   private:
    struct State;
    std::shared_ptr<State> state_;
    std::uint64_t pos_ = 0;
  };

  Cursor cursor() const { return Cursor(*this); }

 private:
  struct Source;
  explicit DigitStream(std::shared_ptr<const Source> src);
  std::shared_ptr<const Source> src_;
  friend class Cursor;
};

// Exact value of the length-n prefix: E_0 + sum_{j<=n} E_j / (q_1 ... q_j).
// Guarded by the factor count and by the bit size of the denominator.
Rat evaluate_prefix(const DigitStream& x, const BasicSequence& q, std::uint64_t n,
                    std::uint64_t factor_guard = 100000);

// Exact limit value of an eventually periodic digit stream w.r.t. an
// eventually periodic sequence (constant or explicit with a period):
//   value = E_0 + prefix part + (geometric tail of the joint period).
Rat periodic_stream_value(const DigitStream& x, const BasicSequence& q);

}  // namespace cantor
