#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cantor/core.hpp"
#include "cantor/schedule.hpp"

namespace cantor {

// Strictly increasing stream of 1-based indices. The arithmetic progression
// (mt + r) starts at t = 0 in the source material, so its first index is r;
// index 0 never addresses a digit, hence r = 0 starts at m instead.
class IndexSequence {
 public:
  static IndexSequence identity();
  static IndexSequence arithmetic(std::uint64_t m, std::uint64_t r);
  static IndexSequence from_list(std::vector<Int> indices);  // validated strictly increasing

  Int at(std::uint64_t t) const;  // t >= 1
  bool is_identity() const;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> as_arithmetic() const;  // (m, r)
  std::string to_string() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// One sequence value as seen by streaming consumers. Values beyond the
// 64-bit range (the 2^n p_n residues of a Xi transform) saturate: value_d
// becomes +inf and fits_i64 goes false, which is all the digit/statistics
// paths need. Exact access goes through BasicSequence::at.
struct QView {
  double value_d = 0;
  std::int64_t value_i = 0;
  bool fits_i64 = true;
};

// A basic sequence: q_n >= 2 for n >= 1, defined by one of the rules below.
// Descriptors are immutable and cheaply copyable; cursors hold all per-reader
// state, so one sequence can feed many threads.
class BasicSequence {
 public:
  enum class Kind { constant, explicit_list, gamma, xi, lambda };

  static BasicSequence constant(Int b);
  // prefix then optional repeating period; access past a period-free prefix errors
  static BasicSequence from_list(std::vector<Int> prefix, std::vector<Int> period = {});
  static BasicSequence gamma(SchedulePtr schedule);
  static BasicSequence xi(BasicSequence base, std::vector<Rat> c, Int d);
  static BasicSequence lambda(BasicSequence base, IndexSequence indices);

  // Exact q_n, n >= 1. Throws SequenceError on q_n < 2 or divisibility
  // failure, GuardError where exact materialization is impossible
  // (2^n p_n for astronomically large n).
  Int at(const Int& n) const;

  Kind kind() const;
  const std::string& descriptor() const;

  // Structural accessors (empty/null when not applicable).
  SchedulePtr schedule() const;              // gamma: its schedule
  const std::vector<Rat>* xi_coefficients() const;
  std::optional<Int> xi_modulus() const;
  const BasicSequence* inner() const;        // xi/lambda: the transformed sequence
  const IndexSequence* lambda_indices() const;
  // explicit_list: stored prefix and period (period empty = finite);
  // constant b reports an empty prefix and period {b}
  const std::vector<Int>* explicit_prefix() const;
  const std::vector<Int>* explicit_period() const;

  class Cursor {
   public:
    explicit Cursor(const BasicSequence& seq);
    QView next();  // q_{n+1} where n is the count already consumed
    std::uint64_t position() const { return pos_; }

   private:
    struct State;
    std::shared_ptr<State> state_;
    std::uint64_t pos_ = 0;
  };

  Cursor cursor() const { return Cursor(*this); }

 private:
  struct Rule;
  explicit BasicSequence(std::shared_ptr<const Rule> rule);
  std::shared_ptr<const Rule> rule_;
  friend class Cursor;
};

// ---------------------------------------------------------------------------
// Divergence partial sums.
//
//   plain:  Q_n^(k)       = sum_{j=1..n} 1/(q_j ... q_{j+k-1})
//   AP:     Q_{n,m,r}^(k) = sum over start positions s = r (mod m), s <= n
//                           of 1/(q_s ... q_{s+k-1})
//
// The AP sum's source definition starts its index at q_0, which the sequence
// never defines; the s >= 1 convention above skips exactly that one term.
// Floating sums are compensated; terms whose product overflows or underflows
// double range contribute 0 and are covered by neglected_bound.
// ---------------------------------------------------------------------------

struct PartialSum {
  double value = 0;
  double neglected_bound = 0;
  std::uint64_t terms = 0;
};

// Streaming accumulator: feed q_1, q_2, ...; each completed window of k
// values contributes one term.
class QnkAccumulator {
 public:
  explicit QnkAccumulator(int k, std::uint64_t stride = 1, std::uint64_t first_start = 1);

  void push(double q);
  PartialSum sum() const;
  std::uint64_t values_seen() const { return seen_; }

 private:
  int k_;
  std::uint64_t stride_;
  std::uint64_t first_start_;
  std::vector<double> recip_ring_;  // 1/q for the last k values
  std::uint64_t seen_ = 0;
  double sum_ = 0, comp_ = 0;  // Neumaier compensation
  double neglected_ = 0;
  std::uint64_t terms_ = 0;
};

PartialSum qnk_partial(const BasicSequence& q, std::uint64_t n, int k);
PartialSum qnk_ap_partial(const BasicSequence& q, std::uint64_t n, int k, std::uint64_t m,
                          std::uint64_t r);

// Exact variants for small n (guarded).
Rat qnk_partial_exact(const BasicSequence& q, std::uint64_t n, int k, std::uint64_t guard = 20000);
Rat qnk_ap_partial_exact(const BasicSequence& q, std::uint64_t n, int k, std::uint64_t m,
                         std::uint64_t r, std::uint64_t guard = 20000);

enum class DivergenceVariant { type_i, type_ii };

struct DivergencePoint {
  std::uint64_t n = 0;       // position in the original sequence
  std::uint64_t terms = 0;   // completed terms in the sum
  double value = 0;
  double neglected_bound = 0;
};

// Partial-sum trace at geometric checkpoints up to the horizon. Type I
// reports Q_{n,m,r}^(k); type II reports (Lambda_{A_{m,r}} Q)_T^(k) where T
// counts extracted positions <= n.
std::vector<DivergencePoint> divergence_probe(const BasicSequence& q, int k, std::uint64_t m,
                                              std::uint64_t r, DivergenceVariant variant,
                                              std::uint64_t horizon);

}  // namespace cantor
