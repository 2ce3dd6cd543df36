#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "cantor/block.hpp"
#include "cantor/core.hpp"

namespace cantor {

// X_i, either stored outright or as a C(b,w) rule evaluated by random access.
struct BlockRule {
  std::optional<Block> stored;
  Digit cbw_base = 0;
  unsigned long cbw_width = 0;

  static BlockRule explicit_block(Block b);
  static BlockRule cbw(Digit base, unsigned long width);

  bool is_cbw() const { return !stored.has_value(); }
  Int length() const;
  Digit max_digit_base() const;        // digits lie in [0, base-1]
  Digit digit_at(const Int& pos) const;  // 1-based position inside one copy
};

// One APBFF tuple (l_i, b_i, v_i, eps_i, k_i, mu_i, m_i) plus its block X_i
// and derived lengths. mu_i is the uniform measure on base b_i.
struct ScheduleTuple {
  Int l;
  Digit b = 2;
  Digit v = 2;
  Rat eps;
  int k = 1;
  int m = 1;
  BlockRule block;

  Int block_len;  // |X_i|
  Int length;     // l_i * |X_i|
  Int cum_len;    // L_i
};

struct ScheduleTupleSpec {
  Int l;
  Digit b = 2;
  Digit v = 2;
  Rat eps;
  int k = 1;
  int m = 1;
  BlockRule block;
};

// Lazily generated, memoized tuple stream. Generators are pure functions of
// the index, so concurrent readers extending the cache agree on content; a
// mutex serializes extension and std::deque keeps settled references stable.
//
// Monotonicity contract checked on extension: (l_i), (b_i), (v_i), (k_i),
// (m_i) and |X_i| non-decreasing; (eps_i) strictly decreasing.
class ConstructionSchedule {
 public:
  // gen(i) for i = 1, 2, ...; nullopt terminates a finite schedule.
  using Generator = std::function<std::optional<ScheduleTupleSpec>(std::size_t)>;

  ConstructionSchedule(std::string descriptor, Generator gen);

  const ScheduleTuple& tuple(std::size_t i) const;  // 1-based
  bool has_tuple(std::size_t i) const;

  // Region index i with L_{i-1} < n <= L_i for a 1-based digit position n.
  std::size_t region_of(const Int& n) const;

  const std::string& descriptor() const { return descriptor_; }

 private:
  bool ensure(std::size_t i) const;  // true if tuple i exists

  std::string descriptor_;
  Generator gen_;
  mutable std::mutex mutex_;
  mutable std::deque<ScheduleTuple> tuples_;
  mutable bool exhausted_ = false;
};

using SchedulePtr = std::shared_ptr<const ConstructionSchedule>;

// Digit of the infinite concatenation X_1^{l_1} X_2^{l_2} ... at 1-based
// position n, by region lookup and reduction into a single copy of X_i.
Digit eta_digit_at(const ConstructionSchedule& sched, const Int& n);

}  // namespace cantor
