#include "cantor/schedule.hpp"

#include <cassert>

namespace cantor {

BlockRule BlockRule::explicit_block(Block b) {
  if (b.empty()) throw SequenceError("schedule block must be nonempty");
  BlockRule r;
  r.stored = std::move(b);
  return r;
}

BlockRule BlockRule::cbw(Digit base, unsigned long width) {
  if (base < 2 || width < 1) throw SequenceError("C(b,w) rule needs b >= 2, w >= 1");
  BlockRule r;
  r.cbw_base = base;
  r.cbw_width = width;
  return r;
}

Int BlockRule::length() const {
  if (stored) return Int(static_cast<unsigned long>(stored->size()));
  return cbw_length(Int(cbw_base), cbw_width);
}

Digit BlockRule::max_digit_base() const {
  if (!stored) return cbw_base;
  Digit mx = 0;
  for (Digit d : stored->digits) mx = std::max(mx, d);
  return mx + 1;
}

Digit BlockRule::digit_at(const Int& pos) const {
  if (stored) {
    if (pos < 1 || pos > Int(static_cast<unsigned long>(stored->size())))
      throw GuardError("block offset out of range");
    return stored->digits[to_u64(pos) - 1];
  }
  return cbw_digit_at(Int(cbw_base), cbw_width, pos);
}

ConstructionSchedule::ConstructionSchedule(std::string descriptor, Generator gen)
    : descriptor_(std::move(descriptor)), gen_(std::move(gen)) {}

bool ConstructionSchedule::ensure(std::size_t i) const {
  std::lock_guard<std::mutex> lock(mutex_);
  while (tuples_.size() < i) {
    if (exhausted_) return false;
    std::size_t next_index = tuples_.size() + 1;
    auto spec = gen_(next_index);
    if (!spec) {
      exhausted_ = true;
      return false;
    }
    ScheduleTuple t;
    t.l = spec->l;
    t.b = spec->b;
    t.v = spec->v;
    t.eps = spec->eps;
    t.k = spec->k;
    t.m = spec->m;
    t.block = spec->block;
    t.block_len = t.block.length();
    t.length = t.l * t.block_len;
    t.cum_len = (tuples_.empty() ? Int(0) : tuples_.back().cum_len) + t.length;

    if (t.b < 2 || t.v < 2 || t.k < 1 || t.m < 1 || sgn(t.l) < 0 || sgn(t.eps) <= 0)
      throw SequenceError("schedule tuple " + std::to_string(next_index) + " out of range");
    if (!tuples_.empty()) {
      const ScheduleTuple& prev = tuples_.back();
      if (t.l < prev.l || t.b < prev.b || t.v < prev.v || t.k < prev.k || t.m < prev.m ||
          t.block_len < prev.block_len)
        throw SequenceError("schedule tuple " + std::to_string(next_index) +
                            " breaks monotonicity");
      if (!(t.eps < prev.eps))
        throw SequenceError("schedule epsilon must strictly decrease at tuple " +
                            std::to_string(next_index));
    }
    tuples_.push_back(std::move(t));
  }
  return true;
}

const ScheduleTuple& ConstructionSchedule::tuple(std::size_t i) const {
  if (i < 1) throw SequenceError("schedule tuples are 1-based");
  if (!ensure(i)) throw SequenceError("schedule exhausted before tuple " + std::to_string(i));
  std::lock_guard<std::mutex> lock(mutex_);
  return tuples_[i - 1];
}

bool ConstructionSchedule::has_tuple(std::size_t i) const { return i >= 1 && ensure(i); }

std::size_t ConstructionSchedule::region_of(const Int& n) const {
  if (n < 1) throw SequenceError("digit positions are 1-based");
  // Grow the cache until L_i covers n, then binary search.
  constexpr std::size_t kMaxRegions = 1u << 20;
  std::size_t next = 1;
  while (true) {
    bool extended = ensure(next);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (!tuples_.empty() && tuples_.back().cum_len >= n) break;
      if (!extended)
        throw SequenceError("schedule exhausted before position " + n.get_str());
      next = tuples_.size() + 1;
    }
    if (next > kMaxRegions)
      throw GuardError("schedule produced " + std::to_string(kMaxRegions) +
                       " regions without covering position " + n.get_str());
  }
  std::lock_guard<std::mutex> lock(mutex_);
  std::size_t lo = 0, hi = tuples_.size();  // smallest index with cum_len >= n
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (tuples_[mid].cum_len >= n)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo + 1;
}

Digit eta_digit_at(const ConstructionSchedule& sched, const Int& n) {
  std::size_t i = sched.region_of(n);
  const ScheduleTuple& t = sched.tuple(i);
  Int before = t.cum_len - t.length;  // L_{i-1}
  Int offset = n - before - 1;        // 0-based within the region
  assert(offset >= 0 && offset < t.length);
  Int inside = offset % t.block_len;  // 0-based within one copy of X_i
  return t.block.digit_at(inside + 1);
}

}  // namespace cantor
