#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cantor/core.hpp"

namespace cantor {

// A block is a finite ordered tuple of non-negative integer digits. When
// base_hint = b is present, every digit lies in [0, b-1].
struct Block {
  std::vector<Digit> digits;
  std::optional<Digit> base_hint;

  Block() = default;
  explicit Block(std::vector<Digit> d, std::optional<Digit> base = std::nullopt);

  std::size_t size() const { return digits.size(); }
  bool empty() const { return digits.empty(); }
  Digit operator[](std::size_t i) const { return digits[i]; }

  bool operator==(const Block& o) const { return digits == o.digits; }

  // Text format: comma-separated decimal digits in parentheses, "(0,1,1)".
  static Block parse(const std::string& text);
  std::string to_string() const;
};

// The (b,b)-uniform measure lambda_b: measure(B) = b^{-|B|} for every block.
struct UniformMeasure {
  Digit base = 2;

  explicit UniformMeasure(Digit b);
  Rat measure(const Block& b) const { return pow_rat(Int(base), -static_cast<long>(b.size())); }
  Rat measure_len(std::size_t k) const { return pow_rat(Int(base), -static_cast<long>(k)); }
};

struct CountResult {
  std::uint64_t count = 0;
  std::uint64_t positions_scanned = 0;
};

// Counting conventions used throughout:
//   * positions are 1-based;
//   * residue class r in [0, m-1] selects start positions p with p = r (mod m),
//     so for r = 0 the first eligible position is p = m;
//   * occurrences overlap freely.

// Occurrences of B in Y starting at positions p = r (mod m), p <= |Y|-|B|+1.
// m = 1 gives the plain count N(B, Y).
CountResult count_occurrences(const Block& pattern, const Block& text, std::uint64_t m = 1,
                              std::uint64_t r = 0);

// Extracts the subsequence of Y at positions = r (mod m) (ascending) and
// counts contiguous occurrences of B inside it.
CountResult count_occurrences_extracted(const Block& pattern, const Block& text, std::uint64_t m,
                                        std::uint64_t r);

Block extract_subsequence(const Block& text, std::uint64_t m, std::uint64_t r);

// ---------------------------------------------------------------------------
// C(b,w): the concatenation of all b^w base-b blocks of length w in
// lexicographic order; |C(b,w)| = w * b^w. Block t (0-based) spells the w
// base-b digits of the numeral t, most significant first.
// ---------------------------------------------------------------------------

inline Int cbw_length(const Int& b, unsigned long w) { return Int(w) * pow_int(b, w); }

// Materializes C(b,w). Guarded: throws GuardError when w * b^w exceeds the
// digit budget (use cbw_digit_at for random access instead).
Block concat_lexicographic(Digit b, unsigned long w, std::uint64_t budget = 100'000'000);

// Digit of C(b,w) at 1-based position p, computed without materializing:
//   t = (p-1) div w,  j = (p-1) mod w,  digit = floor(t / b^(w-1-j)) mod b.
Digit cbw_digit_at(const Int& b, unsigned long w, const Int& p);

// Emits the digits of C(b,w) one at a time by running a base-b odometer over
// the block numerals. Deliberately a different route than cbw_digit_at's
// div/mod arithmetic so the two can cross-check each other.
class CbwOdometer {
 public:
  CbwOdometer(Digit b, unsigned long w);

  Digit next();              // next digit; wraps to the start after w * b^w digits
  bool wrapped() const { return wrapped_; }  // true once a full pass completed
  void reset();

 private:
  Digit base_;
  std::vector<Digit> numeral_;  // current block, most significant first
  std::size_t pos_ = 0;
  bool wrapped_ = false;
};

// ---------------------------------------------------------------------------
// Normality predicates for finite blocks.
// ---------------------------------------------------------------------------

// True iff for every block B of length k' <= k in base mu.base,
//   (1-eps) |Y| mu(B) <= N(B, Y) <= (1+eps) |Y| mu(B).
// Exact rational comparisons; |Y| = 0 is rejected.
bool is_normal_block(const Block& y, const Rat& eps, int k, const UniformMeasure& mu);

enum class ApVariant { type_i, type_ii };

// True iff for every block B of length k' <= k in base mu.base, every
// m' <= m and every residue r in [0, m'-1], the type I count (start positions
// = r mod m') resp. type II count (inside the extracted subsequence) lies in
// the closed interval
//   [ mu(B) ceil((|Y|-r)/m') (1-eps), mu(B) ceil((|Y|-r)/m') (1+eps) ].
bool is_normal_block_ap(const Block& y, const Rat& eps, int k, int m, const UniformMeasure& mu,
                        ApVariant variant);

// Largest deviation max_B |N / (mu(B) ceil((|Y|-r)/m')) - 1| over the same
// grid; is_normal_block_ap(...) == (measured_ap_epsilon(...) <= eps).
Rat measured_ap_epsilon(const Block& y, int k, int m, const UniformMeasure& mu, ApVariant variant);

// ---------------------------------------------------------------------------
// Counting bounds for C(b,w), with n = |C(b,w)| and a block length k:
//   type I : floor((w-k+1)/m) b^(w-k) <= N_{n,m,r}  < (w/m + 2) b^(w-k)
//   type II: max((floor((w-r)/m)-k+1) b^(w-k), 0) <= N'_{n,m,r} <= ceil((w-r)/m) b^(w-k)
// The type II upper bound is attained (e.g. m = 1, k = 1), so callers should
// treat equality there as a flagged boundary case rather than a violation.
// ---------------------------------------------------------------------------

struct CbwCountBounds {
  Rat lo_type_i, hi_type_i, lo_type_ii, hi_type_ii;
};

CbwCountBounds cbw_count_bounds(Digit b, unsigned long w, std::uint64_t m, std::uint64_t r, int k);

// Epsilon thresholds at which C(b,w) is (eps,K,M)-normal of each type
// (valid for K < w, M! | w; type II also needs b^w > r/m + 3r/w):
//   type I : (M + max(K, M)) / w
//   type II: (K + 1) M / w
Rat cbw_normal_threshold(int K, int M, unsigned long w, ApVariant variant);

}  // namespace cantor
