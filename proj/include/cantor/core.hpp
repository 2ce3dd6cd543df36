#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace cantor {

// Arbitrary-width integers and exact rationals. GMP carries all schedule
// arithmetic (repetition counts like 3^720 * 7^4320, cumulative lengths,
// lexicographic-block positions); machine words carry digit values and
// streaming positions.
using Int = mpz_class;
using Rat = mpq_class;
using Digit = std::int64_t;

// Materialization / horizon guards (CLI exit code 2).
struct GuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed text descriptors and manifests (CLI exit code 3).
struct DescriptorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structural violations: q_n < 2, divisibility failures, non-monotone index
// streams, digits out of range.
struct SequenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Int pow_int(const Int& base, unsigned long exp) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
  return r;
}

inline Int pow_int(long base, unsigned long exp) { return pow_int(Int(base), exp); }

// base^exp as an exact rational; exp may be negative.
inline Rat pow_rat(const Int& base, long exp) {
  if (exp >= 0) return Rat(pow_int(base, static_cast<unsigned long>(exp)));
  Rat r(1, pow_int(base, static_cast<unsigned long>(-exp)));
  r.canonicalize();
  return r;
}

inline bool fits_i64(const Int& v) {
  static const Int lo(std::numeric_limits<std::int64_t>::min());
  static const Int hi(std::numeric_limits<std::int64_t>::max());
  return v >= lo && v <= hi;
}

inline std::int64_t to_i64(const Int& v, const char* what = "value") {
  if (!fits_i64(v)) throw GuardError(std::string(what) + " exceeds 64-bit range: " + v.get_str());
  if (v.fits_slong_p()) return v.get_si();
  // 32-bit long fallback; not hit on this platform but keeps the helper total.
  return static_cast<std::int64_t>(mpz_get_d(v.get_mpz_t()));
}

inline std::uint64_t to_u64(const Int& v, const char* what = "value") {
  if (sgn(v) < 0) throw GuardError(std::string(what) + " is negative: " + v.get_str());
  std::int64_t s = to_i64(v, what);
  return static_cast<std::uint64_t>(s);
}

inline Int floor_div(const Int& a, const Int& b) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

inline Int ceil_div(const Int& a, const Int& b) {
  Int q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

inline std::uint64_t ceil_div_u64(std::uint64_t a, std::uint64_t b) { return a / b + (a % b != 0); }

// Parses "n" or "n/d" into a canonical rational.
Rat rat_from_string(const std::string& s);

std::string rat_to_string(const Rat& r);

}  // namespace cantor
