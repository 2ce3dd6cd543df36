#include "cantor/block.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace cantor {

Rat rat_from_string(const std::string& s) {
  try {
    Rat r(s);
    r.canonicalize();
    if (r.get_den() == 0) throw DescriptorError("zero denominator in rational: " + s);
    return r;
  } catch (const std::invalid_argument&) {
    throw DescriptorError("malformed rational: " + s);
  }
}

std::string rat_to_string(const Rat& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

Block::Block(std::vector<Digit> d, std::optional<Digit> base) : digits(std::move(d)), base_hint(base) {
  for (Digit v : digits) {
    if (v < 0) throw SequenceError("block digit is negative");
    if (base_hint && v >= *base_hint)
      throw SequenceError("block digit " + std::to_string(v) + " outside base " +
                          std::to_string(*base_hint));
  }
}

Block Block::parse(const std::string& text) {
  std::size_t a = text.find('(');
  std::size_t b = text.rfind(')');
  if (a == std::string::npos || b == std::string::npos || b < a)
    throw DescriptorError("block literal must be parenthesized: " + text);
  std::string body = text.substr(a + 1, b - a - 1);
  std::vector<Digit> digits;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    try {
      digits.push_back(std::stoll(item));
    } catch (const std::exception&) {
      throw DescriptorError("malformed block digit '" + item + "' in " + text);
    }
  }
  return Block(std::move(digits));
}

std::string Block::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(digits[i]);
  }
  out += ")";
  return out;
}

UniformMeasure::UniformMeasure(Digit b) : base(b) {
  if (b < 2) throw SequenceError("uniform measure base must be >= 2");
}

namespace {

bool matches_at(const Block& pattern, const Block& text, std::size_t start0) {
  for (std::size_t i = 0; i < pattern.size(); ++i)
    if (text.digits[start0 + i] != pattern.digits[i]) return false;
  return true;
}

}  // namespace

CountResult count_occurrences(const Block& pattern, const Block& text, std::uint64_t m,
                              std::uint64_t r) {
  if (pattern.empty()) throw SequenceError("occurrence pattern must be nonempty");
  if (m < 1 || r >= m) throw SequenceError("need m >= 1 and r in [0, m-1]");
  CountResult res;
  if (text.size() < pattern.size()) return res;
  std::uint64_t last_start = text.size() - pattern.size() + 1;  // 1-based
  std::uint64_t first = (r == 0) ? m : r;
  for (std::uint64_t p = first; p <= last_start; p += m) {
    ++res.positions_scanned;
    if (matches_at(pattern, text, p - 1)) ++res.count;
  }
  return res;
}

Block extract_subsequence(const Block& text, std::uint64_t m, std::uint64_t r) {
  if (m < 1 || r >= m) throw SequenceError("need m >= 1 and r in [0, m-1]");
  std::vector<Digit> out;
  std::uint64_t first = (r == 0) ? m : r;
  for (std::uint64_t p = first; p <= text.size(); p += m) out.push_back(text.digits[p - 1]);
  return Block(std::move(out), text.base_hint);
}

CountResult count_occurrences_extracted(const Block& pattern, const Block& text, std::uint64_t m,
                                        std::uint64_t r) {
  Block sub = extract_subsequence(text, m, r);
  return count_occurrences(pattern, sub, 1, 0);
}

Block concat_lexicographic(Digit b, unsigned long w, std::uint64_t budget) {
  if (b < 2) throw SequenceError("lexicographic concatenation needs base >= 2");
  if (w < 1) throw SequenceError("lexicographic concatenation needs width >= 1");
  Int len = cbw_length(Int(b), w);
  if (len > Int(budget))
    throw GuardError("C(" + std::to_string(b) + "," + std::to_string(w) + ") has " + len.get_str() +
                     " digits, over the materialization budget of " + std::to_string(budget) +
                     "; use random access instead");
  std::vector<Digit> digits;
  digits.reserve(to_u64(len));
  CbwOdometer odo(b, w);
  std::uint64_t n = to_u64(len);
  for (std::uint64_t i = 0; i < n; ++i) digits.push_back(odo.next());
  return Block(std::move(digits), b);
}

Digit cbw_digit_at(const Int& b, unsigned long w, const Int& p) {
  if (p < 1 || p > cbw_length(b, w))
    throw GuardError("position " + p.get_str() + " outside C(b," + std::to_string(w) + ")");
  Int zero_based = p - 1;
  Int block_index = floor_div(zero_based, Int(w));
  unsigned long offset = to_u64(zero_based - block_index * w);
  Int shifted = floor_div(block_index, pow_int(b, w - 1 - offset));
  Int digit = shifted % b;
  return to_i64(digit, "C(b,w) digit");
}

CbwOdometer::CbwOdometer(Digit b, unsigned long w) : base_(b), numeral_(w, 0) {
  if (b < 2 || w < 1) throw SequenceError("odometer needs base >= 2 and width >= 1");
}

Digit CbwOdometer::next() {
  Digit out = numeral_[pos_];
  if (++pos_ == numeral_.size()) {
    pos_ = 0;
    // increment the numeral; all-(b-1) wraps back to all zeros
    std::size_t i = numeral_.size();
    while (i > 0) {
      --i;
      if (numeral_[i] + 1 < base_) {
        ++numeral_[i];
        break;
      }
      numeral_[i] = 0;
      if (i == 0) wrapped_ = true;
    }
  }
  return out;
}

void CbwOdometer::reset() {
  std::fill(numeral_.begin(), numeral_.end(), 0);
  pos_ = 0;
  wrapped_ = false;
}

namespace {

// Counts all base-b blocks of length k simultaneously: one pass per residue
// class with a rolling base-b window index. counts[index(B)] accumulates.
// index(B) = sum B[i] * b^(k-1-i). Requires b^k to stay small.
constexpr std::uint64_t kMaxPatternSpace = 1u << 24;

std::uint64_t pattern_space(Digit base, int k) {
  std::uint64_t space = 1;
  for (int i = 0; i < k; ++i) {
    space *= static_cast<std::uint64_t>(base);
    if (space > kMaxPatternSpace)
      throw GuardError("block enumeration space b^k too large (b=" + std::to_string(base) +
                       ", k=" + std::to_string(k) + ")");
  }
  return space;
}

// Counts of every base-b block of length k at start positions = r (mod m).
std::vector<std::uint64_t> count_all_patterns(std::span<const Digit> y, Digit base, int k,
                                              std::uint64_t m, std::uint64_t r) {
  std::uint64_t space = pattern_space(base, k);
  std::vector<std::uint64_t> counts(space, 0);
  if (y.size() < static_cast<std::size_t>(k)) return counts;
  std::uint64_t window = 0;
  std::uint64_t wrap = space / static_cast<std::uint64_t>(base);
  for (std::size_t i = 0; i < y.size(); ++i) {
    Digit d = y[i];
    if (d < 0 || d >= base) throw SequenceError("digit outside base during block count");
    window = (window % wrap) * static_cast<std::uint64_t>(base) + static_cast<std::uint64_t>(d);
    if (i + 1 >= static_cast<std::size_t>(k)) {
      std::uint64_t start = i + 2 - static_cast<std::uint64_t>(k);  // 1-based
      if (start % m == r) ++counts[window];
    }
  }
  return counts;
}

std::vector<Digit> extract_digits(std::span<const Digit> y, std::uint64_t m, std::uint64_t r) {
  std::vector<Digit> out;
  std::uint64_t first = (r == 0) ? m : r;
  for (std::uint64_t p = first; p <= y.size(); p += m) out.push_back(y[p - 1]);
  return out;
}

}  // namespace

bool is_normal_block(const Block& y, const Rat& eps, int k, const UniformMeasure& mu) {
  if (y.empty()) throw SequenceError("normality predicate rejects the empty block");
  if (k < 1) throw SequenceError("normality order must be >= 1");
  Rat n(static_cast<unsigned long>(y.size()));
  for (int len = 1; len <= k; ++len) {
    auto counts = count_all_patterns(y.digits, mu.base, len, 1, 0);
    Rat center = n * mu.measure_len(static_cast<std::size_t>(len));
    Rat lo = center * (Rat(1) - eps);
    Rat hi = center * (Rat(1) + eps);
    for (std::uint64_t c : counts) {
      Rat cnt(static_cast<unsigned long>(c));
      if (cnt < lo || cnt > hi) return false;
    }
  }
  return true;
}

namespace {

// Worst deviation from mu(B) * ceil((|Y|-r)/m') over all blocks of one length,
// both AP variants. Returns max |count/center - 1| as an exact rational.
Rat ap_deviation_for_length(const Block& y, int len, int m, const UniformMeasure& mu,
                            ApVariant variant) {
  Rat worst(0);
  Rat n(static_cast<unsigned long>(y.size()));
  for (int mp = 1; mp <= m; ++mp) {
    for (int r = 0; r < mp; ++r) {
      std::vector<std::uint64_t> counts;
      if (variant == ApVariant::type_i) {
        counts = count_all_patterns(y.digits, mu.base, len, static_cast<std::uint64_t>(mp),
                                    static_cast<std::uint64_t>(r));
      } else {
        auto sub = extract_digits(y.digits, static_cast<std::uint64_t>(mp),
                                  static_cast<std::uint64_t>(r));
        counts = count_all_patterns(sub, mu.base, len, 1, 0);
      }
      Int ceil_positions = ceil_div(Int(static_cast<unsigned long>(y.size())) - r, Int(mp));
      Rat center = Rat(ceil_positions) * mu.measure_len(static_cast<std::size_t>(len));
      if (center == 0) continue;
      for (std::uint64_t c : counts) {
        Rat dev = Rat(static_cast<unsigned long>(c)) / center - 1;
        if (dev < 0) dev = -dev;
        if (dev > worst) worst = dev;
      }
    }
  }
  return worst;
}

}  // namespace

Rat measured_ap_epsilon(const Block& y, int k, int m, const UniformMeasure& mu, ApVariant variant) {
  if (y.empty()) throw SequenceError("normality predicate rejects the empty block");
  if (k < 1 || m < 1) throw SequenceError("need k >= 1 and m >= 1");
  Rat worst(0);
  for (int len = 1; len <= k; ++len)
    worst = std::max(worst, ap_deviation_for_length(y, len, m, mu, variant));
  return worst;
}

bool is_normal_block_ap(const Block& y, const Rat& eps, int k, int m, const UniformMeasure& mu,
                        ApVariant variant) {
  return measured_ap_epsilon(y, k, m, mu, variant) <= eps;
}

CbwCountBounds cbw_count_bounds(Digit b, unsigned long w, std::uint64_t m, std::uint64_t r, int k) {
  if (b < 2 || w < 1 || m < 1 || r >= m || k < 1)
    throw SequenceError("cbw_count_bounds parameter out of range");
  Rat bwk = pow_rat(Int(b), static_cast<long>(w) - k);
  CbwCountBounds bounds;
  Int wk = Int(static_cast<long>(w) - k + 1);
  bounds.lo_type_i = Rat(wk >= 0 ? floor_div(wk, Int(static_cast<unsigned long>(m))) : Int(0)) * bwk;
  if (bounds.lo_type_i < 0) bounds.lo_type_i = 0;
  bounds.hi_type_i = (Rat(static_cast<unsigned long>(w)) / Rat(static_cast<unsigned long>(m)) + 2) * bwk;
  Int wr = Int(static_cast<unsigned long>(w)) - Int(static_cast<unsigned long>(r));
  Rat lo2 = Rat(floor_div(wr, Int(static_cast<unsigned long>(m))) - k + 1) * bwk;
  bounds.lo_type_ii = lo2 > 0 ? lo2 : Rat(0);
  bounds.hi_type_ii = Rat(ceil_div(wr, Int(static_cast<unsigned long>(m)))) * bwk;
  return bounds;
}

Rat cbw_normal_threshold(int K, int M, unsigned long w, ApVariant variant) {
  if (K < 1 || M < 1 || w < 1) throw SequenceError("threshold parameters out of range");
  Rat out;
  if (variant == ApVariant::type_i) {
    out = Rat(M + std::max(K, M), static_cast<unsigned long>(w));
  } else {
    out = Rat(static_cast<long>(K + 1) * M, static_cast<unsigned long>(w));
  }
  out.canonicalize();
  return out;
}

}  // namespace cantor
