#include "cantor/stats.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <future>
#include <map>
#include <set>

#include "cantor/diophantine.hpp"

namespace cantor {

std::string mode_name(CountMode mode) {
  switch (mode) {
    case CountMode::plain:
      return "plain";
    case CountMode::ap_type_i:
      return "apI";
    case CountMode::ap_type_ii:
      return "apII";
  }
  return "?";
}

CountMode mode_from_name(const std::string& name) {
  if (name == "plain") return CountMode::plain;
  if (name == "apI" || name == "api" || name == "ap1") return CountMode::ap_type_i;
  if (name == "apII" || name == "apii" || name == "ap2") return CountMode::ap_type_ii;
  throw DescriptorError("unknown counting mode: " + name);
}

std::vector<std::uint64_t> make_checkpoints(std::uint64_t horizon, const DigitStream& x,
                                            const CheckpointPolicy& policy) {
  std::set<std::uint64_t> points;
  for (double g = 1; g <= static_cast<double>(horizon); g *= policy.geometric_factor)
    points.insert(static_cast<std::uint64_t>(std::ceil(g)));
  points.insert(horizon);

  if (policy.copy_boundaries) {
    if (SchedulePtr sched = x.boundary_schedule()) {
      std::uint64_t emitted = 0;
      Int h(static_cast<unsigned long>(horizon));
      for (std::size_t i = 1; emitted < policy.max_copy_checkpoints; ++i) {
        if (!sched->has_tuple(i)) break;
        const ScheduleTuple& t = sched->tuple(i);
        Int l_prev = t.cum_len - t.length;
        if (l_prev >= h) break;
        if (sgn(t.length) == 0) continue;
        for (Int boundary = l_prev + t.block_len; boundary <= t.cum_len && boundary <= h;
             boundary += t.block_len) {
          points.insert(to_u64(boundary));
          if (++emitted >= policy.max_copy_checkpoints) break;
        }
      }
    }
  }

  std::vector<std::uint64_t> out(points.begin(), points.end());
  while (!out.empty() && out.back() > horizon) out.pop_back();
  return out;
}

namespace {

struct BlockCounter {
  const std::vector<Block>* blocks;
  std::size_t max_len = 0;
  std::vector<Digit> window;  // ring buffer of the last max_len digits
  std::uint64_t seen = 0;
  std::vector<std::uint64_t> counts;

  explicit BlockCounter(const std::vector<Block>& bs) : blocks(&bs), counts(bs.size(), 0) {
    for (const Block& b : bs) {
      if (b.empty()) throw SequenceError("counting blocks must be nonempty");
      max_len = std::max(max_len, b.size());
    }
    window.assign(max_len, -1);
  }

  // feed one digit at 1-based position `pos` of the counted sequence; counts
  // occurrences whose start position satisfies `accept_start`
  template <typename AcceptStart>
  void push(Digit d, AcceptStart accept_start) {
    window[static_cast<std::size_t>(seen % max_len)] = d;
    ++seen;
    for (std::size_t bi = 0; bi < blocks->size(); ++bi) {
      const Block& b = (*blocks)[bi];
      if (seen < b.size()) continue;
      std::uint64_t start = seen - b.size() + 1;
      if (!accept_start(start)) continue;
      bool match = true;
      for (std::size_t i = 0; i < b.size() && match; ++i) {
        Digit got = window[static_cast<std::size_t>((start - 1 + i) % max_len)];
        if (got != b.digits[i]) match = false;
      }
      if (match) ++counts[bi];
    }
  }
};

}  // namespace

RatioSeries count_stream(const DigitStream& x, const BasicSequence& q,
                         const std::vector<Block>& blocks, const CounterSpec& spec,
                         std::uint64_t horizon, const CheckpointPolicy& policy) {
  if (blocks.empty()) throw SequenceError("count_stream needs at least one block");
  if (spec.m < 1 || spec.r >= spec.m) throw SequenceError("need m >= 1 and r in [0, m-1]");

  RatioSeries series;
  std::vector<std::uint64_t> checkpoints = make_checkpoints(horizon, x, policy);

  // Denominator accumulators, one per distinct block length. For the AP
  // modes they carry the mode's restriction; each owns a q-cursor advanced
  // lazily at checkpoints (aligned differently per k).
  std::set<std::size_t> lengths;
  for (const Block& b : blocks) lengths.insert(b.size());

  struct Denominator {
    int k;
    QnkAccumulator acc;
    BasicSequence::Cursor cursor;
    std::uint64_t pushed = 0;
  };
  std::vector<Denominator> denoms;
  for (std::size_t k : lengths) {
    int ki = static_cast<int>(k);
    if (spec.mode == CountMode::plain) {
      denoms.push_back({ki, QnkAccumulator(ki), q.cursor(), 0});
    } else if (spec.mode == CountMode::ap_type_i) {
      std::uint64_t first = (spec.r == 0) ? spec.m : spec.r;
      denoms.push_back({ki, QnkAccumulator(ki, spec.m, first), q.cursor(), 0});
    } else {
      BasicSequence extracted =
          BasicSequence::lambda(q, IndexSequence::arithmetic(spec.m, spec.r));
      denoms.push_back({ki, QnkAccumulator(ki), extracted.cursor(), 0});
    }
  }

  BlockCounter counter(blocks);
  auto digit_cursor = x.cursor();
  auto q_check = q.cursor();  // validity + canonical-form monitor

  std::uint64_t max_run = 0, run = 0;
  std::uint64_t extracted_count = 0;
  std::size_t next_cp = 0;

  auto emit_rows = [&](std::uint64_t n) {
    for (Denominator& d : denoms) {
      // plain/apI sums need q_1..q_{n+k-1}; apII needs T(n)+k-1 extracted values
      std::uint64_t need;
      if (spec.mode == CountMode::ap_type_ii) {
        std::uint64_t t_count =
            (spec.r == 0) ? n / spec.m : (n >= spec.r ? (n - spec.r) / spec.m + 1 : 0);
        need = t_count == 0 ? 0 : t_count + static_cast<std::uint64_t>(d.k) - 1;
      } else {
        need = n + static_cast<std::uint64_t>(d.k) - 1;
      }
      while (d.pushed < need) {
        d.acc.push(d.cursor.next().value_d);
        ++d.pushed;
      }
    }
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const Block& b = blocks[bi];
      const Denominator* d = nullptr;
      for (const Denominator& cand : denoms)
        if (cand.k == static_cast<int>(b.size())) d = &cand;
      assert(d);
      // the accumulator may have run ahead of this checkpoint; recompute the
      // term count for the prefix instead of trusting acc state
      SeriesRow row;
      row.n = n;
      row.mode = spec.mode;
      row.m = spec.m;
      row.r = spec.r;
      row.block = b.to_string();
      row.count = counter.counts[bi];
      row.denominator = d->acc.sum().value;
      row.pre_asymptotic = row.denominator < policy.min_denominator;
      row.ratio = row.denominator > 0 ? static_cast<double>(row.count) / row.denominator : 0.0;
      series.rows.push_back(row);
    }
  };

  for (std::uint64_t n = 1; n <= horizon; ++n) {
    Digit e = digit_cursor.next();
    QView qv = q_check.next();
    if (e < 0 || (qv.fits_i64 && e >= qv.value_i))
      throw SequenceError("digit " + std::to_string(e) + " out of range at position " +
                          std::to_string(n));
    if (qv.fits_i64 && e == qv.value_i - 1) {
      ++run;
      max_run = std::max(max_run, run);
    } else {
      run = 0;
    }

    switch (spec.mode) {
      case CountMode::plain:
        counter.push(e, [](std::uint64_t) { return true; });
        break;
      case CountMode::ap_type_i:
        counter.push(e, [&](std::uint64_t start) { return start % spec.m == spec.r; });
        break;
      case CountMode::ap_type_ii:
        if (n % spec.m == spec.r) {
          ++extracted_count;
          counter.push(e, [](std::uint64_t) { return true; });
        }
        break;
    }

    while (next_cp < checkpoints.size() && checkpoints[next_cp] == n) {
      emit_rows(n);
      ++next_cp;
    }
  }

  if (const PsiDiagnostics* diag = digit_cursor.psi_diagnostics()) {
    series.has_psi_diagnostics = true;
    series.psi = *diag;
  }
  series.longest_max_digit_run = max_run;
  series.canonical_form_flag = max_run >= policy.canonical_run_threshold;
  return series;
}

namespace {

// Occurrence count over one start-position range [from, to] (1-based,
// clamped); shared kernel of the serial and parallel paths.
void count_range(std::span<const Digit> digits, const std::vector<Block>& blocks,
                 std::uint64_t m, std::uint64_t r, bool restrict_starts, std::uint64_t from,
                 std::uint64_t to, std::vector<std::uint64_t>& counts) {
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const Block& b = blocks[bi];
    if (digits.size() + 1 < b.size() + from) continue;
    std::uint64_t last = std::min<std::uint64_t>(to, digits.size() - b.size() + 1);
    for (std::uint64_t p = from; p <= last; ++p) {
      if (restrict_starts && p % m != r) continue;
      bool match = true;
      for (std::size_t i = 0; i < b.size() && match; ++i)
        if (digits[p - 1 + i] != b.digits[i]) match = false;
      if (match) ++counts[bi];
    }
  }
}

std::vector<Digit> extract_span(std::span<const Digit> digits, std::uint64_t m, std::uint64_t r) {
  std::vector<Digit> out;
  std::uint64_t first = (r == 0) ? m : r;
  for (std::uint64_t p = first; p <= digits.size(); p += m) out.push_back(digits[p - 1]);
  return out;
}

}  // namespace

std::vector<std::uint64_t> count_finite(std::span<const Digit> digits,
                                        const std::vector<Block>& blocks,
                                        const CounterSpec& spec) {
  std::vector<std::uint64_t> counts(blocks.size(), 0);
  if (spec.mode == CountMode::ap_type_ii) {
    std::vector<Digit> sub = extract_span(digits, spec.m, spec.r);
    count_range(sub, blocks, 1, 0, false, 1, sub.size(), counts);
  } else {
    bool restrict = spec.mode == CountMode::ap_type_i;
    count_range(digits, blocks, spec.m, spec.r, restrict, 1, digits.size(), counts);
  }
  return counts;
}

std::vector<std::uint64_t> count_finite_parallel(std::span<const Digit> digits,
                                                 const std::vector<Block>& blocks,
                                                 const CounterSpec& spec, int threads) {
  if (threads < 1) threads = 1;
  std::vector<Digit> extracted;
  std::span<const Digit> view = digits;
  std::uint64_t m = spec.m, r = spec.r;
  bool restrict = spec.mode == CountMode::ap_type_i;
  if (spec.mode == CountMode::ap_type_ii) {
    extracted = extract_span(digits, spec.m, spec.r);
    view = extracted;
    m = 1;
    r = 0;
    restrict = false;
  }
  std::uint64_t n = view.size();
  if (n == 0 || threads == 1) return count_finite(digits, blocks, spec);

  // Start positions are partitioned across chunks; each worker reads up to
  // max block length - 1 digits past its boundary, so counts merge by plain
  // addition and match the serial pass exactly.
  std::uint64_t chunk = (n + static_cast<std::uint64_t>(threads) - 1) / threads;
  std::vector<std::future<std::vector<std::uint64_t>>> futures;
  for (int w = 0; w < threads; ++w) {
    std::uint64_t from = static_cast<std::uint64_t>(w) * chunk + 1;
    std::uint64_t to = std::min<std::uint64_t>(n, from + chunk - 1);
    if (from > to) break;
    futures.push_back(std::async(std::launch::async, [=, &blocks]() {
      std::vector<std::uint64_t> local(blocks.size(), 0);
      count_range(view, blocks, m, r, restrict, from, to, local);
      return local;
    }));
  }
  std::vector<std::uint64_t> counts(blocks.size(), 0);
  for (auto& f : futures) {
    auto local = f.get();
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += local[i];
  }
  return counts;
}

Rat predicted_limit(const std::vector<Rat>& c, const Int& d, int k, CountMode mode,
                    std::uint64_t m, std::uint64_t r) {
  switch (mode) {
    case CountMode::plain: {
      Rat denom = consecutive_product_sum(c, k);
      if (denom == 0) throw SequenceError("predicted limit: empty product sum");
      return Rat(d) / denom;
    }
    case CountMode::ap_type_i:
    case CountMode::ap_type_ii: {
      Rat denom = ap_product_sum(c, k, static_cast<int>(m), static_cast<int>(r),
                                 mode == CountMode::ap_type_i ? ApVariant::type_i
                                                              : ApVariant::type_ii);
      if (denom == 0) throw SequenceError("predicted limit: empty product sum");
      Rat target = Rat(d) / Rat(Int(static_cast<unsigned long>(m)));
      return target / denom;
    }
  }
  throw SequenceError("unreachable mode");
}

std::vector<RatioNormalityRow> ratio_normality_series(const DigitStream& x, const BasicSequence& q,
                                                      const Block& b1, const Block& b2,
                                                      std::uint64_t horizon,
                                                      const CheckpointPolicy& policy) {
  if (b1.size() != b2.size())
    throw SequenceError("ratio normality compares blocks of equal length");
  std::vector<Block> blocks{b1, b2};
  RatioSeries series = count_stream(x, q, blocks, CounterSpec{}, horizon, policy);
  std::vector<RatioNormalityRow> out;
  for (std::size_t i = 0; i + 1 < series.rows.size(); i += 2) {
    const SeriesRow& r1 = series.rows[i];
    const SeriesRow& r2 = series.rows[i + 1];
    assert(r1.n == r2.n);
    RatioNormalityRow row;
    row.n = r1.n;
    row.count_1 = r1.count;
    row.count_2 = r2.count;
    row.defined = r2.count > 0;
    row.ratio = row.defined ? static_cast<double>(r1.count) / static_cast<double>(r2.count) : 0.0;
    out.push_back(row);
  }
  return out;
}

DiscrepancyResult distribution_discrepancy(const DigitStream& x, const BasicSequence& q,
                                           std::uint64_t n, int tail_digits) {
  if (tail_digits < 1) throw SequenceError("tail approximation needs at least one digit");
  if (n == 0) return {};
  constexpr std::uint64_t kMaxPoints = 5'000'000;
  if (n > kMaxPoints) throw GuardError("discrepancy horizon over the guard");

  std::uint64_t total = n + static_cast<std::uint64_t>(tail_digits);
  std::vector<Digit> digits(total);
  std::vector<double> qs(total);
  auto dc = x.cursor();
  auto qc = q.cursor();
  for (std::uint64_t i = 0; i < total; ++i) {
    digits[i] = dc.next();
    qs[i] = qc.next().value_d;
  }

  std::vector<double> points(n);
  double worst_tail = 0;
  for (std::uint64_t j = 0; j < n; ++j) {
    double prod = 1;
    double val = 0;
    for (int s = 0; s < tail_digits; ++s) {
      prod *= qs[j + static_cast<std::uint64_t>(s)];
      if (std::isinf(prod)) break;
      val += static_cast<double>(digits[j + static_cast<std::uint64_t>(s)]) / prod;
    }
    points[j] = val;
    worst_tail = std::max(worst_tail, std::isinf(prod) ? 0.0 : 1.0 / prod);
  }

  std::sort(points.begin(), points.end());
  double dstar = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    double xi = points[i];
    double up = static_cast<double>(i + 1) / static_cast<double>(n) - xi;
    double down = xi - static_cast<double>(i) / static_cast<double>(n);
    dstar = std::max({dstar, up, down});
  }

  DiscrepancyResult res;
  res.star_discrepancy = dstar;
  res.truncation_error_bound = worst_tail;
  res.points = n;
  return res;
}

}  // namespace cantor
