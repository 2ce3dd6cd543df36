#pragma once

#include <span>
#include <string>
#include <vector>

#include "cantor/block.hpp"
#include "cantor/digit_stream.hpp"
#include "cantor/sequence.hpp"

namespace cantor {

enum class CountMode { plain, ap_type_i, ap_type_ii };

std::string mode_name(CountMode mode);
CountMode mode_from_name(const std::string& name);

// One counting request: plain ignores (m, r); the AP modes restrict start
// positions (type I) or extract the subsequence first (type II).
struct CounterSpec {
  CountMode mode = CountMode::plain;
  std::uint64_t m = 1;
  std::uint64_t r = 0;
};

struct SeriesRow {
  std::uint64_t n = 0;  // prefix length in the original stream
  CountMode mode = CountMode::plain;
  std::uint64_t m = 1, r = 0;
  std::string block;
  std::uint64_t count = 0;
  double denominator = 0;  // Q_n^(k), Q_{n,m,r}^(k) or the extracted-sequence sum
  double ratio = 0;        // count / denominator where defined
  bool pre_asymptotic = false;
};

struct RatioSeries {
  std::vector<SeriesRow> rows;
  // diagnostics carried out of the single pass
  bool has_psi_diagnostics = false;
  PsiDiagnostics psi;
  std::uint64_t longest_max_digit_run = 0;  // run of E_n == q_n - 1 (canonical-form monitor)
  bool canonical_form_flag = false;
};

// Checkpoints: geometric (ceil of powers of `geometric_factor`), plus the
// copy boundaries of the underlying eta construction when present (positions
// L_{i-1} + c |X_i|; the error analysis is cleanest there), plus the horizon.
struct CheckpointPolicy {
  double geometric_factor = 1.5;
  bool copy_boundaries = true;
  std::uint64_t max_copy_checkpoints = 8192;
  double min_denominator = 10.0;  // rows below this are marked pre-asymptotic
  std::uint64_t canonical_run_threshold = 64;
};

std::vector<std::uint64_t> make_checkpoints(std::uint64_t horizon, const DigitStream& x,
                                            const CheckpointPolicy& policy);

// Single pass over digits 1..horizon updating counters for all blocks, with
// rows emitted at every checkpoint. Counts at checkpoint n cover occurrences
// lying fully inside the prefix of length n, matching count_occurrences on
// the materialized prefix. Denominators follow the mode:
//   plain      Q_n^(k)
//   ap type I  Q_{n,m,r}^(k)
//   ap type II (Lambda_{A_{m,r}} Q)_T^(k) with T = #extracted positions <= n
RatioSeries count_stream(const DigitStream& x, const BasicSequence& q,
                         const std::vector<Block>& blocks, const CounterSpec& spec,
                         std::uint64_t horizon, const CheckpointPolicy& policy = {});

// Final counts over a materialized digit span (reference single-thread path).
std::vector<std::uint64_t> count_finite(std::span<const Digit> digits,
                                        const std::vector<Block>& blocks,
                                        const CounterSpec& spec);

// Chunk-parallel variant; the merge is associative addition over disjoint
// start-position ranges, so the result is bit-equal to count_finite.
std::vector<std::uint64_t> count_finite_parallel(std::span<const Digit> digits,
                                                 const std::vector<Block>& blocks,
                                                 const CounterSpec& spec, int threads);

// Predicted limiting ratio for a sequence built as Xi(P, c, d) against the
// matching divergence sum (exact rational):
//   plain      d / sum_{j=0}^{t-k} c_j ... c_{j+k-1}
//   ap type I  (d/m) / sum_{j=0}^{floor((t-k-r)/m)} c_{r+jm} c_{r+jm+1} ... c_{r+jm+k-1}
//   ap type II (d/m) / sum_{j=0}^{floor((t-r-1)/m)-k+1} c_{r+jm} c_{r+(j+1)m} ... c_{r+(j+k-1)m}
// Value 1 signals membership in the corresponding normality set.
Rat predicted_limit(const std::vector<Rat>& c, const Int& d, int k, CountMode mode,
                    std::uint64_t m = 1, std::uint64_t r = 0);

struct RatioNormalityRow {
  std::uint64_t n = 0;
  std::uint64_t count_1 = 0, count_2 = 0;
  double ratio = 0;
  bool defined = false;  // false while the second count is zero
};

// N_n(B1, x) / N_n(B2, x) at checkpoints; |B1| = |B2| required.
std::vector<RatioNormalityRow> ratio_normality_series(const DigitStream& x, const BasicSequence& q,
                                                      const Block& b1, const Block& b2,
                                                      std::uint64_t horizon,
                                                      const CheckpointPolicy& policy = {});

struct DiscrepancyResult {
  double star_discrepancy = 0;
  double truncation_error_bound = 0;
  std::uint64_t points = 0;
};

// Star discrepancy of the orbit T_{Q,j}(x) = (q_1...q_j) x mod 1, j < n,
// where each point is approximated by 0.E_{j+1}...E_{j+tail_digits}. The
// reported bound dominates the per-point truncation error.
DiscrepancyResult distribution_discrepancy(const DigitStream& x, const BasicSequence& q,
                                           std::uint64_t n, int tail_digits);

}  // namespace cantor
