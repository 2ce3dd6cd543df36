#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cantor/block.hpp"
#include "cantor/core.hpp"
#include "cantor/schedule.hpp"

namespace cantor {

// Consecutive-product sum S_k(c) = sum_{j=0}^{t-k} c_j c_{j+1} ... c_{j+k-1}
// (exact; 1 <= k <= t).
Rat consecutive_product_sum(const std::vector<Rat>& c, int k);

// AP variants over the coefficient vector:
//   type I : sum_{j=0}^{floor((t-k-r)/m)}    c_{r+jm} c_{r+jm+1} ... c_{r+jm+k-1}
//   type II: sum_{j=0}^{floor((t-r-1)/m)-k+1} c_{r+jm} c_{r+(j+1)m} ... c_{r+(j+k-1)m}
// Throws on an empty index range.
Rat ap_product_sum(const std::vector<Rat>& c, int k, int m, int r, ApVariant variant);

// The t x (t+1) relation system: S_k(c) = d for k in equal_orders and
// S_k(c) != d for k in unequal_orders, with optional AP side conditions
// targeting d/m.
struct RelationSystem {
  int t = 2;
  std::set<int> equal_orders;    // A
  std::set<int> unequal_orders;  // B

  struct ApConstraint {
    int k = 1;
    int m = 1;
    int r = 0;
    ApVariant variant = ApVariant::type_i;
    bool require_equal = true;  // ap sum == d/m, or explicitly != d/m
  };
  std::vector<ApConstraint> ap_constraints;

  void validate() const;  // A and B partition {1..t}
};

struct DioSolution {
  std::vector<Rat> c;  // positive, canonical lowest terms
  Int d;
};

struct RelationCheck {
  std::string label;
  Rat value;
  Rat target;
  bool require_equal = true;
  bool pass = false;
};

struct Certificate {
  std::vector<RelationCheck> checks;
  bool pass = true;
};

// Exact verification: domain checks (c_j > 0; d >= t+1; d in lcm(t,m) N_2
// when AP constraints are present) followed by every relation, all in exact
// arithmetic. Failures land in the certificate, never throw.
Certificate verify_solution(const RelationSystem& sys, const DioSolution& sol);

struct SearchReport {
  std::optional<DioSolution> solution;
  Certificate certificate;  // of the returned solution
  std::uint64_t candidates_tried = 0;
  bool exhausted = false;  // true when the bounded space had no solution
  long max_h = 0;
  long max_d = 0;
};

// Depth-first enumeration over d ascending and rational tuples with
// numerator and denominator up to max_h (coprime, ordered by value), pruning
// with the product relation when t is an equal-order. Deterministic; the
// outer d loop fans out across threads.
SearchReport solve_exact(const RelationSystem& sys, long max_h, long max_d, int threads = 2);

// Xi feasibility bridge: every alpha_j must divide every p_n. For a
// schedule-backed P this reduces to alpha_j | b_i for all regions; checks the
// first `regions` tuples and reports the offending pair if any.
struct DivisibilityReport {
  bool ok = true;
  std::size_t failing_region = 0;
  std::string failing_alpha;
};
DivisibilityReport validate_divisibility(const std::vector<Rat>& c,
                                         const ConstructionSchedule& sched, std::size_t regions);

// ---------------------------------------------------------------------------
// Box-constrained solver for the near-symmetric system S_k(c) = 2t + eps_k,
// k = 1..t, over the box [t, t+1] x [1 + 1/(2t), 1 + 1/(t-1)]^(t-1).
// Damped Newton with analytic Jacobian and per-step box projection.
// ---------------------------------------------------------------------------

struct BoxSolveResult {
  std::vector<double> c;
  double max_residual = 0;
  int iterations = 0;
  bool converged = false;
  bool in_box = false;
};

BoxSolveResult solve_box(int t, const std::vector<double>& eps, int max_iterations = 400,
                         double tolerance = 1e-9);

// Exact re-evaluation of the residuals at a rational approximation of the
// iterate (used to cross-check the floating path).
std::vector<Rat> box_residuals_exact(int t, const std::vector<Rat>& c,
                                     const std::vector<Rat>& eps);

}  // namespace cantor
