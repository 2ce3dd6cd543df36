#include "cantor/diophantine.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <future>

namespace cantor {

Rat consecutive_product_sum(const std::vector<Rat>& c, int k) {
  int t = static_cast<int>(c.size());
  if (k < 1 || k > t) throw SequenceError("product sum order k out of [1, t]");
  Rat sum(0);
  for (int j = 0; j + k <= t; ++j) {
    Rat prod(1);
    for (int s = 0; s < k; ++s) prod *= c[static_cast<std::size_t>(j + s)];
    sum += prod;
  }
  return sum;
}

Rat ap_product_sum(const std::vector<Rat>& c, int k, int m, int r, ApVariant variant) {
  int t = static_cast<int>(c.size());
  if (k < 1 || k > t || m < 1 || r < 0 || r >= m)
    throw SequenceError("ap product sum parameters out of range");
  Rat sum(0);
  if (variant == ApVariant::type_i) {
    if (t - k - r < 0) throw SequenceError("ap product sum: empty index range");
    int jmax = (t - k - r) / m;
    for (int j = 0; j <= jmax; ++j) {
      Rat prod(1);
      for (int s = 0; s < k; ++s) prod *= c[static_cast<std::size_t>(r + j * m + s)];
      sum += prod;
    }
  } else {
    int jmax = (t - r - 1) / m - k + 1;
    if (jmax < 0) throw SequenceError("ap product sum: empty index range");
    for (int j = 0; j <= jmax; ++j) {
      Rat prod(1);
      for (int s = 0; s < k; ++s) prod *= c[static_cast<std::size_t>(r + (j + s) * m)];
      sum += prod;
    }
  }
  return sum;
}

void RelationSystem::validate() const {
  if (t < 2) throw SequenceError("relation systems need t >= 2");
  for (int k = 1; k <= t; ++k) {
    bool in_a = equal_orders.count(k) > 0;
    bool in_b = unequal_orders.count(k) > 0;
    if (in_a == in_b)
      throw SequenceError("orders must partition {1..t}: k = " + std::to_string(k) +
                          (in_a ? " in both sets" : " in neither set"));
  }
  for (int k : equal_orders)
    if (k < 1 || k > t) throw SequenceError("equal order out of range");
  for (int k : unequal_orders)
    if (k < 1 || k > t) throw SequenceError("unequal order out of range");
  for (const auto& ap : ap_constraints)
    if (ap.k < 1 || ap.k > t || ap.m < 1 || ap.r < 0 || ap.r >= ap.m)
      throw SequenceError("ap constraint out of range");
}

namespace {

Int lcm_int(const Int& a, const Int& b) {
  Int out;
  mpz_lcm(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

}  // namespace

Certificate verify_solution(const RelationSystem& sys, const DioSolution& sol) {
  sys.validate();
  Certificate cert;
  auto add = [&cert](std::string label, Rat value, Rat target, bool require_equal) {
    RelationCheck chk;
    chk.label = std::move(label);
    chk.value = value;
    chk.target = target;
    chk.require_equal = require_equal;
    chk.pass = require_equal ? (value == target) : (value != target);
    cert.checks.push_back(chk);
    cert.pass = cert.pass && cert.checks.back().pass;
  };

  // domain checks
  {
    bool positive = static_cast<int>(sol.c.size()) == sys.t;
    for (const Rat& cj : sol.c) positive = positive && sgn(cj) > 0;
    RelationCheck chk;
    chk.label = "c: " + std::to_string(sys.t) + " positive rationals";
    chk.value = Rat(positive ? 1 : 0);
    chk.target = Rat(1);
    chk.require_equal = true;
    chk.pass = positive;
    cert.checks.push_back(chk);
    cert.pass = cert.pass && positive;
  }
  {
    bool dmin = sol.d >= Int(sys.t + 1);
    RelationCheck chk;
    chk.label = "d >= t + 1";
    chk.value = Rat(sol.d);
    chk.target = Rat(Int(sys.t + 1));
    chk.require_equal = false;
    chk.pass = dmin;
    cert.checks.push_back(chk);
    cert.pass = cert.pass && dmin;
  }
  if (!sys.ap_constraints.empty()) {
    Int u(1);
    for (const auto& ap : sys.ap_constraints)
      u = lcm_int(u, lcm_int(Int(sys.t), Int(ap.m)));
    bool ok = mpz_divisible_p(sol.d.get_mpz_t(), u.get_mpz_t()) && sol.d >= 2 * u;
    RelationCheck chk;
    chk.label = "d in lcm(t,m) * N_2";
    chk.value = Rat(sol.d);
    chk.target = Rat(u);
    chk.require_equal = true;
    chk.pass = ok;
    cert.checks.push_back(chk);
    cert.pass = cert.pass && ok;
  }
  if (!cert.pass) return cert;  // relations over a malformed tuple would mislead

  Rat d_rat{sol.d};
  for (int k = 1; k <= sys.t; ++k) {
    Rat s = consecutive_product_sum(sol.c, k);
    bool equal = sys.equal_orders.count(k) > 0;
    add("S_" + std::to_string(k) + (equal ? " = d" : " != d"), s, d_rat, equal);
  }
  for (const auto& ap : sys.ap_constraints) {
    Rat s = ap_product_sum(sol.c, ap.k, ap.m, ap.r, ap.variant);
    Rat target = d_rat / Rat(Int(ap.m));
    std::string label = std::string(ap.variant == ApVariant::type_i ? "apI" : "apII") + "(k=" +
                        std::to_string(ap.k) + ",m=" + std::to_string(ap.m) + ",r=" +
                        std::to_string(ap.r) + (ap.require_equal ? ") = d/m" : ") != d/m");
    add(label, s, target, ap.require_equal);
  }
  return cert;
}

namespace {

// Candidate values: positive rationals with numerator and denominator up to
// h, in lowest terms, ascending by value (then by numerator).
std::vector<Rat> rational_ladder(long h) {
  std::vector<Rat> out;
  for (long num = 1; num <= h; ++num) {
    for (long den = 1; den <= h; ++den) {
      Rat r(num, den);
      r.canonicalize();
      if (r.get_num() == num && r.get_den() == den) out.push_back(r);
    }
  }
  std::sort(out.begin(), out.end(), [](const Rat& a, const Rat& b) {
    if (a != b) return a < b;
    return a.get_num() < b.get_num();
  });
  return out;
}

struct DfsContext {
  const RelationSystem* sys;
  const std::vector<Rat>* ladder;
  Int d;
  bool product_pinned;  // t in A: prune with prod(c) = d
  Rat h_rat;
  std::uint64_t tried = 0;
};

bool dfs(DfsContext& ctx, std::vector<Rat>& c, Rat partial_product,
         std::optional<DioSolution>& found) {
  int t = ctx.sys->t;
  int depth = static_cast<int>(c.size());
  if (depth == t) {
    ++ctx.tried;
    DioSolution cand{c, ctx.d};
    Certificate cert = verify_solution(*ctx.sys, cand);
    if (cert.pass) {
      found = cand;
      return true;
    }
    return false;
  }
  int remaining = t - depth - 1;  // after placing the next value
  for (const Rat& v : *ctx.ladder) {
    if (ctx.product_pinned) {
      // prod so far * v * (future values each in [1/h, h]) must reach d
      Rat prod = partial_product * v;
      Rat lo = prod, hi = prod;
      for (int i = 0; i < remaining; ++i) {
        lo /= ctx.h_rat;
        hi *= ctx.h_rat;
      }
      if (Rat(ctx.d) < lo || Rat(ctx.d) > hi) continue;
    }
    c.push_back(v);
    if (dfs(ctx, c, partial_product * v, found)) return true;
    c.pop_back();
  }
  return false;
}

}  // namespace

SearchReport solve_exact(const RelationSystem& sys, long max_h, long max_d, int threads) {
  sys.validate();
  if (max_h < 1 || max_d < sys.t + 1)
    throw SequenceError("search bounds must allow d >= t + 1 and h >= 1");
  SearchReport report;
  report.max_h = max_h;
  report.max_d = max_d;
  std::vector<Rat> ladder = rational_ladder(max_h);
  bool pinned = sys.equal_orders.count(sys.t) > 0;

  // d must respect the AP congruence class when constraints are present
  Int u(1);
  for (const auto& ap : sys.ap_constraints) u = lcm_int(u, lcm_int(Int(sys.t), Int(ap.m)));

  std::vector<Int> d_values;
  for (long d = sys.t + 1; d <= max_d; ++d) {
    Int dv(d);
    if (!sys.ap_constraints.empty() &&
        (!mpz_divisible_p(dv.get_mpz_t(), u.get_mpz_t()) || dv < 2 * u))
      continue;
    d_values.push_back(dv);
  }

  auto search_one = [&](const Int& d) {
    DfsContext ctx{&sys, &ladder, d, pinned, Rat(max_h), 0};
    std::vector<Rat> c;
    c.reserve(static_cast<std::size_t>(sys.t));
    std::optional<DioSolution> found;
    dfs(ctx, c, Rat(1), found);
    return std::make_pair(found, ctx.tried);
  };

  if (threads < 2) {
    for (const Int& d : d_values) {
      auto [found, tried] = search_one(d);
      report.candidates_tried += tried;
      if (found) {
        report.solution = found;
        report.certificate = verify_solution(sys, *found);
        return report;
      }
    }
  } else {
    // fan out over d in waves; the smallest d with a solution wins
    std::size_t i = 0;
    while (i < d_values.size()) {
      std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(threads),
                                                d_values.size() - i);
      std::vector<std::future<std::pair<std::optional<DioSolution>, std::uint64_t>>> fs;
      for (std::size_t b = 0; b < batch; ++b)
        fs.push_back(std::async(std::launch::async, search_one, d_values[i + b]));
      for (std::size_t b = 0; b < batch; ++b) {
        auto [found, tried] = fs[b].get();
        report.candidates_tried += tried;
        if (found && !report.solution) {
          report.solution = found;
          report.certificate = verify_solution(sys, *found);
        }
      }
      if (report.solution) return report;
      i += batch;
    }
  }
  report.exhausted = true;
  return report;
}

DivisibilityReport validate_divisibility(const std::vector<Rat>& c,
                                         const ConstructionSchedule& sched, std::size_t regions) {
  DivisibilityReport rep;
  for (std::size_t i = 1; i <= regions; ++i) {
    if (!sched.has_tuple(i)) break;
    Int b(sched.tuple(i).b);
    for (const Rat& cj : c) {
      if (!mpz_divisible_p(b.get_mpz_t(), cj.get_num().get_mpz_t())) {
        rep.ok = false;
        rep.failing_region = i;
        rep.failing_alpha = cj.get_num().get_str();
        return rep;
      }
    }
  }
  return rep;
}

// ------------------------------- box solver ---------------------------------

namespace {

// S_k(c) and the analytic Jacobian dS_k/dc_q via the product table
// G(j, k) = c_j ... c_{j+k-1}.
void box_system(const std::vector<double>& c, const std::vector<double>& rhs,
                Eigen::VectorXd& f, Eigen::MatrixXd& jac) {
  int t = static_cast<int>(c.size());
  std::vector<std::vector<double>> g(static_cast<std::size_t>(t + 1));
  g[1].assign(static_cast<std::size_t>(t), 0);
  for (int j = 0; j < t; ++j) g[1][static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)];
  for (int k = 2; k <= t; ++k) {
    g[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(t - k + 1), 0);
    for (int j = 0; j + k <= t; ++j)
      g[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
          g[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j)] *
          c[static_cast<std::size_t>(j + k - 1)];
  }
  f.resize(t);
  jac.setZero(t, t);
  for (int k = 1; k <= t; ++k) {
    double s = 0;
    for (double v : g[static_cast<std::size_t>(k)]) s += v;
    f(k - 1) = s - rhs[static_cast<std::size_t>(k - 1)];
    for (int q = 0; q < t; ++q) {
      double dq = 0;
      int j_lo = std::max(0, q - k + 1);
      int j_hi = std::min(q, t - k);
      for (int j = j_lo; j <= j_hi; ++j)
        dq += g[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] /
              c[static_cast<std::size_t>(q)];
      jac(k - 1, q) = dq;
    }
  }
}

}  // namespace

BoxSolveResult solve_box(int t, const std::vector<double>& eps, int max_iterations,
                         double tolerance) {
  if (t < 3) throw SequenceError("box system needs t >= 3");
  if (!eps.empty() && static_cast<int>(eps.size()) != t)
    throw SequenceError("eps must be empty or length t");

  double lo0 = static_cast<double>(t), hi0 = static_cast<double>(t + 1);
  double lo1 = 1.0 + 1.0 / (2.0 * t), hi1 = 1.0 + 1.0 / (t - 1.0);
  auto project = [&](std::vector<double>& c) {
    c[0] = std::clamp(c[0], lo0, hi0);
    for (int j = 1; j < t; ++j) c[static_cast<std::size_t>(j)] =
        std::clamp(c[static_cast<std::size_t>(j)], lo1, hi1);
  };

  std::vector<double> rhs(static_cast<std::size_t>(t));
  for (int k = 0; k < t; ++k)
    rhs[static_cast<std::size_t>(k)] =
        2.0 * t + (eps.empty() ? 0.0 : eps[static_cast<std::size_t>(k)]);

  std::vector<double> c(static_cast<std::size_t>(t), 1.0 + 1.0 / t);
  c[0] = t + 0.5;
  project(c);

  Eigen::VectorXd f;
  Eigen::MatrixXd jac;
  box_system(c, rhs, f, jac);
  double res = f.lpNorm<Eigen::Infinity>();

  BoxSolveResult out;
  int iter = 0;
  for (; iter < max_iterations && res > tolerance; ++iter) {
    Eigen::VectorXd step = jac.partialPivLu().solve(-f);
    double alpha = 1.0;
    bool improved = false;
    for (int half = 0; half < 30; ++half, alpha *= 0.5) {
      std::vector<double> cand(c);
      for (int j = 0; j < t; ++j) cand[static_cast<std::size_t>(j)] += alpha * step(j);
      project(cand);
      Eigen::VectorXd f2;
      Eigen::MatrixXd j2;
      box_system(cand, rhs, f2, j2);
      double r2 = f2.lpNorm<Eigen::Infinity>();
      if (r2 < res) {
        c = std::move(cand);
        f = std::move(f2);
        jac = std::move(j2);
        res = r2;
        improved = true;
        break;
      }
    }
    if (!improved) break;  // stalled inside the box
  }

  out.c = c;
  out.max_residual = res;
  out.iterations = iter;
  out.converged = res <= tolerance;
  out.in_box = true;
  for (int j = 0; j < t; ++j) {
    double v = c[static_cast<std::size_t>(j)];
    double lo = j == 0 ? lo0 : lo1, hi = j == 0 ? hi0 : hi1;
    if (v < lo - 1e-12 || v > hi + 1e-12) out.in_box = false;
  }
  return out;
}

std::vector<Rat> box_residuals_exact(int t, const std::vector<Rat>& c,
                                     const std::vector<Rat>& eps) {
  if (static_cast<int>(c.size()) != t) throw SequenceError("c must have length t");
  std::vector<Rat> out;
  for (int k = 1; k <= t; ++k) {
    Rat target = Rat(2 * t) + (eps.empty() ? Rat(0) : eps[static_cast<std::size_t>(k - 1)]);
    out.push_back(consecutive_product_sum(c, k) - target);
  }
  return out;
}

}  // namespace cantor
