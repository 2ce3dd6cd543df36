#include "cantor/sequence.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace cantor {

namespace {

QView qview_from_int(const Int& v) {
  QView q;
  if (fits_i64(v)) {
    q.fits_i64 = true;
    q.value_i = to_i64(v);
    q.value_d = static_cast<double>(q.value_i);
  } else {
    q.fits_i64 = false;
    q.value_i = std::numeric_limits<std::int64_t>::max();
    q.value_d = mpz_get_d(v.get_mpz_t());  // +inf once past double range
    if (!std::isfinite(q.value_d)) q.value_d = std::numeric_limits<double>::infinity();
  }
  return q;
}

std::string join_ints(const std::vector<Int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += v[i].get_str();
  }
  return s;
}

std::string join_rats(const std::vector<Rat>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += rat_to_string(v[i]);
  }
  return s;
}

}  // namespace

// ------------------------------- IndexSequence ------------------------------

struct IndexSequence::Impl {
  enum class Kind { identity, arithmetic, list } kind = Kind::identity;
  std::uint64_t m = 1, r = 0;
  std::vector<Int> list;
};

IndexSequence IndexSequence::identity() {
  IndexSequence s;
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::identity;
  s.impl_ = impl;
  return s;
}

IndexSequence IndexSequence::arithmetic(std::uint64_t m, std::uint64_t r) {
  if (m < 1 || r >= m) throw SequenceError("arithmetic progression needs m >= 1, r in [0, m-1]");
  IndexSequence s;
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::arithmetic;
  impl->m = m;
  impl->r = r;
  s.impl_ = impl;
  return s;
}

IndexSequence IndexSequence::from_list(std::vector<Int> indices) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 1) throw SequenceError("index streams address 1-based positions");
    if (i > 0 && indices[i] <= indices[i - 1])
      throw SequenceError("index stream must be strictly increasing");
  }
  IndexSequence s;
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::list;
  impl->list = std::move(indices);
  s.impl_ = impl;
  return s;
}

Int IndexSequence::at(std::uint64_t t) const {
  if (t < 1) throw SequenceError("index streams are 1-based");
  switch (impl_->kind) {
    case Impl::Kind::identity:
      return Int(static_cast<unsigned long>(t));
    case Impl::Kind::arithmetic: {
      // progression (mt + r), t = 0, 1, ...; index 0 dropped when r = 0
      unsigned long m = impl_->m, r = impl_->r;
      if (r == 0) return Int(m) * static_cast<unsigned long>(t);
      return Int(r) + Int(m) * static_cast<unsigned long>(t - 1);
    }
    case Impl::Kind::list:
      if (t > impl_->list.size()) throw SequenceError("index stream exhausted");
      return impl_->list[t - 1];
  }
  throw SequenceError("unreachable index kind");
}

bool IndexSequence::is_identity() const { return impl_->kind == Impl::Kind::identity; }

std::optional<std::pair<std::uint64_t, std::uint64_t>> IndexSequence::as_arithmetic() const {
  if (impl_->kind != Impl::Kind::arithmetic) return std::nullopt;
  return std::make_pair(impl_->m, impl_->r);
}

std::string IndexSequence::to_string() const {
  switch (impl_->kind) {
    case Impl::Kind::identity:
      return "identity";
    case Impl::Kind::arithmetic:
      return "m=" + std::to_string(impl_->m) + ";r=" + std::to_string(impl_->r);
    case Impl::Kind::list:
      return "list=" + join_ints(impl_->list);
  }
  return "";
}

// ------------------------------- BasicSequence ------------------------------

struct BasicSequence::Rule {
  Kind kind = Kind::constant;
  std::string descriptor;

  Int const_b;                                // constant
  std::vector<Int> prefix, period;            // explicit_list
  SchedulePtr sched;                          // gamma
  std::shared_ptr<const BasicSequence> base;  // xi / lambda
  std::vector<Rat> c;                         // xi coefficients, c_j = alpha_j / beta_j
  Int d;                                      // xi modulus
  IndexSequence indices = IndexSequence::identity();  // lambda
};

BasicSequence::BasicSequence(std::shared_ptr<const Rule> rule) : rule_(std::move(rule)) {}

BasicSequence BasicSequence::constant(Int b) {
  auto r = std::make_shared<Rule>();
  r->kind = Kind::constant;
  r->const_b = std::move(b);
  if (r->const_b < 2) throw SequenceError("constant basic sequence needs b >= 2");
  r->period = {r->const_b};  // periodic shape used by exact evaluation
  r->descriptor = "constant:" + r->const_b.get_str();
  return BasicSequence(r);
}

BasicSequence BasicSequence::from_list(std::vector<Int> prefix, std::vector<Int> period) {
  auto r = std::make_shared<Rule>();
  r->kind = Kind::explicit_list;
  r->prefix = std::move(prefix);
  r->period = std::move(period);
  r->descriptor = "explicit:" + join_ints(r->prefix);
  if (!r->period.empty()) r->descriptor += ";period=" + join_ints(r->period);
  return BasicSequence(r);
}

BasicSequence BasicSequence::gamma(SchedulePtr schedule) {
  if (!schedule) throw SequenceError("gamma rule needs a schedule");
  auto r = std::make_shared<Rule>();
  r->kind = Kind::gamma;
  r->sched = std::move(schedule);
  r->descriptor = "gamma:(" + r->sched->descriptor() + ")";
  return BasicSequence(r);
}

BasicSequence BasicSequence::xi(BasicSequence base, std::vector<Rat> c, Int d) {
  if (c.empty()) throw SequenceError("xi transform needs at least one coefficient");
  for (const Rat& cj : c)
    if (sgn(cj) <= 0) throw SequenceError("xi coefficients must be positive");
  // The transform is defined for d >= t; the residues t..d-1 (the 2^n p_n
  // branch) are simply absent when d = t.
  if (d < Int(static_cast<unsigned long>(c.size())))
    throw SequenceError("xi transform needs d >= t = " + std::to_string(c.size()));
  auto r = std::make_shared<Rule>();
  r->kind = Kind::xi;
  r->base = std::make_shared<BasicSequence>(std::move(base));
  r->c = std::move(c);
  r->d = std::move(d);
  r->descriptor =
      "xi:base=(" + r->base->descriptor() + ");c=" + join_rats(r->c) + ";d=" + r->d.get_str();
  return BasicSequence(r);
}

BasicSequence BasicSequence::lambda(BasicSequence base, IndexSequence indices) {
  auto r = std::make_shared<Rule>();
  r->kind = Kind::lambda;
  r->base = std::make_shared<BasicSequence>(std::move(base));
  r->indices = indices;
  r->descriptor = "lambda:base=(" + r->base->descriptor() + ");" + indices.to_string();
  return BasicSequence(r);
}

BasicSequence::Kind BasicSequence::kind() const { return rule_->kind; }
const std::string& BasicSequence::descriptor() const { return rule_->descriptor; }
SchedulePtr BasicSequence::schedule() const { return rule_->sched; }

const std::vector<Rat>* BasicSequence::xi_coefficients() const {
  return rule_->kind == Kind::xi ? &rule_->c : nullptr;
}

std::optional<Int> BasicSequence::xi_modulus() const {
  if (rule_->kind != Kind::xi) return std::nullopt;
  return rule_->d;
}

const BasicSequence* BasicSequence::inner() const { return rule_->base.get(); }

const IndexSequence* BasicSequence::lambda_indices() const {
  return rule_->kind == Kind::lambda ? &rule_->indices : nullptr;
}

const std::vector<Int>* BasicSequence::explicit_prefix() const {
  if (rule_->kind != Kind::constant && rule_->kind != Kind::explicit_list) return nullptr;
  return &rule_->prefix;
}

const std::vector<Int>* BasicSequence::explicit_period() const {
  if (rule_->kind != Kind::constant && rule_->kind != Kind::explicit_list) return nullptr;
  return &rule_->period;
}

namespace {

Int xi_value_exact(const Int& p, const Rat& cj, const Int& n) {
  const Int& alpha = cj.get_num();
  const Int& beta = cj.get_den();
  if (!mpz_divisible_p(p.get_mpz_t(), alpha.get_mpz_t()))
    throw SequenceError("xi divisibility violated at n = " + n.get_str() + ": " +
                        alpha.get_str() + " does not divide p_n = " + p.get_str());
  Int v = (p / alpha) * beta;
  return v < 2 ? Int(2) : v;
}

}  // namespace

Int BasicSequence::at(const Int& n) const {
  if (n < 1) throw SequenceError("basic sequences are 1-based");
  const Rule& r = *rule_;
  switch (r.kind) {
    case Kind::constant:
      return r.const_b;
    case Kind::explicit_list: {
      Int idx0 = n - 1;
      Int plen(static_cast<unsigned long>(r.prefix.size()));
      Int q;
      if (idx0 < plen) {
        q = r.prefix[to_u64(idx0)];
      } else if (!r.period.empty()) {
        Int rem = (idx0 - plen) % static_cast<unsigned long>(r.period.size());
        q = r.period[to_u64(rem)];
      } else {
        throw SequenceError("explicit sequence has no value at n = " + n.get_str());
      }
      if (q < 2) throw SequenceError("q_n = " + q.get_str() + " < 2 at n = " + n.get_str());
      return q;
    }
    case Kind::gamma: {
      std::size_t i = r.sched->region_of(n);
      return Int(r.sched->tuple(i).b);
    }
    case Kind::xi: {
      Int t(static_cast<unsigned long>(r.c.size()));
      Int j = n % r.d;
      Int p = r.base->at(n);
      if (j < t) return xi_value_exact(p, r.c[to_u64(j)], n);
      // 2^n p_n; representable only while n stays modest
      constexpr unsigned long kMaxShift = 1u << 24;
      if (n > Int(kMaxShift))
        throw GuardError("2^n p_n at n = " + n.get_str() + " exceeds the exact-arithmetic guard");
      Int v;
      mpz_mul_2exp(v.get_mpz_t(), p.get_mpz_t(), to_u64(n));
      return v;
    }
    case Kind::lambda: {
      Int target = r.indices.at(to_u64(n, "lambda index"));
      return r.base->at(target);
    }
  }
  throw SequenceError("unreachable sequence kind");
}

// --------------------------------- cursors ----------------------------------

namespace {

struct CursorImpl {
  virtual ~CursorImpl() = default;
  virtual QView next() = 0;
};

struct ConstantCursor : CursorImpl {
  QView view;
  explicit ConstantCursor(const Int& b) : view(qview_from_int(b)) {}
  QView next() override { return view; }
};

struct ExplicitCursor : CursorImpl {
  const BasicSequence seq;
  std::uint64_t pos = 0;
  explicit ExplicitCursor(const BasicSequence& s) : seq(s) {}
  QView next() override { return qview_from_int(seq.at(Int(static_cast<unsigned long>(++pos)))); }
};

struct GammaCursor : CursorImpl {
  SchedulePtr sched;
  std::size_t region = 0;
  std::uint64_t remaining = 0;  // saturated; horizons never exhaust a saturated region
  QView view;

  explicit GammaCursor(SchedulePtr s) : sched(std::move(s)) {}

  QView next() override {
    while (remaining == 0) {
      ++region;
      const ScheduleTuple& t = sched->tuple(region);  // throws when exhausted
      if (sgn(t.length) == 0) continue;
      remaining = fits_i64(t.length) ? to_u64(t.length)
                                     : std::numeric_limits<std::uint64_t>::max();
      view = qview_from_int(Int(t.b));
    }
    --remaining;
    return view;
  }
};

struct XiCursor : CursorImpl {
  std::unique_ptr<CursorImpl> base;
  std::uint64_t d;
  std::size_t t;
  std::vector<std::int64_t> alpha, beta;  // c_j in lowest terms, machine range
  std::uint64_t n = 0;

  XiCursor(std::unique_ptr<CursorImpl> b, const std::vector<Rat>& c, const Int& dd)
      : base(std::move(b)), t(c.size()) {
    if (!fits_i64(dd)) throw GuardError("xi modulus too large for streaming access");
    d = to_u64(dd);
    for (const Rat& cj : c) {
      if (!fits_i64(cj.get_num()) || !fits_i64(cj.get_den()))
        throw GuardError("xi coefficient too large for streaming access");
      alpha.push_back(to_i64(cj.get_num()));
      beta.push_back(to_i64(cj.get_den()));
    }
  }

  QView next() override {
    ++n;
    QView p = base->next();
    std::uint64_t j = n % d;
    QView out;
    if (j < t) {
      if (!p.fits_i64)
        throw GuardError("xi transform needs machine-range p_n on scaled residues");
      std::int64_t a = alpha[j];
      if (p.value_i % a != 0)
        throw SequenceError("xi divisibility violated at n = " + std::to_string(n));
      __int128 v = static_cast<__int128>(p.value_i / a) * beta[j];
      if (v < 2) v = 2;
      if (v <= std::numeric_limits<std::int64_t>::max()) {
        out.fits_i64 = true;
        out.value_i = static_cast<std::int64_t>(v);
        out.value_d = static_cast<double>(out.value_i);
      } else {
        out.fits_i64 = false;
        out.value_i = std::numeric_limits<std::int64_t>::max();
        out.value_d = static_cast<double>(v);
      }
    } else {
      // 2^n p_n
      out.value_d = std::ldexp(p.value_d, n <= 4096 ? static_cast<int>(n) : 4096);
      if (!std::isfinite(out.value_d)) out.value_d = std::numeric_limits<double>::infinity();
      int lead = p.fits_i64 ? 64 - __builtin_clzll(static_cast<unsigned long long>(
                                       std::max<std::int64_t>(p.value_i, 1)))
                            : 64;
      if (p.fits_i64 && n + static_cast<std::uint64_t>(lead) <= 62) {
        out.fits_i64 = true;
        out.value_i = p.value_i << n;
      } else {
        out.fits_i64 = false;
        out.value_i = std::numeric_limits<std::int64_t>::max();
      }
    }
    return out;
  }
};

struct LambdaCursor : CursorImpl {
  std::unique_ptr<CursorImpl> base;
  IndexSequence indices;
  std::uint64_t t = 0;
  std::uint64_t consumed = 0;

  LambdaCursor(std::unique_ptr<CursorImpl> b, IndexSequence idx)
      : base(std::move(b)), indices(idx) {}

  QView next() override {
    std::uint64_t target = to_u64(indices.at(++t), "lambda index");
    QView v{};
    while (consumed < target) {
      v = base->next();
      ++consumed;
    }
    return v;
  }
};

std::unique_ptr<CursorImpl> make_cursor(const BasicSequence& seq) {
  switch (seq.kind()) {
    case BasicSequence::Kind::constant:
      return std::make_unique<ConstantCursor>(seq.at(1));
    case BasicSequence::Kind::explicit_list:
      return std::make_unique<ExplicitCursor>(seq);
    case BasicSequence::Kind::gamma:
      return std::make_unique<GammaCursor>(seq.schedule());
    case BasicSequence::Kind::xi:
      return std::make_unique<XiCursor>(make_cursor(*seq.inner()), *seq.xi_coefficients(),
                                        *seq.xi_modulus());
    case BasicSequence::Kind::lambda:
      return std::make_unique<LambdaCursor>(make_cursor(*seq.inner()), *seq.lambda_indices());
  }
  throw SequenceError("unreachable sequence kind");
}

}  // namespace

struct BasicSequence::Cursor::State {
  std::unique_ptr<CursorImpl> impl;
};

BasicSequence::Cursor::Cursor(const BasicSequence& seq) : state_(std::make_shared<State>()) {
  state_->impl = make_cursor(seq);
}

QView BasicSequence::Cursor::next() {
  ++pos_;
  return state_->impl->next();
}

// ------------------------------- partial sums --------------------------------

QnkAccumulator::QnkAccumulator(int k, std::uint64_t stride, std::uint64_t first_start)
    : k_(k), stride_(stride), first_start_(first_start), recip_ring_(static_cast<std::size_t>(k), 0) {
  if (k < 1) throw SequenceError("partial sums need k >= 1");
  if (stride < 1 || first_start < 1) throw SequenceError("bad stride/start");
}

void QnkAccumulator::push(double q) {
  recip_ring_[static_cast<std::size_t>(seen_ % static_cast<std::uint64_t>(k_))] =
      std::isinf(q) ? 0.0 : 1.0 / q;
  ++seen_;
  if (seen_ < static_cast<std::uint64_t>(k_)) return;
  std::uint64_t start = seen_ - static_cast<std::uint64_t>(k_) + 1;
  if (start < first_start_ || (start - first_start_) % stride_ != 0) return;

  double prod = 1.0;
  int saturated = 0;
  double finite_prod = 1.0;
  for (double r : recip_ring_) {
    prod *= r;
    if (r == 0.0)
      ++saturated;
    else
      finite_prod *= r;
  }
  ++terms_;
  if (prod > 0.0) {
    // Neumaier-compensated add
    double t = sum_ + prod;
    if (std::abs(sum_) >= std::abs(prod))
      comp_ += (sum_ - t) + prod;
    else
      comp_ += (prod - t) + sum_;
    sum_ = t;
  } else if (saturated > 0) {
    // each saturated factor is at least DBL_MAX, so its reciprocal is < 5.6e-309
    double bound = finite_prod;
    for (int i = 0; i < saturated; ++i) bound *= 5.6e-309;
    neglected_ += bound;
  } else {
    // genuine underflow of a finite product
    neglected_ += 5e-324;
  }
}

PartialSum QnkAccumulator::sum() const {
  PartialSum s;
  s.value = sum_ + comp_;
  s.neglected_bound = neglected_;
  s.terms = terms_;
  return s;
}

PartialSum qnk_partial(const BasicSequence& q, std::uint64_t n, int k) {
  QnkAccumulator acc(k);
  if (n == 0) return acc.sum();
  auto cur = q.cursor();
  std::uint64_t need = n + static_cast<std::uint64_t>(k) - 1;
  for (std::uint64_t i = 0; i < need; ++i) acc.push(cur.next().value_d);
  return acc.sum();
}

PartialSum qnk_ap_partial(const BasicSequence& q, std::uint64_t n, int k, std::uint64_t m,
                          std::uint64_t r) {
  if (m < 1 || r >= m) throw SequenceError("need m >= 1 and r in [0, m-1]");
  std::uint64_t first = (r == 0) ? m : r;
  QnkAccumulator acc(k, m, first);
  if (n == 0) return acc.sum();
  auto cur = q.cursor();
  std::uint64_t need = n + static_cast<std::uint64_t>(k) - 1;
  for (std::uint64_t i = 0; i < need; ++i) acc.push(cur.next().value_d);
  return acc.sum();
}

namespace {

Rat reciprocal_window_product(const BasicSequence& q, std::uint64_t start, int k) {
  Int prod(1);
  for (int i = 0; i < k; ++i) prod *= q.at(Int(start + static_cast<std::uint64_t>(i)));
  Rat term(1, prod);
  term.canonicalize();
  return term;
}

}  // namespace

Rat qnk_partial_exact(const BasicSequence& q, std::uint64_t n, int k, std::uint64_t guard) {
  if (n > guard)
    throw GuardError("exact partial sum horizon " + std::to_string(n) + " over guard " +
                     std::to_string(guard));
  Rat sum(0);
  for (std::uint64_t j = 1; j <= n; ++j) sum += reciprocal_window_product(q, j, k);
  return sum;
}

Rat qnk_ap_partial_exact(const BasicSequence& q, std::uint64_t n, int k, std::uint64_t m,
                         std::uint64_t r, std::uint64_t guard) {
  if (m < 1 || r >= m) throw SequenceError("need m >= 1 and r in [0, m-1]");
  if (n > guard)
    throw GuardError("exact partial sum horizon " + std::to_string(n) + " over guard " +
                     std::to_string(guard));
  Rat sum(0);
  std::uint64_t first = (r == 0) ? m : r;
  for (std::uint64_t s = first; s <= n; s += m) sum += reciprocal_window_product(q, s, k);
  return sum;
}

std::vector<DivergencePoint> divergence_probe(const BasicSequence& q, int k, std::uint64_t m,
                                              std::uint64_t r, DivergenceVariant variant,
                                              std::uint64_t horizon) {
  if (m < 1 || r >= m) throw SequenceError("need m >= 1 and r in [0, m-1]");
  std::vector<std::uint64_t> checkpoints;
  for (double g = 1; g <= static_cast<double>(horizon); g *= 1.5) {
    auto n = static_cast<std::uint64_t>(std::ceil(g));
    if (checkpoints.empty() || checkpoints.back() != n) checkpoints.push_back(n);
  }
  if (checkpoints.empty() || checkpoints.back() != horizon) checkpoints.push_back(horizon);

  std::vector<DivergencePoint> out;
  if (variant == DivergenceVariant::type_i) {
    std::uint64_t first = (r == 0) ? m : r;
    QnkAccumulator acc(k, m, first);
    auto cur = q.cursor();
    std::uint64_t pushed = 0;
    for (std::uint64_t n : checkpoints) {
      std::uint64_t need = n + static_cast<std::uint64_t>(k) - 1;
      while (pushed < need) {
        acc.push(cur.next().value_d);
        ++pushed;
      }
      PartialSum s = acc.sum();
      out.push_back({n, s.terms, s.value, s.neglected_bound});
    }
  } else {
    BasicSequence extracted = BasicSequence::lambda(q, IndexSequence::arithmetic(m, r));
    QnkAccumulator acc(k);
    auto cur = extracted.cursor();
    std::uint64_t pushed = 0;
    for (std::uint64_t n : checkpoints) {
      // extracted positions with index <= n
      std::uint64_t t_count = (r == 0) ? n / m : (n >= r ? (n - r) / m + 1 : 0);
      if (t_count == 0) {
        out.push_back({n, 0, 0.0, 0.0});
        continue;
      }
      std::uint64_t need = t_count + static_cast<std::uint64_t>(k) - 1;
      while (pushed < need) {
        acc.push(cur.next().value_d);
        ++pushed;
      }
      PartialSum s = acc.sum();
      out.push_back({n, s.terms, s.value, s.neglected_bound});
    }
  }
  return out;
}

}  // namespace cantor
