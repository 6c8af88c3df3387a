#pragma once

#include <vector>

#include "charp/freealg.hpp"
#include "charp/report.hpp"
#include "charp/rng.hpp"
#include "charp/trunccalc.hpp"

// The reduced Weyl algebra D on n pairs (x_i, y_i) over F_p[h]/h^N:
// x_i y_j - y_j x_i = delta_ij h, x_i^p = y_i^p = 0, h central. Elements are
// stored normal-ordered (x before y within each pair, h rightmost) and carry
// an effective truncation: entries at h-exponents >= trunc are meaningless
// and kept at zero. Brackets divide by h and lose one level of truncation;
// identities are only ever compared at the valid truncation.

namespace charp::weylquant {

using trunccalc::TruncPoly;

struct WeylElt {
  std::vector<Scalar> c;  // indexed by h-exp + N * (monomial index in x,y)
  unsigned trunc = 0;     // entries valid strictly below this h-exponent
};

class WeylCtx {
public:
  WeylCtx(Prime p, unsigned pairs, unsigned trunc_level)
      : prime_(p), F_(p), n_(pairs), N_(trunc_level), mono_(p, 2 * pairs) {
    if (pairs < 1 || pairs > 2) throw BadParams("pair count must be 1 or 2");
    if (N_ < 2 || N_ > 2 * p.value() + 2)
      throw BadParams("h-truncation must lie in [2, 2p+2]");
    adim_ = mono_.dim();
    dim_ = adim_ * N_;
    // Pascal triangle and factorials mod p
    binom_.assign(p.value(), std::vector<Scalar>(p.value(), 0));
    for (unsigned i = 0; i < p.value(); ++i) {
      binom_[i][0] = 1;
      for (unsigned j = 1; j <= i; ++j)
        binom_[i][j] = F_.add(binom_[i - 1][j - 1], binom_[i - 1][j]);
    }
    fact_.assign(p.value(), 1);
    for (unsigned i = 1; i < p.value(); ++i) fact_[i] = F_.mul(fact_[i - 1], i);
  }

  const Fp& field() const { return F_; }
  unsigned p() const { return prime_.value(); }
  unsigned pairs() const { return n_; }
  unsigned trunc_level() const { return N_; }
  unsigned dim() const { return dim_; }
  unsigned adim() const { return adim_; }
  // The commutative shadow A = F_p[x_0,y_0,..]/(p-th powers), variables
  // ordered (x_0, y_0, x_1, y_1).
  const trunccalc::AlgebraCtx& shadow() const { return mono_; }

  std::size_t index(unsigned mono_idx, unsigned h_exp) const {
    return static_cast<std::size_t>(mono_idx) * N_ + h_exp;
  }

  // ---- construction -------------------------------------------------------

  WeylElt zero() const { return {std::vector<Scalar>(dim_, 0), N_}; }
  WeylElt one() const {
    WeylElt w = zero();
    w.c[index(0, 0)] = 1;
    return w;
  }
  WeylElt constant(Scalar v) const {
    WeylElt w = zero();
    w.c[index(0, 0)] = v % F_.p();
    return w;
  }
  WeylElt gen_x(unsigned i) const { return monomial_gen(2 * i); }
  WeylElt gen_y(unsigned i) const { return monomial_gen(2 * i + 1); }
  WeylElt h() const {
    WeylElt w = zero();
    w.c[index(0, 1)] = 1;
    return w;
  }

  // Canonical lift of an element of the shadow algebra (h-degree zero part).
  WeylElt lift(const TruncPoly& a) const {
    WeylElt w = zero();
    for (unsigned m = 0; m < adim_; ++m) w.c[index(m, 0)] = a.c[m];
    return w;
  }
  // Reduction mod h; needs at least one valid level.
  TruncPoly reduce(const WeylElt& w) const {
    if (w.trunc < 1) throw BadParams("reduce needs truncation >= 1");
    TruncPoly a = mono_.zero();
    for (unsigned m = 0; m < adim_; ++m) a.c[m] = w.c[index(m, 0)];
    return a;
  }

  // ---- linear structure ----------------------------------------------------

  WeylElt add(const WeylElt& a, const WeylElt& b) const {
    WeylElt r = a;
    r.trunc = std::min(a.trunc, b.trunc);
    for (std::size_t i = 0; i < r.c.size(); ++i) r.c[i] = F_.add(r.c[i], b.c[i]);
    mask(r);
    return r;
  }
  WeylElt sub(const WeylElt& a, const WeylElt& b) const {
    WeylElt r = a;
    r.trunc = std::min(a.trunc, b.trunc);
    for (std::size_t i = 0; i < r.c.size(); ++i) r.c[i] = F_.sub(r.c[i], b.c[i]);
    mask(r);
    return r;
  }
  WeylElt scale(Scalar s, const WeylElt& a) const {
    WeylElt r = a;
    s %= F_.p();
    for (auto& v : r.c) v = F_.mul(s, v);
    return r;
  }
  bool is_zero_at(const WeylElt& a, unsigned t) const {
    t = std::min(t, a.trunc);
    for (unsigned m = 0; m < adim_; ++m)
      for (unsigned e = 0; e < t; ++e)
        if (a.c[index(m, e)]) return false;
    return true;
  }
  // Equality at the common valid truncation (or a stricter one).
  bool eq_at(const WeylElt& a, const WeylElt& b, unsigned t) const {
    return is_zero_at(sub(a, b), t);
  }
  unsigned common_trunc(const WeylElt& a, const WeylElt& b) const {
    return std::min(a.trunc, b.trunc);
  }

  // ---- multiplication --------------------------------------------------------

  // Normal ordering: within each pair, y^b x^a' rewrites as
  //   sum_t (-1)^t t! C(b,t) C(a',t) x^{a'-t} y^{b-t} h^t.
  WeylElt mul(const WeylElt& u, const WeylElt& v) const {
    WeylElt r = zero();
    r.trunc = std::min(u.trunc, v.trunc);
    for (unsigned mu = 0; mu < adim_; ++mu)
      for (unsigned eu = 0; eu < std::min(u.trunc, N_); ++eu) {
        Scalar cu = u.c[index(mu, eu)];
        if (!cu) continue;
        for (unsigned mv = 0; mv < adim_; ++mv)
          for (unsigned ev = 0; ev + eu < r.trunc; ++ev) {
            Scalar cv = v.c[index(mv, ev)];
            if (!cv) continue;
            mul_basis(mu, eu, mv, ev, F_.mul(cu, cv), r);
          }
      }
    mask(r);
    return r;
  }

  WeylElt pow(const WeylElt& u, unsigned e) const {
    WeylElt r = one();
    r.trunc = u.trunc;
    for (unsigned i = 0; i < e; ++i) r = mul(r, u);
    return r;
  }

  WeylElt commutator(const WeylElt& u, const WeylElt& v) const {
    return sub(mul(u, v), mul(v, u));
  }

  // (uv - vu)/h, carried at one truncation level less.
  WeylElt bracket(const WeylElt& u, const WeylElt& v) const {
    WeylElt c = commutator(u, v);
    WeylElt r = zero();
    if (c.trunc == 0) throw BadParams("bracket needs truncation >= 1");
    r.trunc = c.trunc - 1;
    for (unsigned m = 0; m < adim_; ++m) {
      if (c.c[index(m, 0)])
        throw Error("commutator not divisible by h");  // impossible: commutative mod h
      for (unsigned e = 0; e + 1 < c.trunc; ++e) r.c[index(m, e)] = c.c[index(m, e + 1)];
    }
    mask(r);
    return r;
  }

  // Multiply by h^e.
  WeylElt h_shift(const WeylElt& u, unsigned e) const {
    WeylElt r = zero();
    r.trunc = std::min(u.trunc + e, N_);
    for (unsigned m = 0; m < adim_; ++m)
      for (unsigned eu = 0; eu + e < N_; ++eu)
        if (u.c[index(m, eu)]) r.c[index(m, eu + e)] = u.c[index(m, eu)];
    mask(r);
    return r;
  }

  // ---- randomness ---------------------------------------------------------------

  WeylElt random_elt(SplitMix64& g) const {
    WeylElt w = zero();
    for (auto& v : w.c) v = g.below(F_.p());
    mask(w);
    return w;
  }

private:
  WeylElt monomial_gen(unsigned var) const {
    WeylElt w = zero();
    TruncPoly t = mono_.coordinate(var);
    for (unsigned m = 0; m < adim_; ++m) w.c[index(m, 0)] = t.c[m];
    return w;
  }

  void mask(WeylElt& w) const {
    for (unsigned m = 0; m < adim_; ++m)
      for (unsigned e = w.trunc; e < N_; ++e) w.c[index(m, e)] = 0;
  }

  // r += coeff * (basis mu, h^eu) * (basis mv, h^ev), normal ordered.
  void mul_basis(unsigned mu, unsigned eu, unsigned mv, unsigned ev, Scalar coeff,
                 WeylElt& r) const {
    unsigned p = F_.p();
    // per-pair exponents
    const unsigned npairs = n_;
    unsigned a[2], b[2], a2[2], b2[2];
    for (unsigned i = 0; i < npairs; ++i) {
      a[i] = mono_.exponent(mu, 2 * i);
      b[i] = mono_.exponent(mu, 2 * i + 1);
      a2[i] = mono_.exponent(mv, 2 * i);
      b2[i] = mono_.exponent(mv, 2 * i + 1);
    }
    unsigned base_h = eu + ev;
    // iterate over the swap count per pair
    unsigned t[2] = {0, 0};
    for (;;) {
      Scalar term = coeff;
      unsigned hexp = base_h;
      unsigned mono_idx = 0;
      bool alive = true;
      for (unsigned i = 0; i < npairs && alive; ++i) {
        unsigned ti = t[i];
        if (ti > std::min(b[i], a2[i])) {
          alive = false;
          break;
        }
        unsigned ax = a[i] + a2[i] - ti;
        unsigned by = b[i] + b2[i] - ti;
        if (ax >= p || by >= p) {
          alive = false;
          break;
        }
        Scalar f = F_.mul(fact_[ti], F_.mul(binom_[b[i]][ti], binom_[a2[i]][ti]));
        if (ti % 2) f = F_.neg(f);
        term = F_.mul(term, f);
        hexp += ti;
        mono_idx += ax * stride(2 * i) + by * stride(2 * i + 1);
      }
      if (alive && term && hexp < r.trunc) {
        std::size_t pos = index(mono_idx, hexp);
        r.c[pos] = F_.add(r.c[pos], term);
      }
      // advance the swap-count counter
      unsigned i = 0;
      for (; i < npairs; ++i) {
        if (t[i] < std::min(b[i], a2[i])) {
          ++t[i];
          for (unsigned j = 0; j < i; ++j) t[j] = 0;
          break;
        }
      }
      if (i == npairs) break;
    }
  }

  unsigned stride(unsigned var) const {
    unsigned s = 1;
    for (unsigned i = 0; i < var; ++i) s *= F_.p();
    return s;
  }

  Prime prime_;
  Fp F_;
  unsigned n_, N_, adim_, dim_;
  trunccalc::AlgebraCtx mono_;
  std::vector<std::vector<Scalar>> binom_;
  std::vector<Scalar> fact_;
};

// Evaluation target for the universal polynomials inside D.
struct WeylTarget {
  const WeylCtx& W;
  using Elt = WeylElt;
  Elt zero() const { return W.zero(); }
  Elt one() const { return W.one(); }
  Elt add(const Elt& a, const Elt& b) const { return W.add(a, b); }
  Elt scale(Scalar c, const Elt& a) const { return W.scale(c, a); }
  Elt mul(const Elt& a, const Elt& b) const { return W.mul(a, b); }
  Elt bracket(const Elt& a, const Elt& b) const { return W.bracket(a, b); }
  Elt h(const Elt& a) const { return W.h_shift(a, 1); }
};

// ---- splitting map and the power operation -----------------------------------

// Values of the splitting map on the monomial basis of A = D/h. The canonical
// choice vanishes on the generators, hence on every nonconstant monomial.
struct SplittingData {
  std::vector<WeylElt> values;
};

inline SplittingData canonical_splitting(const WeylCtx& W) {
  SplittingData s;
  s.values.assign(W.adim(), W.zero());
  s.values[0] = W.one();
  return s;
}

// s(sum c_a m_a) = sum c_a^p s(m_a).
inline WeylElt splitting(const WeylCtx& W, const SplittingData& s, const TruncPoly& fbar) {
  WeylElt r = W.zero();
  for (unsigned m = 0; m < W.adim(); ++m) {
    Scalar cp = W.field().pow(fbar.c[m], W.p());
    if (cp) r = W.add(r, W.scale(cp, s.values[m]));
  }
  return r;
}

// f^[p] = (f^p - s(f mod h)) / h^{p-1}, carried at truncation N - p + 1.
inline WeylElt p_power(const WeylCtx& W, const WeylElt& f, const SplittingData& s) {
  if (W.trunc_level() < W.p()) throw BadParams("p_power needs N >= p");
  WeylElt num = W.sub(W.pow(f, W.p()), splitting(W, s, W.reduce(f)));
  unsigned drop = W.p() - 1;
  for (unsigned m = 0; m < W.adim(); ++m)
    for (unsigned e = 0; e < std::min(drop, num.trunc); ++e)
      if (num.c[W.index(m, e)])
        throw NotDivisible("f^p - s(f) is not divisible by h^{p-1}");
  WeylElt r = W.zero();
  r.trunc = num.trunc - drop;
  for (unsigned m = 0; m < W.adim(); ++m)
    for (unsigned e = 0; e + drop < num.trunc; ++e)
      r.c[W.index(m, e)] = num.c[W.index(m, e + drop)];
  return r;
}

// ---- verification passes ---------------------------------------------------------

// Definitional checks for the splitting map: additive, multiplicative,
// central, congruent to the p-th power mod h^{p-1}, and regular.
inline VerifyReport verify_fr_const(const WeylCtx& W, unsigned samples, std::uint64_t seed,
                                    const SplittingData* custom = nullptr) {
  if (W.trunc_level() < W.p()) throw BadParams("verify_fr_const needs N >= p");
  SplittingData s = custom ? *custom : canonical_splitting(W);
  const trunccalc::AlgebraCtx& A = W.shadow();
  VerifyReport rep;
  unsigned p = W.p();

  std::vector<WeylElt> gens;
  for (unsigned i = 0; i < W.pairs(); ++i) {
    gens.push_back(W.gen_x(i));
    gens.push_back(W.gen_y(i));
  }

  // multiplicativity and centrality on basis monomials
  for (unsigned i = 0; i < W.adim(); ++i) {
    for (unsigned j = 0; j < W.adim(); ++j) {
      WeylElt lhs = splitting(W, s, A.mul(A.monomial(i), A.monomial(j)));
      WeylElt rhs = W.mul(splitting(W, s, A.monomial(i)), splitting(W, s, A.monomial(j)));
      rep.record(W.eq_at(lhs, rhs, W.common_trunc(lhs, rhs)), "multiplicativity on basis pair");
    }
    for (auto& g : gens) {
      WeylElt c = W.commutator(splitting(W, s, A.monomial(i)), g);
      rep.record(W.is_zero_at(c, c.trunc), "centrality against a generator");
    }
  }

  SplitMix64 g(seed);
  for (unsigned t = 0; t < samples; ++t) {
    TruncPoly abar = A.random_poly(g), bbar = A.random_poly(g);
    // additivity (p-semilinear over the prime field)
    WeylElt lhs = splitting(W, s, A.add(abar, bbar));
    WeylElt rhs = W.add(splitting(W, s, abar), splitting(W, s, bbar));
    rep.record(W.eq_at(lhs, rhs, W.common_trunc(lhs, rhs)), "additivity on a sample");

    // congruence f^p = s(fbar) mod h^{p-1} for a random lift f of abar
    WeylElt f = W.add(W.lift(abar), W.h_shift(W.random_elt(g), 1));
    WeylElt num = W.sub(W.pow(f, p), splitting(W, s, abar));
    rep.record(W.is_zero_at(num, std::min(num.trunc, p - 1)), "p-th power congruence");

    // regularity: fbar^p = 0 forces exact divisibility of f^p by h^{p-1}
    TruncPoly zbar = abar;
    zbar.c[0] = 0;
    WeylElt fz = W.add(W.lift(zbar), W.h_shift(W.random_elt(g), 1));
    WeylElt fzp = W.pow(fz, p);
    rep.record(W.is_zero_at(fzp, std::min(fzp.trunc, p - 1)), "regularity divisibility");
  }
  return rep;
}

// Restricted-quantized axioms for the canonical power operation:
// restr.lie.1/2 with L through bracket words, h^[p] = h, and the product rule
// (fg)^[p] = f^p g^[p] + f^[p] g^p - h^{p-1} f^[p] g^[p] + P(f,g).
inline VerifyReport verify_restr_quant(const WeylCtx& W, const freealg::FreeAlgCtx& FA,
                                       unsigned samples, std::uint64_t seed,
                                       const SplittingData* custom = nullptr) {
  if (FA.p() != W.p()) throw BadParams("field mismatch between contexts");
  SplittingData s = custom ? *custom : canonical_splitting(W);
  freealg::UniversalL L = FA.compute_L();
  freealg::UniversalP P = FA.compute_P();
  WeylTarget tgt{W};
  VerifyReport rep;
  unsigned p = W.p();

  auto pw = [&](const WeylElt& f) { return p_power(W, f, s); };

  // h^[p] = h, and (h x)^[p] = h x^p
  {
    WeylElt hp = pw(W.h());
    rep.record(W.eq_at(hp, W.h(), hp.trunc), "h^[p] = h");
    WeylElt hx = W.h_shift(W.gen_x(0), 1);
    WeylElt lhs = pw(hx);
    WeylElt rhs = W.h_shift(W.pow(W.gen_x(0), p), 1);
    rep.record(W.eq_at(lhs, rhs, W.common_trunc(lhs, rhs)), "(hx)^[p] = h x^p");
  }

  auto check_pair = [&](const WeylElt& f, const WeylElt& gElt, const std::string& tag) {
    std::vector<WeylElt> images{f, gElt};
    // restr.lie.1
    WeylElt lhs1 = W.bracket(pw(f), gElt);
    WeylElt rhs1 = gElt;
    for (unsigned k = 0; k < p; ++k) rhs1 = W.bracket(f, rhs1);
    unsigned t1 = W.common_trunc(lhs1, rhs1);
    rep.record(t1 >= 1 && W.eq_at(lhs1, rhs1, t1), "restr.lie.1 " + tag);

    // restr.lie.2
    WeylElt lval = freealg::eval_lie_combo(L.lie_combo, images, tgt);
    WeylElt lhs2 = pw(W.add(f, gElt));
    WeylElt rhs2 = W.add(W.add(pw(f), pw(gElt)), lval);
    unsigned t2 = W.common_trunc(lhs2, rhs2);
    rep.record(t2 >= 1 && W.eq_at(lhs2, rhs2, t2), "restr.lie.2 " + tag);

    // product rule
    WeylElt pval = freealg::eval_pbw(FA, P.expr, images, tgt);
    WeylElt lhs3 = pw(W.mul(f, gElt));
    WeylElt rhs3 = W.mul(W.pow(f, p), pw(gElt));
    rhs3 = W.add(rhs3, W.mul(pw(f), W.pow(gElt, p)));
    rhs3 = W.sub(rhs3, W.h_shift(W.mul(pw(f), pw(gElt)), p - 1));
    rhs3 = W.add(rhs3, pval);
    unsigned t3 = W.common_trunc(lhs3, rhs3);
    rep.record(t3 >= 1 && W.eq_at(lhs3, rhs3, t3), "restr.poi " + tag);
  };

  // generator pairs and a constant degenerate pair
  std::vector<WeylElt> gens{W.gen_x(0), W.gen_y(0)};
  if (W.pairs() > 1) {
    gens.push_back(W.gen_x(1));
    gens.push_back(W.gen_y(1));
  }
  for (auto& f : gens)
    for (auto& g2 : gens) check_pair(f, g2, "generators");
  check_pair(W.gen_x(0), W.constant(2), "constant second argument");

  SplitMix64 g(seed);
  for (unsigned t = 0; t < samples; ++t)
    check_pair(W.random_elt(g), W.random_elt(g), "sample");
  return rep;
}

// Hypotheses and conclusions of the additive-multiplicative-central-map lemma
// in D/h^{p-1}: iterated commutator spans vanish at step p, commutators land
// in h D, and the p-th power map is additive, multiplicative and central.
inline VerifyReport quasi_fr_check(Prime p, unsigned pairs, unsigned samples = 50,
                                   std::uint64_t seed = 7) {
  WeylCtx W(p, pairs, p.value() - 1);
  VerifyReport rep;
  unsigned dim = W.dim();

  // basis of D/h^{p-1} as dense vectors; spans via echelon
  auto elt_from_dense = [&](const std::vector<Scalar>& v) {
    WeylElt w = W.zero();
    w.c = v;
    return w;
  };
  auto basis_elt = [&](unsigned i) {
    std::vector<Scalar> v(dim, 0);
    v[i] = 1;
    return elt_from_dense(v);
  };

  EchelonSpan chain(W.field(), dim);
  std::vector<WeylElt> frontier;
  // A_(2): commutators of basis pairs
  for (unsigned i = 0; i < dim; ++i)
    for (unsigned j = 0; j < dim; ++j) {
      WeylElt c = W.commutator(basis_elt(i), basis_elt(j));
      if (chain.add(c.c)) frontier.push_back(c);
    }
  // h-divisibility of A_(2)
  bool in_hD = true;
  for (auto& row : chain.rows())
    for (unsigned m = 0; m < W.adim(); ++m)
      if (row[W.index(m, 0)]) in_hD = false;
  rep.record(in_hD, "A_(2) inside h D");

  // iterate the central series to step p
  std::vector<WeylElt> level = frontier;
  for (unsigned k = 3; k <= p.value(); ++k) {
    EchelonSpan next(W.field(), dim);
    std::vector<WeylElt> next_elts;
    for (unsigned i = 0; i < dim; ++i)
      for (auto& w : level) {
        WeylElt c = W.commutator(basis_elt(i), w);
        if (next.add(c.c)) next_elts.push_back(c);
      }
    level = std::move(next_elts);
  }
  rep.record(level.empty(), "A_(p) = 0");

  // p-th powers of A_(2) vanish
  SplitMix64 g(seed);
  for (auto& w : frontier) rep.record(W.is_zero_at(W.pow(w, p.value()), W.trunc_level()),
                                      "p-th power of a commutator");
  for (unsigned t = 0; t < samples; ++t) {
    // random combination of A_(2) spanning elements
    WeylElt z = W.zero();
    for (auto& w : frontier)
      if (g.below(4) == 0) z = W.add(z, W.scale(1 + g.below(p.value() - 1), w));
    rep.record(W.is_zero_at(W.pow(z, p.value()), W.trunc_level()), "p-th power in A_(2) span");
  }

  // conclusions on generator pairs and samples
  auto check_pair = [&](const WeylElt& a, const WeylElt& b) {
    WeylElt add_lhs = W.pow(W.add(a, b), p.value());
    WeylElt add_rhs = W.add(W.pow(a, p.value()), W.pow(b, p.value()));
    rep.record(W.eq_at(add_lhs, add_rhs, W.trunc_level()), "(a+b)^p = a^p + b^p");
    WeylElt mul_lhs = W.pow(W.mul(a, b), p.value());
    WeylElt mul_rhs = W.mul(W.pow(a, p.value()), W.pow(b, p.value()));
    rep.record(W.eq_at(mul_lhs, mul_rhs, W.trunc_level()), "(ab)^p = a^p b^p");
    WeylElt cen = W.commutator(W.pow(a, p.value()), b);
    rep.record(W.is_zero_at(cen, cen.trunc), "[a^p, b] = 0");
  };
  check_pair(W.gen_x(0), W.gen_y(0));
  for (unsigned t = 0; t < samples; ++t) check_pair(W.random_elt(g), W.random_elt(g));
  return rep;
}

// Basis of the center of D_N: kernel of z -> ([z, x_i], [z, y_i]).
inline std::vector<WeylElt> center_basis(const WeylCtx& W) {
  unsigned dim = W.dim();
  std::vector<WeylElt> gens;
  for (unsigned i = 0; i < W.pairs(); ++i) {
    gens.push_back(W.gen_x(i));
    gens.push_back(W.gen_y(i));
  }
  FpMatrix M(gens.size() * dim, dim);
  for (unsigned col = 0; col < dim; ++col) {
    WeylElt e = W.zero();
    e.c[col] = 1;
    for (unsigned gi = 0; gi < gens.size(); ++gi) {
      WeylElt c = W.commutator(e, gens[gi]);
      for (unsigned r = 0; r < dim; ++r) M.at(gi * dim + r, col) = c.c[r];
    }
  }
  std::vector<WeylElt> out;
  for (auto& v : nullspace(W.field(), M)) {
    WeylElt w = W.zero();
    w.c = v;
    out.push_back(w);
  }
  return out;
}

// ---- fibers at h = c -------------------------------------------------------------

// The p^{2n}-dimensional fiber algebra x_i y_j - y_j x_i = c delta_ij,
// x^p = y^p = 0, realized on F_p[t]/(t_i^p) by x_i -> (t_i .) and
// y_i -> -c d/dt_i (the sign realizes the declared commutation relation).
struct FiberRep {
  unsigned vdim = 0;                 // p^n
  std::vector<FpMatrix> x_ops, y_ops;
};

inline FiberRep fiber(const WeylCtx& W, Scalar c) {
  if (c % W.p() == 0) throw BadParams("fiber needs c != 0");
  const Fp& F = W.field();
  unsigned n = W.pairs(), p = W.p();
  unsigned vdim = 1;
  for (unsigned i = 0; i < n; ++i) vdim *= p;
  auto exp_of = [&](unsigned idx, unsigned var) {
    for (unsigned i = 0; i < var; ++i) idx /= p;
    return idx % p;
  };
  auto stride = [&](unsigned var) {
    unsigned s = 1;
    for (unsigned i = 0; i < var; ++i) s *= p;
    return s;
  };
  FiberRep rep;
  rep.vdim = vdim;
  for (unsigned i = 0; i < n; ++i) {
    FpMatrix X(vdim, vdim), Y(vdim, vdim);
    for (unsigned idx = 0; idx < vdim; ++idx) {
      unsigned e = exp_of(idx, i);
      if (e + 1 < p) X.at(idx + stride(i), idx) = 1;             // multiply by t_i
      if (e >= 1) Y.at(idx - stride(i), idx) = F.mul(F.neg(c % F.p()), e);  // -c d/dt_i
    }
    rep.x_ops.push_back(std::move(X));
    rep.y_ops.push_back(std::move(Y));
  }
  return rep;
}

// Certifies the fiber is the full matrix algebra: the relations hold, the
// p^{2n} normal-ordered monomial images are linearly independent (hence the
// structure map is bijective), and the commutant is the scalars.
inline VerifyReport fiber_matrix_iso(const WeylCtx& W, Scalar c) {
  const Fp& F = W.field();
  FiberRep rep = fiber(W, c);
  unsigned n = W.pairs(), p = W.p(), vdim = rep.vdim;
  VerifyReport out;

  auto eq = [&](const FpMatrix& A, const FpMatrix& B) { return A.a == B.a; };
  FpMatrix I = FpMatrix::identity(vdim);

  for (unsigned i = 0; i < n; ++i)
    for (unsigned j = 0; j < n; ++j) {
      FpMatrix comm = mat_mul(F, rep.x_ops[i], rep.y_ops[j]);
      FpMatrix yx = mat_mul(F, rep.y_ops[j], rep.x_ops[i]);
      for (std::size_t t = 0; t < comm.a.size(); ++t) comm.a[t] = F.sub(comm.a[t], yx.a[t]);
      FpMatrix expected(vdim, vdim);
      if (i == j)
        for (unsigned d = 0; d < vdim; ++d) expected.at(d, d) = c % F.p();
      out.record(eq(comm, expected), "commutation relation");
    }
  for (unsigned i = 0; i < n; ++i) {
    out.record(mat_pow(F, rep.x_ops[i], p).a == FpMatrix(vdim, vdim).a, "x^p = 0");
    out.record(mat_pow(F, rep.y_ops[i], p).a == FpMatrix(vdim, vdim).a, "y^p = 0");
  }

  // images of the p^{2n} normal-ordered monomials span End(V)
  EchelonSpan span(F, static_cast<std::size_t>(vdim) * vdim);
  unsigned count = 0;
  for (unsigned m = 0; m < W.adim(); ++m) {
    FpMatrix img = I;
    for (unsigned i = 0; i < n; ++i) {
      for (unsigned e = 0; e < W.shadow().exponent(m, 2 * i); ++e)
        img = mat_mul(F, img, rep.x_ops[i]);
    }
    for (unsigned i = 0; i < n; ++i) {
      for (unsigned e = 0; e < W.shadow().exponent(m, 2 * i + 1); ++e)
        img = mat_mul(F, img, rep.y_ops[i]);
    }
    if (span.add(img.a)) ++count;
  }
  out.record(count == W.adim() && W.adim() == vdim * vdim, "structure map bijective");

  // commutant inside End(V) is the scalars
  std::size_t edim = static_cast<std::size_t>(vdim) * vdim;
  FpMatrix M(2 * n * edim, edim);
  std::size_t row_block = 0;
  for (unsigned i = 0; i < n; ++i)
    for (const FpMatrix* G : {&rep.x_ops[i], &rep.y_ops[i]}) {
      for (unsigned a = 0; a < vdim; ++a)
        for (unsigned b = 0; b < vdim; ++b) {
          // entry (a,b) of ZG - GZ as a linear function of Z
          for (unsigned k = 0; k < vdim; ++k) {
            std::size_t colZ = static_cast<std::size_t>(a) * vdim + k;
            M.at(row_block + a * vdim + b, colZ) =
                F.add(M.at(row_block + a * vdim + b, colZ), G->at(k, b));
            std::size_t colZ2 = static_cast<std::size_t>(k) * vdim + b;
            M.at(row_block + a * vdim + b, colZ2) =
                F.sub(M.at(row_block + a * vdim + b, colZ2), G->at(a, k));
          }
        }
      row_block += edim;
    }
  out.record(nullspace(F, M).size() == 1, "fiber center is the scalars");
  return out;
}

}  // namespace charp::weylquant
