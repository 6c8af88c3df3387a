#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "charp/poissonrestr.hpp"
#include "charp/text.hpp"
#include "charp/weylquant.hpp"

// Named verification suites over parameter grids. Each suite runs a list of
// indexed cases; case seeds derive from the master seed by a counter, so
// reports are byte-identical for a given seed regardless of the worker count
// (CHARP_THREADS).

namespace charp::suites {

struct Params {
  unsigned p = 0;        // 0 = the suite's own criterion grid
  unsigned m = 0;        // trunccalc variables
  unsigned n = 0;        // weyl pairs
  unsigned N = 0;        // weyl h-truncation
  unsigned samples = 0;  // 0 = suite default
  std::uint64_t seed = 42;
};

struct CaseResult {
  unsigned long index = 0;
  std::string counterexample;  // empty = pass
};

struct SuiteReport {
  std::string suite;
  Params params;
  unsigned long cases = 0;
  unsigned long passed = 0;
  unsigned long failed = 0;
  std::vector<CaseResult> counterexamples;
  double wall_ms = 0;

  bool ok() const { return failed == 0; }
};

inline unsigned worker_count() {
  if (const char* env = std::getenv("CHARP_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return 1;
}

// Runs `count` cases; fn(index, case_seed) returns an empty string on pass or
// a counterexample description. Results are assembled by index.
inline void run_cases(SuiteReport& rep, unsigned long count,
                      const std::function<std::string(unsigned long, std::uint64_t)>& fn) {
  std::vector<std::string> results(count);
  unsigned workers = std::min<unsigned long>(worker_count(), count ? count : 1);
  unsigned long base = rep.cases;
  if (workers <= 1) {
    for (unsigned long i = 0; i < count; ++i) results[i] = fn(i, case_seed(rep.params.seed, base + i));
  } else {
    std::atomic<unsigned long> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          unsigned long i = next.fetch_add(1);
          if (i >= count) return;
          results[i] = fn(i, case_seed(rep.params.seed, base + i));
        }
      });
    for (auto& t : pool) t.join();
  }
  for (unsigned long i = 0; i < count; ++i) {
    ++rep.cases;
    if (results[i].empty()) {
      ++rep.passed;
    } else {
      ++rep.failed;
      if (rep.counterexamples.size() < 16) rep.counterexamples.push_back({base + i, results[i]});
    }
  }
}

inline void one_case(SuiteReport& rep, bool pass, const std::string& witness) {
  ++rep.cases;
  if (pass) {
    ++rep.passed;
  } else {
    ++rep.failed;
    if (rep.counterexamples.size() < 16) rep.counterexamples.push_back({rep.cases - 1, witness});
  }
}

inline void absorb(SuiteReport& rep, const VerifyReport& v, const std::string& label) {
  rep.cases += v.cases;
  rep.passed += v.cases - v.failed;
  rep.failed += v.failed;
  if (v.failed && rep.counterexamples.size() < 16)
    rep.counterexamples.push_back({rep.cases - v.cases, label + ": " + v.first_counterexample});
}

namespace detail {

using trunccalc::AlgebraCtx;
using trunccalc::DiffForm;
using trunccalc::FrobDeriv;
using trunccalc::TruncPoly;

inline poissonrestr::Symplectic random_exact_symplectic(const AlgebraCtx& A, SplitMix64& g) {
  for (;;) {
    DiffForm eta = A.zero_form(1);
    for (auto& f : eta.comp) f = A.random_poly(g);
    DiffForm omega = A.de_rham(eta);
    try {
      return poissonrestr::check_symplectic(A, omega);
    } catch (const Degenerate&) {
    }
  }
}

inline poissonrestr::Symplectic random_symplectic_any_class(const AlgebraCtx& A, SplitMix64& g,
                                                            bool force_nonzero_class) {
  poissonrestr::Symplectic S = random_exact_symplectic(A, g);
  if (!force_nonzero_class) return S;
  DiffForm w = S.form;
  bool planted = false;
  for (unsigned s = 0; s < A.n_subsets(2); ++s) {
    Scalar lam = g.below(A.p());
    if (s + 1 == A.n_subsets(2) && !planted && lam == 0) lam = 1 + g.below(A.p() - 1);
    if (lam) {
      w = A.add(w, A.scale(lam, A.class_representative(2, s)));
      planted = true;
    }
  }
  return poissonrestr::check_symplectic(A, w);
}

}  // namespace detail

// ---- suite implementations --------------------------------------------------

// Criterion: compute_L equals the brute-force expansion, is a Lie element
// (level 1), and the degenerate evaluations vanish.
inline SuiteReport suite_universal_L(const Params& prm) {
  SuiteReport rep;
  rep.suite = "universal-L";
  rep.params = prm;
  std::vector<unsigned> grid = prm.p ? std::vector<unsigned>{prm.p}
                                     : std::vector<unsigned>{3, 5};
  for (unsigned p : grid) {
    freealg::FreeAlgCtx FA(Prime(p), 2);
    freealg::UniversalL L = FA.compute_L();

    freealg::TensorElt sum = FA.t_add(FA.t_gen(0), FA.t_gen(1));
    freealg::TensorElt brute = FA.t_pow(sum, p);
    brute = FA.t_sub(brute, FA.t_pow(FA.t_gen(0), p));
    brute = FA.t_sub(brute, FA.t_pow(FA.t_gen(1), p));
    one_case(rep, L.tensor == brute, "p=" + std::to_string(p) + ": oracle expansion mismatch");

    one_case(rep, FA.pbw_level(L.tensor) == 1, "p=" + std::to_string(p) + ": not a Lie element");

    struct TT {
      const freealg::FreeAlgCtx& ctx;
      using Elt = freealg::TensorElt;
      Elt zero() const { return {}; }
      Elt one() const { return ctx.t_one(); }
      Elt add(const Elt& a, const Elt& b) const { return ctx.t_add(a, b); }
      Elt scale(Scalar c, const Elt& a) const { return ctx.t_scale(c, a); }
      Elt mul(const Elt& a, const Elt& b) const { return ctx.tensor_mul(a, b); }
      Elt bracket(const Elt& a, const Elt& b) const { return ctx.commutator(a, b); }
      Elt h(const Elt& a) const { return a; }
    } tt{FA};
    std::vector<freealg::TensorElt> ims0{FA.t_gen(0), freealg::TensorElt{}};
    one_case(rep, freealg::eval_lie_combo(L.lie_combo, ims0, tt).is_zero(),
             "p=" + std::to_string(p) + ": L(x,0) != 0");
    std::vector<freealg::TensorElt> imsx{FA.t_gen(0), FA.t_gen(0)};
    one_case(rep, freealg::eval_lie_combo(L.lie_combo, imsx, tt).is_zero(),
             "p=" + std::to_string(p) + ": L(x,x) != 0");
  }
  return rep;
}

// Criterion: L evaluated in the two-step filtered Lie algebra with {x,y} = y
// yields exactly y.
inline SuiteReport suite_lemma_sq(const Params& prm) {
  SuiteReport rep;
  rep.suite = "lemma-sq";
  rep.params = prm;
  std::vector<unsigned> grid = prm.p ? std::vector<unsigned>{prm.p}
                                     : std::vector<unsigned>{3, 5, 7};
  for (unsigned p : grid) {
    freealg::FreeAlgCtx FA(Prime(p), 2);
    freealg::UniversalL L = FA.compute_L();
    struct Two {
      Fp F;
      using Elt = std::pair<Scalar, Scalar>;
      Elt zero() const { return {0, 0}; }
      Elt one() const { throw Error("non-unital"); }
      Elt add(Elt a, Elt b) const { return {F.add(a.first, b.first), F.add(a.second, b.second)}; }
      Elt scale(Scalar c, Elt a) const {
        return {F.mul(c % F.p(), a.first), F.mul(c % F.p(), a.second)};
      }
      Elt mul(Elt, Elt) const { throw Error("non-associative"); }
      Elt bracket(Elt a, Elt b) const {
        return {0, F.sub(F.mul(a.first, b.second), F.mul(b.first, a.second))};
      }
      Elt h(Elt) const { return {0, 0}; }
    } tgt{FA.field()};
    std::vector<Two::Elt> images{{1, 0}, {0, 1}};
    auto val = freealg::eval_lie_combo(L.lie_combo, images, tgt);
    one_case(rep, val.first == 0 && val.second == 1,
             "p=" + std::to_string(p) + ": L(x,y) != y in the filtered model");
  }
  return rep;
}

// Criterion: compute_P passes pbw_level <= p+1, and h^{p-1} P(a,b) equals
// (ab)^p - a^p b^p in the reduced Weyl algebra on seeded samples.
inline SuiteReport suite_universal_P(const Params& prm) {
  SuiteReport rep;
  rep.suite = "universal-P";
  rep.params = prm;
  std::vector<unsigned> grid = prm.p ? std::vector<unsigned>{prm.p}
                                     : std::vector<unsigned>{3, 5};
  for (unsigned p : grid) {
    freealg::FreeAlgCtx FA(Prime(p), 2);
    freealg::UniversalP P = FA.compute_P();
    one_case(rep, FA.pbw_level(P.tensor) <= p + 1,
             "p=" + std::to_string(p) + ": filtration level above p+1");
  }
  {
    unsigned p = prm.p ? prm.p : 3;
    unsigned n = prm.n ? prm.n : 1;
    unsigned N = prm.N ? prm.N : 2 * p;
    unsigned samples = prm.samples ? prm.samples : 200;
    freealg::FreeAlgCtx FA(Prime(p), 2);
    freealg::UniversalP P = FA.compute_P();
    weylquant::WeylCtx W(Prime(p), n, N);
    weylquant::WeylTarget tgt{W};
    run_cases(rep, samples, [&](unsigned long, std::uint64_t cs) -> std::string {
      SplitMix64 g(cs);
      weylquant::WeylElt a = W.random_elt(g), b = W.random_elt(g);
      std::vector<weylquant::WeylElt> images{a, b};
      weylquant::WeylElt pv = freealg::eval_pbw(FA, P.expr, images, tgt);
      weylquant::WeylElt lhs = W.h_shift(pv, p - 1);
      weylquant::WeylElt rhs =
          W.sub(W.pow(W.mul(a, b), p), W.mul(W.pow(a, p), W.pow(b, p)));
      unsigned t = W.common_trunc(lhs, rhs);
      if (t >= 1 && W.eq_at(lhs, rhs, t)) return {};
      return "a = " + text::show(W, a) + "; b = " + text::show(W, b);
    });
  }
  return rep;
}

// Criterion: d o d = 0, cartier o d = 0, de Rham dimensions binom(m,k), and
// the planted C^1 example at p = 3.
inline SuiteReport suite_cartier(const Params& prm) {
  SuiteReport rep;
  rep.suite = "cartier";
  rep.params = prm;
  std::vector<std::pair<unsigned, unsigned>> grid;
  if (prm.p && prm.m) {
    grid = {{prm.p, prm.m}};
  } else {
    for (unsigned p : {3u, 5u})
      for (unsigned m : {1u, 2u}) grid.emplace_back(p, m);
  }
  auto binom = [](unsigned nn, unsigned kk) {
    unsigned r = 1;
    if (kk > nn) return 0u;
    for (unsigned i = 0; i < kk; ++i) r = r * (nn - i) / (i + 1);
    return r;
  };
  for (auto [p, m] : grid) {
    trunccalc::AlgebraCtx A(Prime(p), m);
    std::string tag = " (p=" + std::to_string(p) + ", m=" + std::to_string(m) + ")";
    // d o d = 0 as a matrix identity per degree
    for (unsigned k = 0; k + 1 <= m; ++k) {
      FpMatrix dd = mat_mul(A.field(), A.d_matrix(k + 1), A.d_matrix(k));
      bool zero = std::all_of(dd.a.begin(), dd.a.end(), [](Scalar v) { return v == 0; });
      one_case(rep, zero, "d o d != 0 at degree " + std::to_string(k) + tag);
    }
    // cartier kills exact forms (seeded) and dimensions match
    SplitMix64 g(case_seed(prm.seed, p * 100 + m));
    for (unsigned k = 1; k <= m; ++k) {
      bool killed = true;
      for (int t = 0; t < 25; ++t) {
        trunccalc::DiffForm eta = A.zero_form(k - 1);
        for (auto& f : eta.comp) f = A.random_poly(g);
        if (!A.cartier(A.de_rham(eta)).is_zero()) killed = false;
      }
      one_case(rep, killed, "cartier o d != 0 at degree " + std::to_string(k) + tag);
      // representatives map to unit vectors
      bool units = true;
      for (unsigned s = 0; s < A.n_subsets(k); ++s) {
        trunccalc::ConstForm c = A.cartier(A.class_representative(k, s));
        for (unsigned s2 = 0; s2 < A.n_subsets(k); ++s2)
          if (c.c[s2] != (s2 == s ? 1u : 0u)) units = false;
      }
      one_case(rep, units, "canonical representatives are not unit classes" + tag);
    }
    for (unsigned k = 0; k <= m; ++k) {
      unsigned dim_forms = A.n_subsets(k) * A.dim();
      unsigned rk = rank(A.field(), A.d_matrix(k));
      unsigned rk_prev = k == 0 ? 0 : rank(A.field(), A.d_matrix(k - 1));
      one_case(rep, dim_forms - rk - rk_prev == binom(m, k),
               "de Rham dimension mismatch at degree " + std::to_string(k) + tag);
    }
  }
  {
    trunccalc::AlgebraCtx A(Prime(3), 1);
    trunccalc::DiffForm w = text::parse_form(A, "dx0 - x0 dx0 + x0^2 dx0");
    trunccalc::ConstForm c = A.cartier(w);
    one_case(rep, c.c == std::vector<Scalar>{1}, "C^1((1-x+x^2)dx) != dx");
  }
  return rep;
}

// Criterion: the Cartier/p-power contraction identity on seeded pairs.
inline SuiteReport suite_car_p(const Params& prm) {
  SuiteReport rep;
  rep.suite = "car-p";
  rep.params = prm;
  struct Leg {
    unsigned p, m, samples;
  };
  std::vector<Leg> legs;
  if (prm.p && prm.m)
    legs.push_back({prm.p, prm.m, prm.samples ? prm.samples : 200});
  else
    legs = {{3, 2, prm.samples ? prm.samples : 200}, {5, 2, prm.samples ? prm.samples : 50}};
  for (auto leg : legs) {
    trunccalc::AlgebraCtx A(Prime(leg.p), leg.m);
    run_cases(rep, leg.samples, [&](unsigned long i, std::uint64_t cs) -> std::string {
      SplitMix64 g(cs);
      unsigned k = 1 + (i % leg.m);
      trunccalc::DiffForm alpha = A.random_closed_form(k, g);
      trunccalc::Derivation xi = A.random_derivation(g);
      if (A.verify_car_p(xi, alpha)) return {};
      return "alpha = " + text::show(A, alpha) + "; xi = " + text::show(A, xi);
    });
  }
  return rep;
}

// Criterion: the two flags (Hamiltonians closed under p-th power, vanishing
// degree-2 Cartier class) agree on seeded forms with planted cases.
inline SuiteReport suite_theorem_cent(const Params& prm) {
  SuiteReport rep;
  rep.suite = "theorem-cent";
  rep.params = prm;
  struct Leg {
    unsigned p, m, forms;
  };
  std::vector<Leg> legs;
  if (prm.p && prm.m)
    legs.push_back({prm.p, prm.m, prm.samples ? prm.samples : 100});
  else
    legs = {{3, 2, prm.samples ? prm.samples : 100}, {5, 2, prm.samples ? prm.samples : 30}};
  for (auto leg : legs) {
    trunccalc::AlgebraCtx A(Prime(leg.p), leg.m);
    run_cases(rep, leg.forms, [&](unsigned long i, std::uint64_t cs) -> std::string {
      SplitMix64 g(cs);
      bool plant_negative = (i % 3 == 2);
      poissonrestr::Symplectic S =
          detail::random_symplectic_any_class(A, g, plant_negative);
      auto [f1, f2] = poissonrestr::theorem_cent_check(A, S);
      if (f1 != f2)
        return "flags disagree on " + text::show(A, S.form);
      if (plant_negative && f2)
        return "planted nonzero class not detected on " + text::show(A, S.form);
      if (!plant_negative && !f2)
        return "exact form reported a nonzero class: " + text::show(A, S.form);
      return {};
    });
  }
  return rep;
}

// Criterion: restricted-structure axioms, kappa round-trip, difference and
// exact-shift invariance for seeded (potential, kappa) data.
inline SuiteReport suite_restricted(const Params& prm) {
  SuiteReport rep;
  rep.suite = "restricted";
  rep.params = prm;
  unsigned p = prm.p ? prm.p : 3, m = prm.m ? prm.m : 2;
  unsigned structures = 50;
  unsigned samples = prm.samples ? prm.samples : 200;
  trunccalc::AlgebraCtx A(Prime(p), m);
  freealg::FreeAlgCtx FA(Prime(p), 2);
  FA.compute_P();  // warm the shared caches before fanning out
  run_cases(rep, structures, [&](unsigned long i, std::uint64_t cs) -> std::string {
    SplitMix64 g(cs);
    poissonrestr::Symplectic S = detail::random_exact_symplectic(A, g);
    auto alpha = A.is_exact(S.form);
    if (!alpha) return "random exact form lost its potential";
    trunccalc::FrobDeriv kappa{std::vector<Scalar>(m)};
    for (auto& v : kappa.values) v = g.below(p);
    poissonrestr::RestrictedStructure R =
        poissonrestr::restricted_from(A, S, *alpha, kappa);
    auto pw = [&](const trunccalc::TruncPoly& a) { return R.pow(a); };

    VerifyReport axioms = poissonrestr::verify_restricted(
        A, S, pw, FA, samples, case_seed(cs, 1),
        [&](const trunccalc::TruncPoly& a) { return text::show(A, a); });
    if (!axioms.ok()) return "axioms: " + axioms.first_counterexample;

    trunccalc::Derivation xi = poissonrestr::field_from_oneform(A, S, *alpha);
    trunccalc::FrobDeriv back =
        poissonrestr::kappa_of(A, S, pw, xi, 1, 16, case_seed(cs, 2));
    if (!(back == kappa)) return "kappa round-trip failed";

    // second structure over the same form: difference is a Frobenius-derivation
    trunccalc::FrobDeriv kappa2{std::vector<Scalar>(m)};
    for (auto& v : kappa2.values) v = g.below(p);
    poissonrestr::RestrictedStructure R2 =
        poissonrestr::restricted_from(A, S, *alpha, kappa2);
    trunccalc::FrobDeriv diff =
        poissonrestr::difference_of(A, R, R2, 16, case_seed(cs, 3));
    for (unsigned v = 0; v < m; ++v)
      if (diff.values[v] != A.field().sub(kappa2.values[v], kappa.values[v]))
        return "difference is not kappa2 - kappa1";

    // exact shifts of the potential leave the structure unchanged
    trunccalc::TruncPoly gp = A.random_poly(g);
    poissonrestr::RestrictedStructure R3 = poissonrestr::restricted_from(
        A, S, A.add(*alpha, A.de_rham(gp)), kappa);
    trunccalc::FrobDeriv shift = poissonrestr::difference_of(A, R, R3, 8, case_seed(cs, 4));
    for (unsigned v = 0; v < m; ++v)
      if (shift.values[v] != 0) return "exact potential shift changed the structure";
    return {};
  });
  return rep;
}

// Criterion: seeded forms with vanishing class normalize with an exact zero
// pullback residual; the planted example included.
inline SuiteReport suite_darboux(const Params& prm) {
  SuiteReport rep;
  rep.suite = "darboux";
  rep.params = prm;
  unsigned p = prm.p ? prm.p : 3, m = prm.m ? prm.m : 2;
  unsigned forms = prm.samples ? prm.samples : 50;
  trunccalc::AlgebraCtx A(Prime(p), m);
  trunccalc::DiffForm std_form = poissonrestr::standard_symplectic_form(A);
  {
    // planted example: (1+x) dx^dy
    trunccalc::DiffForm w = A.zero_form(2);
    w.comp[0] = A.add(A.one(), A.coordinate(0));
    poissonrestr::Symplectic S = poissonrestr::check_symplectic(A, w);
    poissonrestr::Substitution phi = poissonrestr::darboux_normalize(A, S, prm.seed);
    one_case(rep, poissonrestr::pullback(A, phi, std_form) == S.form,
             "planted (1+x)dx^dy failed the pullback certificate");
  }
  run_cases(rep, forms, [&](unsigned long, std::uint64_t cs) -> std::string {
    SplitMix64 g(cs);
    poissonrestr::Symplectic S = detail::random_exact_symplectic(A, g);
    try {
      poissonrestr::Substitution phi = poissonrestr::darboux_normalize(A, S, cs);
      if (poissonrestr::pullback(A, phi, std_form) == S.form) return {};
      return "nonzero pullback residual on " + text::show(A, S.form);
    } catch (const NormalizationFailed& e) {
      return std::string(e.what()) + " on " + text::show(A, S.form);
    }
  });
  return rep;
}

// Criterion: Poisson ideal closures reach the whole algebra; the Poisson
// center is one-dimensional.
inline SuiteReport suite_poisson_simple(const Params& prm) {
  SuiteReport rep;
  rep.suite = "poisson-simple";
  rep.params = prm;
  unsigned p = prm.p ? prm.p : 3, m = prm.m ? prm.m : 2;
  unsigned count = prm.samples ? prm.samples : 50;
  trunccalc::AlgebraCtx A(Prime(p), m);
  poissonrestr::Symplectic S =
      poissonrestr::check_symplectic(A, poissonrestr::standard_symplectic_form(A));
  one_case(rep, poissonrestr::poisson_center(A, S).size() == 1,
           "Poisson center dimension is not 1");
  one_case(rep, poissonrestr::poisson_ideal_closure(A, S, A.one()) == A.dim(),
           "unit ideal closure misses the algebra");
  run_cases(rep, count, [&](unsigned long, std::uint64_t cs) -> std::string {
    SplitMix64 g(cs);
    trunccalc::TruncPoly f = A.random_poly(g);
    while (f.is_zero()) f = A.random_poly(g);
    unsigned d = poissonrestr::poisson_ideal_closure(A, S, f);
    if (d == A.dim()) return {};
    return "closure dimension " + std::to_string(d) + " for f = " + text::show(A, f);
  });
  return rep;
}

// Criterion: associativity, the quasi-Frobenius lemma, splitting-map and
// restricted-quantized checks, the center dimension, and matrix fibers.
inline SuiteReport suite_weyl(const Params& prm) {
  SuiteReport rep;
  rep.suite = "weyl";
  rep.params = prm;
  unsigned p = prm.p ? prm.p : 3, n = prm.n ? prm.n : 1;
  unsigned samples = prm.samples ? prm.samples : 200;
  freealg::FreeAlgCtx FA(Prime(p), 2);

  {
    weylquant::WeylCtx W(Prime(p), n, prm.N ? prm.N : 4);
    bool assoc = true;
    std::string witness;
    for (unsigned i = 0; i < W.dim() && assoc; ++i)
      for (unsigned j = 0; j < W.dim() && assoc; ++j)
        for (unsigned k = 0; k < W.dim() && assoc; ++k) {
          weylquant::WeylElt a = W.zero(), b = W.zero(), c = W.zero();
          a.c[i] = 1;
          b.c[j] = 1;
          c.c[k] = 1;
          if (!W.eq_at(W.mul(W.mul(a, b), c), W.mul(a, W.mul(b, c)), W.trunc_level())) {
            assoc = false;
            witness = "basis triple (" + std::to_string(i) + "," + std::to_string(j) + "," +
                      std::to_string(k) + ")";
          }
        }
    one_case(rep, assoc, "associativity: " + witness);
  }

  absorb(rep, weylquant::quasi_fr_check(Prime(p), n, 50, case_seed(prm.seed, 1)), "quasi-fr");
  {
    weylquant::WeylCtx W(Prime(p), n, prm.N ? prm.N : 4);
    absorb(rep, weylquant::verify_fr_const(W, samples, case_seed(prm.seed, 2)), "fr-const");
  }
  {
    weylquant::WeylCtx W(Prime(p), n, prm.N ? prm.N : p + 2);
    absorb(rep, weylquant::verify_restr_quant(W, FA, samples, case_seed(prm.seed, 3)),
           "restr-quant");
  }
  {
    weylquant::WeylCtx W(Prime(p), n, 3);
    unsigned expected = 3 + (W.adim() - 1);
    one_case(rep, weylquant::center_basis(W).size() == expected,
             "center dimension at N=3 is not " + std::to_string(expected));
  }
  {
    weylquant::WeylCtx W(Prime(p), n, prm.N ? prm.N : 4);
    for (Scalar c = 1; c < p; ++c)
      absorb(rep, weylquant::fiber_matrix_iso(W, c), "fiber c=" + std::to_string(c));
  }
  return rep;
}

// Criterion: the Weyl bracket reduces to the Poisson bracket mod h, and the
// canonical p-power reduces to an accepted restricted Poisson structure.
inline SuiteReport suite_cross_module(const Params& prm) {
  SuiteReport rep;
  rep.suite = "cross-module";
  rep.params = prm;
  unsigned p = prm.p ? prm.p : 3, n = prm.n ? prm.n : 1;
  unsigned samples = prm.samples ? prm.samples : 100;
  weylquant::WeylCtx W(Prime(p), n, 2 * p);
  const trunccalc::AlgebraCtx& A = W.shadow();
  freealg::FreeAlgCtx FA(Prime(p), 2);
  poissonrestr::Symplectic S =
      poissonrestr::check_symplectic(A, poissonrestr::standard_symplectic_form(A));

  bool brackets_match = true;
  std::string witness;
  for (unsigned i = 0; i < A.dim() && brackets_match; ++i)
    for (unsigned j = 0; j < A.dim() && brackets_match; ++j) {
      trunccalc::TruncPoly a = A.monomial(i), b = A.monomial(j);
      trunccalc::TruncPoly via_weyl = W.reduce(W.bracket(W.lift(a), W.lift(b)));
      trunccalc::TruncPoly via_poisson = poissonrestr::bracket(A, S, a, b);
      if (!(via_weyl == via_poisson)) {
        brackets_match = false;
        witness = "a = " + text::show(A, a) + "; b = " + text::show(A, b);
      }
    }
  one_case(rep, brackets_match, "bracket reduction mismatch: " + witness);

  weylquant::SplittingData s = weylquant::canonical_splitting(W);
  auto pow_mod_h = [&](const trunccalc::TruncPoly& a) {
    return W.reduce(weylquant::p_power(W, W.lift(a), s));
  };
  absorb(rep,
         poissonrestr::verify_restricted(
             A, S, pow_mod_h, FA, samples, case_seed(prm.seed, 5),
             [&](const trunccalc::TruncPoly& a) { return text::show(A, a); }),
         "p_power mod h");
  return rep;
}

// Criterion: fixed-point section spaces have the expected dimensions.
inline SuiteReport suite_hI(const Params& prm) {
  SuiteReport rep;
  rep.suite = "hI";
  rep.params = prm;
  std::vector<std::pair<unsigned, unsigned>> grid;
  if (prm.p && prm.m)
    grid = {{prm.p, prm.m}};
  else
    grid = {{3, 1}, {3, 2}};
  for (auto [p, m] : grid) {
    trunccalc::AlgebraCtx A(Prime(p), m);
    std::string tag = " (p=" + std::to_string(p) + ", m=" + std::to_string(m) + ")";
    auto zero_sections = A.hI_sections(0);
    one_case(rep, zero_sections.size() == A.dim() - 1,
             "lambda=0 dimension is not dim A - 1" + tag);
    bool all_exact = true;
    for (auto& w : zero_sections)
      if (!A.is_closed(w) || !A.is_exact(w).has_value()) all_exact = false;
    one_case(rep, all_exact, "lambda=0 sections are not the exact forms" + tag);
    one_case(rep, A.hI_sections(1).empty(), "lambda=1 space is not zero" + tag);
  }
  return rep;
}

// ---- registry ------------------------------------------------------------------

using SuiteFn = SuiteReport (*)(const Params&);

inline const std::map<std::string, SuiteFn>& registry() {
  static const std::map<std::string, SuiteFn> reg = {
      {"universal-L", suite_universal_L},
      {"lemma-sq", suite_lemma_sq},
      {"universal-P", suite_universal_P},
      {"cartier", suite_cartier},
      {"car-p", suite_car_p},
      {"theorem-cent", suite_theorem_cent},
      {"restricted", suite_restricted},
      {"darboux", suite_darboux},
      {"poisson-simple", suite_poisson_simple},
      {"weyl", suite_weyl},
      {"cross-module", suite_cross_module},
      {"hI", suite_hI},
  };
  return reg;
}

inline SuiteReport run_suite(const std::string& name, const Params& prm) {
  auto it = registry().find(name);
  if (it == registry().end()) throw UnknownSuite(name);
  auto start = std::chrono::steady_clock::now();
  SuiteReport rep = it->second(prm);
  rep.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  return rep;
}

}  // namespace charp::suites
