#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "charp/freealg.hpp"
#include "charp/report.hpp"
#include "charp/trunccalc.hpp"

// Symplectic forms on the local model, Poisson brackets, Hamiltonian fields,
// restricted structures from (potential, Frobenius-derivation) data, conformal
// derivations and Darboux normalization.
//
// Sign conventions, fixed once: contraction acts in the first slot,
// H_f . Omega = df, {f,g} = Omega(H_f, H_g). Consequently {f,g} = H_g(f),
// {x,y} = 1 for Omega = dx^dy, and [H_f, H_g] = H_{{g,f}}.

namespace charp::poissonrestr {

using trunccalc::AlgebraCtx;
using trunccalc::ConstForm;
using trunccalc::Derivation;
using trunccalc::DiffForm;
using trunccalc::FrobDeriv;
using trunccalc::TruncPoly;

// m x m matrix with entries in A, row-major.
using PolyMatrix = std::vector<std::vector<TruncPoly>>;

struct Symplectic {
  DiffForm form;       // closed, non-degenerate 2-form
  PolyMatrix gram;     // G[i][j] = Omega(d_i, d_j)
  PolyMatrix gram_inv; // exact inverse of gram over A
};

struct Substitution {
  std::vector<TruncPoly> images;  // zero constant term, invertible Jacobian at 0
};

namespace detail {

inline PolyMatrix poly_identity(const AlgebraCtx& A) {
  PolyMatrix I(A.vars(), std::vector<TruncPoly>(A.vars(), A.zero()));
  for (unsigned i = 0; i < A.vars(); ++i) I[i][i] = A.one();
  return I;
}

inline PolyMatrix poly_mat_mul(const AlgebraCtx& A, const PolyMatrix& X, const PolyMatrix& Y) {
  unsigned m = A.vars();
  PolyMatrix Z(m, std::vector<TruncPoly>(m, A.zero()));
  for (unsigned i = 0; i < m; ++i)
    for (unsigned k = 0; k < m; ++k) {
      if (X[i][k].is_zero()) continue;
      for (unsigned j = 0; j < m; ++j)
        Z[i][j] = A.add(Z[i][j], A.mul(X[i][k], Y[k][j]));
    }
  return Z;
}

inline bool poly_mat_is_zero(const PolyMatrix& X) {
  for (auto& row : X)
    for (auto& e : row)
      if (!e.is_zero()) return false;
  return true;
}

}  // namespace detail

// Validates closedness and non-degeneracy; the inverse Gram matrix is built by
// a Neumann series through the maximal-ideal filtration and certified exactly.
inline Symplectic check_symplectic(const AlgebraCtx& A, const DiffForm& omega) {
  if (omega.degree != 2) throw BadParams("symplectic form must have degree 2");
  if (!A.is_closed(omega)) throw NotClosed("symplectic form must be closed");
  unsigned m = A.vars();
  const Fp& F = A.field();

  Symplectic S;
  S.form = omega;
  S.gram.assign(m, std::vector<TruncPoly>(m, A.zero()));
  for (unsigned s = 0; s < A.n_subsets(2); ++s) {
    unsigned i = A.subset(2, s)[0], j = A.subset(2, s)[1];
    S.gram[i][j] = omega.comp[s];
    S.gram[j][i] = A.scale(F.p() - 1, omega.comp[s]);
  }

  FpMatrix g0(m, m);
  for (unsigned i = 0; i < m; ++i)
    for (unsigned j = 0; j < m; ++j) g0.at(i, j) = S.gram[i][j].c[0];
  CachedSolver inv0(F, g0);
  if (inv0.rank() != m) throw Degenerate("constant part of the Gram matrix is singular");

  // G = G0 (I + G0^{-1} N), N nilpotent; invert the unit factor by iteration.
  FpMatrix g0inv_num(m, m);
  for (unsigned j = 0; j < m; ++j) {
    std::vector<Scalar> e(m, 0);
    e[j] = 1;
    auto col = inv0.solve(e);
    for (unsigned i = 0; i < m; ++i) g0inv_num.at(i, j) = (*col)[i];
  }
  PolyMatrix g0inv(m, std::vector<TruncPoly>(m, A.zero()));
  for (unsigned i = 0; i < m; ++i)
    for (unsigned j = 0; j < m; ++j) g0inv[i][j] = A.constant(g0inv_num.at(i, j));

  // X = -G0^{-1} N where N = G - G0
  PolyMatrix N(m, std::vector<TruncPoly>(m, A.zero()));
  for (unsigned i = 0; i < m; ++i)
    for (unsigned j = 0; j < m; ++j) {
      N[i][j] = S.gram[i][j];
      N[i][j].c[0] = 0;
    }
  PolyMatrix X = detail::poly_mat_mul(A, g0inv, N);
  for (auto& row : X)
    for (auto& e : row) e = A.scale(F.p() - 1, e);

  PolyMatrix series = detail::poly_identity(A);
  PolyMatrix powX = X;
  while (!detail::poly_mat_is_zero(powX)) {
    for (unsigned i = 0; i < m; ++i)
      for (unsigned j = 0; j < m; ++j) series[i][j] = A.add(series[i][j], powX[i][j]);
    powX = detail::poly_mat_mul(A, powX, X);
  }
  S.gram_inv = detail::poly_mat_mul(A, series, g0inv);

  PolyMatrix check = detail::poly_mat_mul(A, S.gram, S.gram_inv);
  for (unsigned i = 0; i < m; ++i)
    for (unsigned j = 0; j < m; ++j)
      if (!(check[i][j] == (i == j ? A.one() : A.zero())))
        throw Error("Neumann inverse failed certification");
  return S;
}

// Unique xi with xi . Omega = df.
inline Derivation hamiltonian(const AlgebraCtx& A, const Symplectic& S, const TruncPoly& f) {
  unsigned m = A.vars();
  DiffForm df = A.de_rham(f);
  Derivation xi = A.zero_derivation();
  // (xi . Omega)_i = sum_j a_j G[j][i]; solve via a = (G^T)^{-1} grad = (G^{-1})^T grad
  for (unsigned j = 0; j < m; ++j) {
    TruncPoly acc = A.zero();
    for (unsigned i = 0; i < m; ++i) acc = A.add(acc, A.mul(S.gram_inv[i][j], df.comp[i]));
    xi.comp[j] = acc;
  }
  if (!(A.contract(S.form, xi) == df)) throw Error("hamiltonian solve failed certification");
  return xi;
}

// Field xi with xi . Omega = alpha for a given 1-form.
inline Derivation field_from_oneform(const AlgebraCtx& A, const Symplectic& S,
                                     const DiffForm& alpha) {
  if (alpha.degree != 1) throw BadParams("field_from_oneform needs a 1-form");
  unsigned m = A.vars();
  Derivation xi = A.zero_derivation();
  for (unsigned j = 0; j < m; ++j) {
    TruncPoly acc = A.zero();
    for (unsigned i = 0; i < m; ++i) acc = A.add(acc, A.mul(S.gram_inv[i][j], alpha.comp[i]));
    xi.comp[j] = acc;
  }
  if (!(A.contract(S.form, xi) == alpha)) throw Error("field solve failed certification");
  return xi;
}

// {f, g} = Omega(H_f, H_g); equals H_g(f) under the declared conventions.
inline TruncPoly bracket(const AlgebraCtx& A, const Symplectic& S, const TruncPoly& f,
                         const TruncPoly& g) {
  Derivation hf = hamiltonian(A, S, f);
  Derivation hg = hamiltonian(A, S, g);
  DiffForm once = A.contract(S.form, hf);
  DiffForm twice = A.contract(once, hg);
  return twice.comp[0];
}

// Poisson evaluation target for the universal polynomials (h acts as zero).
struct PoissonTarget {
  const AlgebraCtx& A;
  const Symplectic& S;
  using Elt = TruncPoly;
  Elt zero() const { return A.zero(); }
  Elt one() const { return A.one(); }
  Elt add(const Elt& a, const Elt& b) const { return A.add(a, b); }
  Elt scale(Scalar c, const Elt& a) const { return A.scale(c, a); }
  Elt mul(const Elt& a, const Elt& b) const { return A.mul(a, b); }
  Elt bracket(const Elt& a, const Elt& b) const { return poissonrestr::bracket(A, S, a, b); }
  Elt h(const Elt&) const { return A.zero(); }
};

// Basis of the Poisson center: kernel of f -> ({f, x_i})_i. For a symplectic
// structure this is exactly the constants.
inline std::vector<TruncPoly> poisson_center(const AlgebraCtx& A, const Symplectic& S) {
  unsigned m = A.vars(), dim = A.dim();
  FpMatrix M(m * dim, dim);
  for (unsigned i = 0; i < m; ++i) {
    FpMatrix Hi = A.deriv_matrix(hamiltonian(A, S, A.coordinate(i)));
    for (unsigned r = 0; r < dim; ++r)
      for (unsigned c = 0; c < dim; ++c) M.at(i * dim + r, c) = Hi.at(r, c);
  }
  std::vector<TruncPoly> out;
  for (auto& v : nullspace(A.field(), M)) out.push_back(TruncPoly{v});
  return out;
}

// Dimension of the Poisson ideal generated by f: closure of span{f} under
// multiplication by coordinates and bracketing with coordinates.
inline unsigned poisson_ideal_closure(const AlgebraCtx& A, const Symplectic& S,
                                      const TruncPoly& f) {
  if (f.is_zero()) throw BadParams("poisson_ideal_closure needs f != 0");
  std::vector<Derivation> ham_coord;
  for (unsigned i = 0; i < A.vars(); ++i) ham_coord.push_back(hamiltonian(A, S, A.coordinate(i)));
  EchelonSpan span(A.field(), A.dim());
  std::vector<TruncPoly> frontier{f};
  span.add(f.c);
  while (!frontier.empty()) {
    std::vector<TruncPoly> next;
    for (auto& g : frontier)
      for (unsigned i = 0; i < A.vars(); ++i) {
        TruncPoly prod = A.mul(A.coordinate(i), g);
        if (span.add(prod.c)) next.push_back(prod);
        // {g, x_i} = H_{x_i}(g)
        TruncPoly br = A.apply(ham_coord[i], g);
        if (span.add(br.c)) next.push_back(br);
      }
    frontier = std::move(next);
  }
  return span.rank();
}

// Flag 1: for every monomial f the p-th power of H_f is again Hamiltonian.
// Flag 2: the degree-2 Cartier class of the form vanishes. The two must agree.
inline std::pair<bool, bool> theorem_cent_check(const AlgebraCtx& A, const Symplectic& S) {
  bool flag2 = A.cartier(S.form).is_zero();
  bool flag1 = true;
  for (unsigned idx = 0; idx < A.dim() && flag1; ++idx) {
    Derivation hf = hamiltonian(A, S, A.monomial(idx));
    Derivation hfp = A.deriv_p_power_components(A.deriv_matrix(hf));
    DiffForm beta = A.contract(S.form, hfp);
    if (!A.is_closed(beta)) {
      flag1 = false;
      break;
    }
    if (!A.is_exact(beta).has_value()) flag1 = false;
  }
  return {flag1, flag2};
}

// Checks xi({f,g}) = {xi f, g} + {f, xi g} - lambda {f,g} on all basis pairs,
// as an operator identity per basis monomial g.
inline bool conformal_check(const AlgebraCtx& A, const Symplectic& S, const Derivation& xi,
                            Scalar lambda) {
  const Fp& F = A.field();
  FpMatrix Mxi = A.deriv_matrix(xi);
  for (unsigned j = 0; j < A.dim(); ++j) {
    TruncPoly g = A.monomial(j);
    FpMatrix Mg = A.deriv_matrix(hamiltonian(A, S, g));
    FpMatrix Mxig = A.deriv_matrix(hamiltonian(A, S, A.apply(xi, g)));
    FpMatrix lhs = mat_mul(F, Mxi, Mg);
    FpMatrix rhs = mat_mul(F, Mg, Mxi);
    for (std::size_t t = 0; t < rhs.a.size(); ++t) {
      rhs.a[t] = F.add(rhs.a[t], Mxig.a[t]);
      rhs.a[t] = F.sub(rhs.a[t], F.mul(lambda % F.p(), Mg.a[t]));
    }
    if (!(lhs.a == rhs.a)) return false;
  }
  return true;
}

// Weight-1 conformal field: xi with xi . Omega = alpha for an exact potential.
inline Derivation find_conformal(const AlgebraCtx& A, const Symplectic& S) {
  auto alpha = A.is_exact(S.form);
  if (!alpha) throw NotExact("symplectic form admits no potential (nonzero Cartier class)");
  Derivation xi = field_from_oneform(A, S, *alpha);
  if (!conformal_check(A, S, xi, 1))
    throw Error("conformal certification failed for the potential field");
  return xi;
}

// Restricted structure from a potential and a Frobenius-derivation:
// a^[p] = i_p(H_a, alpha) - kappa(a).
class RestrictedStructure {
public:
  RestrictedStructure(const AlgebraCtx& A, Symplectic S, DiffForm potential, FrobDeriv kappa)
      : A_(&A), S_(std::move(S)), potential_(std::move(potential)), kappa_(std::move(kappa)) {}

  const DiffForm& potential() const { return potential_; }
  const FrobDeriv& kappa() const { return kappa_; }
  const Symplectic& symplectic() const { return S_; }

  // a^[p] built from the potential: the interior p-operation enters with a
  // minus sign under the declared first-slot conventions, certified by
  // restr.lie.1 and the kappa round-trip.
  TruncPoly pow(const TruncPoly& a) const {
    Derivation ha = hamiltonian(*A_, S_, a);
    DiffForm ip = A_->i_p(ha, potential_);
    TruncPoly r = A_->scale(A_->p() - 1, ip.comp[0]);
    Scalar k = trunccalc::frob_deriv_apply(*A_, kappa_, a);
    return A_->sub(r, A_->constant(k));
  }

private:
  const AlgebraCtx* A_;
  Symplectic S_;
  DiffForm potential_;
  FrobDeriv kappa_;
};

inline RestrictedStructure restricted_from(const AlgebraCtx& A, const Symplectic& S,
                                           const DiffForm& alpha, const FrobDeriv& kappa) {
  if (!(A.de_rham(alpha) == S.form))
    throw PotentialMismatch("d(potential) differs from the symplectic form");
  return RestrictedStructure(A, S, alpha, kappa);
}

using PowerMap = std::function<TruncPoly(const TruncPoly&)>;

// Axioms of a restricted Poisson structure, checked on all basis pairs plus
// seeded random pairs: {a^[p], b} = (ad a)^p(b), the L addition rule and the
// P product rule, with L and P evaluated through bracket/product words.
inline VerifyReport verify_restricted(const AlgebraCtx& A, const Symplectic& S,
                                      const PowerMap& pow, const freealg::FreeAlgCtx& FA,
                                      unsigned samples, std::uint64_t seed,
                                      const std::function<std::string(const TruncPoly&)>&
                                          show = {}) {
  if (FA.p() != A.p()) throw BadParams("field mismatch between contexts");
  const Fp& F = A.field();
  freealg::UniversalL L = FA.compute_L();
  freealg::UniversalP P = FA.compute_P();
  PoissonTarget tgt{A, S};
  VerifyReport rep;

  auto describe = [&](const char* law, const TruncPoly& a, const TruncPoly& b) {
    std::string s = law;
    if (show) s += ": a = " + show(a) + ", b = " + show(b);
    return s;
  };

  auto check_pair = [&](const TruncPoly& a, const TruncPoly& b) {
    // restr.lie.1: {a^[p], b} = (ad a)^p(b)
    TruncPoly lhs = bracket(A, S, pow(a), b);
    TruncPoly rhs = b;
    for (unsigned k = 0; k < F.p(); ++k) rhs = bracket(A, S, a, rhs);
    rep.record(lhs == rhs, describe("restr.lie.1", a, b));

    // restr.lie.2: (a+b)^[p] = a^[p] + b^[p] + L(a,b)
    std::vector<TruncPoly> images{a, b};
    TruncPoly lval = freealg::eval_lie_combo(L.lie_combo, images, tgt);
    TruncPoly lhs2 = pow(A.add(a, b));
    TruncPoly rhs2 = A.add(A.add(pow(a), pow(b)), lval);
    rep.record(lhs2 == rhs2, describe("restr.lie.2", a, b));

    // restr.poi: (ab)^[p] = a^p b^[p] + a^[p] b^p + P(a,b)
    TruncPoly pval = freealg::eval_pbw(FA, P.expr, images, tgt);
    TruncPoly lhs3 = pow(A.mul(a, b));
    TruncPoly rhs3 = A.add(A.scale(A.frobenius(a), pow(b)), A.scale(A.frobenius(b), pow(a)));
    rhs3 = A.add(rhs3, pval);
    rep.record(lhs3 == rhs3, describe("restr.poi", a, b));
  };

  for (unsigned i = 0; i < A.dim(); ++i)
    for (unsigned j = 0; j < A.dim(); ++j) check_pair(A.monomial(i), A.monomial(j));
  SplitMix64 g(seed);
  for (unsigned t = 0; t < samples; ++t) check_pair(A.random_poly(g), A.random_poly(g));
  return rep;
}

// kappa(a) = (xi - lambda id)(a^[p]) - (ad a)^{p-1}(xi(a)); central-valued
// Frobenius-derivation recovered from a conformal derivation of weight lambda.
inline FrobDeriv kappa_of(const AlgebraCtx& A, const Symplectic& S, const PowerMap& pow,
                          const Derivation& xi, Scalar lambda, unsigned samples = 32,
                          std::uint64_t seed = 1) {
  const Fp& F = A.field();
  auto kappa_at = [&](const TruncPoly& a) {
    TruncPoly v = A.apply(xi, pow(a));
    v = A.sub(v, A.scale(lambda, pow(a)));
    TruncPoly w = A.apply(xi, a);
    for (unsigned k = 0; k + 1 < F.p(); ++k) w = bracket(A, S, a, w);
    return A.sub(v, w);
  };
  std::vector<Scalar> coord_values(A.vars());
  for (unsigned i = 0; i < A.vars(); ++i) {
    TruncPoly v = kappa_at(A.coordinate(i));
    TruncPoly rest = v;
    rest.c[0] = 0;
    if (!rest.is_zero()) throw NotCentral("kappa escapes the constants on a coordinate");
    coord_values[i] = v.c[0];
  }
  FrobDeriv out{coord_values};
  // every basis monomial must reproduce the coordinate-determined extension
  for (unsigned idx = 0; idx < A.dim(); ++idx) {
    TruncPoly v = kappa_at(A.monomial(idx));
    TruncPoly rest = v;
    rest.c[0] = 0;
    if (!rest.is_zero()) throw NotCentral("kappa escapes the constants on a monomial");
    if (v.c[0] != trunccalc::frob_deriv_apply(A, out, A.monomial(idx)))
      throw NotFrobenius("kappa violates the Frobenius-derivation extension law");
  }
  SplitMix64 g(seed);
  for (unsigned t = 0; t < samples; ++t) {
    TruncPoly a = A.random_poly(g), b = A.random_poly(g);
    Scalar ka = kappa_at(a).c[0], kb = kappa_at(b).c[0];
    TruncPoly vsum = kappa_at(A.add(a, b));
    if (vsum.c[0] != F.add(ka, kb)) throw NotFrobenius("kappa fails additivity");
    TruncPoly vprod = kappa_at(A.mul(a, b));
    Scalar expected = F.add(F.mul(A.frobenius(a), kb), F.mul(A.frobenius(b), ka));
    if (vprod.c[0] != expected) throw NotFrobenius("kappa fails the Leibniz-p rule");
  }
  return out;
}

// Flag 1: xi is Hamiltonian. Flag 2: xi(a^[p]) = (ad a)^{p-1}(xi(a)) for all
// basis monomials and seeded samples. The flags must agree.
inline std::pair<bool, bool> ravno_check(const AlgebraCtx& A, const Symplectic& S,
                                         const PowerMap& pow, const Derivation& xi,
                                         unsigned samples = 32, std::uint64_t seed = 1) {
  DiffForm beta = A.contract(S.form, xi);
  if (!A.is_closed(beta)) throw BadParams("ravno_check needs a Poisson derivation");
  bool flag1 = A.is_exact(beta).has_value();
  bool flag2 = true;
  auto check = [&](const TruncPoly& a) {
    TruncPoly lhs = A.apply(xi, pow(a));
    TruncPoly rhs = A.apply(xi, a);
    for (unsigned k = 0; k + 1 < A.p(); ++k) rhs = bracket(A, S, a, rhs);
    if (!(lhs == rhs)) flag2 = false;
  };
  for (unsigned idx = 0; idx < A.dim() && flag2; ++idx) check(A.monomial(idx));
  SplitMix64 g(seed);
  for (unsigned t = 0; t < samples && flag2; ++t) check(A.random_poly(g));
  return {flag1, flag2};
}

// Difference of two restricted structures over the same symplectic form:
// a central-valued Frobenius-derivation.
inline FrobDeriv difference_of(const AlgebraCtx& A, const RestrictedStructure& R1,
                               const RestrictedStructure& R2, unsigned samples = 32,
                               std::uint64_t seed = 1) {
  const Fp& F = A.field();
  auto delta = [&](const TruncPoly& a) { return A.sub(R1.pow(a), R2.pow(a)); };
  std::vector<Scalar> coord_values(A.vars());
  for (unsigned i = 0; i < A.vars(); ++i) {
    TruncPoly v = delta(A.coordinate(i));
    TruncPoly rest = v;
    rest.c[0] = 0;
    if (!rest.is_zero()) throw NotCentral("difference escapes the constants");
    coord_values[i] = v.c[0];
  }
  FrobDeriv out{coord_values};
  for (unsigned idx = 0; idx < A.dim(); ++idx) {
    TruncPoly v = delta(A.monomial(idx));
    TruncPoly rest = v;
    rest.c[0] = 0;
    if (!rest.is_zero()) throw NotCentral("difference escapes the constants");
    if (v.c[0] != trunccalc::frob_deriv_apply(A, out, A.monomial(idx)))
      throw NotFrobenius("difference violates the Frobenius-derivation law");
  }
  SplitMix64 g(seed);
  for (unsigned t = 0; t < samples; ++t) {
    TruncPoly a = A.random_poly(g), b = A.random_poly(g);
    Scalar da = delta(a).c[0], db = delta(b).c[0];
    if (delta(A.add(a, b)).c[0] != F.add(da, db)) throw NotFrobenius("difference fails additivity");
    Scalar expected = F.add(F.mul(A.frobenius(a), db), F.mul(A.frobenius(b), da));
    if (delta(A.mul(a, b)).c[0] != expected) throw NotFrobenius("difference fails Leibniz-p");
  }
  return out;
}

// ---- substitutions and Darboux normalization -----------------------------------

inline Substitution make_substitution(const AlgebraCtx& A, std::vector<TruncPoly> images) {
  if (images.size() != A.vars()) throw BadParams("substitution needs one image per variable");
  FpMatrix jac(A.vars(), A.vars());
  for (unsigned i = 0; i < A.vars(); ++i) {
    if (images[i].c[0] != 0) throw BadParams("substitution images must have zero constant term");
    for (unsigned j = 0; j < A.vars(); ++j)
      jac.at(i, j) = A.coordinate_coefficient(images[i], j);
  }
  if (rank(A.field(), jac) != A.vars())
    throw BadParams("substitution Jacobian is singular at the origin");
  return Substitution{std::move(images)};
}

inline Substitution identity_substitution(const AlgebraCtx& A) {
  std::vector<TruncPoly> images;
  for (unsigned i = 0; i < A.vars(); ++i) images.push_back(A.coordinate(i));
  return Substitution{std::move(images)};
}

// Ring-homomorphic substitution.
inline TruncPoly pullback(const AlgebraCtx& A, const Substitution& phi, const TruncPoly& f) {
  // precompute powers of the images
  std::vector<std::vector<TruncPoly>> pows(A.vars());
  for (unsigned v = 0; v < A.vars(); ++v) {
    pows[v].resize(A.p());
    pows[v][0] = A.one();
    for (unsigned e = 1; e < A.p(); ++e) pows[v][e] = A.mul(pows[v][e - 1], phi.images[v]);
  }
  TruncPoly r = A.zero();
  for (unsigned idx = 0; idx < A.dim(); ++idx) {
    if (!f.c[idx]) continue;
    TruncPoly term = A.constant(f.c[idx]);
    for (unsigned v = 0; v < A.vars(); ++v) {
      unsigned e = A.exponent(idx, v);
      if (e) term = A.mul(term, pows[v][e]);
    }
    r = A.add(r, term);
  }
  return r;
}

// Induced action on forms through the chain rule.
inline DiffForm pullback(const AlgebraCtx& A, const Substitution& phi, const DiffForm& w) {
  std::vector<DiffForm> dphi;
  for (unsigned v = 0; v < A.vars(); ++v) dphi.push_back(A.de_rham(phi.images[v]));
  DiffForm r = A.zero_form(w.degree);
  for (unsigned s = 0; s < A.n_subsets(w.degree); ++s) {
    if (w.comp[s].is_zero()) continue;
    DiffForm term = A.zero_form(0);
    term.comp[0] = pullback(A, phi, w.comp[s]);
    for (unsigned i : A.subset(w.degree, s)) term = A.wedge(term, dphi[i]);
    r = A.add(r, term);
  }
  return r;
}

// phi then psi as maps of Spec: (psi o phi on functions).
inline Substitution compose(const AlgebraCtx& A, const Substitution& outer,
                            const Substitution& inner) {
  std::vector<TruncPoly> images;
  for (unsigned i = 0; i < A.vars(); ++i) images.push_back(pullback(A, outer, inner.images[i]));
  return Substitution{std::move(images)};
}

// The constant form sum dx_{2i} ^ dx_{2i+1}.
inline DiffForm standard_symplectic_form(const AlgebraCtx& A) {
  if (A.vars() % 2) throw BadParams("standard form needs an even variable count");
  DiffForm w = A.zero_form(2);
  for (unsigned i = 0; 2 * i + 1 < A.vars(); ++i)
    w.comp[A.subset_index(2, {2 * i, 2 * i + 1})] = A.one();
  return w;
}

namespace detail {

// Positions of coefficient entries of a flattened 2-form with a given total
// monomial degree.
inline std::vector<std::size_t> form2_positions_of_degree(const AlgebraCtx& A, unsigned deg) {
  std::vector<std::size_t> out;
  for (unsigned s = 0; s < A.n_subsets(2); ++s)
    for (unsigned idx = 0; idx < A.dim(); ++idx)
      if (A.total_degree(idx) == deg) out.push_back(static_cast<std::size_t>(s) * A.dim() + idx);
  return out;
}

inline unsigned lowest_degree(const AlgebraCtx& A, const DiffForm& w) {
  unsigned best = ~0u;
  for (unsigned s = 0; s < A.n_subsets(w.degree); ++s)
    for (unsigned idx = 0; idx < A.dim(); ++idx)
      if (w.comp[s].c[idx]) best = std::min(best, A.total_degree(idx));
  return best;
}

// Linear symplectic change of coordinates L with (L^T J L) = G0: returns the
// substitution matrix (inverse of the symplectic basis matrix for G0).
inline Substitution linear_symplectic_step(const AlgebraCtx& A, const FpMatrix& g0) {
  const Fp& F = A.field();
  unsigned m = A.vars();
  auto B = [&](const std::vector<Scalar>& u, const std::vector<Scalar>& v) {
    std::uint64_t acc = 0;
    for (unsigned i = 0; i < m; ++i)
      for (unsigned j = 0; j < m; ++j)
        acc += static_cast<std::uint64_t>(u[i]) * g0.at(i, j) % F.p() * v[j];
    return static_cast<Scalar>(acc % F.p());
  };
  std::vector<std::vector<Scalar>> pool;
  for (unsigned i = 0; i < m; ++i) {
    std::vector<Scalar> e(m, 0);
    e[i] = 1;
    pool.push_back(e);
  }
  std::vector<std::vector<Scalar>> basis;  // u1 v1 u2 v2 ...
  while (!pool.empty()) {
    std::vector<Scalar> u = pool.front();
    pool.erase(pool.begin());
    std::size_t vi = 0;
    while (vi < pool.size() && B(u, pool[vi]) == 0) ++vi;
    if (vi == pool.size()) throw Degenerate("symplectic reduction found a radical vector");
    std::vector<Scalar> v = pool[vi];
    pool.erase(pool.begin() + vi);
    Scalar nrm = F.inv(B(u, v));
    for (auto& x : v) x = F.mul(x, nrm);
    for (auto& w : pool) {
      Scalar a = B(w, v), b = B(w, u);
      for (unsigned i = 0; i < m; ++i) {
        w[i] = F.sub(w[i], F.mul(a, u[i]));
        w[i] = F.add(w[i], F.mul(b, v[i]));
      }
    }
    basis.push_back(u);
    basis.push_back(v);
  }
  // S has the symplectic basis as columns; the substitution matrix is S^{-1}.
  FpMatrix Smat(m, m);
  for (unsigned j = 0; j < m; ++j)
    for (unsigned i = 0; i < m; ++i) Smat.at(i, j) = basis[j][i];
  FpMatrix aug(m, 2 * m);
  for (unsigned i = 0; i < m; ++i) {
    for (unsigned j = 0; j < m; ++j) aug.at(i, j) = Smat.at(i, j);
    aug.at(i, m + i) = 1;
  }
  rref(F, aug);
  std::vector<TruncPoly> images;
  for (unsigned i = 0; i < m; ++i) {
    TruncPoly im = A.zero();
    for (unsigned j = 0; j < m; ++j)
      im = A.add(im, A.scale(aug.at(i, m + j), A.coordinate(j)));
    images.push_back(im);
  }
  return make_substitution(A, std::move(images));
}

}  // namespace detail

// Substitution phi with pullback(phi, standard form) equal to S.form exactly.
// Linear symplectic change at order zero, then degree-by-degree corrections;
// a stuck homogeneous step widens to all remaining degrees; a stuck widened
// step restarts from a seeded random perturbation.
inline Substitution darboux_normalize(const AlgebraCtx& A, const Symplectic& S,
                                      std::uint64_t seed = 0xDA4B0) {
  if (!A.cartier(S.form).is_zero())
    throw BadParams("darboux_normalize requires a vanishing degree-2 Cartier class");
  const Fp& F = A.field();
  unsigned m = A.vars();
  DiffForm std_form = standard_symplectic_form(A);
  unsigned max_deg = m * (F.p() - 1);

  FpMatrix g0(m, m);
  for (unsigned i = 0; i < m; ++i)
    for (unsigned j = 0; j < m; ++j) g0.at(i, j) = S.gram[i][j].c[0];
  Substitution base = detail::linear_symplectic_step(A, g0);

  SplitMix64 rng(seed);
  const unsigned max_restarts = 20, max_iters = 60;
  for (unsigned restart = 0; restart <= max_restarts; ++restart) {
    Substitution phi = base;
    if (restart > 0) {
      // seeded random perturbation with identity linear part
      std::vector<TruncPoly> images;
      for (unsigned i = 0; i < m; ++i) {
        TruncPoly q = A.random_poly(rng);
        q.c[0] = 0;
        for (unsigned j = 0; j < m; ++j) {
          unsigned lin = A.coordinate_coefficient(q, j);
          if (lin) q = A.sub(q, A.scale(lin, A.coordinate(j)));
        }
        images.push_back(A.add(A.coordinate(i), q));
      }
      phi = compose(A, phi, Substitution{std::move(images)});
    }

    bool stuck = false;
    for (unsigned iter = 0; iter < max_iters && !stuck; ++iter) {
      DiffForm target = pullback(A, phi, std_form);
      DiffForm R = A.sub(S.form, target);
      if (R.is_zero()) return phi;
      unsigned r = detail::lowest_degree(A, R);

      // candidate corrections: homogeneous of degree r+1, then widened
      std::vector<std::pair<unsigned, unsigned>> probe_basis;  // (var, monomial)
      auto collect = [&](unsigned lo, unsigned hi) {
        probe_basis.clear();
        for (unsigned v = 0; v < m; ++v)
          for (unsigned idx = 0; idx < A.dim(); ++idx) {
            unsigned d = A.total_degree(idx);
            if (d >= lo && d <= hi) probe_basis.emplace_back(v, idx);
          }
      };
      auto try_solve = [&](const std::vector<std::size_t>& positions) -> bool {
        std::vector<Scalar> rhs_full = A.flatten(R);
        std::vector<Scalar> rhs;
        for (auto pidx : positions) rhs.push_back(rhs_full[pidx]);
        FpMatrix probe(rhs.size(), probe_basis.size());
        for (std::size_t c = 0; c < probe_basis.size(); ++c) {
          auto [v, idx] = probe_basis[c];
          std::vector<TruncPoly> qim;
          for (unsigned i = 0; i < m; ++i) qim.push_back(A.coordinate(i));
          qim[v] = A.add(qim[v], A.monomial(idx));
          Substitution phiq = compose(A, phi, Substitution{std::move(qim)});
          DiffForm delta = A.sub(pullback(A, phiq, std_form), target);
          std::vector<Scalar> dflat = A.flatten(delta);
          for (std::size_t rix = 0; rix < positions.size(); ++rix)
            probe.at(rix, c) = dflat[positions[rix]];
        }
        auto sol = solve(F, probe, rhs);
        if (!sol) return false;
        std::vector<TruncPoly> qim;
        for (unsigned i = 0; i < m; ++i) qim.push_back(A.coordinate(i));
        bool nontrivial = false;
        for (std::size_t c = 0; c < probe_basis.size(); ++c) {
          if (!sol->particular[c]) continue;
          auto [v, idx] = probe_basis[c];
          qim[v] = A.add(qim[v], A.monomial(idx, sol->particular[c]));
          nontrivial = true;
        }
        if (!nontrivial) return false;
        phi = compose(A, phi, make_substitution(A, std::move(qim)));
        return true;
      };

      if (r + 1 <= max_deg) {
        collect(r + 1, r + 1);
        if (try_solve(detail::form2_positions_of_degree(A, r))) continue;
      }
      // widen: all degrees >= 2 against the full residual
      collect(2, max_deg);
      std::vector<std::size_t> all;
      for (std::size_t i = 0; i < A.flatten(R).size(); ++i) all.push_back(i);
      if (!try_solve(all)) stuck = true;
    }
  }
  throw NormalizationFailed("no substitution found within the iteration budget");
}

}  // namespace charp::poissonrestr
