#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include "charp/fp.hpp"
#include "charp/rng.hpp"

namespace charp::trunccalc {

// Element of A = F_p[x_0..x_{m-1}]/(x_i^p): dense coefficients indexed by
// multi-exponent, variable 0 fastest.
struct TruncPoly {
  std::vector<Scalar> c;
  bool operator==(const TruncPoly&) const = default;
  bool is_zero() const {
    for (Scalar v : c)
      if (v) return false;
    return true;
  }
};

// m-tuple of coefficients of d/dx_i.
struct Derivation {
  std::vector<TruncPoly> comp;
  bool operator==(const Derivation&) const = default;
};

// Relative k-form: one TruncPoly per k-subset of variables, subsets in
// lexicographic order. Antisymmetry is implicit in the subset indexing.
struct DiffForm {
  unsigned degree = 0;
  std::vector<TruncPoly> comp;
  bool operator==(const DiffForm&) const = default;
  bool is_zero() const {
    for (auto& f : comp)
      if (!f.is_zero()) return false;
    return true;
  }
};

// Element of the twisted form module: a scalar per k-subset (the coefficient
// of the canonical class representative).
struct ConstForm {
  unsigned degree = 0;
  std::vector<Scalar> c;
  bool operator==(const ConstForm&) const = default;
  bool is_zero() const {
    for (Scalar v : c)
      if (v) return false;
    return true;
  }
};

// Frobenius-derivation kappa: A -> k, determined by its values on the
// coordinates since kappa kills constants and squares of the maximal ideal.
struct FrobDeriv {
  std::vector<Scalar> values;
  bool operator==(const FrobDeriv&) const = default;
};

class AlgebraCtx {
public:
  AlgebraCtx(Prime p, unsigned m) : prime_(p), F_(p), m_(m) {
    if (m < 1 || m > 4) throw BadParams("variable count must be 1..4");
    dim_ = 1;
    for (unsigned i = 0; i < m; ++i) dim_ *= p.value();
    strides_.resize(m);
    unsigned s = 1;
    for (unsigned i = 0; i < m; ++i) {
      strides_[i] = s;
      s *= p.value();
    }
    exps_.resize(dim_);
    total_deg_.resize(dim_);
    for (unsigned idx = 0; idx < dim_; ++idx) {
      unsigned rest = idx, deg = 0;
      for (unsigned i = 0; i < m; ++i) {
        exps_[idx][i] = static_cast<std::uint8_t>(rest % p.value());
        deg += exps_[idx][i];
        rest /= p.value();
      }
      total_deg_[idx] = deg;
    }
    subsets_.resize(m + 1);
    for (unsigned k = 0; k <= m; ++k) enumerate_subsets(k, subsets_[k]);
  }

  const Fp& field() const { return F_; }
  unsigned p() const { return prime_.value(); }
  unsigned vars() const { return m_; }
  unsigned dim() const { return dim_; }
  unsigned total_degree(unsigned idx) const { return total_deg_[idx]; }
  unsigned exponent(unsigned idx, unsigned var) const { return exps_[idx][var]; }
  unsigned n_subsets(unsigned k) const {
    return k > m_ ? 0u : static_cast<unsigned>(subsets_[k].size());
  }
  const std::vector<unsigned>& subset(unsigned k, unsigned s) const { return subsets_[k][s]; }

  unsigned subset_index(unsigned k, const std::vector<unsigned>& members) const {
    for (unsigned s = 0; s < subsets_[k].size(); ++s)
      if (subsets_[k][s] == members) return s;
    throw Error("subset not found");
  }

  // ---- scalars and polynomials ------------------------------------------------

  TruncPoly zero() const { return {std::vector<Scalar>(dim_, 0)}; }
  TruncPoly one() const {
    TruncPoly t = zero();
    t.c[0] = 1;
    return t;
  }
  TruncPoly constant(Scalar v) const {
    TruncPoly t = zero();
    t.c[0] = v % F_.p();
    return t;
  }
  TruncPoly coordinate(unsigned i) const {
    TruncPoly t = zero();
    t.c[strides_[i]] = 1;
    return t;
  }
  TruncPoly monomial(unsigned idx, Scalar v = 1) const {
    TruncPoly t = zero();
    t.c[idx] = v % F_.p();
    return t;
  }

  TruncPoly add(const TruncPoly& a, const TruncPoly& b) const {
    TruncPoly r = a;
    for (unsigned i = 0; i < dim_; ++i) r.c[i] = F_.add(r.c[i], b.c[i]);
    return r;
  }
  TruncPoly sub(const TruncPoly& a, const TruncPoly& b) const {
    TruncPoly r = a;
    for (unsigned i = 0; i < dim_; ++i) r.c[i] = F_.sub(r.c[i], b.c[i]);
    return r;
  }
  TruncPoly scale(Scalar s, const TruncPoly& a) const {
    TruncPoly r = a;
    s %= F_.p();
    for (unsigned i = 0; i < dim_; ++i) r.c[i] = F_.mul(s, r.c[i]);
    return r;
  }

  // Product in A: monomials acquiring any exponent >= p vanish.
  TruncPoly mul(const TruncPoly& a, const TruncPoly& b) const {
    TruncPoly r = zero();
    unsigned p = F_.p();
    for (unsigned i = 0; i < dim_; ++i) {
      if (!a.c[i]) continue;
      for (unsigned j = 0; j < dim_; ++j) {
        if (!b.c[j]) continue;
        bool dies = false;
        for (unsigned v = 0; v < m_; ++v)
          if (exps_[i][v] + exps_[j][v] >= p) {
            dies = true;
            break;
          }
        if (dies) continue;
        unsigned k = i + j;  // exponent-wise sum; no carries when all sums < p
        r.c[k] = F_.add(r.c[k], F_.mul(a.c[i], b.c[j]));
      }
    }
    return r;
  }

  TruncPoly pow(const TruncPoly& a, unsigned e) const {
    TruncPoly r = one();
    for (unsigned i = 0; i < e; ++i) r = mul(r, a);
    return r;
  }

  // a(0)^p = a(0): the image of a under Frobenius, an element of A^[p] = k.
  Scalar frobenius(const TruncPoly& a) const { return a.c[0]; }

  // Coefficient of the degree-one monomial x_i in a.
  Scalar coordinate_coefficient(const TruncPoly& a, unsigned i) const {
    return a.c[strides_[i]];
  }

  TruncPoly derivative(const TruncPoly& a, unsigned var) const {
    TruncPoly r = zero();
    for (unsigned i = 0; i < dim_; ++i) {
      unsigned e = exps_[i][var];
      if (!e || !a.c[i]) continue;
      r.c[i - strides_[var]] = F_.add(r.c[i - strides_[var]], F_.mul(e % F_.p(), a.c[i]));
    }
    return r;
  }

  // ---- derivations ---------------------------------------------------------------

  Derivation zero_derivation() const { return {std::vector<TruncPoly>(m_, zero())}; }
  Derivation coordinate_derivation(unsigned i) const {
    Derivation d = zero_derivation();
    d.comp[i] = one();
    return d;
  }

  TruncPoly apply(const Derivation& xi, const TruncPoly& f) const {
    TruncPoly r = zero();
    for (unsigned i = 0; i < m_; ++i) r = add(r, mul(xi.comp[i], derivative(f, i)));
    return r;
  }

  // xi as a dim x dim matrix acting on A; annihilates 1 by construction.
  FpMatrix deriv_matrix(const Derivation& xi) const {
    FpMatrix M(dim_, dim_);
    for (unsigned j = 0; j < dim_; ++j) {
      TruncPoly col = apply(xi, monomial(j));
      for (unsigned i = 0; i < dim_; ++i) M.at(i, j) = col.c[i];
    }
    return M;
  }

  Derivation derivation_from_components(std::vector<TruncPoly> comp) const {
    return {std::move(comp)};
  }

  // Composes xi with itself p times; the result is again a derivation (checked:
  // the p-th power operator must coincide with the derivation rebuilt from its
  // values on coordinates, which is the Leibniz rule in operator form).
  Derivation deriv_p_power(const Derivation& xi) const {
    FpMatrix M = deriv_matrix(xi);
    FpMatrix Mp = mat_pow(F_, M, F_.p());
    Derivation out = zero_derivation();
    for (unsigned i = 0; i < m_; ++i) {
      std::vector<Scalar> col(dim_, 0);
      col = mat_apply(F_, Mp, coordinate(i).c);
      out.comp[i].c = col;
    }
    if (!(deriv_matrix(out).a == Mp.a))
      throw NotDerivation("p-th power operator violates the Leibniz rule");
    return out;
  }

  // Fast path used by verification loops: components of xi^p without the
  // operator-identity recheck (deriv_p_power certifies it; tests compare both).
  Derivation deriv_p_power_components(const FpMatrix& M) const {
    Derivation out = zero_derivation();
    for (unsigned i = 0; i < m_; ++i) {
      std::vector<Scalar> v = coordinate(i).c;
      for (unsigned k = 0; k < F_.p(); ++k) v = mat_apply(F_, M, v);
      out.comp[i].c = v;
    }
    return out;
  }

  // ---- differential forms -----------------------------------------------------------

  DiffForm zero_form(unsigned k) const {
    DiffForm f;
    f.degree = k;
    f.comp.assign(n_subsets(k), zero());
    return f;
  }

  DiffForm add(const DiffForm& a, const DiffForm& b) const {
    check_same_degree(a, b);
    DiffForm r = a;
    for (unsigned s = 0; s < r.comp.size(); ++s) r.comp[s] = add(r.comp[s], b.comp[s]);
    return r;
  }
  DiffForm sub(const DiffForm& a, const DiffForm& b) const {
    check_same_degree(a, b);
    DiffForm r = a;
    for (unsigned s = 0; s < r.comp.size(); ++s) r.comp[s] = sub(r.comp[s], b.comp[s]);
    return r;
  }
  DiffForm scale(Scalar v, const DiffForm& a) const {
    DiffForm r = a;
    for (auto& f : r.comp) f = scale(v, f);
    return r;
  }

  // d f = sum_i (df/dx_i) dx_i for functions; exterior derivative in general.
  DiffForm de_rham(const TruncPoly& f) const {
    DiffForm r = zero_form(1);
    for (unsigned i = 0; i < m_; ++i) r.comp[i] = derivative(f, i);
    return r;
  }

  DiffForm de_rham(const DiffForm& w) const {
    DiffForm r = zero_form(w.degree + 1);
    if (w.degree >= m_) return r;  // no (m+1)-subsets: the zero form
    for (unsigned s = 0; s < n_subsets(w.degree); ++s) {
      const std::vector<unsigned>& S = subset(w.degree, s);
      for (unsigned i = 0; i < m_; ++i) {
        if (std::find(S.begin(), S.end(), i) != S.end()) continue;
        std::vector<unsigned> T = S;
        T.insert(std::upper_bound(T.begin(), T.end(), i), i);
        unsigned pos = static_cast<unsigned>(std::lower_bound(T.begin(), T.end(), i) - T.begin());
        unsigned t = subset_index(w.degree + 1, T);
        TruncPoly term = derivative(w.comp[s], i);
        if (pos % 2) term = scale(F_.p() - 1, term);
        r.comp[t] = add(r.comp[t], term);
      }
    }
    return r;
  }

  // Contraction in the first slot: d/dx_i . (dx_i ^ dx_j) = dx_j.
  DiffForm contract(const DiffForm& w, const Derivation& xi) const {
    if (w.degree < 1) throw BadParams("contract needs degree >= 1");
    DiffForm r = zero_form(w.degree - 1);
    for (unsigned s = 0; s < n_subsets(w.degree); ++s) {
      const std::vector<unsigned>& S = subset(w.degree, s);
      for (unsigned pos = 0; pos < S.size(); ++pos) {
        std::vector<unsigned> T = S;
        T.erase(T.begin() + pos);
        unsigned t = subset_index(w.degree - 1, T);
        TruncPoly term = mul(xi.comp[S[pos]], w.comp[s]);
        if (pos % 2) term = scale(F_.p() - 1, term);
        r.comp[t] = add(r.comp[t], term);
      }
    }
    return r;
  }

  DiffForm wedge(const DiffForm& a, const DiffForm& b) const {
    DiffForm r = zero_form(a.degree + b.degree);
    if (a.degree + b.degree > m_) return r;
    for (unsigned s = 0; s < n_subsets(a.degree); ++s)
      for (unsigned t = 0; t < n_subsets(b.degree); ++t) {
        const auto& S = subset(a.degree, s);
        const auto& T = subset(b.degree, t);
        // merge; sign counts transpositions, zero on repeated index
        std::vector<unsigned> U;
        U.reserve(S.size() + T.size());
        U.insert(U.end(), S.begin(), S.end());
        U.insert(U.end(), T.begin(), T.end());
        unsigned inversions = 0;
        bool repeated = false;
        for (std::size_t i = 0; i < U.size() && !repeated; ++i)
          for (std::size_t j = i + 1; j < U.size(); ++j) {
            if (U[i] == U[j]) {
              repeated = true;
              break;
            }
            if (U[i] > U[j]) ++inversions;
          }
        if (repeated) continue;
        std::sort(U.begin(), U.end());
        unsigned u = subset_index(a.degree + b.degree, U);
        TruncPoly term = mul(a.comp[s], b.comp[t]);
        if (inversions % 2) term = scale(F_.p() - 1, term);
        r.comp[u] = add(r.comp[u], term);
      }
    return r;
  }

  // Cartan homotopy formula; on functions this is just xi itself.
  TruncPoly lie_der(const Derivation& xi, const TruncPoly& f) const { return apply(xi, f); }
  DiffForm lie_der(const Derivation& xi, const DiffForm& w) const {
    DiffForm a = de_rham(contract(w, xi));
    DiffForm b = contract(de_rham(w), xi);
    return add(a, b);
  }

  // ---- flattening and linear solves ----------------------------------------------------

  std::vector<Scalar> flatten(const DiffForm& w) const {
    std::vector<Scalar> v;
    v.reserve(w.comp.size() * dim_);
    for (auto& f : w.comp) v.insert(v.end(), f.c.begin(), f.c.end());
    return v;
  }
  DiffForm unflatten(const std::vector<Scalar>& v, unsigned k) const {
    DiffForm w = zero_form(k);
    for (unsigned s = 0; s < w.comp.size(); ++s)
      std::copy(v.begin() + s * dim_, v.begin() + (s + 1) * dim_, w.comp[s].c.begin());
    return w;
  }

  // Matrix of d: Omega^k -> Omega^{k+1}.
  const FpMatrix& d_matrix(unsigned k) const {
    auto it = d_cache_.find(k);
    if (it != d_cache_.end()) return it->second;
    FpMatrix M(n_subsets(k + 1) * dim_, n_subsets(k) * dim_);
    for (unsigned s = 0; s < n_subsets(k); ++s)
      for (unsigned idx = 0; idx < dim_; ++idx) {
        DiffForm e = zero_form(k);
        e.comp[s] = monomial(idx);
        std::vector<Scalar> col = flatten(de_rham(e));
        for (std::size_t r = 0; r < col.size(); ++r)
          if (col[r]) M.at(r, s * dim_ + idx) = col[r];
      }
    return d_cache_.emplace(k, std::move(M)).first->second;
  }

  bool is_closed(const DiffForm& w) const { return de_rham(w).is_zero(); }

  // Potential eta with d(eta) = w, or nullopt when no potential exists.
  std::optional<DiffForm> is_exact(const DiffForm& w) const {
    if (!is_closed(w)) throw NotClosed("is_exact expects a closed form");
    if (w.degree == 0) {
      // exact zero-forms are 0 (d has no inverse image below degree 0)
      if (w.is_zero()) return zero_form(0);
      return std::nullopt;
    }
    const CachedSolver& solver = d_solver(w.degree - 1);
    auto x = solver.solve(flatten(w));
    if (!x) return std::nullopt;
    return unflatten(*x, w.degree - 1);
  }

  // Canonical class representative rho_S = (prod_{i in S} x_i^{p-1}) dx_S.
  DiffForm class_representative(unsigned k, unsigned s) const {
    DiffForm r = zero_form(k);
    TruncPoly f = one();
    for (unsigned i : subset(k, s)) f = mul(f, pow(coordinate(i), F_.p() - 1));
    r.comp[s] = f;
    return r;
  }

  DiffForm const_embed(const ConstForm& cf) const {
    DiffForm r = zero_form(cf.degree);
    for (unsigned s = 0; s < r.comp.size(); ++s) r.comp[s] = constant(cf.c[s]);
    return r;
  }

  // Cohomology class of a closed k-form in the canonical representative basis:
  // solve w = d(eta) + sum_S lambda_S rho_S; the lambda are unique.
  ConstForm cartier(const DiffForm& w) const {
    if (!is_closed(w)) throw NotClosed("cartier expects a closed form");
    unsigned k = w.degree;
    ConstForm out;
    out.degree = k;
    out.c.assign(n_subsets(k), 0);
    if (k == 0) {
      out.c[0] = w.comp[0].c[0];  // closed functions are constant
      return out;
    }
    const CachedSolver& solver = cartier_solver(k);
    auto x = solver.solve(flatten(w));
    if (!x) throw Error("cartier: decomposition solve failed on a closed form");
    std::size_t eta_cols = (k >= 1 ? n_subsets(k - 1) * dim_ : 0);
    for (unsigned s = 0; s < n_subsets(k); ++s) out.c[s] = (*x)[eta_cols + s];
    return out;
  }

  // Contract a twisted constant form against the Frobenius image of xi
  // (coefficients pass through frobenius, i.e. evaluation at the origin).
  ConstForm const_contract(const ConstForm& cf, const Derivation& xi) const {
    if (cf.degree < 1) throw BadParams("const_contract needs degree >= 1");
    ConstForm r;
    r.degree = cf.degree - 1;
    r.c.assign(n_subsets(cf.degree - 1), 0);
    for (unsigned s = 0; s < n_subsets(cf.degree); ++s) {
      const auto& S = subset(cf.degree, s);
      for (unsigned pos = 0; pos < S.size(); ++pos) {
        std::vector<unsigned> T = S;
        T.erase(T.begin() + pos);
        unsigned t = subset_index(cf.degree - 1, T);
        Scalar term = F_.mul(cf.c[s], frobenius(xi.comp[S[pos]]));
        if (pos % 2) term = F_.neg(term);
        r.c[t] = F_.add(r.c[t], term);
      }
    }
    return r;
  }

  // i_xi^{[p]}: alpha |-> xi^{[p]} . alpha - (ad xi)^{p-1}(xi . alpha).
  DiffForm i_p(const Derivation& xi, const DiffForm& alpha) const {
    if (alpha.degree < 1) throw BadParams("i_p needs degree >= 1");
    FpMatrix M = deriv_matrix(xi);
    Derivation xip = deriv_p_power_components(M);
    DiffForm first = contract(alpha, xip);
    DiffForm second = contract(alpha, xi);
    for (unsigned k = 0; k + 1 < F_.p(); ++k) second = lie_der_form_any(xi, second);
    return sub(first, second);
  }

  // Cartier commutes with i_p-contraction: C^{k-1}(i_p(xi, alpha)) equals
  // C^k(alpha) contracted against the Frobenius image of xi.
  bool verify_car_p(const Derivation& xi, const DiffForm& alpha) const {
    if (!is_closed(alpha)) throw NotClosed("verify_car_p expects a closed form");
    DiffForm beta = i_p(xi, alpha);
    if (!is_closed(beta)) return false;  // guaranteed by theory; failure is a bug
    ConstForm lhs = cartier(beta);
    ConstForm rhs = const_contract(cartier(alpha), xi);
    return lhs == rhs;
  }

  // F_p-basis of closed 1-forms with C^1(alpha) = lambda * alpha, the Cartier
  // image compared against alpha itself through the canonical constant-form
  // embedding. lambda = 0 recovers the exact 1-forms.
  std::vector<DiffForm> hI_sections(Scalar lambda) const {
    lambda %= F_.p();
    // parameterize closed 1-forms as alpha = d(eta) + sum mu_s rho_s
    std::size_t eta_cols = dim_, mu_cols = n_subsets(1);
    std::size_t alpha_len = n_subsets(1) * dim_;
    const FpMatrix& D = d_matrix(0);
    // rows: lambda * alpha - embed(mu) = 0
    FpMatrix M(alpha_len, eta_cols + mu_cols);
    for (std::size_t r = 0; r < alpha_len; ++r)
      for (std::size_t c = 0; c < eta_cols; ++c)
        if (D.at(r, c)) M.at(r, c) = F_.mul(lambda, D.at(r, c));
    for (unsigned s = 0; s < mu_cols; ++s) {
      std::vector<Scalar> rho = flatten(class_representative(1, s));
      for (std::size_t r = 0; r < alpha_len; ++r)
        if (rho[r]) M.at(r, eta_cols + s) = F_.mul(lambda, rho[r]);
      // -(embedding of mu_s as a constant-coefficient form)
      std::vector<Scalar> emb(alpha_len, 0);
      ConstForm cf;
      cf.degree = 1;
      cf.c.assign(mu_cols, 0);
      cf.c[s] = 1;
      emb = flatten(const_embed(cf));
      for (std::size_t r = 0; r < alpha_len; ++r)
        if (emb[r]) M.at(r, eta_cols + s) = F_.sub(M.at(r, eta_cols + s), emb[r]);
    }
    std::vector<std::vector<Scalar>> ns = nullspace(F_, M);
    EchelonSpan span(F_, alpha_len);
    for (auto& v : ns) {
      std::vector<Scalar> eta(v.begin(), v.begin() + eta_cols);
      std::vector<Scalar> alpha = mat_apply(F_, D, eta);
      for (unsigned s = 0; s < mu_cols; ++s) {
        if (!v[eta_cols + s]) continue;
        std::vector<Scalar> rho = flatten(class_representative(1, s));
        for (std::size_t r = 0; r < alpha_len; ++r)
          alpha[r] = F_.add(alpha[r], F_.mul(v[eta_cols + s], rho[r]));
      }
      span.add(std::move(alpha));
    }
    // echelonized rows give a deterministic basis
    std::vector<DiffForm> out;
    for (auto& row : span.rows()) out.push_back(unflatten(row, 1));
    return out;
  }

  // ---- randomness (seeded, for verification loops) -------------------------------------

  TruncPoly random_poly(SplitMix64& g) const {
    TruncPoly t = zero();
    for (auto& v : t.c) v = g.below(F_.p());
    return t;
  }
  Derivation random_derivation(SplitMix64& g) const {
    Derivation d = zero_derivation();
    for (auto& f : d.comp) f = random_poly(g);
    return d;
  }
  // Random closed k-form: d(random) plus a random combination of class
  // representatives; spans all closed forms by the decomposition property.
  DiffForm random_closed_form(unsigned k, SplitMix64& g) const {
    DiffForm w = zero_form(k);
    if (k >= 1) {
      DiffForm eta = zero_form(k - 1);
      for (auto& f : eta.comp) f = random_poly(g);
      w = de_rham(eta);
      for (unsigned s = 0; s < n_subsets(k); ++s) {
        Scalar lam = g.below(F_.p());
        if (lam) w = add(w, scale(lam, class_representative(k, s)));
      }
    } else {
      w.comp[0] = constant(g.below(F_.p()));
    }
    return w;
  }

private:
  void check_same_degree(const DiffForm& a, const DiffForm& b) const {
    if (a.degree != b.degree) throw BadParams("form degrees differ");
  }

  // lie_der on forms or functions, uniform signature for iteration
  DiffForm lie_der_form_any(const Derivation& xi, const DiffForm& w) const {
    if (w.degree == 0) {
      DiffForm r = zero_form(0);
      r.comp[0] = apply(xi, w.comp[0]);
      return r;
    }
    return lie_der(xi, w);
  }

  void enumerate_subsets(unsigned k, std::vector<std::vector<unsigned>>& out) const {
    std::vector<unsigned> cur;
    enumerate_subsets_rec(0, k, cur, out);
  }
  void enumerate_subsets_rec(unsigned start, unsigned k, std::vector<unsigned>& cur,
                             std::vector<std::vector<unsigned>>& out) const {
    if (k == 0) {
      out.push_back(cur);
      return;
    }
    for (unsigned i = start; i + k <= m_; ++i) {
      cur.push_back(i);
      enumerate_subsets_rec(i + 1, k - 1, cur, out);
      cur.pop_back();
    }
  }

  const CachedSolver& d_solver(unsigned k) const {
    auto it = d_solver_cache_.find(k);
    if (it != d_solver_cache_.end()) return it->second;
    return d_solver_cache_.emplace(k, CachedSolver(F_, d_matrix(k))).first->second;
  }

  // Solver for [D_{k-1} | class representatives]; certifies once per degree
  // that the decomposition w = d(eta) + sum lambda_S rho_S exists and the
  // lambda are unique on closed forms: rank [D|R] = rank D + #subsets and
  // equals dim ker d_k.
  const CachedSolver& cartier_solver(unsigned k) const {
    auto it = cartier_solver_cache_.find(k);
    if (it != cartier_solver_cache_.end()) return it->second;
    const FpMatrix& D = d_matrix(k - 1);
    unsigned nreps = n_subsets(k);
    FpMatrix M(D.rows, D.cols + nreps);
    for (std::size_t r = 0; r < D.rows; ++r)
      for (std::size_t c = 0; c < D.cols; ++c) M.at(r, c) = D.at(r, c);
    for (unsigned s = 0; s < nreps; ++s) {
      std::vector<Scalar> rho = flatten(class_representative(k, s));
      for (std::size_t r = 0; r < D.rows; ++r) M.at(r, D.cols + s) = rho[r];
    }
    CachedSolver solver(F_, M);
    unsigned rank_d = d_solver(k - 1).rank();
    unsigned dim_closed = static_cast<unsigned>(n_subsets(k) * dim_) - rank(F_, d_matrix(k));
    if (solver.rank() != rank_d + nreps || solver.rank() != dim_closed)
      throw Error("class representatives fail to span de Rham cohomology at degree " +
                  std::to_string(k));
    return cartier_solver_cache_.emplace(k, std::move(solver)).first->second;
  }

  Prime prime_;
  Fp F_;
  unsigned m_;
  unsigned dim_;
  std::vector<unsigned> strides_;
  std::vector<std::array<std::uint8_t, 4>> exps_;
  std::vector<unsigned> total_deg_;
  std::vector<std::vector<std::vector<unsigned>>> subsets_;
  mutable std::map<unsigned, FpMatrix> d_cache_;
  mutable std::map<unsigned, CachedSolver> d_solver_cache_;
  mutable std::map<unsigned, CachedSolver> cartier_solver_cache_;
};

// Extension of a Frobenius-derivation to all of A: additive, kills constants
// and every monomial of degree >= 2, scales by c^p = c on coordinates.
inline Scalar frob_deriv_apply(const AlgebraCtx& ctx, const FrobDeriv& kappa,
                               const TruncPoly& a) {
  Scalar acc = 0;
  for (unsigned i = 0; i < ctx.vars(); ++i) {
    Scalar ci = ctx.coordinate_coefficient(a, i);
    acc = ctx.field().add(acc, ctx.field().mul(ci, kappa.values[i]));
  }
  return acc;
}

}  // namespace charp::trunccalc
