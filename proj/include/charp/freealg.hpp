#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "charp/fp.hpp"

namespace charp::freealg {

// A word in the tensor algebra: generator indices packed as bytes.
using Word = std::string;

// Graded lexicographic order keeps term maps deterministic.
struct DegLexLess {
  bool operator()(const Word& a, const Word& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

// Finitely supported sum of words; no zero coefficients stored.
struct TensorElt {
  std::map<Word, Scalar, DegLexLess> terms;

  bool is_zero() const { return terms.empty(); }
  unsigned top_degree() const {
    return terms.empty() ? 0 : static_cast<unsigned>(terms.rbegin()->first.size());
  }
  bool operator==(const TensorElt& o) const { return terms == o.terms; }
};

// Element of the free quantized algebra: a tensor plus its filtration level.
// The h-action raises the level and fixes the tensor.
struct QuantElt {
  TensorElt tensor;
  unsigned level = 0;
};

struct LieBasis {
  unsigned degree = 0;
  // Echelonized rows, dense over the g^degree words of this degree.
  std::vector<std::vector<Scalar>> rows;
  // Each row expressed over left-normed bracket sequences (dense, g^degree).
  std::vector<std::vector<Scalar>> combos;
  unsigned dim() const { return static_cast<unsigned>(rows.size()); }
};

// One monomial of a PBW expression: coeff * h^(level-k) * row_1 ... row_k,
// factors referenced as (degree, row index) into the Lie basis tables.
struct PbwTerm {
  Scalar coeff = 0;
  std::vector<std::pair<unsigned, unsigned>> factors;
};

struct PbwExpression {
  unsigned level = 0;
  std::vector<PbwTerm> terms;
};

struct UniversalL {
  TensorElt tensor;                                // (x+y)^{@p} - x^{@p} - y^{@p}
  std::vector<std::pair<Word, Scalar>> lie_combo;  // over left-normed bracket sequences
};

struct UniversalP {
  TensorElt tensor;  // (xy)^{@p} - x^{@p} y^{@p}, degree 2p
  unsigned level = 0;
  PbwExpression expr;
};

// Necklace count: dim L^d of the free Lie algebra on g generators.
inline unsigned witt_dimension(unsigned g, unsigned d) {
  auto moebius = [](unsigned n) -> int {
    int mu = 1;
    for (unsigned q = 2; q * q <= n; ++q) {
      if (n % q) continue;
      n /= q;
      if (n % q == 0) return 0;
      mu = -mu;
    }
    if (n > 1) mu = -mu;
    return mu;
  };
  long long sum = 0;
  for (unsigned e = 1; e <= d; ++e) {
    if (d % e) continue;
    long long pw = 1;
    for (unsigned i = 0; i < d / e; ++i) pw *= g;
    sum += moebius(e) * pw;
  }
  return static_cast<unsigned>(sum / d);
}

class FreeAlgCtx {
public:
  FreeAlgCtx(Prime p, unsigned generators, unsigned cap = 0)
      : prime_(p), F_(p), gens_(generators), cap_(cap ? cap : 2 * p.value()) {
    if (gens_ < 1 || gens_ > 3) throw BadParams("generator count must be 1..3");
    if (cap_ < 2 * p.value()) throw BadParams("degree cap must be at least 2p");
  }

  const Fp& field() const { return F_; }
  unsigned p() const { return prime_.value(); }
  unsigned generators() const { return gens_; }
  unsigned cap() const { return cap_; }

  // ---- tensor arithmetic ---------------------------------------------------

  TensorElt t_word(const Word& w, Scalar c = 1) const {
    TensorElt t;
    if (c % F_.p()) t.terms[w] = c % F_.p();
    return t;
  }
  TensorElt t_gen(unsigned i) const { return t_word(Word(1, static_cast<char>(i))); }
  TensorElt t_one() const { return t_word(Word()); }

  void t_add_inplace(TensorElt& a, const Word& w, Scalar c) const {
    c %= F_.p();
    if (!c) return;
    auto it = a.terms.find(w);
    if (it == a.terms.end()) {
      a.terms.emplace(w, c);
    } else {
      it->second = F_.add(it->second, c);
      if (!it->second) a.terms.erase(it);
    }
  }
  TensorElt t_add(const TensorElt& a, const TensorElt& b) const {
    TensorElt r = a;
    for (auto& [w, c] : b.terms) t_add_inplace(r, w, c);
    return r;
  }
  TensorElt t_scale(Scalar s, const TensorElt& a) const {
    TensorElt r;
    s %= F_.p();
    if (!s) return r;
    for (auto& [w, c] : a.terms) r.terms[w] = F_.mul(s, c);
    return r;
  }
  TensorElt t_sub(const TensorElt& a, const TensorElt& b) const {
    return t_add(a, t_scale(F_.p() - 1, b));
  }

  // Bilinear concatenation product.
  TensorElt tensor_mul(const TensorElt& a, const TensorElt& b) const {
    TensorElt r;
    for (auto& [wa, ca] : a.terms)
      for (auto& [wb, cb] : b.terms) {
        if (wa.size() + wb.size() > cap_)
          throw DegreeCapExceeded("tensor product degree " +
                                  std::to_string(wa.size() + wb.size()) + " exceeds cap " +
                                  std::to_string(cap_));
        t_add_inplace(r, wa + wb, F_.mul(ca, cb));
      }
    return r;
  }

  TensorElt commutator(const TensorElt& a, const TensorElt& b) const {
    return t_sub(tensor_mul(a, b), tensor_mul(b, a));
  }

  TensorElt t_pow(const TensorElt& a, unsigned e) const {
    TensorElt r = t_one();
    for (unsigned i = 0; i < e; ++i) r = tensor_mul(r, a);
    return r;
  }

  // ---- dense vectors per homogeneous degree ---------------------------------

  std::size_t words_of_degree(unsigned d) const {
    std::size_t n = 1;
    for (unsigned i = 0; i < d; ++i) n *= gens_;
    return n;
  }
  std::size_t word_index(const Word& w) const {
    std::size_t idx = 0;
    for (char ch : w) idx = idx * gens_ + static_cast<unsigned char>(ch);
    return idx;
  }
  Word word_from_index(std::size_t idx, unsigned d) const {
    Word w(d, 0);
    for (unsigned i = d; i-- > 0;) {
      w[i] = static_cast<char>(idx % gens_);
      idx /= gens_;
    }
    return w;
  }

  // Degrees present in a tensor, ascending.
  std::vector<unsigned> degrees(const TensorElt& t) const {
    std::vector<unsigned> ds;
    for (auto& [w, c] : t.terms) {
      unsigned d = static_cast<unsigned>(w.size());
      if (ds.empty() || ds.back() != d) ds.push_back(d);
    }
    return ds;
  }

  std::vector<Scalar> dense_component(const TensorElt& t, unsigned d) const {
    std::vector<Scalar> v(words_of_degree(d), 0);
    for (auto& [w, c] : t.terms)
      if (w.size() == d) v[word_index(w)] = c;
    return v;
  }

  TensorElt from_dense(const std::vector<Scalar>& v, unsigned d) const {
    TensorElt t;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] % F_.p()) t.terms[word_from_index(i, d)] = v[i] % F_.p();
    return t;
  }

  // ---- free Lie subspaces ----------------------------------------------------

  // Dense expansion of the left-normed bracket [v1,[v2,[...,vd]]].
  std::vector<Scalar> bracket_expansion(const Word& seq) const {
    unsigned d = static_cast<unsigned>(seq.size());
    std::vector<Scalar> cur(gens_, 0);
    cur[static_cast<unsigned char>(seq[d - 1])] = 1;
    for (unsigned i = d - 1; i-- > 0;) {
      unsigned v = static_cast<unsigned char>(seq[i]);
      unsigned len = d - 1 - i;  // current degree
      std::size_t ncur = words_of_degree(len);
      std::vector<Scalar> next(ncur * gens_, 0);
      for (std::size_t j = 0; j < ncur; ++j) {
        Scalar c = cur[j];
        if (!c) continue;
        std::size_t pre = static_cast<std::size_t>(v) * ncur + j;  // v.w
        std::size_t post = j * gens_ + v;                          // w.v
        next[pre] = F_.add(next[pre], c);
        next[post] = F_.sub(next[post], c);
      }
      cur = std::move(next);
    }
    return cur;
  }

  // Echelonized basis of L^d from the spanning set of left-normed brackets;
  // dimension certified against the necklace formula.
  const LieBasis& lie_basis(unsigned d) const {
    if (d == 0 || d > cap_) throw BadParams("lie_basis degree out of range");
    auto it = lie_cache_.find(d);
    if (it != lie_cache_.end()) return it->second;
    std::size_t n = words_of_degree(d);
    EchelonSpan span(F_, n, /*track=*/true);
    for (std::size_t s = 0; s < n; ++s) span.add(bracket_expansion(word_from_index(s, d)));
    LieBasis basis;
    basis.degree = d;
    basis.rows = span.rows();
    basis.combos.reserve(span.rank());
    for (unsigned r = 0; r < span.rank(); ++r) {
      std::vector<Scalar> combo = span.combo(r);
      combo.resize(n, 0);
      basis.combos.push_back(std::move(combo));
    }
    if (basis.dim() != witt_dimension(gens_, d))
      throw Error("lie basis dimension disagrees with the necklace formula at degree " +
                  std::to_string(d));
    return lie_cache_.emplace(d, std::move(basis)).first->second;
  }

  // ---- PBW filtration ----------------------------------------------------------

  // Minimal n with t inside the span of products of <= n Lie elements.
  unsigned pbw_level(const TensorElt& t) const {
    if (t.is_zero()) return 0;
    unsigned level = 0;
    for (unsigned d : degrees(t)) {
      if (d == 0) continue;  // constants sit at level 0
      auto dense = dense_component(t, d);
      PbwSpan& ps = pbw_span(d);
      unsigned n = 1;
      for (;; ++n) {
        build_pbw_level(ps, d, n);
        if (ps.span.contains(dense, n)) break;
        if (n > d) throw Error("pbw_level failed to terminate");  // F_d meets all of T^d
      }
      level = std::max(level, n);
    }
    return level;
  }

  // Express a tensor as a combination of canonically ordered products of Lie
  // basis rows, at the given filtration level (default: the minimal one).
  PbwExpression pbw_express(const TensorElt& t, unsigned level = 0) const {
    PbwExpression expr;
    unsigned minimal = std::max(1u, pbw_level(t));
    if (level == 0) level = minimal;
    if (level < minimal)
      throw LevelViolation("cannot express a tensor below its filtration level");
    expr.level = level;
    for (unsigned d : degrees(t)) {
      if (d == 0) {
        PbwTerm term;
        term.coeff = t.terms.at(Word());
        expr.terms.push_back(std::move(term));
        continue;
      }
      PbwSpan& ps = pbw_span(d);
      build_pbw_level(ps, d, expr.level);
      auto coords = ps.span.coordinates(dense_component(t, d), expr.level);
      if (!coords) throw Error("pbw_express: component not in built span");
      for (std::size_t i = 0; i < coords->size(); ++i) {
        if (!(*coords)[i]) continue;
        PbwTerm term;
        term.coeff = (*coords)[i];
        term.factors = ps.products[i];
        expr.terms.push_back(std::move(term));
      }
    }
    return expr;
  }

  // ---- quantized algebra ---------------------------------------------------------

  QuantElt h_act(const QuantElt& a) const { return {a.tensor, a.level + 1}; }

  QuantElt quant_mul(const QuantElt& a, const QuantElt& b) const {
    return {tensor_mul(a.tensor, b.tensor), a.level + b.level};
  }

  // Bracket drops one level; the PBW property guarantees the commutator fits.
  QuantElt quant_bracket(const QuantElt& a, const QuantElt& b) const {
    QuantElt r{commutator(a.tensor, b.tensor), a.level + b.level - 1};
    if (pbw_level(r.tensor) > r.level)
      throw LevelViolation("commutator escapes filtration step " + std::to_string(r.level));
    return r;
  }

  bool quant_level_ok(const QuantElt& a) const { return pbw_level(a.tensor) <= a.level; }

  // ---- universal polynomials ------------------------------------------------------

  // h^{p-1} L(x,y) = (x+y)^p - x^p - y^p; a Lie element of degree p.
  UniversalL compute_L() const {
    unsigned p = prime_.value();
    if (gens_ < 2) throw BadParams("compute_L needs two generators");
    UniversalL out;
    std::size_t n = words_of_degree(p);
    // In the free expansion every word of degree p has coefficient 1; the two
    // pure powers are subtracted away, leaving the mixed words.
    for (std::size_t i = 0; i < n; ++i) {
      Word w = word_from_index(i, p);
      bool mixes_xy = w.find(char(0)) != Word::npos && w.find(char(1)) != Word::npos;
      bool uses_z = w.find(char(2)) != Word::npos;
      if (mixes_xy && !uses_z) out.tensor.terms[w] = 1;
    }
    // Certify L is a Lie element: solve for its left-normed bracket combo.
    EchelonSpan span(F_, n, /*track=*/true);
    std::vector<Word> seqs;
    for (std::size_t s = 0; s < words_of_degree(p); ++s) {
      Word seq = word_from_index(s, p);
      if (gens_ > 2 && seq.find(char(2)) != Word::npos) continue;
      seqs.push_back(seq);
      span.add(bracket_expansion(seq));
    }
    auto coords = span.coordinates(dense_component(out.tensor, p));
    if (!coords) throw NotLieElement("L(x,y) expansion escaped the free Lie subspace");
    for (std::size_t i = 0; i < coords->size(); ++i)
      if ((*coords)[i]) out.lie_combo.emplace_back(seqs[i], (*coords)[i]);
    return out;
  }

  // h^{p-1} P(x,y) = (xy)^p - x^p y^p; filtration level at most p+1.
  UniversalP compute_P() const {
    unsigned p = prime_.value();
    if (gens_ < 2) throw BadParams("compute_P needs two generators");
    if (cap_ < 2 * p) throw BadParams("cap must be at least 2p");
    UniversalP out;
    Word xy;
    for (unsigned i = 0; i < p; ++i) {
      xy.push_back(char(0));
      xy.push_back(char(1));
    }
    Word xxyy(p, char(0));
    xxyy.append(p, char(1));
    out.tensor.terms[xy] = 1;
    out.tensor.terms[xxyy] = F_.p() - 1;
    unsigned minimal = pbw_level(out.tensor);
    if (minimal > p + 1)
      throw LevelViolation("P(x,y) sits at level " + std::to_string(minimal) +
                           " > p+1 = " + std::to_string(p + 1));
    // P is the level-(p+1) element h^{-(p-1)}((xy)^p - x^p y^p); express it
    // there so quantized and Poisson evaluations carry the right h powers.
    out.level = p + 1;
    out.expr = pbw_express(out.tensor, p + 1);
    return out;
  }

  // Identity (in T(V)): [x^{@p}, y] = (ad x)^p (y).
  bool verify_ad_fr(const TensorElt& x, const TensorElt& y) const {
    TensorElt lhs = commutator(t_pow(x, prime_.value()), y);
    TensorElt rhs = y;
    for (unsigned i = 0; i < prime_.value(); ++i) rhs = commutator(x, rhs);
    return lhs == rhs;
  }
  bool verify_ad_fr() const { return verify_ad_fr(t_gen(0), t_gen(1)); }

private:
  struct PbwSpan {
    TaggedSpan span;
    std::vector<std::vector<std::pair<unsigned, unsigned>>> products;
    unsigned built_level = 0;
    explicit PbwSpan(const Fp& F, std::size_t cols) : span(F, cols) {}
  };

  PbwSpan& pbw_span(unsigned d) const {
    auto it = pbw_cache_.find(d);
    if (it != pbw_cache_.end()) return it->second;
    return pbw_cache_.emplace(d, PbwSpan(F_, words_of_degree(d))).first->second;
  }

  // Dense concatenation product of Lie basis rows.
  std::vector<Scalar> product_expansion(
      const std::vector<std::pair<unsigned, unsigned>>& factors) const {
    std::vector<Scalar> cur{1};
    for (auto& [fd, fi] : factors) {
      const std::vector<Scalar>& row = lie_basis(fd).rows[fi];
      std::vector<Scalar> next(cur.size() * row.size(), 0);
      for (std::size_t i = 0; i < cur.size(); ++i) {
        if (!cur[i]) continue;
        for (std::size_t j = 0; j < row.size(); ++j)
          if (row[j]) next[i * row.size() + j] = F_.mul(cur[i], row[j]);
      }
      cur = std::move(next);
    }
    return cur;
  }

  // Add to the span all canonically ordered products with exactly n factors of
  // total degree d. Products arrive sorted by (max factor degree, factor list)
  // so low-degree factors become pivots first.
  void build_pbw_level(PbwSpan& ps, unsigned d, unsigned n) const {
    while (ps.built_level < n) {
      unsigned k = ps.built_level + 1;
      std::vector<std::vector<std::pair<unsigned, unsigned>>> lists;
      std::vector<std::pair<unsigned, unsigned>> cur;
      enumerate_products(d, k, {1, 0}, cur, lists);
      std::stable_sort(lists.begin(), lists.end(),
                       [](const auto& a, const auto& b) {
                         unsigned ma = 0, mb = 0;
                         for (auto& f : a) ma = std::max(ma, f.first);
                         for (auto& f : b) mb = std::max(mb, f.first);
                         return ma < mb;
                       });
      for (auto& list : lists) {
        ps.span.add(product_expansion(list), k);
        ps.products.push_back(list);
      }
      ps.built_level = k;
    }
  }

  // Multisets of (degree, row) factors, non-decreasing, exactly `slots` of
  // them, total degree `remaining`.
  void enumerate_products(unsigned remaining, unsigned slots,
                          std::pair<unsigned, unsigned> min_factor,
                          std::vector<std::pair<unsigned, unsigned>>& cur,
                          std::vector<std::vector<std::pair<unsigned, unsigned>>>& out) const {
    if (slots == 0) {
      if (remaining == 0) out.push_back(cur);
      return;
    }
    for (unsigned fd = min_factor.first; fd + (slots - 1) <= remaining; ++fd) {
      const LieBasis& lb = lie_basis(fd);
      unsigned start = (fd == min_factor.first) ? min_factor.second : 0;
      for (unsigned fi = start; fi < lb.dim(); ++fi) {
        cur.emplace_back(fd, fi);
        enumerate_products(remaining - fd, slots - 1, {fd, fi}, cur, out);
        cur.pop_back();
      }
    }
  }

  Prime prime_;
  Fp F_;
  unsigned gens_;
  unsigned cap_;
  mutable std::map<unsigned, LieBasis> lie_cache_;
  mutable std::map<unsigned, PbwSpan> pbw_cache_;
};

// ---- evaluation ---------------------------------------------------------------
//
// Targets supply: using Elt; zero(), one(), add(a,b), scale(c,a), mul(a,b),
// bracket(a,b), h(a). Poisson targets implement h as the zero map.

// Left-normed bracket word, folded from the right.
template <class Target>
typename Target::Elt eval_bracket_word(const Word& seq,
                                       const std::vector<typename Target::Elt>& images,
                                       const Target& tgt) {
  typename Target::Elt acc = images.at(static_cast<unsigned char>(seq.back()));
  for (std::size_t i = seq.size() - 1; i-- > 0;)
    acc = tgt.bracket(images.at(static_cast<unsigned char>(seq[i])), acc);
  return acc;
}

template <class Target>
typename Target::Elt eval_lie_combo(const std::vector<std::pair<Word, Scalar>>& combo,
                                    const std::vector<typename Target::Elt>& images,
                                    const Target& tgt) {
  typename Target::Elt acc = tgt.zero();
  for (auto& [seq, c] : combo)
    acc = tgt.add(acc, tgt.scale(c, eval_bracket_word(seq, images, tgt)));
  return acc;
}

// Word-by-word ring evaluation of a plain tensor.
template <class Target>
typename Target::Elt eval_words(const TensorElt& t,
                                const std::vector<typename Target::Elt>& images,
                                const Target& tgt) {
  typename Target::Elt acc = tgt.zero();
  for (auto& [w, c] : t.terms) {
    typename Target::Elt prod = tgt.one();
    for (char ch : w) prod = tgt.mul(prod, images.at(static_cast<unsigned char>(ch)));
    acc = tgt.add(acc, tgt.scale(c, prod));
  }
  return acc;
}

// Word route for a quantized element: each word of degree deg carries
// h^(level-deg). Requires level >= top degree.
template <class Target>
typename Target::Elt eval_quant_words(const QuantElt& q,
                                      const std::vector<typename Target::Elt>& images,
                                      const Target& tgt) {
  if (q.tensor.top_degree() > q.level)
    throw LevelViolation("word-route evaluation needs level >= top degree");
  typename Target::Elt acc = tgt.zero();
  for (auto& [w, c] : q.tensor.terms) {
    typename Target::Elt prod = tgt.one();
    for (char ch : w) prod = tgt.mul(prod, images.at(static_cast<unsigned char>(ch)));
    for (std::size_t i = w.size(); i < q.level; ++i) prod = tgt.h(prod);
    acc = tgt.add(acc, tgt.scale(c, prod));
  }
  return acc;
}

// PBW route: level-n element evaluates as sum of coeff * h^(n-k) * products of
// bracket-word evaluations. Works in quantized targets and, with h = 0, in
// Poisson targets.
template <class Target>
typename Target::Elt eval_pbw(const FreeAlgCtx& ctx, const PbwExpression& expr,
                              const std::vector<typename Target::Elt>& images,
                              const Target& tgt) {
  using Elt = typename Target::Elt;
  std::map<std::pair<unsigned, unsigned>, Elt> row_cache;
  auto eval_row = [&](std::pair<unsigned, unsigned> key) -> const Elt& {
    auto it = row_cache.find(key);
    if (it != row_cache.end()) return it->second;
    const LieBasis& lb = ctx.lie_basis(key.first);
    const std::vector<Scalar>& combo = lb.combos[key.second];
    Elt acc = tgt.zero();
    for (std::size_t s = 0; s < combo.size(); ++s) {
      if (!combo[s]) continue;
      Word seq = ctx.word_from_index(s, key.first);
      acc = tgt.add(acc, tgt.scale(combo[s], eval_bracket_word(seq, images, tgt)));
    }
    return row_cache.emplace(key, std::move(acc)).first->second;
  };

  Elt acc = tgt.zero();
  for (const PbwTerm& term : expr.terms) {
    Elt prod = tgt.one();
    for (auto& f : term.factors) prod = tgt.mul(prod, eval_row(f));
    for (unsigned i = term.factors.size(); i < expr.level; ++i) prod = tgt.h(prod);
    acc = tgt.add(acc, tgt.scale(term.coeff, prod));
  }
  return acc;
}

}  // namespace charp::freealg
