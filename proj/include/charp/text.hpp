#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "charp/freealg.hpp"
#include "charp/trunccalc.hpp"
#include "charp/weylquant.hpp"

// Text grammar for polynomials, forms and Weyl elements.
//
//   polynomial   2*x0^2*x1 + x1 + 2
//   1-form       2*x0 dx0 + x1^2 dx1
//   2-form       (coefficient term) dx0^dx1
//   weyl         2*x0^2 y0 h^2 + x0 y0 + 1
//   tensor       xxy + xyx + 2*yxx
//
// Variables are x0..x3 (aliases x, y, z, w); Weyl variables are x0, y0, x1,
// y1 and h. Coefficients are canonical residues; a leading '-' negates mod p.

namespace charp::text {

using trunccalc::AlgebraCtx;
using trunccalc::ConstForm;
using trunccalc::Derivation;
using trunccalc::DiffForm;
using trunccalc::TruncPoly;

// ---- printing -------------------------------------------------------------

inline std::string var_name(unsigned v) { return "x" + std::to_string(v); }

inline std::string show_monomial(const AlgebraCtx& A, unsigned idx, Scalar coeff) {
  std::string s;
  for (unsigned v = 0; v < A.vars(); ++v) {
    unsigned e = A.exponent(idx, v);
    if (!e) continue;
    if (!s.empty()) s += "*";
    s += var_name(v);
    if (e > 1) s += "^" + std::to_string(e);
  }
  if (s.empty()) return std::to_string(coeff);
  if (coeff != 1) s = std::to_string(coeff) + "*" + s;
  return s;
}

inline std::string show(const AlgebraCtx& A, const TruncPoly& f) {
  std::string s;
  for (unsigned idx = 0; idx < A.dim(); ++idx) {
    if (!f.c[idx]) continue;
    if (!s.empty()) s += " + ";
    s += show_monomial(A, idx, f.c[idx]);
  }
  return s.empty() ? "0" : s;
}

inline std::string show_subset(const AlgebraCtx& A, unsigned k, unsigned s) {
  std::string out;
  for (unsigned v : A.subset(k, s)) {
    if (!out.empty()) out += "^";
    out += "d" + var_name(v);
  }
  return out;
}

inline std::string show(const AlgebraCtx& A, const DiffForm& w) {
  std::string s;
  for (unsigned sub = 0; sub < A.n_subsets(w.degree); ++sub) {
    for (unsigned idx = 0; idx < A.dim(); ++idx) {
      if (!w.comp[sub].c[idx]) continue;
      if (!s.empty()) s += " + ";
      s += show_monomial(A, idx, w.comp[sub].c[idx]);
      if (w.degree) s += " " + show_subset(A, w.degree, sub);
    }
  }
  return s.empty() ? "0" : s;
}

inline std::string show(const AlgebraCtx& A, const ConstForm& cf) {
  std::string s;
  for (unsigned sub = 0; sub < A.n_subsets(cf.degree); ++sub) {
    if (!cf.c[sub]) continue;
    if (!s.empty()) s += " + ";
    if (cf.degree == 0) {
      s += std::to_string(cf.c[sub]);
    } else {
      if (cf.c[sub] != 1) s += std::to_string(cf.c[sub]) + "*";
      s += show_subset(A, cf.degree, sub);
    }
  }
  return s.empty() ? "0" : s;
}

inline std::string show(const AlgebraCtx& A, const Derivation& xi) {
  std::string s;
  for (unsigned v = 0; v < A.vars(); ++v) {
    if (xi.comp[v].is_zero()) continue;
    if (!s.empty()) s += " + ";
    s += "(" + show(A, xi.comp[v]) + ") d/d" + var_name(v);
  }
  return s.empty() ? "0" : s;
}

inline std::string show_substitution(const AlgebraCtx& A,
                                     const std::vector<TruncPoly>& images) {
  std::string s;
  for (unsigned v = 0; v < A.vars(); ++v) {
    if (!s.empty()) s += "; ";
    s += var_name(v) + " -> " + show(A, images[v]);
  }
  return s;
}

// Tensor words print with letters x, y, z.
inline std::string show(const freealg::FreeAlgCtx& FA, const freealg::TensorElt& t) {
  static const char letters[] = {'x', 'y', 'z'};
  std::string s;
  for (auto& [w, c] : t.terms) {
    if (!s.empty()) s += " + ";
    if (w.empty()) {
      s += std::to_string(c);
      continue;
    }
    std::string word;
    for (char ch : w) word += letters[static_cast<unsigned char>(ch)];
    if (c != 1) s += std::to_string(c) + "*";
    s += word;
  }
  (void)FA;
  return s.empty() ? "0" : s;
}

inline std::string show_quant(const freealg::FreeAlgCtx& FA, const freealg::QuantElt& q) {
  return "(" + show(FA, q.tensor) + ", level=" + std::to_string(q.level) + ")";
}

// Weyl monomials print as x0^a y0^b h^c with pair variables.
inline std::string weyl_var_name(unsigned v) {
  return (v % 2 ? "y" : "x") + std::to_string(v / 2);
}

inline std::string show(const weylquant::WeylCtx& W, const weylquant::WeylElt& u) {
  std::string s;
  for (unsigned m = 0; m < W.adim(); ++m)
    for (unsigned e = 0; e < W.trunc_level(); ++e) {
      Scalar c = u.c[W.index(m, e)];
      if (!c) continue;
      std::string term;
      for (unsigned v = 0; v < 2 * W.pairs(); ++v) {
        unsigned ex = W.shadow().exponent(m, v);
        if (!ex) continue;
        if (!term.empty()) term += " ";
        term += weyl_var_name(v);
        if (ex > 1) term += "^" + std::to_string(ex);
      }
      if (e) {
        if (!term.empty()) term += " ";
        term += "h";
        if (e > 1) term += "^" + std::to_string(e);
      }
      if (term.empty()) term = std::to_string(c);
      else if (c != 1) term = std::to_string(c) + "*" + term;
      if (!s.empty()) s += " + ";
      s += term;
    }
  return s.empty() ? "0" : s;
}

// ---- parsing ----------------------------------------------------------------

namespace detail {

struct Lexer {
  std::string src;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= src.size();
  }
  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }
  bool accept(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  unsigned number() {
    skip_ws();
    if (pos >= src.size() || !std::isdigit(static_cast<unsigned char>(src[pos])))
      throw ParseError("expected a number at position " + std::to_string(pos));
    unsigned v = 0;
    while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos])))
      v = v * 10 + (src[pos++] - '0');
    return v;
  }
  std::string ident() {
    skip_ws();
    std::string s;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '/'))
      s += src[pos++];
    if (s.empty()) throw ParseError("expected an identifier at position " + std::to_string(pos));
    return s;
  }
};

inline unsigned var_of(const std::string& name, unsigned vars) {
  unsigned v;
  if (name.size() == 1) {
    std::string aliases = "xyzw";
    auto at = aliases.find(name[0]);
    if (at == std::string::npos) throw ParseError("unknown variable " + name);
    v = static_cast<unsigned>(at);
  } else if (name[0] == 'x' && std::isdigit(static_cast<unsigned char>(name[1]))) {
    v = static_cast<unsigned>(std::stoul(name.substr(1)));
  } else {
    throw ParseError("unknown variable " + name);
  }
  if (v >= vars) throw ParseError("variable " + name + " out of range");
  return v;
}

}  // namespace detail

// Parse the polynomial part of a term; stops before a 'd' factor (form part).
// Returns (coefficient, exponent per variable).
struct ParsedTerm {
  Scalar coeff = 1;
  std::vector<unsigned> exps;
  std::vector<unsigned> wedge;  // variables of the dx part, in order
};

inline ParsedTerm parse_term(detail::Lexer& lex, const Fp& F, unsigned vars) {
  ParsedTerm t;
  t.exps.assign(vars, 0);
  bool have_coeff = false, have_factor = false;
  for (;;) {
    char c = lex.peek();
    if (std::isdigit(static_cast<unsigned char>(c))) {
      Scalar v = lex.number() % F.p();
      t.coeff = have_coeff ? F.mul(t.coeff, v) : v;
      have_coeff = true;
    } else if (std::isalpha(static_cast<unsigned char>(c)) && c != 'd') {
      std::string name = lex.ident();
      unsigned v = detail::var_of(name, vars);
      unsigned e = 1;
      if (lex.accept('^')) e = lex.number();
      t.exps[v] += e;
      have_factor = true;
    } else if (c == 'd') {
      // wedge part: dxK (^ dxK)*
      for (;;) {
        std::string name = lex.ident();
        if (name.size() < 2 || name[0] != 'd') throw ParseError("expected dx factor: " + name);
        t.wedge.push_back(detail::var_of(name.substr(1), vars));
        if (!lex.accept('^')) break;
        if (lex.peek() != 'd') throw ParseError("expected dx factor after ^");
      }
      break;
    } else {
      break;
    }
    if (!lex.accept('*')) {
      // allow whitespace-separated factors; stop at +, -, EOF or the dx part
      char n = lex.peek();
      if (n == '+' || n == '-' || n == '\0' || n == ',' || n == ')') break;
      if (n == 'd') continue;
      if (!std::isalnum(static_cast<unsigned char>(n))) break;
    }
  }
  if (!have_coeff && !have_factor && t.wedge.empty())
    throw ParseError("empty term");
  return t;
}

inline TruncPoly parse_poly(const AlgebraCtx& A, const std::string& src) {
  detail::Lexer lex{src};
  TruncPoly out = A.zero();
  bool first = true;
  while (!lex.eof()) {
    Scalar sign = 1;
    if (lex.accept('-')) sign = A.field().p() - 1;
    else if (!first) {
      if (!lex.accept('+')) throw ParseError("expected + or - between terms");
      if (lex.accept('-')) sign = A.field().p() - 1;
    } else {
      lex.accept('+');
    }
    ParsedTerm t = parse_term(lex, A.field(), A.vars());
    if (!t.wedge.empty()) throw ParseError("unexpected form factor in a polynomial");
    unsigned idx = 0, stride = 1;
    for (unsigned v = 0; v < A.vars(); ++v) {
      if (t.exps[v] >= A.p()) throw ParseError("exponent exceeds p-1");
      idx += t.exps[v] * stride;
      stride *= A.p();
    }
    out.c[idx] = A.field().add(out.c[idx], A.field().mul(sign, t.coeff));
    first = false;
  }
  return out;
}

inline DiffForm parse_form(const AlgebraCtx& A, const std::string& src) {
  detail::Lexer lex{src};
  std::vector<ParsedTerm> terms;
  std::vector<Scalar> signs;
  bool first = true;
  while (!lex.eof()) {
    Scalar sign = 1;
    if (lex.accept('-')) sign = A.field().p() - 1;
    else if (!first) {
      if (!lex.accept('+')) throw ParseError("expected + or - between terms");
      if (lex.accept('-')) sign = A.field().p() - 1;
    } else {
      lex.accept('+');
    }
    terms.push_back(parse_term(lex, A.field(), A.vars()));
    signs.push_back(sign);
    first = false;
  }
  if (terms.empty()) throw ParseError("empty form");
  unsigned degree = static_cast<unsigned>(terms[0].wedge.size());
  for (auto& t : terms)
    if (t.wedge.size() != degree) throw ParseError("mixed form degrees in one expression");
  DiffForm out = A.zero_form(degree);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    ParsedTerm& t = terms[i];
    // sort the wedge factors, tracking the sign of the permutation
    Scalar coeff = A.field().mul(signs[i], t.coeff);
    std::vector<unsigned> w = t.wedge;
    for (std::size_t a = 0; a < w.size(); ++a)
      for (std::size_t b = a + 1; b < w.size(); ++b) {
        if (w[a] == w[b]) throw ParseError("repeated dx factor");
        if (w[a] > w[b]) {
          std::swap(w[a], w[b]);
          coeff = A.field().neg(coeff);
        }
      }
    unsigned idx = 0, stride = 1;
    for (unsigned v = 0; v < A.vars(); ++v) {
      if (t.exps[v] >= A.p()) throw ParseError("exponent exceeds p-1");
      idx += t.exps[v] * stride;
      stride *= A.p();
    }
    unsigned sub = degree ? A.subset_index(degree, w) : 0;
    out.comp[sub].c[idx] = A.field().add(out.comp[sub].c[idx], coeff);
  }
  return out;
}

// Weyl elements: variables x0, y0, x1, y1 and h.
inline weylquant::WeylElt parse_weyl(const weylquant::WeylCtx& W, const std::string& src) {
  detail::Lexer lex{src};
  weylquant::WeylElt out = W.zero();
  const Fp& F = W.field();
  bool first = true;
  while (!lex.eof()) {
    Scalar sign = 1;
    if (lex.accept('-')) sign = F.p() - 1;
    else if (!first) {
      if (!lex.accept('+')) throw ParseError("expected + or - between terms");
      if (lex.accept('-')) sign = F.p() - 1;
    } else {
      lex.accept('+');
    }
    Scalar coeff = 1;
    std::vector<unsigned> exps(2 * W.pairs(), 0);
    unsigned hexp = 0;
    bool have_any = false;
    for (;;) {
      char c = lex.peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        coeff = F.mul(coeff, lex.number() % F.p());
        have_any = true;
      } else if (c == 'h') {
        lex.ident();
        unsigned e = 1;
        if (lex.accept('^')) e = lex.number();
        hexp += e;
        have_any = true;
      } else if (c == 'x' || c == 'y') {
        std::string name = lex.ident();
        if (name.size() < 2) throw ParseError("weyl variables need a pair index: " + name);
        unsigned pair = static_cast<unsigned>(std::stoul(name.substr(1)));
        if (pair >= W.pairs()) throw ParseError("pair index out of range: " + name);
        unsigned v = 2 * pair + (name[0] == 'y' ? 1 : 0);
        unsigned e = 1;
        if (lex.accept('^')) e = lex.number();
        exps[v] += e;
        have_any = true;
      } else {
        break;
      }
      lex.accept('*');
    }
    if (!have_any) throw ParseError("empty weyl term");
    unsigned idx = 0, stride = 1;
    for (unsigned v = 0; v < 2 * W.pairs(); ++v) {
      if (exps[v] >= W.p()) throw ParseError("exponent exceeds p-1");
      idx += exps[v] * stride;
      stride *= W.p();
    }
    if (hexp < W.trunc_level()) {
      std::size_t posn = W.index(idx, hexp);
      out.c[posn] = F.add(out.c[posn], F.mul(sign, coeff));
    }
    first = false;
  }
  return out;
}

}  // namespace charp::text
