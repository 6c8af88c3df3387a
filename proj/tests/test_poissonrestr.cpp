#include <catch2/catch_amalgamated.hpp>

#include "charp/poissonrestr.hpp"
#include "charp/rng.hpp"

using namespace charp;
using namespace charp::poissonrestr;

namespace {

// dx ^ dy on two variables, possibly scaled by a polynomial factor.
DiffForm volume(const AlgebraCtx& A, const TruncPoly& coeff) {
  DiffForm w = A.zero_form(2);
  w.comp[0] = coeff;
  return w;
}

Symplectic random_exact_symplectic(const AlgebraCtx& A, SplitMix64& g) {
  // d(random 1-form), retried until the constant Gram part is invertible
  for (;;) {
    DiffForm eta = A.zero_form(1);
    for (auto& f : eta.comp) f = A.random_poly(g);
    DiffForm omega = A.de_rham(eta);
    try {
      return check_symplectic(A, omega);
    } catch (const Degenerate&) {
    }
  }
}

}  // namespace

TEST_CASE("check_symplectic") {
  AlgebraCtx A(Prime(3), 2);
  TruncPoly x = A.coordinate(0);
  SECTION("standard volume form is accepted") {
    Symplectic S = check_symplectic(A, volume(A, A.one()));
    REQUIRE(S.gram[0][1] == A.one());
  }
  SECTION("x dx^dy is degenerate") {
    REQUIRE_THROWS_AS(check_symplectic(A, volume(A, x)), Degenerate);
  }
  SECTION("(1+x) dx^dy inverts by Neumann series") {
    Symplectic S = check_symplectic(A, volume(A, A.add(A.one(), x)));
    // inverse Gram entry (1+x)^{-1} = 1 - x + x^2
    TruncPoly expected = A.add(A.sub(A.one(), x), A.mul(x, x));
    REQUIRE(S.gram_inv[0][1] == A.scale(2, expected));  // sign from antisymmetry
    REQUIRE(S.gram_inv[1][0] == expected);
  }
  SECTION("non-closed 2-forms are rejected (m=4)") {
    AlgebraCtx B(Prime(3), 4);
    DiffForm w = B.zero_form(2);
    w.comp[B.subset_index(2, {0, 1})] = B.one();
    w.comp[B.subset_index(2, {2, 3})] = B.add(B.one(), B.coordinate(0));
    w.comp[B.subset_index(2, {2, 3})] =
        B.add(w.comp[B.subset_index(2, {2, 3})], B.mul(B.coordinate(2), B.coordinate(0)));
    REQUIRE_THROWS_AS(check_symplectic(B, w), NotClosed);
  }
}

TEST_CASE("Hamiltonian fields under the declared conventions") {
  AlgebraCtx A(Prime(3), 2);
  Symplectic S = check_symplectic(A, volume(A, A.one()));
  TruncPoly x = A.coordinate(0), y = A.coordinate(1);
  SECTION("H_x = -d/dy and H_y = d/dx") {
    Derivation hx = hamiltonian(A, S, x);
    REQUIRE(hx.comp[0].is_zero());
    REQUIRE(hx.comp[1] == A.constant(2));
    Derivation hy = hamiltonian(A, S, y);
    REQUIRE(hy.comp[0] == A.one());
    REQUIRE(hy.comp[1].is_zero());
  }
  SECTION("constants have zero field") {
    REQUIRE(hamiltonian(A, S, A.constant(2)) == A.zero_derivation());
  }
  SECTION("{x,y} = 1, {x^2,y} = 2x, {f,f} = 0") {
    REQUIRE(bracket(A, S, x, y) == A.one());
    REQUIRE(bracket(A, S, A.mul(x, x), y) == A.scale(2, x));
    SplitMix64 g(3);
    TruncPoly f = A.random_poly(g);
    REQUIRE(bracket(A, S, f, f).is_zero());
  }
}

TEST_CASE("bracket laws: antisymmetry, Leibniz, Jacobi") {
  AlgebraCtx A(Prime(3), 2);
  SplitMix64 g(7);
  Symplectic S = random_exact_symplectic(A, g);
  for (int t = 0; t < 8; ++t) {
    TruncPoly f = A.random_poly(g), gg = A.random_poly(g), h = A.random_poly(g);
    REQUIRE(A.add(bracket(A, S, f, gg), bracket(A, S, gg, f)).is_zero());
    // Leibniz in the first slot
    REQUIRE(bracket(A, S, A.mul(f, gg), h) ==
            A.add(A.mul(f, bracket(A, S, gg, h)), A.mul(gg, bracket(A, S, f, h))));
    // Jacobi
    TruncPoly j = bracket(A, S, f, bracket(A, S, gg, h));
    j = A.add(j, bracket(A, S, gg, bracket(A, S, h, f)));
    j = A.add(j, bracket(A, S, h, bracket(A, S, f, gg)));
    REQUIRE(j.is_zero());
  }
}

TEST_CASE("Hamiltonian fields close as a Lie subalgebra") {
  AlgebraCtx A(Prime(3), 2);
  SplitMix64 g(9);
  Symplectic S = random_exact_symplectic(A, g);
  // [H_f, H_g] = H_{{g,f}} under the declared sign conventions
  for (unsigned i = 0; i < A.dim(); ++i)
    for (unsigned j = 0; j < A.dim(); ++j) {
      TruncPoly f = A.monomial(i), gg = A.monomial(j);
      FpMatrix mf = A.deriv_matrix(hamiltonian(A, S, f));
      FpMatrix mg = A.deriv_matrix(hamiltonian(A, S, gg));
      FpMatrix lhs = mat_mul(A.field(), mf, mg);
      FpMatrix mgf = mat_mul(A.field(), mg, mf);
      for (std::size_t t = 0; t < lhs.a.size(); ++t)
        lhs.a[t] = A.field().sub(lhs.a[t], mgf.a[t]);
      FpMatrix rhs = A.deriv_matrix(hamiltonian(A, S, bracket(A, S, gg, f)));
      REQUIRE(lhs.a == rhs.a);
    }
}

TEST_CASE("Poisson center is the constants") {
  AlgebraCtx A(Prime(3), 2);
  SECTION("standard form") {
    Symplectic S = check_symplectic(A, volume(A, A.one()));
    auto basis = poisson_center(A, S);
    REQUIRE(basis.size() == 1);
    TruncPoly z = basis[0];
    TruncPoly rest = z;
    rest.c[0] = 0;
    REQUIRE(rest.is_zero());
    // bracket of the center with random elements vanishes
    SplitMix64 g(11);
    for (int t = 0; t < 20; ++t) REQUIRE(bracket(A, S, z, A.random_poly(g)).is_zero());
  }
  SECTION("random symplectic forms") {
    SplitMix64 g(13);
    for (int t = 0; t < 5; ++t) {
      Symplectic S = random_exact_symplectic(A, g);
      REQUIRE(poisson_center(A, S).size() == 1);
    }
  }
}

TEST_CASE("Poisson ideals are trivial") {
  AlgebraCtx A(Prime(3), 2);
  SplitMix64 g(17);
  Symplectic S = check_symplectic(A, volume(A, A.one()));
  SECTION("unit ideal") { REQUIRE(poisson_ideal_closure(A, S, A.one()) == A.dim()); }
  SECTION("deepest monomial climbs to the whole algebra") {
    TruncPoly f = A.mul(A.pow(A.coordinate(0), 2), A.pow(A.coordinate(1), 2));
    REQUIRE(poisson_ideal_closure(A, S, f) == A.dim());
  }
  SECTION("50 seeded nonzero elements") {
    for (int t = 0; t < 50; ++t) {
      TruncPoly f = A.random_poly(g);
      if (f.is_zero()) continue;
      REQUIRE(poisson_ideal_closure(A, S, f) == A.dim());
    }
  }
}

TEST_CASE("closedness of Hamiltonians under p-th power vs Cartier class") {
  AlgebraCtx A(Prime(3), 2);
  SECTION("standard form: both flags true") {
    Symplectic S = check_symplectic(A, volume(A, A.one()));
    auto [f1, f2] = theorem_cent_check(A, S);
    REQUIRE(f1);
    REQUIRE(f2);
  }
  SECTION("planted negative: 1 + x^2 y^2 coefficient") {
    TruncPoly c = A.add(A.one(), A.mul(A.pow(A.coordinate(0), 2), A.pow(A.coordinate(1), 2)));
    Symplectic S = check_symplectic(A, volume(A, c));
    auto [f1, f2] = theorem_cent_check(A, S);
    REQUIRE_FALSE(f1);
    REQUIRE_FALSE(f2);
  }
  SECTION("planted positive: 1 + x coefficient") {
    Symplectic S = check_symplectic(A, volume(A, A.add(A.one(), A.coordinate(0))));
    auto [f1, f2] = theorem_cent_check(A, S);
    REQUIRE(f1);
    REQUIRE(f2);
  }
  SECTION("flags agree on 60 seeded forms, planted both ways") {
    SplitMix64 g(42);
    for (int t = 0; t < 60; ++t) {
      Symplectic S = random_exact_symplectic(A, g);
      if (t % 3 == 2) {
        // plant a nonzero Cartier class on top of an exact form
        DiffForm w = A.add(S.form, A.class_representative(2, 0));
        S = check_symplectic(A, w);
      }
      auto [f1, f2] = theorem_cent_check(A, S);
      REQUIRE(f1 == f2);
    }
  }
}

TEST_CASE("conformal fields of weight one") {
  AlgebraCtx A(Prime(3), 2);
  TruncPoly x = A.coordinate(0);
  Symplectic S = check_symplectic(A, volume(A, A.one()));
  SECTION("solving xi . Omega = x dy yields the Euler-type field") {
    DiffForm alpha = A.zero_form(1);
    alpha.comp[1] = x;
    Derivation xi = field_from_oneform(A, S, alpha);
    REQUIRE(xi.comp[0] == x);
    REQUIRE(xi.comp[1].is_zero());
    REQUIRE(conformal_check(A, S, xi, 1));
  }
  SECTION("find_conformal returns a weight-1 derivation") {
    Derivation xi = find_conformal(A, S);
    REQUIRE(conformal_check(A, S, xi, 1));
  }
  SECTION("Hamiltonian fields are conformal of weight 0") {
    SplitMix64 g(19);
    for (int t = 0; t < 5; ++t)
      REQUIRE(conformal_check(A, S, hamiltonian(A, S, A.random_poly(g)), 0));
  }
  SECTION("non-exact forms are rejected") {
    DiffForm w = A.add(volume(A, A.one()), A.class_representative(2, 0));
    Symplectic Sbad = check_symplectic(A, w);
    REQUIRE_THROWS_AS(find_conformal(A, Sbad), NotExact);
  }
}

TEST_CASE("restricted structure from potential data") {
  AlgebraCtx A(Prime(3), 2);
  TruncPoly x = A.coordinate(0), y = A.coordinate(1);
  Symplectic S = check_symplectic(A, volume(A, A.one()));
  DiffForm alpha = A.zero_form(1);
  alpha.comp[1] = x;  // x dy, d(alpha) = dx^dy
  SECTION("potential mismatch is rejected") {
    DiffForm beta = A.zero_form(1);
    beta.comp[0] = x;
    REQUIRE_THROWS_AS(restricted_from(A, S, beta, FrobDeriv{{0, 0}}), PotentialMismatch);
  }
  SECTION("kappa = 0 gives x^[p] = y^[p] = 0") {
    RestrictedStructure R = restricted_from(A, S, alpha, FrobDeriv{{0, 0}});
    REQUIRE(R.pow(x).is_zero());
    REQUIRE(R.pow(y).is_zero());
  }
  SECTION("kappa(x) = 1 shifts x^[p] to -1") {
    RestrictedStructure R = restricted_from(A, S, alpha, FrobDeriv{{1, 0}});
    REQUIRE(R.pow(x) == A.constant(2));
    REQUIRE(R.pow(y).is_zero());
  }
  SECTION("constants vanish under the power map") {
    // forced by the axioms: the product rule at x = y = 1 gives 1^[p] = 0,
    // and (c*1)^[p] = c^p 1^[p] = 0
    RestrictedStructure R = restricted_from(A, S, alpha, FrobDeriv{{1, 2}});
    REQUIRE(R.pow(A.one()).is_zero());
    REQUIRE(R.pow(A.constant(2)).is_zero());
    REQUIRE(R.pow(A.zero()).is_zero());
  }
}

TEST_CASE("restricted axioms hold for structures from potentials") {
  AlgebraCtx A(Prime(3), 2);
  freealg::FreeAlgCtx FA(Prime(3), 2);
  SplitMix64 g(23);
  for (int t = 0; t < 3; ++t) {
    Symplectic S = random_exact_symplectic(A, g);
    auto alpha = A.is_exact(S.form);
    REQUIRE(alpha);
    FrobDeriv kappa{{g.below(3), g.below(3)}};
    RestrictedStructure R = restricted_from(A, S, *alpha, kappa);
    auto rep = verify_restricted(
        A, S, [&](const TruncPoly& a) { return R.pow(a); }, FA, 40, 1000 + t);
    INFO(rep.first_counterexample);
    REQUIRE(rep.ok());
  }
}

TEST_CASE("mutated power map fails verification") {
  AlgebraCtx A(Prime(3), 2);
  freealg::FreeAlgCtx FA(Prime(3), 2);
  Symplectic S = check_symplectic(A, volume(A, A.one()));
  DiffForm alpha = A.zero_form(1);
  alpha.comp[1] = A.coordinate(0);
  RestrictedStructure R = restricted_from(A, S, alpha, FrobDeriv{{0, 0}});
  // perturb the power map by a non-Frobenius term
  auto mutated = [&](const TruncPoly& a) {
    TruncPoly v = R.pow(a);
    return A.add(v, A.mul(a, a));  // not additive in a
  };
  auto rep = verify_restricted(A, S, mutated, FA, 20, 77);
  REQUIRE_FALSE(rep.ok());
  REQUIRE_FALSE(rep.first_counterexample.empty());
}

TEST_CASE("zero-bracket degenerate product rule") {
  // with {a,b} = 0 the product rule collapses to (ab)^[p] = a^p b^[p] + a^[p] b^p
  AlgebraCtx A(Prime(3), 2);
  freealg::FreeAlgCtx FA(Prime(3), 2);
  Symplectic S = check_symplectic(A, volume(A, A.one()));
  DiffForm alpha = A.zero_form(1);
  alpha.comp[1] = A.coordinate(0);
  RestrictedStructure R = restricted_from(A, S, alpha, FrobDeriv{{0, 0}});
  // constants have zero bracket with everything
  TruncPoly a = A.constant(2);
  SplitMix64 g(5);
  TruncPoly b = A.random_poly(g);
  TruncPoly lhs = R.pow(A.mul(a, b));
  TruncPoly rhs = A.add(A.scale(A.frobenius(a), R.pow(b)), A.scale(A.frobenius(b), R.pow(a)));
  REQUIRE(lhs == rhs);
}

TEST_CASE("kappa round-trips through the conformal formula") {
  AlgebraCtx A(Prime(3), 2);
  SplitMix64 g(29);
  for (int t = 0; t < 3; ++t) {
    Symplectic S = random_exact_symplectic(A, g);
    auto alpha = A.is_exact(S.form);
    FrobDeriv kappa0{{g.below(3), g.below(3)}};
    RestrictedStructure R = restricted_from(A, S, *alpha, kappa0);
    Derivation xi = field_from_oneform(A, S, *alpha);
    FrobDeriv recovered =
        kappa_of(A, S, [&](const TruncPoly& a) { return R.pow(a); }, xi, 1, 16, 99 + t);
    REQUIRE(recovered == kappa0);
  }
}

TEST_CASE("kappa_of is linear in the structure") {
  AlgebraCtx A(Prime(3), 2);
  SplitMix64 g(31);
  Symplectic S = random_exact_symplectic(A, g);
  auto alpha = A.is_exact(S.form);
  FrobDeriv k1{{1, 2}}, k2{{2, 0}};
  RestrictedStructure R1 = restricted_from(A, S, *alpha, k1);
  RestrictedStructure R2 = restricted_from(A, S, *alpha, k2);
  Derivation xi = field_from_oneform(A, S, *alpha);
  FrobDeriv a = kappa_of(A, S, [&](const TruncPoly& v) { return R1.pow(v); }, xi, 1);
  FrobDeriv b = kappa_of(A, S, [&](const TruncPoly& v) { return R2.pow(v); }, xi, 1);
  for (unsigned i = 0; i < A.vars(); ++i)
    REQUIRE(A.field().sub(a.values[i], b.values[i]) ==
            A.field().sub(k1.values[i], k2.values[i]));
}

TEST_CASE("Hamiltonian criterion for Poisson derivations") {
  AlgebraCtx A(Prime(3), 2);
  Symplectic S = check_symplectic(A, volume(A, A.one()));
  DiffForm alpha = A.zero_form(1);
  alpha.comp[1] = A.coordinate(0);
  RestrictedStructure R = restricted_from(A, S, alpha, FrobDeriv{{0, 0}});
  PowerMap pw = [&](const TruncPoly& a) { return R.pow(a); };
  SECTION("Hamiltonian fields satisfy the identity") {
    SplitMix64 g(37);
    for (int t = 0; t < 5; ++t) {
      Derivation xi = hamiltonian(A, S, A.random_poly(g));
      auto [h, id] = ravno_check(A, S, pw, xi, 16, 7 + t);
      REQUIRE(h);
      REQUIRE(id);
    }
  }
  SECTION("Poisson field with nonzero Cartier class fails both") {
    // xi . Omega = the canonical class representative: closed, not exact
    Derivation xi = field_from_oneform(A, S, A.class_representative(1, 0));
    auto [h, id] = ravno_check(A, S, pw, xi, 16, 11);
    REQUIRE_FALSE(h);
    REQUIRE_FALSE(id);
  }
  SECTION("zero derivation passes trivially") {
    auto [h, id] = ravno_check(A, S, pw, A.zero_derivation(), 4, 1);
    REQUIRE(h);
    REQUIRE(id);
  }
}

TEST_CASE("difference of restricted structures") {
  AlgebraCtx A(Prime(3), 2);
  SplitMix64 g(41);
  Symplectic S = random_exact_symplectic(A, g);
  auto alpha = A.is_exact(S.form);
  FrobDeriv k1{{1, 2}}, k2{{0, 1}};
  RestrictedStructure R1 = restricted_from(A, S, *alpha, k1);
  RestrictedStructure R2 = restricted_from(A, S, *alpha, k2);
  SECTION("same structure gives zero") {
    FrobDeriv d = difference_of(A, R1, R1);
    REQUIRE(d.values == std::vector<Scalar>{0, 0});
  }
  SECTION("same potential, different kappa: difference is kappa1 - kappa2") {
    FrobDeriv d = difference_of(A, R1, R2);
    for (unsigned i = 0; i < 2; ++i)
      REQUIRE(d.values[i] == A.field().sub(k2.values[i], k1.values[i]));
    // pow subtracts kappa, so R1 - R2 = kappa2 - kappa1
  }
  SECTION("exact shifts of the potential are invisible") {
    TruncPoly gpoly = A.random_poly(g);
    DiffForm shifted = A.add(*alpha, A.de_rham(gpoly));
    RestrictedStructure R3 = restricted_from(A, S, shifted, k1);
    FrobDeriv d = difference_of(A, R1, R3);
    REQUIRE(d.values == std::vector<Scalar>{0, 0});
  }
  SECTION("closed non-exact shift changes the structure") {
    DiffForm shifted = A.add(*alpha, A.class_representative(1, 0));
    RestrictedStructure R4 = restricted_from(A, S, shifted, k1);
    bool same = true;
    for (unsigned idx = 0; idx < A.dim(); ++idx)
      if (!(R1.pow(A.monomial(idx)) == R4.pow(A.monomial(idx)))) same = false;
    REQUIRE_FALSE(same);
  }
}

TEST_CASE("pullback of substitutions") {
  AlgebraCtx A(Prime(3), 2);
  TruncPoly x = A.coordinate(0), y = A.coordinate(1);
  SECTION("identity substitution acts as the identity") {
    Substitution id = identity_substitution(A);
    SplitMix64 g(43);
    TruncPoly f = A.random_poly(g);
    REQUIRE(pullback(A, id, f) == f);
  }
  SECTION("chain rule: x -> x + 2x^2 pulls dx back to (1+x) dx") {
    Substitution phi = make_substitution(A, {A.add(x, A.scale(2, A.mul(x, x))), y});
    DiffForm dx = A.zero_form(1);
    dx.comp[0] = A.one();
    DiffForm r = pullback(A, phi, dx);
    REQUIRE(r.comp[0] == A.add(A.one(), x));
    REQUIRE(r.comp[1].is_zero());
  }
  SECTION("pullback commutes with d") {
    SplitMix64 g(47);
    for (int t = 0; t < 20; ++t) {
      TruncPoly f0 = A.random_poly(g), f1 = A.random_poly(g);
      f0.c[0] = 0;
      f1.c[0] = 0;
      Substitution phi;
      try {
        phi = make_substitution(A, {f0, f1});
      } catch (const BadParams&) {
        continue;  // singular draw
      }
      TruncPoly f = A.random_poly(g);
      REQUIRE(pullback(A, phi, A.de_rham(f)) == A.de_rham(pullback(A, phi, f)));
    }
  }
  SECTION("validation rejects nonzero constant terms and singular Jacobians") {
    REQUIRE_THROWS_AS(make_substitution(A, {A.one(), y}), BadParams);
    REQUIRE_THROWS_AS(make_substitution(A, {x, x}), BadParams);
  }
}

TEST_CASE("Darboux normalization") {
  AlgebraCtx A(Prime(3), 2);
  TruncPoly x = A.coordinate(0), y = A.coordinate(1);
  DiffForm std_form = standard_symplectic_form(A);
  SECTION("standard form normalizes to itself") {
    Symplectic S = check_symplectic(A, std_form);
    Substitution phi = darboux_normalize(A, S);
    REQUIRE(pullback(A, phi, std_form) == S.form);
  }
  SECTION("the planted example (1+x) dx^dy") {
    Symplectic S = check_symplectic(A, volume(A, A.add(A.one(), x)));
    // the hand substitution x -> x + 2x^2 works ...
    Substitution hand = make_substitution(A, {A.add(x, A.scale(2, A.mul(x, x))), y});
    REQUIRE(pullback(A, hand, std_form) == S.form);
    // ... and the solver finds one with an exact pullback certificate
    Substitution phi = darboux_normalize(A, S);
    REQUIRE(pullback(A, phi, std_form) == S.form);
  }
  SECTION("50 seeded symplectic forms with vanishing Cartier class") {
    SplitMix64 g(4242);
    for (int t = 0; t < 50; ++t) {
      Symplectic S = random_exact_symplectic(A, g);
      Substitution phi = darboux_normalize(A, S, 1000 + t);
      REQUIRE(pullback(A, phi, std_form) == S.form);
    }
  }
  SECTION("nonzero Cartier class is rejected") {
    DiffForm w = A.add(std_form, A.class_representative(2, 0));
    Symplectic S = check_symplectic(A, w);
    REQUIRE_THROWS_AS(darboux_normalize(A, S), BadParams);
  }
}
