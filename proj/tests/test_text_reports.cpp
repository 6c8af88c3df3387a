#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>

#include "charp/report_json.hpp"
#include "charp/rng.hpp"
#include "charp/text.hpp"

using namespace charp;
using trunccalc::AlgebraCtx;

TEST_CASE("polynomial grammar round-trips") {
  AlgebraCtx A(Prime(3), 2);
  SECTION("parse canonical forms") {
    REQUIRE(text::parse_poly(A, "0").is_zero());
    REQUIRE(text::parse_poly(A, "1") == A.one());
    REQUIRE(text::parse_poly(A, "2*x0^2*x1 + x1 + 2") ==
            A.add(A.add(A.scale(2, A.mul(A.mul(A.coordinate(0), A.coordinate(0)),
                                         A.coordinate(1))),
                        A.coordinate(1)),
                  A.constant(2)));
  }
  SECTION("aliases and minus signs") {
    REQUIRE(text::parse_poly(A, "x") == A.coordinate(0));
    REQUIRE(text::parse_poly(A, "y") == A.coordinate(1));
    REQUIRE(text::parse_poly(A, "-x0") == A.scale(2, A.coordinate(0)));
    REQUIRE(text::parse_poly(A, "1 - x + x^2") ==
            A.add(A.sub(A.one(), A.coordinate(0)), A.mul(A.coordinate(0), A.coordinate(0))));
  }
  SECTION("show/parse round-trip on seeded polynomials") {
    SplitMix64 g(11);
    for (int t = 0; t < 40; ++t) {
      trunccalc::TruncPoly f = A.random_poly(g);
      REQUIRE(text::parse_poly(A, text::show(A, f)) == f);
    }
  }
  SECTION("rejects malformed input") {
    REQUIRE_THROWS_AS(text::parse_poly(A, "x5"), ParseError);
    REQUIRE_THROWS_AS(text::parse_poly(A, "x0 dx0"), ParseError);
    REQUIRE_THROWS_AS(text::parse_poly(A, "q"), ParseError);
  }
}

TEST_CASE("form grammar round-trips") {
  AlgebraCtx A(Prime(3), 2);
  SECTION("wedge ordering and signs") {
    trunccalc::DiffForm a = text::parse_form(A, "dx0^dx1");
    trunccalc::DiffForm b = text::parse_form(A, "-dx1^dx0");
    REQUIRE(a == b);
    REQUIRE_THROWS_AS(text::parse_form(A, "dx0^dx0"), ParseError);
    REQUIRE_THROWS_AS(text::parse_form(A, "dx0 + dx0^dx1"), ParseError);
  }
  SECTION("seeded round-trips at each degree") {
    SplitMix64 g(13);
    for (unsigned k = 0; k <= 2; ++k)
      for (int t = 0; t < 20; ++t) {
        trunccalc::DiffForm w = A.zero_form(k);
        for (auto& f : w.comp) f = A.random_poly(g);
        REQUIRE(text::parse_form(A, text::show(A, w)) == w);
      }
  }
  SECTION("spec planted example") {
    AlgebraCtx B(Prime(3), 1);
    trunccalc::DiffForm w = text::parse_form(B, "x^2 dx0");
    REQUIRE(w.degree == 1);
    REQUIRE(w.comp[0] == B.pow(B.coordinate(0), 2));
  }
}

TEST_CASE("weyl grammar round-trips") {
  weylquant::WeylCtx W(Prime(3), 1, 4);
  SECTION("canonical terms") {
    weylquant::WeylElt u = text::parse_weyl(W, "2*x0^2 y0 h^2 + x0 y0 + 1");
    REQUIRE(text::show(W, u) == "1 + x0 y0 + 2*x0^2 y0 h^2");
  }
  SECTION("seeded round-trips") {
    SplitMix64 g(17);
    for (int t = 0; t < 30; ++t) {
      weylquant::WeylElt u = W.random_elt(g);
      REQUIRE(W.eq_at(text::parse_weyl(W, text::show(W, u)), u, W.trunc_level()));
    }
  }
}

TEST_CASE("tensor printing") {
  freealg::FreeAlgCtx FA(Prime(3), 2);
  freealg::UniversalL L = FA.compute_L();
  REQUIRE(text::show(FA, L.tensor) == "xxy + xyx + xyy + yxx + yxy + yyx");
  freealg::QuantElt q{FA.t_gen(0), 2};
  REQUIRE(text::show_quant(FA, q) == "(x, level=2)");
  REQUIRE(text::show(FA, freealg::TensorElt{}) == "0");
}

TEST_CASE("reports are byte-deterministic") {
  suites::Params prm;
  prm.seed = 4242;
  SECTION("same spec, same bytes") {
    auto a = suites::run_suite("car-p", prm);
    auto b = suites::run_suite("car-p", prm);
    REQUIRE(suites::report_to_json(a).dump() == suites::report_to_json(b).dump());
  }
  SECTION("worker count does not change the bytes") {
    auto a = suites::run_suite("theorem-cent", prm);
    setenv("CHARP_THREADS", "4", 1);
    auto b = suites::run_suite("theorem-cent", prm);
    unsetenv("CHARP_THREADS");
    REQUIRE(suites::report_to_json(a).dump() == suites::report_to_json(b).dump());
  }
  SECTION("exit contract data: failed = 0 iff no counterexamples") {
    auto rep = suites::run_suite("hI", prm);
    REQUIRE(rep.ok());
    REQUIRE(rep.counterexamples.empty());
    REQUIRE(rep.cases == rep.passed);
  }
}

TEST_CASE("unknown suites are rejected") {
  suites::Params prm;
  REQUIRE_THROWS_AS(suites::run_suite("no-such-suite", prm), UnknownSuite);
}
