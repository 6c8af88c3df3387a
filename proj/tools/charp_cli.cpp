// charp: exact verification kernel for characteristic-p symplectic calculus.
//
// Subcommands:
//   verify <suite>   run a named verification suite, emit a JSON report
//   universal L|P    print a universal polynomial
//   cartier          Cartier image of a closed form
//   darboux          normalize a symplectic form to the standard one
//   weyl center|fiber|power   reduced Weyl algebra computations
//
// Exit codes: 0 all checks passed, 1 verification failures, 2 usage errors.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "charp/report_json.hpp"
#include "charp/suites.hpp"

using json = nlohmann::ordered_json;
using namespace charp;
using suites::report_to_json;

namespace {

void emit(const json& j, const std::string& out_path) {
  std::string body = j.dump(2);
  body += "\n";
  if (out_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw BadParams("cannot open output file " + out_path);
    out << body;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact computer-algebra kernel for characteristic-p symplectic calculus"};
  app.require_subcommand(1);

  unsigned p = 0, m = 0, n = 0, N = 0, samples = 0;
  std::uint64_t seed = 42;
  std::string out_path, form_text, elt_text, suite_name, poly_kind;
  unsigned fiber_c = 1;
  bool timings = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--p", p, "odd prime (3..13)");
    cmd->add_option("--m", m, "variable count");
    cmd->add_option("--n", n, "pair count for the Weyl algebra");
    cmd->add_option("--trunc", N, "h-truncation level");
    cmd->add_option("--samples", samples, "seeded sample count");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--out", out_path, "write the JSON report to a file");
  };

  CLI::App* verify = app.add_subcommand("verify", "run a named verification suite");
  verify->add_option("suite", suite_name, "suite name")->required();
  add_common(verify);
  verify->add_flag("--timings", timings, "include wall time in the report");

  CLI::App* universal = app.add_subcommand("universal", "print a universal polynomial");
  universal->add_option("which", poly_kind, "L or P")->required();
  universal->add_option("--p", p, "odd prime")->required();

  CLI::App* cartier_cmd = app.add_subcommand("cartier", "Cartier image of a closed form");
  cartier_cmd->add_option("--p", p)->required();
  cartier_cmd->add_option("--m", m)->required();
  cartier_cmd->add_option("--form", form_text, "form in the text grammar")->required();

  CLI::App* darboux_cmd = app.add_subcommand("darboux", "normalize a symplectic form");
  darboux_cmd->add_option("--p", p)->required();
  darboux_cmd->add_option("--m", m)->required();
  darboux_cmd->add_option("--form", form_text, "symplectic 2-form")->required();
  darboux_cmd->add_option("--seed", seed);

  CLI::App* weyl_cmd = app.add_subcommand("weyl", "reduced Weyl algebra computations");
  weyl_cmd->require_subcommand(1);
  CLI::App* weyl_center = weyl_cmd->add_subcommand("center", "basis of the center");
  weyl_center->add_option("--p", p)->required();
  weyl_center->add_option("--n", n)->required();
  weyl_center->add_option("--trunc", N)->required();
  CLI::App* weyl_fiber = weyl_cmd->add_subcommand("fiber", "matrix-algebra fiber check");
  weyl_fiber->add_option("--p", p)->required();
  weyl_fiber->add_option("--n", n)->required();
  weyl_fiber->add_option("--c", fiber_c, "fiber parameter h = c != 0")->required();
  weyl_fiber->add_option("--trunc", N);
  weyl_fiber->add_option("--out", out_path);
  CLI::App* weyl_power = weyl_cmd->add_subcommand("power", "canonical p-th power operation");
  weyl_power->add_option("--p", p)->required();
  weyl_power->add_option("--n", n)->required();
  weyl_power->add_option("--trunc", N)->required();
  weyl_power->add_option("--elt", elt_text, "element in the text grammar")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*verify) {
      suites::Params prm;
      prm.p = p;
      prm.m = m;
      prm.n = n;
      prm.N = N;
      prm.samples = samples;
      prm.seed = seed;
      suites::SuiteReport rep = suites::run_suite(suite_name, prm);
      emit(report_to_json(rep, timings), out_path);
      return rep.ok() ? 0 : 1;
    }
    if (*universal) {
      freealg::FreeAlgCtx FA(Prime(p), 2);
      if (poly_kind == "L") {
        std::cout << text::show(FA, FA.compute_L().tensor) << "\n";
      } else if (poly_kind == "P") {
        freealg::UniversalP P = FA.compute_P();
        std::cout << text::show_quant(FA, freealg::QuantElt{P.tensor, P.level}) << "\n";
      } else {
        throw BadParams("universal expects L or P");
      }
      return 0;
    }
    if (*cartier_cmd) {
      trunccalc::AlgebraCtx A(Prime(p), m);
      trunccalc::DiffForm w = text::parse_form(A, form_text);
      std::cout << text::show(A, A.cartier(w)) << "\n";
      return 0;
    }
    if (*darboux_cmd) {
      trunccalc::AlgebraCtx A(Prime(p), m);
      trunccalc::DiffForm w = text::parse_form(A, form_text);
      poissonrestr::Symplectic S = poissonrestr::check_symplectic(A, w);
      poissonrestr::Substitution phi = poissonrestr::darboux_normalize(A, S, seed);
      std::cout << text::show_substitution(A, phi.images) << "\n";
      return 0;
    }
    if (*weyl_cmd) {
      if (*weyl_center) {
        weylquant::WeylCtx W(Prime(p), n, N);
        for (auto& z : weylquant::center_basis(W)) std::cout << text::show(W, z) << "\n";
        return 0;
      }
      if (*weyl_fiber) {
        weylquant::WeylCtx W(Prime(p), n, N ? N : 4);
        suites::SuiteReport rep;
        rep.suite = "weyl-fiber";
        rep.params.p = p;
        rep.params.n = n;
        suites::absorb(rep, weylquant::fiber_matrix_iso(W, fiber_c),
                       "fiber c=" + std::to_string(fiber_c));
        emit(report_to_json(rep, false), out_path);
        return rep.ok() ? 0 : 1;
      }
      if (*weyl_power) {
        weylquant::WeylCtx W(Prime(p), n, N);
        weylquant::WeylElt f = text::parse_weyl(W, elt_text);
        weylquant::SplittingData s = weylquant::canonical_splitting(W);
        weylquant::WeylElt v = weylquant::p_power(W, f, s);
        std::cout << text::show(W, v) << "  (valid below h^" << v.trunc << ")\n";
        return 0;
      }
    }
  } catch (const UnknownSuite& e) {
    std::cerr << "error: unknown suite: " << e.what() << "\n";
    return 2;
  } catch (const BadParams& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
