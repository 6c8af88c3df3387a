#pragma once

#include <json.hpp>

#include "charp/suites.hpp"

namespace charp::suites {

// Deterministic JSON rendering: field order fixed, wall time opt-in so that
// identical (suite, params, seed) produce byte-identical reports.
inline nlohmann::ordered_json report_to_json(const SuiteReport& rep, bool timings = false) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["suite"] = rep.suite;
  nlohmann::ordered_json p;
  p["p"] = rep.params.p;
  p["m"] = rep.params.m;
  p["n"] = rep.params.n;
  p["N"] = rep.params.N;
  p["samples"] = rep.params.samples;
  p["seed"] = rep.params.seed;
  j["params"] = p;
  j["cases"] = rep.cases;
  j["passed"] = rep.passed;
  j["failed"] = rep.failed;
  nlohmann::ordered_json cex = nlohmann::ordered_json::array();
  for (auto& c : rep.counterexamples) {
    nlohmann::ordered_json e;
    e["case"] = c.index;
    e["input"] = c.counterexample;
    cex.push_back(e);
  }
  j["counterexamples"] = cex;
  if (timings) j["wall_ms"] = rep.wall_ms;
  return j;
}

}  // namespace charp::suites
