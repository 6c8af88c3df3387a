#pragma once

#include <string>

namespace charp {

// Tally for a verification pass; failed == 0 iff no counterexample was found.
struct VerifyReport {
  unsigned long cases = 0;
  unsigned long failed = 0;
  std::string first_counterexample;

  bool ok() const { return failed == 0; }

  void record(bool pass, const std::string& witness) {
    ++cases;
    if (!pass) {
      if (failed == 0) first_counterexample = witness;
      ++failed;
    }
  }
  void merge(const VerifyReport& other) {
    cases += other.cases;
    if (failed == 0 && other.failed) first_counterexample = other.first_counterexample;
    failed += other.failed;
  }
};

}  // namespace charp
