#pragma once

#include <stdexcept>
#include <string>

namespace charp {

// Base class for all contract violations raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define CHARP_ERROR_TYPE(Name)                                       \
  class Name : public Error {                                        \
  public:                                                            \
    explicit Name(const std::string& w) : Error(#Name ": " + w) {}   \
  };

CHARP_ERROR_TYPE(BadParams)            // invalid (p, m, n, N, ...) combination
CHARP_ERROR_TYPE(UnknownSuite)         // verify called with an unknown suite name
CHARP_ERROR_TYPE(ParseError)           // text grammar rejected the input
CHARP_ERROR_TYPE(DegreeCapExceeded)    // tensor product overflows the configured cap
CHARP_ERROR_TYPE(LevelViolation)       // quantized element fails its filtration level
CHARP_ERROR_TYPE(NotLieElement)        // expansion not inside the free Lie subspace
CHARP_ERROR_TYPE(NotClosed)            // operation requires a de Rham closed form
CHARP_ERROR_TYPE(NotExact)             // no potential exists for the given form
CHARP_ERROR_TYPE(Degenerate)           // symplectic Gram matrix singular at the origin
CHARP_ERROR_TYPE(PotentialMismatch)    // d(potential) differs from the symplectic form
CHARP_ERROR_TYPE(NotDerivation)        // candidate operator violates the Leibniz rule
CHARP_ERROR_TYPE(NotCentral)           // values escape the Poisson center
CHARP_ERROR_TYPE(NotFrobenius)         // map fails the Frobenius-derivation laws
CHARP_ERROR_TYPE(NotDivisible)         // exact division by a power of h failed
CHARP_ERROR_TYPE(NormalizationFailed)  // no substitution found within the iteration budget

#undef CHARP_ERROR_TYPE

}  // namespace charp
