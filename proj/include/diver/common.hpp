#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace diver {

using NodeId = std::uint32_t;

/// Per-node opinions in [0,1].
using OpinionVector = std::vector<double>;

/// Selects between the serial reference kernels and their OpenMP counterparts.
/// Serial results are bitwise reproducible; parallel ones agree to ~1e-12.
enum class Exec { serial, parallel };

/// Domain failure: invalid input data or a numerical precondition that does not hold.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when an MFPT value needed by a closed-form formula is unavailable.
class MissingMfpt : public Error {
public:
    using Error::Error;
};

/// Thrown when rational selfishness fails for the row an edge is added to.
class AssumptionViolated : public Error {
public:
    using Error::Error;
};

} // namespace diver
