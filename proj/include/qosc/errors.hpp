// Error taxonomy.  The CLI maps AdmissibilityError/SampleError/ShapeError to
// exit code 2 (configuration fault); verification failures are ordinary
// Reports, never exceptions.
#pragma once

#include <stdexcept>
#include <string>

namespace qosc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A parameter or spectral value violates a genericity certificate.
struct AdmissibilityError : Error {
  using Error::Error;
};

// sample_params exhausted its retry budget against the given constraints.
struct SampleError : Error {
  using Error::Error;
};

// qexp_nilpotent received a matrix that is not nilpotent.
struct NonNilpotentError : Error {
  using Error::Error;
};

// agree_on_window had nothing to compare: the exactness windows of the two
// operands do not intersect at this truncation.  Distinct from inequality.
struct EmptyWindowError : Error {
  using Error::Error;
};

// Exact blockwise inversion hit a singular graded block.
struct SingularBlockError : Error {
  using Error::Error;
};

// A solver found a solution-space dimension outside its declared expectation.
struct DimensionError : Error {
  using Error::Error;
};

// Operator/space shape mismatch: wrong leg count, leg kind, or sizes.
struct ShapeError : Error {
  using Error::Error;
};

}  // namespace qosc
