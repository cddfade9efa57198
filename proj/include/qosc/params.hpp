// Parameter points and deterministic sampling.  A ParamPoint fixes the
// deformation parameter q, the Verma parameter through u = q^{mu/2} (only
// integer powers of u ever appear), the two boundary parameters xi and
// xitilde, and the fusion twist r.  Spectral values (z, y, z2) are sampled
// per suite from the embedded spectral seed, subject to the same kind of
// forbidden-factor certificates.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qosc/errors.hpp"
#include "qosc/rational.hpp"

namespace qosc {

// Largest truncation any acceptance run uses; the root-of-unity proxy is
// bounded in terms of it because no truncated computation sees a q-integer
// beyond that range.
inline constexpr int kNMax = 12;
inline constexpr int kRootOfUnityBound = 4 * (kNMax + 4);

struct ParamPoint {
  Rational q{2, 3};
  Rational u{3, 5};
  Rational xi{5, 7};
  Rational xitilde{7, 4};
  Rational r{5, 11};
  std::uint64_t spectral_seed = 0;
  // Explicit spectral overrides (keys among "z", "y", "z2"); when present
  // they replace sampled values in every suite.
  std::map<std::string, Rational> overrides;

  std::map<std::string, std::string> to_map() const;
  static ParamPoint from_map(const std::map<std::string, std::string>& m);
};

struct Constraint {
  std::string label;
  std::function<bool(const ParamPoint&)> ok;
};

// The standing genericity certificates: q, u, xi, xitilde, r nonzero and
// pairwise distinct; q^k != 1 and u^k != 1 for 1 <= k <= kRootOfUnityBound;
// u^4 != q^(2j) (keeps every Verma ladder coefficient nonzero on the
// truncation); r^2 != q^(2k).
const std::vector<Constraint>& default_constraints();

// Throws AdmissibilityError naming the violated certificate.
void require_admissible(const ParamPoint& p);

// Assigns one key=value override onto p; keys: q, u, xi, xitilde, r,
// spectral_seed, and the spectral roles z, y, z2.  Unknown keys throw.
void set_param(ParamPoint& p, const std::string& key, const std::string& value);

// Deterministic in seed; resamples on constraint violation with a bounded
// retry budget, then throws SampleError.
ParamPoint sample_params(std::uint64_t seed);
ParamPoint sample_params(std::uint64_t seed, const std::vector<Constraint>& constraints);

// True when `value` is usable as a spectral point at truncation N: nonzero,
// and value^2 avoids q^k * u^s * {1, xi^{+-1}, xitilde^{+-1}} for all
// |k| <= kRootOfUnityBound, |s| <= 4.  This blanket list covers every
// Pochhammer factor and graded-block determinant of the operators in scope
// at their substituted arguments (u^{+-1} z, q z, q^2 z, z^2, ...).
bool spectral_admissible(const ParamPoint& p, const Rational& value, int N);

// Stream of admissible spectral values, deterministic in the ParamPoint's
// spectral seed and the salt (typically the suite id).  Values for a role
// listed in ParamPoint::overrides are returned from there instead.
class SpectralSampler {
 public:
  SpectralSampler(const ParamPoint& p, const std::string& salt, int N);
  Rational sample(const std::string& role);

 private:
  const ParamPoint params_;
  int N_;
  std::uint64_t state_;
  std::uint64_t next_raw();
};

}  // namespace qosc
