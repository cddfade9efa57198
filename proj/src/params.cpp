#include "qosc/params.hpp"

#include <array>

namespace qosc {

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Small positive fraction a/b with a != b, both in [2, 13]; the bound keeps
// every certificate comparison cheap and the fraction away from 0 and 1.
Rational draw_fraction(std::uint64_t& state) {
  for (;;) {
    const long a = 2 + static_cast<long>(splitmix64(state) % 12);
    const long b = 2 + static_cast<long>(splitmix64(state) % 12);
    if (a != b) return Rational(a, b);
  }
}

bool not_root_of_unity(const Rational& x, int bound) {
  Rational power(1);
  for (int k = 1; k <= bound; ++k) {
    power *= x;
    if (power.is_one()) return false;
  }
  return true;
}

constexpr int kMaxSampleAttempts = 512;

}  // namespace

std::map<std::string, std::string> ParamPoint::to_map() const {
  std::map<std::string, std::string> m;
  m["q"] = q.to_string();
  m["u"] = u.to_string();
  m["xi"] = xi.to_string();
  m["xitilde"] = xitilde.to_string();
  m["r"] = r.to_string();
  m["spectral_seed"] = std::to_string(spectral_seed);
  for (const auto& [key, value] : overrides) m[key] = value.to_string();
  return m;
}

void set_param(ParamPoint& p, const std::string& key, const std::string& value) {
  if (key == "spectral_seed") {
    p.spectral_seed = std::stoull(value);
    return;
  }
  const Rational v = Rational::from_string(value);
  if (key == "q")
    p.q = v;
  else if (key == "u")
    p.u = v;
  else if (key == "xi")
    p.xi = v;
  else if (key == "xitilde")
    p.xitilde = v;
  else if (key == "r")
    p.r = v;
  else if (key == "z" || key == "y" || key == "z2")
    p.overrides[key] = v;
  else
    throw AdmissibilityError("unknown parameter key \"" + key + "\"");
}

ParamPoint ParamPoint::from_map(const std::map<std::string, std::string>& m) {
  ParamPoint p;
  for (const auto& [key, value] : m) set_param(p, key, value);
  return p;
}

const std::vector<Constraint>& default_constraints() {
  static const std::vector<Constraint> constraints = [] {
    std::vector<Constraint> cs;
    cs.push_back({"q nonzero", [](const ParamPoint& p) { return !p.q.is_zero(); }});
    cs.push_back({"u nonzero", [](const ParamPoint& p) { return !p.u.is_zero(); }});
    cs.push_back({"xi nonzero", [](const ParamPoint& p) { return !p.xi.is_zero(); }});
    cs.push_back({"xitilde nonzero", [](const ParamPoint& p) { return !p.xitilde.is_zero(); }});
    cs.push_back({"r nonzero", [](const ParamPoint& p) { return !p.r.is_zero(); }});
    cs.push_back({"q not a root of unity up to the proxy bound",
                  [](const ParamPoint& p) { return not_root_of_unity(p.q, kRootOfUnityBound); }});
    cs.push_back({"u not a root of unity up to the proxy bound",
                  [](const ParamPoint& p) { return not_root_of_unity(p.u, kRootOfUnityBound); }});
    cs.push_back({"u^4 avoids even q-powers (Verma ladder nonvanishing)",
                  [](const ParamPoint& p) {
                    const Rational u4 = p.u.pow(4);
                    const Rational q2 = p.q * p.q;
                    Rational power = q2.pow(-kRootOfUnityBound - 1);
                    for (int j = -kRootOfUnityBound; j <= kRootOfUnityBound; ++j) {
                      power *= q2;
                      if (u4 == power) return false;
                    }
                    return true;
                  }});
    cs.push_back({"r^2 avoids even q-powers (fusion genericity)",
                  [](const ParamPoint& p) {
                    const Rational r2 = p.r * p.r;
                    const Rational q2 = p.q * p.q;
                    Rational power = q2.pow(-kRootOfUnityBound - 1);
                    for (int k = -kRootOfUnityBound; k <= kRootOfUnityBound; ++k) {
                      power *= q2;
                      if (r2 == power) return false;
                    }
                    return true;
                  }});
    cs.push_back({"q, u, xi, xitilde, r pairwise distinct",
                  [](const ParamPoint& p) {
                    const std::array<Rational, 5> v = {p.q, p.u, p.xi, p.xitilde, p.r};
                    for (size_t i = 0; i < v.size(); ++i)
                      for (size_t j = i + 1; j < v.size(); ++j)
                        if (v[i] == v[j]) return false;
                    return true;
                  }});
    return cs;
  }();
  return constraints;
}

void require_admissible(const ParamPoint& p) {
  for (const auto& c : default_constraints())
    if (!c.ok(p)) throw AdmissibilityError("parameter certificate violated: " + c.label);
}

ParamPoint sample_params(std::uint64_t seed) { return sample_params(seed, default_constraints()); }

ParamPoint sample_params(std::uint64_t seed, const std::vector<Constraint>& constraints) {
  std::uint64_t state = seed;
  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    ParamPoint p;
    p.q = draw_fraction(state);
    p.u = draw_fraction(state);
    p.xi = draw_fraction(state);
    if (splitmix64(state) & 1) p.xi = -p.xi;
    p.xitilde = draw_fraction(state);
    if (splitmix64(state) & 1) p.xitilde = -p.xitilde;
    p.r = draw_fraction(state);
    p.spectral_seed = seed;
    bool ok = true;
    for (const auto& c : constraints)
      if (!c.ok(p)) {
        ok = false;
        break;
      }
    if (ok) return p;
  }
  throw SampleError("sample_params: retry budget exhausted; constraints admit no sampled point");
}

bool spectral_admissible(const ParamPoint& p, const Rational& value, int N) {
  if (value.is_zero()) return false;
  const int bound = 4 * (N + 4) > kRootOfUnityBound ? kRootOfUnityBound : 4 * (N + 4);
  const Rational v2 = value * value;
  // Targets t with the property that v2 == q^k u^s t for some admissible
  // factor would make a certificate fail; compare v2/t against q^k u^s.
  const std::array<Rational, 5> targets = {
      v2, v2 / p.xi, v2 * p.xi, v2 / p.xitilde, v2 * p.xitilde};
  std::array<Rational, 9> upowers;
  for (int s = -4; s <= 4; ++s) upowers[static_cast<size_t>(s + 4)] = p.u.pow(s);
  Rational qk = p.q.pow(-bound - 1);
  for (int k = -bound; k <= bound; ++k) {
    qk *= p.q;
    for (const Rational& us : upowers) {
      const Rational m = qk * us;
      for (const Rational& t : targets)
        if (t == m) return false;
    }
  }
  return true;
}

SpectralSampler::SpectralSampler(const ParamPoint& p, const std::string& salt, int N)
    : params_(p), N_(N), state_(p.spectral_seed ^ fnv1a64(salt)) {}

std::uint64_t SpectralSampler::next_raw() { return splitmix64(state_); }

Rational SpectralSampler::sample(const std::string& role) {
  const auto it = params_.overrides.find(role);
  if (it != params_.overrides.end()) {
    if (!spectral_admissible(params_, it->second, N_))
      throw AdmissibilityError("spectral override " + role + "=" + it->second.to_string() +
                               " violates the forbidden-factor certificate");
    return it->second;
  }
  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    const long a = 2 + static_cast<long>(next_raw() % 12);
    const long b = 2 + static_cast<long>(next_raw() % 12);
    if (a == b) continue;
    const Rational v(a, b);
    if (spectral_admissible(params_, v, N_)) return v;
  }
  throw SampleError("spectral sampling: retry budget exhausted for role " + role);
}

}  // namespace qosc
