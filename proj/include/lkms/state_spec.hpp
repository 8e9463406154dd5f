#pragma once

// Momentum-space description of the supported states: vacuum, KMS, hot-bang
// and finite mixtures of KMS states, plus the one-dimensional time-axis
// spectra in closed form.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "lkms/minkowski.hpp"

namespace lkms {

inline constexpr double kSpectrumNorm = 1.0 / (2.0 * std::numbers::sqrt2 * 5.568327996831708);
// 5.568327996831708 = pi^{3/2}; overall factor 1/(2 sqrt(2) pi^{3/2}).

struct VacuumState {
  double mass = 0.0;
};
struct KmsState {
  double mass = 0.0;
  InverseTemperatureVector beta;
};
struct HotBangState {
  double A = 1.0;  // massless only; beta(q) grows linearly from the bang point
};
struct MixtureComponent {
  double weight = 0.0;
  InverseTemperatureVector beta;
};
struct MixtureState {
  double mass = 0.0;
  std::vector<MixtureComponent> components;
};

class StateSpec {
 public:
  using Variant = std::variant<VacuumState, KmsState, HotBangState, MixtureState>;

  static StateSpec vacuum(double mass) {
    check_mass(mass);
    return StateSpec(VacuumState{mass});
  }
  static StateSpec kms(double mass, const InverseTemperatureVector& beta) {
    check_mass(mass);
    return StateSpec(KmsState{mass, beta});
  }
  static StateSpec hot_bang(double A) {
    if (!(A > 0.0)) throw std::domain_error("StateSpec: hot-bang constant A must be positive");
    return StateSpec(HotBangState{A});
  }
  static StateSpec mixture(double mass, std::vector<MixtureComponent> components) {
    check_mass(mass);
    if (components.empty()) throw std::domain_error("StateSpec: empty mixture");
    double wsum = 0.0;
    for (const auto& c : components) {
      if (!(c.weight > 0.0)) throw std::domain_error("StateSpec: mixture weights must be positive");
      wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
      throw std::domain_error("StateSpec: mixture weights must sum to 1");
    return StateSpec(MixtureState{mass, std::move(components)});
  }

  const Variant& value() const { return v_; }

  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(v_);
  }
  template <typename T>
  const T& as() const {
    return std::get<T>(v_);
  }

  double mass() const {
    if (is<VacuumState>()) return as<VacuumState>().mass;
    if (is<KmsState>()) return as<KmsState>().mass;
    if (is<MixtureState>()) return as<MixtureState>().mass;
    return 0.0;  // hot-bang is massless by construction
  }

 private:
  explicit StateSpec(Variant v) : v_(std::move(v)) {}
  static void check_mass(double m) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw std::domain_error("StateSpec: mass must be >= 0");
  }
  Variant v_;
};

// Local inverse-temperature vector of the hot-bang state at base point q.
// The kernel exponent is A (x+y).p = 2A q.p at center q, so the factor
// relative to A q is 2; the extraction oracle in the test suite pins it.
inline constexpr double kHotBangFactor = 2.0;

inline InverseTemperatureVector hotbang_local_beta(const HotBangState& hb, const FourVector& q) {
  if (!is_future_timelike(q))
    throw std::domain_error("hotbang_local_beta: base point must lie in V_+");
  return InverseTemperatureVector(q * (kHotBangFactor * hb.A));
}

// Weights on the two mass-shell branches; the commutator normalization
// weight(+) - weight(-) = 1 holds for every supported state.
struct OnShellDensity {
  double mass = 0.0;
  // Mixture of Bose branches: weight(+) = sum w_i / (1 - exp(-beta_i . p)),
  // weight(-) = weight(+) - 1, with p = (omega, pvec) on the positive shell
  // in the evaluation frame. Vacuum contributes a sharp (+)-branch.
  std::vector<std::pair<double, FourVector>> thermal_terms;  // (weight, beta vector)
  double vacuum_weight = 0.0;

  double weight(int sign, double px, double py, double pz) const {
    const double omega = std::sqrt(px * px + py * py + pz * pz + mass * mass);
    double thermal = 0.0, bose = 0.0;
    for (const auto& [w, bv] : thermal_terms) {
      const double bp = bv.t * omega - bv.x * px - bv.y * py - bv.z * pz;
      thermal += w;
      bose += w / std::expm1(bp);
    }
    const double wplus = vacuum_weight + thermal + bose;
    return sign > 0 ? wplus : wplus - 1.0;
  }
};

inline OnShellDensity on_shell_density(const StateSpec& spec, const FourVector& base_point) {
  OnShellDensity d;
  d.mass = spec.mass();
  if (spec.is<VacuumState>()) {
    d.vacuum_weight = 1.0;
  } else if (spec.is<KmsState>()) {
    d.thermal_terms.push_back({1.0, spec.as<KmsState>().beta.vector()});
  } else if (spec.is<HotBangState>()) {
    const auto beta = hotbang_local_beta(spec.as<HotBangState>(), base_point);
    d.thermal_terms.push_back({1.0, beta.vector()});
  } else {
    for (const auto& c : spec.as<MixtureState>().components)
      d.thermal_terms.push_back({c.weight, c.beta.vector()});
  }
  return d;
}

// One-dimensional spectrum of the relative-time two-point function along the
// state's own time direction:
//   u^(k) = N eps(k) Theta(k^2-m^2) sqrt(k^2-m^2) / (1 - exp(-beta k)),
// N = 1/(2 sqrt2 pi^{3/2}); vacuum is the beta -> infinity limit.
inline std::complex<double> time_axis_spectrum(const StateSpec& spec, const FourVector& base_point,
                                               double k) {
  const double m = spec.mass();
  const double gap = k * k - m * m;
  if (gap <= 0.0) return 0.0;
  const double comm = kSpectrumNorm * (k > 0 ? 1.0 : -1.0) * std::sqrt(gap);

  auto bose = [&](double beta) {
    const double x = beta * k;
    // 1/(1-e^{-x}), evaluated stably on both tails.
    if (x > 0.0) return 1.0 / (1.0 - std::exp(-x));
    return -std::exp(x) / (1.0 - std::exp(x));
  };

  if (spec.is<VacuumState>()) return k > 0.0 ? comm : 0.0;
  if (spec.is<KmsState>()) return comm * bose(spec.as<KmsState>().beta.beta);
  if (spec.is<HotBangState>())
    return comm * bose(hotbang_local_beta(spec.as<HotBangState>(), base_point).beta);
  double w = 0.0;
  for (const auto& c : spec.as<MixtureState>().components) w += c.weight * bose(c.beta.beta);
  return comm * w;
}

// Spectrum of the relative-time commutator: E^(k) = -i N eps(k) Theta sqrt(k^2-m^2).
inline std::complex<double> commutator_spectrum(double mass, double k) {
  if (mass < 0.0) throw std::domain_error("commutator_spectrum: mass must be >= 0");
  const double gap = k * k - mass * mass;
  if (gap <= 0.0) return 0.0;
  return std::complex<double>(0.0, -kSpectrumNorm * (k > 0 ? 1.0 : -1.0) * std::sqrt(gap));
}

// ---- JSON (de)serialization -------------------------------------------------
//
// {"state":"vacuum","mass":1.0}
// {"state":"kms","mass":0.0,"beta":[1,0,0,0]}
// {"state":"hotbang","A":1.0}
// {"state":"mixture","mass":0,"components":[{"w":0.5,"beta":[1,0,0,0]},...]}
// Unknown keys are rejected.

namespace detail {

inline void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw std::domain_error("StateSpec JSON: unknown key '" + it.key() + "'");
  }
}

inline FourVector four_vector_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4)
    throw std::domain_error("StateSpec JSON: four-vector must be an array of 4 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace detail

inline StateSpec state_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("state"))
    throw std::domain_error("StateSpec JSON: missing 'state' tag");
  const std::string tag = j.at("state").get<std::string>();
  if (tag == "vacuum") {
    detail::require_keys(j, {"state", "mass"});
    return StateSpec::vacuum(j.at("mass").get<double>());
  }
  if (tag == "kms") {
    detail::require_keys(j, {"state", "mass", "beta"});
    return StateSpec::kms(j.at("mass").get<double>(),
                          InverseTemperatureVector(detail::four_vector_from_json(j.at("beta"))));
  }
  if (tag == "hotbang") {
    detail::require_keys(j, {"state", "A"});
    return StateSpec::hot_bang(j.at("A").get<double>());
  }
  if (tag == "mixture") {
    detail::require_keys(j, {"state", "mass", "components"});
    std::vector<MixtureComponent> comps;
    for (const auto& c : j.at("components")) {
      detail::require_keys(c, {"w", "beta"});
      comps.push_back({c.at("w").get<double>(),
                       InverseTemperatureVector(detail::four_vector_from_json(c.at("beta")))});
    }
    return StateSpec::mixture(j.at("mass").get<double>(), std::move(comps));
  }
  throw std::domain_error("StateSpec JSON: unknown state tag '" + tag + "'");
}

inline nlohmann::json state_spec_to_json(const StateSpec& spec) {
  nlohmann::json j;
  auto beta_array = [](const InverseTemperatureVector& b) {
    const FourVector v = b.vector();
    return nlohmann::json::array({v.t, v.x, v.y, v.z});
  };
  if (spec.is<VacuumState>()) {
    j["state"] = "vacuum";
    j["mass"] = spec.mass();
  } else if (spec.is<KmsState>()) {
    j["state"] = "kms";
    j["mass"] = spec.mass();
    j["beta"] = beta_array(spec.as<KmsState>().beta);
  } else if (spec.is<HotBangState>()) {
    j["state"] = "hotbang";
    j["A"] = spec.as<HotBangState>().A;
  } else {
    j["state"] = "mixture";
    j["mass"] = spec.mass();
    auto arr = nlohmann::json::array();
    for (const auto& c : spec.as<MixtureState>().components)
      arr.push_back({{"w", c.weight}, {"beta", beta_array(c.beta)}});
    j["components"] = arr;
  }
  return j;
}

}  // namespace lkms
