#pragma once

// Minkowski kinematics with metric signature (+,-,-,-).

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lkms {

struct FourVector {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  FourVector() = default;
  FourVector(double t_, double x_, double y_, double z_) : t(t_), x(x_), y(y_), z(z_) {
    if (!std::isfinite(t) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      throw std::domain_error("FourVector: components must be finite");
  }

  double operator[](int mu) const {
    switch (mu) {
      case 0: return t;
      case 1: return x;
      case 2: return y;
      default: return z;
    }
  }
  double& operator[](int mu) {
    switch (mu) {
      case 0: return t;
      case 1: return x;
      case 2: return y;
      default: return z;
    }
  }

  FourVector operator+(const FourVector& o) const { return {t + o.t, x + o.x, y + o.y, z + o.z}; }
  FourVector operator-(const FourVector& o) const { return {t - o.t, x - o.x, y - o.y, z - o.z}; }
  FourVector operator-() const { return {-t, -x, -y, -z}; }
  FourVector operator*(double a) const { return {a * t, a * x, a * y, a * z}; }
  friend FourVector operator*(double a, const FourVector& v) { return v * a; }

  double spatial_norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline double minkowski_product(const FourVector& u, const FourVector& v) {
  return u.t * v.t - u.x * v.x - u.y * v.y - u.z * v.z;
}

inline double metric_component(int mu, int nu) {
  if (mu != nu) return 0.0;
  return mu == 0 ? 1.0 : -1.0;
}

enum class CausalClass {
  TimelikeFuture,
  TimelikePast,
  Spacelike,
  NullFuture,
  NullPast,
  Zero,
};

inline const char* to_string(CausalClass c) {
  switch (c) {
    case CausalClass::TimelikeFuture: return "timelike-future";
    case CausalClass::TimelikePast: return "timelike-past";
    case CausalClass::Spacelike: return "spacelike";
    case CausalClass::NullFuture: return "null-future";
    case CausalClass::NullPast: return "null-past";
    default: return "zero";
  }
}

inline CausalClass classify(const FourVector& v) {
  if (v.t == 0.0 && v.x == 0.0 && v.y == 0.0 && v.z == 0.0) return CausalClass::Zero;
  const double s = minkowski_product(v, v);
  if (s > 0.0) return v.t > 0.0 ? CausalClass::TimelikeFuture : CausalClass::TimelikePast;
  if (s < 0.0) return CausalClass::Spacelike;
  return v.t > 0.0 ? CausalClass::NullFuture : CausalClass::NullPast;
}

inline bool is_future_timelike(const FourVector& v) {
  return classify(v) == CausalClass::TimelikeFuture;
}

// Future-directed unit timelike vector. Construction normalizes and rejects
// non-timelike input; tolerance 1e-12 on the unit-norm invariant after
// normalization.
struct TimeDirection {
  FourVector e{1.0, 0.0, 0.0, 0.0};

  TimeDirection() = default;
  explicit TimeDirection(const FourVector& v) {
    const double s = minkowski_product(v, v);
    if (!(s > 0.0) || !(v.t > 0.0))
      throw std::domain_error("TimeDirection: vector must be future-directed timelike");
    e = v * (1.0 / std::sqrt(s));
  }

  bool is_rest_frame() const { return e.x == 0.0 && e.y == 0.0 && e.z == 0.0; }
};

struct InverseTemperatureVector {
  double beta = 1.0;
  TimeDirection e;

  InverseTemperatureVector() = default;
  InverseTemperatureVector(double beta_, const TimeDirection& e_) : beta(beta_), e(e_) {
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw std::domain_error("InverseTemperatureVector: beta must be positive");
  }
  // From the four-vector beta*e in V_+.
  explicit InverseTemperatureVector(const FourVector& bv) {
    const double s = minkowski_product(bv, bv);
    if (!(s > 0.0) || !(bv.t > 0.0))
      throw std::domain_error("InverseTemperatureVector: vector must lie in V_+");
    beta = std::sqrt(s);
    e = TimeDirection(bv);
  }

  FourVector vector() const { return e.e * beta; }
};

using LorentzTransform = std::array<std::array<double, 4>, 4>;

inline FourVector apply_transform(const LorentzTransform& L, const FourVector& v) {
  FourVector r;
  for (int mu = 0; mu < 4; ++mu) {
    double s = 0.0;
    for (int nu = 0; nu < 4; ++nu) s += L[mu][nu] * v[nu];
    r[mu] = s;
  }
  return r;
}

inline LorentzTransform identity_transform() {
  LorentzTransform L{};
  for (int i = 0; i < 4; ++i) L[i][i] = 1.0;
  return L;
}

// Pure boost taking e to (1,0,0,0).
inline LorentzTransform boost_to_rest_frame(const TimeDirection& e) {
  const FourVector& u = e.e;
  const double v2 = u.x * u.x + u.y * u.y + u.z * u.z;
  if (v2 == 0.0) return identity_transform();
  const double gamma = u.t;
  const double vx = u.x / u.t, vy = u.y / u.t, vz = u.z / u.t;
  const double vv = vx * vx + vy * vy + vz * vz;
  LorentzTransform L{};
  L[0][0] = gamma;
  const double vcomp[3] = {vx, vy, vz};
  for (int i = 0; i < 3; ++i) {
    L[0][i + 1] = -gamma * vcomp[i];
    L[i + 1][0] = -gamma * vcomp[i];
    for (int j = 0; j < 3; ++j)
      L[i + 1][j + 1] = (i == j ? 1.0 : 0.0) + (gamma - 1.0) * vcomp[i] * vcomp[j] / vv;
  }
  return L;
}

// Inverse of a pure boost (or any Lorentz matrix): eta * L^T * eta.
inline LorentzTransform inverse_transform(const LorentzTransform& L) {
  LorentzTransform R{};
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu)
      R[mu][nu] = metric_component(mu, mu) * L[nu][mu] * metric_component(nu, nu);
  return R;
}

}  // namespace lkms
