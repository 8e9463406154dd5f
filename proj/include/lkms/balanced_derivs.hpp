#pragma once

// Balanced derivatives of the normal-ordered square at a base point: the
// vacuum-subtracted two-point function, its Taylor tensors via Richardson
// finite differences, and the closed-form reference tensors proportional to
// derivatives of (beta^2)^{-1}.

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <optional>
#include <vector>

#include "lkms/correlators.hpp"
#include "lkms/minkowski.hpp"
#include "lkms/quadrature.hpp"
#include "lkms/state_spec.hpp"
#include "lkms/symmetric_tensor.hpp"

namespace lkms {

// D_q(z) = w_q(z) - w_vac(z), real analytic near z = 0. The vacuum branch
// cancels exactly, leaving Bose-damped integrals per thermal component.
inline double regularized_difference(const StateSpec& spec, const FourVector& q,
                                     const FourVector& z,
                                     const QuadratureConfig& config = QuadratureConfig::standard()) {
  const double mass = spec.mass();

  std::vector<std::pair<double, InverseTemperatureVector>> comps;
  if (spec.is<VacuumState>()) return 0.0;
  if (spec.is<KmsState>()) {
    comps.push_back({1.0, spec.as<KmsState>().beta});
  } else if (spec.is<HotBangState>()) {
    comps.push_back({1.0, hotbang_local_beta(spec.as<HotBangState>(), q)});
  } else {
    for (const auto& c : spec.as<MixtureState>().components) comps.push_back({c.weight, c.beta});
  }

  double total = 0.0;
  for (const auto& [cw, bv] : comps) {
    FourVector zp = z;
    if (!bv.e.is_rest_frame()) zp = apply_transform(boost_to_rest_frame(bv.e), z);
    const double t = zp.t;
    const double r = zp.spatial_norm();
    const double beta = bv.beta;
    const double kmax = config.kmax_log_cut / beta + 10.0 * mass;
    const double osc = std::max({std::abs(t), r, 1e-30});
    const double panel_cap = std::numbers::pi / (2.0 * osc);

    auto integrand = [&](double p) -> double {
      const double omega = std::sqrt(p * p + mass * mass);
      if (omega == 0.0) return 0.0;
      const double nb = 1.0 / std::expm1(beta * omega);
      const double pr = p * r;
      const double sinc = pr < 1e-8 ? 1.0 - pr * pr / 6.0 : std::sin(pr) / pr;
      return (p * p / omega) * nb * 2.0 * std::cos(omega * t) * sinc;
    };
    auto res = integrate_adaptive(integrand, 0.0, kmax,
                                  std::min(config.tolerance * 1e-2, 1e-13),
                                  config.max_subdivisions, panel_cap);
    if (res.error > 1e-10)
      throw ConvergenceError("regularized_difference quadrature did not converge", res.error);
    total += cw * detail::kInv4Pi2 * res.value.real();
  }
  return total;
}

namespace detail {

// n-th derivative of g(s) at 0 by central differences plus Richardson
// extrapolation in h^2. Returns the extrapolated value and the magnitude of
// the last correction as an error proxy.
template <typename G>
std::pair<double, double> richardson_derivative(G&& g, int n, double h0, int levels) {
  if (n == 0) return {g(0.0), 0.0};
  std::vector<double> binom(n + 1);
  binom[0] = 1.0;
  for (int i = 1; i <= n; ++i) binom[i] = binom[i - 1] * double(n - i + 1) / double(i);

  auto stencil = [&](double h) {
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double offset = (0.5 * n - i) * h;
      acc += (i % 2 == 0 ? 1.0 : -1.0) * binom[i] * g(offset);
    }
    return acc / std::pow(h, n);
  };

  std::vector<double> row(levels);
  for (int j = 0; j < levels; ++j) row[j] = stencil(h0 / std::pow(2.0, j));
  double correction = 0.0;
  for (int k = 1; k < levels; ++k) {
    const double pw = std::pow(4.0, k);
    for (int j = levels - 1; j >= k; --j) {
      const double next = (pw * row[j] - row[j - 1]) / (pw - 1.0);
      if (j == levels - 1) correction = next - row[j];
      row[j] = next;
    }
  }
  return {row[levels - 1], std::abs(correction)};
}

}  // namespace detail

struct TaylorResult {
  SymmetricTensor tensor;
  double error = 0.0;  // worst Richardson correction across diagonal samples
};

// Rank-n tensor of z-derivatives of D_q at z = 0, reconstructed from
// directional derivatives by the polarization identity.
inline TaylorResult taylor_tensor(const StateSpec& spec, const FourVector& q, int n,
                                  const QuadratureConfig& config = QuadratureConfig::standard()) {
  if (n < 0 || n > 4) throw std::domain_error("taylor_tensor: order must lie in 0..4");

  double beta_ref;
  if (spec.is<VacuumState>()) {
    beta_ref = 1.0;
  } else if (spec.is<KmsState>()) {
    beta_ref = spec.as<KmsState>().beta.beta;
  } else if (spec.is<HotBangState>()) {
    beta_ref = hotbang_local_beta(spec.as<HotBangState>(), q).beta;
  } else {
    beta_ref = std::numeric_limits<double>::infinity();
    for (const auto& c : spec.as<MixtureState>().components)
      beta_ref = std::min(beta_ref, c.beta.beta);
  }

  // High orders amplify quadrature noise as h^{-n}; use a coarser base step
  // and fewer extrapolation levels there.
  const double h0 = (n <= 2 ? config.fd_step : 4.0 * config.fd_step) * beta_ref;
  const int levels = n <= 2 ? config.richardson_levels : std::min(config.richardson_levels, 4);

  double worst = 0.0;
  auto diag = [&](const FourVector& v) {
    auto g = [&](double s) { return regularized_difference(spec, q, v * s, config); };
    // Keep the stencil inside the analyticity radius of D along v: the
    // nearest singularity sits at |z| ~ 0.37 beta for diagonal directions.
    const double vnorm = std::sqrt(v.t * v.t + v.x * v.x + v.y * v.y + v.z * v.z);
    const double h = h0 / std::max(1.0, vnorm);
    auto [val, err] = detail::richardson_derivative(g, n, h, levels);
    worst = std::max(worst, err);
    return val;
  };
  const std::vector<FourVector> basis = {
      {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  SymmetricTensor T = polarization_reconstruct(diag, n, basis);
  // Quadrature noise (~1e-13 absolute per D sample) amplified by the stencil
  // and polarization sums; keeps the estimate honest when the Richardson
  // corrections cancel by luck.
  if (n > 0) {
    const double h_min = 0.5 * h0 / std::pow(2.0, levels - 1);
    worst = std::max(worst, 1e-13 * std::pow(4.0, n) / std::pow(h_min, n));
  }
  return {std::move(T), worst};
}

// Closed-form tensor of n-th derivatives of (beta.beta)^{-1} with respect to
// the components of the beta four-vector, for n <= 4. With u = beta^2,
// a_mu = 2 beta_mu and b_munu = 2 eta_munu, the chain rule gives sums of
// g^{(k)}(u) times products of a and b.
inline SymmetricTensor beta_derivative_tensor(int n, const InverseTemperatureVector& beta_vec) {
  if (n < 0 || n > 4) throw std::domain_error("beta_derivative_tensor: order must lie in 0..4");
  const FourVector b = beta_vec.vector();
  const double u = beta_vec.beta * beta_vec.beta;
  auto g = [&](int k) {  // g^{(k)}(u) for g(u) = 1/u
    double v = 1.0 / u;
    for (int j = 1; j <= k; ++j) v *= -double(j) / u;
    return v;
  };
  auto a = [&](int mu) { return 2.0 * metric_component(mu, mu) * b[mu]; };  // a_mu, lower index
  auto eta2 = [](int mu, int nu) { return 2.0 * metric_component(mu, nu); };

  SymmetricTensor T(n);
  for (const auto& idx : sorted_multi_indices(n)) {
    double v = 0.0;
    switch (n) {
      case 0:
        v = g(0);
        break;
      case 1:
        v = g(1) * a(idx[0]);
        break;
      case 2:
        v = g(2) * a(idx[0]) * a(idx[1]) + g(1) * eta2(idx[0], idx[1]);
        break;
      case 3: {
        const int m0 = idx[0], m1 = idx[1], m2 = idx[2];
        v = g(3) * a(m0) * a(m1) * a(m2) +
            g(2) * (a(m0) * eta2(m1, m2) + a(m1) * eta2(m0, m2) + a(m2) * eta2(m0, m1));
        break;
      }
      default: {
        const int m0 = idx[0], m1 = idx[1], m2 = idx[2], m3 = idx[3];
        v = g(4) * a(m0) * a(m1) * a(m2) * a(m3) +
            g(3) * (eta2(m0, m1) * a(m2) * a(m3) + eta2(m0, m2) * a(m1) * a(m3) +
                    eta2(m0, m3) * a(m1) * a(m2) + eta2(m1, m2) * a(m0) * a(m3) +
                    eta2(m1, m3) * a(m0) * a(m2) + eta2(m2, m3) * a(m0) * a(m1)) +
            g(2) * (eta2(m0, m1) * eta2(m2, m3) + eta2(m0, m2) * eta2(m1, m3) +
                    eta2(m0, m3) * eta2(m1, m2));
        break;
      }
    }
    T.set_coefficient(idx, v);
  }
  return T;
}

namespace detail {

inline double frobenius_inner(const SymmetricTensor& A, const SymmetricTensor& B) {
  double s = 0.0;
  for (const auto& [idx, c] : A.coefficients())
    s += multi_index_multiplicity(idx) * c * B.coefficient(idx);
  return s;
}

}  // namespace detail

struct OrderCoefficients {
  std::array<double, 5> c{};         // proportionality constants per order
  std::array<double, 5> residual{};  // relative projection residual per order
};

// Calibrate the order coefficients once against a massless rest-frame KMS
// state at beta = 1: project the numerical Taylor tensor onto the analytic
// beta-derivative tensor.
inline const OrderCoefficients& order_coefficients() {
  static OrderCoefficients oc;
  static std::once_flag flag;
  std::call_once(flag, [] {
    const InverseTemperatureVector bv(FourVector{1.0, 0.0, 0.0, 0.0});
    const StateSpec spec = StateSpec::kms(0.0, bv);
    const FourVector q{};
    QuadratureConfig cfg = QuadratureConfig::standard();
    cfg.tolerance = 1e-10;
    for (int n = 0; n <= 4; ++n) {
      const SymmetricTensor T = taylor_tensor(spec, q, n, cfg).tensor;
      const SymmetricTensor F = beta_derivative_tensor(n, bv);
      const double ff = detail::frobenius_inner(F, F);
      oc.c[n] = detail::frobenius_inner(T, F) / ff;
      const SymmetricTensor R = T - F * oc.c[n];
      oc.residual[n] =
          R.norm() / std::max({T.norm(), std::abs(oc.c[n]) * F.norm(), 1e-300});
    }
  });
  return oc;
}

inline double order_coefficient(int n) {
  if (n < 0 || n > 4) throw std::domain_error("order_coefficient: order must lie in 0..4");
  return order_coefficients().c[n];
}

// Thermal function of order n: c_n times the n-th beta-derivative tensor of
// (beta^2)^{-1}. Massless only; the massive analogue has no closed form here.
inline SymmetricTensor thermal_function(int n, double mass,
                                        const InverseTemperatureVector& beta_vec) {
  if (mass != 0.0)
    throw std::domain_error("thermal_function: only the massless case is implemented");
  if (n < 0 || n > 4) throw std::domain_error("thermal_function: order must lie in 0..4");
  return beta_derivative_tensor(n, beta_vec) * order_coefficient(n);
}

}  // namespace lkms
