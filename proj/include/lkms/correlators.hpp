#pragma once

// Position-space two-point functions: holomorphic strip values F(z + i sigma e),
// the imaginary-time image-sum oracle, smeared boundary values and the
// one-dimensional time-axis restriction.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "lkms/minkowski.hpp"
#include "lkms/quadrature.hpp"
#include "lkms/state_spec.hpp"

namespace lkms {

using complex = std::complex<double>;

struct StripPoint {
  FourVector z;
  double sigma;
  InverseTemperatureVector beta_vec;

  StripPoint(const FourVector& z_, double sigma_, const InverseTemperatureVector& bv)
      : z(z_), sigma(sigma_), beta_vec(bv) {
    if (!(sigma > 0.0) || !(sigma < bv.beta))
      throw std::domain_error("StripPoint: sigma must lie strictly in (0, beta)");
  }
};

struct StripValue {
  complex value;
  double error;
};

namespace detail {

inline constexpr double kInv4Pi2 = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);

// sinh(x)/x, entire.
inline complex sinhc(const complex& x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 6.0;
  return std::sinh(x) / x;
}

struct ComponentView {
  double weight;
  bool thermal;       // false: vacuum branch (w+ = 1, w- = 0)
  double beta = 0.0;  // rest-frame inverse temperature when thermal
  // Relative coordinate and strip direction boosted into this component's
  // rest frame.
  double tprime = 0.0;
  double r2 = 0.0;                 // |zvec'|^2
  double ebar0 = 1.0;              // time component of boosted strip direction
  double ebar_sp2 = 0.0;           // |spatial part|^2 of boosted direction
  double z_dot_ebar = 0.0;         // zvec' . ebar_vec
};

inline std::vector<ComponentView> component_views(const StateSpec& spec, const FourVector& q,
                                                  const FourVector& z,
                                                  const TimeDirection& strip_dir) {
  std::vector<std::pair<double, std::optional<InverseTemperatureVector>>> comps;
  if (spec.is<VacuumState>()) {
    comps.push_back({1.0, std::nullopt});
  } else if (spec.is<KmsState>()) {
    comps.push_back({1.0, spec.as<KmsState>().beta});
  } else if (spec.is<HotBangState>()) {
    comps.push_back({1.0, hotbang_local_beta(spec.as<HotBangState>(), q)});
  } else {
    for (const auto& c : spec.as<MixtureState>().components) comps.push_back({c.weight, c.beta});
  }

  std::vector<ComponentView> views;
  for (const auto& [w, bv] : comps) {
    ComponentView v;
    v.weight = w;
    v.thermal = bv.has_value();
    LorentzTransform L = identity_transform();
    if (v.thermal) {
      v.beta = bv->beta;
      if (!bv->e.is_rest_frame()) L = boost_to_rest_frame(bv->e);
    }
    const FourVector zp = apply_transform(L, z);
    const FourVector eb = apply_transform(L, strip_dir.e);
    v.tprime = zp.t;
    v.r2 = zp.x * zp.x + zp.y * zp.y + zp.z * zp.z;
    v.ebar0 = eb.t;
    v.ebar_sp2 = eb.x * eb.x + eb.y * eb.y + eb.z * eb.z;
    v.z_dot_ebar = zp.x * eb.x + zp.y * eb.y + zp.z * eb.z;
    views.push_back(v);
  }
  return views;
}

}  // namespace detail

// F_q(z + i sigma e): on-shell density integral with the exponential damping
// of the positive branch and the Bose-compensated damping of the negative
// branch, reduced to a radial integral after angular integration in each
// component's rest frame. The angular integral for a boosted strip direction
// is sinh(p a)/(p a) with a^2 = -|z'|^2 + sigma^2 |ebar|^2 + 2 i sigma z'.ebar.
inline StripValue eval_strip(const StateSpec& spec, const FourVector& q, const StripPoint& pt,
                             const QuadratureConfig& config = QuadratureConfig::standard()) {
  const double sigma = pt.sigma;
  const double mass = spec.mass();
  const auto views = detail::component_views(spec, q, pt.z, pt.beta_vec.e);

  complex total = 0.0;
  double total_err = 0.0;
  for (const auto& v : views) {
    const double ebar_sp = std::sqrt(v.ebar_sp2);
    // Exponential decay rates of the two branches at large radial momentum.
    const double rate_plus = sigma * (v.ebar0 - ebar_sp);
    const double rate_minus = v.thermal ? v.beta - sigma * (v.ebar0 + ebar_sp) : 1.0;
    if (rate_plus <= 0.0 || (v.thermal && rate_minus <= 0.0))
      throw std::domain_error("eval_strip: point outside the analyticity tube of a component");
    const double rate = v.thermal ? std::min(rate_plus, rate_minus) : rate_plus;
    const double kmax = config.kmax_log_cut / rate + 10.0 * mass;

    const complex a = std::sqrt(complex(-v.r2 + sigma * sigma * v.ebar_sp2,
                                        2.0 * sigma * v.z_dot_ebar));
    const double osc = std::max({std::abs(v.tprime), std::sqrt(v.r2), 1e-30});
    const double panel_cap = std::numbers::pi / (2.0 * osc);

    auto integrand = [&](double p) -> complex {
      const double omega = std::sqrt(p * p + mass * mass);
      if (omega == 0.0) return 0.0;
      double wplus, wminus;
      if (v.thermal) {
        // expm1 keeps w- accurate where it still beats the e^{sigma omega}
        // growth of the negative branch
        wminus = 1.0 / std::expm1(v.beta * omega);
        wplus = wminus + 1.0;
      } else {
        wplus = 1.0;
        wminus = 0.0;
      }
      const complex phase_plus =
          std::exp(complex(-sigma * v.ebar0 * omega, -omega * v.tprime));
      const complex branch_plus = wplus * phase_plus;
      complex branch_minus = 0.0;
      if (wminus > 0.0)
        branch_minus = wminus * std::exp(complex(sigma * v.ebar0 * omega, omega * v.tprime));
      return (p * p / omega) * (branch_plus + branch_minus) * detail::sinhc(p * a);
    };

    auto r = integrate_adaptive(integrand, 0.0, kmax, config.tolerance * 1e-2,
                                config.max_subdivisions, panel_cap);
    total += v.weight * detail::kInv4Pi2 * r.value;
    total_err += v.weight * detail::kInv4Pi2 * r.error;
  }
  if (total_err > std::max(10.0 * config.tolerance, 1e-12 * std::abs(total)))
    throw ConvergenceError("eval_strip quadrature did not converge", total_err);
  return {total, total_err};
}

// Massless vacuum two-point function continued to relative time t - i tau,
// in the rest frame: -1/(4 pi^2) * 1/((t - i tau)^2 - r^2).
inline complex vacuum_wightman_massless(double t, double r, double tau) {
  const complex tc(t, -tau);
  return -detail::kInv4Pi2 / (tc * tc - r * r);
}

// Thermal Wightman function as a sum over imaginary-time images of the
// vacuum function; cross-validation oracle for eval_strip. Truncated
// symmetrically with an Euler-Maclaurin tail correction.
inline complex image_sum_massless(const InverseTemperatureVector& beta_vec, const FourVector& z,
                                  double sigma,
                                  const QuadratureConfig& config = QuadratureConfig::standard(),
                                  double mass = 0.0) {
  if (mass != 0.0) throw std::domain_error("image_sum_massless: mass must be zero");
  const double beta = beta_vec.beta;
  if (!(sigma >= 0.0) || !(sigma < beta))
    throw std::domain_error("image_sum_massless: sigma must lie in [0, beta)");

  FourVector zp = z;
  if (!beta_vec.e.is_rest_frame()) zp = apply_transform(boost_to_rest_frame(beta_vec.e), z);
  const double t = zp.t;
  const double r = zp.spatial_norm();
  if (sigma == 0.0 && std::abs(std::abs(t) - r) < 1e-14)
    throw std::domain_error("image_sum_massless: null or coincident boundary point");

  const int N = std::max(16, config.image_terms);
  complex sum = 0.0;
  for (int n = -N; n <= N; ++n) sum += vacuum_wightman_massless(t, r, sigma + n * beta);

  // Tail of sum_{|n|>N} g(sigma + n beta) via the primitive of
  // g(tau) = -1/(4 pi^2) ((t - i tau)^2 - r^2)^{-1}.
  auto primitive = [&](double tau) -> complex {
    const complex tc(t, -tau);
    if (r > 1e-8)
      return -detail::kInv4Pi2 * (complex(0.0, 1.0) / (2.0 * r)) *
             (std::log(tc - r) - std::log(tc + r));
    return detail::kInv4Pi2 * complex(0.0, 1.0) / tc;
  };
  auto gprime = [&](double tau) -> complex {
    const complex tc(t, -tau);
    const complex d = tc * tc - r * r;
    return -detail::kInv4Pi2 * 2.0 * complex(0.0, 1.0) * tc / (d * d);
  };
  const double tau_hi = sigma + (N + 0.5) * beta;
  const double tau_lo = sigma - (N + 0.5) * beta;
  // upper tail: integral - P(tau_hi)/beta plus midpoint correction
  sum += -primitive(tau_hi) / beta + (beta / 24.0) * gprime(tau_hi);
  sum += primitive(tau_lo) / beta - (beta / 24.0) * gprime(tau_lo);
  return sum;
}

// Gaussian-times-polynomial test function with closed-form Fourier transform.
struct TestFunction {
  struct Term {
    double coeff;
    std::array<int, 4> powers;  // per-coordinate monomial powers
  };
  FourVector center{};
  double width = 1.0;
  std::vector<Term> terms{{1.0, {0, 0, 0, 0}}};

  TestFunction() = default;
  TestFunction(const FourVector& c, double w, std::vector<Term> ts)
      : center(c), width(w), terms(std::move(ts)) {
    if (!(width > 0.0)) throw std::domain_error("TestFunction: width must be positive");
  }

  double operator()(const FourVector& z) const {
    const FourVector y = z - center;
    const double e2 = y.t * y.t + y.x * y.x + y.y * y.y + y.z * y.z;
    double val = 0.0;
    for (const auto& term : terms) {
      double mono = term.coeff;
      for (int mu = 0; mu < 4; ++mu)
        for (int j = 0; j < term.powers[mu]; ++j) mono *= y[mu];
      val += mono;
    }
    return val * std::exp(-e2 / (2.0 * width * width));
  }

  TestFunction reflected() const {
    TestFunction h = *this;
    h.center = -center;
    for (auto& term : h.terms) {
      int total = 0;
      for (int p : term.powers) total += p;
      if (total % 2 == 1) term.coeff = -term.coeff;
    }
    return h;
  }

  // H(p) = int h(z) exp(-i p.z) d^4 z  (Minkowski p.z).
  complex fourier(const FourVector& p) const {
    // 1D kernels: g_m(k) = int y^m exp(-y^2/(2 s^2) - i k y) dy = q_m(k) g_0(k),
    // with q_0 = 1 and q_{m+1} = i (q_m' - s^2 k q_m).
    const double s = width;
    const double karg[4] = {p.t, -p.x, -p.y, -p.z};
    int maxpow = 0;
    for (const auto& term : terms)
      for (int mu = 0; mu < 4; ++mu) maxpow = std::max(maxpow, term.powers[mu]);

    // polynomials q_m as coefficient arrays in k
    std::vector<std::vector<complex>> q(maxpow + 1);
    q[0] = {1.0};
    for (int m = 0; m < maxpow; ++m) {
      std::vector<complex> next(q[m].size() + 1, 0.0);
      for (std::size_t d = 1; d < q[m].size(); ++d) next[d - 1] += complex(0, 1) * (double(d) * q[m][d]);
      for (std::size_t d = 0; d < q[m].size(); ++d) next[d + 1] += complex(0, -1) * s * s * q[m][d];
      q[m + 1] = std::move(next);
    }
    auto eval_q = [](const std::vector<complex>& poly, double k) {
      complex acc = 0.0;
      for (std::size_t d = poly.size(); d-- > 0;) acc = acc * k + poly[d];
      return acc;
    };

    const double g0pref = std::sqrt(2.0 * std::numbers::pi) * s;
    complex result = 0.0;
    for (const auto& term : terms) {
      complex prod = term.coeff;
      for (int mu = 0; mu < 4; ++mu) {
        const double k = karg[mu];
        prod *= eval_q(q[term.powers[mu]], k) * g0pref * std::exp(-0.5 * s * s * k * k);
      }
      result += prod;
    }
    const double pc = minkowski_product(p, center);
    return result * std::exp(complex(0.0, -pc));
  }
};

// Smeared boundary value w_q(h): quadrature of the momentum density against
// the closed-form Fourier transform of h. No sigma -> 0 limit is needed.
inline complex smeared_boundary(const StateSpec& spec, const FourVector& q, const TestFunction& h,
                                const QuadratureConfig& config = QuadratureConfig::standard()) {
  if (!(h.width > 0.0)) throw std::domain_error("smeared_boundary: width must be positive");
  const double mass = spec.mass();

  std::vector<std::pair<double, std::optional<InverseTemperatureVector>>> comps;
  if (spec.is<VacuumState>()) {
    comps.push_back({1.0, std::nullopt});
  } else if (spec.is<KmsState>()) {
    comps.push_back({1.0, spec.as<KmsState>().beta});
  } else if (spec.is<HotBangState>()) {
    comps.push_back({1.0, hotbang_local_beta(spec.as<HotBangState>(), q)});
  } else {
    for (const auto& c : spec.as<MixtureState>().components) comps.push_back({c.weight, c.beta});
  }

  // angular product rule: Gauss-Legendre in cos(theta), trapezoid in phi
  constexpr int kNu = 24, kNphi = 24;
  static const auto gl = [] {
    std::array<std::pair<double, double>, kNu> nw{};
    // Newton iteration on Legendre P_24
    for (int i = 0; i < kNu; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (kNu + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int n = 2; n <= kNu; ++n) {
          const double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
          p0 = p1;
          p1 = p2;
        }
        const double dp = kNu * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) {
          nw[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
          break;
        }
      }
    }
    return nw;
  }();

  complex total = 0.0;
  for (const auto& [cw, bv] : comps) {
    const bool thermal = bv.has_value();
    LorentzTransform Linv = identity_transform();
    double beta = 0.0;
    if (thermal) {
      beta = bv->beta;
      if (!bv->e.is_rest_frame()) Linv = inverse_transform(boost_to_rest_frame(bv->e));
    }
    const double rmax = 10.0 / h.width + 2.0 * mass + (thermal ? config.kmax_log_cut / beta : 0.0);

    auto radial = [&](double rho) -> complex {
      const double omega = std::sqrt(rho * rho + mass * mass);
      if (omega == 0.0) return 0.0;
      double wplus = 1.0, wminus = 0.0;
      if (thermal) {
        wminus = 1.0 / std::expm1(beta * omega);
        wplus = wminus + 1.0;
      }
      complex ang = 0.0;
      for (const auto& [u, wu] : gl) {
        const double st = std::sqrt(std::max(0.0, 1.0 - u * u));
        for (int j = 0; j < kNphi; ++j) {
          const double phi = 2.0 * std::numbers::pi * j / kNphi;
          const FourVector prest{omega, rho * st * std::cos(phi), rho * st * std::sin(phi),
                                 rho * u};
          const FourVector plab = apply_transform(Linv, prest);
          ang += wu * (wplus * h.fourier(plab) + wminus * h.fourier(-plab));
        }
      }
      ang *= 2.0 * std::numbers::pi / kNphi;
      return (rho * rho / (2.0 * omega)) * ang;
    };

    auto r = integrate_or_throw(radial, 0.0, rmax, config.tolerance * 1e-2,
                                config.max_subdivisions, rmax / 32.0);
    total += cw * r.value / std::pow(2.0 * std::numbers::pi, 3);
  }
  return total;
}

// f_q(t + i sigma): one-dimensional Fourier integral of the damped time-axis
// spectrum. Agrees with eval_strip at z = t e by construction of the spectra.
inline complex time_restriction(const StateSpec& spec, const FourVector& q, double t, double sigma,
                                const QuadratureConfig& config = QuadratureConfig::standard()) {
  double beta_min = std::numeric_limits<double>::infinity();
  if (spec.is<KmsState>()) beta_min = spec.as<KmsState>().beta.beta;
  if (spec.is<HotBangState>())
    beta_min = hotbang_local_beta(spec.as<HotBangState>(), q).beta;
  if (spec.is<MixtureState>())
    for (const auto& c : spec.as<MixtureState>().components)
      beta_min = std::min(beta_min, c.beta.beta);
  if (!(sigma > 0.0) || !(sigma < beta_min))
    throw std::domain_error("time_restriction: sigma must lie strictly in (0, beta)");

  const double mass = spec.mass();
  const double khi = config.kmax_log_cut / sigma + 2.0 * mass;
  const double klo = std::isinf(beta_min) ? -mass
                                          : -(config.kmax_log_cut / (beta_min - sigma) + 2.0 * mass);
  const double panel_cap = std::numbers::pi / (2.0 * std::max(std::abs(t), 1e-30));

  auto integrand = [&](double k) -> complex {
    return time_axis_spectrum(spec, q, k) * std::exp(complex(-sigma * k, -k * t));
  };
  auto r = integrate_adaptive(integrand, klo, khi, config.tolerance * 1e-2,
                              config.max_subdivisions, panel_cap);
  if (r.error > std::max(10.0 * config.tolerance, 1e-12 * std::abs(r.value)))
    throw ConvergenceError("time_restriction quadrature did not converge", r.error);
  return r.value / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace lkms
