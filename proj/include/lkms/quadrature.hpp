#pragma once

// Adaptive Gauss-Kronrod 7/15 quadrature with an oscillation-aware initial
// panel split, plus the quadrature profiles used throughout.

#include <cmath>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace lkms {

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double estimate)
      : std::runtime_error(what + " (error estimate " + std::to_string(estimate) + ")"),
        estimate_(estimate) {}
  double estimate() const { return estimate_; }

 private:
  double estimate_;
};

struct QuadratureConfig {
  double tolerance = 1e-8;      // absolute tolerance target for quadratures
  int max_subdivisions = 4000;  // adaptive panel budget per integral
  int image_terms = 64;         // image-sum truncation (each side)
  double fd_step = 0.05;        // base differentiation step, in units of beta
  int richardson_levels = 4;
  // Radial cutoff scale: K_max is chosen so the exponential damping factor
  // drops below exp(-kmax_log_cut); K_max * beta >= 30 holds for the
  // default profile across the sigma range used by the checks.
  double kmax_log_cut = 41.0;

  static QuadratureConfig fast() {
    QuadratureConfig c;
    c.tolerance = 1e-4;
    c.max_subdivisions = 600;
    c.image_terms = 16;
    c.richardson_levels = 3;
    return c;
  }
  static QuadratureConfig standard() { return {}; }
  static QuadratureConfig strict() {
    QuadratureConfig c;
    c.tolerance = 1e-10;
    c.max_subdivisions = 20000;
    c.image_terms = 256;
    c.richardson_levels = 5;
    return c;
  }
  static QuadratureConfig profile(const std::string& name) {
    if (name == "fast") return fast();
    if (name == "default") return standard();
    if (name == "strict") return strict();
    throw std::domain_error("unknown quadrature profile: " + name);
  }
  // THERMALFIELD_PROFILE overrides the built-in default.
  static QuadratureConfig from_environment() {
    if (const char* env = std::getenv("THERMALFIELD_PROFILE")) return profile(env);
    return standard();
  }
};

namespace detail {

// Nodes/weights of the 15-point Kronrod extension of 7-point Gauss on [-1,1].
inline constexpr double kGK15Nodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
inline constexpr double kGK15Weights[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double kG7Weights[15] = {
    0.0, 0.129484966168870, 0.0, 0.279705391489277, 0.0, 0.381830050505119, 0.0,
    0.417959183673469,
    0.0, 0.381830050505119, 0.0, 0.279705391489277, 0.0, 0.129484966168870, 0.0};

template <typename T>
double abs_value(const T& v) {
  return std::abs(v);
}

}  // namespace detail

template <typename F, typename T = std::invoke_result_t<F, double>>
struct PanelResult {
  T value;
  double error;
};

template <typename F>
auto gauss_kronrod_panel(F&& f, double a, double b) {
  using T = std::invoke_result_t<F, double>;
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  T k15{}, g7{};
  for (int i = 0; i < 15; ++i) {
    const T fv = f(c + h * detail::kGK15Nodes[i]);
    k15 += fv * detail::kGK15Weights[i];
    g7 += fv * detail::kG7Weights[i];
  }
  k15 *= h;
  g7 *= h;
  const double diff = detail::abs_value(k15 - g7);
  // QUADPACK-style sharpened estimate.
  const double err = diff > 0.0 ? diff * std::min(1.0, std::pow(200.0 * diff / std::max(detail::abs_value(k15), 1e-300), 1.5)) : 0.0;
  return PanelResult<F>{k15, err};
}

struct QuadratureResult {
  std::complex<double> value;
  double error;
};

// Integrate f over [a,b]. max_panel_width bounds the initial subdivision so
// oscillatory kernels are resolved before the error estimate is trusted.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                    int max_subdivisions, double max_panel_width = 0.0) {
  struct Seg {
    double a, b, err;
    std::complex<double> val;
  };
  std::vector<Seg> segs;
  int n0 = 1;
  if (max_panel_width > 0.0) n0 = std::max(1, int(std::ceil((b - a) / max_panel_width)));
  n0 = std::min(n0, 200000);
  auto wrap = [&f](double x) { return std::complex<double>(f(x)); };
  segs.reserve(n0 + 16);
  for (int i = 0; i < n0; ++i) {
    const double sa = a + (b - a) * i / n0, sb = a + (b - a) * (i + 1) / n0;
    auto r = gauss_kronrod_panel(wrap, sa, sb);
    segs.push_back({sa, sb, r.error, r.value});
  }
  int splits = 0;
  while (splits < max_subdivisions) {
    double total_err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total_err += segs[i].err;
      if (segs[i].err > segs[worst].err) worst = i;
    }
    if (total_err <= abs_tol) break;
    Seg s = segs[worst];
    const double m = 0.5 * (s.a + s.b);
    if (m == s.a || m == s.b) break;  // cannot refine further
    auto r1 = gauss_kronrod_panel(wrap, s.a, m);
    auto r2 = gauss_kronrod_panel(wrap, m, s.b);
    segs[worst] = {s.a, m, r1.error, r1.value};
    segs.push_back({m, s.b, r2.error, r2.value});
    ++splits;
  }
  std::complex<double> value = 0.0;
  double err = 0.0;
  for (const auto& s : segs) {
    value += s.val;
    err += s.err;
  }
  return {value, err};
}

template <typename F>
QuadratureResult integrate_or_throw(F&& f, double a, double b, double abs_tol,
                                    int max_subdivisions, double max_panel_width = 0.0) {
  auto r = integrate_adaptive(std::forward<F>(f), a, b, abs_tol, max_subdivisions,
                              max_panel_width);
  if (r.error > 10.0 * abs_tol && r.error > 1e-14 * std::abs(r.value))
    throw ConvergenceError("quadrature failed to converge", r.error);
  return r;
}

}  // namespace lkms
