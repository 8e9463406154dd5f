#pragma once

// Equilibrium verdicts: order-N local-equilibrium check, momentum-space
// local-KMS check with clustering, sharp temperature extraction, and
// mixed-temperature weight fitting.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lkms/balanced_derivs.hpp"
#include "lkms/correlators.hpp"
#include "lkms/minkowski.hpp"
#include "lkms/state_spec.hpp"
#include "lkms/symmetric_tensor.hpp"

namespace lkms {

namespace detail {

inline nlohmann::json four_vector_json(const FourVector& v) {
  return nlohmann::json::array({v.t, v.x, v.y, v.z});
}

inline std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

// ---- order-N local equilibrium ---------------------------------------------

struct LTEReport {
  struct OrderRow {
    int n = 0;
    double discrepancy = 0.0;
    double tolerance = 0.0;
    bool pass = false;
  };
  int order_checked = 0;
  std::vector<OrderRow> per_order_discrepancy;
  std::vector<double> remainder_norms;  // jet norms of the implied remainder
  InverseTemperatureVector reference_beta;
  bool verdict = false;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["order_checked"] = order_checked;
    auto rows = nlohmann::json::array();
    for (const auto& r : per_order_discrepancy)
      rows.push_back({{"n", r.n},
                      {"discrepancy", r.discrepancy},
                      {"tolerance", r.tolerance},
                      {"pass", r.pass}});
    j["per_order_discrepancy"] = rows;
    j["remainder_norms"] = remainder_norms;
    j["reference_beta"] = detail::four_vector_json(reference_beta.vector());
    j["verdict"] = verdict ? "pass" : "fail";
    return j;
  }

  std::string to_csv() const {
    std::string out = "n,discrepancy,tolerance,pass\n";
    for (const auto& r : per_order_discrepancy)
      out += std::to_string(r.n) + "," + detail::csv_number(r.discrepancy) + "," +
             detail::csv_number(r.tolerance) + "," + (r.pass ? "1" : "0") + "\n";
    return out;
  }
};

// Compare the order-n Taylor tensors of the state at q against the sharp
// reference at candidate_beta; tol(n) = max(tol, 10 x propagated error).
inline LTEReport check_lte(const StateSpec& spec, const FourVector& q,
                           const InverseTemperatureVector& candidate_beta, int N, double tol,
                           const QuadratureConfig& config = QuadratureConfig::standard()) {
  if (N < 0 || N > 4) throw std::domain_error("check_lte: order must lie in 0..4");
  if (!(tol > 0.0)) throw std::domain_error("check_lte: tolerance must be positive");

  const double mass = spec.mass();
  LTEReport rep;
  rep.order_checked = N;
  rep.reference_beta = candidate_beta;
  rep.verdict = true;
  for (int n = 0; n <= N; ++n) {
    const TaylorResult T = taylor_tensor(spec, q, n, config);
    SymmetricTensor ref(n);
    double ref_err = 0.0;
    if (mass == 0.0) {
      ref = thermal_function(n, 0.0, candidate_beta);
    } else {
      const StateSpec ref_spec = StateSpec::kms(mass, candidate_beta);
      const TaylorResult R = taylor_tensor(ref_spec, q, n, config);
      ref = R.tensor;
      ref_err = R.error;
    }
    const double disc = (T.tensor - ref).norm();
    const double used_tol = std::max(tol, 10.0 * (T.error + ref_err));
    LTEReport::OrderRow row{n, disc, used_tol, disc <= used_tol};
    rep.per_order_discrepancy.push_back(row);
    rep.remainder_norms.push_back(disc);
    if (!row.pass) rep.verdict = false;
  }
  return rep;
}

// ---- momentum-space local KMS ------------------------------------------------

struct LKMSReport {
  std::vector<double> k_grid;
  std::vector<double> residual_profile;
  double max_residual = 0.0;
  double clustering_metric = 0.0;
  double evenness_defect = 0.0;  // mid-strip evenness diagnostic
  double tolerance = 0.0;
  double clustering_bound = 1e-4;
  std::string method;  // "spectral" or "dft"
  bool verdict = false;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["k_grid"] = k_grid;
    j["residual_profile"] = residual_profile;
    j["max_residual"] = max_residual;
    j["clustering_metric"] = clustering_metric;
    j["evenness_defect"] = evenness_defect;
    j["tolerance"] = tolerance;
    j["clustering_bound"] = clustering_bound;
    j["method"] = method;
    j["verdict"] = verdict ? "pass" : "fail";
    return j;
  }

  std::string to_csv() const {
    std::string out = "k,residual\n";
    for (std::size_t i = 0; i < k_grid.size(); ++i)
      out += detail::csv_number(k_grid[i]) + "," + detail::csv_number(residual_profile[i]) + "\n";
    return out;
  }
};

namespace detail {

// The closed-form spectral route applies when every thermal component shares
// the candidate time direction, so the candidate axis is the state's own.
inline bool spectral_path_available(const StateSpec& spec, const FourVector& q,
                                    const TimeDirection& e) {
  auto same = [&](const TimeDirection& d) {
    return std::abs(d.e.t - e.e.t) < 1e-12 && std::abs(d.e.x - e.e.x) < 1e-12 &&
           std::abs(d.e.y - e.e.y) < 1e-12 && std::abs(d.e.z - e.e.z) < 1e-12;
  };
  if (spec.is<VacuumState>()) return true;
  if (spec.is<KmsState>()) return same(spec.as<KmsState>().beta.e);
  if (spec.is<HotBangState>()) return same(hotbang_local_beta(spec.as<HotBangState>(), q).e);
  for (const auto& c : spec.as<MixtureState>().components)
    if (!same(c.beta.e)) return false;
  return true;
}

inline double lkms_residual(const std::complex<double>& u_minus, const std::complex<double>& u_plus,
                            double ebk) {
  const std::complex<double> lhs = ebk * u_minus;
  return std::abs(lhs - u_plus) / (std::abs(lhs) + std::abs(u_plus) + 1e-300);
}

}  // namespace detail

inline LKMSReport check_lkms_momentum(const StateSpec& spec, const FourVector& q,
                                      const InverseTemperatureVector& candidate_beta, double k_max,
                                      double tol,
                                      const QuadratureConfig& config = QuadratureConfig::standard(),
                                      bool force_generic = false) {
  if (!(tol > 0.0)) throw std::domain_error("check_lkms_momentum: tolerance must be positive");
  const double beta = candidate_beta.beta;
  if (k_max * beta > 25.0)
    throw std::domain_error("check_lkms_momentum: k_max * beta must not exceed 25");
  if (!(k_max > 0.0)) throw std::domain_error("check_lkms_momentum: k_max must be positive");

  LKMSReport rep;
  rep.tolerance = tol;
  const TimeDirection e = candidate_beta.e;
  constexpr int kNodes = 41;

  if (!force_generic && detail::spectral_path_available(spec, q, e)) {
    rep.method = "spectral";
    for (int i = 1; i <= kNodes; ++i) {
      const double k = k_max * i / kNodes;
      const auto up = time_axis_spectrum(spec, q, k);
      const auto um = time_axis_spectrum(spec, q, -k);
      rep.k_grid.push_back(k);
      rep.residual_profile.push_back(detail::lkms_residual(um, up, std::exp(beta * k)));
    }
  } else {
    // Generic route: Fourier transform of Gaussian-windowed strip samples at
    // sigma = beta/2. The even window preserves the identity exactly at that
    // sigma, so the residual still measures the local KMS defect.
    rep.method = "dft";
    const double sigma = 0.5 * beta;
    const double s = 1.5 * beta;                    // window width
    const double T = 5.0 * s;                       // sample range
    const double dt = std::numbers::pi * beta / 60.0;  // Nyquist margin past k_max
    const int M = int(std::ceil(T / dt));
    std::vector<std::complex<double>> samples(2 * M + 1);
    for (int j = -M; j <= M; ++j) {
      const double t = j * dt;
      const StripPoint pt(e.e * t, sigma, candidate_beta);
      const double g = std::exp(-t * t / (2.0 * s * s));
      samples[j + M] = eval_strip(spec, q, pt, config).value * g;
    }
    // e^{sigma k} undoes the strip damping; at sigma = beta/2 the compensated
    // spectrum satisfies the momentum identity exactly for any even window.
    auto vtilde = [&](double k) {
      std::complex<double> acc = 0.0;
      for (int j = -M; j <= M; ++j)
        acc += samples[j + M] * std::exp(std::complex<double>(0.0, k * j * dt));
      return acc * (dt / std::sqrt(2.0 * std::numbers::pi)) * std::exp(sigma * k);
    };
    for (int i = 1; i <= kNodes; ++i) {
      const double k = k_max * i / kNodes;
      rep.k_grid.push_back(k);
      rep.residual_profile.push_back(detail::lkms_residual(vtilde(-k), vtilde(k), std::exp(beta * k)));
    }
  }
  rep.max_residual = *std::max_element(rep.residual_profile.begin(), rep.residual_profile.end());

  // time clustering proxy at sigma = 0.01 beta
  {
    const double sigma = 0.01 * beta;
    const auto w_near = eval_strip(spec, q, StripPoint(e.e * beta, sigma, candidate_beta), config);
    const auto w_far = eval_strip(spec, q, StripPoint(e.e * (20.0 * beta), sigma, candidate_beta), config);
    rep.clustering_metric = std::abs(w_far.value) / std::abs(w_near.value);
  }

  // mid-strip evenness diagnostic
  {
    const double sigma = 0.5 * beta;
    double defect = 0.0;
    for (double t : {0.4 * beta, 1.1 * beta}) {
      const auto fp = eval_strip(spec, q, StripPoint(e.e * t, sigma, candidate_beta), config);
      const auto fm = eval_strip(spec, q, StripPoint(e.e * -t, sigma, candidate_beta), config);
      defect = std::max(defect, std::abs(fp.value - fm.value));
    }
    rep.evenness_defect = defect;
  }

  rep.verdict = rep.max_residual <= tol && rep.clustering_metric <= rep.clustering_bound;
  return rep;
}

// ---- sharp temperature extraction ---------------------------------------------

struct ExtractionResult {
  InverseTemperatureVector beta_vec;
  double fit_residual = 0.0;
  bool degenerate_fallback = false;
  std::string method = "order0-scalar,order2-eigendirection";

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["beta_vec"] = detail::four_vector_json(beta_vec.vector());
    j["fit_residual"] = fit_residual;
    j["degenerate_fallback"] = degenerate_fallback;
    j["method"] = method;
    return j;
  }
};

// Invert the Wick-square value for the magnitude and take the timelike
// eigendirection of the order-2 tensor (index raised with the metric) for
// the rest frame.
inline ExtractionResult extract_temperature(const StateSpec& spec, const FourVector& q,
                                            double tol = 1e-8,
                                            const QuadratureConfig& config = QuadratureConfig::standard()) {
  if (spec.mass() != 0.0)
    throw std::domain_error("extract_temperature: only massless states supported");
  const double d0 = taylor_tensor(spec, q, 0, config).tensor.diagonal(FourVector{});
  if (!(d0 > std::max(tol, 0.0)))
    throw std::domain_error("extract_temperature: nonpositive Wick square (no finite temperature)");
  const double beta_mag = std::sqrt(1.0 / (12.0 * d0));

  const SymmetricTensor M = taylor_tensor(spec, q, 2, config).tensor;
  Eigen::Matrix4d A;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu)
      A(mu, nu) = metric_component(mu, mu) * M.coefficient({mu, nu});

  Eigen::EigenSolver<Eigen::Matrix4d> es(A);
  ExtractionResult out{InverseTemperatureVector{}, 0.0};
  std::vector<std::pair<double, FourVector>> timelike;  // (eigenvalue, future unit vector)
  double scale = 0.0;
  for (int i = 0; i < 4; ++i) scale = std::max(scale, std::abs(es.eigenvalues()(i).real()));
  for (int i = 0; i < 4; ++i) {
    if (std::abs(es.eigenvalues()(i).imag()) > 1e-10 * std::max(scale, 1e-300)) continue;
    FourVector v;
    double max_imag = 0.0;
    for (int mu = 0; mu < 4; ++mu) {
      v[mu] = es.eigenvectors()(mu, i).real();
      max_imag = std::max(max_imag, std::abs(es.eigenvectors()(mu, i).imag()));
    }
    if (max_imag > 1e-8) continue;
    const double s = minkowski_product(v, v);
    if (s <= 0.0) continue;
    if (v.t < 0.0) v = -v;
    timelike.push_back({es.eigenvalues()(i).real(), v * (1.0 / std::sqrt(s))});
  }
  if (timelike.empty())
    throw std::domain_error("extract_temperature: no timelike eigendirection of the order-2 tensor");

  // Degeneracy flag: timelike eigenvalue within 1e-8 (relative) of any other.
  const double lam = timelike.front().first;
  for (int i = 0; i < 4; ++i) {
    const double other = es.eigenvalues()(i).real();
    if (std::abs(other - lam) > 1e-14 && std::abs(other - lam) < 1e-8 * std::max(scale, 1e-300))
      out.degenerate_fallback = true;
  }
  FourVector e_dir = out.degenerate_fallback ? FourVector{1, 0, 0, 0} : timelike.front().second;
  out.beta_vec = InverseTemperatureVector(beta_mag, TimeDirection(e_dir));

  const SymmetricTensor ref = thermal_function(2, 0.0, out.beta_vec);
  out.fit_residual = (M - ref).norm() / std::max(ref.norm(), 1e-300);
  return out;
}

// ---- mixed-temperature fitting ------------------------------------------------

struct MixtureFit {
  std::vector<double> weights;
  double residual = 0.0;

  nlohmann::json to_json() const {
    return nlohmann::json{{"weights", weights}, {"residual", residual}};
  }
};

// Constrained least squares over the probability simplex: stack the tensor
// discrepancies for orders 0..N and minimize over w >= 0, sum w = 1 by
// enumerating active sets (candidate lists are short).
inline MixtureFit fit_mixture(const StateSpec& spec, const FourVector& q,
                              const std::vector<InverseTemperatureVector>& candidate_betas, int N,
                              const QuadratureConfig& config = QuadratureConfig::standard()) {
  if (candidate_betas.empty()) throw std::domain_error("fit_mixture: no candidates");
  if (N < 0 || N > 4) throw std::domain_error("fit_mixture: order must lie in 0..4");
  if (spec.mass() != 0.0) throw std::domain_error("fit_mixture: only massless states supported");
  const int K = int(candidate_betas.size());
  if (K > 16) throw std::domain_error("fit_mixture: too many candidates for exact active sets");

  // Stack rows: one per sorted component per order, weighted by the square
  // root of the permutation multiplicity so the objective is the Frobenius
  // norm of the tensor mismatch.
  std::vector<double> target;
  std::vector<std::vector<double>> cols(K);
  for (int n = 0; n <= N; ++n) {
    const SymmetricTensor T = taylor_tensor(spec, q, n, config).tensor;
    std::vector<SymmetricTensor> G;
    for (const auto& b : candidate_betas) G.push_back(thermal_function(n, 0.0, b));
    for (const auto& idx : sorted_multi_indices(n)) {
      const double m = std::sqrt(multi_index_multiplicity(idx));
      target.push_back(m * T.coefficient(idx));
      for (int i = 0; i < K; ++i) cols[i].push_back(m * G[i].coefficient(idx));
    }
  }
  const int R = int(target.size());
  Eigen::MatrixXd A(R, K);
  Eigen::VectorXd b(R);
  for (int r = 0; r < R; ++r) {
    b(r) = target[r];
    for (int i = 0; i < K; ++i) A(r, i) = cols[i][r];
  }

  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_w;
  for (std::uint32_t mask = 1; mask < (1u << K); ++mask) {
    std::vector<int> sup;
    for (int i = 0; i < K; ++i)
      if (mask & (1u << i)) sup.push_back(i);
    const int S = int(sup.size());
    Eigen::MatrixXd As(R, S);
    for (int s = 0; s < S; ++s) As.col(s) = A.col(sup[s]);
    // KKT system for min |As w - b|^2 subject to 1.w = 1
    Eigen::MatrixXd kkt(S + 1, S + 1);
    kkt.setZero();
    kkt.topLeftCorner(S, S) = As.transpose() * As;
    kkt.topRightCorner(S, 1).setOnes();
    kkt.bottomLeftCorner(1, S).setOnes();
    Eigen::VectorXd rhs(S + 1);
    rhs.head(S) = As.transpose() * b;
    rhs(S) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    Eigen::VectorXd sol = lu.solve(rhs);
    bool feasible = true;
    for (int s = 0; s < S; ++s)
      if (sol(s) < -1e-12) feasible = false;
    if (!feasible) continue;
    const double res = (As * sol.head(S) - b).norm();
    if (res < best) {
      best = res;
      best_w = Eigen::VectorXd::Zero(K);
      for (int s = 0; s < S; ++s) best_w(sup[s]) = std::max(0.0, sol(s));
    }
  }
  if (!std::isfinite(best)) throw std::runtime_error("fit_mixture: no feasible active set");

  MixtureFit fit;
  fit.residual = best;
  for (int i = 0; i < K; ++i) fit.weights.push_back(best_w(i));
  return fit;
}

}  // namespace lkms
