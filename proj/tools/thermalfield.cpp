// thermalfield: evaluate two-point functions of the thermal free field and
// run the equilibrium checks from the command line.
//
// Exit codes: 0 success/pass, 1 checked-and-failed, 2 configuration error,
// 3 convergence or singular-evaluation error.

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lkms/balanced_derivs.hpp"
#include "lkms/correlators.hpp"
#include "lkms/equilibrium.hpp"
#include "lkms/minkowski.hpp"
#include "lkms/quadrature.hpp"
#include "lkms/state_spec.hpp"

namespace {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

lkms::FourVector parse_four_vector(const std::string& s, const char* what) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      vals.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": cannot parse component '" + tok + "'");
    }
  }
  if (vals.size() != 4) throw ConfigError(std::string(what) + ": expected 4 components");
  return {vals[0], vals[1], vals[2], vals[3]};
}

lkms::StateSpec load_state(const std::string& arg) {
  std::string text = arg;
  if (!arg.empty() && arg.front() != '{') {
    std::ifstream in(arg);
    if (!in) throw ConfigError("cannot open state file: " + arg);
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("state JSON parse error: ") + e.what());
  }
  try {
    return lkms::state_spec_from_json(j);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("state spec invalid: ") + e.what());
  }
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << content;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json config_json(const lkms::QuadratureConfig& cfg, const std::string& profile) {
  return json{{"profile", profile},
              {"tolerance", cfg.tolerance},
              {"max_subdivisions", cfg.max_subdivisions},
              {"image_terms", cfg.image_terms},
              {"fd_step", cfg.fd_step},
              {"richardson_levels", cfg.richardson_levels}};
}

struct CommonOpts {
  std::string state;
  std::string q_str = "0,0,0,0";
  std::string beta_str;
  std::string profile;
  std::string out;
  std::string format;
  double tol = 1e-6;
  int order = 2;
  double kmax = 0.0;
  bool extract = false;

  lkms::QuadratureConfig resolve_config() const {
    if (!profile.empty()) return lkms::QuadratureConfig::profile(profile);
    return lkms::QuadratureConfig::from_environment();
  }
  std::string resolved_profile_name() const {
    if (!profile.empty()) return profile;
    if (const char* env = std::getenv("THERMALFIELD_PROFILE")) return env;
    return "default";
  }
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_state = true) {
  auto* s = cmd->add_option("--state", o.state, "state spec: JSON file path or inline JSON");
  if (needs_state) s->required();
  cmd->add_option("--q", o.q_str, "base point t,x,y,z");
  cmd->add_option("--beta", o.beta_str, "candidate beta four-vector b0,b1,b2,b3");
  cmd->add_option("--order", o.order, "maximum balanced-derivative order N");
  cmd->add_option("--kmax", o.kmax, "momentum-grid extent");
  cmd->add_option("--tol", o.tol, "verdict tolerance");
  cmd->add_option("--profile", o.profile, "quadrature profile: fast|default|strict");
  cmd->add_option("--out", o.out, "output path (default stdout)");
  cmd->add_option("--format", o.format, "output format: json|csv");
  cmd->add_flag("--extract", o.extract, "extract the candidate beta from the state first");
}

// ---- eval -------------------------------------------------------------------

struct EvalOpts {
  CommonOpts common;
  double tmin = -1.0, tmax = 1.0;
  int tn = 11;
  double rmin = 0.0, rmax = 1.0;
  int rn = 11;
  double sigma = 0.25;
};

int cmd_eval(const EvalOpts& o) {
  const lkms::StateSpec spec = load_state(o.common.state);
  const lkms::FourVector q = parse_four_vector(o.common.q_str, "--q");
  const lkms::QuadratureConfig cfg = o.common.resolve_config();
  if (o.tn < 1 || o.rn < 1) throw ConfigError("grid sizes must be >= 1");

  lkms::InverseTemperatureVector bv;
  if (!o.common.beta_str.empty()) {
    try {
      bv = lkms::InverseTemperatureVector(parse_four_vector(o.common.beta_str, "--beta"));
    } catch (const std::domain_error& e) {
      throw ConfigError(e.what());
    }
  } else if (spec.is<lkms::KmsState>()) {
    bv = spec.as<lkms::KmsState>().beta;
  } else if (spec.is<lkms::HotBangState>()) {
    bv = lkms::hotbang_local_beta(spec.as<lkms::HotBangState>(), q);
  } else if (spec.is<lkms::MixtureState>()) {
    double bmin = std::numeric_limits<double>::infinity();
    for (const auto& c : spec.as<lkms::MixtureState>().components)
      bmin = std::min(bmin, c.beta.beta);
    bv = lkms::InverseTemperatureVector(bmin, lkms::TimeDirection());
  } else {
    throw ConfigError("eval: vacuum state needs an explicit --beta for the strip frame");
  }

  std::string csv = "t,r,sigma,re,im,err\n";
  for (int it = 0; it < o.tn; ++it) {
    const double t = o.tn == 1 ? o.tmin : o.tmin + (o.tmax - o.tmin) * it / (o.tn - 1);
    for (int ir = 0; ir < o.rn; ++ir) {
      const double r = o.rn == 1 ? o.rmin : o.rmin + (o.rmax - o.rmin) * ir / (o.rn - 1);
      const lkms::StripPoint pt(lkms::FourVector{t, r, 0.0, 0.0}, o.sigma, bv);
      const auto v = lkms::eval_strip(spec, q, pt, cfg);
      csv += fmt(t) + "," + fmt(r) + "," + fmt(o.sigma) + "," + fmt(v.value.real()) + "," +
             fmt(v.value.imag()) + "," + fmt(v.error) + "\n";
    }
  }
  write_output(o.common.out, csv);
  return 0;
}

// ---- check ------------------------------------------------------------------

struct CheckOpts {
  CommonOpts common;
  std::string which = "both";
};

int cmd_check(const CheckOpts& o) {
  const lkms::StateSpec spec = load_state(o.common.state);
  const lkms::FourVector q = parse_four_vector(o.common.q_str, "--q");
  const lkms::QuadratureConfig cfg = o.common.resolve_config();
  if (o.which != "lte" && o.which != "lkms" && o.which != "both")
    throw ConfigError("--which must be lte, lkms or both");
  if (!(o.common.tol > 0.0)) throw ConfigError("--tol must be positive");
  if (o.common.order < 0 || o.common.order > 4) throw ConfigError("--order must lie in 0..4");

  json report;
  report["command"] = "check";
  report["state"] = lkms::state_spec_to_json(spec);
  report["q"] = lkms::detail::four_vector_json(q);
  report["config"] = config_json(cfg, o.common.resolved_profile_name());

  lkms::InverseTemperatureVector candidate;
  if (o.common.extract) {
    const auto ex = lkms::extract_temperature(spec, q, 1e-12, cfg);
    candidate = ex.beta_vec;
    report["extracted"] = ex.to_json();
    if (spec.is<lkms::HotBangState>()) {
      // resolved proportionality between the local beta vector and A*q
      const double A = spec.as<lkms::HotBangState>().A;
      const double qnorm = std::sqrt(lkms::minkowski_product(q, q));
      report["hotbang_factor"] = candidate.beta / (A * qnorm);
    }
  } else if (!o.common.beta_str.empty()) {
    try {
      candidate = lkms::InverseTemperatureVector(parse_four_vector(o.common.beta_str, "--beta"));
    } catch (const std::domain_error& e) {
      throw ConfigError(e.what());
    }
  } else {
    throw ConfigError("check: need --beta or --extract");
  }
  report["candidate_beta"] = lkms::detail::four_vector_json(candidate.vector());

  bool pass = true;
  if (o.which == "lte" || o.which == "both") {
    const auto rep = lkms::check_lte(spec, q, candidate, o.common.order, o.common.tol, cfg);
    report["lte"] = rep.to_json();
    pass = pass && rep.verdict;
  }
  if (o.which == "lkms" || o.which == "both") {
    const double kmax = o.common.kmax > 0.0 ? o.common.kmax : 10.0 / candidate.beta;
    const auto rep = lkms::check_lkms_momentum(spec, q, candidate, kmax, o.common.tol, cfg);
    report["lkms"] = rep.to_json();
    pass = pass && rep.verdict;
  }
  report["verdict"] = pass ? "pass" : "fail";

  if (o.common.format == "csv") {
    std::string csv;
    if (report.contains("lte")) {
      lkms::LTEReport dummy;
      csv += "section,n,discrepancy,tolerance,pass\n";
      for (const auto& row : report["lte"]["per_order_discrepancy"])
        csv += "lte," + std::to_string(row["n"].get<int>()) + "," +
               fmt(row["discrepancy"].get<double>()) + "," + fmt(row["tolerance"].get<double>()) +
               "," + (row["pass"].get<bool>() ? "1" : "0") + "\n";
    }
    if (report.contains("lkms")) {
      const auto& l = report["lkms"];
      for (std::size_t i = 0; i < l["k_grid"].size(); ++i)
        csv += "lkms," + fmt(l["k_grid"][i].get<double>()) + "," +
               fmt(l["residual_profile"][i].get<double>()) + ",,\n";
    }
    write_output(o.common.out, csv);
  } else {
    write_output(o.common.out, report.dump(2) + "\n");
  }
  return pass ? 0 : 1;
}

// ---- sweep-hotbang ------------------------------------------------------------

struct SweepOpts {
  CommonOpts common;
  double A = 1.0;
  std::vector<std::string> points;
};

int cmd_sweep_hotbang(const SweepOpts& o) {
  if (!(o.A > 0.0)) throw ConfigError("sweep-hotbang: A must be positive");
  if (o.points.empty()) throw ConfigError("sweep-hotbang: need at least one --q point");
  const lkms::QuadratureConfig cfg = o.common.resolve_config();
  const lkms::StateSpec spec = lkms::StateSpec::hot_bang(o.A);

  std::string csv = "qt,qx,qy,qz,bt,bx,by,bz,ratio\n";
  std::vector<double> ratios;
  for (const auto& ps : o.points) {
    const lkms::FourVector q = parse_four_vector(ps, "--q");
    if (!lkms::is_future_timelike(q)) throw ConfigError("sweep-hotbang: q not in V_+: " + ps);
    const auto ex = lkms::extract_temperature(spec, q, 1e-12, cfg);
    const auto b = ex.beta_vec.vector();
    const double qn = std::sqrt(lkms::minkowski_product(q, q));
    const double ratio = ex.beta_vec.beta / (o.A * qn);
    ratios.push_back(ratio);
    csv += fmt(q.t) + "," + fmt(q.x) + "," + fmt(q.y) + "," + fmt(q.z) + "," + fmt(b.t) + "," +
           fmt(b.x) + "," + fmt(b.y) + "," + fmt(b.z) + "," + fmt(ratio) + "\n";
  }
  write_output(o.common.out, csv);

  const double r0 = ratios.front();
  for (double r : ratios)
    if (std::abs(r - r0) > 1e-3 * std::abs(r0)) return 1;
  return 0;
}

// ---- validate-appendix-b --------------------------------------------------------

struct ValidateOpts {
  CommonOpts common;
  double mass = 0.0;
  double beta = 1.0;
};

int cmd_validate_appendix_b(const ValidateOpts& o) {
  if (!(o.beta > 0.0)) throw ConfigError("validate-appendix-b: beta must be positive");
  if (o.mass < 0.0) throw ConfigError("validate-appendix-b: mass must be >= 0");
  const lkms::QuadratureConfig cfg = o.common.resolve_config();

  const double beta = o.beta;
  const lkms::InverseTemperatureVector bv(beta, lkms::TimeDirection());
  const lkms::StateSpec spec = lkms::StateSpec::kms(o.mass, bv);
  const lkms::FourVector q{};

  // Windowed Fourier transform of strip samples at sigma = beta/2 versus the
  // closed-form spectrum convolved with the window transform.
  const double sigma = 0.5 * beta;
  const double s = beta;           // Gaussian window width
  const double T = 8.0 * s;        // sample half-range
  const double dt = beta / 10.0;   // trapezoid step (analytic integrand)
  const int M = int(std::ceil(T / dt));
  std::vector<std::complex<double>> samples(2 * M + 1);
  for (int j = -M; j <= M; ++j) {
    const double t = j * dt;
    const lkms::StripPoint pt(lkms::FourVector{t, 0, 0, 0}, sigma, bv);
    const double g = std::exp(-t * t / (2.0 * s * s));
    samples[j + M] = lkms::eval_strip(spec, q, pt, cfg).value * g;
  }
  const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto v_num = [&](double k) {
    std::complex<double> acc = 0.0;
    for (int j = -M; j <= M; ++j)
      acc += samples[j + M] * std::exp(std::complex<double>(0.0, k * j * dt));
    return acc * (dt * inv_sqrt2pi);
  };
  auto v_ref = [&](double k) {
    const double lo = std::min(-41.0 / (beta - sigma) - o.mass, k - 12.0 / s);
    const double hi = std::max(41.0 / sigma + o.mass, k + 12.0 / s);
    auto f = [&](double kp) {
      return lkms::time_axis_spectrum(spec, q, kp).real() *
             std::exp(-sigma * kp - 0.5 * s * s * (k - kp) * (k - kp));
    };
    auto r = lkms::integrate_or_throw(f, lo, hi, 1e-12, cfg.max_subdivisions, 2.0 / s);
    return s * inv_sqrt2pi * r.value;
  };

  constexpr int kNodes = 81;
  const double kmax = 10.0 / beta;
  double scale = 0.0;
  std::vector<double> ks(kNodes);
  std::vector<std::complex<double>> num(kNodes), ref(kNodes);
  for (int i = 0; i < kNodes; ++i) {
    ks[i] = -kmax + 2.0 * kmax * i / (kNodes - 1);
    num[i] = v_num(ks[i]);
    ref[i] = v_ref(ks[i]);
    scale = std::max(scale, std::abs(ref[i]));
  }
  std::string csv = "k,spectrum,re_num,im_num,re_ref,im_ref,residual\n";
  double max_res = 0.0;
  for (int i = 0; i < kNodes; ++i) {
    const double res = std::abs(num[i] - ref[i]) / scale;
    max_res = std::max(max_res, res);
    csv += fmt(ks[i]) + "," + fmt(lkms::time_axis_spectrum(spec, q, ks[i]).real()) + "," +
           fmt(num[i].real()) + "," + fmt(num[i].imag()) + "," + fmt(ref[i].real()) + "," +
           fmt(ref[i].imag()) + "," + fmt(res) + "\n";
  }
  write_output(o.common.out, csv);
  return max_res < 1e-6 ? 0 : 1;
}

// ---- calibrate ------------------------------------------------------------------

int cmd_calibrate(const CommonOpts& o) {
  const auto& oc = lkms::order_coefficients();
  json arr = json::array();
  for (int n = 0; n <= 4; ++n)
    arr.push_back({{"order", n}, {"c_n", oc.c[n]}, {"residual", oc.residual[n]}});
  write_output(o.out, json{{"command", "calibrate"}, {"coefficients", arr}}.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermal two-point functions and local equilibrium checks"};
  app.require_subcommand(1);

  EvalOpts eval_opts;
  auto* eval = app.add_subcommand("eval", "evaluate F(z + i sigma e) on a (t, r) grid");
  add_common(eval, eval_opts.common);
  eval->add_option("--tmin", eval_opts.tmin, "grid start in t");
  eval->add_option("--tmax", eval_opts.tmax, "grid end in t");
  eval->add_option("--tn", eval_opts.tn, "number of t nodes");
  eval->add_option("--rmin", eval_opts.rmin, "grid start in r");
  eval->add_option("--rmax", eval_opts.rmax, "grid end in r");
  eval->add_option("--rn", eval_opts.rn, "number of r nodes");
  eval->add_option("--sigma", eval_opts.sigma, "strip coordinate sigma");

  CheckOpts check_opts;
  auto* check = app.add_subcommand("check", "run equilibrium checks against a candidate beta");
  add_common(check, check_opts.common);
  check->add_option("--which", check_opts.which, "lte|lkms|both");

  SweepOpts sweep_opts;
  auto* sweep = app.add_subcommand("sweep-hotbang", "extract beta(q) along hot-bang points");
  sweep->add_option("--A", sweep_opts.A, "hot-bang constant")->required();
  sweep->add_option("--q", sweep_opts.points, "base point t,x,y,z (repeatable)");
  sweep->add_option("--profile", sweep_opts.common.profile, "quadrature profile");
  sweep->add_option("--out", sweep_opts.common.out, "output path");

  ValidateOpts val_opts;
  auto* val = app.add_subcommand("validate-appendix-b",
                                 "compare strip samples against the closed-form spectrum");
  val->add_option("--mass", val_opts.mass, "field mass");
  val->add_option("--beta", val_opts.beta, "inverse temperature");
  val->add_option("--profile", val_opts.common.profile, "quadrature profile");
  val->add_option("--out", val_opts.common.out, "output path");

  CommonOpts cal_opts;
  auto* cal = app.add_subcommand("calibrate", "emit the calibrated order coefficients");
  cal->add_option("--out", cal_opts.out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*eval) {
      try {
        return cmd_eval(eval_opts);
      } catch (const std::domain_error& e) {
        // singular or out-of-tube grid points surface as evaluation failures
        std::cerr << "evaluation error: " << e.what() << "\n";
        return 3;
      }
    }
    if (*check) return cmd_check(check_opts);
    if (*sweep) return cmd_sweep_hotbang(sweep_opts);
    if (*val) return cmd_validate_appendix_b(val_opts);
    if (*cal) return cmd_calibrate(cal_opts);
  } catch (const lkms::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
