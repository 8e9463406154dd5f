#include <catch_amalgamated.hpp>

#include "lkms/balanced_derivs.hpp"

using namespace lkms;
using Catch::Approx;

namespace {
const InverseTemperatureVector kBeta1{FourVector{1, 0, 0, 0}};
const FourVector kOrigin{};
}  // namespace

TEST_CASE("Wick square values") {
  for (double beta : {0.5, 1.0, 2.0}) {
    const InverseTemperatureVector bv(FourVector{beta, 0, 0, 0});
    const StateSpec kms = StateSpec::kms(0.0, bv);
    CHECK(regularized_difference(kms, kOrigin, FourVector{}) ==
          Approx(1.0 / (12.0 * beta * beta)).epsilon(1e-8));
  }
  CHECK(regularized_difference(StateSpec::vacuum(0.0), kOrigin, FourVector{0.3, 0.1, 0, 0}) == 0.0);

  // hot-bang carries the local inverse temperature 2Aq
  const StateSpec hb = StateSpec::hot_bang(1.0);
  const FourVector q{1, 0, 0, 0};
  CHECK(regularized_difference(hb, q, FourVector{}) == Approx(1.0 / (12.0 * 4.0)).epsilon(1e-8));
  CHECK_THROWS_AS(regularized_difference(hb, FourVector{0, 1, 0, 0}, FourVector{}),
                  std::domain_error);
}

TEST_CASE("regularized difference is even and smooth") {
  const StateSpec kms = StateSpec::kms(0.0, kBeta1);
  const FourVector z{0.12, 0.07, -0.05, 0.02};
  CHECK(regularized_difference(kms, kOrigin, z) ==
        Approx(regularized_difference(kms, kOrigin, -z)).epsilon(1e-10));
}

TEST_CASE("order 0 tensor equals the Wick square") {
  const StateSpec kms = StateSpec::kms(0.0, kBeta1);
  const auto T = taylor_tensor(kms, kOrigin, 0);
  CHECK(T.tensor.diagonal(FourVector{}) ==
        Approx(regularized_difference(kms, kOrigin, FourVector{})));
}

TEST_CASE("odd orders vanish for sharp KMS states") {
  const double ch = std::cosh(0.5), sh = std::sinh(0.5);
  const StateSpec specs[] = {
      StateSpec::kms(0.0, kBeta1),
      StateSpec::kms(0.0, InverseTemperatureVector(FourVector{2 * ch, 0, 2 * sh, 0}))};
  for (const auto& spec : specs) {
    for (int n : {1, 3}) {
      const auto T = taylor_tensor(spec, kOrigin, n);
      CHECK(T.tensor.norm() < 10.0 * T.error);
    }
  }
}

TEST_CASE("order 2 tensor is proportional to the beta-derivative tensor") {
  const auto F = beta_derivative_tensor(2, kBeta1);
  CHECK(F.coefficient({0, 0}) == Approx(6.0));   // 8 b0^2/(b^2)^3 - 2/(b^2)^2
  CHECK(F.coefficient({1, 1}) == Approx(2.0));   // -2 eta_11/(b^2)^2
  CHECK(F.coefficient({0, 1}) == 0.0);

  const StateSpec kms = StateSpec::kms(0.0, kBeta1);
  const auto T = taylor_tensor(kms, kOrigin, 2);
  // the ratio must be component independent
  const double c = T.tensor.coefficient({0, 0}) / F.coefficient({0, 0});
  for (const auto& idx : sorted_multi_indices(2)) {
    CHECK(T.tensor.coefficient(idx) ==
          Approx(c * F.coefficient(idx)).margin(std::max(1e-6, 10.0 * T.error)));
  }
  CHECK(c == Approx(order_coefficient(2)).epsilon(1e-6));
}

TEST_CASE("calibrated coefficients") {
  const auto& oc = order_coefficients();
  CHECK(oc.c[0] == Approx(1.0 / 12.0).epsilon(1e-9));
  CHECK(std::abs(oc.c[1]) < 1e-8);
  CHECK(std::abs(oc.c[3]) < 1e-4);
  CHECK(oc.residual[0] < 1e-8);
  CHECK(oc.residual[2] < 1e-8);
  CHECK(oc.residual[4] < 1e-4);
}

TEST_CASE("thermal function analytic properties") {
  CHECK(thermal_function(0, 0.0, kBeta1).diagonal(FourVector{}) == Approx(1.0 / 12.0));
  CHECK(thermal_function(1, 0.0, kBeta1).norm() < 1e-7);
  CHECK_THROWS_AS(thermal_function(2, 1.0, kBeta1), std::domain_error);
  CHECK_THROWS_AS(thermal_function(5, 0.0, kBeta1), std::domain_error);

  // homogeneity: S_n(lambda beta) = lambda^{-(n+2)} S_n(beta)
  const double lam = 2.0;
  const InverseTemperatureVector scaled(FourVector{lam, 0, 0, 0});
  for (int n : {0, 2, 4}) {
    const auto a = thermal_function(n, 0.0, scaled);
    const auto b = thermal_function(n, 0.0, kBeta1) * std::pow(lam, -(n + 2.0));
    CHECK(a.max_coefficient_difference(b) < 1e-12 * std::max(1.0, b.norm()));
  }
}

TEST_CASE("finite difference matches analytic across magnitudes and boosts") {
  const double boosts[][2] = {{0.0, 0.0}, {0.4, 0.0}, {0.0, -0.7}};
  for (double beta : {0.5, 1.0, 2.0}) {
    for (const auto& bo : boosts) {
      const double chx = std::cosh(bo[0]), shx = std::sinh(bo[0]);
      const double chy = std::cosh(bo[1]), shy = std::sinh(bo[1]);
      // boost in x then y applied to (beta, 0, 0, 0)
      FourVector v{beta * chx, beta * shx, 0, 0};
      v = FourVector{v.t * chy, v.x, v.t * shy + 0 * chy, 0};
      // renormalize to magnitude beta
      const InverseTemperatureVector bv(beta, TimeDirection(v));
      const StateSpec kms = StateSpec::kms(0.0, bv);
      for (int n : {0, 2}) {
        const auto T = taylor_tensor(kms, kOrigin, n);
        const auto S = thermal_function(n, 0.0, bv);
        CHECK((T.tensor - S).norm() < std::max(1e-6, 10.0 * T.error));
      }
    }
  }
}

TEST_CASE("mixture Taylor tensors are weight linear") {
  const InverseTemperatureVector b2(FourVector{2, 0, 0, 0});
  const StateSpec mix = StateSpec::mixture(0.0, {{0.3, kBeta1}, {0.7, b2}});
  for (int n : {0, 2}) {
    const auto Tm = taylor_tensor(mix, kOrigin, n);
    const auto T1 = taylor_tensor(StateSpec::kms(0.0, kBeta1), kOrigin, n);
    const auto T2 = taylor_tensor(StateSpec::kms(0.0, b2), kOrigin, n);
    const auto sum = T1.tensor * 0.3 + T2.tensor * 0.7;
    CHECK((Tm.tensor - sum).norm() < 10.0 * (Tm.error + T1.error + T2.error) + 1e-9);
  }
}

TEST_CASE("massive Wick square stays finite and positive") {
  const StateSpec kms = StateSpec::kms(1.0, kBeta1);
  const double d0 = regularized_difference(kms, kOrigin, FourVector{});
  CHECK(d0 > 0.0);
  CHECK(d0 < 1.0 / 12.0);  // Bose suppression below the massless value
}
