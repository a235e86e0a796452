#include <cmath>
#include <random>

#include "reference_formulas.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "robreg/error.hpp"
#include "robreg/error_model.hpp"

using robreg::ErrorModel;
using robreg::Family;

namespace {

std::vector<ErrorModel> all_models() {
  return {ErrorModel::normal(),        ErrorModel::huber(),
          ErrorModel::tukey_biweight(), ErrorModel::student_t(),
          ErrorModel::lptn(),           ErrorModel::improper_lptn_from_rho(0.9)};
}

}  // namespace

TEST_CASE("lptn hyperparameters follow from rho") {
  const auto h = robreg::lptn_hyperparams(0.9);
  CHECK(h.tau == doctest::Approx(1.6448536269514722).epsilon(1e-14));
  const double lam = 1 + 2 / 0.1 * oracle::phi(h.tau) * h.tau * std::log(h.tau);
  CHECK(h.lambda == doctest::Approx(lam).epsilon(1e-13));
  CHECK(h.lambda > 1.0);
  CHECK(robreg::lptn_rho_lower_bound() == doctest::Approx(2 * oracle::Phi(1.0) - 1).epsilon(1e-14));
  CHECK_THROWS_AS(robreg::lptn_hyperparams(0.5), robreg::DomainError);
  CHECK_THROWS_AS(robreg::lptn_hyperparams(1.0), robreg::DomainError);
  CHECK_THROWS_WITH(robreg::lptn_hyperparams(1.2), doctest::Contains("rho out of admissible range"));
}

TEST_CASE("lptn density is continuous at tau") {
  for (double rho : {0.7, 0.8, 0.9, 0.95, 0.99}) {
    CHECK(robreg::lptn_continuity_check(ErrorModel::lptn(rho)) <= 1e-12);
  }
  CHECK_THROWS_AS(robreg::lptn_continuity_check(ErrorModel::huber()), robreg::DomainError);
}

TEST_CASE("rho, psi and W match the printed formulas") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 4.0);
  for (const auto& m : all_models()) {
    CAPTURE(m.describe());
    for (int i = 0; i < 1000; ++i) {
      const double e = g(rng);
      const auto ref = printed::evaluate(m, e);
      CHECK(std::abs(m.rho_fn(e) - ref.rho) <= 1e-12 * std::max(1.0, std::abs(ref.rho)));
      CHECK(std::abs(m.psi_fn(e) - ref.psi) <= 1e-12 * std::max(1.0, std::abs(ref.psi)));
      CHECK(std::abs(m.weight_fn(e) - ref.w) <= 1e-12 * std::max(1.0, std::abs(ref.w)));
    }
  }
}

TEST_CASE("psi is the scaled derivative of rho") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-12.0, 12.0);
  for (const auto& m : all_models()) {
    CAPTURE(m.describe());
    const double c = printed::psi_constant(m);
    const double b = printed::branch_point(m);
    int checked = 0;
    while (checked < 500) {
      const double e = u(rng);
      if (std::abs(std::abs(e) - b) < 1e-3) continue;
      const double h = 1e-6;
      const double fd = (m.rho_fn(e + h) - m.rho_fn(e - h)) / (2 * h);
      CHECK(c * fd == doctest::Approx(m.psi_fn(e)).epsilon(1e-5));
      ++checked;
    }
  }
}

TEST_CASE("weight is psi over eps, with psi'(0) at zero") {
  for (const auto& m : all_models()) {
    CHECK(m.weight_fn(0.0) == doctest::Approx(1.0));
    for (double e : {-7.3, -2.0, -0.4, 0.3, 1.5, 3.9, 25.0}) {
      CHECK(m.weight_fn(e) == doctest::Approx(m.psi_fn(e) / e).epsilon(1e-14));
    }
  }
}

TEST_CASE("normalizing constants integrate each proper density to one") {
  for (double k : {1.0, 1.345, 2.0}) {
    const auto m = ErrorModel::huber(k);
    const double total = oracle::integrate_symmetric(
        [&](double e) { return std::exp(m.log_density(e)); }, k);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    // Printed constant, written out independently.
    const double mass = 2 * std::exp(-k * k / 2) / k + std::sqrt(2 * M_PI) * (2 * oracle::Phi(k) - 1);
    CHECK(*m.log_m() == doctest::Approx(std::log(mass)).epsilon(1e-14));
  }
  for (double nu : {1.0, 4.0, 10.0}) {
    const auto m = ErrorModel::student_t(nu);
    const double total = oracle::integrate_symmetric(
        [&](double e) { return std::exp(m.log_density(e)); }, 3.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  const auto n = ErrorModel::normal();
  CHECK(oracle::integrate_symmetric([&](double e) { return std::exp(n.log_density(e)); }, 3.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lptn log density equals the printed density") {
  for (double rho : {0.7, 0.9, 0.95}) {
    const auto m = ErrorModel::lptn(rho);
    for (double e : {0.0, 0.5, -1.2, 1.9, -3.0, 10.0, 1e3, -1e8}) {
      CHECK(std::exp(m.log_density(e)) ==
            doctest::Approx(printed::lptn_density(e, rho)).epsilon(1e-11));
    }
  }
}

TEST_CASE("tukey log g is exactly -1 beyond k") {
  const auto m = ErrorModel::tukey_biweight();
  for (double e : {4.6851, 5.0, 17.0, -1e6, 1e300}) CHECK(m.log_g(e) == -1.0);
  CHECK(m.log_g(0.0) == 0.0);
}

TEST_CASE("improper models have no density") {
  CHECK_FALSE(ErrorModel::tukey_biweight().is_proper());
  CHECK_FALSE(ErrorModel::improper_lptn_from_rho(0.9).is_proper());
  CHECK_THROWS_WITH(ErrorModel::tukey_biweight().log_density(0.1), "improper model has no density");
  const auto imp = ErrorModel::improper_lptn_from_rho(0.9);
  CHECK(imp.lambda() == 1.0);
  CHECK(imp.tau() == doctest::Approx(1.6448536269514722));
  CHECK_THROWS_AS(ErrorModel::improper_lptn(0.9), robreg::DomainError);
}

TEST_CASE("factories validate hyperparameters") {
  CHECK_THROWS_AS(ErrorModel::huber(0.0), robreg::DomainError);
  CHECK_THROWS_AS(ErrorModel::tukey_biweight(-1.0), robreg::DomainError);
  CHECK_THROWS_AS(ErrorModel::student_t(0.0), robreg::DomainError);
  CHECK_THROWS_AS(ErrorModel::lptn(0.6), robreg::DomainError);
  CHECK(ErrorModel::from_family(Family::kHuber, NAN).k() == 1.345);
  CHECK(ErrorModel::from_family(Family::kStudentT, 2.5).nu() == 2.5);
}

TEST_CASE("family names round trip and aliases parse") {
  for (const auto& m : all_models()) {
    CHECK(robreg::parse_family(robreg::family_name(m.family())) == m.family());
    CHECK(ErrorModel::from_record(m.to_record()) == m);
  }
  CHECK(robreg::parse_family("tukey") == Family::kTukeyBiweight);
  CHECK(robreg::parse_family("t") == Family::kStudentT);
  CHECK(robreg::parse_family("ols") == Family::kNormal);
  CHECK_THROWS_AS(robreg::parse_family("cauchyish"), robreg::UsageError);
}

TEST_CASE("loss functions are even and non-decreasing in |eps|") {
  for (const auto& m : all_models()) {
    double prev = m.rho_fn(0.0);
    for (double e = 0.05; e < 50.0; e += 0.05) {
      CHECK(m.rho_fn(e) == doctest::Approx(m.rho_fn(-e)).epsilon(1e-15));
      CHECK(m.rho_fn(e) >= prev - 1e-12);
      prev = m.rho_fn(e);
    }
  }
}
