#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "rpsm/interferometer.hpp"
#include "rpsm/oracle.hpp"

using namespace rpsm;

namespace {

ExperimentParams point(double theta, double beta, Scheme scheme, double loss = 0.0,
                       double eps = 0.0) {
  ExperimentParams p;
  p.theta_rad = theta;
  p.beta_rad = beta;
  p.scheme = scheme;
  p.loss_L = loss;
  p.epsilon_rad = eps;
  return p;
}

const PolVector kH{Complex{1.0}, Complex{}};

double vec_diff(const PolVector& a, const PolVector& b) {
  return std::max(std::abs(a.h - b.h), std::abs(a.v - b.v));
}

}  // namespace

TEST_CASE("single round matches the closed form and ignores epsilon") {
  const PulseTrainResult r =
      simulate_scheme1(point(0.1, 0.2, Scheme::SchemeI, 0.0, 0.7), 1);
  REQUIRE(r.records.size() == 1);
  CHECK(std::abs(r.records[0].p_dj - 0.012414836399092054) < 1e-15);
  CHECK(std::abs(r.P_d_total - 0.012414836399092054) < 1e-15);
  CHECK(std::abs(r.P_V_mixed - 0.20070161939685507) < 1e-12);
}

TEST_CASE("theta = 0 is a pure geometric decay") {
  const double beta = 0.9;
  const PulseTrainResult r = simulate_scheme1(point(0.0, beta, Scheme::SchemeI), 50);
  const double y = (1.0 + std::cos(beta)) / 2.0;
  CHECK(std::abs(r.P_d_total - (1.0 - std::pow(y, 50))) < 1e-12);
  CHECK(r.Gamma_total < 1e-18);
  for (const RoundRecord& rec : r.records) CHECK(rec.loss_j == 0.0);
}

TEST_CASE("pulse train anchors at n = 1e5") {
  const PulseTrainResult s1 =
      simulate_scheme1(point(0.1, 0.2, Scheme::SchemeI), 100000);
  CHECK(std::abs(s1.P_d_total - 0.83284638235295049) < 1e-10);
  CHECK(std::abs(s1.Gamma_total - 0.16715361764704951) < 1e-10);
  CHECK(std::abs(s1.P_V_mixed - 0.20070161939685507) < 1e-10);
  CHECK(s1.residual < 1e-10);

  const PulseTrainResult s2 =
      simulate_scheme2(point(0.1, 0.2, Scheme::SchemeII), 100000);
  CHECK(std::abs(s2.P_d_total - 0.84778489194154736) < 1e-10);
  CHECK(std::abs(s2.Gamma_total - 0.15221510805845264) < 1e-10);
  CHECK(std::abs(s2.P_V_mixed - 0.061415073385500279) < 1e-10);
}

TEST_CASE("per-round recursion agrees with direct powers") {
  const double theta = 0.23, beta = 0.41, L = 0.15, eps = 1.1;
  const PulseTrainResult r =
      simulate_scheme1(point(theta, beta, Scheme::SchemeI, L, eps), 50);
  const PolOperator dark = single_pass_dark(theta, beta);
  const Complex feed =
      std::sqrt(1.0 - L) * std::polar(1.0, eps) * single_pass_bright(theta, beta);
  for (std::size_t j = 1; j <= r.records.size(); ++j) {
    const Complex chain = std::pow(feed, static_cast<double>(j - 1));
    const PolVector expect = apply(dark, {chain, Complex{}});
    CHECK(vec_diff(r.records[j - 1].dark_state, expect) <= 1e-12);
  }

  const PulseTrainResult q = simulate_scheme2(point(theta, beta, Scheme::SchemeII), 50);
  const PolOperator qdark = scheme2_dark(theta, beta);
  const Complex mplus = single_pass_bright(theta, beta);
  const Complex qplus = scheme2_bright(theta, beta);
  CHECK(vec_diff(q.records[0].dark_state, apply(dark, kH)) <= 1e-12);
  for (std::size_t j = 2; j <= q.records.size(); ++j) {
    const Complex chain = mplus * std::pow(qplus, static_cast<double>(j - 2));
    const PolVector expect = apply(qdark, {chain, Complex{}});
    CHECK(vec_diff(q.records[j - 1].dark_state, expect) <= 1e-12);
  }
}

TEST_CASE("epsilon invariance of all probabilities") {
  const PulseTrainResult base =
      simulate_scheme1(point(0.17, 0.33, Scheme::SchemeI, 0.2, 0.0), 40);
  for (double eps : {1.0, M_PI}) {
    const PulseTrainResult r =
        simulate_scheme1(point(0.17, 0.33, Scheme::SchemeI, 0.2, eps), 40);
    CHECK(std::abs(r.P_d_total - base.P_d_total) <= 1e-12);
    CHECK(std::abs(r.Gamma_total - base.Gamma_total) <= 1e-12);
    CHECK(std::abs(r.residual - base.residual) <= 1e-12);
    CHECK(std::abs(r.P_V_mixed - base.P_V_mixed) <= 1e-12);
    for (std::size_t j = 0; j < r.records.size(); ++j)
      CHECK(std::abs(r.records[j].p_dj - base.records[j].p_dj) <= 1e-12);
  }
}

TEST_CASE("bookkeeping closes at every n") {
  for (std::uint64_t n : {std::uint64_t{1}, std::uint64_t{2}, std::uint64_t{10},
                          std::uint64_t{1000}, std::uint64_t{12345}}) {
    const PulseTrainResult a = simulate_scheme1(point(0.21, 0.37, Scheme::SchemeI), n);
    CHECK(std::abs(a.P_d_total + a.Gamma_total + a.residual - 1.0) <= 1e-12);
    const PulseTrainResult b = simulate_scheme2(point(0.21, 0.37, Scheme::SchemeII), n);
    CHECK(std::abs(b.P_d_total + b.Gamma_total + b.residual - 1.0) <= 1e-12);
  }
  const PulseTrainResult lossy =
      simulate_scheme1(point(0.21, 0.37, Scheme::SchemeI, 0.3, 0.5), 200);
  CHECK(std::abs(lossy.P_d_total + lossy.gamma_hp + lossy.gamma_ext + lossy.residual -
                 1.0) <= 1e-12);
}

TEST_CASE("mixed state P_V") {
  const PulseTrainResult r = simulate_scheme1(point(0.1, 0.2, Scheme::SchemeI), 300);
  CHECK(mixed_state_pv(r) == r.P_V_mixed);

  // dark port stays empty at theta = beta = 0
  const PulseTrainResult empty = simulate_scheme1(point(0.0, 0.0, Scheme::SchemeI), 5);
  CHECK(empty.P_d_total == 0.0);
  CHECK_THROWS_AS(mixed_state_pv(empty), EmptyEnsemble);

  const PulseTrainResult flat = simulate_scheme1(point(0.0, 0.4, Scheme::SchemeI), 30);
  CHECK(mixed_state_pv(flat) == 0.0);
}

TEST_CASE("scheme II round structure") {
  const PulseTrainResult r = simulate_scheme2(point(0.1, 0.2, Scheme::SchemeII), 2);
  REQUIRE(r.records.size() == 2);
  CHECK(std::abs(r.records[1].p_dj - 0.040948168641329806) < 1e-15);
  CHECK(std::abs(r.P_d_total - 0.053363005040421859) < 1e-15);

  // per-round filter losses against the geometric law for j >= 2
  const double theta = 0.28, beta = 0.51;
  const PulseTrainResult q = simulate_scheme2(point(theta, beta, Scheme::SchemeII), 20);
  const double st = std::sin(theta), ct = std::cos(theta);
  const double pc1 = std::norm(single_pass_bright(theta, beta));
  const double dplus = std::norm(scheme2_bright(theta, beta));
  CHECK(std::abs(q.records[0].loss_j - st * st / 4.0) < 1e-14);
  for (std::size_t j = 2; j <= 20; ++j) {
    const double expect = 0.25 * st * st * (2.0 + ct * ct) *
                          std::pow(dplus, static_cast<double>(j - 2)) * pc1;
    CHECK(std::abs(q.records[j - 1].loss_j - expect) < 1e-14);
  }
}

TEST_CASE("early termination on dead pulses") {
  const PulseTrainResult r = simulate_scheme1(point(0.3, 0.4, Scheme::SchemeI), 1000000);
  CHECK(r.rounds_simulated < 1000000);
  CHECK(r.residual < 1e-300);
  CHECK(std::abs(r.P_d_total + r.Gamma_total - 1.0) <= 1e-12);
}

TEST_CASE("bright weights are nonincreasing") {
  const PulseTrainResult r =
      simulate_scheme1(point(0.2, 0.5, Scheme::SchemeI, 0.1, 0.4), 100);
  double prev = 1.0;
  for (const RoundRecord& rec : r.records) {
    CHECK(std::abs(rec.p_dj - norm_sq(rec.dark_state)) < 1e-16);
    const double w = std::norm(rec.bright_amp);
    CHECK(w <= prev + 1e-15);
    prev = w;
  }
}

TEST_CASE("convergence rounds") {
  CHECK(convergence_rounds(point(0.1, 0.2, Scheme::SchemeI), 1e-10) == 1534);

  // returned n is minimal: residual(n) < tol <= residual(n-1)
  const ExperimentParams p = point(0.1, 0.2, Scheme::SchemeI, 0.5);
  const std::uint64_t n = convergence_rounds(p, 1e-10);
  CHECK(n < 100);
  CHECK(simulate_scheme1(p, n).residual < 1e-10);
  CHECK(simulate_scheme1(p, n - 1).residual >= 1e-10);

  const ExperimentParams q = point(0.1, 0.2, Scheme::SchemeII);
  const std::uint64_t m = convergence_rounds(q, 1e-10);
  CHECK(simulate_scheme2(q, m).residual < 1e-10);
  CHECK(simulate_scheme2(q, m - 1).residual >= 1e-10);

  CHECK_THROWS_AS(convergence_rounds(point(0.0, 0.0, Scheme::SchemeI), 1e-10),
                  NoConvergence);
  CHECK_THROWS_AS(convergence_rounds(point(0.1, 0.2, Scheme::NoRecycle), 1e-10),
                  ValidationError);
  CHECK_THROWS_AS(convergence_rounds(point(0.1, 0.2, Scheme::SchemeI), -1.0),
                  ValidationError);
}

TEST_CASE("oracle matches analytic on a small grid") {
  for (double theta : {0.1, 0.45, 0.9})
    for (double beta : {0.15, 0.6, 1.4})
      for (double L : {0.0, 0.35}) {
        ExperimentParams p = point(theta, beta, Scheme::SchemeI, L, 0.6);
        for (std::uint64_t n : {std::uint64_t{1}, std::uint64_t{2}, std::uint64_t{10},
                                std::uint64_t{100}}) {
          const PulseTrainResult sim = simulate_scheme1(p, n);
          p.rounds = Rounds::finite(n);
          const RecyclingSummary s = scheme1_finite(p);
          CHECK(std::abs(sim.P_d_total - s.P_d) <= 1e-10);
          CHECK(std::abs(sim.gamma_hp - s.gamma_hp) <= 1e-10);
          CHECK(std::abs(sim.gamma_ext - s.gamma_ext) <= 1e-10);
          CHECK(std::abs(sim.residual - s.residual) <= 1e-10);
          CHECK(std::abs(sim.P_V_mixed - s.P_V) <= 1e-10);
        }
        if (L == 0.0) {
          ExperimentParams q = point(theta, beta, Scheme::SchemeII);
          for (std::uint64_t n : {std::uint64_t{1}, std::uint64_t{2}, std::uint64_t{10},
                                  std::uint64_t{100}}) {
            const PulseTrainResult sim = simulate_scheme2(q, n);
            q.rounds = Rounds::finite(n);
            const RecyclingSummary s = scheme2_finite(q);
            CHECK(std::abs(sim.P_d_total - s.P_d) <= 1e-10);
            CHECK(std::abs(sim.Gamma_total - s.Gamma) <= 1e-10);
            CHECK(std::abs(sim.residual - s.residual) <= 1e-10);
            CHECK(std::abs(sim.P_V_mixed - s.P_V) <= 1e-10);
          }
        }
      }
}
