#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rpsm/analytic.hpp"
#include "rpsm/interferometer.hpp"

using namespace rpsm;

namespace {

// test-only oracle: exp(i theta sigma_x) by plain Taylor summation
PolOperator taylor_exp_isigmax(double theta) {
  PolOperator sum = PolOperator::identity();
  PolOperator term = PolOperator::identity();
  for (int k = 1; k <= 30; ++k) {
    term = (Complex{0.0, theta} / static_cast<double>(k)) *
           compose(PolOperator::sigma_x(), term);
    sum = sum + term;
  }
  return sum;
}

const PolVector kH{Complex{1.0}, Complex{}};

bool idempotent_hermitian(const JointOperator& p) {
  return max_abs_diff(compose(p, p), p) < 1e-12 && max_abs_diff(adjoint(p), p) < 1e-12;
}

}  // namespace

TEST_CASE("faraday unitary") {
  CHECK(max_abs_diff(faraday_unitary(0.0), PolOperator::identity()) == 0.0);

  const PolOperator minus_i = Complex{-1.0} * PolOperator::identity();
  CHECK(max_abs_diff(faraday_unitary(M_PI), minus_i) < 1e-12);

  const PolOperator fr = faraday_unitary(0.1);
  CHECK(std::abs(fr.at(0, 1) - Complex{0.0, 0.099833416646828152}) < 1e-16);
  CHECK(std::abs(fr.at(1, 0) - Complex{0.0, 0.099833416646828152}) < 1e-16);

  for (double theta : {0.0, 0.1, 0.7, 2.0, 3.1}) {
    CHECK(unitarity_defect(faraday_unitary(theta)) < 1e-12);
    CHECK(max_abs_diff(faraday_unitary(theta), taylor_exp_isigmax(theta)) < 1e-14);
  }
}

TEST_CASE("single pass dark operator") {
  CHECK(norm_sq(apply(single_pass_dark(0.0, 0.0), kH)) == 0.0);
  CHECK(std::abs(norm_sq(apply(single_pass_dark(0.1, 0.2), kH)) -
                 0.012414836399092054) < 1e-15);
  for (double theta : {0.05, 0.4, 1.2})
    CHECK(std::abs(norm_sq(apply(single_pass_dark(theta, M_PI / 2.0), kH)) - 0.5) <
          1e-15);
}

TEST_CASE("single pass bright amplitude") {
  CHECK(single_pass_bright(0.0, 0.0) == Complex{1.0});
  CHECK(std::abs(std::norm(single_pass_bright(0.1, 0.2)) - 0.98509348583106315) <
        1e-15);
  const Complex edge = single_pass_bright(M_PI / 2.0, M_PI);
  CHECK(std::abs(edge - Complex{-0.5}) < 1e-15);
  CHECK(std::abs(std::norm(edge) - 0.25) < 1e-15);
}

TEST_CASE("scheme II dark operator") {
  PolOperator zero;
  CHECK(max_abs_diff(scheme2_dark(0.0, 0.0), zero) < 1e-15);

  // D_- at (0.1, 0.2)
  CHECK(std::abs(norm_sq(apply(scheme2_dark(0.1, 0.2), kH)) - 0.041567799635568942) <
        1e-15);

  // theta=0, beta=pi/2: Q_- = (I + 1)/2 * ... = I, D_- = 1
  CHECK(max_abs_diff(scheme2_dark(0.0, M_PI / 2.0), PolOperator::identity()) < 1e-15);
  CHECK(std::abs(norm_sq(apply(scheme2_dark(0.0, M_PI / 2.0), kH)) - 1.0) < 1e-15);
}

TEST_CASE("scheme II bright amplitude") {
  CHECK(scheme2_bright(0.0, 0.0) == Complex{1.0});
  CHECK(std::abs(std::norm(scheme2_bright(0.1, 0.2)) - 0.95098200088733162) < 1e-15);
  for (double beta : {0.3, 1.0, 2.2}) {
    const Complex q = scheme2_bright(M_PI / 2.0, beta);
    CHECK(std::abs(q - 0.5 * std::polar(1.0, 2.0 * beta)) < 1e-15);
    CHECK(std::abs(std::norm(q) - 0.25) < 1e-15);
  }
}

TEST_CASE("element operator invariants") {
  for (double theta : {0.0, 0.3, 1.5})
    for (double beta : {0.0, 0.8, 2.9}) {
      const ElementSet e = make_elements(theta, beta);
      CHECK(unitarity_defect(e.s1) < 1e-12);
      CHECK(unitarity_defect(e.s2) < 1e-12);
      CHECK(unitarity_defect(e.u1) < 1e-12);
      CHECK(unitarity_defect(e.u2) < 1e-12);
      CHECK(idempotent_hermitian(e.m_c));
      CHECK(idempotent_hermitian(e.m_d));
      CHECK(idempotent_hermitian(e.m_h));
    }
}

TEST_CASE("composed first pass matches closed forms") {
  const FirstPass fp = compose_first_pass(0.1, 0.2);
  CHECK(max_abs_diff(fp.dark, single_pass_dark(0.1, 0.2)) < 1e-12);
  CHECK(std::abs(fp.bright - single_pass_bright(0.1, 0.2)) < 1e-12);

  // theta = 0: the dark amplitude reduces to (1 - e^{i beta})/2 on the diagonal
  const FirstPass flat = compose_first_pass(0.0, 0.9);
  const Complex expected = (1.0 - std::polar(1.0, 0.9)) * 0.5;
  CHECK(std::abs(flat.dark.at(0, 0) - expected) < 1e-15);
  CHECK(std::abs(flat.dark.at(1, 1) - expected) < 1e-15);
  CHECK(std::abs(flat.dark.at(0, 1)) < 1e-15);

  const FirstPass off = compose_first_pass(0.0, 0.0);
  PolOperator zero;
  CHECK(max_abs_diff(off.dark, zero) < 1e-15);
  CHECK(std::abs(off.bright - Complex{1.0}) < 1e-15);

  // 20x20 grid here; the acceptance suite runs the full 50x50 one
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double th = i * M_PI / 20.0;
      const double be = j * M_PI / 20.0;
      const FirstPass p = compose_first_pass(th, be);
      CHECK(max_abs_diff(p.dark, single_pass_dark(th, be)) < 1e-12);
      CHECK(std::abs(p.bright - single_pass_bright(th, be)) < 1e-12);
    }
}

TEST_CASE("first-round probabilities sum to one") {
  for (int i = 0; i < 25; ++i)
    for (int j = 0; j < 25; ++j) {
      const double th = i * M_PI / 25.0;
      const double be = j * M_PI / 25.0;
      const FirstRoundProbs fr = scheme1_first_round(th, be);
      CHECK(std::abs(fr.p_d1 + fr.p_c1 + fr.gamma_1 - 1.0) <= 1e-12);
      // the closed forms and the operators must agree
      CHECK(std::abs(fr.p_d1 - norm_sq(apply(single_pass_dark(th, be), kH))) < 1e-14);
      CHECK(std::abs(fr.p_c1 - std::norm(single_pass_bright(th, be))) < 1e-14);
    }
}
