#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rpsm/interferometer.hpp"
#include "rpsm/kernel.hpp"

using namespace rpsm;

namespace {

// random unitary as a product of unitary factors
PolOperator random_unitary(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  PolOperator u = faraday_unitary(angle(rng));
  PolOperator phase;
  phase.at(0, 0) = std::polar(1.0, angle(rng));
  phase.at(1, 1) = std::polar(1.0, angle(rng));
  return compose(compose(u, phase), faraday_unitary(angle(rng)));
}

PolOperator random_operator(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  PolOperator a;
  for (int i = 0; i < 4; ++i) a.m[i] = Complex{coef(rng), coef(rng)};
  return a;
}

PolVector random_vector(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  return {Complex{coef(rng), coef(rng)}, Complex{coef(rng), coef(rng)}};
}

double vec_diff(const PolVector& a, const PolVector& b) {
  return std::max(std::abs(a.h - b.h), std::abs(a.v - b.v));
}

}  // namespace

TEST_CASE("apply basics") {
  const PolVector h{Complex{1.0}, Complex{}};
  const PolVector ih = apply(PolOperator::identity(), h);
  CHECK(ih.h == Complex{1.0});
  CHECK(ih.v == Complex{0.0});

  const PolVector flipped = apply(PolOperator::sigma_x(), h);
  CHECK(flipped.h == Complex{0.0});
  CHECK(flipped.v == Complex{1.0});

  // e^{i (pi/2) sigma_x} |H> = i |V>
  const PolVector rotated = apply(faraday_unitary(M_PI / 2.0), h);
  CHECK(std::abs(rotated.h) < 1e-15);
  CHECK(std::abs(rotated.v - Complex{0.0, 1.0}) < 1e-15);
}

TEST_CASE("compose basics") {
  std::mt19937_64 rng(11);
  const PolOperator a = random_operator(rng);
  CHECK(max_abs_diff(compose(PolOperator::identity(), a), a) == 0.0);

  const PolOperator sx2 = compose(PolOperator::sigma_x(), PolOperator::sigma_x());
  CHECK(max_abs_diff(sx2, PolOperator::identity()) == 0.0);

  // scalar linearity through compose
  const PolOperator m = single_pass_dark(0.3, 0.7);
  const Complex s{0.25, -1.5};
  const PolOperator scaled_id = s * PolOperator::identity();
  CHECK(max_abs_diff(compose(m, scaled_id), s * m) < 1e-15);
}

TEST_CASE("norm_sq values") {
  CHECK(norm_sq(PolVector{Complex{1.0}, Complex{}}) == 1.0);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(norm_sq(PolVector{Complex{r}, Complex{0.0, r}}) - 1.0) < 1e-15);

  // p_d1 at theta=0.1, beta=0.2
  const PolVector dark = apply(single_pass_dark(0.1, 0.2), {Complex{1.0}, Complex{}});
  CHECK(std::abs(norm_sq(dark) - 0.012414836399092054) < 1e-15);
}

TEST_CASE("unitaries preserve norms") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const PolOperator u = random_unitary(rng);
    CHECK(unitarity_defect(u) < 1e-12);
    const PolVector psi = random_vector(rng);
    CHECK(std::abs(norm_sq(apply(u, psi)) - norm_sq(psi)) <= 1e-12);
  }
}

TEST_CASE("compose is associative") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const PolOperator a = random_operator(rng);
    const PolOperator b = random_operator(rng);
    const PolOperator c = random_operator(rng);
    CHECK(max_abs_diff(compose(compose(a, b), c), compose(a, compose(b, c))) <= 1e-12);
  }
}

TEST_CASE("apply respects composition") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const PolOperator a = random_operator(rng);
    const PolOperator b = random_operator(rng);
    const PolVector psi = random_vector(rng);
    CHECK(vec_diff(apply(compose(a, b), psi), apply(a, apply(b, psi))) <= 1e-12);
  }
}

TEST_CASE("joint operators") {
  const ElementSet e = make_elements(0.4, 1.1);
  CHECK(unitarity_defect(e.s1) < 1e-12);
  CHECK(unitarity_defect(compose(e.s2, compose(e.u2, compose(e.u1, e.s1)))) < 1e-12);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    JointVector v;
    for (auto& z : v.c) z = Complex{coef(rng), coef(rng)};
    const JointVector w =
        apply(e.s2, apply(e.u2, apply(e.u1, apply(e.s1, v))));
    CHECK(std::abs(norm_sq(w) - norm_sq(v)) <= 1e-12);
  }

  // adjoint against a known unitary: U' U = I
  const JointOperator udag = adjoint(e.u1);
  CHECK(max_abs_diff(compose(udag, e.u1), JointOperator::identity()) < 1e-14);
}

TEST_CASE("finite in, finite out") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const PolOperator a = random_operator(rng);
    const PolVector psi = random_vector(rng);
    const PolVector out = apply(a, psi);
    CHECK(std::isfinite(out.h.real()));
    CHECK(std::isfinite(out.h.imag()));
    CHECK(std::isfinite(out.v.real()));
    CHECK(std::isfinite(out.v.imag()));
    CHECK(std::isfinite(norm_sq(out)));
  }
}
