#include "rpsm/interferometer.hpp"

#include <cmath>

namespace rpsm {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Both beam splitters share the same path block [[1, 1], [1, -1]] / sqrt(2);
// only the interpretation of the slots differs (a,b)->(1,2) vs (1,2)->(c,d).
JointOperator beam_splitter() {
  JointOperator op;
  for (int pol = 0; pol < 2; ++pol) {
    op.at(0 + pol, 0 + pol) = kInvSqrt2;
    op.at(0 + pol, 2 + pol) = kInvSqrt2;
    op.at(2 + pol, 0 + pol) = kInvSqrt2;
    op.at(2 + pol, 2 + pol) = -kInvSqrt2;
  }
  return op;
}

JointOperator path_projector(int path) {
  JointOperator op;
  op.at(2 * path + 0, 2 * path + 0) = 1.0;
  op.at(2 * path + 1, 2 * path + 1) = 1.0;
  return op;
}

}  // namespace

PolOperator faraday_unitary(double theta_rad) {
  const Complex diag{std::cos(theta_rad), 0.0};
  const Complex off{0.0, std::sin(theta_rad)};
  PolOperator op;
  op.m = {diag, off, off, diag};
  return op;
}

ElementSet make_elements(double theta_rad, double beta_rad) {
  ElementSet e;
  e.s1 = beam_splitter();
  e.s2 = beam_splitter();

  e.u1 = JointOperator::identity();
  const PolOperator fr = faraday_unitary(theta_rad);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) e.u1.at(p, q) = fr.at(p, q);

  e.u2 = JointOperator::identity();
  const Complex phase = std::polar(1.0, beta_rad);
  e.u2.at(2, 2) = phase;
  e.u2.at(3, 3) = phase;

  // After s2 the path slots read (c, d).
  e.m_c = path_projector(0);
  e.m_d = path_projector(1);

  e.m_h = JointOperator{};
  e.m_h.at(0, 0) = 1.0;
  e.m_h.at(2, 2) = 1.0;
  return e;
}

PolOperator single_pass_dark(double theta_rad, double beta_rad) {
  const Complex phase = std::polar(0.5, beta_rad);
  PolOperator op = Complex{0.5} * faraday_unitary(theta_rad);
  op.at(0, 0) -= phase;
  op.at(1, 1) -= phase;
  return op;
}

Complex single_pass_bright(double theta_rad, double beta_rad) {
  return (std::cos(theta_rad) + std::polar(1.0, beta_rad)) * 0.5;
}

PolOperator scheme2_dark(double theta_rad, double beta_rad) {
  const Complex phase = std::polar(0.5, 2.0 * beta_rad);
  PolOperator op = Complex{0.5 * std::cos(theta_rad)} * faraday_unitary(theta_rad);
  op.at(0, 0) -= phase;
  op.at(1, 1) -= phase;
  return op;
}

Complex scheme2_bright(double theta_rad, double beta_rad) {
  const double c = std::cos(theta_rad);
  return (c * c + std::polar(1.0, 2.0 * beta_rad)) * 0.5;
}

FirstPass compose_first_pass(double theta_rad, double beta_rad) {
  const ElementSet e = make_elements(theta_rad, beta_rad);
  const JointOperator pass = compose(e.s2, compose(e.u2, compose(e.u1, e.s1)));
  const JointOperator dark_chain = compose(e.m_d, pass);
  const JointOperator bright_chain = compose(e.m_h, compose(e.m_c, pass));

  FirstPass out;
  // <d,p| chain |a,q>: port d is path slot 1 on the output side, port a
  // path slot 0 on the input side.
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) out.dark.at(p, q) = dark_chain.at(2 + p, q);
  out.bright = bright_chain.at(0, 0);
  return out;
}

}  // namespace rpsm
