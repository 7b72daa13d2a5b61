#pragma once

#include "rpsm/kernel.hpp"

// Element operators of the Mach-Zehnder magnetometer and the single-pass
// transfer operators they compose to. Everything here is a pure constructor;
// angles are radians throughout (degree handling belongs to the CLI).

namespace rpsm {

/// The individual optical elements as joint-space operators.
///
/// s1 scatters the entrance ports (a, b) onto the internal paths (1, 2);
/// s2 scatters (1, 2) onto the exit ports (c, d). u1 is the Faraday rotation
/// in path 1, u2 the postselection phase in path 2. m_c / m_d project onto
/// the exit ports and m_h onto horizontal polarization.
struct ElementSet {
  JointOperator s1;
  JointOperator s2;
  JointOperator u1;
  JointOperator u2;
  JointOperator m_c;
  JointOperator m_d;
  JointOperator m_h;
};

ElementSet make_elements(double theta_rad, double beta_rad);

/// e^{i theta sigma_x} = cos(theta) I + i sin(theta) sigma_x.
PolOperator faraday_unitary(double theta_rad);

/// Dark-port single-pass operator M_- = (e^{i theta sigma_x} - e^{i beta}) / 2.
PolOperator single_pass_dark(double theta_rad, double beta_rad);

/// Bright-port single-pass amplitude M_+ = (cos theta + e^{i beta}) / 2.
/// Scalar because the horizontal polarizer collapses the port-c light to H.
Complex single_pass_bright(double theta_rad, double beta_rad);

/// Second-and-later-round dark operator of the internal recycling scheme,
/// Q_- = (cos theta e^{i theta sigma_x} - e^{i 2 beta}) / 2.
PolOperator scheme2_dark(double theta_rad, double beta_rad);

/// Second-and-later-round bright amplitude Q_+ = (cos^2 theta + e^{i 2 beta}) / 2.
Complex scheme2_bright(double theta_rad, double beta_rad);

struct FirstPass {
  PolOperator dark;
  Complex bright;
};

/// Builds the full element chain M_d S2 U2 U1 S1 (and the H-filtered bright
/// chain) on the joint space starting from port a, then factors out the path.
/// Must reproduce single_pass_dark / single_pass_bright; the agreement is a
/// standing test of the frozen sign conventions.
FirstPass compose_first_pass(double theta_rad, double beta_rad);

}  // namespace rpsm
