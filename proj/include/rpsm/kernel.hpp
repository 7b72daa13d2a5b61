#pragma once

#include <array>
#include <cmath>
#include <complex>

// Exact-size complex linear algebra for the 2-dim polarization space and the
// 4-dim path (x) polarization space. These are the scalar reference kernels;
// the batched SIMD variants in pulse_kernels.hpp are checked against them.

namespace rpsm {

using Complex = std::complex<double>;

/// Amplitude pair over the polarization basis (H, V).
struct PolVector {
  Complex h{};
  Complex v{};
};

/// 2x2 operator on polarization space, row-major over (H, V).
struct PolOperator {
  std::array<Complex, 4> m{};

  Complex& at(int row, int col) { return m[2 * row + col]; }
  const Complex& at(int row, int col) const { return m[2 * row + col]; }

  static PolOperator identity() {
    PolOperator op;
    op.m = {Complex{1.0}, Complex{0.0}, Complex{0.0}, Complex{1.0}};
    return op;
  }

  // |V><H| + |H><V|
  static PolOperator sigma_x() {
    PolOperator op;
    op.m = {Complex{0.0}, Complex{1.0}, Complex{1.0}, Complex{0.0}};
    return op;
  }
};

/// Joint path (x) polarization amplitude; index = 2*path + pol, pol 0=H 1=V.
/// Path slot 0 reads as |a> / |1> / |c| and slot 1 as |b> / |2> / |d>,
/// depending on the stage of the optical chain.
struct JointVector {
  std::array<Complex, 4> c{};
};

/// 4x4 operator on the joint space, row-major.
struct JointOperator {
  std::array<Complex, 16> m{};

  Complex& at(int row, int col) { return m[4 * row + col]; }
  const Complex& at(int row, int col) const { return m[4 * row + col]; }

  static JointOperator identity() {
    JointOperator op;
    for (int i = 0; i < 4; ++i) op.at(i, i) = 1.0;
    return op;
  }
};

inline PolVector apply(const PolOperator& op, const PolVector& vec) {
  return {op.at(0, 0) * vec.h + op.at(0, 1) * vec.v,
          op.at(1, 0) * vec.h + op.at(1, 1) * vec.v};
}

/// compose(a, b) applies b first: (a.b) psi = a (b psi).
inline PolOperator compose(const PolOperator& a, const PolOperator& b) {
  PolOperator out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.at(i, j) = a.at(i, 0) * b.at(0, j) + a.at(i, 1) * b.at(1, j);
  return out;
}

inline double norm_sq(const PolVector& vec) { return std::norm(vec.h) + std::norm(vec.v); }

inline PolOperator operator*(const Complex& s, const PolOperator& a) {
  PolOperator out;
  for (int i = 0; i < 4; ++i) out.m[i] = s * a.m[i];
  return out;
}

inline PolOperator operator+(const PolOperator& a, const PolOperator& b) {
  PolOperator out;
  for (int i = 0; i < 4; ++i) out.m[i] = a.m[i] + b.m[i];
  return out;
}

inline PolOperator operator-(const PolOperator& a, const PolOperator& b) {
  PolOperator out;
  for (int i = 0; i < 4; ++i) out.m[i] = a.m[i] - b.m[i];
  return out;
}

inline PolOperator adjoint(const PolOperator& a) {
  PolOperator out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.at(i, j) = std::conj(a.at(j, i));
  return out;
}

inline JointVector apply(const JointOperator& op, const JointVector& vec) {
  JointVector out;
  for (int i = 0; i < 4; ++i) {
    Complex acc{};
    for (int j = 0; j < 4; ++j) acc += op.at(i, j) * vec.c[j];
    out.c[i] = acc;
  }
  return out;
}

inline JointOperator compose(const JointOperator& a, const JointOperator& b) {
  JointOperator out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Complex acc{};
      for (int k = 0; k < 4; ++k) acc += a.at(i, k) * b.at(k, j);
      out.at(i, j) = acc;
    }
  return out;
}

inline double norm_sq(const JointVector& vec) {
  double acc = 0.0;
  for (const Complex& z : vec.c) acc += std::norm(z);
  return acc;
}

inline JointOperator adjoint(const JointOperator& a) {
  JointOperator out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out.at(i, j) = std::conj(a.at(j, i));
  return out;
}

inline double max_abs_diff(const PolOperator& a, const PolOperator& b) {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(a.m[i] - b.m[i]));
  return worst;
}

inline double max_abs_diff(const JointOperator& a, const JointOperator& b) {
  double worst = 0.0;
  for (int i = 0; i < 16; ++i) worst = std::max(worst, std::abs(a.m[i] - b.m[i]));
  return worst;
}

/// max|U'U - I|; zero for exact unitaries.
inline double unitarity_defect(const PolOperator& u) {
  return max_abs_diff(compose(adjoint(u), u), PolOperator::identity());
}

inline double unitarity_defect(const JointOperator& u) {
  return max_abs_diff(compose(adjoint(u), u), JointOperator::identity());
}

}  // namespace rpsm
