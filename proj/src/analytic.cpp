#include "rpsm/analytic.hpp"

#include <cmath>
#include <limits>

namespace rpsm {

namespace {

constexpr double kDegenerateTol = 1e-15;
constexpr double kUnderflowClamp = 1e-300;

// Shared single-pass quantities in cancellation-free form. The naive
// 1 - cos(theta)cos(beta) and 1 - D_plus lose up to half the mantissa near
// the origin, which is exactly where the conservation identities are checked
// at 1e-12; the rearrangements below keep every term nonnegative.
struct SinglePass {
  double sin2_t;      // sin^2 theta
  double cos_t;       // cos theta
  double cos2_t;      // cos^2 theta
  double u;           // 1 - cos(theta) cos(beta)
  double p_d1;        // u / 2
  double p_c1;        // |M_+|^2
  double gamma_1;     // sin^2(theta) / 4
  double one_minus_pc1;
  double d_minus;     // |Q_-|H>|^2
  double one_minus_dplus;
  double sin2_b;      // sin^2 beta
};

SinglePass single_pass(double theta, double beta) {
  SinglePass sp;
  const double st = std::sin(theta);
  const double sht = std::sin(0.5 * theta);
  const double shb = std::sin(0.5 * beta);
  const double sb = std::sin(beta);
  const double cb = std::cos(beta);
  sp.cos_t = std::cos(theta);
  sp.sin2_t = st * st;
  sp.cos2_t = sp.cos_t * sp.cos_t;
  sp.sin2_b = sb * sb;
  // 1 - cos(t)cos(b) = (1 - cos t) + cos(t)(1 - cos b), each half-angle exact
  sp.u = 2.0 * sht * sht + sp.cos_t * (2.0 * shb * shb);
  sp.p_d1 = 0.5 * sp.u;
  const double mp_re = sp.cos_t + cb;
  sp.p_c1 = (mp_re * mp_re + sp.sin2_b) * 0.25;
  sp.gamma_1 = 0.25 * sp.sin2_t;
  sp.one_minus_pc1 = (sp.sin2_t + 2.0 * sp.u) * 0.25;
  sp.d_minus = (sp.sin2_t + 4.0 * sp.cos2_t * sp.sin2_b) * 0.25;
  sp.one_minus_dplus = (sp.sin2_t * (3.0 + sp.cos2_t) + 4.0 * sp.cos2_t * sp.sin2_b) * 0.25;
  return sp;
}

// (1-x)^n, evaluated in log space and clamped to zero once it falls below
// the representable range; n = 1e5 with x ~ 0.015 underflows otherwise.
double pow_one_minus(double x, std::uint64_t n) {
  if (n == 0) return 1.0;
  if (n == 1) return 1.0 - x;
  if (x >= 1.0) return 0.0;
  if (x <= 0.0) return 1.0;
  const double out = std::exp(static_cast<double>(n) * std::log1p(-x));
  return out < kUnderflowClamp ? 0.0 : out;
}

// 1 - (1-x)^n without cancellation.
double one_minus_pow(double x, std::uint64_t n) {
  if (n == 0) return 0.0;
  if (n == 1) return x;
  if (x >= 1.0) return 1.0;
  if (x <= 0.0) return 0.0;
  return -std::expm1(static_cast<double>(n) * std::log1p(-x));
}

double amplified_angle(double p_v) {
  if (p_v > 1.0) {
    if (p_v > 1.0 + 1e-12)
      throw std::logic_error("P_V exceeds 1 beyond tolerance; formula inconsistency");
    p_v = 1.0;
  }
  return std::asin(std::sqrt(p_v));
}

double sensitivity_from_snr(double theta, double photons, double snr) {
  return 1.0 / (2.0 * theta * std::sqrt(photons) * snr);
}

void require_nondegenerate(double p_d1, double denom, const char* scheme) {
  if (p_d1 < kDegenerateTol || denom < kDegenerateTol)
    throw DegenerateDarkPort(std::string(scheme) +
                             ": theta = beta = 0 leaves the dark port closed");
}

}  // namespace

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::NoRecycle: return "none";
    case Scheme::SchemeI: return "scheme1";
    case Scheme::SchemeII: return "scheme2";
  }
  return "?";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "none") return Scheme::NoRecycle;
  if (name == "scheme1") return Scheme::SchemeI;
  if (name == "scheme2") return Scheme::SchemeII;
  throw ValidationError("unknown scheme '" + name + "' (expected none|scheme1|scheme2)");
}

Rounds Rounds::finite(std::uint64_t n) {
  if (n == 0) throw ValidationError("rounds_n must be >= 1");
  Rounds r;
  r.n_ = n;
  return r;
}

std::uint64_t Rounds::count() const {
  if (is_infinite()) throw ValidationError("count() called on infinite rounds");
  return n_;
}

void validate(const ExperimentParams& p) {
  if (!std::isfinite(p.theta_rad)) throw ValidationError("theta must be finite");
  if (!std::isfinite(p.beta_rad)) throw ValidationError("beta must be finite");
  if (!std::isfinite(p.epsilon_rad)) throw ValidationError("epsilon must be finite");
  if (!(p.loss_L >= 0.0 && p.loss_L < 1.0)) throw ValidationError("loss_L must be in [0,1)");
  if (!(p.photons_N > 0.0) || !std::isfinite(p.photons_N))
    throw ValidationError("photons_N must be positive and finite");
}

double angle_from_field(const MagnetometerParams& m) {
  if (!(m.length_l > 0.0)) throw ValidationError("length_l must be positive");
  if (!std::isfinite(m.verdet_V) || !std::isfinite(m.field_B) || !std::isfinite(m.length_l))
    throw ValidationError("magnetometer parameters must be finite");
  return m.verdet_V * m.field_B * m.length_l;
}

FirstRoundProbs scheme1_first_round(double theta_rad, double beta_rad) {
  const SinglePass sp = single_pass(theta_rad, beta_rad);
  return {sp.p_d1, sp.p_c1, sp.gamma_1};
}

double snr_enhancement(double P_d, double eta) { return std::sqrt(P_d * eta); }

RecyclingSummary no_recycle(const ExperimentParams& params) {
  validate(params);
  const SinglePass sp = single_pass(params.theta_rad, params.beta_rad);
  require_nondegenerate(sp.p_d1, 1.0, "no_recycle");

  RecyclingSummary s;
  s.p_d1 = sp.p_d1;
  s.p_c1 = sp.p_c1;
  s.gamma_1 = sp.gamma_1;
  s.P_d = sp.p_d1;
  s.Gamma = 0.0;  // no polarizer in the single-pass setup
  s.gamma_hp = 0.0;
  s.gamma_ext = 0.0;
  s.residual = 1.0 - sp.p_d1;  // bright-port light, discarded
  s.eta = 0.25 / sp.p_d1;
  s.P_V = s.eta * sp.sin2_t;
  s.theta_tilde = amplified_angle(s.P_V);
  s.x_or_y = 0.0;
  s.kappa_n = std::numeric_limits<double>::quiet_NaN();
  s.snr_enhancement = snr_enhancement(s.P_d, s.eta);
  s.sensitivity_canonical =
      sensitivity_from_snr(params.theta_rad, params.photons_N, s.snr_enhancement);
  s.sensitivity_paper = 1.0 / (params.theta_rad * std::sqrt(params.photons_N));
  return s;
}

RecyclingSummary scheme1_infinite(const ExperimentParams& params) {
  validate(params);
  const SinglePass sp = single_pass(params.theta_rad, params.beta_rad);
  const double L = params.loss_L;
  // 1 - (1-L) p_c1 = (1 - p_c1) + L p_c1, all terms nonnegative
  const double denom = sp.one_minus_pc1 + L * sp.p_c1;
  require_nondegenerate(sp.p_d1, denom, "scheme1_infinite");

  RecyclingSummary s;
  s.p_d1 = sp.p_d1;
  s.p_c1 = sp.p_c1;
  s.gamma_1 = sp.gamma_1;
  s.P_d = sp.p_d1 / denom;
  s.gamma_hp = sp.gamma_1 / denom;
  s.gamma_ext = L * sp.p_c1 / denom;
  s.Gamma = s.gamma_hp + s.gamma_ext;
  s.residual = 0.0;
  s.eta = 0.25 / sp.p_d1;
  s.P_V = s.eta * sp.sin2_t;
  s.theta_tilde = amplified_angle(s.P_V);
  s.x_or_y = (1.0 - L) * sp.p_c1;
  s.kappa_n = std::numeric_limits<double>::quiet_NaN();
  s.snr_enhancement = snr_enhancement(s.P_d, s.eta);
  s.sensitivity_canonical =
      sensitivity_from_snr(params.theta_rad, params.photons_N, s.snr_enhancement);
  s.sensitivity_paper =
      std::sqrt(denom) / (params.theta_rad * std::sqrt(params.photons_N));
  return s;
}

RecyclingSummary scheme1_finite(const ExperimentParams& params) {
  validate(params);
  const std::uint64_t n = params.rounds.count();  // rejects infinite here
  const SinglePass sp = single_pass(params.theta_rad, params.beta_rad);
  const double L = params.loss_L;
  const double denom = sp.one_minus_pc1 + L * sp.p_c1;
  require_nondegenerate(sp.p_d1, denom, "scheme1_finite");

  const double tail = one_minus_pow(denom, n);  // 1 - y^n, y = (1-L) p_c1
  const double partial = tail / denom;          // sum_{j=1..n} y^{j-1}

  RecyclingSummary s;
  s.p_d1 = sp.p_d1;
  s.p_c1 = sp.p_c1;
  s.gamma_1 = sp.gamma_1;
  s.P_d = sp.p_d1 * partial;
  s.gamma_hp = sp.gamma_1 * partial;
  s.gamma_ext = L * sp.p_c1 * partial;
  s.Gamma = s.gamma_hp + s.gamma_ext;
  s.residual = pow_one_minus(denom, n);  // y^n
  s.eta = 0.25 / sp.p_d1;                // independent of n
  s.P_V = s.eta * sp.sin2_t;
  s.theta_tilde = amplified_angle(s.P_V);
  s.x_or_y = (1.0 - L) * sp.p_c1;
  s.kappa_n = std::numeric_limits<double>::quiet_NaN();
  s.snr_enhancement = snr_enhancement(s.P_d, s.eta);
  s.sensitivity_canonical =
      sensitivity_from_snr(params.theta_rad, params.photons_N, s.snr_enhancement);
  s.sensitivity_paper = std::sqrt(denom / tail) /
                        (params.theta_rad * std::sqrt(params.photons_N));
  return s;
}

RecyclingSummary scheme2_infinite(const ExperimentParams& params) {
  validate(params);
  const SinglePass sp = single_pass(params.theta_rad, params.beta_rad);
  require_nondegenerate(sp.p_d1, sp.one_minus_dplus, "scheme2_infinite");

  RecyclingSummary s;
  s.p_d1 = sp.p_d1;
  s.p_c1 = sp.p_c1;
  s.gamma_1 = sp.gamma_1;
  const double recirc = sp.p_c1 / sp.one_minus_dplus;  // sum over rounds >= 2
  s.P_d = sp.p_d1 + sp.d_minus * recirc;
  s.gamma_hp = sp.gamma_1 + 0.25 * sp.sin2_t * (2.0 + sp.cos2_t) * recirc;
  s.gamma_ext = 0.0;
  s.Gamma = s.gamma_hp;
  s.residual = 0.0;
  s.x_or_y = sp.cos2_t * recirc;  // x
  s.eta = (1.0 + s.x_or_y) / (4.0 * s.P_d);
  s.P_V = s.eta * sp.sin2_t;
  s.theta_tilde = amplified_angle(s.P_V);
  s.kappa_n = std::numeric_limits<double>::quiet_NaN();
  s.snr_enhancement = snr_enhancement(s.P_d, s.eta);
  s.sensitivity_canonical =
      sensitivity_from_snr(params.theta_rad, params.photons_N, s.snr_enhancement);
  s.sensitivity_paper =
      1.0 / (params.theta_rad * std::sqrt((1.0 + s.x_or_y) * params.photons_N));
  return s;
}

RecyclingSummary scheme2_finite(const ExperimentParams& params) {
  validate(params);
  const std::uint64_t n = params.rounds.count();
  const SinglePass sp = single_pass(params.theta_rad, params.beta_rad);
  require_nondegenerate(sp.p_d1, sp.one_minus_dplus, "scheme2_finite");

  RecyclingSummary s;
  s.p_d1 = sp.p_d1;
  s.p_c1 = sp.p_c1;
  s.gamma_1 = sp.gamma_1;
  s.eta = 0.25 / sp.p_d1;

  if (n == 1) {
    // Single pass; kappa_1 diverges and the recirculating terms vanish.
    s.P_d = sp.p_d1;
    s.gamma_hp = sp.gamma_1;
    s.Gamma = s.gamma_hp;
    s.residual = sp.p_c1;
    s.x_or_y = 0.0;  // chi_1
    s.kappa_n = std::numeric_limits<double>::infinity();
  } else {
    // kappa_n = (1 - D_+) / (1 - D_+^{n-1})
    const double tail = one_minus_pow(sp.one_minus_dplus, n - 1);
    const double partial = tail / sp.one_minus_dplus;  // sum_{j=2..n} D_+^{j-2}
    s.kappa_n = sp.one_minus_dplus / tail;
    s.P_d = sp.p_d1 + sp.p_c1 * sp.d_minus * partial;
    s.gamma_hp = sp.gamma_1 + 0.25 * sp.sin2_t * (2.0 + sp.cos2_t) * sp.p_c1 * partial;
    s.Gamma = s.gamma_hp;
    s.residual = sp.p_c1 * pow_one_minus(sp.one_minus_dplus, n - 1);
    s.x_or_y = sp.cos2_t * sp.p_c1 * partial;  // chi_n
    s.eta = 0.25 * (s.kappa_n + sp.cos2_t * sp.p_c1) /
            (s.kappa_n * sp.p_d1 + sp.d_minus * sp.p_c1);
  }
  s.gamma_ext = 0.0;
  s.P_V = s.eta * sp.sin2_t;
  s.theta_tilde = amplified_angle(s.P_V);
  s.snr_enhancement = snr_enhancement(s.P_d, s.eta);
  s.sensitivity_canonical =
      sensitivity_from_snr(params.theta_rad, params.photons_N, s.snr_enhancement);
  s.sensitivity_paper =
      1.0 / (params.theta_rad * std::sqrt((1.0 + s.x_or_y) * params.photons_N));
  return s;
}

RecyclingSummary evaluate(const ExperimentParams& params) {
  switch (params.scheme) {
    case Scheme::NoRecycle:
      return no_recycle(params);
    case Scheme::SchemeI:
      return params.rounds.is_infinite() ? scheme1_infinite(params)
                                         : scheme1_finite(params);
    case Scheme::SchemeII:
      return params.rounds.is_infinite() ? scheme2_infinite(params)
                                         : scheme2_finite(params);
  }
  throw ValidationError("unknown scheme");
}

}  // namespace rpsm
