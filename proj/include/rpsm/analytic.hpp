#pragma once

#include <cstdint>
#include <string>

#include "rpsm/errors.hpp"

// Closed-form quantities of the postselected-measurement schemes: single pass,
// external recycling (scheme I), internal recycling (scheme II), at finite and
// infinite recycle count. Pure functions of the parameter struct; evaluating
// sweep grids in parallel is safe.

namespace rpsm {

enum class Scheme { NoRecycle, SchemeI, SchemeII };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);  // throws ValidationError

/// Recycle count: a finite n >= 1 or the infinite-recycling limit.
class Rounds {
 public:
  constexpr Rounds() = default;  // infinite
  static constexpr Rounds infinite() { return Rounds{}; }
  static Rounds finite(std::uint64_t n);  // throws ValidationError if n == 0
  constexpr bool is_infinite() const { return n_ == 0; }
  std::uint64_t count() const;  // finite only
  friend constexpr bool operator==(const Rounds&, const Rounds&) = default;

 private:
  std::uint64_t n_ = 0;  // 0 encodes infinite
};

struct ExperimentParams {
  double theta_rad = 0.0;    // Faraday-rotation angle
  double beta_rad = 0.0;     // postselection phase
  double loss_L = 0.0;       // external path loss ratio, scheme I only
  double epsilon_rad = 0.0;  // recycling delay phase, scheme I only; cancels
                             // in every probability (the oracle proves it)
  double photons_N = 1e6;    // mean photon number per pulse
  Rounds rounds{};
  Scheme scheme = Scheme::SchemeI;

  friend bool operator==(const ExperimentParams&, const ExperimentParams&) = default;
};

void validate(const ExperimentParams& params);  // throws ValidationError

struct MagnetometerParams {
  double verdet_V = 0.0;  // rad / (T m)
  double length_l = 0.0;  // m
  double field_B = 0.0;   // T
};

/// theta = V B l.
double angle_from_field(const MagnetometerParams& m);

/// Everything the schemes report for one parameter point.
///
/// Gamma is the total loss (filter plus, for scheme I with L > 0, external);
/// gamma_hp is the horizontal-polarizer share alone. P_d + Gamma + residual
/// sums to one for the recycling schemes at any L. For NoRecycle the residual
/// slot holds the undetected bright-port weight so rows still conserve.
struct RecyclingSummary {
  double p_d1 = 0.0;
  double p_c1 = 0.0;
  double gamma_1 = 0.0;
  double P_d = 0.0;
  double Gamma = 0.0;
  double gamma_hp = 0.0;
  double gamma_ext = 0.0;
  double residual = 0.0;
  double P_V = 0.0;          // = eta * sin^2(theta) by construction
  double theta_tilde = 0.0;  // asin(sqrt(P_V))
  double eta = 0.0;
  double x_or_y = 0.0;   // y = (1-L) p_c1 (scheme I); x or chi_n (scheme II)
  double kappa_n = 0.0;  // scheme II finite n; +inf at n = 1, NaN otherwise
  double snr_enhancement = 0.0;     // R = sqrt(P_d * eta); 1/2 without recycling
  double sensitivity_canonical = 0.0;  // (2 theta sqrt(eta P_d N))^-1
  double sensitivity_paper = 0.0;      // same quantity via the per-scheme closed form
};

struct FirstRoundProbs {
  double p_d1 = 0.0;
  double p_c1 = 0.0;
  double gamma_1 = 0.0;
};

/// First-pass probabilities; p_d1 + p_c1 + gamma_1 = 1.
FirstRoundProbs scheme1_first_round(double theta_rad, double beta_rad);

/// Single-pass postselected measurement, no recycling.
RecyclingSummary no_recycle(const ExperimentParams& params);

/// External recycling, infinite recycle count.
RecyclingSummary scheme1_infinite(const ExperimentParams& params);

/// External recycling truncated after n rounds.
RecyclingSummary scheme1_finite(const ExperimentParams& params);

/// Internal recycling, infinite recycle count.
RecyclingSummary scheme2_infinite(const ExperimentParams& params);

/// Internal recycling truncated after n rounds (n = 1 is the single pass).
RecyclingSummary scheme2_finite(const ExperimentParams& params);

/// Dispatch on params.scheme and params.rounds.
RecyclingSummary evaluate(const ExperimentParams& params);

/// R = sqrt(P_d * eta).
double snr_enhancement(double P_d, double eta);

}  // namespace rpsm
