#pragma once

#include <cstdint>
#include <vector>

#include "rpsm/analytic.hpp"
#include "rpsm/kernel.hpp"

// Brute-force pulse-train simulation: the per-round states are propagated by
// explicit operator application on the joint space, never by closed-form
// geometric sums, so the agreement with the analytic module is a real check
// and not a tautology. Distinct parameter points may run in parallel; a
// single simulation is inherently sequential.

namespace rpsm {

struct RoundRecord {
  std::uint64_t round_j = 0;
  PolVector dark_state;     // unnormalized |phi_dj>
  double p_dj = 0.0;        // norm_sq(dark_state)
  double loss_j = 0.0;      // polarizer loss this round (both filters, scheme II)
  Complex bright_amp;       // amplitude re-entering the next round
};

struct PulseTrainResult {
  std::vector<RoundRecord> records;
  double P_d_total = 0.0;
  double gamma_hp = 0.0;
  double gamma_ext = 0.0;
  double Gamma_total = 0.0;  // gamma_hp + gamma_ext
  double residual = 0.0;     // weight still circulating after the last round
  double P_V_mixed = 0.0;    // NaN when no photon was postselected
  std::uint64_t rounds_simulated = 0;
};

/// External recycling: round j applies the forward chain to the re-injected
/// amplitude, filters H, books the external loss and feeds back
/// sqrt(1-L) e^{i eps} times the bright amplitude.
PulseTrainResult simulate_scheme1(const ExperimentParams& params, std::uint64_t n);

/// Internal recycling: rounds >= 2 run the bright light backwards through the
/// interferometer (filtering V at the entrance ports), then forwards again.
PulseTrainResult simulate_scheme2(const ExperimentParams& params, std::uint64_t n);

/// P_V of the postselected mixture: sum of V weights over the recorded rounds
/// divided by P_d_total. Throws EmptyEnsemble when P_d_total is zero.
double mixed_state_pv(const PulseTrainResult& result);

/// Smallest n whose residual falls below tol; NoConvergence past 1e7 rounds.
std::uint64_t convergence_rounds(const ExperimentParams& params, double tol);

}  // namespace rpsm
