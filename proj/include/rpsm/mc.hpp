#pragma once

#include <cstdint>

#include "rpsm/analytic.hpp"

// Monte Carlo photon counting against the shot-noise prediction
// delta(theta_tilde) = (2 sqrt(P_d N))^-1. Counts are Poisson (coherent
// light) thinned binomially into the V channel; trial seeds are derived from
// the master seed by counter-based splitting, so trials are order-independent
// and safe to run in parallel. Reproducibility is bit-exact within one build
// of this artifact (the RNG is std::mt19937_64 plus the std distributions).

namespace rpsm {

struct McConfig {
  ExperimentParams params;
  std::uint64_t trials = 2;
  std::uint64_t master_seed = 0;
};

struct McCounts {
  std::uint64_t n_detected = 0;
  std::uint64_t n_v = 0;
};

struct McEstimate {
  double mean_theta_tilde = 0.0;
  double empirical_std = 0.0;
  double predicted_std = 0.0;  // (2 sqrt(P_d N))^-1
  double rel_deviation = 0.0;  // |empirical - predicted| / predicted
  std::uint64_t trials_used = 0;  // trials that detected at least one photon
};

/// splitmix64 of master_seed + (index+1) * golden; the per-trial seed stream.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index);

/// n_detected ~ Poisson(P_d N), n_v ~ Binomial(n_detected, P_V).
McCounts sample_counts(double P_d, double P_V, double N, std::uint64_t seed);

/// asin(sqrt(n_v / n_detected)); throws EmptyEnsemble when nothing was detected.
double estimate_theta(std::uint64_t n_detected, std::uint64_t n_v);

/// Runs the trials and compares the empirical spread of the angle estimates
/// with the shot-noise prediction for the configured scheme.
McEstimate run_trials(const McConfig& config);

}  // namespace rpsm
