#include "rpsm/mc.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "rpsm/threads.hpp"

namespace rpsm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  return splitmix64(master_seed + (trial_index + 1) * 0x9E3779B97F4A7C15ull);
}

McCounts sample_counts(double P_d, double P_V, double N, std::uint64_t seed) {
  if (!(P_d >= 0.0 && P_d <= 1.0)) throw ValidationError("P_d must be in [0,1]");
  if (!(P_V >= 0.0 && P_V <= 1.0)) throw ValidationError("P_V must be in [0,1]");
  if (!(N > 0.0)) throw ValidationError("N must be positive");

  McCounts out;
  if (P_d == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::poisson_distribution<std::uint64_t> detected(P_d * N);
  out.n_detected = detected(rng);
  if (out.n_detected == 0) return out;
  if (P_V > 0.0) {
    std::binomial_distribution<std::uint64_t> thin(out.n_detected, P_V);
    out.n_v = thin(rng);
  }
  return out;
}

double estimate_theta(std::uint64_t n_detected, std::uint64_t n_v) {
  if (n_detected == 0) throw EmptyEnsemble("estimate_theta: no detected photons");
  if (n_v > n_detected) throw ValidationError("n_v cannot exceed n_detected");
  return std::asin(std::sqrt(static_cast<double>(n_v) / static_cast<double>(n_detected)));
}

McEstimate run_trials(const McConfig& config) {
  if (config.trials < 2) throw ValidationError("trials must be >= 2");
  const RecyclingSummary summary = evaluate(config.params);
  const double P_d = summary.P_d;
  const double P_V = summary.P_V;
  const double N = config.params.photons_N;

  // estimate (or NaN) per trial slot; reduction below is an ordered fold
  std::vector<double> estimates(config.trials,
                                std::numeric_limits<double>::quiet_NaN());
  parallel_for(config.trials, [&](std::size_t i) {
    const McCounts counts =
        sample_counts(P_d, P_V, N, trial_seed(config.master_seed, i));
    if (counts.n_detected > 0)
      estimates[i] = estimate_theta(counts.n_detected, counts.n_v);
  });

  McEstimate est;
  double sum = 0.0;
  for (double v : estimates) {
    if (std::isnan(v)) continue;
    sum += v;
    ++est.trials_used;
  }
  if (est.trials_used == 0) {
    est.mean_theta_tilde = 0.0;
    est.empirical_std = 0.0;
  } else {
    est.mean_theta_tilde = sum / static_cast<double>(est.trials_used);
    double sq = 0.0;
    for (double v : estimates) {
      if (std::isnan(v)) continue;
      const double d = v - est.mean_theta_tilde;
      sq += d * d;
    }
    est.empirical_std =
        est.trials_used > 1
            ? std::sqrt(sq / static_cast<double>(est.trials_used - 1))
            : 0.0;
  }
  est.predicted_std = 1.0 / (2.0 * std::sqrt(P_d * N));
  est.rel_deviation = std::abs(est.empirical_std - est.predicted_std) / est.predicted_std;
  return est;
}

}  // namespace rpsm
