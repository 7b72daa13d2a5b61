#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rpsm/analytic.hpp"

// Lane-batched pulse-train propagation. Each lane is one independent
// parameter point; a round is one explicit application of the single-pass
// transfer entries (a handful of complex multiply-accumulates), so the inner
// loop is plain data-parallel arithmetic. The scalar kernel is the reference;
// the AVX2 variant is selected at runtime and equivalence-tested against it.
//
// These kernels accumulate totals only. The record-keeping reference
// simulation lives in oracle.hpp; tests pin all three routes together.

namespace rpsm::kernels {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);

/// True when the binary carries the AVX2 kernels and the CPU can run them.
bool avx2_available();

/// Detected ISA, overridable with RPSM_SIMD=scalar|avx2|auto. Forcing avx2 on
/// an unsupported host throws ValidationError.
Isa active_isa();

/// Per-lane single-pass constants, structure-of-arrays.
struct Scheme1Batch {
  std::vector<double> dark_h_re, dark_h_im;  // <H|M_-|H>
  std::vector<double> dark_v_re, dark_v_im;  // <V|M_-|H>
  std::vector<double> bright_re, bright_im;  // M_+
  std::vector<double> feed_re, feed_im;      // sqrt(1-L) e^{i eps}
  std::vector<double> loss;                  // L

  std::size_t size() const { return loss.size(); }
};

struct Scheme2Batch {
  std::vector<double> dark_h_re, dark_h_im;    // <H|M_-|H>   (round 1)
  std::vector<double> dark_v_re, dark_v_im;    // <V|M_-|H>
  std::vector<double> bright_re, bright_im;    // M_+
  std::vector<double> q_dark_h_re, q_dark_h_im;  // <H|Q_-|H>  (rounds >= 2)
  std::vector<double> q_dark_v_re, q_dark_v_im;  // <V|Q_-|H>
  std::vector<double> q_bright_re, q_bright_im;  // Q_+
  std::vector<double> back_v;  // sin(theta)/2: backward V amplitude per entrance port

  std::size_t size() const { return back_v.size(); }
};

Scheme1Batch build_scheme1_batch(std::span<const ExperimentParams> points);
Scheme2Batch build_scheme2_batch(std::span<const ExperimentParams> points);

/// Per-lane totals after n rounds.
struct BatchTotals {
  std::vector<double> p_d;
  std::vector<double> gamma_hp;
  std::vector<double> gamma_ext;  // zero for scheme II
  std::vector<double> v_weight;   // sum of dark-port V weights (P_V numerator)
  std::vector<double> residual;

  void resize(std::size_t n);
};

void run_scheme1(const Scheme1Batch& batch, std::uint64_t rounds, BatchTotals& out);
void run_scheme2(const Scheme2Batch& batch, std::uint64_t rounds, BatchTotals& out);

/// Explicit-ISA entry points for the equivalence tests.
void run_scheme1_with(Isa isa, const Scheme1Batch& batch, std::uint64_t rounds,
                      BatchTotals& out);
void run_scheme2_with(Isa isa, const Scheme2Batch& batch, std::uint64_t rounds,
                      BatchTotals& out);

}  // namespace rpsm::kernels
