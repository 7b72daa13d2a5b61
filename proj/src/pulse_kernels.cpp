#include "rpsm/pulse_kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "rpsm/errors.hpp"
#include "rpsm/interferometer.hpp"

namespace rpsm::kernels {

namespace {

constexpr double kDeadWeight = 1e-300;

struct Kahan {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

Isa detect() {
  if (const char* env = std::getenv("RPSM_SIMD")) {
    const std::string mode(env);
    if (mode == "scalar") return Isa::scalar;
    if (mode == "avx2") {
      if (!avx2_available())
        throw ValidationError("RPSM_SIMD=avx2 but AVX2 kernels are unavailable");
      return Isa::avx2;
    }
    if (!mode.empty() && mode != "auto")
      throw ValidationError("RPSM_SIMD must be auto, scalar, or avx2");
  }
  return avx2_available() ? Isa::avx2 : Isa::scalar;
}

}  // namespace

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool avx2_available() {
#ifdef RPSM_HAVE_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() {
  static const Isa isa = detect();
  return isa;
}

Scheme1Batch build_scheme1_batch(std::span<const ExperimentParams> points) {
  Scheme1Batch b;
  for (const ExperimentParams& p : points) {
    const PolOperator dark = single_pass_dark(p.theta_rad, p.beta_rad);
    const Complex mplus = single_pass_bright(p.theta_rad, p.beta_rad);
    const Complex feed = std::polar(std::sqrt(1.0 - p.loss_L), p.epsilon_rad);
    b.dark_h_re.push_back(dark.at(0, 0).real());
    b.dark_h_im.push_back(dark.at(0, 0).imag());
    b.dark_v_re.push_back(dark.at(1, 0).real());
    b.dark_v_im.push_back(dark.at(1, 0).imag());
    b.bright_re.push_back(mplus.real());
    b.bright_im.push_back(mplus.imag());
    b.feed_re.push_back(feed.real());
    b.feed_im.push_back(feed.imag());
    b.loss.push_back(p.loss_L);
  }
  return b;
}

Scheme2Batch build_scheme2_batch(std::span<const ExperimentParams> points) {
  Scheme2Batch b;
  for (const ExperimentParams& p : points) {
    const PolOperator dark = single_pass_dark(p.theta_rad, p.beta_rad);
    const Complex mplus = single_pass_bright(p.theta_rad, p.beta_rad);
    const PolOperator qdark = scheme2_dark(p.theta_rad, p.beta_rad);
    const Complex qplus = scheme2_bright(p.theta_rad, p.beta_rad);
    b.dark_h_re.push_back(dark.at(0, 0).real());
    b.dark_h_im.push_back(dark.at(0, 0).imag());
    b.dark_v_re.push_back(dark.at(1, 0).real());
    b.dark_v_im.push_back(dark.at(1, 0).imag());
    b.bright_re.push_back(mplus.real());
    b.bright_im.push_back(mplus.imag());
    b.q_dark_h_re.push_back(qdark.at(0, 0).real());
    b.q_dark_h_im.push_back(qdark.at(0, 0).imag());
    b.q_dark_v_re.push_back(qdark.at(1, 0).real());
    b.q_dark_v_im.push_back(qdark.at(1, 0).imag());
    b.q_bright_re.push_back(qplus.real());
    b.q_bright_im.push_back(qplus.imag());
    b.back_v.push_back(0.5 * std::sin(p.theta_rad));
  }
  return b;
}

void BatchTotals::resize(std::size_t n) {
  p_d.assign(n, 0.0);
  gamma_hp.assign(n, 0.0);
  gamma_ext.assign(n, 0.0);
  v_weight.assign(n, 0.0);
  residual.assign(n, 0.0);
}

namespace {

void scheme1_scalar(const Scheme1Batch& b, std::uint64_t rounds, BatchTotals& out) {
  out.resize(b.size());
  for (std::size_t lane = 0; lane < b.size(); ++lane) {
    const double ahr = b.dark_h_re[lane], ahi = b.dark_h_im[lane];
    const double avr = b.dark_v_re[lane], avi = b.dark_v_im[lane];
    const double mpr = b.bright_re[lane], mpi = b.bright_im[lane];
    const double fr = b.feed_re[lane], fi = b.feed_im[lane];
    const double L = b.loss[lane];
    double cr = 1.0, ci = 0.0;
    Kahan p_d, g_hp, g_ext, vw;
    for (std::uint64_t j = 0; j < rounds; ++j) {
      const double dhr = cr * ahr - ci * ahi;
      const double dhi = cr * ahi + ci * ahr;
      const double dvr = cr * avr - ci * avi;
      const double dvi = cr * avi + ci * avr;
      const double dv2 = dvr * dvr + dvi * dvi;
      p_d.add(dhr * dhr + dhi * dhi + dv2);
      vw.add(dv2);
      g_hp.add(dv2);  // the bright-port V amplitude equals the dark one
      const double bhr = cr * mpr - ci * mpi;
      const double bhi = cr * mpi + ci * mpr;
      g_ext.add(L * (bhr * bhr + bhi * bhi));
      cr = bhr * fr - bhi * fi;
      ci = bhr * fi + bhi * fr;
      if (cr * cr + ci * ci < kDeadWeight) break;
    }
    out.p_d[lane] = p_d.sum;
    out.gamma_hp[lane] = g_hp.sum;
    out.gamma_ext[lane] = g_ext.sum;
    out.v_weight[lane] = vw.sum;
    out.residual[lane] = cr * cr + ci * ci;
  }
}

void scheme2_scalar(const Scheme2Batch& b, std::uint64_t rounds, BatchTotals& out) {
  out.resize(b.size());
  for (std::size_t lane = 0; lane < b.size(); ++lane) {
    const double avr = b.dark_v_re[lane], avi = b.dark_v_im[lane];
    const double qhr = b.q_dark_h_re[lane], qhi = b.q_dark_h_im[lane];
    const double qvr = b.q_dark_v_re[lane], qvi = b.q_dark_v_im[lane];
    const double qpr = b.q_bright_re[lane], qpi = b.q_bright_im[lane];
    const double bv = b.back_v[lane];
    Kahan p_d, g_hp, vw;

    // round 1: plain first pass
    {
      const double dhr = b.dark_h_re[lane], dhi = b.dark_h_im[lane];
      const double dv2 = avr * avr + avi * avi;
      p_d.add(dhr * dhr + dhi * dhi + dv2);
      vw.add(dv2);
      g_hp.add(dv2);
    }
    double cr = b.bright_re[lane], ci = b.bright_im[lane];
    for (std::uint64_t j = 1; j < rounds; ++j) {
      if (cr * cr + ci * ci < kDeadWeight) break;
      // backward V amplitude i*bv*c at each of the two entrance ports
      const double hvr = -ci * bv;
      const double hvi = cr * bv;
      g_hp.add(2.0 * (hvr * hvr + hvi * hvi));
      const double dhr = cr * qhr - ci * qhi;
      const double dhi = cr * qhi + ci * qhr;
      const double dvr = cr * qvr - ci * qvi;
      const double dvi = cr * qvi + ci * qvr;
      const double dv2 = dvr * dvr + dvi * dvi;
      p_d.add(dhr * dhr + dhi * dhi + dv2);
      vw.add(dv2);
      g_hp.add(dv2);  // HP2 sees the same V amplitude as the dark port
      const double nr = cr * qpr - ci * qpi;
      const double ni = cr * qpi + ci * qpr;
      cr = nr;
      ci = ni;
    }
    out.p_d[lane] = p_d.sum;
    out.gamma_hp[lane] = g_hp.sum;
    out.v_weight[lane] = vw.sum;
    out.residual[lane] = cr * cr + ci * ci;
  }
}

}  // namespace

#ifdef RPSM_HAVE_AVX2
void scheme1_avx2(const Scheme1Batch&, std::uint64_t, BatchTotals&);
void scheme2_avx2(const Scheme2Batch&, std::uint64_t, BatchTotals&);
#endif

void run_scheme1_with(Isa isa, const Scheme1Batch& batch, std::uint64_t rounds,
                      BatchTotals& out) {
#ifdef RPSM_HAVE_AVX2
  if (isa == Isa::avx2) {
    scheme1_avx2(batch, rounds, out);
    return;
  }
#endif
  if (isa == Isa::avx2) throw ValidationError("AVX2 kernels not built");
  scheme1_scalar(batch, rounds, out);
}

void run_scheme2_with(Isa isa, const Scheme2Batch& batch, std::uint64_t rounds,
                      BatchTotals& out) {
#ifdef RPSM_HAVE_AVX2
  if (isa == Isa::avx2) {
    scheme2_avx2(batch, rounds, out);
    return;
  }
#endif
  if (isa == Isa::avx2) throw ValidationError("AVX2 kernels not built");
  scheme2_scalar(batch, rounds, out);
}

void run_scheme1(const Scheme1Batch& batch, std::uint64_t rounds, BatchTotals& out) {
  run_scheme1_with(active_isa(), batch, rounds, out);
}

void run_scheme2(const Scheme2Batch& batch, std::uint64_t rounds, BatchTotals& out) {
  run_scheme2_with(active_isa(), batch, rounds, out);
}

}  // namespace rpsm::kernels
