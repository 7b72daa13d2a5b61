// AVX2 variants of the pulse-train lane kernels. Four lanes per vector, one
// round per iteration, with the arithmetic mirroring the scalar reference
// operation for operation (no FMA contraction) so the two kernels agree to
// the last bit wherever the early-exit timing coincides.

#ifdef RPSM_HAVE_AVX2

#include <immintrin.h>

#include "rpsm/pulse_kernels.hpp"

namespace rpsm::kernels {

namespace {

constexpr double kDeadWeight = 1e-300;

inline __m256d cmul_re(__m256d ar, __m256d ai, __m256d br, __m256d bi) {
  return _mm256_sub_pd(_mm256_mul_pd(ar, br), _mm256_mul_pd(ai, bi));
}

inline __m256d cmul_im(__m256d ar, __m256d ai, __m256d br, __m256d bi) {
  return _mm256_add_pd(_mm256_mul_pd(ar, bi), _mm256_mul_pd(ai, br));
}

inline __m256d mag2(__m256d re, __m256d im) {
  return _mm256_add_pd(_mm256_mul_pd(re, re), _mm256_mul_pd(im, im));
}

inline void kadd(__m256d& sum, __m256d& comp, __m256d x) {
  const __m256d y = _mm256_sub_pd(x, comp);
  const __m256d t = _mm256_add_pd(sum, y);
  comp = _mm256_sub_pd(_mm256_sub_pd(t, sum), y);
  sum = t;
}

inline bool all_dead(__m256d w) {
  const __m256d dead = _mm256_set1_pd(kDeadWeight);
  return _mm256_movemask_pd(_mm256_cmp_pd(w, dead, _CMP_LT_OQ)) == 0xF;
}

template <class Batch>
Batch padded_to_multiple_of_4(const Batch& b);

template <>
Scheme1Batch padded_to_multiple_of_4(const Scheme1Batch& b) {
  Scheme1Batch p = b;
  while (p.size() % 4 != 0) {
    p.dark_h_re.push_back(0.0);
    p.dark_h_im.push_back(0.0);
    p.dark_v_re.push_back(0.0);
    p.dark_v_im.push_back(0.0);
    p.bright_re.push_back(0.0);
    p.bright_im.push_back(0.0);
    p.feed_re.push_back(0.0);
    p.feed_im.push_back(0.0);
    p.loss.push_back(0.0);
  }
  return p;
}

template <>
Scheme2Batch padded_to_multiple_of_4(const Scheme2Batch& b) {
  Scheme2Batch p = b;
  while (p.size() % 4 != 0) {
    p.dark_h_re.push_back(0.0);
    p.dark_h_im.push_back(0.0);
    p.dark_v_re.push_back(0.0);
    p.dark_v_im.push_back(0.0);
    p.bright_re.push_back(0.0);
    p.bright_im.push_back(0.0);
    p.q_dark_h_re.push_back(0.0);
    p.q_dark_h_im.push_back(0.0);
    p.q_dark_v_re.push_back(0.0);
    p.q_dark_v_im.push_back(0.0);
    p.q_bright_re.push_back(0.0);
    p.q_bright_im.push_back(0.0);
    p.back_v.push_back(0.0);
  }
  return p;
}

void copy_front(const BatchTotals& src, std::size_t n, BatchTotals& dst) {
  dst.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    dst.p_d[i] = src.p_d[i];
    dst.gamma_hp[i] = src.gamma_hp[i];
    dst.gamma_ext[i] = src.gamma_ext[i];
    dst.v_weight[i] = src.v_weight[i];
    dst.residual[i] = src.residual[i];
  }
}

}  // namespace

void scheme1_avx2(const Scheme1Batch& b, std::uint64_t rounds, BatchTotals& out) {
  const std::size_t n = b.size();
  if (n % 4 != 0) {
    const Scheme1Batch padded = padded_to_multiple_of_4(b);
    BatchTotals tmp;
    scheme1_avx2(padded, rounds, tmp);
    copy_front(tmp, n, out);
    return;
  }
  out.resize(n);
  for (std::size_t lane = 0; lane < n; lane += 4) {
    const __m256d ahr = _mm256_loadu_pd(&b.dark_h_re[lane]);
    const __m256d ahi = _mm256_loadu_pd(&b.dark_h_im[lane]);
    const __m256d avr = _mm256_loadu_pd(&b.dark_v_re[lane]);
    const __m256d avi = _mm256_loadu_pd(&b.dark_v_im[lane]);
    const __m256d mpr = _mm256_loadu_pd(&b.bright_re[lane]);
    const __m256d mpi = _mm256_loadu_pd(&b.bright_im[lane]);
    const __m256d fr = _mm256_loadu_pd(&b.feed_re[lane]);
    const __m256d fi = _mm256_loadu_pd(&b.feed_im[lane]);
    const __m256d L = _mm256_loadu_pd(&b.loss[lane]);
    __m256d cr = _mm256_set1_pd(1.0);
    __m256d ci = _mm256_setzero_pd();
    __m256d pd = _mm256_setzero_pd(), pdc = _mm256_setzero_pd();
    __m256d gh = _mm256_setzero_pd(), ghc = _mm256_setzero_pd();
    __m256d ge = _mm256_setzero_pd(), gec = _mm256_setzero_pd();
    __m256d vw = _mm256_setzero_pd(), vwc = _mm256_setzero_pd();
    for (std::uint64_t j = 0; j < rounds; ++j) {
      const __m256d dhr = cmul_re(cr, ci, ahr, ahi);
      const __m256d dhi = cmul_im(cr, ci, ahr, ahi);
      const __m256d dvr = cmul_re(cr, ci, avr, avi);
      const __m256d dvi = cmul_im(cr, ci, avr, avi);
      const __m256d dv2 = mag2(dvr, dvi);
      kadd(pd, pdc, _mm256_add_pd(mag2(dhr, dhi), dv2));
      kadd(vw, vwc, dv2);
      kadd(gh, ghc, dv2);
      const __m256d bhr = cmul_re(cr, ci, mpr, mpi);
      const __m256d bhi = cmul_im(cr, ci, mpr, mpi);
      kadd(ge, gec, _mm256_mul_pd(L, mag2(bhr, bhi)));
      cr = cmul_re(bhr, bhi, fr, fi);
      ci = cmul_im(bhr, bhi, fr, fi);
      if (all_dead(mag2(cr, ci))) break;
    }
    _mm256_storeu_pd(&out.p_d[lane], pd);
    _mm256_storeu_pd(&out.gamma_hp[lane], gh);
    _mm256_storeu_pd(&out.gamma_ext[lane], ge);
    _mm256_storeu_pd(&out.v_weight[lane], vw);
    _mm256_storeu_pd(&out.residual[lane], mag2(cr, ci));
  }
}

void scheme2_avx2(const Scheme2Batch& b, std::uint64_t rounds, BatchTotals& out) {
  const std::size_t n = b.size();
  if (n % 4 != 0) {
    const Scheme2Batch padded = padded_to_multiple_of_4(b);
    BatchTotals tmp;
    scheme2_avx2(padded, rounds, tmp);
    copy_front(tmp, n, out);
    return;
  }
  out.resize(n);
  const __m256d two = _mm256_set1_pd(2.0);
  for (std::size_t lane = 0; lane < n; lane += 4) {
    const __m256d avr = _mm256_loadu_pd(&b.dark_v_re[lane]);
    const __m256d avi = _mm256_loadu_pd(&b.dark_v_im[lane]);
    const __m256d qhr = _mm256_loadu_pd(&b.q_dark_h_re[lane]);
    const __m256d qhi = _mm256_loadu_pd(&b.q_dark_h_im[lane]);
    const __m256d qvr = _mm256_loadu_pd(&b.q_dark_v_re[lane]);
    const __m256d qvi = _mm256_loadu_pd(&b.q_dark_v_im[lane]);
    const __m256d qpr = _mm256_loadu_pd(&b.q_bright_re[lane]);
    const __m256d qpi = _mm256_loadu_pd(&b.q_bright_im[lane]);
    const __m256d bv = _mm256_loadu_pd(&b.back_v[lane]);
    __m256d pd = _mm256_setzero_pd(), pdc = _mm256_setzero_pd();
    __m256d gh = _mm256_setzero_pd(), ghc = _mm256_setzero_pd();
    __m256d vw = _mm256_setzero_pd(), vwc = _mm256_setzero_pd();
    {
      const __m256d dhr = _mm256_loadu_pd(&b.dark_h_re[lane]);
      const __m256d dhi = _mm256_loadu_pd(&b.dark_h_im[lane]);
      const __m256d dv2 = mag2(avr, avi);
      kadd(pd, pdc, _mm256_add_pd(mag2(dhr, dhi), dv2));
      kadd(vw, vwc, dv2);
      kadd(gh, ghc, dv2);
    }
    __m256d cr = _mm256_loadu_pd(&b.bright_re[lane]);
    __m256d ci = _mm256_loadu_pd(&b.bright_im[lane]);
    for (std::uint64_t j = 1; j < rounds; ++j) {
      if (all_dead(mag2(cr, ci))) break;
      const __m256d hvr = _mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), ci), bv);
      const __m256d hvi = _mm256_mul_pd(cr, bv);
      kadd(gh, ghc, _mm256_mul_pd(two, mag2(hvr, hvi)));
      const __m256d dhr = cmul_re(cr, ci, qhr, qhi);
      const __m256d dhi = cmul_im(cr, ci, qhr, qhi);
      const __m256d dvr = cmul_re(cr, ci, qvr, qvi);
      const __m256d dvi = cmul_im(cr, ci, qvr, qvi);
      const __m256d dv2 = mag2(dvr, dvi);
      kadd(pd, pdc, _mm256_add_pd(mag2(dhr, dhi), dv2));
      kadd(vw, vwc, dv2);
      kadd(gh, ghc, dv2);
      const __m256d nr = cmul_re(cr, ci, qpr, qpi);
      const __m256d ni = cmul_im(cr, ci, qpr, qpi);
      cr = nr;
      ci = ni;
    }
    _mm256_storeu_pd(&out.p_d[lane], pd);
    _mm256_storeu_pd(&out.gamma_hp[lane], gh);
    _mm256_storeu_pd(&out.v_weight[lane], vw);
    _mm256_storeu_pd(&out.residual[lane], mag2(cr, ci));
  }
}

}  // namespace rpsm::kernels

#endif  // RPSM_HAVE_AVX2
