#include "saw/kernels.hpp"

#ifdef SAW_KERNELS_NEON_TU

#include <arm_neon.h>

// NEON variants. float64x2 covers two lanes, so two registers together hold
// the same four mod-4 partial sums as the scalar reference and AVX2 path.

namespace saw::kernels {

namespace {

void scale_neon(double* a, std::size_t n, double s) {
    const float64x2_t vs = vdupq_n_f64(s);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(a + i, vmulq_f64(vld1q_f64(a + i), vs));
    for (; i < n; ++i) a[i] *= s;
}

template <bool WithU, bool Store>
double mass_impl(const double* k, const double* a, const double* u,
                 std::size_t n, double qfloor, double* w) {
    const float64x2_t vfloor = vdupq_n_f64(qfloor);
    float64x2_t acc01 = vdupq_n_f64(0.0);
    float64x2_t acc23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float64x2_t q01 = vld1q_f64(a + i);
        float64x2_t q23 = vld1q_f64(a + i + 2);
        if constexpr (WithU) {
            q01 = vaddq_f64(q01, vld1q_f64(u + i));
            q23 = vaddq_f64(q23, vld1q_f64(u + i + 2));
        }
        q01 = vmaxq_f64(q01, vfloor);
        q23 = vmaxq_f64(q23, vfloor);
        const float64x2_t v01 = vdivq_f64(vld1q_f64(k + i), q01);
        const float64x2_t v23 = vdivq_f64(vld1q_f64(k + i + 2), q23);
        if constexpr (Store) {
            vst1q_f64(w + i, v01);
            vst1q_f64(w + i + 2, v23);
        }
        acc01 = vaddq_f64(acc01, v01);
        acc23 = vaddq_f64(acc23, v23);
    }
    double p[4] = {vgetq_lane_f64(acc01, 0), vgetq_lane_f64(acc01, 1),
                   vgetq_lane_f64(acc23, 0), vgetq_lane_f64(acc23, 1)};
    for (; i < n; ++i) {
        double q = WithU ? a[i] + u[i] : a[i];
        if (q < qfloor) q = qfloor;
        const double v = k[i] / q;
        if constexpr (Store) w[i] = v;
        p[i & 3] += v;
    }
    return (p[0] + p[1]) + (p[2] + p[3]);
}

double mass_sum_neon(const double* k, const double* a, const double* u,
                     std::size_t n, double qfloor) {
    return mass_impl<true, false>(k, a, u, n, qfloor, nullptr);
}
double mass_row_neon(const double* k, const double* a, const double* u,
                     std::size_t n, double qfloor, double* w) {
    return mass_impl<true, true>(k, a, u, n, qfloor, w);
}
double mass_sum_np_neon(const double* k, const double* a, std::size_t n, double qfloor) {
    return mass_impl<false, false>(k, a, nullptr, n, qfloor, nullptr);
}
double mass_row_np_neon(const double* k, const double* a, std::size_t n, double qfloor,
                        double* w) {
    return mass_impl<false, true>(k, a, nullptr, n, qfloor, w);
}

const Ops neon_table{scale_neon, mass_sum_neon, mass_row_neon,
                     mass_sum_np_neon, mass_row_np_neon};

}  // namespace

const Ops& neon_ops() { return neon_table; }

}  // namespace saw::kernels

#endif  // SAW_KERNELS_NEON_TU
