#include "saw/kernels.hpp"

#ifdef SAW_KERNELS_AVX2_TU

#include <immintrin.h>

// AVX2 variants of the lattice kernels. Lane l of the accumulator holds the
// partial sum over indices congruent to l mod 4, matching the scalar
// reference exactly; the scalar tail keeps striping by index, so results are
// bit-identical to the reference for every n.

namespace saw::kernels {

namespace {

void scale_avx2(double* a, std::size_t n, double s) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(a + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vs));
    for (; i < n; ++i) a[i] *= s;
}

template <bool WithU, bool Store>
double mass_impl(const double* k, const double* a, const double* u,
                 std::size_t n, double qfloor, double* w) {
    const __m256d vfloor = _mm256_set1_pd(qfloor);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d q = _mm256_loadu_pd(a + i);
        if constexpr (WithU) q = _mm256_add_pd(q, _mm256_loadu_pd(u + i));
        q = _mm256_max_pd(q, vfloor);
        const __m256d v = _mm256_div_pd(_mm256_loadu_pd(k + i), q);
        if constexpr (Store) _mm256_storeu_pd(w + i, v);
        acc = _mm256_add_pd(acc, v);
    }
    alignas(32) double p[4];
    _mm256_store_pd(p, acc);
    for (; i < n; ++i) {
        double q = WithU ? a[i] + u[i] : a[i];
        if (q < qfloor) q = qfloor;
        const double v = k[i] / q;
        if constexpr (Store) w[i] = v;
        p[i & 3] += v;
    }
    return (p[0] + p[1]) + (p[2] + p[3]);
}

double mass_sum_avx2(const double* k, const double* a, const double* u,
                     std::size_t n, double qfloor) {
    return mass_impl<true, false>(k, a, u, n, qfloor, nullptr);
}
double mass_row_avx2(const double* k, const double* a, const double* u,
                     std::size_t n, double qfloor, double* w) {
    return mass_impl<true, true>(k, a, u, n, qfloor, w);
}
double mass_sum_np_avx2(const double* k, const double* a, std::size_t n, double qfloor) {
    return mass_impl<false, false>(k, a, nullptr, n, qfloor, nullptr);
}
double mass_row_np_avx2(const double* k, const double* a, std::size_t n, double qfloor,
                        double* w) {
    return mass_impl<false, true>(k, a, nullptr, n, qfloor, w);
}

const Ops avx2_table{scale_avx2, mass_sum_avx2, mass_row_avx2,
                     mass_sum_np_avx2, mass_row_np_avx2};

}  // namespace

const Ops& avx2_ops() { return avx2_table; }

bool avx2_supported() { return __builtin_cpu_supports("avx2"); }

}  // namespace saw::kernels

#endif  // SAW_KERNELS_AVX2_TU
