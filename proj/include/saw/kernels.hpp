#pragma once

#include <cstddef>

namespace saw::kernels {

// Data-parallel inner loops of the lattice model. A scalar reference
// implementation always exists; SIMD variants (AVX2 on x86-64, NEON on
// aarch64) are selected at runtime when the CPU supports them.
//
// Every backend must produce bit-identical results. Reductions therefore
// accumulate into four partial sums striped by index mod 4 (one SIMD lane
// each) and combine them as (p0 + p1) + (p2 + p3); element-wise multiply
// and divide are IEEE-exact per element, so no further care is needed.
struct Ops {
    // a[i] *= s
    void (*scale)(double* a, std::size_t n, double s);

    // sum_i k[i] / max(a[i] + u[i], qfloor)
    double (*mass_sum)(const double* k, const double* a, const double* u,
                       std::size_t n, double qfloor);

    // as mass_sum, additionally writing w[i] = k[i] / max(a[i] + u[i], qfloor)
    double (*mass_row)(const double* k, const double* a, const double* u,
                       std::size_t n, double qfloor, double* w);

    // variants without the potential term (q = a)
    double (*mass_sum_np)(const double* k, const double* a, std::size_t n, double qfloor);
    double (*mass_row_np)(const double* k, const double* a, std::size_t n, double qfloor,
                          double* w);
};

enum class Backend { scalar, avx2, neon };

const char* backend_name(Backend b);

// Backend with the widest supported vectors on this host.
Backend detect_best();

// Active dispatch table. Initialized on first use from detect_best(), or
// from the SAW_KERNELS environment variable (scalar|avx2|neon|auto).
const Ops& active();
Backend active_backend();

// Force a backend; returns false (and leaves the dispatch unchanged) if the
// host does not support it.
bool set_backend(Backend b);

const Ops& scalar_ops();
#ifdef SAW_KERNELS_AVX2_TU
const Ops& avx2_ops();
bool avx2_supported();
#endif
#ifdef SAW_KERNELS_NEON_TU
const Ops& neon_ops();
#endif

}  // namespace saw::kernels
