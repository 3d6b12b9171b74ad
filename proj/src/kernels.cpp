#include "saw/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>

namespace saw::kernels {

namespace {

void scale_scalar(double* a, std::size_t n, double s) {
    for (std::size_t i = 0; i < n; ++i) a[i] *= s;
}

double mass_sum_scalar(const double* k, const double* a, const double* u,
                       std::size_t n, double qfloor) {
    double p[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
        p[i & 3] += k[i] / std::max(a[i] + u[i], qfloor);
    return (p[0] + p[1]) + (p[2] + p[3]);
}

double mass_row_scalar(const double* k, const double* a, const double* u,
                       std::size_t n, double qfloor, double* w) {
    double p[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = k[i] / std::max(a[i] + u[i], qfloor);
        p[i & 3] += w[i];
    }
    return (p[0] + p[1]) + (p[2] + p[3]);
}

double mass_sum_np_scalar(const double* k, const double* a, std::size_t n, double qfloor) {
    double p[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
        p[i & 3] += k[i] / std::max(a[i], qfloor);
    return (p[0] + p[1]) + (p[2] + p[3]);
}

double mass_row_np_scalar(const double* k, const double* a, std::size_t n, double qfloor,
                          double* w) {
    double p[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = k[i] / std::max(a[i], qfloor);
        p[i & 3] += w[i];
    }
    return (p[0] + p[1]) + (p[2] + p[3]);
}

const Ops scalar_table{scale_scalar, mass_sum_scalar, mass_row_scalar,
                       mass_sum_np_scalar, mass_row_np_scalar};

Backend g_backend = Backend::scalar;
const Ops* g_active = &scalar_table;
bool g_initialized = false;

void activate(Backend b) {
    g_backend = b;
    switch (b) {
        case Backend::scalar: g_active = &scalar_table; break;
#ifdef SAW_KERNELS_AVX2_TU
        case Backend::avx2: g_active = &avx2_ops(); break;
#endif
#ifdef SAW_KERNELS_NEON_TU
        case Backend::neon: g_active = &neon_ops(); break;
#endif
        default: g_active = &scalar_table; g_backend = Backend::scalar; break;
    }
}

bool backend_supported(Backend b) {
    switch (b) {
        case Backend::scalar: return true;
#ifdef SAW_KERNELS_AVX2_TU
        case Backend::avx2: return avx2_supported();
#endif
#ifdef SAW_KERNELS_NEON_TU
        case Backend::neon: return true;
#endif
        default: return false;
    }
}

void init_once() {
    if (g_initialized) return;
    g_initialized = true;
    Backend want = detect_best();
    if (const char* env = std::getenv("SAW_KERNELS")) {
        if (!std::strcmp(env, "scalar")) want = Backend::scalar;
        else if (!std::strcmp(env, "avx2")) want = Backend::avx2;
        else if (!std::strcmp(env, "neon")) want = Backend::neon;
    }
    if (!backend_supported(want)) want = detect_best();
    activate(want);
}

}  // namespace

const Ops& scalar_ops() { return scalar_table; }

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "scalar";
}

Backend detect_best() {
#ifdef SAW_KERNELS_AVX2_TU
    if (avx2_supported()) return Backend::avx2;
#endif
#ifdef SAW_KERNELS_NEON_TU
    return Backend::neon;
#endif
    return Backend::scalar;
}

const Ops& active() {
    init_once();
    return *g_active;
}

Backend active_backend() {
    init_once();
    return g_backend;
}

bool set_backend(Backend b) {
    init_once();
    if (!backend_supported(b)) return false;
    activate(b);
    return true;
}

}  // namespace saw::kernels
