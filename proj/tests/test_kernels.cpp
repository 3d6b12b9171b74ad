#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <vector>

#include "saw/kernels.hpp"
#include "saw/rng.hpp"

using namespace saw;

namespace {

struct Case {
    std::vector<double> k, a, u;
    double qfloor;
};

Case random_case(Rng& rng, std::size_t n) {
    Case c;
    c.k.resize(n);
    c.a.resize(n);
    c.u.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c.k[i] = rng.uniform();
        c.a[i] = rng.uniform() < 0.05 ? 0.0 : rng.uniform(0.0, 40.0);
        c.u[i] = rng.uniform(0.0, 8.0);
    }
    c.qfloor = 1e-300;
    return c;
}

std::vector<kernels::Backend> available_backends() {
    std::vector<kernels::Backend> b{kernels::Backend::scalar};
    if (kernels::set_backend(kernels::Backend::avx2)) b.push_back(kernels::Backend::avx2);
    if (kernels::set_backend(kernels::Backend::neon)) b.push_back(kernels::Backend::neon);
    kernels::set_backend(kernels::detect_best());
    return b;
}

}  // namespace

TEST_CASE("scalar reference: mass sums and row stores agree") {
    Rng rng(11);
    const auto& ops = kernels::scalar_ops();
    for (std::size_t n : {0ul, 1ul, 3ul, 4ul, 7ul, 64ul, 101ul, 10000ul}) {
        Case c = random_case(rng, n);
        std::vector<double> w(n, -1.0);
        const double s1 = ops.mass_sum(c.k.data(), c.a.data(), c.u.data(), n, c.qfloor);
        const double s2 = ops.mass_row(c.k.data(), c.a.data(), c.u.data(), n, c.qfloor, w.data());
        CHECK(s1 == s2);
        double p[4] = {0, 0, 0, 0};
        for (std::size_t i = 0; i < n; ++i) p[i & 3] += w[i];
        CHECK(s1 == (p[0] + p[1]) + (p[2] + p[3]));
    }
}

TEST_CASE("all backends produce bit-identical results") {
    const auto backends = available_backends();
    CAPTURE(backends.size());
    Rng rng(977);
    for (std::size_t n : {0ul, 1ul, 2ul, 3ul, 4ul, 5ul, 6ul, 7ul, 8ul, 15ul, 51ul, 100ul,
                          2601ul, 10000ul}) {
        Case c = random_case(rng, n);
        // reference values
        const auto& ref = kernels::scalar_ops();
        std::vector<double> wref(n), aref = c.a;
        ref.scale(aref.data(), n, 0.987654321);
        const double sref = ref.mass_sum(c.k.data(), c.a.data(), c.u.data(), n, c.qfloor);
        const double rref = ref.mass_row(c.k.data(), c.a.data(), c.u.data(), n, c.qfloor, wref.data());
        const double npref = ref.mass_sum_np(c.k.data(), c.a.data(), n, c.qfloor);
        std::vector<double> wnpref(n);
        const double rnpref = ref.mass_row_np(c.k.data(), c.a.data(), n, c.qfloor, wnpref.data());

        for (auto b : backends) {
            REQUIRE(kernels::set_backend(b));
            const auto& ops = kernels::active();
            INFO("backend ", kernels::backend_name(b), " n=", n);

            std::vector<double> av = c.a;
            ops.scale(av.data(), n, 0.987654321);
            CHECK(std::memcmp(av.data(), aref.data(), n * sizeof(double)) == 0);

            CHECK(ops.mass_sum(c.k.data(), c.a.data(), c.u.data(), n, c.qfloor) == sref);
            std::vector<double> w(n);
            CHECK(ops.mass_row(c.k.data(), c.a.data(), c.u.data(), n, c.qfloor, w.data()) == rref);
            CHECK(std::memcmp(w.data(), wref.data(), n * sizeof(double)) == 0);

            CHECK(ops.mass_sum_np(c.k.data(), c.a.data(), n, c.qfloor) == npref);
            std::vector<double> wnp(n);
            CHECK(ops.mass_row_np(c.k.data(), c.a.data(), n, c.qfloor, wnp.data()) == rnpref);
            CHECK(std::memcmp(wnp.data(), wnpref.data(), n * sizeof(double)) == 0);
        }
    }
    kernels::set_backend(kernels::detect_best());
}

TEST_CASE("q floor clamps zero activation") {
    const auto& ops = kernels::scalar_ops();
    double k[1] = {1.0}, a[1] = {0.0}, u[1] = {0.0};
    const double s = ops.mass_sum(k, a, u, 1, 1e-300);
    CHECK(s == 1.0 / 1e-300);
    const double snp = ops.mass_sum_np(k, a, 1, 1e-300);
    CHECK(snp == 1.0 / 1e-300);
    CHECK(std::isfinite(s));
}

TEST_CASE("runtime dispatch picks a supported backend") {
    const auto b = kernels::active_backend();
    INFO("active backend: ", kernels::backend_name(b));
    // detect_best must be selectable
    CHECK(kernels::set_backend(kernels::detect_best()));
}

TEST_CASE("rng: determinism, bounds, serialization") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());

    Rng r(7);
    for (int i = 0; i < 10000; ++i) {
        const double x = r.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        CHECK(r.bounded(17) < 17);
    }

    // normal() moments
    Rng g(3);
    double m = 0.0, v = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = g.normal();
        m += z;
        v += z * z;
    }
    m /= n;
    v = v / n - m * m;
    CHECK(std::abs(m) < 0.01);
    CHECK(std::abs(v - 1.0) < 0.02);

    // save/restore continues the identical stream
    Rng s(99);
    s.next();
    std::stringstream ss;
    s.save(ss);
    Rng t = Rng::restore(ss);
    for (int i = 0; i < 100; ++i) CHECK(s.next() == t.next());

    // child streams differ from parent and each other
    Rng p(5);
    Rng c1 = p.child(1), c2 = p.child(2);
    CHECK(c1.next() != c2.next());
}
