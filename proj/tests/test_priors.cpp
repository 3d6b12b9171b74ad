#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "saw/priors.hpp"

using namespace saw;

namespace {

// Simpson-rule integral of the parent Gaussian density over [lo, hi];
// independent oracle for the truncation constants.
double gauss_mass_quadrature(double mean, double sd, double lo, double hi) {
    const int n = 20000;  // even
    const double h = (hi - lo) / n;
    auto pdf = [&](double x) {
        const double z = (x - mean) / sd;
        return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
    };
    double acc = pdf(lo) + pdf(hi);
    for (int k = 1; k < n; ++k) acc += pdf(lo + k * h) * (k % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("default prior table values") {
    const PriorSpec s = PriorSpec::defaults();
    REQUIRE(s.dim() == 5);
    CHECK(s.names[0] == "gamma");
    CHECK(s.comp[0].mean == -2.5);
    CHECK(s.comp[0].sd == 0.3);
    CHECK(s.comp[0].lower == -3.8);
    CHECK(s.comp[0].upper == 0.0);
    CHECK(s.names[1] == "r_i");
    CHECK(s.comp[1].mean == 5.0);
    CHECK(s.comp[1].sd == 5.0);
    CHECK(s.comp[1].lower == 0.1);
    CHECK(s.comp[1].upper == 15.0);
    CHECK(s.names[2] == "r_j");
    CHECK(s.comp[2].mean == 5.0);
    CHECK(s.names[3] == "phi");
    CHECK(s.comp[3].mean == 1.5);
    CHECK(s.comp[3].sd == 0.5);
    CHECK(s.comp[3].lower == 0.5);
    CHECK(s.comp[3].upper == 3.0);
    CHECK(s.names[4] == "lambda");
    CHECK(s.comp[4].mean == 2.0);
    CHECK(s.comp[4].sd == 2.0);
    CHECK(s.comp[4].lower == 0.3);
    CHECK(s.comp[4].upper == 8.0);
}

TEST_CASE("log_prior: -inf outside the truncation box") {
    const PriorSpec s = PriorSpec::defaults();
    ModelParams p;  // defaults sit at the prior means
    CHECK(std::isfinite(log_prior(p, s)));

    ModelParams out = p;
    out.lambda = 10.0;
    CHECK(log_prior(out, s) == -std::numeric_limits<double>::infinity());
    out = p;
    out.gamma = -3.9;
    CHECK(log_prior(out, s) == -std::numeric_limits<double>::infinity());
    out = p;
    out.r_i = 0.05;
    CHECK(log_prior(out, s) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("log_prior at the prior means matches the quadrature oracle") {
    const PriorSpec s = PriorSpec::defaults();
    double expect = 0.0;
    for (const auto& c : s.comp) {
        const double z = 0.0;  // at the mean
        const double logpdf = -0.5 * z * z - std::log(c.sd) -
                              0.5 * std::log(2.0 * std::numbers::pi);
        const double mass = gauss_mass_quadrature(c.mean, c.sd, c.lower, c.upper);
        expect += logpdf - std::log(mass);
        // per-component check
        CHECK(c.log_density(c.mean) == doctest::Approx(logpdf - std::log(mass)).epsilon(1e-9));
    }
    ModelParams p;
    CHECK(log_prior(p, s) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("truncation constants cancel in log-density differences") {
    const PriorSpec s = PriorSpec::defaults();
    const std::vector<double> t1{-2.0, 4.0, 6.0, 1.0, 3.0};
    const std::vector<double> t2{-3.0, 2.0, 9.0, 2.5, 0.5};
    double untruncated_diff = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
        const auto& c = s.comp[k];
        auto logpdf = [&](double x) {
            const double z = (x - c.mean) / c.sd;
            return -0.5 * z * z - std::log(c.sd) - 0.5 * std::log(2.0 * std::numbers::pi);
        };
        untruncated_diff += logpdf(t1[k]) - logpdf(t2[k]);
    }
    const double diff = log_prior(t1, s) - log_prior(t2, s);
    CHECK(diff == doctest::Approx(untruncated_diff).epsilon(1e-12));
}

TEST_CASE("truncated normal: cdf, sampling, analytic moments") {
    TruncatedNormal tn{2.0, 2.0, 0.3, 8.0};
    CHECK(tn.cdf(0.3) == 0.0);
    CHECK(tn.cdf(8.0) == 1.0);
    CHECK(tn.cdf(5.0) > tn.cdf(1.0));

    // moments against quadrature
    const int n = 40000;
    const double h = (tn.upper - tn.lower) / n;
    double zmass = 0.0, m1 = 0.0, m2 = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double x = tn.lower + k * h;
        const double z = (x - tn.mean) / tn.sd;
        double wgt = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        const double f = wgt * std::exp(-0.5 * z * z);
        zmass += f;
        m1 += f * x;
        m2 += f * x * x;
    }
    m1 /= zmass;
    m2 /= zmass;
    CHECK(tn.moment_mean() == doctest::Approx(m1).epsilon(1e-8));
    CHECK(tn.moment_sd() == doctest::Approx(std::sqrt(m2 - m1 * m1)).epsilon(1e-8));

    // sampling stays in support and matches the moments
    Rng rng(17);
    double sm = 0.0, sv = 0.0;
    const int ns = 200000;
    for (int k = 0; k < ns; ++k) {
        const double x = tn.sample(rng);
        REQUIRE(x >= tn.lower);
        REQUIRE(x <= tn.upper);
        sm += x;
        sv += x * x;
    }
    sm /= ns;
    sv = sv / ns - sm * sm;
    CHECK(sm == doctest::Approx(tn.moment_mean()).epsilon(0.01));
    CHECK(std::sqrt(sv) == doctest::Approx(tn.moment_sd()).epsilon(0.01));
}

TEST_CASE("prior spec validation") {
    PriorSpec s = PriorSpec::defaults();
    CHECK_NOTHROW(s.check());
    s.comp[0].sd = 0.0;
    CHECK_THROWS_AS(s.check(), ConfigError);
    s = PriorSpec::defaults();
    s.comp[2].lower = s.comp[2].upper;
    CHECK_THROWS_AS(s.check(), ConfigError);

    const PriorSpec d = PriorSpec::defaults();
    CHECK(d.in_support(std::vector<double>{-2.5, 5.0, 5.0, 1.5, 2.0}));
    CHECK_FALSE(d.in_support(std::vector<double>{-2.5, 5.0, 5.0, 1.5, 9.0}));
    CHECK_FALSE(d.in_support(std::vector<double>{0.0, 0.0, 5.0, 1.5, 2.0}));
}
