#pragma once

#include <span>
#include <string>
#include <vector>

#include "saw/errors.hpp"
#include "saw/model.hpp"
#include "saw/rng.hpp"

namespace saw {

// Gaussian truncated to [lower, upper]; density zero outside.
struct TruncatedNormal {
    double mean = 0.0;
    double sd = 1.0;
    double lower = -1.0;
    double upper = 1.0;

    void check() const;
    bool in_support(double x) const { return x >= lower && x <= upper; }
    double log_density(double x) const;   // -inf outside the support
    double cdf(double x) const;           // of the truncated distribution
    double sample(Rng& rng) const;        // rejection from the parent Gaussian
    double trunc_mass() const;            // parent-Gaussian mass on [lower, upper]

    // analytic moments of the truncated distribution
    double moment_mean() const;
    double moment_sd() const;
};

struct PriorSpec {
    std::vector<std::string> names;
    std::vector<TruncatedNormal> comp;

    // Default priors for [gamma, r_i, r_j, phi, lambda].
    static PriorSpec defaults();

    std::size_t dim() const { return comp.size(); }
    void check() const;
    bool in_support(std::span<const double> theta) const;
    double log_density(std::span<const double> theta) const;
    std::vector<double> sample(Rng& rng) const;
};

double log_prior(std::span<const double> theta, const PriorSpec& priors);
double log_prior(const ModelParams& p, const PriorSpec& priors);

}  // namespace saw
