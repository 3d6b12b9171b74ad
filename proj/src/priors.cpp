#include "saw/priors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace saw {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}
}  // namespace

void TruncatedNormal::check() const {
    if (!(sd > 0.0)) throw ConfigError("truncated normal: sd must be positive");
    if (!(lower < upper)) throw ConfigError("truncated normal: lower must be below upper");
}

double TruncatedNormal::trunc_mass() const {
    return normal_cdf((upper - mean) / sd) - normal_cdf((lower - mean) / sd);
}

double TruncatedNormal::log_density(double x) const {
    if (!in_support(x)) return kNegInf;
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi) -
           std::log(trunc_mass());
}

double TruncatedNormal::cdf(double x) const {
    if (x <= lower) return 0.0;
    if (x >= upper) return 1.0;
    const double lo = normal_cdf((lower - mean) / sd);
    return (normal_cdf((x - mean) / sd) - lo) / trunc_mass();
}

double TruncatedNormal::sample(Rng& rng) const {
    for (;;) {
        const double x = mean + sd * rng.normal();
        if (in_support(x)) return x;
    }
}

double TruncatedNormal::moment_mean() const {
    const double a = (lower - mean) / sd, b = (upper - mean) / sd;
    const double Z = trunc_mass();
    return mean + sd * (normal_pdf(a) - normal_pdf(b)) / Z;
}

double TruncatedNormal::moment_sd() const {
    const double a = (lower - mean) / sd, b = (upper - mean) / sd;
    const double Z = trunc_mass();
    const double r = (normal_pdf(a) - normal_pdf(b)) / Z;
    const double var =
        1.0 + (a * normal_pdf(a) - b * normal_pdf(b)) / Z - r * r;
    return sd * std::sqrt(var);
}

PriorSpec PriorSpec::defaults() {
    PriorSpec s;
    s.names = {kParamNames.begin(), kParamNames.end()};
    s.comp = {
        {-2.5, 0.3, -3.8, 0.0},  // gamma
        {5.0, 5.0, 0.1, 15.0},   // r_i
        {5.0, 5.0, 0.1, 15.0},   // r_j
        {1.5, 0.5, 0.5, 3.0},    // phi
        {2.0, 2.0, 0.3, 8.0},    // lambda
    };
    return s;
}

void PriorSpec::check() const {
    if (comp.empty()) throw ConfigError("prior spec has no components");
    if (!names.empty() && names.size() != comp.size())
        throw ConfigError("prior spec: names/components size mismatch");
    for (const auto& c : comp) c.check();
}

bool PriorSpec::in_support(std::span<const double> theta) const {
    if (theta.size() != comp.size()) return false;
    for (std::size_t k = 0; k < comp.size(); ++k)
        if (!comp[k].in_support(theta[k])) return false;
    return true;
}

double PriorSpec::log_density(std::span<const double> theta) const {
    if (theta.size() != comp.size())
        throw ConfigError("theta dimension does not match prior spec");
    double lp = 0.0;
    for (std::size_t k = 0; k < comp.size(); ++k) {
        lp += comp[k].log_density(theta[k]);
        if (lp == kNegInf) return kNegInf;
    }
    return lp;
}

std::vector<double> PriorSpec::sample(Rng& rng) const {
    std::vector<double> x(comp.size());
    for (std::size_t k = 0; k < comp.size(); ++k) x[k] = comp[k].sample(rng);
    return x;
}

double log_prior(std::span<const double> theta, const PriorSpec& priors) {
    return priors.log_density(theta);
}

double log_prior(const ModelParams& p, const PriorSpec& priors) {
    const auto th = to_theta(p);
    return priors.log_density(std::span<const double>(th.data(), th.size()));
}

}  // namespace saw
