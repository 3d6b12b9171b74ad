#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "saw/model.hpp"
#include "saw/priors.hpp"
#include "saw/rng.hpp"

namespace saw {

using TargetFn = std::function<double(std::span<const double>)>;

struct DreamConfig {
    int n_chains = 3;
    long n_iterations = 2000;
    int archive_init = 50;        // m0 prior draws; must be >= 10 * dim
    int archive_period = 10;      // append current states every K generations
    double snooker_prob = 0.1;
    double crossover = 0.9;       // per-dimension inclusion probability
    double jitter = 0.05;         // e ~ U(-jitter, jitter), applied per dimension
    double noise_sd = 1e-6;       // zeta ~ N(0, noise_sd)
    double burn_in_fraction = 0.5;
    bool outlier_correction = false;  // breaks detailed balance; off by default
    std::uint64_t seed = 0;
    int threads = 1;              // parallel target evaluations within a generation

    void check(std::size_t dim) const;  // throws ConfigError
};

struct SampleRow {
    int chain;
    long iteration;
    std::vector<double> theta;
    double log_post;
};

// Multi-chain sampler state: current points, the archive Z of past states,
// and the recorded history. Serializable so long runs can checkpoint and
// resume bit-exactly.
struct ChainSet {
    std::size_t dim = 0;
    DreamConfig config;
    long iteration = 0;
    std::vector<std::vector<double>> current;
    std::vector<double> current_logpost;
    std::vector<long> accepted;
    std::vector<std::vector<double>> archive;
    std::vector<Rng> chain_rngs;
    std::vector<SampleRow> history;

    long burn_in() const;  // iterations to discard, from config.burn_in_fraction
    // post-burn-in samples of one parameter, per chain / pooled
    std::vector<std::vector<double>> chain_series(std::size_t param) const;
    std::vector<double> pooled(std::size_t param) const;

    void save_state(std::ostream& os) const;  // excludes history
    static ChainSet restore_state(std::istream& is);
};

// DREAM(ZS): differential-evolution proposals from an archive of past
// states with occasional snooker updates, Metropolis-corrected against the
// target. The target is evaluated only inside the prior support box.
ChainSet dream_init(const TargetFn& target, const PriorSpec& priors, const DreamConfig& cfg);
void dream_advance(ChainSet& cs, const TargetFn& target, const PriorSpec& priors,
                   long iterations);
ChainSet dream_zs(const TargetFn& target, const PriorSpec& priors, const DreamConfig& cfg);

// Potential-scale-reduction factor over per-chain sample series.
double gelman_rubin(const std::vector<std::vector<double>>& chains);
double gelman_rubin(const ChainSet& cs, std::size_t param);

// Interpolating sample quantile (linear between order statistics).
double quantile(std::vector<double> values, double p);

struct ParamSummary {
    std::string name;
    double median = 0.0;
    double ci_lo = 0.0;   // 1% quantile
    double ci_hi = 0.0;   // 99% quantile
    double rhat = 0.0;
};

struct PosteriorSummary {
    std::vector<ParamSummary> params;
    long n_samples = 0;
};

PosteriorSummary posterior_summary(const ChainSet& cs, const std::vector<std::string>& names);

// Log posterior of one subject: truncated-Gaussian prior plus the sum of
// the per-trial sequential log likelihoods. Thread safe; instrumented with
// a likelihood-evaluation counter.
class SubjectPosterior {
public:
    SubjectPosterior(PriorSpec priors, ModelParams base, ModelVariant variant,
                     std::vector<LatticeTrajectory> trials, LikelihoodOptions opts = {},
                     int threads = 1);
    SubjectPosterior(const SubjectPosterior&) = delete;
    SubjectPosterior& operator=(const SubjectPosterior&) = delete;

    double operator()(std::span<const double> theta) const;
    long likelihood_evals() const { return evals_.load(); }

    // diagnostics switch: when false the target is the bare prior
    bool include_likelihood = true;

    const PriorSpec& priors() const { return priors_; }
    const std::vector<LatticeTrajectory>& trials() const { return trials_; }

private:
    PriorSpec priors_;
    ModelParams base_;
    ModelVariant variant_;
    std::vector<LatticeTrajectory> trials_;
    LikelihoodOptions opts_;
    int threads_;
    mutable std::atomic<long> evals_{0};
};

struct RecoverConfig {
    int n_trials = 18;
    long n_steps = 1500;
    long warmup = 0;
    std::uint64_t data_seed = 1;
    DreamConfig sampler;
    LikelihoodOptions likelihood;
    PriorSpec priors = PriorSpec::defaults();
    int likelihood_threads = 1;
};

struct ParamRecovery {
    std::string name;
    double truth = 0.0;
    double median = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double rhat = 0.0;
    bool covered = false;
};

struct RecoveryReport {
    std::vector<ParamRecovery> params;
    int n_covered = 0;
    ChainSet chains;
};

// Parameter-recovery harness: simulate a synthetic subject at the true
// parameters, fit it, and report truth-in-credible-interval per parameter.
RecoveryReport recover(const ModelParams& truth, const RecoverConfig& cfg);

}  // namespace saw
