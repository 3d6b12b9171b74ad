#include "saw/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "saw/parallel.hpp"

namespace saw {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void write_hex(std::ostream& os, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", x);
    os << buf;
}

double read_hex(std::istream& is) {
    std::string tok;
    is >> tok;
    return std::strtod(tok.c_str(), nullptr);
}

struct Proposal {
    std::vector<double> theta;
    double log_jacobian = 0.0;
};

// Parallel-direction update: per-dimension crossover mask, difference of two
// archive rows scaled by 2.38/sqrt(2 d_eff), multiplicative jitter and small
// Gaussian noise.
Proposal propose_parallel(const std::vector<double>& x,
                          const std::vector<std::vector<double>>& archive,
                          const DreamConfig& cfg, Rng& rng) {
    const std::size_t d = x.size();
    const std::size_t m = archive.size();
    std::size_t r1 = rng.bounded(m), r2;
    do { r2 = rng.bounded(m); } while (r2 == r1);

    std::vector<bool> mask(d, false);
    std::size_t d_eff = 0;
    for (std::size_t k = 0; k < d; ++k) {
        mask[k] = rng.uniform() < cfg.crossover;
        d_eff += mask[k] ? 1 : 0;
    }
    if (d_eff == 0) {
        mask[rng.bounded(d)] = true;
        d_eff = 1;
    }
    const double gamma_de = 2.38 / std::sqrt(2.0 * double(d_eff));

    Proposal p;
    p.theta = x;
    for (std::size_t k = 0; k < d; ++k) {
        if (!mask[k]) continue;
        const double e = rng.uniform(-cfg.jitter, cfg.jitter);
        const double zeta = cfg.noise_sd * rng.normal();
        p.theta[k] += (1.0 + e) * gamma_de * (archive[r1][k] - archive[r2][k]) + zeta;
    }
    return p;
}

// Snooker update along the line through x and an archive point z, with the
// |x' - z|^(d-1) / |x - z|^(d-1) Jacobian correction.
Proposal propose_snooker(const std::vector<double>& x,
                         const std::vector<std::vector<double>>& archive,
                         const DreamConfig& cfg, Rng& rng) {
    const std::size_t d = x.size();
    const std::size_t m = archive.size();
    std::size_t s = rng.bounded(m), r1, r2;
    do { r1 = rng.bounded(m); } while (r1 == s);
    do { r2 = rng.bounded(m); } while (r2 == s || r2 == r1);

    const auto& z = archive[s];
    double ee = 0.0;
    for (std::size_t k = 0; k < d; ++k) ee += (x[k] - z[k]) * (x[k] - z[k]);
    if (ee == 0.0) return propose_parallel(x, archive, cfg, rng);

    double proj = 0.0;
    for (std::size_t k = 0; k < d; ++k) proj += (archive[r1][k] - archive[r2][k]) * (x[k] - z[k]);
    proj /= ee;
    const double gs = rng.uniform(1.2, 2.2);

    Proposal p;
    p.theta = x;
    double ee2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        p.theta[k] += gs * proj * (x[k] - z[k]);
        ee2 += (p.theta[k] - z[k]) * (p.theta[k] - z[k]);
    }
    p.log_jacobian = ee2 == 0.0 ? kNegInf : 0.5 * double(d - 1) * (std::log(ee2) - std::log(ee));
    return p;
}

void reset_outlier_chains(ChainSet& cs) {
    // IQR rule on mean log posterior over the second half of each chain's
    // history so far; outliers jump to the best chain's state.
    const int n = cs.config.n_chains;
    if (cs.iteration < 20) return;
    std::vector<double> omega(n, 0.0);
    std::vector<long> count(n, 0);
    for (const auto& row : cs.history) {
        if (row.iteration > cs.iteration / 2) {
            omega[row.chain] += row.log_post;
            ++count[row.chain];
        }
    }
    for (int c = 0; c < n; ++c) omega[c] = count[c] ? omega[c] / double(count[c]) : kNegInf;
    std::vector<double> sorted = omega;
    std::sort(sorted.begin(), sorted.end());
    const double q1 = quantile(sorted, 0.25), q3 = quantile(sorted, 0.75);
    const double lo = q1 - 2.0 * (q3 - q1);
    const int best = int(std::max_element(cs.current_logpost.begin(), cs.current_logpost.end()) -
                         cs.current_logpost.begin());
    for (int c = 0; c < n; ++c) {
        if (omega[c] < lo) {
            cs.current[c] = cs.current[best];
            cs.current_logpost[c] = cs.current_logpost[best];
        }
    }
}

}  // namespace

void DreamConfig::check(std::size_t dim) const {
    if (n_chains < 3) throw ConfigError("sampler: n_chains must be >= 3");
    if (n_iterations < 1) throw ConfigError("sampler: n_iterations must be >= 1");
    if (archive_init < int(10 * dim))
        throw ConfigError("sampler: archive_init must be >= 10 * dim");
    if (archive_period < 1) throw ConfigError("sampler: archive_period must be >= 1");
    if (snooker_prob < 0.0 || snooker_prob > 1.0)
        throw ConfigError("sampler: snooker_prob must lie in [0, 1]");
    if (crossover <= 0.0 || crossover > 1.0)
        throw ConfigError("sampler: crossover must lie in (0, 1]");
    if (jitter < 0.0 || jitter >= 1.0) throw ConfigError("sampler: jitter must lie in [0, 1)");
    if (noise_sd < 0.0) throw ConfigError("sampler: noise_sd must be >= 0");
    if (burn_in_fraction < 0.0 || burn_in_fraction >= 1.0)
        throw ConfigError("sampler: burn_in_fraction must lie in [0, 1)");
    if (threads < 1) throw ConfigError("sampler: threads must be >= 1");
}

long ChainSet::burn_in() const {
    return long(double(config.n_iterations) * config.burn_in_fraction);
}

std::vector<std::vector<double>> ChainSet::chain_series(std::size_t param) const {
    std::vector<std::vector<double>> out(config.n_chains);
    const long cut = burn_in();
    for (const auto& row : history)
        if (row.iteration > cut) out[row.chain].push_back(row.theta[param]);
    return out;
}

std::vector<double> ChainSet::pooled(std::size_t param) const {
    std::vector<double> out;
    const long cut = burn_in();
    for (const auto& row : history)
        if (row.iteration > cut) out.push_back(row.theta[param]);
    return out;
}

void ChainSet::save_state(std::ostream& os) const {
    os << "saw_chains v1\n";
    os << "dim " << dim << "\n";
    os << "iteration " << iteration << "\n";
    os << "config " << config.n_chains << ' ' << config.n_iterations << ' '
       << config.archive_init << ' ' << config.archive_period << ' ';
    write_hex(os, config.snooker_prob);
    os << ' ';
    write_hex(os, config.crossover);
    os << ' ';
    write_hex(os, config.jitter);
    os << ' ';
    write_hex(os, config.noise_sd);
    os << ' ';
    write_hex(os, config.burn_in_fraction);
    os << ' ' << (config.outlier_correction ? 1 : 0) << ' ' << config.seed << ' '
       << config.threads << "\n";
    for (int c = 0; c < config.n_chains; ++c) {
        os << "chain " << c << ' ';
        for (double v : current[c]) {
            write_hex(os, v);
            os << ' ';
        }
        write_hex(os, current_logpost[c]);
        os << ' ' << accepted[c] << ' ';
        chain_rngs[c].save(os);
        os << "\n";
    }
    os << "archive " << archive.size() << "\n";
    for (const auto& row : archive) {
        for (double v : row) {
            write_hex(os, v);
            os << ' ';
        }
        os << "\n";
    }
}

ChainSet ChainSet::restore_state(std::istream& is) {
    ChainSet cs;
    std::string tag, ver;
    is >> tag >> ver;
    if (tag != "saw_chains" || ver != "v1") throw ParseError("not a chain state file");
    is >> tag >> cs.dim;
    is >> tag >> cs.iteration;
    int outlier;
    is >> tag >> cs.config.n_chains >> cs.config.n_iterations >> cs.config.archive_init >>
        cs.config.archive_period;
    cs.config.snooker_prob = read_hex(is);
    cs.config.crossover = read_hex(is);
    cs.config.jitter = read_hex(is);
    cs.config.noise_sd = read_hex(is);
    cs.config.burn_in_fraction = read_hex(is);
    is >> outlier >> cs.config.seed >> cs.config.threads;
    cs.config.outlier_correction = outlier != 0;
    cs.current.resize(cs.config.n_chains, std::vector<double>(cs.dim));
    cs.current_logpost.resize(cs.config.n_chains);
    cs.accepted.resize(cs.config.n_chains);
    for (int c = 0; c < cs.config.n_chains; ++c) {
        int idx;
        is >> tag >> idx;
        for (std::size_t k = 0; k < cs.dim; ++k) cs.current[c][k] = read_hex(is);
        cs.current_logpost[c] = read_hex(is);
        is >> cs.accepted[c];
        cs.chain_rngs.push_back(Rng::restore(is));
    }
    std::size_t m;
    is >> tag >> m;
    cs.archive.resize(m, std::vector<double>(cs.dim));
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t k = 0; k < cs.dim; ++k) cs.archive[r][k] = read_hex(is);
    if (!is) throw ParseError("truncated chain state file");
    return cs;
}

ChainSet dream_init(const TargetFn& target, const PriorSpec& priors, const DreamConfig& cfg) {
    priors.check();
    const std::size_t d = priors.dim();
    cfg.check(d);

    ChainSet cs;
    cs.dim = d;
    cs.config = cfg;
    Rng master(cfg.seed);
    Rng init_rng = master.child(0xa9c417e);

    cs.archive.reserve(cfg.archive_init);
    for (int k = 0; k < cfg.archive_init; ++k) cs.archive.push_back(priors.sample(init_rng));

    cs.current.resize(cfg.n_chains);
    cs.current_logpost.resize(cfg.n_chains);
    cs.accepted.assign(cfg.n_chains, 0);
    for (int c = 0; c < cfg.n_chains; ++c) {
        cs.current[c] = priors.sample(init_rng);
        cs.chain_rngs.push_back(master.child(0xc4a1, std::uint64_t(c)));
    }
    std::vector<double> lp(cfg.n_chains);
    parallel_for(std::size_t(cfg.n_chains), cfg.threads,
                 [&](std::size_t c) { lp[c] = target(cs.current[c]); });
    cs.current_logpost = lp;
    return cs;
}

void dream_advance(ChainSet& cs, const TargetFn& target, const PriorSpec& priors,
                   long iterations) {
    const auto& cfg = cs.config;
    const int n = cfg.n_chains;
    std::vector<Proposal> props(n);
    std::vector<double> lp(n);

    for (long it = 0; it < iterations; ++it) {
        // proposals drawn chain by chain from per-chain streams
        for (int c = 0; c < n; ++c) {
            Rng& rng = cs.chain_rngs[c];
            if (rng.uniform() < cfg.snooker_prob)
                props[c] = propose_snooker(cs.current[c], cs.archive, cfg, rng);
            else
                props[c] = propose_parallel(cs.current[c], cs.archive, cfg, rng);
        }
        // target evaluations may run in parallel; out-of-support proposals
        // are rejected without an evaluation
        parallel_for(std::size_t(n), cfg.threads, [&](std::size_t c) {
            lp[c] = priors.in_support(props[c].theta) ? target(props[c].theta) : kNegInf;
        });
        // Metropolis acceptance, again from per-chain streams
        for (int c = 0; c < n; ++c) {
            const double log_alpha = lp[c] - cs.current_logpost[c] + props[c].log_jacobian;
            const double u = cs.chain_rngs[c].uniform();
            if (std::log(u) < log_alpha) {
                cs.current[c] = props[c].theta;
                cs.current_logpost[c] = lp[c];
                ++cs.accepted[c];
            }
        }
        ++cs.iteration;
        for (int c = 0; c < n; ++c)
            cs.history.push_back({c, cs.iteration, cs.current[c], cs.current_logpost[c]});
        if (cs.iteration % cfg.archive_period == 0)
            for (int c = 0; c < n; ++c) cs.archive.push_back(cs.current[c]);
        if (cfg.outlier_correction && cs.iteration < cs.burn_in() &&
            cs.iteration % std::max(1L, cs.burn_in() / 10) == 0)
            reset_outlier_chains(cs);
    }
}

ChainSet dream_zs(const TargetFn& target, const PriorSpec& priors, const DreamConfig& cfg) {
    ChainSet cs = dream_init(target, priors, cfg);
    dream_advance(cs, target, priors, cfg.n_iterations);
    return cs;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
    const std::size_t m = chains.size();
    if (m < 2) throw InsufficientSamples("gelman_rubin: need at least 2 chains");
    std::size_t n = std::numeric_limits<std::size_t>::max();
    for (const auto& c : chains) n = std::min(n, c.size());
    if (n < 10) throw InsufficientSamples("gelman_rubin: need at least 10 samples per chain");

    std::vector<double> mean(m, 0.0), var(m, 0.0);
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t t = 0; t < n; ++t) mean[c] += chains[c][t];
        mean[c] /= double(n);
        for (std::size_t t = 0; t < n; ++t) {
            const double d = chains[c][t] - mean[c];
            var[c] += d * d;
        }
        var[c] /= double(n - 1);
    }
    double grand = 0.0;
    for (double mu : mean) grand += mu;
    grand /= double(m);
    double B_over_n = 0.0;  // variance of chain means
    for (double mu : mean) B_over_n += (mu - grand) * (mu - grand);
    B_over_n /= double(m - 1);
    double W = 0.0;
    for (double v : var) W += v;
    W /= double(m);

    if (W == 0.0) return B_over_n == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    const double var_plus = (double(n - 1) / double(n)) * W + B_over_n;
    return std::sqrt(var_plus / W);
}

double gelman_rubin(const ChainSet& cs, std::size_t param) {
    return gelman_rubin(cs.chain_series(param));
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw InsufficientSamples("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double h = (double(values.size()) - 1.0) * p;
    const std::size_t lo = std::size_t(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - double(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

PosteriorSummary posterior_summary(const ChainSet& cs, const std::vector<std::string>& names) {
    PosteriorSummary out;
    for (std::size_t k = 0; k < cs.dim; ++k) {
        auto pool = cs.pooled(k);
        if (k == 0) {
            out.n_samples = long(pool.size());
            if (out.n_samples < 100)
                throw InsufficientSamples("posterior_summary: need >= 100 post-burn-in samples");
        }
        ParamSummary s;
        s.name = k < names.size() ? names[k] : "p" + std::to_string(k);
        s.median = quantile(pool, 0.5);
        s.ci_lo = quantile(pool, 0.01);
        s.ci_hi = quantile(pool, 0.99);
        s.rhat = gelman_rubin(cs, k);
        out.params.push_back(std::move(s));
    }
    return out;
}

SubjectPosterior::SubjectPosterior(PriorSpec priors, ModelParams base, ModelVariant variant,
                                   std::vector<LatticeTrajectory> trials,
                                   LikelihoodOptions opts, int threads)
    : priors_(std::move(priors)),
      base_(base),
      variant_(variant),
      trials_(std::move(trials)),
      opts_(opts),
      threads_(threads) {
    priors_.check();
    if (trials_.empty()) throw ConfigError("posterior: dataset has no trials");
}

double SubjectPosterior::operator()(std::span<const double> theta) const {
    const double lp = priors_.log_density(theta);
    if (lp == kNegInf || !include_likelihood) return lp;

    evals_.fetch_add(1, std::memory_order_relaxed);
    const ModelParams p = with_theta(base_, theta);
    std::vector<double> ll(trials_.size());
    parallel_for(trials_.size(), threads_,
                 [&](std::size_t t) { ll[t] = log_likelihood(trials_[t], p, variant_, opts_).total; });
    double sum = lp;
    for (double v : ll) sum += v;
    return sum;
}

RecoveryReport recover(const ModelParams& truth, const RecoverConfig& cfg) {
    truth.check();
    const auto th = to_theta(truth);
    if (!cfg.priors.in_support(std::span<const double>(th.data(), th.size())))
        throw ConfigError("recover: true parameters lie outside the prior support");

    Rng data_master(cfg.data_seed);
    std::vector<LatticeTrajectory> trials;
    for (int t = 0; t < cfg.n_trials; ++t) {
        Rng rng = data_master.child(0xda7a, std::uint64_t(t));
        SimulateOptions so;
        so.warmup = cfg.warmup;
        so.model = cfg.likelihood.model;
        auto sim = simulate(truth, {VariantKind::saw}, cfg.n_steps, rng, so);
        sim.traj.trial_id = t;
        trials.push_back(std::move(sim.traj));
    }

    SubjectPosterior post(cfg.priors, truth, {VariantKind::saw}, std::move(trials),
                          cfg.likelihood, cfg.likelihood_threads);
    TargetFn target = [&post](std::span<const double> x) { return post(x); };
    ChainSet chains = dream_zs(target, cfg.priors, cfg.sampler);
    PosteriorSummary summary = posterior_summary(chains, cfg.priors.names);

    RecoveryReport rep;
    rep.chains = std::move(chains);
    for (std::size_t k = 0; k < summary.params.size(); ++k) {
        ParamRecovery r;
        r.name = summary.params[k].name;
        r.truth = th[k];
        r.median = summary.params[k].median;
        r.ci_lo = summary.params[k].ci_lo;
        r.ci_hi = summary.params[k].ci_hi;
        r.rhat = summary.params[k].rhat;
        r.covered = r.truth >= r.ci_lo && r.truth <= r.ci_hi;
        rep.n_covered += r.covered ? 1 : 0;
        rep.params.push_back(std::move(r));
    }
    return rep;
}

}  // namespace saw
