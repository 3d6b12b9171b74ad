#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "saw/errors.hpp"
#include "saw/geometry.hpp"
#include "saw/rng.hpp"

namespace saw {

// Parameters of the lattice drift model. The first five are the free
// parameters estimated from data; rho, nu and eta are fixed constants and L
// is the lattice side length.
struct ModelParams {
    double gamma = -2.5;   // relaxation speed exponent; decay factor eps = 1 - 10^gamma
    double r_i = 5.0;      // stepping half-width, i axis (lattice units)
    double r_j = 5.0;      // stepping half-width, j axis
    double phi = 1.5;      // stepping slope exponent
    double lambda = 2.0;   // potential slope
    double rho = 12.0;     // ellipse minor-axis length (lattice units)
    double nu = 3.0;       // potential shape exponent
    double eta = 1.0;      // activation weighting exponent
    int L = 100;           // lattice side (nodes)

    double epsilon() const;          // 1 - 10^gamma, in [0, 1) for gamma <= 0
    void check() const;              // throws ConfigError when unusable
};

inline constexpr std::array<const char*, 5> kParamNames{"gamma", "r_i", "r_j", "phi", "lambda"};

std::array<double, 5> to_theta(const ModelParams& p);
ModelParams with_theta(ModelParams base, std::span<const double> theta);

enum class VariantKind { saw, w, w_np, saw_np };

// Model variants of the ablation study: the full model (saw), a walk in a
// potential with frozen activation (w), and the two non-generative variants
// without the potential (saw_np keeps the self-activation trace, w_np is a
// bare stepping-distribution walk).
struct ModelVariant {
    VariantKind kind = VariantKind::saw;

    bool generative() const { return kind == VariantKind::saw || kind == VariantKind::w; }
    bool has_potential() const { return kind == VariantKind::saw || kind == VariantKind::w; }
    bool frozen_activation() const { return kind == VariantKind::w || kind == VariantKind::w_np; }

    const char* name() const;
    static ModelVariant parse(const std::string& s);  // "saw" | "w" | "w-np" | "saw-np"
};

struct LatticeTrajectory {
    std::vector<LatticePoint> pos;
    double dt = 0.002;              // 500 Hz sampling
    std::string subject_id;
    int trial_id = 0;
    bool diagnostic_only = false;   // simulated from a non-generative variant
};

std::vector<Vec2> to_points(const LatticeTrajectory& t);

// Confining potential u(i, j) = lambda * dist((i,j), center)^nu / L^nu.
double potential_value(double i, double j, const ModelParams& p);
Grid build_potential(const ModelParams& p);

// All lattice nodes inside the ellipse with foci a and b and minor-axis
// length rho, clipped to [0, L)^2. Membership is decided in exact integer
// arithmetic so boundary nodes do not depend on rounding.
std::vector<LatticePoint> ellipse_sites(LatticePoint a, LatticePoint b, double rho, int L);

// Activation state: the decaying memory trace plus the static potential.
struct ActivationField {
    Grid a;        // activation, initialized to 0.1 everywhere
    Grid u;        // potential (all zero for the no-potential variants)
    long t = 0;    // time index in samples

    ActivationField(const ModelParams& p, ModelVariant v);
};

// Eq.-level operations, exposed individually for testing; the sequential
// evaluator below composes them.
void decay_activation(ActivationField& f, const ModelParams& p);
void add_trace_activation(ActivationField& f, LatticePoint p_prev, LatticePoint p_cur,
                          const ModelParams& p, ModelVariant v);

struct ModelOptions {
    // Half-width of the square candidate window around the current position.
    // Unset means the candidate set is the whole lattice, which is the
    // default: any truncating window loses non-negligible stepping mass for
    // heavy-tailed parameter corners.
    std::optional<int> window;
    double underflow_floor = 1e-280;  // selection mass below this raises NumericalUnderflow
    double q_clamp = 1e-300;          // q clamped here before exponentiation
};

// Separable stepping weights f(d) = exp(-(|d|/r)^phi), tabulated per axis.
class StepKernel {
public:
    StepKernel() = default;
    explicit StepKernel(const ModelParams& p);

    double fi(int d) const { return fi_[d < 0 ? -d : d]; }
    double fj(int d) const { return fj_[d < 0 ? -d : d]; }
    // exact log of the stepping weight, computed without underflow
    double log_at(int di, int dj) const {
        return lfi_[di < 0 ? -di : di] + lfj_[dj < 0 ? -dj : dj];
    }

private:
    std::vector<double> fi_, fj_, lfi_, lfj_;
};

// Normalized step-selection probabilities over the (clipped) candidate
// window centered on the current position.
struct SelectionMap {
    int i0 = 0, j0 = 0;   // window origin on the lattice
    int ni = 0, nj = 0;   // window extent
    std::vector<double> p;  // row-major ni x nj, sums to 1

    double at(LatticePoint s) const;
    bool contains(LatticePoint s) const;
    double sum() const;
    double expected_abs_di(LatticePoint center) const;
    double expected_abs_dj(LatticePoint center) const;
};

SelectionMap selection_map(const ActivationField& f, LatticePoint cur, const ModelParams& p,
                           ModelVariant v, const ModelOptions& opts = {});

// One roulette-wheel draw from the selection map (cumulative-sum inversion
// of a single uniform variate).
LatticePoint step(const ActivationField& f, LatticePoint cur, const ModelParams& p,
                  ModelVariant v, Rng& rng, const ModelOptions& opts = {});

// Probability mass of the full-lattice selection map that falls outside the
// given window; diagnostic for validating windowed configurations.
double truncation_mass(const ActivationField& f, LatticePoint cur, const ModelParams& p,
                       ModelVariant v, std::optional<int> window);

// Drives the per-step sequence (relaxation, selection, trace activation)
// either conditioned on observed positions or generatively. Owns its
// activation field; instances are independent and may run on parallel
// threads.
class SequentialEvaluator {
public:
    SequentialEvaluator(const ModelParams& p, ModelVariant v, const ModelOptions& opts = {});

    void reset(LatticePoint start);

    struct Step {
        double log_pi;  // log probability of the observed transition
        double q_sel;   // q at the accepted node, in the state used for selection
    };
    // Condition on the observed next position: decay, score, add trace.
    Step advance(LatticePoint next);

    // Generative counterpart: decay, sample the next position, add trace.
    LatticePoint simulate_step(Rng& rng);

    LatticePoint position() const { return pos_; }
    const ActivationField& field() const { return field_; }
    long time() const { return field_.t; }

private:
    double window_mass(double* weights);  // total over the window at pos_; optional row store
    void add_trace(LatticePoint p_prev, LatticePoint p_cur);
    const std::vector<LatticePoint>& ellipse_offsets(int di, int dj);

    ModelParams params_;
    ModelVariant variant_;
    ModelOptions opts_;
    double eps_ = 0.0;
    StepKernel kernel_;
    ActivationField field_;
    LatticePoint pos_{};
    std::vector<double> jbuf_, wbuf_;
    std::vector<double> frozen_mass_;  // per-position memo for frozen-activation variants
    std::unordered_map<std::uint64_t, std::vector<LatticePoint>> ellipse_memo_;
};

struct SimulateOptions {
    long warmup = 0;                      // steps run and discarded before recording
    bool allow_nongenerative = false;     // required to simulate w-np / saw-np
    std::optional<LatticePoint> start;    // default: lattice center
    ModelOptions model;
};

struct SimResult {
    LatticeTrajectory traj;
    Grid final_activation;
};

// Forward simulation of n_steps transitions; the trajectory contains
// n_steps + 1 positions (the post-warmup start plus one per step).
SimResult simulate(const ModelParams& p, ModelVariant v, long n_steps, Rng& rng,
                   const SimulateOptions& opts = {});

struct LikelihoodOptions {
    ModelOptions model;
    bool per_step = false;
};

struct LogLikelihood {
    double total = 0.0;
    std::vector<double> per_step;  // filled when requested
};

// Sequential log likelihood of an observed trajectory: the sum over
// transitions of the log selection probability of the observed next
// position, with the activation field evolved along the observed path.
LogLikelihood log_likelihood(const LatticeTrajectory& traj, const ModelParams& p,
                             ModelVariant v, const LikelihoodOptions& opts = {});

// Latent activation q_t at the occupied node for every sample of a trial,
// recorded in the state used for selecting that sample (after relaxation,
// before the trace update).
std::vector<double> activation_series(const LatticeTrajectory& traj, const ModelParams& p,
                                      ModelVariant v, const ModelOptions& opts = {});

}  // namespace saw
