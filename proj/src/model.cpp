#include "saw/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "saw/kernels.hpp"

namespace saw {

namespace {

struct WindowBounds {
    int i0, i1, j0, j1;  // inclusive
    int ni() const { return i1 - i0 + 1; }
    int nj() const { return j1 - j0 + 1; }
};

WindowBounds window_bounds(LatticePoint cur, std::optional<int> window, int L) {
    if (!window) return {0, L - 1, 0, L - 1};
    const int W = *window;
    return {std::max(0, cur.i - W), std::min(L - 1, cur.i + W),
            std::max(0, cur.j - W), std::min(L - 1, cur.j + W)};
}

// Unnormalized selection mass over the window; optionally materializes the
// per-node weights (row-major over the window) for sampling. The eta == 1
// case runs through the dispatched kernels; other eta values use a scalar
// path with pow().
double masses_over_window(const Grid& a, const Grid& u, bool use_potential,
                          const StepKernel& kernel, LatticePoint cur, const WindowBounds& b,
                          double eta, double q_clamp, std::vector<double>& jbuf, double* w) {
    const int nj = b.nj();
    jbuf.resize(nj);
    for (int jj = 0; jj < nj; ++jj) jbuf[jj] = kernel.fj(b.j0 + jj - cur.j);

    double total = 0.0;
    if (eta == 1.0) {
        const auto& ops = kernels::active();
        for (int i = b.i0; i <= b.i1; ++i) {
            const double* arow = a.row(i) + b.j0;
            const double* urow = u.row(i) + b.j0;
            const double fi = kernel.fi(i - cur.i);
            double rowsum;
            if (w) {
                double* wrow = w + std::size_t(i - b.i0) * nj;
                rowsum = use_potential
                             ? ops.mass_row(jbuf.data(), arow, urow, nj, q_clamp, wrow)
                             : ops.mass_row_np(jbuf.data(), arow, nj, q_clamp, wrow);
                ops.scale(wrow, nj, fi);
            } else {
                rowsum = use_potential
                             ? ops.mass_sum(jbuf.data(), arow, urow, nj, q_clamp)
                             : ops.mass_sum_np(jbuf.data(), arow, nj, q_clamp);
            }
            total += fi * rowsum;
        }
    } else {
        for (int i = b.i0; i <= b.i1; ++i) {
            const double* arow = a.row(i) + b.j0;
            const double* urow = u.row(i) + b.j0;
            const double fi = kernel.fi(i - cur.i);
            double rowsum = 0.0;
            for (int jj = 0; jj < nj; ++jj) {
                double q = use_potential ? arow[jj] + urow[jj] : arow[jj];
                q = std::max(q, q_clamp);
                const double v = jbuf[jj] * std::pow(q, -eta);
                if (w) w[std::size_t(i - b.i0) * nj + jj] = fi * v;
                rowsum += v;
            }
            total += fi * rowsum;
        }
    }
    return total;
}

// Cumulative-sum inversion over materialized weights.
std::size_t sample_from_weights(const double* w, std::size_t n, double total, Rng& rng) {
    const double target = rng.uniform() * total;
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t idx = 0; idx < n; ++idx) {
        if (w[idx] > 0.0) {
            cum += w[idx];
            last_positive = idx;
            if (cum > target) return idx;
        }
    }
    return last_positive;  // rounding drift in the cumulative sum
}

// Exact membership test: sqrt(A) + sqrt(B) <= sqrt(C) for non-negative A, B
// (squared distances to the foci) and C = rho^2 + squared focal distance.
inline bool ellipse_contains(double A, double B, double C) {
    const double t = C - A - B;
    return t >= 0.0 && 4.0 * A * B <= t * t;
}

}  // namespace

double ModelParams::epsilon() const { return 1.0 - std::pow(10.0, gamma); }

void ModelParams::check() const {
    if (L < 2) throw ConfigError("lattice side L must be at least 2");
    if (!(r_i > 0.0) || !(r_j > 0.0)) throw ConfigError("stepping widths r_i, r_j must be positive");
    if (!(phi > 0.0)) throw ConfigError("stepping slope phi must be positive");
    if (!(rho > 0.0)) throw ConfigError("ellipse axis rho must be positive");
    if (!(nu >= 0.0)) throw ConfigError("potential exponent nu must be non-negative");
    if (!(eta >= 0.0)) throw ConfigError("activation exponent eta must be non-negative");
    if (gamma > 0.0) throw ConfigError("gamma must be <= 0 so the decay factor lies in [0, 1)");
    if (!(lambda >= 0.0)) throw ConfigError("potential slope lambda must be non-negative");
}

std::array<double, 5> to_theta(const ModelParams& p) {
    return {p.gamma, p.r_i, p.r_j, p.phi, p.lambda};
}

ModelParams with_theta(ModelParams base, std::span<const double> theta) {
    base.gamma = theta[0];
    base.r_i = theta[1];
    base.r_j = theta[2];
    base.phi = theta[3];
    base.lambda = theta[4];
    return base;
}

const char* ModelVariant::name() const {
    switch (kind) {
        case VariantKind::saw: return "saw";
        case VariantKind::w: return "w";
        case VariantKind::w_np: return "w-np";
        case VariantKind::saw_np: return "saw-np";
    }
    return "saw";
}

ModelVariant ModelVariant::parse(const std::string& s) {
    std::string t;
    for (char c : s) t += (c == '_') ? '-' : char(std::tolower(static_cast<unsigned char>(c)));
    if (t == "saw") return {VariantKind::saw};
    if (t == "w") return {VariantKind::w};
    if (t == "w-np") return {VariantKind::w_np};
    if (t == "saw-np") return {VariantKind::saw_np};
    throw ConfigError("unknown model variant: " + s);
}

std::vector<Vec2> to_points(const LatticeTrajectory& t) {
    std::vector<Vec2> out;
    out.reserve(t.pos.size());
    for (const auto& p : t.pos) out.push_back({double(p.i), double(p.j)});
    return out;
}

double potential_value(double i, double j, const ModelParams& p) {
    const double c = p.L / 2.0;
    const double d = std::hypot(i - c, j - c);
    if (d == 0.0) return 0.0;
    return p.lambda * std::pow(d, p.nu) / std::pow(double(p.L), p.nu);
}

Grid build_potential(const ModelParams& p) {
    Grid u(p.L);
    for (int i = 0; i < p.L; ++i)
        for (int j = 0; j < p.L; ++j) u.at(i, j) = potential_value(i, j, p);
    return u;
}

std::vector<LatticePoint> ellipse_sites(LatticePoint a, LatticePoint b, double rho, int L) {
    const double di = b.i - a.i, dj = b.j - a.j;
    const double C = rho * rho + (di * di + dj * dj);
    const double half_major = std::sqrt(C) / 2.0;
    const double mi = (a.i + b.i) / 2.0, mj = (a.j + b.j) / 2.0;
    const int ilo = std::max(0, int(std::floor(mi - half_major)));
    const int ihi = std::min(L - 1, int(std::ceil(mi + half_major)));
    const int jlo = std::max(0, int(std::floor(mj - half_major)));
    const int jhi = std::min(L - 1, int(std::ceil(mj + half_major)));

    std::vector<LatticePoint> out;
    for (int i = ilo; i <= ihi; ++i) {
        for (int j = jlo; j <= jhi; ++j) {
            const double A = double(i - a.i) * (i - a.i) + double(j - a.j) * (j - a.j);
            const double B = double(i - b.i) * (i - b.i) + double(j - b.j) * (j - b.j);
            if (ellipse_contains(A, B, C)) out.push_back({i, j});
        }
    }
    return out;
}

ActivationField::ActivationField(const ModelParams& p, ModelVariant v)
    : a(p.L, 0.1), u(v.has_potential() ? build_potential(p) : Grid(p.L, 0.0)) {}

void decay_activation(ActivationField& f, const ModelParams& p) {
    kernels::active().scale(f.a.data(), f.a.count(), p.epsilon());
    ++f.t;
}

void add_trace_activation(ActivationField& f, LatticePoint p_prev, LatticePoint p_cur,
                          const ModelParams& p, ModelVariant v) {
    if (v.frozen_activation()) return;
    for (const auto& s : ellipse_sites(p_prev, p_cur, p.rho, p.L)) f.a.at(s.i, s.j) += 1.0;
}

StepKernel::StepKernel(const ModelParams& p) {
    fi_.resize(p.L);
    fj_.resize(p.L);
    lfi_.resize(p.L);
    lfj_.resize(p.L);
    for (int d = 0; d < p.L; ++d) {
        lfi_[d] = -std::pow(d / p.r_i, p.phi);
        lfj_[d] = -std::pow(d / p.r_j, p.phi);
        fi_[d] = std::exp(lfi_[d]);
        fj_[d] = std::exp(lfj_[d]);
    }
}

double SelectionMap::at(LatticePoint s) const {
    if (!contains(s)) return 0.0;
    return p[std::size_t(s.i - i0) * nj + (s.j - j0)];
}

bool SelectionMap::contains(LatticePoint s) const {
    return s.i >= i0 && s.i < i0 + ni && s.j >= j0 && s.j < j0 + nj;
}

double SelectionMap::sum() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
}

double SelectionMap::expected_abs_di(LatticePoint center) const {
    double e = 0.0;
    for (int i = 0; i < ni; ++i)
        for (int j = 0; j < nj; ++j) e += p[std::size_t(i) * nj + j] * std::abs(i0 + i - center.i);
    return e;
}

double SelectionMap::expected_abs_dj(LatticePoint center) const {
    double e = 0.0;
    for (int i = 0; i < ni; ++i)
        for (int j = 0; j < nj; ++j) e += p[std::size_t(i) * nj + j] * std::abs(j0 + j - center.j);
    return e;
}

SelectionMap selection_map(const ActivationField& f, LatticePoint cur, const ModelParams& p,
                           ModelVariant v, const ModelOptions& opts) {
    p.check();
    const auto b = window_bounds(cur, opts.window, p.L);
    StepKernel kernel(p);
    std::vector<double> jbuf;
    SelectionMap m;
    m.i0 = b.i0;
    m.j0 = b.j0;
    m.ni = b.ni();
    m.nj = b.nj();
    m.p.resize(std::size_t(m.ni) * m.nj);
    const double total = masses_over_window(f.a, f.u, v.has_potential(), kernel, cur, b,
                                            p.eta, opts.q_clamp, jbuf, m.p.data());
    if (!(total >= opts.underflow_floor))
        throw NumericalUnderflow("selection mass underflow: total weight " +
                                 std::to_string(total));
    for (double& w : m.p) w /= total;
    return m;
}

LatticePoint step(const ActivationField& f, LatticePoint cur, const ModelParams& p,
                  ModelVariant v, Rng& rng, const ModelOptions& opts) {
    p.check();
    const auto b = window_bounds(cur, opts.window, p.L);
    StepKernel kernel(p);
    std::vector<double> jbuf, w(std::size_t(b.ni()) * b.nj());
    const double total = masses_over_window(f.a, f.u, v.has_potential(), kernel, cur, b,
                                            p.eta, opts.q_clamp, jbuf, w.data());
    if (!(total >= opts.underflow_floor))
        throw NumericalUnderflow("selection mass underflow in step()");
    const std::size_t idx = sample_from_weights(w.data(), w.size(), total, rng);
    return {b.i0 + int(idx / b.nj()), b.j0 + int(idx % b.nj())};
}

double truncation_mass(const ActivationField& f, LatticePoint cur, const ModelParams& p,
                       ModelVariant v, std::optional<int> window) {
    ModelOptions full;
    full.window.reset();
    const SelectionMap m = selection_map(f, cur, p, v, full);
    if (!window) return 0.0;
    const int W = *window;
    double outside = 0.0;
    for (int i = 0; i < m.ni; ++i)
        for (int j = 0; j < m.nj; ++j)
            if (std::abs(m.i0 + i - cur.i) > W || std::abs(m.j0 + j - cur.j) > W)
                outside += m.p[std::size_t(i) * m.nj + j];
    return outside;
}

SequentialEvaluator::SequentialEvaluator(const ModelParams& p, ModelVariant v,
                                         const ModelOptions& opts)
    : params_(p), variant_(v), opts_(opts), kernel_(p), field_(p, v) {
    p.check();
    eps_ = p.epsilon();
    if (variant_.frozen_activation())
        frozen_mass_.assign(field_.a.count(), std::numeric_limits<double>::quiet_NaN());
}

void SequentialEvaluator::reset(LatticePoint start) {
    field_.a = Grid(params_.L, 0.1);
    field_.t = 0;
    pos_ = start;
}

double SequentialEvaluator::window_mass(double* weights) {
    if (!weights && variant_.frozen_activation()) {
        double& memo = frozen_mass_[std::size_t(pos_.i) * params_.L + pos_.j];
        if (std::isnan(memo)) {
            const auto b = window_bounds(pos_, opts_.window, params_.L);
            memo = masses_over_window(field_.a, field_.u, variant_.has_potential(), kernel_,
                                      pos_, b, params_.eta, opts_.q_clamp, jbuf_, nullptr);
        }
        return memo;
    }
    const auto b = window_bounds(pos_, opts_.window, params_.L);
    return masses_over_window(field_.a, field_.u, variant_.has_potential(), kernel_, pos_, b,
                              params_.eta, opts_.q_clamp, jbuf_, weights);
}

const std::vector<LatticePoint>& SequentialEvaluator::ellipse_offsets(int di, int dj) {
    const std::uint64_t key =
        (std::uint64_t(std::uint32_t(di)) << 32) | std::uint64_t(std::uint32_t(dj));
    auto it = ellipse_memo_.find(key);
    if (it != ellipse_memo_.end()) return it->second;

    const double C = params_.rho * params_.rho + (double(di) * di + double(dj) * dj);
    const double half_major = std::sqrt(C) / 2.0;
    const double mi = di / 2.0, mj = dj / 2.0;
    std::vector<LatticePoint> offs;
    for (int i = int(std::floor(mi - half_major)); i <= int(std::ceil(mi + half_major)); ++i) {
        for (int j = int(std::floor(mj - half_major)); j <= int(std::ceil(mj + half_major)); ++j) {
            const double A = double(i) * i + double(j) * j;
            const double B = double(i - di) * (i - di) + double(j - dj) * (j - dj);
            if (ellipse_contains(A, B, C)) offs.push_back({i, j});
        }
    }
    return ellipse_memo_.emplace(key, std::move(offs)).first->second;
}

void SequentialEvaluator::add_trace(LatticePoint p_prev, LatticePoint p_cur) {
    const int L = params_.L;
    for (const auto& o : ellipse_offsets(p_cur.i - p_prev.i, p_cur.j - p_prev.j)) {
        const int i = p_prev.i + o.i, j = p_prev.j + o.j;
        if (i >= 0 && i < L && j >= 0 && j < L) field_.a.at(i, j) += 1.0;
    }
}

SequentialEvaluator::Step SequentialEvaluator::advance(LatticePoint next) {
    const int L = params_.L;
    if (next.i < 0 || next.i >= L || next.j < 0 || next.j >= L)
        throw Error("trajectory position off the lattice");
    ++field_.t;
    if (!variant_.frozen_activation())
        kernels::active().scale(field_.a.data(), field_.a.count(), eps_);

    const int di = next.i - pos_.i, dj = next.j - pos_.j;
    if (opts_.window && (std::abs(di) > *opts_.window || std::abs(dj) > *opts_.window))
        throw StepOutOfWindow(field_.t, "observed displacement (" + std::to_string(di) + "," +
                                            std::to_string(dj) + ") exceeds window at step " +
                                            std::to_string(field_.t));

    const double total = window_mass(nullptr);
    if (!(total >= opts_.underflow_floor))
        throw NumericalUnderflow("selection mass underflow at step " + std::to_string(field_.t));

    double q = field_.a.at(next.i, next.j);
    if (variant_.has_potential()) q += field_.u.at(next.i, next.j);
    q = std::max(q, opts_.q_clamp);
    const double log_pi = kernel_.log_at(di, dj) - params_.eta * std::log(q) - std::log(total);

    if (!variant_.frozen_activation()) add_trace(pos_, next);
    pos_ = next;
    return {log_pi, q};
}

LatticePoint SequentialEvaluator::simulate_step(Rng& rng) {
    ++field_.t;
    if (!variant_.frozen_activation())
        kernels::active().scale(field_.a.data(), field_.a.count(), eps_);

    const auto b = window_bounds(pos_, opts_.window, params_.L);
    wbuf_.resize(std::size_t(b.ni()) * b.nj());
    const double total = window_mass(wbuf_.data());
    if (!(total >= opts_.underflow_floor))
        throw NumericalUnderflow("selection mass underflow at step " + std::to_string(field_.t));

    const std::size_t idx = sample_from_weights(wbuf_.data(), wbuf_.size(), total, rng);
    const LatticePoint next{b.i0 + int(idx / b.nj()), b.j0 + int(idx % b.nj())};
    if (!variant_.frozen_activation()) add_trace(pos_, next);
    pos_ = next;
    return next;
}

SimResult simulate(const ModelParams& p, ModelVariant v, long n_steps, Rng& rng,
                   const SimulateOptions& opts) {
    p.check();
    if (!v.generative() && !opts.allow_nongenerative)
        throw NonGenerativeVariant(std::string(v.name()) +
                                   " has no confining potential and cannot be usefully "
                                   "simulated; pass allow_nongenerative for diagnostics");

    const LatticePoint start = opts.start.value_or(LatticePoint{p.L / 2, p.L / 2});
    SequentialEvaluator ev(p, v, opts.model);
    ev.reset(start);
    for (long s = 0; s < opts.warmup; ++s) ev.simulate_step(rng);

    SimResult out;
    out.traj.dt = 0.002;
    out.traj.diagnostic_only = !v.generative();
    out.traj.pos.reserve(std::size_t(n_steps) + 1);
    out.traj.pos.push_back(ev.position());
    for (long s = 0; s < n_steps; ++s) out.traj.pos.push_back(ev.simulate_step(rng));
    out.final_activation = ev.field().a;
    return out;
}

LogLikelihood log_likelihood(const LatticeTrajectory& traj, const ModelParams& p,
                             ModelVariant v, const LikelihoodOptions& opts) {
    p.check();
    LogLikelihood out;
    if (traj.pos.size() < 2) return out;

    SequentialEvaluator ev(p, v, opts.model);
    ev.reset(traj.pos.front());
    if (opts.per_step) out.per_step.reserve(traj.pos.size() - 1);
    for (std::size_t t = 1; t < traj.pos.size(); ++t) {
        const double lp = ev.advance(traj.pos[t]).log_pi;
        out.total += lp;
        if (opts.per_step) out.per_step.push_back(lp);
    }
    return out;
}

std::vector<double> activation_series(const LatticeTrajectory& traj, const ModelParams& p,
                                      ModelVariant v, const ModelOptions& opts) {
    p.check();
    std::vector<double> out;
    if (traj.pos.empty()) return out;
    out.reserve(traj.pos.size());

    SequentialEvaluator ev(p, v, opts);
    ev.reset(traj.pos.front());
    const auto& f = ev.field();
    double q0 = f.a.at(traj.pos[0].i, traj.pos[0].j);
    if (v.has_potential()) q0 += f.u.at(traj.pos[0].i, traj.pos[0].j);
    out.push_back(q0);
    for (std::size_t t = 1; t < traj.pos.size(); ++t) out.push_back(ev.advance(traj.pos[t]).q_sel);
    return out;
}

}  // namespace saw
