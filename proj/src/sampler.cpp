#include "tvpqr/sampler.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "tvpqr/errors.hpp"

namespace tvpqr::sampler {

namespace {

constexpr double kScaleFloor = 1e-10;
constexpr int kAdaptWindow = 50;

double sample_sd(const VectorXd& y) {
    if (y.size() < 2) return 1.0;
    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
    return var > 0.0 ? std::sqrt(var) : 1.0;
}

VectorXd fitted(const MatrixXd& design, const MatrixXd& beta) { return (design.array() * beta.array()).rowwise().sum(); }

}  // namespace

std::string_view to_string(ScaleMode mode) { return mode == ScaleMode::TIS ? "tis" : "tvs"; }

ScaleMode parse_scale_mode(std::string_view tag) {
    if (tag == "tis" || tag == "TIS") return ScaleMode::TIS;
    if (tag == "tvs" || tag == "TVS") return ScaleMode::TVS;
    throw InputError("unknown scale mode '" + std::string(tag) + "' (expected tis or tvs)");
}

void McmcSettings::validate() const {
    if (burn_in < 0) throw DomainError("MCMC: burn-in must be non-negative");
    if (thin < 1) throw DomainError("MCMC: thinning must be at least 1");
    if (post_burn < thin) throw DomainError("MCMC: post-burn-in length must be at least the thinning interval");
}

void ModelSpec::validate() const {
    if (!(quantile_p > 0.0 && quantile_p < 1.0)) throw DomainError("model: quantile level must lie in (0, 1)");
    if (!(mh_tuning > 0.0)) throw DomainError("model: MH tuning constant must be positive");
    const auto& h = hyper;
    if (!(h.m > 0 && h.n > 0 && h.a > 0 && h.b > 0 && h.e > 0 && h.f > 0 && h.s0_sq > 0 && h.beta_init_var > 0))
        throw DomainError("model: prior hyperparameters must be positive");
    mcmc.validate();
}

ChainFailure::ChainFailure(int sweep, std::string_view step, const std::string& what)
    : std::runtime_error("chain failed at sweep " + std::to_string(sweep) + ", step " + std::string(step) + ": " + what),
      sweep_(sweep),
      step_(step) {}

VectorXd PosteriorDraws::quantile_mean() const { return quantile.colwise().mean().transpose(); }
VectorXd PosteriorDraws::scale_mean() const { return scale.colwise().mean().transpose(); }

ChainState ChainState::initial(const ModelSpec& spec, const SeriesData& data) {
    const auto T = data.size();
    const MatrixXd x = data.design();
    const auto K = x.cols();
    const auto n = T - 1;
    ChainState s;
    s.beta = MatrixXd::Zero(T, K);
    s.v = VectorXd::Ones(T);
    const double sigma0 = sample_sd(data.values);
    s.scale = VectorXd::Constant(T, sigma0);
    s.omega = MatrixXd::Constant(T, K, 0.01);
    switch (spec.shrinkage) {
        case ShrinkageKind::InverseGamma: s.shrink = IgState{VectorXd::Constant(K, 0.01)}; break;
        case ShrinkageKind::StaticHorseshoe: s.shrink = shrink::ShsState::initial(n, K); break;
        case ShrinkageKind::DynamicHorseshoe:
            s.shrink = shrink::DhsState::initial(n, K, 1.0 / static_cast<double>(T * K));
            break;
    }
    s.log_scale.h = VectorXd::Constant(T, std::log(sigma0));
    s.log_scale.h0 = std::log(sigma0);
    s.log_scale.innovation_var = spec.hyper.f / (spec.hyper.e > 1.0 ? spec.hyper.e - 1.0 : 1.0);
    s.log_scale.init_mean = spec.hyper.m0;
    s.log_scale.init_var = spec.hyper.s0_sq;
    s.tuning_c = spec.mh_tuning;
    s.scale_mode = spec.scale_mode;
    return s;
}

void step_draw_beta(ChainState& state, const SeriesData& data, const dist::ALParams& al, const ModelSpec& spec, Rng& rng) {
    const auto T = data.size();
    const MatrixXd x = data.design();
    const auto K = x.cols();
    ssm::GaussianStateModel model;
    model.obs.resize(T);
    model.design.resize(T, K);
    const double tau = std::sqrt(al.tau_sq);
    for (Eigen::Index t = 0; t < T; ++t) {
        const double w = tau * std::sqrt(state.scale(t) * state.v(t));
        model.obs(t) = (data.values(t) - al.theta * state.v(t)) / w;
        model.design.row(t) = x.row(t) / w;
    }
    model.obs_var = VectorXd::Ones(T);
    model.state_innovation_vars = state.omega;
    model.init_mean = VectorXd::Zero(K);
    model.init_var = VectorXd::Constant(K, spec.hyper.beta_init_var);
    state.beta = ssm::ffbs(model, rng);
}

void step_draw_shrinkage(ChainState& state, const ModelSpec& spec, Rng& rng) {
    const auto T = state.beta.rows();
    const auto K = state.beta.cols();
    const MatrixXd increments = state.beta.bottomRows(T - 1) - state.beta.topRows(T - 1);
    MatrixXd omega_tail(T - 1, K);
    std::visit(
        [&](auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, IgState>) {
                s.omega = shrink::update_ig(increments, spec.hyper.m, spec.hyper.n, rng);
                omega_tail = s.omega.transpose().replicate(T - 1, 1);
            } else if constexpr (std::is_same_v<S, shrink::ShsState>) {
                auto upd = shrink::update_shs(increments, s, rng);
                s = std::move(upd.state);
                omega_tail = std::move(upd.omega);
            } else {
                auto upd = shrink::update_dhs(increments, s, rng);
                s = std::move(upd.state);
                omega_tail = std::move(upd.omega);
            }
        },
        state.shrink);
    state.omega.bottomRows(T - 1) = omega_tail;
    state.omega.row(0) = omega_tail.row(0);
}

dist::GIGParams v_conditional(double resid, double scale, const dist::ALParams& al) {
    return dist::GIGParams{0.5, resid * resid / (al.tau_sq * scale), 2.0 / scale + al.theta * al.theta / (al.tau_sq * scale)};
}

void step_draw_v(ChainState& state, const SeriesData& data, const dist::ALParams& al, Rng& rng) {
    const VectorXd resid = data.values - fitted(data.design(), state.beta);
    for (Eigen::Index t = 0; t < resid.size(); ++t) {
        try {
            state.v(t) = std::max(dist::sample_gig(v_conditional(resid(t), state.scale(t), al), rng), dist::kAuxFloor);
        } catch (const SamplerFailure& e) {
            throw NumericalError(e.what(), t);
        }
    }
}

IgParams tis_scale_conditional(const VectorXd& resid, const VectorXd& v, const dist::ALParams& al, const Hyperparams& hp) {
    const auto T = static_cast<double>(resid.size());
    double quad = 0.0;
    for (Eigen::Index t = 0; t < resid.size(); ++t) {
        const double d = resid(t) - al.theta * v(t);
        quad += d * d / (2.0 * al.tau_sq * v(t));
    }
    return IgParams{(hp.a + 3.0 * T) / 2.0, (hp.b + 2.0 * v.sum()) / 2.0 + quad};
}

double step_draw_scale(ChainState& state, const SeriesData& data, const dist::ALParams& al, const ModelSpec& spec, Rng& rng) {
    const VectorXd resid = data.values - fitted(data.design(), state.beta);
    if (spec.scale_mode == ScaleMode::TIS) {
        const auto ig = tis_scale_conditional(resid, state.v, al, spec.hyper);
        const double sigma = std::max(dist::sample_inverse_gamma(ig.shape, ig.rate, rng), kScaleFloor);
        state.scale.setConstant(sigma);
        return 1.0;
    }
    auto sweep = ssm::sample_log_scale_path(state.log_scale, resid, state.v, al, state.tuning_c, rng);
    state.log_scale = std::move(sweep.path);
    state.v = std::move(sweep.v);
    state.scale = state.log_scale.h.array().exp().max(kScaleFloor);
    VectorXd full(state.log_scale.h.size() + 1);
    full << state.log_scale.h0, state.log_scale.h;
    state.log_scale.innovation_var = ssm::sample_innovation_variance(full, spec.hyper.e, spec.hyper.f, rng);
    return sweep.acceptance_rate;
}

std::pair<VectorXd, VectorXd> simulate_forward(const ChainState& state, const SeriesData& data, int max_h, Rng& rng) {
    const auto T = state.beta.rows();
    const auto K = state.beta.cols();
    MatrixXd omega_path(max_h, K);
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, shrink::DhsState>) {
                omega_path = shrink::forecast_dhs_omega(s, max_h, rng);
            } else {
                omega_path = state.omega.row(T - 1).replicate(max_h, 1);
            }
        },
        state.shrink);

    const VectorXd x_last = data.design().row(T - 1).transpose();
    VectorXd beta = state.beta.row(T - 1).transpose();
    double log_sigma = std::log(state.scale(T - 1));
    VectorXd q(max_h), sig(max_h);
    for (int j = 0; j < max_h; ++j) {
        for (Eigen::Index k = 0; k < K; ++k) beta(k) += std::sqrt(omega_path(j, k)) * rng.normal();
        if (state.scale_mode == ScaleMode::TVS) log_sigma += std::sqrt(state.log_scale.innovation_var) * rng.normal();
        q(j) = x_last.dot(beta);
        sig(j) = std::exp(log_sigma);
    }
    return {q, sig};
}

PosteriorDraws run_chain(const ModelSpec& spec, const SeriesData& data, std::span<const int> horizons, std::uint64_t seed) {
    spec.validate();
    const auto T = data.size();
    if (T < 2) throw DomainError("run_chain: need at least two observations");
    int max_h = 0;
    for (int h : horizons) {
        if (h < 1) throw DomainError("run_chain: horizons must be positive");
        max_h = std::max(max_h, h);
    }

    Rng rng(seed);
    const auto al = dist::ALParams::at(spec.quantile_p);
    ChainState state = ChainState::initial(spec, data);
    const MatrixXd x = data.design();
    const int D = spec.mcmc.retained();
    const auto H = static_cast<Eigen::Index>(horizons.size());

    PosteriorDraws out;
    out.quantile_p = spec.quantile_p;
    out.beta.reserve(D);
    out.quantile.resize(D, T);
    out.scale.resize(D, T);
    out.horizons.assign(horizons.begin(), horizons.end());
    out.forecast.resize(D, H);
    out.forecast_scale.resize(D, H);

    const int total = spec.mcmc.burn_in + spec.mcmc.post_burn;
    double window_acc = 0.0, post_acc = 0.0;
    int window_n = 0, d = 0;
    std::string_view step;
    for (int sweep = 1; sweep <= total; ++sweep) {
        try {
            step = kStepOrder[0];
            step_draw_beta(state, data, al, spec, rng);
            step = kStepOrder[1];
            step_draw_shrinkage(state, spec, rng);
            step = kStepOrder[2];
            step_draw_v(state, data, al, rng);
            step = kStepOrder[3];
            const double acc = step_draw_scale(state, data, al, spec, rng);

            const bool burning = sweep <= spec.mcmc.burn_in;
            if (burning) {
                window_acc += acc;
                if (++window_n == kAdaptWindow) {
                    const double rate = window_acc / window_n;
                    if (spec.adapt_tuning && spec.scale_mode == ScaleMode::TVS) {
                        if (rate < 0.25) state.tuning_c *= 0.7;
                        else if (rate > 0.45) state.tuning_c *= 1.4;
                    }
                    window_acc = 0.0;
                    window_n = 0;
                }
                continue;
            }
            post_acc += acc;
            const int post_index = sweep - spec.mcmc.burn_in;
            if (post_index % spec.mcmc.thin != 0 || d >= D) continue;

            step = kStepOrder[4];
            out.beta.push_back(state.beta);
            out.quantile.row(d) = fitted(x, state.beta).transpose();
            out.scale.row(d) = state.scale.transpose();
            if (max_h > 0) {
                const auto [q, sig] = simulate_forward(state, data, max_h, rng);
                for (Eigen::Index j = 0; j < H; ++j) {
                    out.forecast(d, j) = q(horizons[j] - 1);
                    out.forecast_scale(d, j) = sig(horizons[j] - 1);
                }
            }
            ++d;
        } catch (const ChainFailure&) {
            throw;
        } catch (const std::exception& e) {
            throw ChainFailure(sweep, step, e.what());
        }
    }
    out.acceptance_rate = post_acc / static_cast<double>(spec.mcmc.post_burn);
    out.final_tuning = state.tuning_c;
    return out;
}

std::vector<PosteriorDraws> run_quantile_chains(const ModelSpec& base, const QuantileGrid& grid, const SeriesData& data,
                                                std::span<const int> horizons, std::span<const std::uint64_t> seeds,
                                                int threads) {
    grid.validate();
    if (seeds.size() != grid.size()) throw DomainError("run_quantile_chains: one seed per quantile required");
    const auto P = static_cast<int>(grid.size());
    std::vector<PosteriorDraws> out(P);
    std::vector<std::string> errors(P);
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
    for (int i = 0; i < P; ++i) {
        ModelSpec spec = base;
        spec.quantile_p = grid[i];
        try {
            out[i] = run_chain(spec, data, horizons, seeds[i]);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (int i = 0; i < P; ++i) {
        if (!errors[i].empty()) throw std::runtime_error("quantile " + std::to_string(grid[i]) + ": " + errors[i]);
    }
    return out;
}

std::vector<PosteriorDraws> run_quantile_chains_serial(const ModelSpec& base, const QuantileGrid& grid,
                                                       const SeriesData& data, std::span<const int> horizons,
                                                       std::span<const std::uint64_t> seeds) {
    grid.validate();
    if (seeds.size() != grid.size()) throw DomainError("run_quantile_chains: one seed per quantile required");
    std::vector<PosteriorDraws> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ModelSpec spec = base;
        spec.quantile_p = grid[i];
        out.push_back(run_chain(spec, data, horizons, seeds[i]));
    }
    return out;
}

std::vector<std::uint64_t> sequential_seeds(std::uint64_t master_seed, std::size_t count) {
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = master_seed + i;
    return seeds;
}

}  // namespace tvpqr::sampler
