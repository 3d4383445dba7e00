#include "tvpqr/ucsv.hpp"

#include <cmath>
#include <string>

#include "tvpqr/errors.hpp"
#include "tvpqr/shrinkage.hpp"
#include "tvpqr/state_space.hpp"

namespace tvpqr::ucsv {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void UcsvSpec::validate() const {
    mcmc.validate();
    if (!(alpha_init_var > 0 && h_init_var > 0 && h_var_shape > 0 && h_var_rate > 0))
        throw DomainError("UC-SV: prior variances and IG parameters must be positive");
}

namespace {

VectorXd draw_alpha(const VectorXd& y, const VectorXd& h, const MatrixXd& omega, double init_var, Rng& rng) {
    const auto T = y.size();
    ssm::GaussianStateModel m;
    m.obs = y;
    m.design = MatrixXd::Ones(T, 1);
    m.obs_var = h.array().exp();
    m.state_innovation_vars = omega;
    m.init_mean = VectorXd::Zero(1);
    m.init_var = VectorXd::Constant(1, init_var);
    return ssm::ffbs(m, rng).col(0);
}

VectorXd draw_log_variance(const VectorXd& eps, const VectorXd& h, double innovation_var, const UcsvSpec& spec,
                           Rng& rng) {
    using M = shrink::LogChiSqMixture;
    const auto T = eps.size();
    ssm::GaussianStateModel m;
    m.obs.resize(T);
    m.obs_var.resize(T);
    for (Eigen::Index t = 0; t < T; ++t) {
        const double ystar = std::log(eps(t) * eps(t) + shrink::kLogOffset);
        const int j = shrink::sample_mixture_component(ystar - h(t), rng);
        m.obs(t) = ystar - M::mean[j];
        m.obs_var(t) = M::var[j];
    }
    m.design = MatrixXd::Ones(T, 1);
    m.state_innovation_vars = MatrixXd::Constant(T, 1, innovation_var);
    m.init_mean = VectorXd::Constant(1, spec.h_init_mean);
    m.init_var = VectorXd::Constant(1, spec.h_init_var);
    return ssm::ffbs(m, rng).col(0);
}

}  // namespace

sampler::PosteriorDraws run_ucsv(const SeriesData& data, const UcsvSpec& spec, std::span<const int> horizons,
                                 std::uint64_t seed) {
    spec.validate();
    const auto T = data.size();
    if (T < 2) throw DomainError("run_ucsv: need at least two observations");
    int max_h = 0;
    for (int h : horizons) {
        if (h < 1) throw DomainError("run_ucsv: horizons must be positive");
        max_h = std::max(max_h, h);
    }
    const VectorXd& y = data.values;
    Rng rng(seed);

    const double var0 = std::max((y.array() - y.mean()).square().sum() / static_cast<double>(T - 1), 1e-6);
    VectorXd alpha = VectorXd::Constant(T, y.mean());
    VectorXd h = VectorXd::Constant(T, std::log(var0));
    double h_var = spec.h_var_rate / (spec.h_var_shape - 1.0 > 0 ? spec.h_var_shape - 1.0 : 1.0);
    MatrixXd omega = MatrixXd::Constant(T, 1, 0.01);
    auto dhs = shrink::DhsState::initial(T - 1, 1, 1.0 / static_cast<double>(T));

    const int D = spec.mcmc.retained();
    const auto H = static_cast<Eigen::Index>(horizons.size());
    sampler::PosteriorDraws out;
    out.quantile_p = 0.5;
    out.beta.reserve(D);
    out.quantile.resize(D, T);
    out.scale.resize(D, T);
    out.horizons.assign(horizons.begin(), horizons.end());
    out.forecast.resize(D, H);
    out.forecast_scale.resize(D, H);
    out.acceptance_rate = 1.0;

    const int total = spec.mcmc.burn_in + spec.mcmc.post_burn;
    int d = 0;
    std::string_view step;
    for (int sweep = 1; sweep <= total; ++sweep) {
        try {
            step = "alpha";
            alpha = draw_alpha(y, h, omega, spec.alpha_init_var, rng);
            step = "omega";
            const MatrixXd inc = alpha.tail(T - 1) - alpha.head(T - 1);
            auto upd = shrink::update_dhs(inc, dhs, rng);
            dhs = std::move(upd.state);
            omega.bottomRows(T - 1) = upd.omega;
            omega.row(0) = upd.omega.row(0);
            step = "logvar";
            h = draw_log_variance(y - alpha, h, h_var, spec, rng);
            step = "scale";
            h_var = ssm::sample_innovation_variance(h, spec.h_var_shape, spec.h_var_rate, rng);

            const int post_index = sweep - spec.mcmc.burn_in;
            if (post_index <= 0 || post_index % spec.mcmc.thin != 0 || d >= D) continue;
            step = "forecast";
            out.beta.emplace_back(alpha);
            out.quantile.row(d) = alpha.transpose();
            out.scale.row(d) = (0.5 * h.array()).exp().transpose();
            if (max_h > 0) {
                const MatrixXd om = shrink::forecast_dhs_omega(dhs, max_h, rng);
                double a = alpha(T - 1), lv = h(T - 1);
                VectorXd fa(max_h), fs(max_h);
                for (int j = 0; j < max_h; ++j) {
                    a += std::sqrt(om(j, 0)) * rng.normal();
                    lv += std::sqrt(h_var) * rng.normal();
                    fa(j) = a;
                    fs(j) = std::exp(0.5 * lv);
                }
                for (Eigen::Index j = 0; j < H; ++j) {
                    out.forecast(d, j) = fa(horizons[j] - 1);
                    out.forecast_scale(d, j) = fs(horizons[j] - 1);
                }
            }
            ++d;
        } catch (const sampler::ChainFailure&) {
            throw;
        } catch (const std::exception& e) {
            throw sampler::ChainFailure(sweep, step, e.what());
        }
    }
    return out;
}

MixtureComponents predictive_mixture(const sampler::PosteriorDraws& draws, Eigen::Index horizon_column) {
    MixtureComponents m;
    const auto D = draws.forecast.rows();
    m.means.resize(D);
    m.variances.resize(D);
    for (Eigen::Index d = 0; d < D; ++d) {
        m.means[d] = draws.forecast(d, horizon_column);
        const double s = draws.forecast_scale(d, horizon_column);
        m.variances[d] = s * s;
    }
    return m;
}

}  // namespace tvpqr::ucsv
