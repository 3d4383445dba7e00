#pragma once

#include <cstdint>
#include <span>

#include "tvpqr/sampler.hpp"
#include "tvpqr/types.hpp"

namespace tvpqr::ucsv {

/// Unobserved-components model with stochastic volatility:
///   y_t = alpha_t + N(0, exp(h_t))
///   alpha_t = alpha_{t-1} + N(0, omega_t)     dynamic horseshoe on omega_t
///   h_t = h_{t-1} + N(0, varsigma_h^2)        varsigma_h^2 ~ IG(shape, rate)
struct UcsvSpec {
    sampler::McmcSettings mcmc;
    double alpha_init_var = 10.0;
    double h_init_mean = 0.0;
    double h_init_var = 10.0;
    double h_var_shape = 3.0;
    double h_var_rate = 0.3;

    void validate() const;
};

/// Draws are returned in the quantile-chain layout: `beta` and `quantile`
/// hold alpha, `scale` the standard deviation exp(h_t / 2), `forecast`
/// alpha_{T+h} and `forecast_scale` exp(h_{T+h} / 2). The h-step predictive
/// is the equal-weight mixture of N(forecast, forecast_scale^2) over draws.
sampler::PosteriorDraws run_ucsv(const SeriesData& data, const UcsvSpec& spec, std::span<const int> horizons,
                                 std::uint64_t seed);

/// Component means and variances of the predictive mixture for horizon column j.
struct MixtureComponents {
    std::vector<double> means;
    std::vector<double> variances;
};
MixtureComponents predictive_mixture(const sampler::PosteriorDraws& draws, Eigen::Index horizon_column);

}  // namespace tvpqr::ucsv
