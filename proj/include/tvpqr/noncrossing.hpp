#pragma once

#include <Eigen/Dense>
#include <span>
#include <string_view>
#include <vector>

#include "tvpqr/types.hpp"

namespace tvpqr::sampler {
struct PosteriorDraws;
}

namespace tvpqr::noncross {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Adjustment { Raw, GP, GPt };

std::string_view to_string(Adjustment a);
Adjustment parse_adjustment(std::string_view tag);

/// Induced quantiles for one period. Row i is the AL model fitted at level
/// p_i, column j the target level p_j; entry (i, j) = F^{-1}(p_j; mu_i, sigma_i, p_i).
struct InducedQuantileMatrix {
    VectorXd levels;
    MatrixXd q;
    MatrixXd diag_var;  ///< posterior variance of each entry over the retained draws, divided by their count
};

struct GPConfig {
    double s_sq = 100.0;
    double w_lo = 1e-4;
    double w_hi = 10.0;
    double rel_tol = 1e-3;
    double margin = 1e-8;     ///< required gap between consecutive quantiles
    double var_floor = 1e-10;
};

/// From point estimates; `entry_var` defaults to the variance floor everywhere.
InducedQuantileMatrix build_induced_matrix(const VectorXd& mu_hat, const VectorXd& sigma_hat, const QuantileGrid& grid,
                                           const MatrixXd* entry_var = nullptr);

/// From draws of (mu, sigma) per level (each a D-vector); uses posterior means
/// for the entries and the draw variance / D for diag_var.
InducedQuantileMatrix build_induced_matrix(std::span<const VectorXd> mu_draws, std::span<const VectorXd> sigma_draws,
                                           const QuantileGrid& grid);

/// GP posterior mean at the grid: for every target level j the column
/// q(., j) is treated as noisy observations at inputs p_i with noise
/// diag_var(., j) and squared-exponential prior s^2 exp(-(p - p')^2 / (2 w^2)).
VectorXd gp_fit(const InducedQuantileMatrix& matrix, double w, const GPConfig& config);

bool strictly_increasing(const VectorXd& values, double margin);

/// Smallest w in [w_lo, w_hi] with strictly increasing output: first hit on a
/// geometric ladder (ratio 1.25), refined by bisection to rel_tol.
double minimal_bandwidth(const InducedQuantileMatrix& matrix, const GPConfig& config);

struct BandwidthSelection {
    std::vector<double> per_period;  ///< minimal w_t
    double common = 0.0;             ///< max_t w_t
};

BandwidthSelection select_bandwidth(std::span<const InducedQuantileMatrix> matrices, const GPConfig& config,
                                    int threads = 0);

/// Draws per quantile level: mu[i] and sigma[i] are D x periods.
struct QuantileDrawSet {
    std::vector<MatrixXd> mu;
    std::vector<MatrixXd> sigma;

    Eigen::Index periods() const { return mu.empty() ? 0 : mu.front().cols(); }
    InducedQuantileMatrix induced(Eigen::Index period, const QuantileGrid& grid) const;
    static QuantileDrawSet in_sample(std::span<const sampler::PosteriorDraws> chains);
    static QuantileDrawSet forecasts(std::span<const sampler::PosteriorDraws> chains);
};

struct AdjustedCurves {
    MatrixXd values;                ///< periods x P
    std::vector<double> bandwidths; ///< w used per period (empty for raw)
};

/// raw: posterior means. GPt: per-period minimal bandwidth. GP: the common
/// maximum; a period that still crosses at the common value gets the smallest
/// larger bandwidth that removes the crossing, or keeps its own minimal
/// bandwidth when none up to w_hi does.
AdjustedCurves adjust(const QuantileDrawSet& draws, const QuantileGrid& grid, Adjustment mode,
                      const GPConfig& config = {}, int threads = 0);

/// Serial reference for adjust.
AdjustedCurves adjust_serial(const QuantileDrawSet& draws, const QuantileGrid& grid, Adjustment mode,
                             const GPConfig& config = {});

}  // namespace tvpqr::noncross
