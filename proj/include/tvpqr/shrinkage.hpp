#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string_view>

#include "tvpqr/rng.hpp"

namespace tvpqr::shrink {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class ShrinkageKind { InverseGamma, StaticHorseshoe, DynamicHorseshoe };

std::string_view to_string(ShrinkageKind kind);
ShrinkageKind parse_shrinkage(std::string_view tag);

/// Added to squared increments before taking logs.
inline constexpr double kLogOffset = 1e-10;
/// Floor on the squared horseshoe scales.
inline constexpr double kScaleFloor = 1e-12;

/// Static horseshoe, omega_{k,t} = lambda_k^2 phi_{k,t}^2, with the
/// inverse-gamma auxiliary representation of the half-Cauchy.
struct ShsState {
    VectorXd lambda_sq;  ///< K
    MatrixXd phi_sq;     ///< n x K
    VectorXd lambda_aux; ///< K
    MatrixXd phi_aux;    ///< n x K

    static ShsState initial(Eigen::Index periods, Eigen::Index dim);
};

/// Dynamic horseshoe: psi_{k,t} = log omega_{k,t} follows a stationary AR(1)
/// around mu_k = log lambda_0 + log lambda_k with Z(1/2, 1/2) innovations.
struct DhsState {
    MatrixXd psi;         ///< n x K
    VectorXd phi;         ///< K, AR coefficients in (-1, 1)
    MatrixXd pg_aux;      ///< n x K, Polya-Gamma precisions of the innovations
    double log_lambda0 = 0.0;
    VectorXd log_lambda;  ///< K
    double lambda0_aux = 1.0;
    VectorXd lambda_aux;  ///< K
    double global_scale = 1.0;  ///< prior scale of lambda_0, 1/(T K)
    double zc = 0.5;
    double zd = 0.5;

    double lambda0() const;
    VectorXd lambda() const;
    VectorXd mu() const;

    static DhsState initial(Eigen::Index periods, Eigen::Index dim, double global_scale, double log_omega = std::log(0.01));
};

/// Prior (10, 2) Beta on (phi + 1) / 2.
inline constexpr double kPhiBetaA = 10.0;
inline constexpr double kPhiBetaB = 2.0;

/// Constant variances: one IG(m + n/2, n_rate + sum eta^2 / 2) draw per column.
VectorXd update_ig(const MatrixXd& increments, double prior_m, double prior_n, Rng& rng);

struct ShsUpdate {
    ShsState state;
    MatrixXd omega;
};
ShsUpdate update_shs(const MatrixXd& increments, const ShsState& state, Rng& rng);

struct DhsOptions {
    /// Keep phi at its current value (used for nested-model checks).
    bool fix_phi = false;
};

struct DhsUpdate {
    DhsState state;
    MatrixXd omega;
};
DhsUpdate update_dhs(const MatrixXd& increments, const DhsState& state, Rng& rng, DhsOptions options = {});

/// Simulates the log-variance AR(1) `steps` periods past the last row; returns
/// omega for each step (steps x K).
MatrixXd forecast_dhs_omega(const DhsState& state, int steps, Rng& rng);

/// Ten-component normal mixture approximation of log chi^2_1.
struct LogChiSqMixture {
    static constexpr int kComponents = 10;
    static const double weight[kComponents];
    static const double mean[kComponents];
    static const double var[kComponents];
};

/// Draws the mixture indicator for residual r = log(eta^2) - log-variance.
int sample_mixture_component(double r, Rng& rng);

}  // namespace tvpqr::shrink
