#pragma once

#include <Eigen/Dense>
#include <span>

#include "tvpqr/distributions.hpp"
#include "tvpqr/rng.hpp"

namespace tvpqr::ssm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Linear-Gaussian model with random-walk states:
///   obs_t = design_t' beta_t + N(0, obs_var_t)
///   beta_t = beta_{t-1} + N(0, diag(state_innovation_vars.row(t))),  t >= 1
///   beta_0 ~ N(init_mean, diag(init_var))
/// Row 0 of state_innovation_vars is not used.
struct GaussianStateModel {
    VectorXd obs;
    MatrixXd design;
    VectorXd obs_var;
    MatrixXd state_innovation_vars;
    VectorXd init_mean;
    VectorXd init_var;

    Eigen::Index periods() const { return obs.size(); }
    Eigen::Index dim() const { return design.cols(); }
    void validate() const;
};

/// Jitter floor on filtered variances.
inline constexpr double kFilterJitter = 1e-12;

/// Joint draw of the state path (T x K) from its smoothing distribution.
MatrixXd ffbs(const GaussianStateModel& model, Rng& rng);

/// Scalar AR(1) state model used by the log-variance processes:
///   obs_t = x_t + N(0, obs_var_t)
///   x_0 = mean + N(0, innovation_var_0)
///   x_t = mean + ar (x_{t-1} - mean) + N(0, innovation_var_t)
VectorXd ffbs_ar1(const VectorXd& obs, const VectorXd& obs_var, double mean, double ar,
                  const VectorXd& innovation_var, Rng& rng);

/// Log-scale random walk h_t = log(sigma_t) with its sampled initial state.
struct LogScalePath {
    VectorXd h;
    double h0 = 0.0;
    double innovation_var = 0.1;
    double init_mean = 0.0;
    double init_var = 1.0;
};

struct LogScaleSweep {
    LogScalePath path;
    /// v_t = z_t sigma_t with z_t = v_t / sigma_t^(r) frozen during the sweep.
    VectorXd v;
    double acceptance_rate = 0.0;
};

/// One single-site random-walk MH update of a log-scale h at one period.
/// Target: N(resid; theta z e^h, tau^2 z e^{2h}) x N(h; prior_mean, prior_var).
/// Returns the new value; `accepted` reports the decision.
double mh_log_scale_site(double h, double prior_mean, double prior_var, double resid, double z,
                         const dist::ALParams& al, double tuning_c, Rng& rng, bool& accepted);

/// Log of the site target above, up to a constant.
double log_scale_site_target(double h, double prior_mean, double prior_var, double resid, double z,
                             const dist::ALParams& al);

/// Full t-by-t MH sweep over the log-scale path followed by the exact Gaussian
/// update of the initial state. `resid` holds y_t - x_t' beta_t.
LogScaleSweep sample_log_scale_path(const LogScalePath& current, const VectorXd& resid, const VectorXd& v,
                                    const dist::ALParams& al, double tuning_c, Rng& rng);

/// Inverse-gamma draw for a random-walk innovation variance. `state_path`
/// includes the initial state, so it contributes size-1 increments.
double sample_innovation_variance(const VectorXd& state_path, double prior_shape, double prior_rate, Rng& rng);

}  // namespace tvpqr::ssm
