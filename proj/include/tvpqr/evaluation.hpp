#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "tvpqr/rng.hpp"
#include "tvpqr/types.hpp"

namespace tvpqr::eval {

using Eigen::VectorXd;

enum class CrpsWeight { None, Tails, Left, Right };

inline constexpr CrpsWeight kAllWeights[] = {CrpsWeight::None, CrpsWeight::Tails, CrpsWeight::Left, CrpsWeight::Right};

std::string_view to_string(CrpsWeight w);
double crps_weight(CrpsWeight scheme, double p);

/// (r - f)(p - 1{r < f}).
double quantile_score(double realization, double forecast, double p);

struct QuantileForecast {
    QuantileGrid levels;
    VectorXd values;
    int origin = 0;
    int horizon = 0;
};

/// Mean over the grid of weight(p) * QS_p. On a uniform grid this is the
/// Riemann sum of the quantile-weighted CRPS up to a constant factor.
double weighted_crps(const QuantileForecast& qf, double realization, CrpsWeight scheme);

/// Density tabulated on an increasing support grid, normalized to unit
/// trapezoid integral.
struct PredictiveDensity {
    VectorXd support;
    VectorXd density;
    VectorXd cdf_table;

    double integral() const;
    double pdf(double x) const;
    double cdf(double x) const;
    /// Inverse of the trapezoid CDF with linear interpolation.
    double quantile(double u) const;
    double sample(Rng& rng) const { return quantile(rng.uniform()); }

    /// Normalizes `density` and fills `cdf_table`.
    void finalize();
};

/// Tabulates f on [lo, hi] with n points.
PredictiveDensity density_from_function(double lo, double hi, int n, const std::function<double(double)>& f);

/// Equal-weight Gaussian mixture (UC-SV predictive).
PredictiveDensity gaussian_mixture_density(std::span<const double> means, std::span<const double> variances, int n = 2048);
double gaussian_mixture_logpdf(std::span<const double> means, std::span<const double> variances, double x);
double gaussian_mixture_quantile(std::span<const double> means, std::span<const double> variances, double u);

inline constexpr int kDensityPoints = 1024;
inline constexpr double kMinBandwidth = 1e-3;
inline constexpr double kLogFloor = -23.025850929940457;  // log(1e-10)

/// Silverman-rule bandwidth on the quantile values.
double smoothing_bandwidth(const VectorXd& values);

/// Gaussian-kernel density over the forecast quantiles. Requires strictly
/// increasing values (ContractViolation otherwise).
PredictiveDensity smooth_to_density(const QuantileForecast& qf, int points = kDensityPoints);

/// log of the interpolated density, floored at log(1e-10).
double log_predictive_score(const PredictiveDensity& density, double realization);

struct Band {
    double point = 0.0;
    double lo = 0.0;  ///< 5th percentile over replicates
    double hi = 0.0;  ///< 95th percentile over replicates

    bool contains(double x) const { return lo <= x && x <= hi; }
};

struct MomentBands {
    Band mean, variance, excess_kurtosis, skewness;
};

struct SampleMoments {
    double mean, variance, excess_kurtosis, skewness;
};
SampleMoments sample_moments(std::span<const double> x);

/// Type-7 percentile, q in [0, 1].
double percentile(std::vector<double> x, double q);

MomentBands bootstrap_moments(const PredictiveDensity& density, Rng& rng, int n_sample = 3000, int n_rep = 1000);

struct ScenarioBands {
    Band deflation;  ///< Pr(x < 0)
    Band target;     ///< Pr(1 <= x <= 3)
    Band excessive;  ///< Pr(x > 4)
};

/// Points from the density CDF; bands from replicate samples.
ScenarioBands scenario_probabilities(const PredictiveDensity& density, Rng& rng, int n_sample = 3000, int n_rep = 1000);

}  // namespace tvpqr::eval
