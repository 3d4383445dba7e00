#pragma once

#include "tvpqr/rng.hpp"

namespace tvpqr::dist {

/// Mixture constants of the asymmetric Laplace likelihood at quantile level p.
struct ALParams {
    double p;
    double theta;   ///< location multiplier (1-2p)/(p(1-p))
    double tau_sq;  ///< variance multiplier 2/(p(1-p))

    static ALParams at(double p);
};

/// GIG(lambda, xi, psi) with density proportional to x^(lambda-1) exp(-(xi/x + psi x)/2).
struct GIGParams {
    double lambda;
    double xi;
    double psi;
};

/// Rejection loops give up after this many proposals.
inline constexpr int kRejectionCap = 10000;

/// Lower clamp applied to v draws before they enter the reweighting.
inline constexpr double kAuxFloor = 1e-12;

/// Check loss x(p - 1{x < 0}).
double check_loss(double x, double p);

double al_density(double x, double scale, const ALParams& al);
double al_cdf(double x, double scale, const ALParams& al);

/// Quantile function of AL_p(mu, scale) at level ptilde. Throws RangeError at
/// ptilde in {0, 1}.
double al_quantile_function(double ptilde, double mu, double scale, double p);

double sample_gig(const GIGParams& params, Rng& rng);

/// Reference route for lambda = +-1/2: reciprocal / direct inverse-Gaussian
/// transformation (Michael-Schucany-Haas). Same law as sample_gig.
double sample_gig_half(const GIGParams& params, Rng& rng);

/// PG(b, c). Exact for integer b (sums of the alternating-series sampler);
/// truncated sum of 200 gammas otherwise.
double sample_polya_gamma(double b, double c, Rng& rng);

double sample_exponential(double scale, Rng& rng);
double sample_gamma(double shape, double rate, Rng& rng);
/// Density proportional to x^(-shape-1) exp(-rate/x).
double sample_inverse_gamma(double shape, double rate, Rng& rng);
double sample_half_cauchy(double scale, Rng& rng);
/// logit of a Beta(c, d) draw, i.e. Z(c, d, 0, 1).
double sample_z(double c, double d, Rng& rng);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace tvpqr::dist
