#include "tvpqr/distributions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tvpqr/errors.hpp"

namespace tvpqr::dist {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

// ---------------------------------------------------------------------------
// GIG generator (Hoermann & Leydold 2014). All three routines draw from the
// standardized law with density x^(lambda-1) exp(-omega/2 (x + 1/x)),
// lambda >= 0; the caller rescales by sqrt(xi/psi).

double gig_mode(double lambda, double omega) {
    if (lambda >= 1.0) return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
    return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

double gig_rou_noshift(double lambda, double omega, Rng& rng) {
    const double t = 0.5 * (lambda - 1.0);
    const double s = 0.25 * omega;
    const double xm = gig_mode(lambda, omega);
    const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
    const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
    const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
    for (int it = 0; it < kRejectionCap; ++it) {
        const double u = um * rng.uniform();
        const double v = rng.uniform();
        const double x = u / v;
        if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
    }
    throw SamplerFailure("GIG ratio-of-uniforms exceeded iteration cap");
}

double gig_rou_shift(double lambda, double omega, Rng& rng) {
    const double t = 0.5 * (lambda - 1.0);
    const double s = 0.25 * omega;
    const double xm = gig_mode(lambda, omega);
    const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

    // Roots of the cubic bounding the shifted region.
    const double a = -(2.0 * (lambda + 1.0) / omega + xm);
    const double b = (2.0 * (lambda - 1.0) * xm / omega - 1.0);
    const double c = xm;
    const double p = b - a * a / 3.0;
    const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
    const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
    const double fak = 2.0 * std::sqrt(-p / 3.0);
    const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
    const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * kPi) - a / 3.0;
    const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
    const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

    for (int it = 0; it < kRejectionCap; ++it) {
        const double u = uminus + rng.uniform() * (uplus - uminus);
        const double v = rng.uniform();
        const double x = u / v + xm;
        if (x > 0.0 && std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
    }
    throw SamplerFailure("GIG shifted ratio-of-uniforms exceeded iteration cap");
}

// Non-T-concave region: 0 <= lambda < 1 and small omega.
double gig_nonconcave(double lambda, double omega, Rng& rng) {
    const double xm = gig_mode(lambda, omega);
    const double x0 = omega / (1.0 - lambda);
    const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
    const double a0 = k0 * x0;
    double k1, a1, k2, a2;
    if (x0 >= 2.0 / omega) {
        k1 = 0.0;
        a1 = 0.0;
        k2 = std::pow(x0, lambda - 1.0);
        a2 = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
    } else {
        k1 = std::exp(-omega);
        a1 = (lambda == 0.0) ? k1 * std::log(2.0 / (omega * omega))
                             : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
        k2 = std::pow(2.0 / omega, lambda - 1.0);
        a2 = k2 * 2.0 * std::exp(-1.0) / omega;
    }
    const double total = a0 + a1 + a2;

    for (int it = 0; it < kRejectionCap; ++it) {
        double v = total * rng.uniform();
        double x, hx;
        if (v <= a0) {
            x = x0 * v / a0;
            hx = k0;
        } else if ((v -= a0) <= a1) {
            if (lambda == 0.0) {
                x = omega * std::exp(std::exp(omega) * v);
                hx = k1 / x;
            } else {
                x = std::pow(std::pow(x0, lambda) + lambda / k1 * v, 1.0 / lambda);
                hx = k1 * std::pow(x, lambda - 1.0);
            }
        } else {
            v -= a1;
            const double lo = (x0 > 2.0 / omega) ? x0 : 2.0 / omega;
            x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * lo) - omega / (2.0 * k2) * v);
            hx = k2 * std::exp(-omega / 2.0 * x);
        }
        const double u = rng.uniform() * hx;
        if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
    }
    throw SamplerFailure("GIG non-concave rejection exceeded iteration cap");
}

// Inverse Gaussian with mean mu and shape s.
double inverse_gaussian(double mu, double shape, Rng& rng) {
    const double n = rng.normal();
    const double y = n * n;
    const double muy = mu * y;
    const double x = mu + mu * muy / (2.0 * shape) - mu / (2.0 * shape) * std::sqrt(4.0 * shape * muy + muy * muy);
    return (rng.uniform() <= mu / (mu + x)) ? x : mu * mu / x;
}

// ---------------------------------------------------------------------------
// Polya-Gamma PG(1, c) via Devroye's alternating series (Polson, Scott & Windle).

constexpr double kPgTrunc = 0.64;

double pg_coef(int n, double x) {
    const double k = (n + 0.5) * kPi;
    if (x > kPgTrunc) return k * std::exp(-0.5 * k * k * x);
    if (x <= 0.0) return 0.0;
    const double e = -1.5 * (std::log(0.5 * kPi) + std::log(x)) + std::log(k) - 2.0 * (n + 0.5) * (n + 0.5) / x;
    return std::exp(e);
}

double log_normal_cdf(double x) { return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2)); }

// Probability of the exponential-tail proposal branch.
double pg_texpon_mass(double z) {
    const double t = kPgTrunc;
    const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
    const double b = std::sqrt(1.0 / t) * (t * z - 1.0);
    const double a = -std::sqrt(1.0 / t) * (t * z + 1.0);
    const double x0 = std::log(fz) + fz * t;
    const double xb = x0 - z + log_normal_cdf(b);
    const double xa = x0 + z + log_normal_cdf(a);
    const double qdivp = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
    return 1.0 / (1.0 + qdivp);
}

// Inverse Gaussian with mean 1/z truncated to (0, kPgTrunc).
double pg_truncated_ig(double z, Rng& rng) {
    const double t = kPgTrunc;
    if (1.0 / t > z) {
        for (int it = 0; it < kRejectionCap; ++it) {
            double e1, e2;
            int inner = 0;
            do {
                e1 = rng.exponential();
                e2 = rng.exponential();
                if (++inner > kRejectionCap) throw SamplerFailure("PG truncated-IG proposal exceeded cap");
            } while (e1 * e1 > 2.0 * e2 / t);
            double x = 1.0 + e1 * t;
            x = t / (x * x);
            if (rng.uniform() <= std::exp(-0.5 * z * z * x)) return x;
        }
    } else {
        const double mu = 1.0 / z;
        for (int it = 0; it < kRejectionCap; ++it) {
            const double x = inverse_gaussian(mu, 1.0, rng);
            if (x < t) return x;
        }
    }
    throw SamplerFailure("PG truncated inverse-Gaussian exceeded iteration cap");
}

double pg_one(double c, Rng& rng) {
    const double z = std::fabs(c) * 0.5;
    const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
    const double mass = pg_texpon_mass(z);
    for (int it = 0; it < kRejectionCap; ++it) {
        const double x = (rng.uniform() < mass) ? kPgTrunc + rng.exponential() / fz : pg_truncated_ig(z, rng);
        double s = pg_coef(0, x);
        const double y = rng.uniform() * s;
        for (int n = 1;; ++n) {
            if (n % 2 == 1) {
                s -= pg_coef(n, x);
                if (y <= s) return 0.25 * x;
            } else {
                s += pg_coef(n, x);
                if (y > s) break;
            }
        }
    }
    throw SamplerFailure("Polya-Gamma sampler exceeded iteration cap");
}

}  // namespace

ALParams ALParams::at(double p) {
    require(p > 0.0 && p < 1.0, "quantile level must lie in (0, 1)");
    return ALParams{p, (1.0 - 2.0 * p) / (p * (1.0 - p)), 2.0 / (p * (1.0 - p))};
}

double check_loss(double x, double p) { return x * (p - (x < 0.0 ? 1.0 : 0.0)); }

double al_density(double x, double scale, const ALParams& al) {
    require(std::isfinite(x), "AL density: non-finite argument");
    require(scale > 0.0 && std::isfinite(scale), "AL density: scale must be positive");
    return al.p * (1.0 - al.p) / scale * std::exp(-check_loss(x, al.p) / scale);
}

double al_cdf(double x, double scale, const ALParams& al) {
    require(scale > 0.0, "AL cdf: scale must be positive");
    if (x < 0.0) return al.p * std::exp((1.0 - al.p) * x / scale);
    return 1.0 - (1.0 - al.p) * std::exp(-al.p * x / scale);
}

double al_quantile_function(double ptilde, double mu, double scale, double p) {
    require(p > 0.0 && p < 1.0, "AL quantile: p must lie in (0, 1)");
    require(scale > 0.0, "AL quantile: scale must be positive");
    require(ptilde >= 0.0 && ptilde <= 1.0, "AL quantile: level outside [0, 1]");
    if (ptilde == 0.0 || ptilde == 1.0) throw RangeError("AL quantile is infinite at levels 0 and 1");
    if (ptilde <= p) return mu + scale / (1.0 - p) * std::log(ptilde / p);
    return mu - scale / p * std::log((1.0 - ptilde) / (1.0 - p));
}

double sample_gig(const GIGParams& params, Rng& rng) {
    const double lambda = params.lambda, xi = params.xi, psi = params.psi;
    require(std::isfinite(lambda) && std::isfinite(xi) && std::isfinite(psi), "GIG: non-finite parameter");
    require(xi >= 0.0 && psi > 0.0, "GIG: need xi >= 0 and psi > 0");
    require(lambda > 0.0 || xi > 0.0, "GIG: xi must be positive when lambda <= 0");

    // Degenerate chi: Gamma(lambda, rate psi/2).
    if (xi == 0.0) return sample_gamma(lambda, psi / 2.0, rng);

    const double omega = std::sqrt(xi * psi);
    const double alpha = std::sqrt(xi / psi);
    const double lam = std::fabs(lambda);
    double x;
    if (lam > 2.0 || omega > 3.0) {
        x = gig_rou_shift(lam, omega, rng);
    } else if (lam >= 1.0 - 2.25 * omega * omega || omega > 0.2) {
        x = gig_rou_noshift(lam, omega, rng);
    } else if (omega > 0.0) {
        x = gig_nonconcave(lam, omega, rng);
    } else {
        // omega underflowed: Gamma limit of the positive-order law.
        if (lambda <= 0.0) throw DomainError("GIG: omega underflow with lambda <= 0");
        return sample_gamma(lambda, psi / 2.0, rng);
    }
    if (!std::isfinite(x)) throw SamplerFailure("GIG produced a non-finite draw");
    return lambda < 0.0 ? alpha / x : alpha * x;
}

double sample_gig_half(const GIGParams& params, Rng& rng) {
    require(std::fabs(std::fabs(params.lambda) - 0.5) < 1e-15, "GIG half-order route needs |lambda| = 1/2");
    require(params.xi > 0.0 && params.psi > 0.0, "GIG half-order route needs xi, psi > 0");
    if (params.lambda < 0.0) return inverse_gaussian(std::sqrt(params.xi / params.psi), params.xi, rng);
    return 1.0 / inverse_gaussian(std::sqrt(params.psi / params.xi), params.psi, rng);
}

double sample_polya_gamma(double b, double c, Rng& rng) {
    require(b > 0.0 && std::isfinite(b), "Polya-Gamma: b must be positive");
    require(std::isfinite(c), "Polya-Gamma: c must be finite");
    const double rounded = std::round(b);
    if (rounded == b && b <= 64.0) {
        double sum = 0.0;
        for (int i = 0; i < static_cast<int>(rounded); ++i) sum += pg_one(c, rng);
        return sum;
    }
    const double c2 = c * c / (4.0 * kPi * kPi);
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double d = (k - 0.5) * (k - 0.5) + c2;
        sum += rng.gamma(b) / d;
    }
    return sum / (2.0 * kPi * kPi);
}

double sample_exponential(double scale, Rng& rng) {
    require(scale > 0.0 && std::isfinite(scale), "exponential: scale must be positive");
    return scale * rng.exponential();
}

double sample_gamma(double shape, double rate, Rng& rng) {
    require(shape > 0.0 && rate > 0.0, "gamma: shape and rate must be positive");
    return rng.gamma(shape) / rate;
}

double sample_inverse_gamma(double shape, double rate, Rng& rng) {
    require(shape > 0.0 && rate > 0.0, "inverse gamma: shape and rate must be positive");
    return rate / rng.gamma(shape);
}

double sample_half_cauchy(double scale, Rng& rng) {
    require(scale > 0.0 && std::isfinite(scale), "half-Cauchy: scale must be positive");
    return std::fabs(scale * std::tan(kPi * (rng.uniform() - 0.5)));
}

double sample_z(double c, double d, Rng& rng) {
    require(c > 0.0 && d > 0.0, "Z distribution: c and d must be positive");
    const double g1 = rng.gamma(c);
    const double g2 = rng.gamma(d);
    return std::log(g1) - std::log(g2);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace tvpqr::dist
