#include "tvpqr/shrinkage.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvpqr/distributions.hpp"
#include "tvpqr/errors.hpp"
#include "tvpqr/state_space.hpp"

namespace tvpqr::shrink {

using dist::sample_inverse_gamma;

// Omori, Chib, Shephard & Nakajima (2007).
const double LogChiSqMixture::weight[kComponents] = {0.00609, 0.04775, 0.13057, 0.20674, 0.22715,
                                                     0.18842, 0.12047, 0.05591, 0.01575, 0.00115};
const double LogChiSqMixture::mean[kComponents] = {1.92677,  1.34744,  0.73504,  0.02266,  -0.85173,
                                                   -1.97278, -3.46788, -5.55246, -8.68384, -14.65000};
const double LogChiSqMixture::var[kComponents] = {0.11265, 0.17788, 0.26768, 0.40611, 0.62699,
                                                  0.98583, 1.57469, 2.54498, 4.16591, 7.33342};

std::string_view to_string(ShrinkageKind kind) {
    switch (kind) {
        case ShrinkageKind::InverseGamma: return "ig";
        case ShrinkageKind::StaticHorseshoe: return "shs";
        case ShrinkageKind::DynamicHorseshoe: return "dhs";
    }
    return "?";
}

ShrinkageKind parse_shrinkage(std::string_view tag) {
    if (tag == "ig" || tag == "iG") return ShrinkageKind::InverseGamma;
    if (tag == "shs") return ShrinkageKind::StaticHorseshoe;
    if (tag == "dhs") return ShrinkageKind::DynamicHorseshoe;
    throw InputError("unknown shrinkage prior '" + std::string(tag) + "' (expected ig, shs or dhs)");
}

ShsState ShsState::initial(Eigen::Index periods, Eigen::Index dim) {
    return ShsState{VectorXd::Constant(dim, 0.1), MatrixXd::Constant(periods, dim, 0.1), VectorXd::Ones(dim),
                    MatrixXd::Ones(periods, dim)};
}

double DhsState::lambda0() const { return std::exp(log_lambda0); }
VectorXd DhsState::lambda() const { return log_lambda.array().exp(); }
VectorXd DhsState::mu() const { return log_lambda.array() + log_lambda0; }

DhsState DhsState::initial(Eigen::Index periods, Eigen::Index dim, double global_scale, double log_omega) {
    DhsState s;
    s.psi = MatrixXd::Constant(periods, dim, log_omega);
    s.phi = VectorXd::Constant(dim, 0.5);
    s.pg_aux = MatrixXd::Ones(periods, dim);
    s.log_lambda0 = log_omega;
    s.log_lambda = VectorXd::Zero(dim);
    s.lambda0_aux = 1.0;
    s.lambda_aux = VectorXd::Ones(dim);
    s.global_scale = global_scale;
    return s;
}

VectorXd update_ig(const MatrixXd& increments, double prior_m, double prior_n, Rng& rng) {
    const auto n = increments.rows();
    if (n < 1) throw DomainError("iG update: need at least one increment");
    VectorXd omega(increments.cols());
    for (Eigen::Index k = 0; k < increments.cols(); ++k) {
        const double ss = increments.col(k).squaredNorm();
        omega(k) = sample_inverse_gamma(prior_m + 0.5 * static_cast<double>(n), prior_n + 0.5 * ss, rng);
    }
    return omega;
}

ShsUpdate update_shs(const MatrixXd& increments, const ShsState& state, Rng& rng) {
    const auto n = increments.rows();
    const auto K = increments.cols();
    if (state.phi_sq.rows() != n || state.phi_sq.cols() != K) throw DomainError("shs update: state shape mismatch");
    ShsUpdate out{state, MatrixXd(n, K)};
    ShsState& s = out.state;
    for (Eigen::Index k = 0; k < K; ++k) {
        double ss = 0.0;
        for (Eigen::Index t = 0; t < n; ++t) ss += increments(t, k) * increments(t, k) / s.phi_sq(t, k);
        s.lambda_sq(k) = std::max(
            sample_inverse_gamma(0.5 * static_cast<double>(n + 1), 1.0 / s.lambda_aux(k) + 0.5 * ss, rng), kScaleFloor);
        s.lambda_aux(k) = sample_inverse_gamma(1.0, 1.0 + 1.0 / s.lambda_sq(k), rng);
        for (Eigen::Index t = 0; t < n; ++t) {
            const double e2 = increments(t, k) * increments(t, k);
            s.phi_sq(t, k) = std::max(
                sample_inverse_gamma(1.0, 1.0 / s.phi_aux(t, k) + e2 / (2.0 * s.lambda_sq(k)), rng), kScaleFloor);
            s.phi_aux(t, k) = sample_inverse_gamma(1.0, 1.0 + 1.0 / s.phi_sq(t, k), rng);
            out.omega(t, k) = s.lambda_sq(k) * s.phi_sq(t, k);
        }
    }
    return out;
}

int sample_mixture_component(double r, Rng& rng) {
    using M = LogChiSqMixture;
    double logw[M::kComponents];
    double top = -INFINITY;
    for (int j = 0; j < M::kComponents; ++j) {
        const double d = r - M::mean[j];
        logw[j] = std::log(M::weight[j]) - 0.5 * std::log(M::var[j]) - d * d / (2.0 * M::var[j]);
        top = std::max(top, logw[j]);
    }
    double total = 0.0;
    double w[M::kComponents];
    for (int j = 0; j < M::kComponents; ++j) {
        w[j] = std::exp(logw[j] - top);
        total += w[j];
    }
    double u = rng.uniform() * total;
    for (int j = 0; j < M::kComponents; ++j) {
        u -= w[j];
        if (u <= 0.0) return j;
    }
    return M::kComponents - 1;
}

namespace {

double log_phi_prior(double phi) {
    const double x = 0.5 * (phi + 1.0);
    return (kPhiBetaA - 1.0) * std::log(x) + (kPhiBetaB - 1.0) * std::log1p(-x);
}

// phi | psi, mu, xi: Gaussian likelihood times the Beta prior. Independence MH
// with the truncated Gaussian conditional as proposal.
double sample_phi(const VectorXd& psi, double mu, const VectorXd& xi, double current, Rng& rng) {
    const auto n = psi.size();
    double prec = 0.0, lin = 0.0;
    for (Eigen::Index t = 1; t < n; ++t) {
        const double prev = psi(t - 1) - mu;
        prec += xi(t) * prev * prev;
        lin += xi(t) * (psi(t) - mu) * prev;
    }
    if (prec <= 0.0) {
        const double g1 = rng.gamma(kPhiBetaA), g2 = rng.gamma(kPhiBetaB);
        return 2.0 * g1 / (g1 + g2) - 1.0;
    }
    const double mean = lin / prec;
    const double sd = 1.0 / std::sqrt(prec);
    for (int it = 0; it < dist::kRejectionCap; ++it) {
        const double proposal = mean + sd * rng.normal();
        if (proposal <= -1.0 || proposal >= 1.0) continue;
        const double log_ratio = log_phi_prior(proposal) - log_phi_prior(current);
        return std::log(rng.uniform()) < log_ratio ? proposal : current;
    }
    return current;
}

}  // namespace

DhsUpdate update_dhs(const MatrixXd& increments, const DhsState& state, Rng& rng, DhsOptions options) {
    const auto n = increments.rows();
    const auto K = increments.cols();
    if (state.psi.rows() != n || state.psi.cols() != K || state.pg_aux.rows() != n)
        throw DomainError("dhs update: state shape mismatch");
    if (state.zc != state.zd) throw DomainError("dhs update: only symmetric Z innovations (c = d) are supported");
    const double pg_b = state.zc + state.zd;

    DhsUpdate out{state, MatrixXd(n, K)};
    DhsState& s = out.state;
    VectorXd a_prec = VectorXd::Zero(K);
    VectorXd b_lin = VectorXd::Zero(K);

    for (Eigen::Index k = 0; k < K; ++k) {
        const double mu = s.log_lambda0 + s.log_lambda(k);
        const double phi = s.phi(k);
        if (n > 0) {
            // (i) Polya-Gamma precisions of the current innovations.
            for (Eigen::Index t = 0; t < n; ++t) {
                const double nu = t == 0 ? s.psi(0, k) - mu : s.psi(t, k) - mu - phi * (s.psi(t - 1, k) - mu);
                s.pg_aux(t, k) = dist::sample_polya_gamma(pg_b, nu, rng);
            }
            // (ii) mixture indicators, then the log-variance path by AR(1) FFBS.
            VectorXd obs(n), obs_var(n), innov(n);
            for (Eigen::Index t = 0; t < n; ++t) {
                const double ystar = std::log(increments(t, k) * increments(t, k) + kLogOffset);
                const int j = sample_mixture_component(ystar - s.psi(t, k), rng);
                obs(t) = ystar - LogChiSqMixture::mean[j];
                obs_var(t) = LogChiSqMixture::var[j];
                innov(t) = 1.0 / s.pg_aux(t, k);
            }
            s.psi.col(k) = ssm::ffbs_ar1(obs, obs_var, mu, phi, innov, rng);
            // (iii) AR coefficient.
            if (!options.fix_phi) s.phi(k) = sample_phi(s.psi.col(k), mu, s.pg_aux.col(k), phi, rng);
            // Sufficient statistics of mu_k for the scale decomposition.
            const double ph = s.phi(k);
            a_prec(k) = s.pg_aux(0, k);
            b_lin(k) = s.pg_aux(0, k) * s.psi(0, k);
            for (Eigen::Index t = 1; t < n; ++t) {
                a_prec(k) += (1.0 - ph) * (1.0 - ph) * s.pg_aux(t, k);
                b_lin(k) += (1.0 - ph) * s.pg_aux(t, k) * (s.psi(t, k) - ph * s.psi(t - 1, k));
            }
        }
    }

    // Global/local scales. With lambda ~ C+(0, s), log lambda = log s + z / 2,
    // z ~ Z(1/2, 1/2, 0, 1) = N(0, 1/xi) mixed over xi ~ PG(1, 0).
    for (Eigen::Index k = 0; k < K; ++k) {
        const double prec = 4.0 * s.lambda_aux(k) + a_prec(k);
        const double mean = (b_lin(k) - a_prec(k) * s.log_lambda0) / prec;
        s.log_lambda(k) = mean + rng.normal() / std::sqrt(prec);
    }
    {
        const double log_s0 = std::log(s.global_scale);
        double prec = 4.0 * s.lambda0_aux;
        double lin = 4.0 * s.lambda0_aux * log_s0;
        for (Eigen::Index k = 0; k < K; ++k) {
            prec += a_prec(k);
            lin += b_lin(k) - a_prec(k) * s.log_lambda(k);
        }
        s.log_lambda0 = lin / prec + rng.normal() / std::sqrt(prec);
        s.lambda0_aux = dist::sample_polya_gamma(1.0, 2.0 * (s.log_lambda0 - log_s0), rng);
    }
    for (Eigen::Index k = 0; k < K; ++k) s.lambda_aux(k) = dist::sample_polya_gamma(1.0, 2.0 * s.log_lambda(k), rng);

    for (Eigen::Index k = 0; k < K; ++k) {
        for (Eigen::Index t = 0; t < n; ++t) {
            const double w = std::exp(s.psi(t, k));
            if (!std::isfinite(w) || w <= 0.0) throw NumericalError("dhs update: log-variance left the representable range", t);
            out.omega(t, k) = w;
        }
    }
    return out;
}

MatrixXd forecast_dhs_omega(const DhsState& state, int steps, Rng& rng) {
    const auto K = state.psi.cols();
    const auto n = state.psi.rows();
    MatrixXd omega(steps, K);
    const VectorXd mu = state.mu();
    for (Eigen::Index k = 0; k < K; ++k) {
        double last = n > 0 ? state.psi(n - 1, k) : mu(k);
        for (int j = 0; j < steps; ++j) {
            last = mu(k) + state.phi(k) * (last - mu(k)) + dist::sample_z(state.zc, state.zd, rng);
            omega(j, k) = std::min(std::exp(last), 1e300);
        }
    }
    return omega;
}

}  // namespace tvpqr::shrink
